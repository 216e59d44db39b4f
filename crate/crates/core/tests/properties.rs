use benford_core::conformance::{benford_vector, conformance_report, digit_histogram, weyl_magnitude};
use benford_core::matrixdyn::{matrix_power_entries_exact, Matrix};
use benford_core::orbits::{iterate_map, IndexRule, MapSpec};
use benford_core::rng::Stream;
use benford_core::twostep::{boundary_on_ray, classify_basin, delta_sequence, orbit_log_reals, r0_fixed_points, Basin, TwoStepParams, DEFAULT_MAX_ITER};
use benford_core::{SignedLogValue, Thresholds};
use num_bigint::BigUint;
use proptest::prelude::*;

fn log_seq(logs: &[f64], sign: i8) -> Vec<SignedLogValue> {
    logs.iter().map(|&y| SignedLogValue::from_log10(sign, y)).collect()
}

proptest! {
    #[test]
    fn weyl_is_scale_invariant(logs in prop::collection::vec(-1e3f64..1e3, 1..300), shift in -50.0f64..50.0, h in 1u32..8) {
        let seq = log_seq(&logs, 1);
        let shifted: Vec<_> = seq.iter().map(|v| v.shift(shift)).collect();
        let a = weyl_magnitude(&seq, h).unwrap();
        let b = weyl_magnitude(&shifted, h).unwrap();
        prop_assert!((a - b).abs() < 1e-12, "{} vs {}", a, b);
    }

    #[test]
    fn statistics_ignore_signs(logs in prop::collection::vec(-300f64..300.0, 100..400), flips in prop::collection::vec(any::<bool>(), 400)) {
        let seq = log_seq(&logs, 1);
        let mixed: Vec<_> = seq.iter().zip(&flips).map(|(v, f)| if *f { v.neg() } else { *v }).collect();
        let t = Thresholds::default();
        prop_assert_eq!(conformance_report(&seq, &t).unwrap(), conformance_report(&mixed, &t).unwrap());
    }

    #[test]
    fn histogram_counts_sum_to_nonzero(logs in prop::collection::vec(-50f64..50.0, 0..200), zeros in 0usize..20) {
        let mut seq = log_seq(&logs, -1);
        seq.extend(std::iter::repeat(SignedLogValue::ZERO).take(zeros));
        let h = digit_histogram(&seq);
        prop_assert_eq!(h.counts.iter().sum::<u64>(), logs.len() as u64);
        prop_assert_eq!(h.nonzero(), logs.len() as u64);
    }

    #[test]
    fn benford_vector_sums_to_n(n in 1u64..10_000_000) {
        let v = benford_vector(n);
        prop_assert_eq!(v.iter().sum::<u64>(), n);
        // every entry is within one of n log10(1 + 1/d)
        for (d, &c) in v.iter().enumerate() {
            let ideal = n as f64 * (1.0 + 1.0 / (d + 1) as f64).log10();
            prop_assert!((c as f64 - ideal).abs() < 1.0 + 1e-9);
        }
    }
}

#[test]
fn nonautonomous_orbit_scale_invariance() {
    let spec = MapSpec::NonAutonomousLinear { a: IndexRule::TwoPlusReciprocal };
    let a = iterate_map(&spec, SignedLogValue::from_f64(1.0).unwrap(), 10_000).unwrap().values;
    let b = iterate_map(&spec, SignedLogValue::from_f64(7.0).unwrap(), 10_000).unwrap().values;
    for h in 1..=5 {
        assert!((weyl_magnitude(&a, h).unwrap() - weyl_magnitude(&b, h).unwrap()).abs() < 1e-12);
    }
    assert!(conformance_report(&a, &Thresholds::default()).unwrap().passed());
}

#[test]
fn fibonacci_matrix_exact_identity() {
    // A^n = [[F_{n+1}, F_n], [F_n, F_{n-1}]]
    let a = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 0.0]]).unwrap();
    let mut fib = vec![BigUint::from(0u8), BigUint::from(1u8)];
    for i in 2..=92 {
        let next = &fib[i - 1] + &fib[i - 2];
        fib.push(next);
    }
    let want = |i: usize| fib[i].to_string();
    let entries = |k, l| matrix_power_entries_exact(&a, k, l, 90).unwrap();
    let (e11, e12, e21, e22) = (entries(1, 1), entries(1, 2), entries(2, 1), entries(2, 2));
    for n in 1..=90 {
        assert_eq!(e11[n - 1].to_string(), want(n + 1));
        assert_eq!(e12[n - 1].to_string(), want(n));
        assert_eq!(e21[n - 1].to_string(), want(n));
        assert_eq!(e22[n - 1].to_string(), want(n - 1));
    }
}

#[test]
fn two_step_rescaling_invariance() {
    // x'_n = c x_n solves the recursion with a_i' = a_i c^(1 - b_i). The
    // orbit amplifies input rounding by b^n, so c is a power of two to keep
    // both parameter sets exactly representable.
    let (a1, a2, b1, b2) = (1.0, 1.0, 2.0, 2.0);
    let p = TwoStepParams::new(a1, a2, b1, b2).unwrap();
    let x = orbit_log_reals(&p, 1.7, 2.2, 2_000).unwrap();
    for c in [2.0f64, 0.25] {
        let q = TwoStepParams::new(a1 * c.powf(1.0 - b1), a2 * c.powf(1.0 - b2), b1, b2).unwrap();
        let y = orbit_log_reals(&q, 1.7 * c, 2.2 * c, 2_000).unwrap();
        for h in 1..=5 {
            assert!((weyl_magnitude(&x, h).unwrap() - weyl_magnitude(&y, h).unwrap()).abs() < 1e-10);
        }
    }
}

/// `Some(limit)` if the tail of a parity subsequence has settled, `None`
/// if it has run off to `+inf`.
fn tail_limit(d: &[f64]) -> Option<f64> {
    let last = *d.last().unwrap();
    if last > 100.0 {
        return None;
    }
    let prev = d[d.len() - 2];
    assert!((last - prev).abs() < 1e-9, "parity subsequence neither settled nor escaped: {prev} {last}");
    Some(last)
}

#[test]
fn case_iii_delta_dichotomy() {
    for (a1, b1, b2) in [(0.1, 1.2, 2.0), (1.0, 1.2, 2.0), (0.05, 1.5, 3.0)] {
        let p = TwoStepParams::new(a1, 1.0, b1, b2).unwrap();
        let fixed = r0_fixed_points(&p).unwrap();
        let mut rng = Stream::new(2024, 0);
        let mut finite = 0;
        for _ in 0..100 {
            let x1 = 1.5 + 3.5 * rng.uniform_open();
            let x2 = 1.5 + 3.5 * rng.uniform_open();
            assert_eq!(classify_basin(&p, x1, x2, DEFAULT_MAX_ITER).unwrap().label, Basin::AInfty);
            let d = delta_sequence(&p, x1, x2, 160).unwrap();
            // values[i] is delta_{i+2}
            let odd: Vec<f64> = d.values.iter().skip(1).step_by(2).copied().collect();
            let even: Vec<f64> = d.values.iter().step_by(2).copied().collect();
            let limits = [tail_limit(&odd), tail_limit(&even)];
            assert!(limits.iter().any(Option::is_none), "both parities finite for ({x1}, {x2})");
            for l in limits.into_iter().flatten() {
                finite += 1;
                assert!(fixed.iter().any(|r| (l - r).abs() < 1e-6), "limit {l} not in {fixed:?}");
            }
        }
        if fixed.is_empty() {
            assert_eq!(finite, 0);
        }
    }
}

#[test]
fn case_i_delta_rate() {
    // delta_n b1^-n converges to a negative constant
    let p = TwoStepParams::new(1.0, 1.0, 2.0, 2.0).unwrap();
    let d = delta_sequence(&p, 2.0, 2.0, 60).unwrap();
    let scaled: Vec<f64> = (40..=60).map(|n| d.get(n).unwrap() / 2f64.powi(n as i32)).collect();
    assert!(scaled.iter().all(|s| *s < 0.0));
    assert!((scaled[20] - scaled[0]).abs() < 1e-9 * scaled[0].abs());
}

#[test]
fn boundary_ray_monotone() {
    let p = TwoStepParams::new(1.0, 1.0, 2.0, 2.0).unwrap();
    let tol = 1e-9;
    for dir in [(1.0, 1.0), (2.0, 1.0), (1.0, 5.0)] {
        let norm: f64 = f64::hypot(dir.0, dir.1);
        let (u, v) = (dir.0 / norm, dir.1 / norm);
        let r = boundary_on_ray(&p, (u, v), tol).unwrap();
        for k in 0..100 {
            let s = 2.0 * r * (k as f64 + 0.5) / 100.0;
            if (s - r).abs() <= tol {
                continue;
            }
            let label = classify_basin(&p, s * u, s * v, DEFAULT_MAX_ITER).unwrap().label;
            assert_eq!(label, if s < r { Basin::A0 } else { Basin::AInfty }, "r = {s}, boundary {r}");
        }
    }
}
