//! Executes an [`ExperimentConfig`].

use anyhow::Context;
use benford_core::conformance::{conformance_report, DigitHistogram};
use benford_core::matrixdyn::{linear_recursion, markov_sequences, matrix_power_entries, matrix_power_entries_exact, random_stochastic_matrix, Matrix, RecursionSpec};
use benford_core::oracle::{exact_digit_histogram, ExactSequenceKind};
use benford_core::orbits::{flow_occupation, iterate_map, newton_sequences};
use benford_core::rng::Stream;
use benford_core::significand::LogAccumulator;
use benford_core::stochasticdyn::{gbm_path, iid_product_path, rv_power_path, GbmSpec};
use benford_core::twostep::{classify_basin, orbit_log_reals, DEFAULT_MAX_ITER};
use benford_core::{ConformanceReport, SignedLogValue};
use serde::Serialize;

use crate::config::{two_step_params, ExperimentConfig, MarkovSeries, NewtonSeries, System};

/// Largest allowed deviation of a flow's occupation fraction from `log10 t`.
pub const FLOW_TOLERANCE: f64 = 0.01;

/// Occupation fractions of a flow at the levels `t = 1.1, 1.2, ..., 9.9`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Occupation {
    pub levels: Vec<f64>,
    pub fractions: Vec<f64>,
    pub max_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub system: &'static str,
    pub n: usize,
    pub seed: u64,
    /// First-digit percentages rounded half-up to two decimals. For exact
    /// sequences they come from the big-integer oracle.
    pub digit_percent: Option<Vec<String>>,
    pub conformance: Option<ConformanceReport>,
    pub occupation: Option<Occupation>,
    pub notes: Vec<String>,
    pub passed: bool,
}

/// Result of a run: the report and the generated sequence (empty for flows).
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: RunReport,
    pub sequence: Vec<SignedLogValue>,
}

/// Formats hundredths of a percent as `"30.10"`.
pub fn format_hundredths(h: u64) -> String {
    format!("{}.{:02}", h / 100, h % 100)
}

fn percent_strings(h: &DigitHistogram) -> Vec<String> {
    h.percent_hundredths().iter().map(|&x| format_hundredths(x)).collect()
}

pub fn run(cfg: &ExperimentConfig) -> anyhow::Result<RunOutput> {
    cfg.validate()?;
    let n = cfg.n;
    let mut notes = Vec::new();
    let mut exact_hist = None;
    let sequence = match &cfg.system {
        System::Exact { sequence } => {
            exact_hist = Some(exact_digit_histogram(sequence, n)?);
            notes.push("digit percentages from exact integers; KS and Weyl statistics from log-domain generation".into());
            log_domain_exact(sequence, n)?
        }
        System::Map { map, x0 } => {
            let orbit = iterate_map(map, SignedLogValue::from_f64(*x0)?, n)?;
            if let Some(reason) = orbit.truncation {
                notes.push(format!("orbit truncated after {} terms: {reason}", orbit.values.len()));
            }
            orbit.values
        }
        System::Newton { target, x0, series } => {
            let s = newton_sequences(*target, *x0, n)?;
            match series {
                NewtonSeries::Diffs => s.diffs,
                NewtonSeries::Errors => s.errors,
            }
        }
        System::Flow { flow } => {
            let levels: Vec<f64> = (11..100).map(|k| k as f64 / 10.0).collect();
            let fractions = flow_occupation(flow, &levels)?;
            let max_deviation = levels.iter().zip(&fractions).map(|(t, f)| (f - t.log10()).abs()).fold(0.0, f64::max);
            let passed = max_deviation <= FLOW_TOLERANCE;
            notes.push(format!("pass iff every occupation fraction is within {FLOW_TOLERANCE} of log10 t"));
            let report = RunReport {
                system: cfg.system.kind(),
                n,
                seed: cfg.seed,
                digit_percent: None,
                conformance: None,
                occupation: Some(Occupation { levels, fractions, max_deviation }),
                notes,
                passed,
            };
            return Ok(RunOutput { report, sequence: Vec::new() });
        }
        System::MatrixPower { matrix, row, col, exact } => {
            let a = Matrix::from_rows(matrix)?;
            if *exact {
                matrix_power_entries_exact(&a, *row, *col, n)?.into_iter().map(SignedLogValue::from_i128).collect()
            } else {
                matrix_power_entries(&a, *row, *col, n)?
            }
        }
        System::LinearRecursion { recursion } => {
            let r = linear_recursion(recursion, n)?;
            notes.push(format!("dominant root zeta = {}", r.zeta));
            r.seq
        }
        System::Markov { matrix, dim, row, col, series } => {
            let p = match matrix {
                Some(m) => Matrix::from_rows(m)?,
                None => random_stochastic_matrix(*dim, &mut Stream::new(cfg.seed, 0))?,
            };
            let s = markov_sequences(&p, *row, *col, n)?;
            notes.push(format!("P = {:?}", p.rows()));
            notes.push(format!("P* = {:?}, second eigenvalue modulus {}", s.p_star.rows(), s.lambda2));
            if s.eventually_zero() {
                notes.push("sequences are eventually zero".into());
            }
            match series {
                MarkovSeries::Diff => s.diff,
                MarkovSeries::Gap => s.gap,
            }
        }
        System::RvPower { dist } => with_resamples(rv_power_path(dist, &mut Stream::new(cfg.seed, 0), n)?, &mut notes),
        System::IidProduct { dist } => with_resamples(iid_product_path(dist, &mut Stream::new(cfg.seed, 0), n)?, &mut notes),
        System::Gbm { mu, sigma, x0, dt } => {
            let spec = GbmSpec { mu: *mu, sigma: *sigma, x0: *x0, t_end: n as f64 * dt, dt: *dt };
            notes.push("grid values at t = 0, dt, ..., (n-1) dt; their statistics are the path occupation".into());
            let mut path = gbm_path(&spec, &mut Stream::new(cfg.seed, 0))?;
            path.truncate(n);
            path.into_iter().map(|p| p.1).collect()
        }
        System::TwoStep { a1, a2, b1, b2, extended, x1, x2 } => {
            let p = two_step_params(*a1, *a2, *b1, *b2, *extended)?;
            let basin = classify_basin(&p, *x1, *x2, DEFAULT_MAX_ITER)?;
            notes.push(format!("basin {:?} after {} iterations", basin.label, basin.iterations_used));
            if let Some(case) = p.case() {
                notes.push(format!("case {case:?}"));
            }
            orbit_log_reals(&p, *x1, *x2, n)?
        }
    };
    let conformance = conformance_report(&sequence, &cfg.thresholds).context("conformance statistics")?;
    let hist = exact_hist.unwrap_or_else(|| benford_core::conformance::digit_histogram(&sequence));
    let report = RunReport {
        system: cfg.system.kind(),
        n,
        seed: cfg.seed,
        digit_percent: Some(percent_strings(&hist)),
        passed: conformance.passed(),
        conformance: Some(conformance),
        occupation: None,
        notes,
    };
    Ok(RunOutput { report, sequence })
}

fn with_resamples(path: benford_core::stochasticdyn::SamplePath, notes: &mut Vec<String>) -> Vec<SignedLogValue> {
    if path.resamples > 0 {
        notes.push(format!("{} zero variates redrawn", path.resamples));
    }
    path.values
}

/// The oracle's sequences generated in the log domain.
pub fn log_domain_exact(kind: &ExactSequenceKind, n: usize) -> anyhow::Result<Vec<SignedLogValue>> {
    let cumulative = |f: &dyn Fn(usize) -> f64| {
        let mut acc = LogAccumulator::new(0.0);
        (1..=n)
            .map(|k| {
                acc.add(f(k));
                acc.value(1)
            })
            .collect::<Vec<_>>()
    };
    Ok(match kind {
        ExactSequenceKind::PowerOfTwo => cumulative(&|_| std::f64::consts::LOG10_2),
        ExactSequenceKind::Factorial => cumulative(&|k| (k as f64).log10()),
        ExactSequenceKind::Fibonacci => linear_recursion(&RecursionSpec { coeffs: vec![1.0, 1.0], seeds: vec![1.0, 1.0] }, n)?.seq,
        ExactSequenceKind::LinearRecursion { coeffs, seeds } => {
            let spec = RecursionSpec { coeffs: coeffs.iter().map(|&c| c as f64).collect(), seeds: seeds.iter().map(|&s| s as f64).collect() };
            linear_recursion(&spec, n)?.seq
        }
        &ExactSequenceKind::TwoStepPoly { a1, a2, b1, b2, x1, x2 } => {
            let p = benford_core::twostep::TwoStepParams::new(a1 as f64, a2 as f64, b1 as f64, b2 as f64)?;
            orbit_log_reals(&p, x1 as f64, x2 as f64, n)?
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use benford_core::oracle::exact_first_digits;

    #[test]
    fn figure_one_columns() {
        let cases = [
            (ExactSequenceKind::PowerOfTwo, ["30.10", "17.61", "12.49", "9.70", "7.91", "6.70", "5.79", "5.12", "4.58"]),
            (ExactSequenceKind::Factorial, ["29.56", "17.89", "12.76", "9.63", "7.94", "7.15", "5.71", "5.10", "4.26"]),
        ];
        for (kind, want) in cases {
            let out = run(&ExperimentConfig::new(System::Exact { sequence: kind }, 10_000)).unwrap();
            assert_eq!(out.report.digit_percent.unwrap(), want);
            assert!(out.report.passed);
        }
    }

    #[test]
    fn log_domain_agrees_with_oracle() {
        for kind in [ExactSequenceKind::PowerOfTwo, ExactSequenceKind::Fibonacci, ExactSequenceKind::Factorial] {
            let seq = log_domain_exact(&kind, 3000).unwrap();
            let exact = exact_first_digits(&kind, 3000).unwrap();
            let bad = seq.iter().zip(&exact).filter(|(v, d)| v.first_digit() != **d).count();
            assert!(bad <= 2, "{kind:?}: {bad}");
        }
    }

    #[test]
    fn deterministic() {
        let mut cfg = ExperimentConfig::new(System::Markov { matrix: None, dim: 2, row: 1, col: 1, series: MarkovSeries::Diff }, 2000);
        cfg.seed = 7;
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a.report, b.report);
        assert_eq!(a.sequence, b.sequence);
        assert!(a.report.passed);
    }

    #[test]
    fn tens_fail() {
        let cfg = ExperimentConfig::new(System::MatrixPower { matrix: vec![vec![10.0, 0.0], vec![0.0, 10.0]], row: 1, col: 1, exact: true }, 30);
        let mut cfg = cfg;
        cfg.thresholds.min_nonzero = 10;
        let out = run(&cfg).unwrap();
        assert!(!out.report.passed);
        assert_eq!(out.report.digit_percent.unwrap()[0], "100.00");
    }
}
