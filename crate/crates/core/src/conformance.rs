//! Digit histograms, distance-to-Benford statistics and the conformance verdict.
//!
//! All statistics work on the mantissa `log10 S(x)` of each nonzero element.
//! Zeros are excluded and counted separately.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::significand::SignedLogValue;

/// Benford first-digit probability `log10(1 + 1/d)`.
pub fn benford_probability(d: u8) -> f64 {
    debug_assert!((1..=9).contains(&d));
    libm::log10(1.0 + 1.0 / d as f64)
}

/// Counts of first significant digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DigitHistogram {
    /// `counts[d - 1]` is the number of elements with first digit `d`.
    pub counts: [u64; 9],
    pub total: u64,
    pub zeros_skipped: u64,
}

impl DigitHistogram {
    /// Histogram of a list of first digits, where 0 marks a zero element.
    pub fn from_digits(digits: &[u8]) -> Self {
        let mut h = DigitHistogram::default();
        for &d in digits {
            h.push_digit(d);
        }
        h
    }

    fn push_digit(&mut self, d: u8) {
        self.total += 1;
        match d {
            1..=9 => self.counts[d as usize - 1] += 1,
            _ => self.zeros_skipped += 1,
        }
    }

    pub fn nonzero(&self) -> u64 {
        self.total - self.zeros_skipped
    }

    /// Relative frequencies with respect to `total`.
    pub fn frequencies(&self) -> [f64; 9] {
        let mut f = [0.0; 9];
        if self.total > 0 {
            for (fi, &c) in f.iter_mut().zip(&self.counts) {
                *fi = c as f64 / self.total as f64;
            }
        }
        f
    }

    /// Percentages in hundredths of a percent, rounded half up using exact
    /// integer arithmetic (so `3010` means 30.10%).
    pub fn percent_hundredths(&self) -> [u64; 9] {
        let mut p = [0; 9];
        if self.total > 0 {
            for (pi, &c) in p.iter_mut().zip(&self.counts) {
                *pi = (2 * 10_000 * c + self.total) / (2 * self.total);
            }
        }
        p
    }

    /// Chi-square statistic of the nonzero counts against Benford probabilities.
    pub fn chi2(&self) -> f64 {
        let n = self.nonzero() as f64;
        if n == 0.0 {
            return 0.0;
        }
        (1..=9u8)
            .map(|d| {
                let e = n * benford_probability(d);
                let o = self.counts[d as usize - 1] as f64;
                (o - e) * (o - e) / e
            })
            .sum()
    }
}

/// First-digit histogram of a sequence.
pub fn digit_histogram(seq: &[SignedLogValue]) -> DigitHistogram {
    let mut h = DigitHistogram::default();
    for v in seq {
        h.push_digit(v.first_digit());
    }
    h
}

fn nonzero_mantissas(seq: &[SignedLogValue]) -> Vec<f64> {
    seq.iter().filter(|v| !v.is_zero()).map(|v| v.mantissa()).collect()
}

/// Kolmogorov-Smirnov distance between the empirical significand law and
/// `log10 t`, exact over the sorted sample.
pub fn ks_distance(seq: &[SignedLogValue]) -> Result<f64> {
    let mut u = nonzero_mantissas(seq);
    if u.is_empty() {
        return Err(Error::domain("KS distance of an all-zero sequence"));
    }
    Ok(ks_of_uniform_sample(&mut u))
}

/// KS distance of a sample in `[0,1)` to the uniform law. Sorts in place.
pub fn ks_of_uniform_sample(u: &mut [f64]) -> f64 {
    u.sort_unstable_by(f64::total_cmp);
    let n = u.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in u.iter().enumerate() {
        let i = i as f64;
        d = d.max((i + 1.0) / n - x).max(x - i / n);
    }
    d.clamp(0.0, 1.0)
}

/// `|mean of exp(2 pi i h log10|x_n|)|` over nonzero elements.
pub fn weyl_magnitude(seq: &[SignedLogValue], h: u32) -> Result<f64> {
    if h == 0 {
        return Err(Error::param("h", "harmonic must be positive"));
    }
    let mut n = 0usize;
    let (mut re, mut im) = (0.0f64, 0.0f64);
    for v in seq.iter().filter(|v| !v.is_zero()) {
        let phase = v.mantissa() * h as f64;
        let phase = phase - libm::floor(phase);
        let (s, c) = libm::sincos(2.0 * PI * phase);
        re += c;
        im += s;
        n += 1;
    }
    if n == 0 {
        return Err(Error::domain("Weyl sum of an empty sequence"));
    }
    Ok((libm::hypot(re, im) / n as f64).min(1.0))
}

/// Integer apportionment of `n` closest to `n * (log10 2, ..., log10(10/9))`.
///
/// Floors first, then hands the remaining units to the largest remainders,
/// ties going to the smaller digit. This minimizes the Euclidean distance
/// under the sum constraint.
pub fn benford_vector(n: u64) -> [u64; 9] {
    let mut v = [0u64; 9];
    let mut rem = [(0.0f64, 0usize); 9];
    for d in 0..9 {
        let target = n as f64 * benford_probability(d as u8 + 1);
        let fl = libm::floor(target);
        v[d] = fl as u64;
        rem[d] = (target - fl, d);
    }
    let assigned: u64 = v.iter().sum();
    rem.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, d) in rem.iter().take((n - assigned) as usize) {
        v[d] += 1;
    }
    v
}

/// Benford percentages truncated to hundredths, matching how reference
/// tables usually print the exact law (`log10(3/2)` shows as 17.60).
pub fn benford_percent_hundredths_truncated() -> [u64; 9] {
    let mut p = [0; 9];
    for (d, pi) in p.iter_mut().enumerate() {
        *pi = libm::floor(10_000.0 * benford_probability(d as u8 + 1)) as u64;
    }
    p
}

/// Pass/fail thresholds for [`conformance_report`].
///
/// The reference values apply at `reference_n` elements and are scaled by
/// `sqrt(reference_n / n)` for other lengths. This is a finite-sample
/// convention: the underlying property is a limit statement.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Thresholds {
    pub ks: f64,
    pub weyl: f64,
    pub harmonics: u32,
    pub reference_n: u64,
    pub min_nonzero: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { ks: 0.03, weyl: 0.05, harmonics: 5, reference_n: 10_000, min_nonzero: 100 }
    }
}

impl Thresholds {
    /// `(ks, weyl)` thresholds effective at `n` elements.
    pub fn scaled(&self, n: usize) -> (f64, f64) {
        let s = libm::sqrt(self.reference_n as f64 / n.max(1) as f64);
        (self.ks * s, self.weyl * s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Verdict {
    Pass,
    Fail,
}

/// Summary statistics of a sequence against Benford's law.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConformanceReport {
    /// Number of elements, zeros included.
    pub n: usize,
    pub ks: f64,
    /// `(h, magnitude)` for `h = 1..=harmonics`.
    pub weyl: Vec<(u32, f64)>,
    pub chi2: f64,
    pub digit_freq: [f64; 9],
    pub verdict: Verdict,
}

impl ConformanceReport {
    pub fn max_weyl(&self) -> f64 {
        self.weyl.iter().map(|w| w.1).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Computes every statistic and the verdict: Pass iff the KS distance and all
/// Weyl magnitudes are within the (length-scaled) thresholds.
pub fn conformance_report(seq: &[SignedLogValue], thresholds: &Thresholds) -> Result<ConformanceReport> {
    let hist = digit_histogram(seq);
    let nonzero = hist.nonzero() as usize;
    if nonzero < thresholds.min_nonzero.max(1) {
        return Err(Error::InsufficientData { nonzero, required: thresholds.min_nonzero.max(1) });
    }
    let ks = ks_distance(seq)?;
    let weyl = (1..=thresholds.harmonics)
        .map(|h| weyl_magnitude(seq, h).map(|w| (h, w)))
        .collect::<Result<Vec<_>>>()?;
    let (ks_thr, weyl_thr) = thresholds.scaled(seq.len());
    let pass = ks <= ks_thr && weyl.iter().all(|w| w.1 <= weyl_thr);
    Ok(ConformanceReport {
        n: seq.len(),
        ks,
        weyl,
        chi2: hist.chi2(),
        digit_freq: hist.frequencies(),
        verdict: if pass { Verdict::Pass } else { Verdict::Fail },
    })
}
