//! Random powers, iid products and geometric Brownian motion.
//!
//! All randomness comes from [`Stream`]s, so every result is a function of
//! the seed. Ensembles give each member its own stream `(seed, index)`.

use alloc::vec::Vec;

use crate::conformance::ks_of_uniform_sample;
use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::significand::{LogAccumulator, SignedLogValue};

/// Number of ternary digits drawn for a Cantor variate.
pub const CANTOR_DIGITS: u32 = 60;

/// A one-dimensional law.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(tag = "family", rename_all = "snake_case"))]
pub enum DistSpec {
    Uniform { lo: f64, hi: f64 },
    Exponential { rate: f64 },
    Normal { mean: f64, sd: f64 },
    /// `10^Y` with `Y` uniform on the middle-thirds Cantor set.
    Cantor10,
    /// Point mass, for degenerate checks.
    Constant { value: f64 },
}

impl DistSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = |c: bool, name: &'static str, why: &'static str| if c { Ok(()) } else { Err(Error::param(name, why)) };
        match *self {
            DistSpec::Uniform { lo, hi } => ok(lo.is_finite() && hi.is_finite() && lo < hi, "lo", "need finite lo < hi"),
            DistSpec::Exponential { rate } => ok(rate > 0.0 && rate.is_finite(), "rate", "must be positive"),
            DistSpec::Normal { mean, sd } => {
                ok(mean.is_finite(), "mean", "must be finite")?;
                ok(sd > 0.0 && sd.is_finite(), "sd", "must be positive")
            }
            DistSpec::Cantor10 => Ok(()),
            DistSpec::Constant { value } => ok(value != 0.0 && value.is_finite(), "value", "must be finite and nonzero"),
        }
    }

    /// One variate as `(sign, log10 |x|)`, or `None` for an exact zero.
    fn sample_log(&self, rng: &mut Stream) -> Option<(i8, f64)> {
        let x = match *self {
            DistSpec::Uniform { lo, hi } => lo + (hi - lo) * rng.uniform_open(),
            DistSpec::Exponential { rate } => rng.exponential(rate),
            DistSpec::Normal { mean, sd } => mean + sd * rng.normal(),
            DistSpec::Cantor10 => return Some((1, cantor(rng))),
            DistSpec::Constant { value } => value,
        };
        (x != 0.0).then(|| (if x < 0.0 { -1 } else { 1 }, libm::log10(x.abs())))
    }

    /// Draws until the variate is nonzero; returns it with the number of
    /// rejected zeros.
    fn sample_nonzero(&self, rng: &mut Stream) -> ((i8, f64), u64) {
        let mut rejected = 0;
        loop {
            match self.sample_log(rng) {
                Some(v) => return (v, rejected),
                None => rejected += 1,
            }
        }
    }
}

/// `sum_k 2 d_k 3^-k` with fair bits `d_k`, summed smallest term first.
fn cantor(rng: &mut Stream) -> f64 {
    let bits = rng.next_u64();
    let mut y = 0.0;
    for k in (1..=CANTOR_DIGITS).rev() {
        if bits >> (k - 1) & 1 == 1 {
            y += 2.0 * libm::pow(3.0, -(k as f64));
        }
    }
    y
}

/// A sampled sequence and the number of zero variates that were redrawn.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    pub values: Vec<SignedLogValue>,
    pub resamples: u64,
}

/// `X, X^2, ..., X^N` for a single draw `X`.
pub fn rv_power_path(dist: &DistSpec, rng: &mut Stream, n: usize) -> Result<SamplePath> {
    dist.validate()?;
    let ((sign, l), resamples) = dist.sample_nonzero(rng);
    let mut acc = LogAccumulator::new(0.0);
    let mut values = Vec::with_capacity(n);
    for i in 1..=n {
        acc.add(l);
        let s = if sign < 0 && i % 2 == 1 { -1 } else { 1 };
        values.push(acc.value(s));
    }
    Ok(SamplePath { values, resamples })
}

/// Partial products `X_1, X_1 X_2, ...` of iid draws.
pub fn iid_product_path(dist: &DistSpec, rng: &mut Stream, n: usize) -> Result<SamplePath> {
    dist.validate()?;
    let mut acc = LogAccumulator::new(0.0);
    let mut sign = 1;
    let mut resamples = 0;
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        let ((s, l), r) = dist.sample_nonzero(rng);
        resamples += r;
        sign *= s;
        acc.add(l);
        values.push(acc.value(sign));
    }
    Ok(SamplePath { values, resamples })
}

/// Minimum Monte Carlo sample size for [`distribution_ks_at_n`].
pub const MIN_SAMPLES: usize = 10_000;

/// Distance of the law of `S(X^n)` from Benford's law.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DistributionCheck {
    pub ks: f64,
    /// `|E exp(2 pi i n log10 |X|)|`, estimated.
    pub fourier: f64,
    pub samples: usize,
    pub resamples: u64,
}

/// Monte Carlo estimate over independent draws of `X`.
pub fn distribution_ks_at_n(dist: &DistSpec, n: u64, samples: usize, rng: &mut Stream) -> Result<DistributionCheck> {
    dist.validate()?;
    if n == 0 {
        return Err(Error::param("n", "must be positive"));
    }
    if samples < MIN_SAMPLES {
        return Err(Error::param("samples", alloc::format!("need at least {MIN_SAMPLES}")));
    }
    let mut u = Vec::with_capacity(samples);
    let (mut re, mut im) = (0.0, 0.0);
    let mut resamples = 0;
    for _ in 0..samples {
        let ((_, l), r) = dist.sample_nonzero(rng);
        resamples += r;
        let mut acc = LogAccumulator::new(0.0);
        // n log10|X| without losing the fraction for large n
        let p = n as f64 * l;
        acc.add_dd(p, libm::fma(n as f64, l, -p));
        let m = acc.value(1).mantissa();
        let (s, c) = libm::sincos(2.0 * core::f64::consts::PI * m);
        re += c;
        im += s;
        u.push(m);
    }
    let k = samples as f64;
    Ok(DistributionCheck { ks: ks_of_uniform_sample(&mut u), fourier: libm::hypot(re / k, im / k), samples, resamples })
}

/// Geometric Brownian motion `x0 exp((mu - sigma^2/2) t + sigma W_t)` sampled
/// on the grid `t = 0, dt, 2 dt, ...` up to `t_end`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GbmSpec {
    pub mu: f64,
    pub sigma: f64,
    pub x0: f64,
    pub t_end: f64,
    pub dt: f64,
}

impl GbmSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::param("sigma", "must be positive"));
        }
        if !(self.x0 > 0.0 && self.x0.is_finite()) {
            return Err(Error::param("x0", "must be positive"));
        }
        if !self.mu.is_finite() {
            return Err(Error::param("mu", "must be finite"));
        }
        if !(self.dt > 0.0 && self.t_end >= self.dt && self.t_end.is_finite()) {
            return Err(Error::param("dt", "need 0 < dt <= t_end"));
        }
        if self.t_end / self.dt > 1e8 {
            return Err(Error::param("dt", "more than 1e8 grid steps"));
        }
        Ok(())
    }

    /// Number of grid steps, `round(t_end / dt)`.
    pub fn steps(&self) -> usize {
        libm::round(self.t_end / self.dt) as usize
    }
}

/// One path at the grid points, `(t_k, X_{t_k})` for `k = 0..=steps`.
///
/// The Brownian motion is a sum of independent `N(0, dt)` increments and the
/// drift is evaluated at each grid time, so the grid values have exactly the
/// law of the process.
pub fn gbm_path(spec: &GbmSpec, rng: &mut Stream) -> Result<Vec<(f64, SignedLogValue)>> {
    spec.validate()?;
    let steps = spec.steps();
    let sd = libm::sqrt(spec.dt);
    let drift = spec.mu - 0.5 * spec.sigma * spec.sigma;
    let l0 = libm::log10(spec.x0);
    let log10e = core::f64::consts::LOG10_E;
    let mut w = 0.0;
    let mut path = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        if k > 0 {
            w += sd * rng.normal();
        }
        let t = k as f64 * spec.dt;
        path.push((t, SignedLogValue::from_log10(1, l0 + (drift * t + spec.sigma * w) * log10e)));
    }
    Ok(path)
}

/// KS distance of the time spent by the significand below each level,
/// as a left Riemann sum over the grid on `[0, t_end)`.
pub fn gbm_occupation_ks(path: &[(f64, SignedLogValue)]) -> Result<f64> {
    if path.len() < 2 {
        return Err(Error::InsufficientData { nonzero: path.len(), required: 2 });
    }
    let mut u: Vec<f64> = path[..path.len() - 1].iter().map(|p| p.1.mantissa()).collect();
    Ok(ks_of_uniform_sample(&mut u))
}

/// Law of `X_t` over an ensemble of independent paths.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GbmEnsemble {
    pub t: f64,
    pub paths: usize,
    pub ks: f64,
    /// Sample variance of `ln X_t`; the process has `sigma^2 t`.
    pub log_variance: f64,
}

/// Samples `X_t` for `paths` independent paths, path `i` drawing from
/// stream `(seed, i)`. Each path is advanced in one exact Gaussian step,
/// which has the same law at time `t` as any finer grid.
pub fn gbm_ensemble(spec: &GbmSpec, t: f64, paths: usize, seed: u64) -> Result<GbmEnsemble> {
    spec.validate()?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::param("t", "must be positive"));
    }
    if paths < 2 {
        return Err(Error::param("paths", "need at least 2"));
    }
    let drift = spec.mu - 0.5 * spec.sigma * spec.sigma;
    let sd = spec.sigma * libm::sqrt(t);
    let ln0 = libm::log(spec.x0);
    let mut u = Vec::with_capacity(paths);
    let (mut sum, mut sum2) = (0.0, 0.0);
    for i in 0..paths {
        let mut rng = Stream::new(seed, i as u64);
        let ln = ln0 + drift * t + sd * rng.normal();
        sum += ln;
        sum2 += ln * ln;
        u.push(SignedLogValue::from_log10(1, ln * core::f64::consts::LOG10_E).mantissa());
    }
    let k = paths as f64;
    let mean = sum / k;
    let log_variance = (sum2 - k * mean * mean) / (k - 1.0);
    Ok(GbmEnsemble { t, paths, ks: ks_of_uniform_sample(&mut u), log_variance })
}
