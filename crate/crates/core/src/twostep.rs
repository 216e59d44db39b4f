//! Nonlinear two-step recursions `x_n = a1 x_{n-1}^b1 + a2 x_{n-2}^b2`.
//!
//! Orbits are generated from `y_n = log10 x_n` with the stable log-sum form
//! `y_n = m + log10(10^(u-m) + 10^(v-m))`, `u = log a1 + b1 y_{n-1}`,
//! `v = log a2 + b2 y_{n-2}`, `m = max(u, v)`. Because `|y_n|` grows like
//! `b^n`, the orbit is evaluated in arbitrary precision with roughly
//! `n log2 b` bits so the fractional part of `y_n` stays exact to double
//! precision for the whole orbit.
//!
//! Basin classification and boundary searches only need the sign of the
//! long-run trend and use plain `f64`.

use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};

use astro_float::BigFloat;

use crate::conformance::{conformance_report, Thresholds, Verdict};
use crate::error::{Error, Result};
use crate::precise::{self, Ctx};
use crate::rng::Stream;
use crate::significand::SignedLogValue;

/// Default iteration budget of [`classify_basin`].
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Escape level for `|y|` (in decades) used by basin classification, for
/// unit coefficients.
pub const ESCAPE_LOG: f64 = 10.0;

/// Exact rational number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rational {
    pub num: i128,
    pub den: i128,
}

impl Rational {
    pub fn new(num: i128, den: i128) -> Result<Self> {
        if den == 0 {
            return Err(Error::param("den", "zero denominator"));
        }
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()) as i128;
        let s = if den < 0 { -1 } else { 1 };
        Ok(Rational { num: s * num / g.max(1), den: s * den / g.max(1) })
    }

    /// Parses `"3"`, `"-1.25"`, `"1.2e-3"` or `"7/5"` exactly.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::param("rational", format!("cannot parse `{s}` as an exact rational"));
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n: i128 = n.trim().parse().map_err(|_| bad())?;
            let d: i128 = d.trim().parse().map_err(|_| bad())?;
            return Rational::new(n, d);
        }
        let (mant, exp) = match s.find(['e', 'E']) {
            Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
            None => (s, 0),
        };
        let (neg, mant) = match mant.strip_prefix('-') {
            Some(m) => (true, m),
            None => (false, mant.strip_prefix('+').unwrap_or(mant)),
        };
        let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
        if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let digits = format!("{int}{frac}");
        let mut num: i128 = digits.trim_start_matches('0').parse().unwrap_or(0);
        let mut scale = exp - frac.len() as i32;
        let mut den: i128 = 1;
        while scale > 0 {
            num = num.checked_mul(10).ok_or_else(bad)?;
            scale -= 1;
        }
        while scale < 0 {
            den = den.checked_mul(10).ok_or_else(bad)?;
            scale += 1;
        }
        Rational::new(if neg { -num } else { num }, den)
    }

    /// Simplest fraction with denominator at most `max_den` that converts
    /// back to exactly `x`, found among the continued-fraction convergents.
    pub fn recover(x: f64, max_den: i128) -> Option<Self> {
        if !x.is_finite() {
            return None;
        }
        let (mut h0, mut h1) = (0i128, 1i128);
        let (mut k0, mut k1) = (1i128, 0i128);
        let mut r = x;
        for _ in 0..64 {
            let a = libm::floor(r);
            if a.abs() > 1e18 {
                return None;
            }
            let a = a as i128;
            let h2 = a.checked_mul(h1)?.checked_add(h0)?;
            let k2 = a.checked_mul(k1)?.checked_add(k0)?;
            if k2 > max_den {
                return None;
            }
            if h2 as f64 / k2 as f64 == x {
                return Rational::new(h2, k2).ok();
            }
            (h0, h1, k0, k1) = (h1, h2, k1, k2);
            let f = r - libm::floor(r);
            if f == 0.0 {
                return None;
            }
            r = 1.0 / f;
        }
        None
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Case of the recursion, by the sign of `b1^2 - b2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Case {
    /// `b1^2 > b2`: the first term dominates and `y_n ~ b1^n h`.
    I,
    /// `b1^2 = b2`: both terms stay comparable; ratios converge.
    II,
    /// `b1^2 < b2`: even and odd subsequences decouple, `y_{2n} ~ b2^n h`.
    III,
}

/// Parameters `(a1, a2, b1, b2)`.
///
/// The orbit uses the binary values of the parameters. The case label uses
/// the exact rationals they were entered as, when known.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoStepParams {
    a1: f64,
    a2: f64,
    b1: f64,
    b2: f64,
    extended: bool,
    case: Option<Case>,
}

impl TwoStepParams {
    /// Parameters with `a1, a2 > 0` and `b1, b2 > 1`. The exponents'
    /// rational values are recovered from the floats when they are simple
    /// fractions (denominator at most 10^6).
    pub fn new(a1: f64, a2: f64, b1: f64, b2: f64) -> Result<Self> {
        let rb1 = Rational::recover(b1, 1_000_000);
        let rb2 = Rational::recover(b2, 1_000_000);
        Self::build(a1, a2, b1, b2, rb1.zip(rb2), false)
    }

    /// Parameters given as exact decimal or fraction strings.
    pub fn parse(a1: &str, a2: &str, b1: &str, b2: &str) -> Result<Self> {
        let (ra1, ra2) = (Rational::parse(a1)?, Rational::parse(a2)?);
        let (rb1, rb2) = (Rational::parse(b1)?, Rational::parse(b2)?);
        Self::build(ra1.to_f64(), ra2.to_f64(), rb1.to_f64(), rb2.to_f64(), Some((rb1, rb2)), false)
    }

    /// Extended mode: exponents in `(0, 1]` are allowed. Only orbit
    /// generation and basin classification accept such parameters.
    pub fn extended(a1: f64, a2: f64, b1: f64, b2: f64) -> Result<Self> {
        let rb1 = Rational::recover(b1, 1_000_000);
        let rb2 = Rational::recover(b2, 1_000_000);
        Self::build(a1, a2, b1, b2, rb1.zip(rb2), true)
    }

    fn build(a1: f64, a2: f64, b1: f64, b2: f64, exact: Option<(Rational, Rational)>, extended: bool) -> Result<Self> {
        for (name, a) in [("a1", a1), ("a2", a2)] {
            if !(a.is_finite() && a > 0.0) {
                return Err(Error::param(name, "coefficient must be positive and finite"));
            }
        }
        for (name, b) in [("b1", b1), ("b2", b2)] {
            if !(b.is_finite() && b > 0.0) {
                return Err(Error::param(name, "exponent must be positive and finite"));
            }
            if !extended && b <= 1.0 {
                return Err(Error::param(name, "exponent must exceed 1 (use extended mode for b <= 1)"));
            }
        }
        let case = if b1 > 1.0 && b2 > 1.0 { Some(case_of(b1, b2, exact)) } else { None };
        Ok(TwoStepParams { a1, a2, b1, b2, extended, case })
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }
    pub fn a2(&self) -> f64 {
        self.a2
    }
    pub fn b1(&self) -> f64 {
        self.b1
    }
    pub fn b2(&self) -> f64 {
        self.b2
    }
    pub fn is_extended(&self) -> bool {
        self.extended
    }

    /// Case label, `None` when an exponent is at most 1.
    pub fn case(&self) -> Option<Case> {
        self.case
    }

    fn require_case(&self, want: Option<Case>) -> Result<Case> {
        let case = self.case.ok_or_else(|| Error::Refused("exponents must exceed 1 for shadowing analysis".into()))?;
        if let Some(w) = want {
            if w != case {
                return Err(Error::Refused(format!("operation needs case {w:?}, parameters are case {case:?}")));
            }
        }
        Ok(case)
    }

    /// Coefficients after rescaling `x -> c x` with `c = a_i^(1/(b_i - 1))`
    /// so that coefficient `i` becomes 1. Returns `(log10 c, a1', a2')`.
    fn rescaled(&self, unit: usize) -> (f64, f64, f64) {
        let (a, b) = if unit == 1 { (self.a1, self.b1) } else { (self.a2, self.b2) };
        let lc = libm::log10(a) / (b - 1.0);
        let a1 = if unit == 1 { 1.0 } else { self.a1 * libm::pow(10.0, lc * (1.0 - self.b1)) };
        let a2 = if unit == 2 { 1.0 } else { self.a2 * libm::pow(10.0, lc * (1.0 - self.b2)) };
        (lc, a1, a2)
    }

    fn la(&self) -> (f64, f64) {
        (libm::log10(self.a1), libm::log10(self.a2))
    }
}

fn case_of(b1: f64, b2: f64, exact: Option<(Rational, Rational)>) -> Case {
    let from_sign = |s: core::cmp::Ordering| match s {
        core::cmp::Ordering::Greater => Case::I,
        core::cmp::Ordering::Equal => Case::II,
        core::cmp::Ordering::Less => Case::III,
    };
    if let Some((r1, r2)) = exact {
        // b1^2 - b2 = (n1^2 d2 - n2 d1^2) / (d1^2 d2)
        let lhs = r1.num.checked_mul(r1.num).and_then(|x| x.checked_mul(r2.den));
        let rhs = r1.den.checked_mul(r1.den).and_then(|x| x.checked_mul(r2.num));
        if let (Some(l), Some(r)) = (lhs, rhs) {
            return from_sign(l.cmp(&r));
        }
    }
    // fma rounds once, so its sign is the exact sign of b1^2 - b2
    from_sign(libm::fma(b1, b1, -b2).partial_cmp(&0.0).unwrap_or(core::cmp::Ordering::Equal))
}

/// Case of the parameters (I, II or III).
pub fn classify_case(p: &TwoStepParams) -> Result<Case> {
    p.case.ok_or_else(|| Error::domain("case is defined only for exponents above 1"))
}

fn lse(u: f64, v: f64) -> f64 {
    if u >= v {
        u + libm::log10(1.0 + libm::pow(10.0, v - u))
    } else {
        v + libm::log10(1.0 + libm::pow(10.0, u - v))
    }
}

/// One step of the log recursion in `f64`.
fn step_f64(la1: f64, la2: f64, b1: f64, b2: f64, y2: f64, y1: f64) -> f64 {
    lse(la1 + b1 * y1, la2 + b2 * y2)
}

/// High-precision orbit state.
struct HpOrbit {
    ctx: Ctx,
    la1: BigFloat,
    la2: BigFloat,
    b1: BigFloat,
    b2: BigFloat,
    y2: BigFloat,
    y1: BigFloat,
}

enum Seed {
    Log(SignedLogValue),
    Real(f64),
}

impl HpOrbit {
    fn new(p: &TwoStepParams, s1: Seed, s2: Seed, steps: usize) -> Result<Self> {
        let start = |s: &Seed| match s {
            Seed::Log(v) => v.log_mag(),
            Seed::Real(x) => libm::log10(*x),
        };
        let growth = p.b1.max(p.b2);
        let scale = start(&s1).abs().max(start(&s2).abs()).max(libm::log10(p.a1).abs()).max(libm::log10(p.a2).abs());
        let mut ctx = Ctx::new(Ctx::bits_for(steps + 2, growth, scale))?;
        let mut seed = |s: Seed| -> Result<BigFloat> {
            match s {
                Seed::Log(v) if v.sign() > 0 => Ok(ctx.from_log_value(&v)),
                Seed::Real(x) if x > 0.0 && x.is_finite() => Ok(ctx.log10_f64(x)),
                _ => Err(Error::domain("seeds must be positive")),
            }
        };
        let y1 = seed(s1)?;
        let y2 = seed(s2)?;
        let la1 = ctx.log10_f64(p.a1);
        let la2 = ctx.log10_f64(p.a2);
        // exponents are exact doubles; one-word mantissas keep the products cheap
        let b1 = BigFloat::from_f64(p.b1, 64);
        let b2 = BigFloat::from_f64(p.b2, 64);
        Ok(HpOrbit { ctx, la1, la2, b1, b2, y2: y1, y1: y2 })
    }

    fn step(&mut self) -> &BigFloat {
        let c = &mut self.ctx;
        let u = c.add(&self.la1, &c.mul(&self.b1, &self.y1));
        let v = c.add(&self.la2, &c.mul(&self.b2, &self.y2));
        let y = c.log_sum(&u, &v);
        self.y2 = core::mem::replace(&mut self.y1, y);
        &self.y1
    }
}

fn hp_orbit(p: &TwoStepParams, s1: Seed, s2: Seed, n: usize) -> Result<Vec<SignedLogValue>> {
    let mut orbit = HpOrbit::new(p, s1, s2, n)?;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        orbit.step();
        out.push(orbit.ctx.to_log_value(1, &orbit.y1)?);
    }
    Ok(out)
}

/// `x_3, ..., x_{N+2}` from the seeds `x_1, x_2 > 0`, in the log domain.
pub fn orbit_log(p: &TwoStepParams, x1: SignedLogValue, x2: SignedLogValue, n: usize) -> Result<Vec<SignedLogValue>> {
    hp_orbit(p, Seed::Log(x1), Seed::Log(x2), n)
}

/// Like [`orbit_log`], but the seeds are native reals whose logarithms are
/// taken at the working precision, so the result is the orbit of exactly
/// these binary seeds.
pub fn orbit_log_reals(p: &TwoStepParams, x1: f64, x2: f64, n: usize) -> Result<Vec<SignedLogValue>> {
    hp_orbit(p, Seed::Real(x1), Seed::Real(x2), n)
}

/// Gaps `delta_n = b2 y_{n-1} - b1 y_n` for `n = 2..=N+2`, computed from the
/// high-precision orbit so the cancellation in the difference is harmless.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaSequence {
    /// `values[i]` is `delta_{i+2}`.
    pub values: Vec<f64>,
}

impl DeltaSequence {
    /// `delta_n` for `n >= 2`.
    pub fn get(&self, n: usize) -> Option<f64> {
        n.checked_sub(2).and_then(|i| self.values.get(i)).copied()
    }
}

/// Gap sequence of the orbit from `(x1, x2)` with `N` generated terms.
pub fn delta_sequence(p: &TwoStepParams, x1: f64, x2: f64, n: usize) -> Result<DeltaSequence> {
    let mut orbit = HpOrbit::new(p, Seed::Real(x1), Seed::Real(x2), n)?;
    let mut values = Vec::with_capacity(n + 1);
    let gap = |o: &HpOrbit| {
        let c = &o.ctx;
        precise::to_f64(&c.sub(&c.mul(&o.b2, &o.y2), &c.mul(&o.b1, &o.y1)))
    };
    values.push(gap(&orbit));
    for _ in 0..n {
        orbit.step();
        values.push(gap(&orbit));
    }
    Ok(DeltaSequence { values })
}

/// Long-run behaviour of an initial pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Basin {
    /// The orbit tends to 0.
    A0,
    /// The orbit tends to infinity.
    AInfty,
    /// Neither escape happened within the budget: the pair is on (or within
    /// resolution of) the common boundary.
    BoundaryUndecided,
    /// Extended mode only: the orbit settled on a stable positive fixed point.
    FiniteAttractor,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BasinLabel {
    pub label: Basin,
    pub iterations_used: usize,
    /// `log10` of the last computed term.
    pub final_log_mag: f64,
}

impl BasinLabel {
    /// The limit of the orbit when it is a finite attractor.
    pub fn limit(&self) -> Option<f64> {
        (self.label == Basin::FiniteAttractor).then(|| libm::pow(10.0, self.final_log_mag))
    }
}

/// Escape levels `(low, high)` in `y`. For unit coefficients these are
/// `-10` and `+10`; large or small coefficients shift the levels by the
/// scale at which each term starts to dominate.
fn escape_levels(p: &TwoStepParams) -> (f64, f64) {
    let mut shift: f64 = 0.0;
    for (a, b) in [(p.a1, p.b1), (p.a2, p.b2)] {
        if b > 1.0 {
            shift = shift.max((libm::log10(a) / (b - 1.0)).abs());
        }
    }
    (-ESCAPE_LOG - shift, ESCAPE_LOG + shift)
}

/// Classifies `(x1, x2)`: escape to infinity or to zero once two consecutive
/// terms are past the escape level, otherwise undecided after `max_iter`.
pub fn classify_basin(p: &TwoStepParams, x1: f64, x2: f64, max_iter: usize) -> Result<BasinLabel> {
    if !(x1 > 0.0 && x2 > 0.0 && x1.is_finite() && x2.is_finite()) {
        return Err(Error::domain("seeds must be positive and finite"));
    }
    Ok(classify_basin_log(p, libm::log10(x1), libm::log10(x2), max_iter))
}

/// [`classify_basin`] with the seeds given by their logarithms.
pub fn classify_basin_log(p: &TwoStepParams, y1: f64, y2: f64, max_iter: usize) -> BasinLabel {
    let (lo, hi) = escape_levels(p);
    let (la1, la2) = p.la();
    let (mut a, mut b) = (y1, y2);
    let label = |l, i, y| BasinLabel { label: l, iterations_used: i, final_log_mag: y };
    if a > hi && b > hi {
        return label(Basin::AInfty, 0, b);
    }
    if a < lo && b < lo {
        return label(Basin::A0, 0, b);
    }
    for it in 1..=max_iter {
        let y = step_f64(la1, la2, p.b1, p.b2, a, b);
        if !y.is_finite() {
            return label(if y > 0.0 { Basin::AInfty } else { Basin::A0 }, it, y);
        }
        if y > hi && b > hi {
            return label(Basin::AInfty, it, y);
        }
        if y < lo && b < lo {
            return label(Basin::A0, it, y);
        }
        if (y - b).abs() < 1e-13 && (b - a).abs() < 1e-13 && stable_fixed_point(p, y) {
            return label(Basin::FiniteAttractor, it, y);
        }
        (a, b) = (b, y);
    }
    label(Basin::BoundaryUndecided, max_iter, b)
}

/// Whether the fixed point `x = 10^y` is linearly stable: the Jacobian
/// `[[0, 1], [a2 b2 x^(b2-1), a1 b1 x^(b1-1)]]` has spectral radius below 1.
fn stable_fixed_point(p: &TwoStepParams, y: f64) -> bool {
    let t = p.a1 * p.b1 * libm::pow(10.0, (p.b1 - 1.0) * y);
    let d = p.a2 * p.b2 * libm::pow(10.0, (p.b2 - 1.0) * y);
    // eigenvalues of lambda^2 - t lambda - d with t, d > 0 are real
    let disc = libm::sqrt(t * t + 4.0 * d);
    (t + disc) / 2.0 < 1.0 && (disc - t) / 2.0 < 1.0
}

fn unit_direction(direction: (f64, f64)) -> Result<(f64, f64)> {
    let (u, v) = direction;
    if !(u > 0.0 && v > 0.0 && u.is_finite() && v.is_finite()) {
        return Err(Error::domain("ray direction must be strictly positive"));
    }
    let n = libm::hypot(u, v);
    Ok((u / n, v / n))
}

/// Radius at which the ray through `direction` leaves the bounded basin
/// around the origin, by bisection on the basin label.
///
/// A bisection midpoint that stays undecided for the whole budget is taken
/// as the boundary itself.
pub fn boundary_on_ray(p: &TwoStepParams, direction: (f64, f64), tol: f64) -> Result<f64> {
    boundary_on_ray_with(p, direction, tol, DEFAULT_MAX_ITER)
}

const R_MAX: f64 = 1e6;

fn boundary_on_ray_with(p: &TwoStepParams, direction: (f64, f64), tol: f64, max_iter: usize) -> Result<f64> {
    if !(tol >= 1e-12) {
        return Err(Error::param("tol", "must be at least 1e-12"));
    }
    let (u, v) = unit_direction(direction)?;
    let escapes = |r: f64| classify_basin_log(p, libm::log10(r * u), libm::log10(r * v), max_iter).label;
    let no_bracket = || Error::domain(format!("no basin boundary found on the ray for r in [{tol:e}, {R_MAX:e}]"));
    let mut lo = tol;
    if escapes(lo) == Basin::AInfty {
        return Err(no_bracket());
    }
    let mut hi = 1.0f64.max(2.0 * lo);
    loop {
        match escapes(hi) {
            Basin::AInfty => break,
            Basin::BoundaryUndecided => return Ok(hi),
            _ => {
                lo = hi;
                hi *= 2.0;
                if hi > R_MAX {
                    return Err(no_bracket());
                }
            }
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match escapes(mid) {
            Basin::AInfty => hi = mid,
            Basin::BoundaryUndecided => return Ok(mid),
            _ => lo = mid,
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Boundary radius for `count` ray angles strictly inside the positive
/// quadrant, `theta_k = (k + 1) (pi/2) / (count + 2)`. For even `count` the
/// diagonal is included. Returns `(theta, r)` pairs.
pub fn boundary_scan(p: &TwoStepParams, count: usize, tol: f64) -> Result<Vec<(f64, f64)>> {
    (0..count)
        .map(|k| {
            let theta = (k + 1) as f64 * core::f64::consts::FRAC_PI_2 / (count + 2) as f64;
            let r = boundary_on_ray(p, (libm::cos(theta), libm::sin(theta)), tol)?;
            Ok((theta, r))
        })
        .collect()
}

fn t_map(p: &TwoStepParams, (u, v): (f64, f64)) -> (f64, f64) {
    (v, p.a2 * libm::pow(u, p.b2) + p.a1 * libm::pow(v, p.b1))
}

/// Limits `(p, q)` of the odd and even terms of an orbit starting on the
/// basin boundary, where orbits are asymptotically 2-periodic.
///
/// The pair is pushed forward by two steps at a time and projected back
/// onto the boundary along its ray after every push (the boundary is
/// repelling in the normal direction, so unprojected iteration drifts off).
/// The approximate cycle is then polished by Newton's method on
/// `T(p, q) = (q, p)`.
pub fn cycle2_limit(p: &TwoStepParams, x1: f64, x2: f64) -> Result<(f64, f64)> {
    if !(x1 > 0.0 && x2 > 0.0) {
        return Err(Error::domain("boundary point must be positive"));
    }
    let mut z = (x1, x2);
    let project = |z: (f64, f64)| -> Result<(f64, f64)> {
        let r = boundary_on_ray(p, z, 1e-12)?;
        let n = libm::hypot(z.0, z.1);
        Ok((r * z.0 / n, r * z.1 / n))
    };
    const ROUNDS: usize = 400;
    let mut settled = false;
    for _ in 0..ROUNDS {
        let next = project(t_map(p, t_map(p, z)))?;
        let change = (next.0 - z.0).abs().max((next.1 - z.1).abs());
        z = next;
        if change < 1e-11 {
            settled = true;
            break;
        }
    }
    if !settled {
        return Err(Error::NoConvergence { what: "projected two-step iteration", iterations: ROUNDS });
    }
    let z = newton_cycle(p, z)?;
    let tz = t_map(p, z);
    if (tz.0 - z.1).abs() > 1e-8 || (tz.1 - z.0).abs() > 1e-8 {
        return Err(Error::NoConvergence { what: "2-cycle refinement", iterations: 50 });
    }
    Ok(z)
}

/// Newton's method for `G(p, q) = (a2 p^b2 + a1 q^b1 - p, a2 q^b2 + a1 p^b1 - q) = 0`.
fn newton_cycle(p: &TwoStepParams, mut z: (f64, f64)) -> Result<(f64, f64)> {
    let g = |(x, y): (f64, f64)| {
        (
            p.a2 * libm::pow(x, p.b2) + p.a1 * libm::pow(y, p.b1) - x,
            p.a2 * libm::pow(y, p.b2) + p.a1 * libm::pow(x, p.b1) - y,
        )
    };
    for _ in 0..50 {
        let (x, y) = z;
        let (g1, g2) = g(z);
        let j11 = p.a2 * p.b2 * libm::pow(x, p.b2 - 1.0) - 1.0;
        let j12 = p.a1 * p.b1 * libm::pow(y, p.b1 - 1.0);
        let j21 = p.a1 * p.b1 * libm::pow(x, p.b1 - 1.0);
        let j22 = p.a2 * p.b2 * libm::pow(y, p.b2 - 1.0) - 1.0;
        let det = j11 * j22 - j12 * j21;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dx = (g1 * j22 - g2 * j12) / det;
        let dy = (j11 * g2 - j21 * g1) / det;
        z = (x - dx, y - dy);
        if !(z.0 > 0.0 && z.1 > 0.0) {
            return Err(Error::NoConvergence { what: "2-cycle refinement", iterations: 50 });
        }
        if dx.abs().max(dy.abs()) < 1e-16 {
            break;
        }
    }
    Ok(z)
}

/// Result of [`shadow_limit`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShadowLimit {
    pub y_hat: f64,
    /// `y_n - b^n y_hat` for every element of the window.
    pub residuals: Vec<f64>,
    /// Number of series terms used.
    pub terms: usize,
    /// A-priori bound on the neglected tail.
    pub tail_bound: f64,
}

/// Shadowing constant `y_hat = y_1/b + sum_{k>=2} (y_k - b y_{k-1}) / b^k`
/// of a sequence with bounded increments `y_k - b y_{k-1}`.
///
/// The series is truncated once `(sup increment) b^-K / (b - 1)` drops
/// below `1e-15`, or at the end of the window.
pub fn shadow_limit(b: f64, y: &[f64]) -> Result<ShadowLimit> {
    if !(b > 1.0 && b.is_finite()) {
        return Err(Error::param("b", "must exceed 1"));
    }
    if y.is_empty() {
        return Err(Error::domain("empty sequence"));
    }
    let inc: Vec<f64> = y.windows(2).map(|w| w[1] - b * w[0]).collect();
    if inc.iter().any(|c| !c.is_finite()) || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("increments are not finite"));
    }
    // increments growing like b^k make the series diverge
    let weighted: Vec<f64> = inc.iter().enumerate().map(|(k, c)| (c / libm::pow(b, k as f64 + 2.0)).abs()).collect();
    if weighted.len() >= 8 {
        let q = weighted.len() / 4;
        let head = weighted[..q].iter().copied().fold(0.0, f64::max);
        let tail = weighted[weighted.len() - q..].iter().copied().fold(0.0, f64::max);
        if tail > 1e-300 && tail > 0.5 * head {
            return Err(Error::domain("increments are unbounded on the window"));
        }
    }
    let sup = inc.iter().map(|c| c.abs()).fold(0.0, f64::max);
    let mut y_hat = y[0] / b;
    let mut w = 1.0 / b;
    let mut terms = 1;
    let mut tail_bound = sup * w / (b - 1.0);
    for c in &inc {
        if tail_bound < 1e-15 {
            break;
        }
        w /= b;
        y_hat += c * w;
        terms += 1;
        tail_bound = sup * w / (b - 1.0);
    }
    let mut bn = 1.0;
    let residuals = y
        .iter()
        .map(|&yn| {
            bn *= b;
            yn - bn * y_hat
        })
        .collect();
    Ok(ShadowLimit { y_hat, residuals, terms, tail_bound })
}

/// Shadowing value `h` of Case I or Case III, in rescaled coordinates.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShadowH {
    pub h: f64,
    /// `log10 c` of the rescaling `x -> c x` that makes the dominant
    /// coefficient 1. Case I: `y_n + log_scale - b1^(n-2) h -> 0`.
    /// Case III: `y_{2n} + log_scale - b2^(n-1) h -> 0`.
    pub log_scale: f64,
    pub terms: usize,
    pub tail_bound: f64,
    /// How applicability was decided (empirical detection for Case III).
    pub note: String,
}

const SHADOW_TOL: f64 = 1e-14;
const SHADOW_MAX_STEPS: usize = 4000;

/// Rescaled `f64` orbit `y_1, y_2, ...` (index 0 holds `y_1`), stopped
/// before `|y|` leaves the comfortable `f64` range.
fn rescaled_orbit(p: &TwoStepParams, la1: f64, la2: f64, y1: f64, y2: f64, max: usize) -> Vec<f64> {
    let mut ys = vec![y1, y2];
    while ys.len() < max {
        let l = ys.len();
        let y = step_f64(la1, la2, p.b1, p.b2, ys[l - 2], ys[l - 1]);
        if !y.is_finite() || y.abs() > 1e290 {
            break;
        }
        ys.push(y);
    }
    ys
}

/// Case I shadowing value
/// `h = y2 + sum_{k>=1} b1^-k log10(1 + a2 10^(delta_{k+1}))`
/// after rescaling so that `a1 = 1`.
pub fn shadow_h_case_i(p: &TwoStepParams, y1: f64, y2: f64) -> Result<ShadowH> {
    p.require_case(Some(Case::I))?;
    if classify_basin_log(p, y1, y2, DEFAULT_MAX_ITER).label != Basin::AInfty {
        return Err(Error::domain("seeds are not in the basin of infinity"));
    }
    let (lc, _, a2) = p.rescaled(1);
    let (y1, y2) = (y1 + lc, y2 + lc);
    let ys = rescaled_orbit(p, 0.0, libm::log10(a2), y1, y2, SHADOW_MAX_STEPS);
    let delta = |n: usize| p.b2 * ys[n - 2] - p.b1 * ys[n - 1];
    let mut h = y2;
    let mut w = 1.0;
    for k in 1..ys.len() - 2 {
        w /= p.b1;
        let term = libm::log10(1.0 + a2 * libm::pow(10.0, delta(k + 1)));
        h += w * term;
        let decreasing = delta(k + 2) <= delta(k + 1);
        let bound = term * w / (p.b1 - 1.0);
        if decreasing && bound < SHADOW_TOL {
            return Ok(ShadowH { h, log_scale: lc, terms: k, tail_bound: bound, note: "tail bound from monotone gaps".into() });
        }
    }
    Err(Error::NoConvergence { what: "Case I shadowing series", iterations: ys.len() })
}

/// Case III shadowing value
/// `h = y2 + sum_{k>=1} b2^-k log10(1 + a1 10^(-delta_{2k+1}))`
/// after rescaling so that `a2 = 1`.
///
/// Applies when the odd gaps diverge to `+inf`; this is detected
/// empirically as an odd gap above 50 that is still increasing.
pub fn shadow_h_case_iii(p: &TwoStepParams, y1: f64, y2: f64) -> Result<ShadowH> {
    p.require_case(Some(Case::III))?;
    let (lc, a1, _) = p.rescaled(2);
    let (y1, y2) = (y1 + lc, y2 + lc);
    let ys = rescaled_orbit(p, libm::log10(a1), 0.0, y1, y2, SHADOW_MAX_STEPS);
    let delta = |n: usize| p.b2 * ys[n - 2] - p.b1 * ys[n - 1];
    let not_applicable = || Error::Refused("even-subsequence shadow not applicable: odd gaps not seen diverging".into());
    let mut detected_at = None;
    let mut k = 1;
    while 2 * k + 3 <= ys.len() {
        if delta(2 * k + 1) > 50.0 && delta(2 * k + 3) > delta(2 * k + 1) {
            detected_at = Some(2 * k + 1);
            break;
        }
        k += 1;
    }
    let detected_at = detected_at.ok_or_else(not_applicable)?;
    let mut h = y2;
    let mut w = 1.0;
    let mut k = 1;
    while 2 * k + 3 <= ys.len() {
        w /= p.b2;
        let term = libm::log10(1.0 + a1 * libm::pow(10.0, -delta(2 * k + 1)));
        h += w * term;
        let increasing = delta(2 * k + 3) >= delta(2 * k + 1);
        let bound = term * w / (p.b2 - 1.0);
        if 2 * k + 1 >= detected_at && increasing && bound < SHADOW_TOL {
            return Ok(ShadowH {
                h,
                log_scale: lc,
                terms: k,
                tail_bound: bound,
                note: format!("odd gaps detected diverging at n = {detected_at} (empirical)"),
            });
        }
        k += 1;
    }
    Err(not_applicable())
}

/// Fixed points of `R0(r) = b2 log10(a1 + 10^r)` (Case III, coordinates
/// rescaled so that `a2 = 1`), sorted.
///
/// `R0 - id` is strictly convex with its minimum where `R0'(r) = 1`, at
/// `r = log10(a1 / (b2 - 1))`, so there are zero, one or two fixed points,
/// one on each side of the minimum.
pub fn r0_fixed_points(p: &TwoStepParams) -> Result<Vec<f64>> {
    p.require_case(Some(Case::III))?;
    let (_, a1, _) = p.rescaled(2);
    Ok(r0_fixed_points_raw(a1, p.b2))
}

fn r0_minus_id(a1: f64, b2: f64, r: f64) -> f64 {
    let l = if r > libm::log10(a1) { r + libm::log10(1.0 + a1 * libm::pow(10.0, -r)) } else { libm::log10(a1 + libm::pow(10.0, r)) };
    b2 * l - r
}

pub(crate) fn r0_fixed_points_raw(a1: f64, b2: f64) -> Vec<f64> {
    let f = |r: f64| r0_minus_id(a1, b2, r);
    let rmin = libm::log10(a1 / (b2 - 1.0));
    let fmin = f(rmin);
    if fmin > 1e-14 {
        return Vec::new();
    }
    if fmin.abs() <= 1e-14 {
        return vec![rmin];
    }
    let root = |dir: f64| {
        let mut step = 1.0;
        while f(rmin + dir * step) < 0.0 {
            step *= 2.0;
        }
        let (mut inside, mut outside) = (rmin, rmin + dir * step);
        for _ in 0..200 {
            let mid = 0.5 * (inside + outside);
            if mid == inside || mid == outside {
                break;
            }
            if f(mid) < 0.0 {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        0.5 * (inside + outside)
    };
    vec![root(-1.0), root(1.0)]
}

/// Ratio orbit of Case II.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RatioOrbit {
    /// `r_2, ..., r_N` with `r_n = x_n / x_{n-1}^b1`, in coordinates
    /// rescaled so that `a1 = 1`.
    pub ratios: Vec<f64>,
    /// The unique positive fixed point of `R(r) = 1 + a2 r^-b1`.
    pub fixed_point: f64,
    /// `log10 c` of the rescaling `x -> c x` (0 when `a1 = 1`).
    pub log_scale: f64,
}

/// Iterates `r_n = R(r_{n-1}) = 1 + a2 r_{n-1}^-b1` from `r_2` (Case II).
pub fn case_ii_ratio_orbit(p: &TwoStepParams, r2: f64, n: usize) -> Result<RatioOrbit> {
    p.require_case(Some(Case::II))?;
    let (lc, _, a2) = p.rescaled(1);
    let (ratios, fixed_point) = ratio_orbit(a2, p.b1, r2, n)?;
    Ok(RatioOrbit { ratios, fixed_point, log_scale: lc })
}

fn ratio_orbit(a2: f64, b1: f64, r2: f64, n: usize) -> Result<(Vec<f64>, f64)> {
    if !(r2 > 0.0 && r2.is_finite()) {
        return Err(Error::param("r2", "must be positive"));
    }
    let mut r = r2;
    let mut ratios = Vec::with_capacity(n.saturating_sub(1));
    ratios.push(r);
    while ratios.len() + 1 < n {
        r = 1.0 + a2 * libm::pow(r, -b1);
        ratios.push(r);
    }
    // r - 1 - a2 r^-b1 is increasing with a sign change on [1, 1 + a2]
    let (mut lo, mut hi) = (1.0, 1.0 + a2);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if mid - 1.0 - a2 * libm::pow(mid, -b1) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((ratios, 0.5 * (lo + hi)))
}

/// Axis-aligned rectangle `[lo1, hi1] x [lo2, hi2]` of seeds.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Region {
    pub lo1: f64,
    pub hi1: f64,
    pub lo2: f64,
    pub hi2: f64,
}

impl Region {
    fn validate(&self) -> Result<()> {
        if !(self.lo1 > 0.0 && self.lo2 > 0.0 && self.lo1 < self.hi1 && self.lo2 < self.hi2 && self.hi1.is_finite() && self.hi2.is_finite()) {
            return Err(Error::param("region", "need 0 < lo < hi in both coordinates"));
        }
        Ok(())
    }
}

/// Outcome of one sampled seed in [`benford_fraction`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SampleOutcome {
    pub x1: f64,
    pub x2: f64,
    pub basin: Basin,
    /// Conformance of the orbit; `None` when the seed was not in an open basin.
    pub verdict: Option<Verdict>,
    pub ks: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FractionReport {
    /// Passing fraction among seeds that lie in an open basin.
    pub fraction: f64,
    /// `(basin, seeds evaluated, seeds passing)` for each basin seen.
    pub per_basin: Vec<(Basin, usize, usize)>,
    pub samples: Vec<SampleOutcome>,
}

/// One sample of [`benford_fraction`]; sample `index` draws its seed from
/// its own random stream, so samples can be evaluated in any order.
pub fn benford_fraction_sample(p: &TwoStepParams, region: &Region, n: usize, seed: u64, index: u64, thresholds: &Thresholds) -> Result<SampleOutcome> {
    region.validate()?;
    let mut rng = Stream::new(seed, index);
    let x1 = region.lo1 + (region.hi1 - region.lo1) * rng.uniform_open();
    let x2 = region.lo2 + (region.hi2 - region.lo2) * rng.uniform_open();
    let basin = classify_basin(p, x1, x2, DEFAULT_MAX_ITER)?.label;
    if !matches!(basin, Basin::A0 | Basin::AInfty) {
        return Ok(SampleOutcome { x1, x2, basin, verdict: None, ks: None });
    }
    let orbit = orbit_log_reals(p, x1, x2, n)?;
    let report = conformance_report(&orbit, thresholds)?;
    Ok(SampleOutcome { x1, x2, basin, verdict: Some(report.verdict), ks: Some(report.ks) })
}

/// Fraction of seeds sampled uniformly from `region` whose orbit of length
/// `n` passes the conformance test. Seeds outside the open basins are
/// recorded and excluded; results are broken down by basin.
pub fn benford_fraction(p: &TwoStepParams, region: &Region, samples: usize, n: usize, seed: u64, thresholds: &Thresholds) -> Result<FractionReport> {
    let outcomes = (0..samples as u64)
        .map(|i| benford_fraction_sample(p, region, n, seed, i, thresholds))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize_fraction(outcomes))
}

/// Aggregates per-sample outcomes (in sample order).
pub fn summarize_fraction(samples: Vec<SampleOutcome>) -> FractionReport {
    let mut per_basin: Vec<(Basin, usize, usize)> = Vec::new();
    for s in &samples {
        let pass = usize::from(s.verdict == Some(Verdict::Pass));
        match per_basin.iter_mut().find(|e| e.0 == s.basin) {
            Some(e) => {
                e.1 += 1;
                e.2 += pass;
            }
            None => per_basin.push((s.basin, 1, pass)),
        }
    }
    let evaluated = samples.iter().filter(|s| s.verdict.is_some()).count();
    let passed = samples.iter().filter(|s| s.verdict == Some(Verdict::Pass)).count();
    let fraction = if evaluated == 0 { 0.0 } else { passed as f64 / evaluated as f64 };
    FractionReport { fraction, per_basin, samples }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(a1: f64, a2: f64, b1: f64, b2: f64) -> TwoStepParams {
        TwoStepParams::new(a1, a2, b1, b2).unwrap()
    }

    #[test]
    fn case_labels() {
        assert_eq!(classify_case(&p(1.0, 1.0, 2.0, 2.0)).unwrap(), Case::I);
        assert_eq!(classify_case(&p(1.0, 1.0, 2.0, 4.0)).unwrap(), Case::II);
        assert_eq!(classify_case(&p(1.0, 1.0, 1.2, 2.0)).unwrap(), Case::III);
        // 1.2^2 = 1.44 exactly as rationals, although not in binary
        assert_eq!(classify_case(&p(1.0, 1.0, 1.2, 1.44)).unwrap(), Case::II);
        assert_eq!(classify_case(&TwoStepParams::parse("1", "1", "6/5", "1.44").unwrap()).unwrap(), Case::II);
        assert!(TwoStepParams::new(1.0, 1.0, 1.0, 2.0).is_err());
        assert!(TwoStepParams::new(0.0, 1.0, 2.0, 2.0).is_err());
        assert!(classify_case(&TwoStepParams::extended(1.0, 0.25, 2.0, 0.5).unwrap()).is_err());
    }

    #[test]
    fn rationals() {
        assert_eq!(Rational::parse("1.2").unwrap(), Rational { num: 6, den: 5 });
        assert_eq!(Rational::parse("-2.5e-1").unwrap(), Rational { num: -1, den: 4 });
        assert_eq!(Rational::parse("7/14").unwrap(), Rational { num: 1, den: 2 });
        assert!(Rational::parse("1.2.3").is_err());
        assert_eq!(Rational::recover(1.2, 1_000_000), Some(Rational { num: 6, den: 5 }));
        assert_eq!(Rational::recover(0.1, 1_000_000), Some(Rational { num: 1, den: 10 }));
        assert_eq!(Rational::recover(core::f64::consts::PI, 1_000_000), None);
    }

    #[test]
    fn integer_orbit() {
        let q = p(1.0, 1.0, 2.0, 2.0);
        let o = orbit_log(&q, SignedLogValue::ONE, SignedLogValue::ONE, 5).unwrap();
        let want = [2.0, 5.0, 29.0, 866.0, 750797.0];
        for (v, w) in o.iter().zip(want) {
            assert!((v.to_f64() - w).abs() < 1e-9 * w);
        }
    }

    #[test]
    fn fixed_points_stay_fixed() {
        let q = p(1.0, 1.0, 2.0, 2.0);
        let o = orbit_log_reals(&q, 0.5, 0.5, 200).unwrap();
        assert!(o.iter().all(|v| (v.to_f64() - 0.5).abs() < 1e-12));
        let q = p(1.0, 4.0, 2.0, 2.0);
        let o = orbit_log_reals(&q, 0.2, 0.2, 20).unwrap();
        assert!(o.iter().all(|v| (v.to_f64() - 0.2).abs() < 1e-12));
    }

    #[test]
    fn basins() {
        let q = p(1.0, 1.0, 2.0, 2.0);
        assert_eq!(classify_basin(&q, 2.0, 2.0, DEFAULT_MAX_ITER).unwrap().label, Basin::AInfty);
        assert_eq!(classify_basin(&q, 0.1, 0.1, DEFAULT_MAX_ITER).unwrap().label, Basin::A0);
        let b = classify_basin(&q, 0.5, 0.5, DEFAULT_MAX_ITER).unwrap();
        assert_eq!(b.label, Basin::BoundaryUndecided);
        assert_eq!(b.iterations_used, DEFAULT_MAX_ITER);
        assert!(classify_basin(&q, -1.0, 1.0, 10).is_err());
    }

    #[test]
    fn diagonal_boundaries() {
        let d = (1.0, 1.0);
        let r = boundary_on_ray(&p(1.0, 1.0, 2.0, 2.0), d, 1e-9).unwrap();
        assert!((r / 2f64.sqrt() - 0.5).abs() < 1e-6);
        let r = boundary_on_ray(&p(1.0, 4.0, 2.0, 2.0), d, 1e-9).unwrap();
        assert!((r / 2f64.sqrt() - 0.2).abs() < 1e-6);
        assert!(boundary_on_ray(&p(1.0, 1.0, 2.0, 2.0), (1.0, 0.0), 1e-9).is_err());
        assert!(boundary_on_ray(&p(1.0, 1.0, 2.0, 2.0), d, 1e-13).is_err());
    }

    #[test]
    fn two_cycle_on_boundary() {
        let q = p(1.0, 4.0, 2.0, 2.0);
        let dir = (2.0, 1.0);
        let r = boundary_on_ray(&q, dir, 1e-12).unwrap();
        let n = libm::hypot(2.0, 1.0);
        let (x1, x2) = (r * 2.0 / n, r / n);
        assert!(x1 > 0.2);
        let (a, b) = cycle2_limit(&q, x1, x2).unwrap();
        let s5 = 5f64.sqrt();
        assert!((a - (5.0 + s5) / 30.0).abs() < 1e-8, "{a}");
        assert!((b - (5.0 - s5) / 30.0).abs() < 1e-8, "{b}");
        let q = p(1.0, 1.0, 2.0, 2.0);
        assert_eq!(cycle2_limit(&q, 0.5, 0.5).unwrap(), (0.5, 0.5));
    }

    #[test]
    fn shadow_limit_examples() {
        let y: Vec<f64> = (1..=12).map(|n| libm::pow(3.0, n as f64) * 0.7).collect();
        let s = shadow_limit(3.0, &y).unwrap();
        assert!((s.y_hat - 0.7).abs() < 1e-12);
        for (r, yn) in s.residuals.iter().zip(&y) {
            assert!(r.abs() <= 1e-12 * yn.abs().max(1.0));
        }
        let y: Vec<f64> = (1..=60).map(|n| libm::pow(2.0, n as f64) + 1.0).collect();
        let s = shadow_limit(2.0, &y).unwrap();
        assert!((s.y_hat - 1.0).abs() < 1e-14);
        // residuals approach -c/(b-1) = 1
        assert!((s.residuals[20] - 1.0).abs() < 1e-9);
        let y: Vec<f64> = (1..=40).map(|n| n as f64 * libm::pow(2.0, n as f64)).collect();
        assert!(shadow_limit(2.0, &y).is_err());
        assert!(shadow_limit(1.0, &[1.0]).is_err());
    }

    #[test]
    fn case_i_shadow_against_orbit() {
        let q = p(1.0, 1.0, 2.0, 2.0);
        let y2 = libm::log10(2.0);
        let s = shadow_h_case_i(&q, y2, y2).unwrap();
        assert_eq!(s.log_scale, 0.0);
        // orbit_log returns x3.., so y10 is element 7
        let o = orbit_log_reals(&q, 2.0, 2.0, 8).unwrap();
        let y10 = o[7].log_mag();
        assert!((y10 - 256.0 * s.h).abs() < 1e-6, "{} vs {}", y10, 256.0 * s.h);
        // h = b1 * shadow_limit over (y2, y3, ...)
        let mut ys = vec![y2];
        ys.extend(orbit_log_reals(&q, 2.0, 2.0, 40).unwrap().iter().map(|v| v.log_mag()));
        let sl = shadow_limit(2.0, &ys).unwrap();
        assert!((2.0 * sl.y_hat - s.h).abs() < 1e-12);
        // vanishing second coefficient
        let q = p(1.0, 1e-300, 2.0, 2.0);
        let s = shadow_h_case_i(&q, 1.0, 2.0).unwrap();
        assert!((s.h - 2.0).abs() < 1e-14);
        assert!(shadow_h_case_i(&p(1.0, 1.0, 1.2, 2.0), 1.0, 1.0).is_err());
        assert!(shadow_h_case_i(&p(1.0, 1.0, 2.0, 2.0), -1.0, -1.0).is_err());
    }

    #[test]
    fn case_iii_shadow_against_orbit() {
        let q = p(1.0, 1.0, 1.2, 2.0);
        let y5 = libm::log10(5.0);
        let s = shadow_h_case_iii(&q, y5, y5).unwrap();
        let o = orbit_log_reals(&q, 5.0, 5.0, 18).unwrap();
        let y20 = o[17].log_mag();
        assert!((y20 - 512.0 * s.h).abs() < 1e-6, "{y20} {}", 512.0 * s.h);
        // y_{2n-1} = (b1/b2) y_{2n} + delta_{2n}/b2
        let d = delta_sequence(&q, 5.0, 5.0, 18).unwrap();
        let y = |n: usize| if n <= 2 { y5 } else { o[n - 3].log_mag() };
        for n in 2..=10 {
            let lhs = y(2 * n - 1);
            let rhs = (1.2 / 2.0) * y(2 * n) + d.get(2 * n).unwrap() / 2.0;
            assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
        }
        let q = p(1e-300, 1.0, 1.2, 2.0);
        assert!(shadow_h_case_iii(&q, 1.0, 1.0).is_err() || (shadow_h_case_iii(&q, 1.0, 1.0).unwrap().h - 1.0).abs() < 1e-12);
    }

    #[test]
    fn r0_fixed_point_counts() {
        // b2 = 2: two fixed points iff a1 < 1/4, tangency at 1/4
        assert!(r0_fixed_points(&p(1.0, 1.0, 1.2, 2.0)).unwrap().is_empty());
        let fp = r0_fixed_points(&p(0.1, 1.0, 1.2, 2.0)).unwrap();
        assert_eq!(fp.len(), 2);
        // s = 10^r solves s^2 - 0.8 s + 0.01 = 0
        let disc = libm::sqrt(0.64 - 0.04);
        assert!((fp[0] - libm::log10((0.8 - disc) / 2.0)).abs() < 1e-12);
        assert!((fp[1] - libm::log10((0.8 + disc) / 2.0)).abs() < 1e-12);
        let fp = r0_fixed_points_raw(0.25, 2.0);
        assert_eq!(fp.len(), 1);
        assert!((fp[0] - libm::log10(0.25)).abs() < 1e-12);
        assert!(r0_fixed_points(&p(1.0, 1.0, 2.0, 2.0)).is_err());
    }

    #[test]
    fn case_ii_ratios() {
        let (r, fp) = ratio_orbit(0.0, 2.0, 3.0, 10).unwrap();
        assert!(r[1..].iter().all(|&x| x == 1.0));
        assert_eq!(fp, 1.0);
        let q = p(1.0, 1.0, 2.0, 4.0);
        let ro = case_ii_ratio_orbit(&q, 0.3, 200).unwrap();
        let fp = ro.fixed_point;
        assert!((fp * fp * fp - fp * fp - 1.0).abs() < 1e-13);
        assert!((fp - 1.465_571_2).abs() < 1e-7);
        assert!((ro.ratios.last().unwrap() - fp).abs() < 1e-10);
        // x_n = r_n x_{n-1}^b1 against the log-domain orbit
        let (x1, x2) = (1.5, 0.9);
        let ro = case_ii_ratio_orbit(&q, x2 / (x1 * x1), 8).unwrap();
        let o = orbit_log_reals(&q, x1, x2, 6).unwrap();
        let mut prev = libm::log10(x2);
        for (k, v) in o.iter().enumerate() {
            let r = ro.ratios[k + 1];
            let want = libm::log10(r) + 2.0 * prev;
            assert!((v.log_mag() - want).abs() < 1e-10 * want.abs().max(1.0));
            prev = v.log_mag();
        }
    }
}
