//! One-dimensional maps, Newton iterations and scalar flows.
//!
//! Orbits that grow or shrink at most exponentially are iterated in `f64`
//! while `|log10 |x|| <= 150` and continue in the log domain afterwards.
//! Orbits with doubly exponential growth (power maps, the flat map near its
//! fixed point, the exponential map) are iterated in arbitrary precision on
//! `log10 |x|`, since their significands depend on ever more bits of the
//! starting value.

use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};

use astro_float::BigFloat;

use crate::error::{Error, Result};
use crate::precise::{self, Ctx, MAX_PRECISION};
use crate::significand::{LogAccumulator, SignedLogValue};

/// `|log10 |x||` above which iteration moves to the log domain.
pub const LOG_SWITCH: f64 = 150.0;

const LOG10_2_HI: f64 = core::f64::consts::LOG10_2;
const LOG10_2_LO: f64 = -2.803_728_127_785_170_3e-18;

/// Additive perturbation `g` in `T(x) = a x + g(x)` or `a x^b + g(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "snake_case"))]
pub enum GTag {
    /// `g = 0`
    Zero,
    /// `g = 1`
    One,
    /// `g(x) = e^-x`
    ExpNeg,
}

/// Index-dependent coefficient `c_n`, `n = 1, 2, ...`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "snake_case"))]
pub enum IndexRule {
    Constant(f64),
    /// `2 + 1/n`
    TwoPlusReciprocal,
    /// `n`
    Index,
    /// `2^n`
    PowerOfTwo,
}

impl IndexRule {
    fn value(&self, n: usize) -> f64 {
        match *self {
            IndexRule::Constant(c) => c,
            IndexRule::TwoPlusReciprocal => 2.0 + 1.0 / n as f64,
            IndexRule::Index => n as f64,
            IndexRule::PowerOfTwo => libm::pow(2.0, n as f64),
        }
    }

    /// `log10 |c_n|` as a double-double `(hi, lo)`.
    fn log10_abs(&self, n: usize) -> (f64, f64) {
        match *self {
            IndexRule::PowerOfTwo => {
                let k = n as f64;
                let hi = k * LOG10_2_HI;
                (hi, libm::fma(k, LOG10_2_HI, -hi) + k * LOG10_2_LO)
            }
            IndexRule::TwoPlusReciprocal => {
                // log10(2n + 1) - log10(n) avoids rounding 2 + 1/n first
                let k = n as f64;
                (libm::log10(2.0 * k + 1.0) - libm::log10(k), 0.0)
            }
            _ => (libm::log10(self.value(n).abs()), 0.0),
        }
    }

    fn sign(&self) -> i8 {
        match *self {
            IndexRule::Constant(c) if c < 0.0 => -1,
            IndexRule::Constant(c) if c == 0.0 => 0,
            _ => 1,
        }
    }

    /// `c_n` at the working precision of `ctx`.
    fn big(&self, n: usize, ctx: &Ctx) -> BigFloat {
        match *self {
            IndexRule::Constant(c) => ctx.f(c),
            IndexRule::TwoPlusReciprocal => ctx.div(&ctx.int(2 * n as i64 + 1), &ctx.int(n as i64)),
            IndexRule::Index => ctx.int(n as i64),
            IndexRule::PowerOfTwo => ctx.int(2).powi(n, ctx.prec(), astro_float::RoundingMode::ToEven),
        }
    }

    fn validate(&self, name: &'static str) -> Result<()> {
        match *self {
            IndexRule::Constant(c) if !c.is_finite() => Err(Error::param(name, "constant must be finite")),
            _ => Ok(()),
        }
    }
}

/// Built-in map families.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(tag = "family", rename_all = "snake_case"))]
pub enum MapSpec {
    /// `T(x) = a x + g(x)`, `a > 1`.
    AffinePlus { a: f64, g: GTag },
    /// `T(x) = x + a e^-x - a` with fixed point 0 and `T'(0) = 1 - a`,
    /// `0 < a < 2`, `a != 1`.
    ContractionFixedPoint { a: f64 },
    /// `T(x) = a x^b + g(x)` on `x > 0`, `a > 0`, `b > 1`.
    PowerPlus { a: f64, b: f64, g: GTag },
    /// `T(x) = x - 1 + e^-x`, flat of order 2 at its fixed point 0.
    AnalyticFlat,
    /// `T(x) = e^x`.
    Exponential,
    /// `T(x) = 1 - |2x - 1|`.
    Tent,
    /// `T_n(x) = a_n x`.
    NonAutonomousLinear { a: IndexRule },
    /// `T_n(x) = a_n x^(b_n)` on `x > 0` with `a_n > 0`.
    NonAutonomousPower { a: IndexRule, b: IndexRule },
}

impl MapSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            MapSpec::AffinePlus { a, .. } if !(a > 1.0 && a.is_finite()) => Err(Error::param("a", "affine map needs a > 1")),
            MapSpec::ContractionFixedPoint { a } if !(a > 0.0 && a < 2.0 && a != 1.0) => {
                Err(Error::param("a", "need 0 < |1 - a| < 1, i.e. 0 < a < 2 and a != 1"))
            }
            MapSpec::PowerPlus { a, b, .. } if !(a > 0.0 && a.is_finite() && b > 1.0 && b.is_finite()) => {
                Err(Error::param("a, b", "power map needs a > 0 and b > 1"))
            }
            MapSpec::NonAutonomousLinear { a } => a.validate("a"),
            MapSpec::NonAutonomousPower { a, b } => {
                a.validate("a")?;
                b.validate("b")?;
                if a.sign() <= 0 {
                    return Err(Error::param("a", "coefficients must be positive"));
                }
                if let IndexRule::Constant(c) = b {
                    if c <= 0.0 {
                        return Err(Error::param("b", "exponents must be positive"));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// An orbit, possibly cut short.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    pub values: Vec<SignedLogValue>,
    /// Why the orbit has fewer terms than requested.
    pub truncation: Option<String>,
}

/// `x_1, ..., x_N` with `x_n = T(x_{n-1})` (or `T_n(x_{n-1})`).
pub fn iterate_map(spec: &MapSpec, x0: SignedLogValue, n: usize) -> Result<Orbit> {
    spec.validate()?;
    match *spec {
        MapSpec::PowerPlus { a, b, g } => power_plus(a, b, g, x0, n),
        MapSpec::AnalyticFlat => {
            // each step near the fixed point consumes one bit
            let m = n.min(MAX_PRECISION - 512);
            let bits = Ctx::bits_for(m, 2.0, x0.log_mag().abs() + 70.0);
            let mut ctx = Ctx::new(bits.min(MAX_PRECISION))?;
            let x = if x0.is_zero() { ctx.int(0) } else { signed_pow10(&mut ctx, &x0) };
            let (values, _) = flat_orbit(&mut ctx, x, m, false)?;
            let truncation = (m < n).then(|| format!("term {} needs more than {MAX_PRECISION} bits of precision", m + 1));
            Ok(Orbit { values, truncation })
        }
        MapSpec::Exponential => exponential(x0, n),
        MapSpec::NonAutonomousPower { a, b } => nonautonomous_power(a, b, x0, n),
        MapSpec::NonAutonomousLinear { a } => Ok(nonautonomous_linear(a, x0, n)),
        _ => native_orbit(spec, x0, n),
    }
}

#[derive(Clone, Copy)]
enum State {
    Native(f64),
    Log(SignedLogValue),
}

impl State {
    fn from_value(v: SignedLogValue) -> State {
        if v.is_zero() {
            State::Native(0.0)
        } else if v.log_mag().abs() > LOG_SWITCH {
            State::Log(v)
        } else {
            State::Native(v.to_f64())
        }
    }

    fn from_native(x: f64) -> core::result::Result<State, String> {
        if !x.is_finite() {
            return Err("iterate overflowed the native range".into());
        }
        Ok(match SignedLogValue::from_f64(x) {
            Ok(v) if v.log_mag().abs() > LOG_SWITCH => State::Log(v),
            _ => State::Native(x),
        })
    }

    fn value(&self) -> SignedLogValue {
        match *self {
            State::Native(x) => SignedLogValue::from_f64(x).unwrap_or(SignedLogValue::ZERO),
            State::Log(v) => v,
        }
    }
}

/// Largest `log10 |x|` whose fractional part `f64` still resolves to 1e-10.
const MAX_RESOLVED_LOG: f64 = 1e6;

/// `e^-x` for `x < -700`, which overflows natively, as a log value.
fn exp_neg_log(x: f64) -> core::result::Result<State, String> {
    let y = -x * core::f64::consts::LOG10_E;
    if y > MAX_RESOLVED_LOG {
        return Err("e^(-x) is too large to resolve its significand".into());
    }
    Ok(State::Log(SignedLogValue::from_log10(1, y)))
}

fn native_step(spec: &MapSpec, s: State) -> core::result::Result<State, String> {
    match (*spec, s) {
        (MapSpec::AffinePlus { a, g }, State::Native(x)) => {
            if g == GTag::ExpNeg && x < -700.0 {
                return exp_neg_log(x);
            }
            let gx = match g {
                GTag::Zero => 0.0,
                GTag::One => 1.0,
                GTag::ExpNeg => libm::exp(-x),
            };
            State::from_native(a * x + gx)
        }
        (MapSpec::AffinePlus { a, g }, State::Log(v)) => {
            if v.log_mag() > 0.0 {
                if g == GTag::ExpNeg && v.sign() < 0 {
                    return Err("e^(-x) is too large to resolve its significand".into());
                }
                Ok(State::Log(v.shift(libm::log10(a))))
            } else {
                Ok(match g {
                    GTag::Zero => State::Log(v.shift(libm::log10(a))),
                    _ => State::Native(1.0),
                })
            }
        }
        (MapSpec::ContractionFixedPoint { a }, State::Native(x)) => {
            if x < -700.0 {
                return exp_neg_log(x);
            }
            State::from_native(x + a * libm::expm1(-x))
        }
        (MapSpec::ContractionFixedPoint { a }, State::Log(v)) => {
            if v.log_mag() > 0.0 {
                if v.sign() < 0 {
                    return Err("e^(-x) is too large to resolve its significand".into());
                }
                Ok(State::Log(v))
            } else {
                // T(x) = x (1 - a + O(x)) with |x| < 1e-150
                let f = 1.0 - a;
                let v = SignedLogValue::from_parts(v.sign() * f.signum() as i8, v.characteristic(), v.mantissa() + libm::log10(f.abs()));
                Ok(State::Log(v))
            }
        }
        (MapSpec::Tent, State::Native(x)) => State::from_native(1.0 - (2.0 * x - 1.0).abs()),
        (MapSpec::Tent, State::Log(v)) => {
            // huge |x|: T(x) = -2|x| + O(1); tiny |x|: T(x) = 2x
            let v = v.shift(core::f64::consts::LOG10_2);
            Ok(State::Log(if v.log_mag() > 0.0 { v.abs().neg() } else { v }))
        }
        _ => Err("family not handled by the native engine".into()),
    }
}

fn native_orbit(spec: &MapSpec, x0: SignedLogValue, n: usize) -> Result<Orbit> {
    let mut s = State::from_value(x0);
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        match native_step(spec, s) {
            Ok(next) => {
                s = next;
                values.push(s.value());
            }
            Err(reason) => return Ok(Orbit { values, truncation: Some(reason) }),
        }
    }
    Ok(Orbit { values, truncation: None })
}

fn nonautonomous_linear(a: IndexRule, x0: SignedLogValue, n: usize) -> Orbit {
    let mut values = Vec::with_capacity(n);
    if x0.is_zero() || a.sign() == 0 {
        values.resize(n, SignedLogValue::ZERO);
        return Orbit { values, truncation: None };
    }
    let mut acc = LogAccumulator::from_value(&x0);
    let mut sign = x0.sign();
    for k in 1..=n {
        let (hi, lo) = a.log10_abs(k);
        acc.add_dd(hi, lo);
        sign *= a.sign();
        values.push(acc.value(sign));
    }
    Orbit { values, truncation: None }
}

/// `sign * 10^y` for a log value, as an arbitrary-precision number.
fn signed_pow10(ctx: &mut Ctx, v: &SignedLogValue) -> BigFloat {
    let y = ctx.from_log_value(v);
    let p = ctx.prec();
    let x = ctx.pow10_at(&y, p);
    if v.sign() < 0 {
        x.neg()
    } else {
        x
    }
}

fn power_plus(a: f64, b: f64, g: GTag, x0: SignedLogValue, n: usize) -> Result<Orbit> {
    if x0.sign() <= 0 {
        return Err(Error::domain("power map orbits need x0 > 0"));
    }
    let scale = x0.log_mag().abs() + libm::log10(a).abs() + 1.0;
    let mut ctx = Ctx::new(Ctx::bits_for(n, b, scale))?;
    let la = ctx.log10_f64(a);
    let bb = ctx.f(b);
    let zero = ctx.int(0);
    let mut y = ctx.from_log_value(&x0);
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        let u = ctx.add(&la, &ctx.mul(&bb, &y));
        y = match g {
            GTag::Zero => u,
            GTag::One => ctx.log_sum(&u, &zero),
            GTag::ExpNeg => {
                let yf = precise::to_f64(&y);
                if yf > 20.0 {
                    u
                } else {
                    // log10 e^-x = -x log10 e
                    let p = ctx.prec();
                    let x = ctx.pow10_at(&y, p);
                    let w = ctx.mul(&x, ctx.log10e()).neg();
                    ctx.log_sum(&u, &w)
                }
            }
        };
        values.push(ctx.to_log_value(1, &y)?);
    }
    Ok(Orbit { values, truncation: None })
}

/// State of the flat map `T(x) = x - 1 + e^-x` (also the error map of
/// Newton's method for a simple root of `e^x - 2`).
enum Flat {
    /// The value itself, while `|x| >= 1e-20`.
    Direct(BigFloat),
    /// `x = sign 10^y` once `x` is tiny; then `T(x) = x^2 g(x)` with
    /// `g(x) = sum (-x)^k / (k+2)!`.
    Log(i8, BigFloat),
}

/// `log10(1 + sum_{k>=1} c_k (-x)^k)` with `c_1 = 1/(m+1)` and
/// `c_k / c_{k-1} = 1/(k+m)`, for `x = sign 10^y` tiny. Returns `None` when
/// the correction is below the working resolution.
fn series_correction(ctx: &mut Ctx, sign: i8, y: &BigFloat, m: usize) -> Option<BigFloat> {
    let drop_bits = -precise::to_f64(y) * core::f64::consts::LOG2_10;
    let p = ctx.prec();
    if drop_bits > (p + 8) as f64 {
        return None;
    }
    let pc = ((p as f64 - drop_bits).max(0.0) as usize + 64).min(p);
    let mut negx = ctx.pow10_at(y, pc);
    if sign > 0 {
        negx = negx.neg();
    }
    let rm = astro_float::RoundingMode::ToEven;
    let mut term = negx.div(&BigFloat::from_u64((m + 1) as u64, pc), pc, rm);
    let mut sum = term.clone();
    let limit = BigFloat::from_f64(libm::pow(2.0, -(pc as f64) - 8.0), pc);
    let mut k = 1;
    while term.abs().cmp(&limit).unwrap_or(0) > 0 && k < 100_000 {
        k += 1;
        term = term.mul(&negx, pc, rm).div(&BigFloat::from_u64((k + m) as u64, pc), pc, rm);
        sum = sum.add(&term, pc, rm);
    }
    let one_plus = sum.add(&BigFloat::from_u8(1, pc), pc, rm);
    Some(ctx.log10_at(&one_plus, pc))
}

/// `g(x) = sum_{k>=0} (-x)^k / (k+2)!` at full precision, for `|x| < 1/2`.
fn g_series(ctx: &Ctx, x: &BigFloat) -> BigFloat {
    let negx = x.neg();
    let mut term = ctx.div(&ctx.int(1), &ctx.int(2));
    let mut sum = term.clone();
    let limit = BigFloat::from_f64(libm::pow(2.0, -(ctx.prec() as f64) - 8.0), ctx.prec());
    let mut k = 0;
    while term.abs().cmp(&limit).unwrap_or(0) > 0 {
        k += 1;
        term = ctx.div(&ctx.mul(&term, &negx), &ctx.int(k + 2));
        sum = ctx.add(&sum, &term);
    }
    sum
}

fn flat_step(ctx: &mut Ctx, s: Flat) -> Flat {
    match s {
        Flat::Direct(x) => {
            let xf = precise::to_f64(&x);
            if xf == 0.0 {
                return Flat::Direct(x);
            }
            if xf.abs() < 1e-20 {
                let sign = if xf < 0.0 { -1 } else { 1 };
                let y = ctx.log10(&x.abs());
                return flat_step(ctx, Flat::Log(sign, y));
            }
            if xf.abs() < 0.5 {
                let g = g_series(ctx, &x);
                Flat::Direct(ctx.mul(&ctx.mul(&x, &x), &g))
            } else {
                let p = ctx.prec();
                let e = ctx.exp_at(&x.neg(), p);
                Flat::Direct(ctx.add(&ctx.sub(&x, &ctx.int(1)), &e))
            }
        }
        Flat::Log(sign, y) => {
            let half = ctx.log10_f64(0.5);
            let mut y2 = ctx.add(&ctx.mul(&y, &ctx.int(2)), &half);
            if let Some(c) = series_correction(ctx, sign, &y, 2) {
                y2 = ctx.add(&y2, &c);
            }
            Flat::Log(1, y2)
        }
    }
}

fn flat_value(ctx: &mut Ctx, s: &Flat) -> Result<SignedLogValue> {
    match s {
        Flat::Direct(x) => {
            if x.is_zero() {
                return Ok(SignedLogValue::ZERO);
            }
            let sign = if x.is_negative() { -1 } else { 1 };
            let y = ctx.log10_at(&x.abs(), 192);
            ctx.to_log_value(sign, &y)
        }
        Flat::Log(sign, y) => ctx.to_log_value(*sign, y),
    }
}

/// `T(x) - x = e^-x - 1` for the current state.
fn flat_diff(ctx: &mut Ctx, s: &Flat) -> Result<SignedLogValue> {
    match s {
        Flat::Direct(x) => {
            let xf = precise::to_f64(x);
            let d = libm::expm1(-xf);
            if d.is_finite() {
                SignedLogValue::from_f64(d)
            } else {
                Ok(SignedLogValue::from_log10(1, -xf * core::f64::consts::LOG10_E))
            }
        }
        Flat::Log(sign, y) => {
            // e^-x - 1 = -x (1 + sum_{k>=1} (-x)^k / (k+1)!)
            let mut l = y.clone();
            if let Some(c) = series_correction(ctx, *sign, y, 1) {
                l = ctx.add(&l, &c);
            }
            ctx.to_log_value(-*sign, &l)
        }
    }
}

/// `N` iterates of the flat map from `x`, and optionally `T(x_n) - x_n`
/// for each of them.
fn flat_orbit(ctx: &mut Ctx, x: BigFloat, n: usize, diffs: bool) -> Result<(Vec<SignedLogValue>, Vec<SignedLogValue>)> {
    let mut s = Flat::Direct(x);
    let mut values = Vec::with_capacity(n);
    let mut ds = Vec::with_capacity(if diffs { n } else { 0 });
    for _ in 0..n {
        s = flat_step(ctx, s);
        values.push(flat_value(ctx, &s)?);
        if diffs {
            ds.push(flat_diff(ctx, &s)?);
        }
    }
    Ok((values, ds))
}

fn exponential(x0: SignedLogValue, n: usize) -> Result<Orbit> {
    let x0f = x0.to_f64();
    if !x0f.is_finite() {
        return Ok(Orbit { values: Vec::new(), truncation: Some("e^x0 is beyond any working precision".into()) });
    }
    // bits needed for the k-th term: its log, log10 e * x_{k-1}, must keep
    // 64 fractional bits, and each exponential multiplies the relative
    // error of its argument by the argument itself
    let mut log2_x = if x0f == 0.0 { f64::NEG_INFINITY } else { libm::log2(x0f.abs()) };
    let mut carried = 0.0;
    let mut m = 0;
    let mut bits = 0usize;
    while m < n {
        let need = carried + (log2_x + libm::log2(core::f64::consts::LOG10_E)).max(0.0) + 64.0 + precise::GUARD_BITS as f64;
        if !need.is_finite() || need > MAX_PRECISION as f64 || log2_x > 2e9 {
            break;
        }
        bits = need as usize;
        m += 1;
        carried += log2_x.max(0.0);
        // x_k = e^{x_{k-1}}: log2 x_k = x_{k-1} log2 e
        let xk = if log2_x > 1023.0 { f64::INFINITY } else { libm::pow(2.0, log2_x) };
        let signed = if x0f < 0.0 && m == 1 { -xk } else { xk };
        log2_x = signed * core::f64::consts::LOG2_E;
    }
    let mut ctx = Ctx::new(bits.max(128))?;
    let mut x = ctx.f(x0f);
    let p = ctx.prec();
    let log10e = ctx.log10e().clone();
    let mut values = Vec::with_capacity(m);
    for k in 1..=m {
        let y = ctx.mul(&x, &log10e);
        values.push(ctx.to_log_value(1, &y)?);
        if k < m {
            x = ctx.exp_at(&x, p);
        }
    }
    let truncation = (m < n).then(|| format!("term {} needs more than {MAX_PRECISION} bits of precision", m + 1));
    Ok(Orbit { values, truncation })
}

/// Bits consumed by each step of `T_n(x) = a_n x^(b_n)`, the number of
/// steps that fit under [`MAX_PRECISION`], and the fixed overhead in bits.
fn power_plan(b: IndexRule, x0: &SignedLogValue, n: usize) -> (usize, Vec<f64>, f64) {
    let base = libm::log2(x0.log_mag().abs().max(1.0)) + libm::log2(n.max(1) as f64) + 8.0 + precise::GUARD_BITS as f64;
    let mut total = base;
    let mut growth = Vec::new();
    for k in 1..=n {
        let g = libm::log2(b.value(k).abs().max(1.0));
        if !g.is_finite() || total + g > MAX_PRECISION as f64 {
            break;
        }
        total += g;
        growth.push(g);
    }
    (growth.len(), growth, base)
}

fn nonautonomous_power(a: IndexRule, b: IndexRule, x0: SignedLogValue, n: usize) -> Result<Orbit> {
    if x0.sign() <= 0 {
        return Err(Error::domain("power map orbits need x0 > 0"));
    }
    let (m, growth, base) = power_plan(b, &x0, n);
    let total = base + growth.iter().take(m).sum::<f64>();
    let mut ctx = Ctx::new(total as usize)?;
    let p = ctx.prec();
    let log10_2 = ctx.log10_f64(2.0);
    let la_const = if let IndexRule::Constant(c) = a { Some(ctx.log10_f64(c)) } else { None };
    let mut remaining = total - base;
    let mut y = ctx.from_log_value(&x0);
    let mut values = Vec::with_capacity(m);
    for k in 1..=m {
        remaining -= growth[k - 1];
        // log a_k only needs the bits that later growth will magnify
        let pc = ((remaining + 128.0) as usize).min(p);
        let la = match a {
            IndexRule::Constant(_) => la_const.clone().expect("constant log"),
            IndexRule::PowerOfTwo => ctx.mul(&log10_2, &ctx.int(k as i64)),
            _ => {
                let v = a.big(k, &ctx);
                ctx.log10_at(&v, pc)
            }
        };
        let bk = b.big(k, &ctx);
        y = ctx.add(&la, &ctx.mul(&bk, &y));
        values.push(ctx.to_log_value(1, &y)?);
    }
    let truncation = (m < n).then(|| format!("term {} needs more than {MAX_PRECISION} bits of precision", m + 1));
    Ok(Orbit { values, truncation })
}

/// Function whose root Newton's method approximates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "snake_case"))]
pub enum NewtonTarget {
    /// `f(x) = e^x - 2`, simple root `ln 2`.
    ExpMinus2,
    /// `f(x) = (e^x - 2)^3`, triple root `ln 2`.
    ExpMinus2Cubed,
}

/// Default neighbourhood radius around the root for starting points.
pub const NEWTON_RADIUS: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonSequences {
    /// `T^(n+1)(x0) - T^n(x0)` for `n = 1..=N`.
    pub diffs: Vec<SignedLogValue>,
    /// `T^n(x0) - ln 2` for `n = 1..=N`.
    pub errors: Vec<SignedLogValue>,
}

/// Difference and error sequences of Newton's method from `x0`.
///
/// With `e = x - ln 2`, the simple-root iteration is exactly the flat map
/// `e -> e - 1 + e^-e` and runs in arbitrary precision (quadratic
/// convergence doubles `log |e|` each step). The triple-root iteration is
/// `e -> e - (1 - e^-e)/3`, a linear contraction by 2/3 near the root.
pub fn newton_sequences(f: NewtonTarget, x0: f64, n: usize) -> Result<NewtonSequences> {
    newton_sequences_within(f, x0, n, NEWTON_RADIUS)
}

const LN_2_LO: f64 = 2.319_046_813_846_299_6e-17;

/// [`newton_sequences`] with a custom neighbourhood radius.
pub fn newton_sequences_within(f: NewtonTarget, x0: f64, n: usize, radius: f64) -> Result<NewtonSequences> {
    if !x0.is_finite() {
        return Err(Error::domain("x0 must be finite"));
    }
    if x0 == core::f64::consts::LN_2 {
        return Err(Error::Refused("x0 is the root itself".into()));
    }
    if (x0 - core::f64::consts::LN_2).abs() > radius {
        return Err(Error::domain(format!("x0 is outside the neighbourhood of radius {radius} around ln 2")));
    }
    match f {
        NewtonTarget::ExpMinus2 => {
            let mut ctx = Ctx::new(Ctx::bits_for(n, 2.0, 70.0))?;
            let p = ctx.prec();
            let ln2 = ctx.ln_at(&ctx.int(2), p);
            let e0 = ctx.sub(&ctx.f(x0), &ln2);
            let (errors, diffs) = flat_orbit(&mut ctx, e0, n, true)?;
            Ok(NewtonSequences { diffs, errors })
        }
        NewtonTarget::ExpMinus2Cubed => newton_triple(x0, n),
    }
}

fn newton_triple(x0: f64, n: usize) -> Result<NewtonSequences> {
    let mut s = State::from_native((x0 - core::f64::consts::LN_2) - LN_2_LO).map_err(Error::domain)?;
    let mut errors = Vec::with_capacity(n);
    let mut diffs = Vec::with_capacity(n);
    let third = libm::log10(3.0);
    for k in 0..n {
        s = match s {
            State::Native(e) => {
                if e < -700.0 {
                    return Err(Error::NoConvergence { what: "Newton iteration", iterations: k });
                }
                State::from_native(e + libm::expm1(-e) / 3.0).map_err(|_| Error::NoConvergence { what: "Newton iteration", iterations: k })?
            }
            State::Log(v) => {
                if v.log_mag() > 0.0 {
                    return Err(Error::NoConvergence { what: "Newton iteration", iterations: k });
                }
                // e (1 - phi(e)/3) with phi(e) = 1 below 1e-150
                State::Log(v.shift(libm::log10(2.0 / 3.0)))
            }
        };
        errors.push(s.value());
        diffs.push(match s {
            State::Native(e) => SignedLogValue::from_f64(libm::expm1(-e) / 3.0)?,
            State::Log(v) => v.neg().shift(-third),
        });
    }
    Ok(NewtonSequences { diffs, errors })
}

/// Vector field of a scalar flow `x' = F(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "snake_case"))]
pub enum FlowField {
    /// `x' = x`
    Linear,
    /// `x' = sqrt(x^2 + 1)`
    SqrtQuad,
    /// `x' = -x / (x^2 + 1)`
    DampedRational,
}

impl FlowField {
    fn eval(self, x: f64) -> f64 {
        match self {
            FlowField::Linear => x,
            FlowField::SqrtQuad => libm::hypot(x, 1.0),
            FlowField::DampedRational => -x / (x * x + 1.0),
        }
    }

    fn vanishes_at_zero(self) -> bool {
        !matches!(self, FlowField::SqrtQuad)
    }

    /// `d/dt log10 |x|` in terms of `y = log10 |x|`: `F(x) / (x ln 10)`.
    fn log_rate(self, sign: f64, y: f64) -> f64 {
        let r = match self {
            FlowField::Linear => 1.0,
            FlowField::SqrtQuad => sign * libm::sqrt(1.0 + libm::pow(10.0, -2.0 * y)),
            FlowField::DampedRational => -1.0 / (1.0 + libm::pow(10.0, 2.0 * y)),
        };
        r / core::f64::consts::LN_10
    }
}

/// Number of RK4 steps over `[0, t_end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "snake_case"))]
pub enum StepPolicy {
    /// Start at `10^4` steps and double until every occupation fraction
    /// moves by less than `1e-4`.
    Auto,
    /// A fixed number of steps (at least `10^4`).
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FlowSpec {
    pub field: FlowField,
    pub x0: f64,
    pub t_end: f64,
    pub step: StepPolicy,
}

/// Minimum number of integration steps.
pub const MIN_FLOW_STEPS: usize = 10_000;
const MAX_FLOW_STEPS: usize = 1 << 24;

/// For each target `t` in `[1, 10)`, the fraction of `[0, t_end)` during
/// which `S(x(s)) <= t`.
pub fn flow_occupation(spec: &FlowSpec, t_targets: &[f64]) -> Result<Vec<f64>> {
    if !(spec.t_end > 0.0 && spec.t_end.is_finite()) {
        return Err(Error::param("t_end", "must be positive and finite"));
    }
    if !spec.x0.is_finite() {
        return Err(Error::param("x0", "must be finite"));
    }
    if let Some(t) = t_targets.iter().find(|t| !(**t >= 1.0 && **t < 10.0)) {
        return Err(Error::param("t", format!("target {t} is outside [1, 10)")));
    }
    match spec.step {
        StepPolicy::Fixed(steps) if steps < MIN_FLOW_STEPS => Err(Error::param("steps", format!("need at least {MIN_FLOW_STEPS}"))),
        StepPolicy::Fixed(steps) => occupation_pass(spec, t_targets, steps),
        StepPolicy::Auto => {
            let mut steps = MIN_FLOW_STEPS;
            let mut coarse = occupation_pass(spec, t_targets, steps)?;
            while steps < MAX_FLOW_STEPS {
                steps *= 2;
                let fine = occupation_pass(spec, t_targets, steps)?;
                let change = coarse.iter().zip(&fine).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                if change < 1e-4 {
                    return Ok(fine);
                }
                coarse = fine;
            }
            Err(Error::NoConvergence { what: "occupation under step halving", iterations: steps })
        }
    }
}

fn rk4(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let k1 = f(x);
    let k2 = f(x + 0.5 * h * k1);
    let k3 = f(x + 0.5 * h * k2);
    let k4 = f(x + h * k3);
    x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Measure of `{u in (0, x] : S(u) <= t}` for `x >= 0`.
fn occupied_below(x: f64, t: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let k = libm::floor(libm::log10(x));
    let p = libm::pow(10.0, k);
    let m = (x / p).clamp(1.0, 10.0);
    (t - 1.0) * p / 9.0 + p * (m.min(t) - 1.0)
}

/// Fraction of the segment from `a` to `b` where `S(|u|) <= t`.
fn segment_fraction_x(a: f64, b: f64, t: f64) -> f64 {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    if hi - lo == 0.0 {
        let s = crate::significand::significand(a).unwrap_or(0.0);
        return if s <= t { 1.0 } else { 0.0 };
    }
    let pos = occupied_below(hi.max(0.0), t) - occupied_below(lo.max(0.0), t);
    let neg = occupied_below((-lo).max(0.0), t) - occupied_below((-hi).max(0.0), t);
    ((pos + neg) / (hi - lo)).clamp(0.0, 1.0)
}

/// Fraction of `[ya, yb]` where `frac(y) <= l`.
fn segment_fraction_y(ya: f64, yb: f64, l: f64) -> f64 {
    let cum = |z: f64| {
        let f = libm::floor(z);
        f * l + (z - f).min(l)
    };
    let (lo, hi) = if ya <= yb { (ya, yb) } else { (yb, ya) };
    if hi - lo == 0.0 {
        return if lo - libm::floor(lo) <= l { 1.0 } else { 0.0 };
    }
    ((cum(hi) - cum(lo)) / (hi - lo)).clamp(0.0, 1.0)
}

fn occupation_pass(spec: &FlowSpec, targets: &[f64], steps: usize) -> Result<Vec<f64>> {
    let field = spec.field;
    let h = spec.t_end / steps as f64;
    let logs: Vec<f64> = targets.iter().map(|&t| libm::log10(t)).collect();
    let mut occ = vec![0.0; targets.len()];
    // log mode holds (sign, log10 |x|)
    let mut native = Some(spec.x0);
    let mut log_state = (1.0, 0.0);
    for _ in 0..steps {
        if let Some(x) = native {
            let large = x.abs() > 100.0;
            let small = field.vanishes_at_zero() && x != 0.0 && x.abs() < 0.01;
            if large || small {
                log_state = (x.signum(), libm::log10(x.abs()));
                native = None;
            }
        }
        match native {
            Some(x) => {
                let x1 = rk4(|u| field.eval(u), x, h);
                if !x1.is_finite() {
                    return Err(Error::NoConvergence { what: "flow integration", iterations: steps });
                }
                for (o, &t) in occ.iter_mut().zip(targets) {
                    *o += h * segment_fraction_x(x, x1, t);
                }
                native = Some(x1);
            }
            None => {
                let (sign, y) = log_state;
                let y1 = rk4(|v| field.log_rate(sign, v), y, h);
                for (o, &l) in occ.iter_mut().zip(&logs) {
                    *o += h * segment_fraction_y(y, y1, l);
                }
                log_state = (sign, y1);
                if y1.abs() < 1.9 {
                    native = Some(sign * libm::pow(10.0, y1));
                }
            }
        }
    }
    Ok(occ.into_iter().map(|o| o / spec.t_end).collect())
}
