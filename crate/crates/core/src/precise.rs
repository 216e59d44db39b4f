//! Thin wrapper over `astro-float` for log-domain recursions whose logarithms
//! grow geometrically. The fractional part of such a logarithm is only
//! meaningful if the working precision exceeds the number of bits consumed
//! by the growth, so precision is chosen per orbit.

use astro_float::{BigFloat, Consts, RoundingMode, Sign};

use crate::error::{Error, Result};
use crate::significand::SignedLogValue;

const RM: RoundingMode = RoundingMode::ToEven;

/// Bits kept beyond what growth consumes.
pub(crate) const GUARD_BITS: usize = 192;

/// Upper limit on working precision (bits). A logarithm at this precision
/// takes seconds; four times more takes minutes.
pub const MAX_PRECISION: usize = 1 << 18;

pub(crate) struct Ctx {
    p: usize,
    cc: Consts,
    ln10: BigFloat,
    log10e: BigFloat,
}

impl Ctx {
    pub(crate) fn new(p: usize) -> Result<Self> {
        if p > MAX_PRECISION {
            return Err(Error::Precision(alloc::format!("{p} bits requested, limit is {MAX_PRECISION}")));
        }
        let p = p.max(128);
        let mut cc = Consts::new().map_err(|_| Error::Precision("constant cache".into()))?;
        let ln10 = BigFloat::from_u8(10, p).ln(p, RM, &mut cc);
        let log10e = BigFloat::from_u8(1, p).div(&ln10, p, RM);
        Ok(Ctx { p, cc, ln10, log10e })
    }

    /// Precision for `steps` iterations whose log grows by a factor of at
    /// most `growth` per step, starting from a log of size `start`.
    pub(crate) fn bits_for(steps: usize, growth: f64, start: f64) -> usize {
        let per_step = libm::log2(growth.max(1.0));
        let extra = libm::log2(start.abs().max(1.0)) + libm::log2(steps.max(1) as f64);
        (steps as f64 * per_step + extra) as usize + GUARD_BITS
    }

    pub(crate) fn prec(&self) -> usize {
        self.p
    }

    pub(crate) fn f(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, self.p)
    }

    pub(crate) fn int(&self, n: i64) -> BigFloat {
        BigFloat::from_i64(n, self.p)
    }

    pub(crate) fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.p, RM)
    }

    pub(crate) fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, self.p, RM)
    }

    pub(crate) fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, self.p, RM)
    }

    pub(crate) fn div(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, self.p, RM)
    }

    /// `log10 x` at precision `p` (defaults to the working precision).
    pub(crate) fn log10_at(&mut self, x: &BigFloat, p: usize) -> BigFloat {
        x.ln(p, RM, &mut self.cc).mul(&self.log10e, p, RM)
    }

    pub(crate) fn log10(&mut self, x: &BigFloat) -> BigFloat {
        self.log10_at(x, self.p)
    }

    /// `log10` of a native float, correctly rounded to the working precision.
    pub(crate) fn log10_f64(&mut self, x: f64) -> BigFloat {
        let b = self.f(x);
        self.log10(&b)
    }

    pub(crate) fn ln_at(&mut self, x: &BigFloat, p: usize) -> BigFloat {
        x.ln(p, RM, &mut self.cc)
    }

    pub(crate) fn exp_at(&mut self, x: &BigFloat, p: usize) -> BigFloat {
        x.exp(p, RM, &mut self.cc)
    }

    /// `10^y`.
    pub(crate) fn pow10_at(&mut self, y: &BigFloat, p: usize) -> BigFloat {
        let t = y.mul(&self.ln10, p, RM);
        t.exp(p, RM, &mut self.cc)
    }

    /// `log10(1 + 10^(-d))` for `d >= 0`, or `None` when it is below the
    /// working resolution relative to a log of size `scale_bits`.
    ///
    /// The correction is at most `10^-d`, so it only needs
    /// `p - d log2(10)` bits of its own precision.
    pub(crate) fn log1p_pow10_neg(&mut self, d: &BigFloat) -> Option<BigFloat> {
        let df = to_f64(d);
        let drop_bits = df * core::f64::consts::LOG2_10;
        if drop_bits > (self.p + 8) as f64 {
            return None;
        }
        let pc = ((self.p as f64 - drop_bits).max(0.0) as usize + 64).min(self.p);
        let neg = d.neg();
        let t = self.pow10_at(&neg, pc);
        let one = BigFloat::from_u8(1, pc);
        let s = one.add(&t, pc, RM);
        Some(self.log10_at(&s, pc))
    }

    /// `log10(10^u + 10^v)`.
    pub(crate) fn log_sum(&mut self, u: &BigFloat, v: &BigFloat) -> BigFloat {
        let (m, d) = if u.cmp(v).unwrap_or(0) >= 0 { (u, self.sub(u, v)) } else { (v, self.sub(v, u)) };
        match self.log1p_pow10_neg(&d) {
            None => m.clone(),
            Some(c) => self.add(m, &c),
        }
    }

    /// Converts a sign and a logarithm to the library representation.
    pub(crate) fn to_log_value(&self, sign: i8, y: &BigFloat) -> Result<SignedLogValue> {
        if y.is_nan() {
            return Err(Error::Precision("not a number in log-domain recursion".into()));
        }
        if y.is_inf_neg() {
            return Ok(SignedLogValue::ZERO);
        }
        if y.is_inf() {
            return Err(Error::Precision("logarithm overflowed".into()));
        }
        let fl = y.floor();
        let frac = self.sub(y, &fl);
        Ok(SignedLogValue::from_parts(sign, to_f64(&fl), to_f64(&frac)))
    }

    /// Exact conversion of a log-domain value's logarithm.
    pub(crate) fn from_log_value(&self, v: &SignedLogValue) -> BigFloat {
        self.add(&self.f(v.characteristic()), &self.f(v.mantissa()))
    }

    pub(crate) fn log10e(&self) -> &BigFloat {
        &self.log10e
    }
}

/// Nearest-ish `f64` (truncated to 64 significant bits first), saturating
/// to infinities out of range.
pub(crate) fn to_f64(x: &BigFloat) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_inf_pos() {
        return f64::INFINITY;
    }
    if x.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    match x.as_raw_parts() {
        None => f64::NAN,
        Some((words, _, sign, e, _)) => {
            let top = match words.last() {
                Some(&w) if w != 0 => w,
                _ => return 0.0,
            };
            let v = libm::scalbn(top as f64, e - 64);
            if sign == Sign::Neg {
                -v
            } else {
                v
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions() {
        for x in [0.75, 1.0, -3.0, 1e-3, 123456.789, -1e300, 2.5e-300] {
            let b = BigFloat::from_f64(x, 256);
            assert_eq!(to_f64(&b), x);
        }
        assert_eq!(to_f64(&BigFloat::from_f64(0.0, 128)), 0.0);
    }

    #[test]
    fn log_sum_matches_f64() {
        let mut c = Ctx::new(256).unwrap();
        for (u, v) in [(0.0, 0.0), (1.5, -2.0), (-3.0, 40.0), (100.0, 0.0)] {
            let want = if u > v {
                u + libm::log10(1.0 + libm::pow(10.0, v - u))
            } else {
                v + libm::log10(1.0 + libm::pow(10.0, u - v))
            };
            let got = to_f64(&c.log_sum(&c.f(u), &c.f(v)));
            assert!((got - want).abs() < 1e-14, "{u} {v}: {got} {want}");
        }
    }

    #[test]
    fn split_of_large_log() {
        let mut c = Ctx::new(512).unwrap();
        let l2 = c.log10_f64(2.0);
        let y = c.mul(&c.int(1 << 40), &l2);
        let v = c.to_log_value(1, &y).unwrap();
        let nl = (1u64 << 40) as f64 * libm::log10(2.0);
        assert_eq!(v.characteristic(), libm::floor(nl));
        // the f64 product has lost ~13 bits of the fraction
        assert!((v.mantissa() - (nl - libm::floor(nl))).abs() < 1e-3);
    }
}
