//! Significands, first digits and the log-domain number representation.

use alloc::format;
use core::cmp::Ordering;

use crate::error::{Error, Result};

/// Largest value strictly below one.
const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

/// A real number stored as a sign and the base-10 logarithm of its magnitude.
///
/// The logarithm is split into an integer `characteristic` and a fractional
/// `mantissa` in `[0, 1)`, so the mantissa (the log of the significand) keeps
/// full double precision even when the characteristic is astronomically
/// large. Once the characteristic leaves the `f64` range it saturates to an
/// infinity; the mantissa stays exact.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SignedLogValue {
    sign: i8,
    characteristic: f64,
    mantissa: f64,
}

impl SignedLogValue {
    pub const ZERO: SignedLogValue = SignedLogValue { sign: 0, characteristic: 0.0, mantissa: 0.0 };
    pub const ONE: SignedLogValue = SignedLogValue { sign: 1, characteristic: 0.0, mantissa: 0.0 };

    /// Converts a finite real.
    pub fn from_f64(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::domain("non-finite input"));
        }
        if x == 0.0 {
            return Ok(Self::ZERO);
        }
        let (t, k) = decimal_split(x);
        let m = libm::log10(t).min(BELOW_ONE);
        Ok(SignedLogValue { sign: sign_of(x), characteristic: k as f64, mantissa: m })
    }

    /// Converts an integer exactly: the first digit is taken from the
    /// decimal expansion, the mantissa from its leading 17 digits.
    pub fn from_i128(x: i128) -> Self {
        if x == 0 {
            return Self::ZERO;
        }
        let digits = format!("{}", x.unsigned_abs());
        let k = digits.len() - 1;
        let lead = &digits[..digits.len().min(17)];
        let t: f64 = format!("{}.{}", &lead[..1], &lead[1..]).parse().expect("decimal digits");
        let d = f64::from(digits.as_bytes()[0] - b'0');
        let m = libm::log10(t).max(libm::log10(d));
        // keep the mantissa strictly below log10(d + 1) so the digit survives
        let m = if d < 9.0 { m.min(libm::log10(d + 1.0).next_down_f64()) } else { m.min(BELOW_ONE) };
        SignedLogValue { sign: if x < 0 { -1 } else { 1 }, characteristic: k as f64, mantissa: m }
    }

    /// Builds a value from a sign and `log10 |x|`.
    pub fn from_log10(sign: i8, log_mag: f64) -> Self {
        Self::from_parts(sign, 0.0, log_mag)
    }

    /// Builds a value from a sign and a logarithm given as `characteristic +
    /// mantissa`, where neither part needs to be normalized.
    pub fn from_parts(sign: i8, characteristic: f64, mantissa: f64) -> Self {
        // a saturated characteristic still carries a valid mantissa; only a
        // -inf logarithm in the mantissa slot means zero
        if sign == 0 || mantissa.is_nan() || characteristic.is_nan() || mantissa == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        let sign = sign.signum();
        if !mantissa.is_finite() {
            return SignedLogValue { sign, characteristic: mantissa, mantissa: 0.0 };
        }
        let fl = libm::floor(mantissa);
        let mut m = mantissa - fl;
        let mut c = characteristic + fl;
        if m >= 1.0 {
            m = 0.0;
            c += 1.0;
        }
        SignedLogValue { sign, characteristic: c, mantissa: m }
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// Integer part of `log10 |x|` (meaningless for zero).
    pub fn characteristic(&self) -> f64 {
        self.characteristic
    }

    /// Fractional part of `log10 |x|`, in `[0, 1)`.
    pub fn mantissa(&self) -> f64 {
        self.mantissa
    }

    /// `log10 |x|` as a single float. Loses mantissa bits once the
    /// characteristic is large; statistics use [`Self::mantissa`] instead.
    pub fn log_mag(&self) -> f64 {
        self.characteristic + self.mantissa
    }

    /// The significand `S(x)` in `[1, 10)`, or 0 for zero.
    pub fn significand(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let d = self.first_digit() as f64;
        let t = libm::pow(10.0, self.mantissa);
        t.clamp(d, (d + 1.0).next_down_f64())
    }

    /// First significant digit, 0 for zero.
    pub fn first_digit(&self) -> u8 {
        if self.is_zero() {
            return 0;
        }
        digit_of_mantissa(self.mantissa)
    }

    /// The value as a native float (may overflow to infinity or underflow to 0).
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let t = libm::pow(10.0, self.mantissa);
        let c = self.characteristic;
        let mag = if c > 310.0 {
            f64::INFINITY
        } else if c < -345.0 {
            0.0
        } else if c < -300.0 {
            t * 1e-40 * libm::pow(10.0, c + 40.0)
        } else {
            t * libm::pow(10.0, c)
        };
        self.sign as f64 * mag
    }

    pub fn neg(self) -> Self {
        SignedLogValue { sign: -self.sign, ..self }
    }

    pub fn abs(self) -> Self {
        SignedLogValue { sign: self.sign.abs(), ..self }
    }

    /// Multiplies the value by `10^delta`.
    pub fn shift(self, delta: f64) -> Self {
        if self.is_zero() {
            return self;
        }
        let fl = libm::floor(delta);
        Self::from_parts(self.sign, self.characteristic + fl, self.mantissa + (delta - fl))
    }

    /// Total order on magnitudes (zero smallest).
    pub fn cmp_magnitude(&self, other: &Self) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            _ => self
                .characteristic
                .partial_cmp(&other.characteristic)
                .unwrap_or(Ordering::Equal)
                .then(self.mantissa.partial_cmp(&other.mantissa).unwrap_or(Ordering::Equal)),
        }
    }
}

fn sign_of(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

trait NextDown {
    fn next_down_f64(self) -> f64;
}

impl NextDown for f64 {
    fn next_down_f64(self) -> f64 {
        // only used on positive normal values
        f64::from_bits(self.to_bits() - 1)
    }
}

/// First digit of a significand whose log is `m` in `[0,1)`, decided by
/// comparison against `log10 d` evaluated with the same routine that maps
/// exact significands to mantissas, so integers land on the right side.
pub(crate) fn digit_of_mantissa(m: f64) -> u8 {
    let mut d = libm::floor(libm::pow(10.0, m)).clamp(1.0, 9.0) as u8;
    if d < 9 && m >= libm::log10((d + 1) as f64) {
        d += 1;
    } else if d > 1 && m < libm::log10(d as f64) {
        d -= 1;
    }
    d
}

/// Splits a finite nonzero `x` as `|x| = t * 10^k` with `t` in `[1, 10)`,
/// using the shortest decimal that round-trips to `x`. A double typed as
/// `1e-29` therefore has significand 1 even though the nearest binary
/// value lies just below the power of ten.
fn decimal_split(x: f64) -> (f64, i32) {
    let s = format!("{:e}", x.abs());
    let (digits, exp) = s.split_once('e').expect("exponent marker");
    let k: i32 = exp.parse().expect("decimal exponent");
    let t: f64 = digits.parse().expect("decimal digits");
    if t >= 10.0 {
        (BELOW_TEN, k)
    } else {
        (t, k)
    }
}

const BELOW_TEN: f64 = 9.999_999_999_999_998;

/// The significand `S(x)`: the unique `t` in `[1, 10)` with `|x| = 10^k t`,
/// and 0 for `x = 0`.
pub fn significand(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain("non-finite input"));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok(decimal_split(x).0)
}

/// First significant decimal digit, 0 for `x = 0`.
pub fn first_digit(x: f64) -> Result<u8> {
    if !x.is_finite() {
        return Err(Error::domain("non-finite input"));
    }
    if x == 0.0 {
        return Ok(0);
    }
    let s = format!("{:e}", x.abs());
    Ok(s.as_bytes()[0] - b'0')
}

/// `log10 S(x)`, the fractional part of `log10 |x|`.
pub fn log_significand(v: &SignedLogValue) -> Result<f64> {
    if v.is_zero() {
        return Err(Error::domain("log significand of zero"));
    }
    Ok(v.mantissa())
}

/// Running sum of base-10 logarithms with an exact integer part and a
/// double-double fractional part, so long products keep their significand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogAccumulator {
    int: f64,
    hi: f64,
    lo: f64,
}

impl LogAccumulator {
    pub fn new(start: f64) -> Self {
        let mut acc = LogAccumulator { int: 0.0, hi: 0.0, lo: 0.0 };
        acc.add(start);
        acc
    }

    pub fn from_value(v: &SignedLogValue) -> Self {
        LogAccumulator { int: v.characteristic, hi: v.mantissa, lo: 0.0 }
    }

    /// Adds `delta`.
    pub fn add(&mut self, delta: f64) {
        let fl = libm::floor(delta);
        self.int += fl;
        self.add_fraction(delta - fl, 0.0);
    }

    /// Adds the double-double `hi + lo`.
    pub fn add_dd(&mut self, hi: f64, lo: f64) {
        let fl = libm::floor(hi);
        self.int += fl;
        self.add_fraction(hi - fl, lo);
    }

    fn add_fraction(&mut self, f: f64, flo: f64) {
        let (s, e) = two_sum(self.hi, f);
        let (mut hi, mut lo) = fast_two_sum(s, e + self.lo + flo);
        while hi >= 1.0 {
            hi -= 1.0;
            self.int += 1.0;
            (hi, lo) = fast_two_sum(hi, lo);
        }
        while hi < 0.0 || (hi == 0.0 && lo < 0.0) {
            hi += 1.0;
            self.int -= 1.0;
            (hi, lo) = fast_two_sum(hi, lo);
        }
        self.hi = hi;
        self.lo = lo;
    }

    /// Current sum as a value with the given sign.
    pub fn value(&self, sign: i8) -> SignedLogValue {
        let m = self.hi + self.lo;
        SignedLogValue::from_parts(sign, self.int, m)
    }

    /// Current sum as a single float.
    pub fn total(&self) -> f64 {
        self.int + (self.hi + self.lo)
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn fast_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}
