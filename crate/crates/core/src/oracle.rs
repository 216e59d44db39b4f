//! Exact integer ground truth for first digits.
//!
//! Numbers are stored in base 10^9 limbs, so the leading decimal digit is read
//! off the top limb without any base conversion and without floating point.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::conformance::DigitHistogram;
use crate::error::{Error, Result};

const BASE: u64 = 1_000_000_000;

/// Largest sequence length served for [`ExactSequenceKind::TwoStepPoly`].
pub const TWO_STEP_MAX_TERMS: usize = 25;

/// Integer sequences with exactly computable first digits.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(tag = "name", rename_all = "snake_case"))]
pub enum ExactSequenceKind {
    /// `2^1, 2^2, ...`
    PowerOfTwo,
    /// `F_1 = F_2 = 1, ...`
    Fibonacci,
    /// `1!, 2!, ...`
    Factorial,
    /// `x_n = c_1 x_{n-1} + ... + c_d x_{n-d}`, listed from `x_1 = seeds[0]`.
    LinearRecursion { coeffs: Vec<u64>, seeds: Vec<u64> },
    /// `x_n = a1 x_{n-1}^b1 + a2 x_{n-2}^b2`, listed from `x_1`.
    TwoStepPoly { a1: u64, a2: u64, b1: u32, b2: u32, x1: u64, x2: u64 },
}

/// Unsigned big integer, little-endian base 10^9 limbs, no leading zero limbs.
#[derive(Debug, Clone, PartialEq, Eq)]
struct BigDec(Vec<u32>);

impl BigDec {
    fn from_u64(mut x: u64) -> Self {
        let mut limbs = Vec::new();
        while x > 0 {
            limbs.push((x % BASE) as u32);
            x /= BASE;
        }
        BigDec(limbs)
    }

    fn mul_small(&mut self, m: u64) {
        if m == 0 {
            self.0.clear();
            return;
        }
        let mut carry: u128 = 0;
        for limb in self.0.iter_mut() {
            let t = *limb as u128 * m as u128 + carry;
            *limb = (t % BASE as u128) as u32;
            carry = t / BASE as u128;
        }
        while carry > 0 {
            self.0.push((carry % BASE as u128) as u32);
            carry /= BASE as u128;
        }
    }

    fn add_assign(&mut self, other: &BigDec) {
        if self.0.len() < other.0.len() {
            self.0.resize(other.0.len(), 0);
        }
        let mut carry = 0u32;
        for (i, limb) in self.0.iter_mut().enumerate() {
            let t = *limb + other.0.get(i).copied().unwrap_or(0) + carry;
            if t >= BASE as u32 {
                *limb = t - BASE as u32;
                carry = 1;
            } else {
                *limb = t;
                carry = 0;
            }
            if carry == 0 && i >= other.0.len() {
                break;
            }
        }
        if carry > 0 {
            self.0.push(carry);
        }
    }

    fn leading_digit(&self) -> u8 {
        match self.0.last() {
            None => 0,
            Some(&top) => leading_digit_u64(top as u64),
        }
    }
}

fn leading_digit_u64(mut x: u64) -> u8 {
    while x >= 10 {
        x /= 10;
    }
    x as u8
}

fn digit_count_u64(mut x: u64) -> u32 {
    let mut n = 1;
    while x >= 10 {
        x /= 10;
        n += 1;
    }
    n
}

/// First digits of `x_1..x_N` (0 for a zero term).
pub fn exact_first_digits(kind: &ExactSequenceKind, n: usize) -> Result<Vec<u8>> {
    if n == 0 {
        return Err(Error::param("N", "must be at least 1"));
    }
    match kind {
        ExactSequenceKind::PowerOfTwo => {
            let mut x = BigDec::from_u64(1);
            Ok((0..n)
                .map(|_| {
                    x.mul_small(2);
                    x.leading_digit()
                })
                .collect())
        }
        ExactSequenceKind::Factorial => {
            let mut x = BigDec::from_u64(1);
            Ok((1..=n as u64)
                .map(|k| {
                    x.mul_small(k);
                    x.leading_digit()
                })
                .collect())
        }
        ExactSequenceKind::Fibonacci => linear_digits(&[1, 1], &[1, 1], n),
        ExactSequenceKind::LinearRecursion { coeffs, seeds } => {
            if coeffs.is_empty() || coeffs.len() != seeds.len() {
                return Err(Error::param("coeffs", "need one seed per coefficient and order at least 1"));
            }
            linear_digits(coeffs, seeds, n)
        }
        &ExactSequenceKind::TwoStepPoly { a1, a2, b1, b2, x1, x2 } => {
            if n > TWO_STEP_MAX_TERMS {
                return Err(Error::Refused(format!(
                    "two-step polynomial recursions grow doubly exponentially; at most {TWO_STEP_MAX_TERMS} terms are computed exactly, {n} requested"
                )));
            }
            two_step_digits(a1, a2, b1, b2, x1, x2, n)
        }
    }
}

/// Histogram of [`exact_first_digits`].
pub fn exact_digit_histogram(kind: &ExactSequenceKind, n: usize) -> Result<DigitHistogram> {
    Ok(DigitHistogram::from_digits(&exact_first_digits(kind, n)?))
}

fn linear_digits(coeffs: &[u64], seeds: &[u64], n: usize) -> Result<Vec<u8>> {
    let d = coeffs.len();
    let mut window: Vec<BigDec> = seeds.iter().map(|&s| BigDec::from_u64(s)).collect();
    let mut out: Vec<u8> = window.iter().take(n).map(BigDec::leading_digit).collect();
    while out.len() < n {
        let mut next = BigDec(Vec::new());
        for (i, &c) in coeffs.iter().enumerate() {
            let mut term = window[d - 1 - i].clone();
            term.mul_small(c);
            next.add_assign(&term);
        }
        out.push(next.leading_digit());
        window.remove(0);
        window.push(next);
    }
    Ok(out)
}

/// A positive integer known only through its top `limbs.len()` base 10^9
/// limbs, `value = limbs * BASE^shift`; used as a one-sided bound.
#[derive(Debug, Clone)]
struct Truncated {
    limbs: Vec<u32>,
    shift: usize,
}

impl Truncated {
    fn from_u64(x: u64) -> Self {
        Truncated { limbs: BigDec::from_u64(x).0, shift: 0 }
    }

    /// Keeps the top `k` limbs, rounding down (`up = false`) or up.
    fn truncate(mut self, k: usize, up: bool) -> Self {
        while self.limbs.last() == Some(&0) {
            self.limbs.pop();
        }
        if self.limbs.len() <= k {
            return self;
        }
        let drop = self.limbs.len() - k;
        let inexact = self.limbs[..drop].iter().any(|&l| l != 0);
        self.limbs.drain(..drop);
        self.shift += drop;
        if up && inexact {
            let mut b = BigDec(core::mem::take(&mut self.limbs));
            b.add_assign(&BigDec::from_u64(1));
            self.limbs = b.0;
            if self.limbs.len() > k {
                return self.truncate(k, up);
            }
        }
        self
    }

    fn mul(&self, other: &Truncated, k: usize, up: bool) -> Self {
        let mut acc = vec![0u64; self.limbs.len() + other.limbs.len() + 1];
        for (i, &a) in self.limbs.iter().enumerate() {
            let mut carry = 0u64;
            for (j, &b) in other.limbs.iter().enumerate() {
                let t = acc[i + j] + a as u64 * b as u64 + carry;
                acc[i + j] = t % BASE;
                carry = t / BASE;
            }
            let mut p = i + other.limbs.len();
            while carry > 0 {
                let t = acc[p] + carry;
                acc[p] = t % BASE;
                carry = t / BASE;
                p += 1;
            }
        }
        let limbs = acc.into_iter().map(|l| l as u32).collect();
        Truncated { limbs, shift: self.shift + other.shift }.truncate(k, up)
    }

    fn pow(&self, e: u32, k: usize, up: bool) -> Self {
        let mut result = Truncated::from_u64(1);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base, k, up);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base, k, up);
            }
        }
        result
    }

    fn add(&self, other: &Truncated, k: usize, up: bool) -> Self {
        let shift = self.shift.min(other.shift);
        let widen = |t: &Truncated| {
            let mut l = vec![0u32; t.shift - shift];
            l.extend_from_slice(&t.limbs);
            BigDec(l)
        };
        let mut a = widen(self);
        a.add_assign(&widen(other));
        Truncated { limbs: a.0, shift }.truncate(k, up)
    }

    /// (number of decimal digits, leading digit); (0, 0) for zero.
    fn digits(&self) -> (usize, u8) {
        match self.limbs.iter().rposition(|&l| l != 0) {
            None => (0, 0),
            Some(top) => {
                let t = self.limbs[top] as u64;
                (digit_count_u64(t) as usize + 9 * (top + self.shift), leading_digit_u64(t))
            }
        }
    }
}

/// Lower and upper bounds are propagated separately (all terms are
/// nonnegative, so the recursion is monotone in every argument). A digit is
/// accepted only when both bounds agree on digit count and leading digit;
/// otherwise the working width doubles and the whole orbit is recomputed.
fn two_step_digits(a1: u64, a2: u64, b1: u32, b2: u32, x1: u64, x2: u64, n: usize) -> Result<Vec<u8>> {
    let mut k = 8;
    loop {
        let mut lo = [Truncated::from_u64(x1), Truncated::from_u64(x2)];
        let mut hi = lo.clone();
        let mut out = Vec::with_capacity(n);
        let mut ambiguous = false;
        for i in 0..n {
            if i >= 2 {
                let step = |w: &[Truncated; 2], up: bool| {
                    let t1 = w[1].pow(b1, k, up).mul(&Truncated::from_u64(a1), k, up);
                    let t2 = w[0].pow(b2, k, up).mul(&Truncated::from_u64(a2), k, up);
                    t1.add(&t2, k, up)
                };
                let nl = step(&lo, false);
                let nh = step(&hi, true);
                lo = [lo[1].clone(), nl];
                hi = [hi[1].clone(), nh];
            }
            let cur = if i == 0 { 0 } else { 1 };
            let (dl, fl) = lo[cur].digits();
            let (dh, fh) = hi[cur].digits();
            if dl != dh || fl != fh {
                ambiguous = true;
                break;
            }
            out.push(fl);
        }
        if !ambiguous {
            return Ok(out);
        }
        if k > 1 << 16 {
            return Err(Error::Precision("leading digit could not be isolated".into()));
        }
        k *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_examples() {
        assert_eq!(exact_first_digits(&ExactSequenceKind::PowerOfTwo, 6).unwrap(), [2, 4, 8, 1, 3, 6]);
        assert_eq!(exact_first_digits(&ExactSequenceKind::Fibonacci, 7).unwrap(), [1, 1, 2, 3, 5, 8, 1]);
        assert_eq!(exact_first_digits(&ExactSequenceKind::Factorial, 5).unwrap(), [1, 2, 6, 2, 1]);
        assert!(exact_first_digits(&ExactSequenceKind::Factorial, 0).is_err());
    }

    #[test]
    fn fibonacci_counts() {
        let h = exact_digit_histogram(&ExactSequenceKind::Fibonacci, 1000).unwrap();
        assert_eq!(h.counts, [301, 177, 125, 96, 80, 67, 56, 53, 45]);
        assert_eq!(h.total, 1000);
        assert!(h.chi2() < 15.51);
    }

    #[test]
    fn linear_recursion_against_u128() {
        let kind = ExactSequenceKind::LinearRecursion { coeffs: vec![3, 0, 7], seeds: vec![1, 4, 2] };
        let mut xs: Vec<u128> = vec![1, 4, 2];
        while xs.len() < 40 {
            let l = xs.len();
            xs.push(3 * xs[l - 1] + 7 * xs[l - 3]);
        }
        let want: Vec<u8> = xs.iter().map(|&x| leading_digit_u64((x / 10u128.pow(digits_u128(x).saturating_sub(1))) as u64)).collect();
        assert_eq!(exact_first_digits(&kind, 40).unwrap(), want);
    }

    fn digits_u128(mut x: u128) -> u32 {
        let mut n = 0;
        while x > 0 {
            x /= 10;
            n += 1;
        }
        n
    }

    #[test]
    fn lucas_matches_u128() {
        let kind = ExactSequenceKind::LinearRecursion { coeffs: vec![1, 1], seeds: vec![1, 3] };
        let mut a: u128 = 1;
        let mut b: u128 = 3;
        let got = exact_first_digits(&kind, 150).unwrap();
        for (i, &d) in got.iter().enumerate() {
            let x = if i == 0 { a } else { b };
            assert_eq!(d, leading_digit_u64((x / 10u128.pow(digits_u128(x) - 1)) as u64));
            if i >= 1 {
                let c = a + b;
                a = b;
                b = c;
            }
        }
    }

    #[test]
    fn two_step_small_terms() {
        // 1, 1, 2, 5, 29, 866, 750797, ...
        let kind = ExactSequenceKind::TwoStepPoly { a1: 1, a2: 1, b1: 2, b2: 2, x1: 1, x2: 1 };
        assert_eq!(exact_first_digits(&kind, 7).unwrap(), [1, 1, 2, 5, 2, 8, 7]);
        // 750797^2 + 866^2 = 563696885165
        assert_eq!(exact_first_digits(&kind, 8).unwrap()[7], 5);
        let d = exact_first_digits(&kind, 25).unwrap();
        assert_eq!(d.len(), 25);
        assert!(matches!(exact_first_digits(&kind, 26), Err(Error::Refused(_))));
    }

    #[test]
    fn truncated_bounds_bracket_exact_value() {
        // 3^200 computed with 2-limb bounds
        let three = Truncated::from_u64(3);
        let lo = three.pow(200, 2, false);
        let hi = three.pow(200, 2, true);
        let mut exact = BigDec::from_u64(1);
        for _ in 0..200 {
            exact.mul_small(3);
        }
        let ex = Truncated { limbs: exact.0.clone(), shift: 0 };
        assert_eq!(lo.digits().0, ex.digits().0);
        assert!(lo.digits().1 <= ex.digits().1 && ex.digits().1 <= hi.digits().1);
    }
}
