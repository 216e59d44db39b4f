//! Matrix powers, positive linear recursions and Markov chains.
//!
//! Powers are accumulated as a bounded matrix times a tracked scale, so
//! entries of `A^n` keep double precision for any `n`.
//!
//! Entry positions `(k, l)` in the sequence functions are 1-based, as in
//! matrix notation; [`Matrix::get`] is 0-based.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::significand::{LogAccumulator, SignedLogValue};

/// Largest supported dimension.
pub const MAX_DIM: usize = 16;

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    d: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        if d == 0 || d > MAX_DIM {
            return Err(Error::param("matrix", alloc::format!("dimension must be 1..={MAX_DIM}")));
        }
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::param("matrix", "rows must all have length d"));
        }
        let data: Vec<f64> = rows.iter().flatten().copied().collect();
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::param("matrix", "entries must be finite"));
        }
        Ok(Matrix { d, data })
    }

    pub fn identity(d: usize) -> Self {
        let mut m = Matrix { d, data: vec![0.0; d * d] };
        for i in 0..d {
            m.data[i * d + i] = 1.0;
        }
        m
    }

    fn zeros(d: usize) -> Self {
        Matrix { d, data: vec![0.0; d * d] }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.d + j]
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.d + j] = v;
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.d).map(|r| r.to_vec()).collect()
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        let d = self.d;
        let mut out = Matrix::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..d {
                    out.data[i * d + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        Matrix { d: self.d, data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect() }
    }

    fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|x| *x *= s);
    }

    fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.d);
        for i in 0..self.d {
            for j in 0..self.d {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn frobenius(&self) -> f64 {
        // scaled to avoid overflow in the squares
        let m = self.data.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if m == 0.0 {
            return 0.0;
        }
        m * libm::sqrt(self.data.iter().map(|x| (x / m) * (x / m)).sum::<f64>())
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> Result<f64> {
        let f = self.frobenius();
        if f == 0.0 {
            return Ok(0.0);
        }
        let mut u = self.clone();
        u.scale(1.0 / f);
        Ok(f * libm::sqrt(spectral_radius(&u.transpose().mul(&u))?))
    }

    fn is_integer(&self) -> bool {
        self.data.iter().all(|x| *x == libm::trunc(*x) && x.abs() < 1e15)
    }

    /// Validates 1-based `(k, l)` and returns it 0-based.
    fn index(&self, k: usize, l: usize) -> Result<(usize, usize)> {
        if k == 0 || l == 0 || k > self.d || l > self.d {
            return Err(Error::param("index", alloc::format!("entry ({k}, {l}) outside a {0}x{0} matrix", self.d)));
        }
        Ok((k - 1, l - 1))
    }
}

/// `A^n` as `current * 10^log_scale`, with `current` kept in a safe range.
#[derive(Debug, Clone)]
pub struct MatrixSeqState {
    pub current: Matrix,
    pub log_scale: LogAccumulator,
    pub n: usize,
}

impl MatrixSeqState {
    /// The state for `A^0 = I`.
    pub fn new(a: &Matrix) -> Self {
        MatrixSeqState { current: Matrix::identity(a.d), log_scale: LogAccumulator::new(0.0), n: 0 }
    }

    /// Advances to `A^(n+1)`.
    pub fn step(&mut self, a: &Matrix) -> Result<()> {
        let mut next = self.current.mul(a);
        let norm = next.frobenius();
        if !(norm > 1e-290) {
            return Err(Error::domain(alloc::format!("matrix power collapsed to zero at n = {}", self.n + 1)));
        }
        // rescale by an exact power of two, and only far from the limits,
        // so that small integer powers stay exact
        if !(1e-200..=1e200).contains(&norm) {
            let e = libm::ilogb(norm);
            next.scale(libm::scalbn(1.0, -e));
            self.log_scale.add(e as f64 * core::f64::consts::LOG10_2);
        }
        self.current = next;
        self.n += 1;
        Ok(())
    }

    /// `log10` of the spectral norm of `A^n`.
    pub fn log_norm(&self) -> Result<f64> {
        Ok(self.log_scale.total() + libm::log10(self.current.spectral_norm()?))
    }

    /// Entry `(k, l)` of `A^n`, 0-based.
    pub fn entry(&self, k: usize, l: usize) -> SignedLogValue {
        scaled_entry(self.current.get(k, l), &self.log_scale)
    }
}

fn scaled_entry(c: f64, scale: &LogAccumulator) -> SignedLogValue {
    if c == 0.0 {
        return SignedLogValue::ZERO;
    }
    let mut acc = *scale;
    acc.add(libm::log10(c.abs()));
    acc.value(if c < 0.0 { -1 } else { 1 })
}

/// `[A^n]_{kl}` for `n = 1..=N`.
pub fn matrix_power_entries(a: &Matrix, k: usize, l: usize, n: usize) -> Result<Vec<SignedLogValue>> {
    let (k, l) = a.index(k, l)?;
    let mut st = MatrixSeqState::new(a);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        st.step(a)?;
        out.push(st.entry(k, l));
    }
    Ok(out)
}

/// Growth rate estimate `(L(n) - L(n/2)) / (n/2)` with `L(n) = log10 |A^n|`
/// in the spectral norm. The difference cancels the constant term of
/// `L(n) = n log10 rho + c + o(1)`, so it converges much faster than `L(n)/n`.
pub fn log_norm_slope(a: &Matrix, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::param("n", "need n >= 2"));
    }
    let mut st = MatrixSeqState::new(a);
    let mut half = 0.0;
    for i in 1..=n {
        st.step(a)?;
        if i == n / 2 {
            half = st.log_norm()?;
        }
    }
    Ok((st.log_norm()? - half) / (n - n / 2) as f64)
}

/// Largest `N` accepted by [`matrix_power_entries_exact`].
pub const EXACT_MAX_N: usize = 90;

/// `[A^n]_{kl}` for `n = 1..=N` in exact integer arithmetic, for integer
/// matrices and `N <= 90`. Fails if an entry leaves the `i128` range.
pub fn matrix_power_entries_exact(a: &Matrix, k: usize, l: usize, n: usize) -> Result<Vec<i128>> {
    let (k, l) = a.index(k, l)?;
    if !a.is_integer() {
        return Err(Error::param("matrix", "exact mode needs integer entries"));
    }
    if n > EXACT_MAX_N {
        return Err(Error::param("n", alloc::format!("exact mode supports N <= {EXACT_MAX_N}")));
    }
    let d = a.d;
    let ai: Vec<i128> = a.data.iter().map(|x| *x as i128).collect();
    let mut p = ai.clone();
    let mut out = Vec::with_capacity(n);
    for step in 0..n {
        if step > 0 {
            let mut next = vec![0i128; d * d];
            for i in 0..d {
                for j in 0..d {
                    let mut s: i128 = 0;
                    for m in 0..d {
                        let t = p[i * d + m].checked_mul(ai[m * d + j]);
                        s = t.and_then(|t| s.checked_add(t)).ok_or_else(|| Error::domain(alloc::format!("exact entry overflows i128 at n = {}", step + 1)))?;
                    }
                    next[i * d + j] = s;
                }
            }
            p = next;
        }
        out.push(p[k * d + l]);
    }
    Ok(out)
}

/// Spectral radius by power iteration on a vector, falling back to
/// Gelfand's formula `rho = lim |A^(2^j)|^(2^-j)` evaluated by repeated
/// squaring when the iteration does not settle (complex or opposite-sign
/// dominant eigenvalues).
pub fn spectral_radius(a: &Matrix) -> Result<f64> {
    let d = a.d;
    if a.frobenius() == 0.0 {
        return Ok(0.0);
    }
    // start vector with no special symmetry
    let mut v: Vec<f64> = (0..d).map(|i| 1.0 + 0.1 * i as f64 + 0.013 * (i * i) as f64).collect();
    let mut prev = f64::NAN;
    const ITERS: usize = 20_000;
    for _ in 0..ITERS {
        let mut w = vec![0.0; d];
        for i in 0..d {
            w[i] = (0..d).map(|j| a.get(i, j) * v[j]).sum();
        }
        let nv = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
        let nw = libm::sqrt(w.iter().map(|x| x * x).sum::<f64>());
        if nw == 0.0 {
            break;
        }
        let est = nw / nv;
        v = w.iter().map(|x| x / nw).collect();
        if (est - prev).abs() <= 1e-15 * est {
            return Ok(est);
        }
        prev = est;
    }
    gelfand(a)
}

fn gelfand(a: &Matrix) -> Result<f64> {
    let mut m = a.clone();
    let mut log = 0.0f64;
    let mut weight = 1.0f64;
    for j in 0..64 {
        let norm = m.frobenius();
        if norm == 0.0 {
            return Ok(0.0);
        }
        if !norm.is_finite() {
            return Err(Error::NoConvergence { what: "spectral radius", iterations: j });
        }
        log += weight * libm::log(norm);
        m.scale(1.0 / norm);
        m = m.mul(&m);
        weight *= 0.5;
    }
    // the remaining factor |m|^weight has weight 2^-64
    Ok(libm::exp(log))
}

/// Positive linear recursion `x_n = a_1 x_{n-1} + ... + a_d x_{n-d}`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RecursionSpec {
    pub coeffs: Vec<f64>,
    /// `x_1, ..., x_d`.
    pub seeds: Vec<f64>,
}

impl RecursionSpec {
    pub fn validate(&self) -> Result<()> {
        if self.coeffs.is_empty() || self.coeffs.len() > MAX_DIM {
            return Err(Error::param("coeffs", alloc::format!("order must be 1..={MAX_DIM}")));
        }
        if self.coeffs.len() != self.seeds.len() {
            return Err(Error::param("seeds", "need one seed per coefficient"));
        }
        if self.coeffs.iter().chain(&self.seeds).any(|x| !(*x > 0.0 && x.is_finite())) {
            return Err(Error::param("coeffs", "coefficients and seeds must be positive"));
        }
        Ok(())
    }
}

/// Result of [`linear_recursion`].
#[derive(Debug, Clone, PartialEq)]
pub struct Recursion {
    /// `x_1, ..., x_N` (the seeds first).
    pub seq: Vec<SignedLogValue>,
    /// Dominant root of `z^d = a_1 z^(d-1) + ... + a_d`.
    pub zeta: f64,
}

/// Solution of the recursion, with the state vector renormalized by a
/// power of ten whenever it leaves `[1e-100, 1e100]`.
pub fn linear_recursion(spec: &RecursionSpec, n: usize) -> Result<Recursion> {
    spec.validate()?;
    let d = spec.coeffs.len();
    let mut seq: Vec<SignedLogValue> = spec.seeds.iter().take(n).map(|&x| SignedLogValue::from_f64(x)).collect::<Result<_>>()?;
    // window holds x_{n-d+1..=n}, oldest first, scaled by 10^-scale
    let mut window = spec.seeds.clone();
    let mut scale = LogAccumulator::new(0.0);
    while seq.len() < n {
        let next: f64 = (0..d).map(|i| spec.coeffs[i] * window[d - 1 - i]).sum();
        window.remove(0);
        window.push(next);
        let top = window.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if !(1e-100..=1e100).contains(&top) {
            let e = libm::floor(libm::log10(top));
            let f = libm::pow(10.0, -e);
            window.iter_mut().for_each(|x| *x *= f);
            scale.add(e);
        }
        seq.push(scaled_entry(*window.last().expect("nonempty"), &scale));
    }
    Ok(Recursion { seq, zeta: dominant_root(&spec.coeffs) })
}

/// The positive root of `z^d - a_1 z^(d-1) - ... - a_d` for positive `a`,
/// which is simple and dominates every other root in modulus.
fn dominant_root(a: &[f64]) -> f64 {
    // p(z)/z^d = 1 - sum a_i z^-i is increasing in z > 0
    let f = |z: f64| 1.0 - a.iter().enumerate().map(|(i, c)| c * libm::pow(z, -((i + 1) as f64))).sum::<f64>();
    let mut hi = a.iter().sum::<f64>().max(1.0);
    let mut lo = 0.0f64;
    while f(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Row-stochastic matrix with rows drawn uniformly from the simplex, via
/// normalized exponential variates.
pub fn random_stochastic_matrix(d: usize, rng: &mut Stream) -> Result<Matrix> {
    if !(2..=MAX_DIM).contains(&d) {
        return Err(Error::param("d", alloc::format!("dimension must be 2..={MAX_DIM}")));
    }
    let mut m = Matrix::zeros(d);
    for i in 0..d {
        let e: Vec<f64> = (0..d).map(|_| rng.exponential(1.0)).collect();
        let s: f64 = e.iter().sum();
        let mut acc = 0.0;
        for j in 0..d - 1 {
            let v = e[j] / s;
            m.set(i, j, v);
            acc += v;
        }
        m.set(i, d - 1, (1.0 - acc).max(0.0));
    }
    Ok(m)
}

/// Result of [`markov_sequences`].
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovSequences {
    /// `[P^(n+1) - P^n]_{kl}` for `n = 1..=N`.
    pub diff: Vec<SignedLogValue>,
    /// `[P^n - P*]_{kl}` for `n = 1..=N`.
    pub gap: Vec<SignedLogValue>,
    pub p_star: Matrix,
    /// Second largest eigenvalue modulus.
    pub lambda2: f64,
}

impl MarkovSequences {
    /// Both sequences vanish from some index on (for example when `P = P*`).
    pub fn eventually_zero(&self) -> bool {
        self.diff.last().map_or(true, |v| v.is_zero()) && self.gap.last().map_or(true, |v| v.is_zero())
    }
}

fn check_stochastic(p: &Matrix) -> Result<()> {
    for i in 0..p.d {
        let row = &p.data[i * p.d..(i + 1) * p.d];
        if row.iter().any(|x| *x < 0.0) {
            return Err(Error::param("P", "entries must be nonnegative"));
        }
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::param("P", alloc::format!("row {i} sums to {s}, not 1")));
        }
    }
    Ok(())
}

/// `P` is irreducible and aperiodic iff `P^m > 0` for `m = (d-1)^2 + 1`.
fn is_primitive(p: &Matrix) -> bool {
    let d = p.d;
    let pat: Vec<bool> = p.data.iter().map(|x| *x > 0.0).collect();
    let mut cur = pat.clone();
    for _ in 1..((d - 1) * (d - 1) + 1) {
        let mut next = vec![false; d * d];
        for i in 0..d {
            for k in 0..d {
                if cur[i * d + k] {
                    for j in 0..d {
                        next[i * d + j] |= pat[k * d + j];
                    }
                }
            }
        }
        cur = next;
    }
    cur.iter().all(|b| *b)
}

/// Stationary row vector of a primitive stochastic matrix, from
/// `pi (P - I) = 0`, `sum pi = 1` by Gaussian elimination.
fn stationary(p: &Matrix) -> Result<Vec<f64>> {
    let d = p.d;
    // rows of the system are indexed by equation; unknowns pi_j
    let mut m = vec![vec![0.0; d + 1]; d];
    for (eq, row) in m.iter_mut().enumerate().take(d - 1) {
        for j in 0..d {
            row[j] = p.get(j, eq) - if j == eq { 1.0 } else { 0.0 };
        }
    }
    for j in 0..=d {
        m[d - 1][j] = 1.0;
    }
    for c in 0..d {
        let piv = (c..d).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs())).expect("rows");
        if m[piv][c].abs() < 1e-300 {
            return Err(Error::domain("singular stationary system"));
        }
        m.swap(c, piv);
        for r in 0..d {
            if r != c {
                let f = m[r][c] / m[c][c];
                if f != 0.0 {
                    for j in c..=d {
                        m[r][j] -= f * m[c][j];
                    }
                }
            }
        }
    }
    Ok((0..d).map(|i| m[i][d] / m[i][i]).collect())
}

/// Difference and gap sequences of a Markov chain.
///
/// With `Q = P - P*`, `P^n - P* = Q^n` and `P^(n+1) - P^n = Q^n (Q - I)`
/// for `n >= 1`, so both sequences come from scale-and-accumulate powers
/// of `Q` and never underflow.
pub fn markov_sequences(p: &Matrix, k: usize, l: usize, n: usize) -> Result<MarkovSequences> {
    let (k, l) = p.index(k, l)?;
    check_stochastic(p)?;
    if !is_primitive(p) {
        return Err(Error::domain("P must be irreducible and aperiodic"));
    }
    let pi = stationary(p)?;
    let d = p.d;
    let p_star = Matrix { d, data: (0..d * d).map(|i| pi[i % d]).collect() };
    let q = p.sub(&p_star);
    let r = q.sub(&Matrix::identity(d));
    let lambda2 = spectral_radius(&q)?;
    let mut diff = Vec::with_capacity(n);
    let mut gap = Vec::with_capacity(n);
    let mut st = MatrixSeqState::new(&q);
    let mut zero = q.frobenius() == 0.0;
    for _ in 0..n {
        if !zero && st.step(&q).is_err() {
            zero = true;
        }
        if zero {
            diff.push(SignedLogValue::ZERO);
            gap.push(SignedLogValue::ZERO);
            continue;
        }
        gap.push(st.entry(k, l));
        let c: f64 = (0..d).map(|m| st.current.get(k, m) * r.get(m, l)).sum();
        diff.push(scaled_entry(c, &st.log_scale));
    }
    Ok(MarkovSequences { diff, gap, p_star, lambda2 })
}

/// What can be said about the rationality of `log10 rho(A)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "snake_case"))]
pub enum Rationality {
    Rational,
    Irrational,
    /// Not decidable here; conformance statistics have to speak.
    Empirical,
}

fn is_power_of_ten(mut x: i128) -> bool {
    if x < 1 {
        return false;
    }
    while x % 10 == 0 {
        x /= 10;
    }
    x == 1
}

fn isqrt(x: i128) -> Option<i128> {
    if x < 0 {
        return None;
    }
    let mut r = libm::sqrt(x as f64) as i128;
    while r * r > x {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= x {
        r += 1;
    }
    (r * r == x).then_some(r)
}

/// Decides rationality of `log10 rho(A)` symbolically for integer
/// matrices of size 1 and 2; everything else is [`Rationality::Empirical`].
///
/// For a 2x2 integer matrix the eigenvalues solve `z^2 - t z + det = 0`.
/// If `t^2 - 4 det` is a perfect square the eigenvalues are integers and
/// `log10 rho` is rational iff `rho` is a power of ten. Otherwise, for
/// `t != 0` the two real conjugates differ in modulus, while `rho^q = 10^p`
/// would force them to agree, so `log10 rho` is irrational. For `t = 0` or
/// complex eigenvalues `rho^2 = |det|`, rational iff `|det|` is a power of ten.
pub fn log_spectral_radius_rationality(a: &Matrix) -> Rationality {
    if !a.is_integer() {
        return Rationality::Empirical;
    }
    let v: Vec<i128> = a.data.iter().map(|x| *x as i128).collect();
    match a.d {
        1 => {
            if v[0] == 0 {
                Rationality::Empirical
            } else if is_power_of_ten(v[0].abs()) {
                Rationality::Rational
            } else {
                Rationality::Irrational
            }
        }
        2 => {
            let t = v[0] + v[3];
            let det = v[0] * v[3] - v[1] * v[2];
            let disc = t * t - 4 * det;
            if let Some(s) = isqrt(disc) {
                // integer roots (t +- s) / 2
                let rho = ((t + s) / 2).abs().max(((t - s) / 2).abs());
                return match rho {
                    0 => Rationality::Empirical,
                    r if is_power_of_ten(r) => Rationality::Rational,
                    _ => Rationality::Irrational,
                };
            }
            if disc > 0 && t != 0 {
                return Rationality::Irrational;
            }
            if det == 0 {
                return Rationality::Empirical;
            }
            if is_power_of_ten(det.abs()) {
                Rationality::Rational
            } else {
                Rationality::Irrational
            }
        }
        _ => Rationality::Empirical,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformance::{conformance_report, Thresholds};
    use crate::oracle::{exact_first_digits, ExactSequenceKind};

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn fib() -> Matrix {
        m(&[&[1.0, 1.0], &[1.0, 0.0]])
    }

    fn passes(s: &[SignedLogValue]) -> bool {
        conformance_report(s, &Thresholds::default()).unwrap().passed()
    }

    const PHI: f64 = 1.618_033_988_749_895;

    #[test]
    fn fibonacci_entries() {
        let e = matrix_power_entries(&fib(), 1, 1, 10).unwrap();
        let want = [1.0, 2.0, 3.0, 5.0, 8.0, 13.0, 21.0, 34.0, 55.0, 89.0];
        for (v, w) in e.iter().zip(want) {
            assert!((v.to_f64() - w).abs() < 1e-12 * w);
        }
        for (k, l) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            assert!(passes(&matrix_power_entries(&fib(), k + 1, l + 1, 10_000).unwrap()));
        }
        let ten = m(&[&[10.0, 0.0], &[0.0, 10.0]]);
        let e = matrix_power_entries(&ten, 1, 1, 100).unwrap();
        assert!(e.iter().all(|v| v.first_digit() == 1));
        assert!(!passes(&e));
        assert!(matrix_power_entries(&fib(), 3, 1, 3).is_err());
        assert!(matrix_power_entries(&m(&[&[0.0, 1.0], &[0.0, 0.0]]), 1, 2, 3).is_err());
    }

    #[test]
    fn exact_mode_matches_oracle() {
        let e = matrix_power_entries_exact(&fib(), 1, 1, 90).unwrap();
        // [A^n]_00 = F_{n+1}
        let digits = exact_first_digits(&ExactSequenceKind::Fibonacci, 91).unwrap();
        for (n, v) in e.iter().enumerate() {
            assert_eq!(SignedLogValue::from_i128(*v).first_digit(), digits[n + 1]);
        }
        assert_eq!(e[89], 4_660_046_610_375_530_309);
        let fl = matrix_power_entries(&fib(), 1, 1, 90).unwrap();
        for (a, b) in e.iter().zip(&fl) {
            assert_eq!(SignedLogValue::from_i128(*a).first_digit(), b.first_digit());
        }
        assert!(matrix_power_entries_exact(&fib(), 1, 1, 91).is_err());
        assert!(matrix_power_entries_exact(&m(&[&[0.5]]), 1, 1, 3).is_err());
    }

    #[test]
    fn radii() {
        assert!((spectral_radius(&fib()).unwrap() - PHI).abs() < 1e-14);
        assert!((spectral_radius(&Matrix::identity(3)).unwrap() - 1.0).abs() < 1e-14);
        // symmetric PSD: (3 + sqrt 5) / 2
        let r = spectral_radius(&m(&[&[2.0, 1.0], &[1.0, 1.0]])).unwrap();
        assert!((r - (3.0 + libm::sqrt(5.0)) / 2.0).abs() < 1e-13);
        // rotation-like: eigenvalues +-2i, power iteration cannot settle
        let r = spectral_radius(&m(&[&[0.0, -2.0], &[2.0, 0.0]])).unwrap();
        assert!((r - 2.0).abs() < 1e-12);
        // eigenvalues 3 and -3
        let r = spectral_radius(&m(&[&[0.0, 9.0], &[1.0, 0.0]])).unwrap();
        assert!((r - 3.0).abs() < 1e-12);
    }

    #[test]
    fn growth_slope() {
        let slope = log_norm_slope(&fib(), 10_000).unwrap();
        assert!((slope - libm::log10(spectral_radius(&fib()).unwrap())).abs() < 1e-6);
        let a = m(&[&[2.0, 1.0], &[0.5, 3.0]]);
        let slope = log_norm_slope(&a, 2_000).unwrap();
        assert!((slope - libm::log10(spectral_radius(&a).unwrap())).abs() < 1e-9);
    }

    #[test]
    fn recursions() {
        let f = RecursionSpec { coeffs: vec![1.0, 1.0], seeds: vec![1.0, 1.0] };
        let r = linear_recursion(&f, 10_000).unwrap();
        assert!((r.zeta - PHI).abs() < 1e-15);
        assert!(passes(&r.seq));
        let digits = exact_first_digits(&ExactSequenceKind::Fibonacci, 10_000).unwrap();
        let bad = r.seq.iter().zip(&digits).filter(|(v, d)| v.first_digit() != **d).count();
        assert!(bad <= 5, "{bad}");
        let lucas = RecursionSpec { coeffs: vec![1.0, 1.0], seeds: vec![1.0, 3.0] };
        assert!(passes(&linear_recursion(&lucas, 10_000).unwrap().seq));
        let tens = RecursionSpec { coeffs: vec![10.0], seeds: vec![1.0] };
        let r = linear_recursion(&tens, 1_000).unwrap();
        assert!(!passes(&r.seq));
        assert!((r.zeta - 10.0).abs() < 1e-13);
        assert!(linear_recursion(&RecursionSpec { coeffs: vec![1.0, -1.0], seeds: vec![1.0, 1.0] }, 5).is_err());
    }

    #[test]
    fn stochastic_matrices() {
        let a = random_stochastic_matrix(2, &mut Stream::new(42, 0)).unwrap();
        let b = random_stochastic_matrix(2, &mut Stream::new(42, 0)).unwrap();
        assert_eq!(a, b);
        for d in [2, 3, 7] {
            let p = random_stochastic_matrix(d, &mut Stream::new(1, d as u64)).unwrap();
            for row in p.rows() {
                assert!((row.iter().sum::<f64>() - 1.0).abs() <= 2.0 * f64::EPSILON);
                assert!(row.iter().all(|x| *x > 0.0 && *x < 1.0));
            }
        }
    }

    #[test]
    fn two_state_chain() {
        let (x, y) = (0.3, 0.45);
        let p = m(&[&[1.0 - x, x], &[y, 1.0 - y]]);
        let s = markov_sequences(&p, 1, 2, 200).unwrap();
        for i in 0..2 {
            assert!((s.p_star.get(i, 0) - y / (x + y)).abs() < 1e-15);
            assert!((s.p_star.get(i, 1) - x / (x + y)).abs() < 1e-15);
        }
        assert!((s.lambda2 - (1.0 - x - y)).abs() < 1e-14);
        // P P* = P* P* = P*
        for prod in [p.mul(&s.p_star), s.p_star.mul(&s.p_star)] {
            for (a, b) in prod.data.iter().zip(&s.p_star.data) {
                assert!((a - b).abs() < 1e-12);
            }
        }
        // gap_n = [P^n]_01 - x/(x+y) = -(x/(x+y)) lambda^n
        for n in [1usize, 10, 100, 200] {
            let want = -(x / (x + y)) * libm::pow(1.0 - x - y, n as f64);
            assert!((s.gap[n - 1].to_f64() / want - 1.0).abs() < 1e-10, "{n}");
        }
        // fitted decay slope
        let slope = (s.gap[149].log_mag() - s.gap[99].log_mag()) / 50.0;
        assert!((slope - libm::log10(s.lambda2)).abs() < 1e-8);
        let direct = p.mul(&p).sub(&p).get(0, 1);
        assert!((s.diff[0].to_f64() - direct).abs() < 1e-15);
    }

    #[test]
    fn degenerate_chains() {
        let p = m(&[&[0.25, 0.75], &[0.25, 0.75]]);
        let s = markov_sequences(&p, 1, 1, 50).unwrap();
        assert!(s.eventually_zero());
        assert!(s.gap.iter().chain(&s.diff).all(|v| v.is_zero()));
        let periodic = m(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert!(markov_sequences(&periodic, 1, 1, 5).is_err());
        let reducible = m(&[&[1.0, 0.0], &[0.5, 0.5]]);
        assert!(markov_sequences(&reducible, 1, 1, 5).is_err());
    }

    #[test]
    fn random_chain_is_benford() {
        let p = random_stochastic_matrix(2, &mut Stream::new(7, 0)).unwrap();
        let s = markov_sequences(&p, 1, 1, 10_000).unwrap();
        assert!(passes(&s.diff));
        assert!(passes(&s.gap));
    }

    #[test]
    fn rationality_whitelist() {
        use Rationality::*;
        assert_eq!(log_spectral_radius_rationality(&fib()), Irrational);
        assert_eq!(log_spectral_radius_rationality(&m(&[&[10.0, 0.0], &[0.0, 10.0]])), Rational);
        assert_eq!(log_spectral_radius_rationality(&m(&[&[0.0, 10.0], &[1.0, 0.0]])), Rational);
        assert_eq!(log_spectral_radius_rationality(&m(&[&[0.0, -10.0], &[10.0, 0.0]])), Rational);
        assert_eq!(log_spectral_radius_rationality(&m(&[&[2.0, 0.0], &[0.0, 3.0]])), Irrational);
        assert_eq!(log_spectral_radius_rationality(&m(&[&[0.5, 0.0], &[0.0, 3.0]])), Empirical);
        assert_eq!(log_spectral_radius_rationality(&Matrix::identity(3)), Empirical);
    }
}
