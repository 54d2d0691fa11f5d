//! 0-1 and nonnegative matrices.
//!
//! [`BinaryMatrix`] carries symbol adjacency matrices and tree shapes.
//! [`LogNonnegMatrix`] stores nonnegative matrices by the logs of their
//! entries, with an optional exact big-integer copy, so that transfer matrices
//! whose entries are astronomically large pattern counts can still be
//! multiplied and have their Perron data extracted.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logspace::{ln_big, LOG_ZERO};

/// Relative tolerance for eigenvalue convergence.
pub const EIGEN_TOL: f64 = 1e-12;
/// Iteration cap for power iteration.
pub const MAX_POWER_ITERATIONS: usize = 100_000;
/// Tolerance for entrywise inequality checks.
pub const INEQUALITY_TOL: f64 = 1e-9;

/// A square matrix with entries in {0, 1}.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<i64>>", into = "Vec<Vec<u8>>")]
pub struct BinaryMatrix {
    dim: usize,
    bits: Vec<bool>,
}

impl BinaryMatrix {
    pub fn new<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::EmptyMatrix);
        }
        let mut bits = Vec::with_capacity(dim * dim);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::NotSquare { row: i, len: row.len(), dim });
            }
            for (j, &v) in row.iter().enumerate() {
                match v {
                    0 => bits.push(false),
                    1 => bits.push(true),
                    _ => return Err(Error::NotBinary { row: i, col: j, value: v as f64 }),
                }
            }
        }
        Ok(Self { dim, bits })
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        let bits = (0..dim * dim).map(|x| f(x / dim, x % dim)).collect();
        Self { dim, bits }
    }

    /// The all-ones matrix `E_d`.
    pub fn full(dim: usize) -> Self {
        Self::from_fn(dim, |_, _| true)
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| i == j)
    }

    /// The golden-mean matrix `[[1,1],[1,0]]`.
    pub fn golden() -> Self {
        Self::from_fn(2, |i, j| !(i == 1 && j == 1))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.dim + j]
    }

    /// Column indices of the ones in row `i`.
    pub fn row_ones(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.dim).filter(move |&j| self.get(i, j))
    }

    pub fn is_full_row(&self, i: usize) -> bool {
        (0..self.dim).all(|j| self.get(i, j))
    }

    pub fn is_zero_row(&self, i: usize) -> bool {
        (0..self.dim).all(|j| !self.get(i, j))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i))
    }

    /// Boolean matrix product.
    pub fn bool_mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self::from_fn(self.dim, |i, j| (0..self.dim).any(|l| self.get(i, l) && other.get(l, j)))
    }

    pub fn is_positive(&self) -> bool {
        self.bits.iter().all(|&b| b)
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) as u8).collect())
            .collect()
    }

    /// Relabels indices: entry `(i, j)` of the result is entry
    /// `(order[i], order[j])` of `self`.
    pub fn reorder(&self, order: &[usize]) -> Self {
        assert_eq!(order.len(), self.dim);
        Self::from_fn(self.dim, |i, j| self.get(order[i], order[j]))
    }
}

impl fmt::Debug for BinaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.to_rows())
    }
}

impl TryFrom<Vec<Vec<i64>>> for BinaryMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<i64>>) -> Result<Self> {
        let mut out = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            let mut r = Vec::with_capacity(row.len());
            for (j, &v) in row.iter().enumerate() {
                if v != 0 && v != 1 {
                    return Err(Error::NotBinary { row: i, col: j, value: v as f64 });
                }
                r.push(v as u8);
            }
            out.push(r);
        }
        Self::new(&out)
    }
}

impl From<BinaryMatrix> for Vec<Vec<u8>> {
    fn from(m: BinaryMatrix) -> Self {
        m.to_rows()
    }
}

/// Outcome of a primitivity test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Primitivity {
    pub primitive: bool,
    /// Smallest `e` with `m^e > 0`, when one exists within the Wielandt bound.
    pub exponent: Option<usize>,
}

/// Tests primitivity by boolean powering up to the Wielandt bound `(d-1)^2 + 1`.
pub fn is_primitive(m: &BinaryMatrix) -> Primitivity {
    let bound = (m.dim() - 1) * (m.dim() - 1) + 1;
    let mut power = m.clone();
    for e in 1..=bound {
        if power.is_positive() {
            return Primitivity { primitive: true, exponent: Some(e) };
        }
        power = power.bool_mul(m);
    }
    Primitivity { primitive: false, exponent: None }
}

/// A nonnegative square matrix stored by the logs of its entries.
///
/// `LOG_ZERO` (negative infinity) marks a zero entry. When every entry is a
/// known integer the exact values ride along and are propagated through
/// [`hadamard`] and [`product`].
#[derive(Clone, PartialEq)]
pub struct LogNonnegMatrix {
    dim: usize,
    log: Vec<f64>,
    exact: Option<Vec<BigUint>>,
}

impl LogNonnegMatrix {
    pub fn from_exact(dim: usize, entries: Vec<BigUint>) -> Self {
        assert!(dim >= 1 && entries.len() == dim * dim);
        let log = entries.iter().map(ln_big).collect();
        Self { dim, log, exact: Some(entries) }
    }

    pub fn from_exact_rows<R: AsRef<[u64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::EmptyMatrix);
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::NotSquare { row: i, len: row.len(), dim });
            }
            entries.extend(row.iter().map(|&v| BigUint::from(v)));
        }
        Ok(Self::from_exact(dim, entries))
    }

    pub fn from_binary(m: &BinaryMatrix) -> Self {
        let d = m.dim();
        let entries = (0..d * d)
            .map(|x| if m.get(x / d, x % d) { BigUint::one() } else { BigUint::zero() })
            .collect();
        Self::from_exact(d, entries)
    }

    /// Builds a log-mode matrix from log entries; rejects NaN and `+inf`.
    pub fn from_log(dim: usize, log: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyMatrix);
        }
        if log.len() != dim * dim {
            return Err(Error::NotSquare { row: 0, len: log.len(), dim });
        }
        for (x, &v) in log.iter().enumerate() {
            if v.is_nan() || v == f64::INFINITY {
                return Err(Error::InvalidEntry { row: x / dim, col: x % dim, value: v });
            }
        }
        Ok(Self { dim, log, exact: None })
    }

    /// Builds a log-mode matrix from ordinary nonnegative values.
    pub fn from_linear<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::EmptyMatrix);
        }
        let mut log = Vec::with_capacity(dim * dim);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::NotSquare { row: i, len: row.len(), dim });
            }
            for (j, &v) in row.iter().enumerate() {
                if !(v >= 0.0) || v.is_infinite() {
                    return Err(Error::InvalidEntry { row: i, col: j, value: v });
                }
                log.push(v.ln());
            }
        }
        Ok(Self { dim, log, exact: None })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    #[inline]
    pub fn log_entry(&self, i: usize, j: usize) -> f64 {
        self.log[i * self.dim + j]
    }

    pub fn log_entries(&self) -> &[f64] {
        &self.log
    }

    pub fn exact_entry(&self, i: usize, j: usize) -> Option<&BigUint> {
        self.exact.as_ref().map(|e| &e[i * self.dim + j])
    }

    pub fn exact_entries(&self) -> Option<&[BigUint]> {
        self.exact.as_deref()
    }

    /// Drops the exact copy, keeping log entries.
    pub fn into_log_mode(mut self) -> Self {
        self.exact = None;
        self
    }

    /// Largest log entry (`LOG_ZERO` for the zero matrix).
    pub fn max_log(&self) -> f64 {
        self.log.iter().copied().fold(LOG_ZERO, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.max_log() == LOG_ZERO
    }

    /// Zero pattern as a 0-1 matrix.
    pub fn support(&self) -> BinaryMatrix {
        BinaryMatrix::from_fn(self.dim, |i, j| self.log_entry(i, j) != LOG_ZERO)
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim;
        let idx = |x: usize| (x % d) * d + x / d;
        Self {
            dim: d,
            log: (0..d * d).map(|x| self.log[idx(x)]).collect(),
            exact: self.exact.as_ref().map(|e| (0..d * d).map(|x| e[idx(x)].clone()).collect()),
        }
    }

    /// Multiplies every entry by `exp(s)`. The exact copy is dropped.
    pub fn scale_log(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            log: self.log.iter().map(|&v| if v == LOG_ZERO { v } else { v + s }).collect(),
            exact: None,
        }
    }

    /// Entries divided by `exp(max_log)`, in the linear domain. Returns the
    /// scale alongside. Entries far below the maximum may underflow to zero.
    pub fn to_scaled_linear(&self) -> (Vec<f64>, f64) {
        let scale = self.max_log();
        if scale == LOG_ZERO {
            return (vec![0.0; self.dim * self.dim], 0.0);
        }
        (self.log.iter().map(|&v| (v - scale).exp()).collect(), scale)
    }

    /// Entries as ordinary floats (may overflow to infinity).
    pub fn to_linear_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| match self.exact_entry(i, j) {
                        Some(v) => v.to_f64().unwrap_or(f64::INFINITY),
                        None => self.log_entry(i, j).exp(),
                    })
                    .collect()
            })
            .collect()
    }

    pub fn spectral_radius(&self) -> Result<PerronData> {
        spectral_radius(self)
    }
}

impl fmt::Debug for LogNonnegMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.exact {
            Some(e) => {
                let rows: Vec<Vec<String>> = (0..self.dim)
                    .map(|i| (0..self.dim).map(|j| e[i * self.dim + j].to_string()).collect())
                    .collect();
                write!(f, "Exact{rows:?}")
            }
            None => {
                let rows: Vec<&[f64]> = self.log.chunks(self.dim).collect();
                write!(f, "Log{rows:?}")
            }
        }
    }
}

impl Serialize for LogNonnegMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_linear_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for LogNonnegMatrix {
    /// Integral inputs below 2^53 load in exact mode; anything else in log mode.
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        let integral = rows
            .iter()
            .flatten()
            .all(|&v| v >= 0.0 && v.fract() == 0.0 && v < 9.007_199_254_740_992e15);
        let out = if integral {
            let ints: Vec<Vec<u64>> =
                rows.iter().map(|r| r.iter().map(|&v| v as u64).collect()).collect();
            Self::from_exact_rows(&ints)
        } else {
            Self::from_linear(&rows)
        };
        out.map_err(serde::de::Error::custom)
    }
}

/// Entrywise product. Exact when both inputs are exact.
pub fn hadamard(x: &LogNonnegMatrix, y: &LogNonnegMatrix) -> Result<LogNonnegMatrix> {
    if x.dim != y.dim {
        return Err(Error::DimensionMismatch { left: x.dim, right: y.dim });
    }
    if let (Some(ex), Some(ey)) = (&x.exact, &y.exact) {
        let entries = ex.iter().zip(ey).map(|(a, b)| a * b).collect();
        return Ok(LogNonnegMatrix::from_exact(x.dim, entries));
    }
    let log = x
        .log
        .iter()
        .zip(&y.log)
        .map(|(&a, &b)| crate::logspace::log_mul(a, b))
        .collect();
    Ok(LogNonnegMatrix { dim: x.dim, log, exact: None })
}

fn mat_mul_f64(a: &[f64], b: &[f64], d: usize) -> Vec<f64> {
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for l in 0..d {
            let ail = a[i * d + l];
            if ail == 0.0 {
                continue;
            }
            for j in 0..d {
                out[i * d + j] += ail * b[l * d + j];
            }
        }
    }
    out
}

fn mat_mul_big(a: &[BigUint], b: &[BigUint], d: usize) -> Vec<BigUint> {
    let mut out = vec![BigUint::zero(); d * d];
    for i in 0..d {
        for l in 0..d {
            let ail = &a[i * d + l];
            if ail.is_zero() {
                continue;
            }
            for j in 0..d {
                out[i * d + j] += ail * &b[l * d + j];
            }
        }
    }
    out
}

/// Ordered product `ms[0] * ms[1] * ... `.
///
/// Exact when every factor is exact. Otherwise each factor is divided by its
/// largest entry before the linear-domain multiply and the scales are summed
/// in log space, so no intermediate overflows.
pub fn product(ms: &[LogNonnegMatrix]) -> Result<LogNonnegMatrix> {
    let first = ms.first().ok_or(Error::EmptyProduct)?;
    let d = first.dim;
    if let Some(m) = ms.iter().find(|m| m.dim != d) {
        return Err(Error::DimensionMismatch { left: d, right: m.dim });
    }
    if ms.iter().all(|m| m.exact.is_some()) {
        let mut acc = first.exact.clone().unwrap();
        for m in &ms[1..] {
            acc = mat_mul_big(&acc, m.exact.as_ref().unwrap(), d);
        }
        return Ok(LogNonnegMatrix::from_exact(d, acc));
    }
    let (mut acc, mut log_scale) = first.to_scaled_linear();
    for m in &ms[1..] {
        let (lin, s) = m.to_scaled_linear();
        acc = mat_mul_f64(&acc, &lin, d);
        log_scale += s;
        let mx = acc.iter().copied().fold(0.0, f64::max);
        if mx == 0.0 {
            return Ok(LogNonnegMatrix { dim: d, log: vec![LOG_ZERO; d * d], exact: None });
        }
        acc.iter_mut().for_each(|v| *v /= mx);
        log_scale += mx.ln();
    }
    let log = acc
        .iter()
        .map(|&v| if v > 0.0 { v.ln() + log_scale } else { LOG_ZERO })
        .collect();
    Ok(LogNonnegMatrix { dim: d, log, exact: None })
}

/// Perron eigenvalue and eigenvectors of a nonnegative matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerronData {
    /// `log(rho)`.
    pub rho_log: f64,
    /// Right eigenvector, scaled to max entry 1.
    pub right_vec: Vec<f64>,
    /// Left eigenvector, scaled so that `left . right = 1`.
    pub left_vec: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

struct PowerResult {
    rho: f64,
    vec: Vec<f64>,
    iterations: usize,
    converged: bool,
}

fn mat_vec(x: &[f64], v: &[f64], d: usize) -> Vec<f64> {
    (0..d).map(|i| (0..d).map(|j| x[i * d + j] * v[j]).sum()).collect()
}

/// Collatz-Wielandt bounds `min/max (Xv)_i / v_i` over the support of `v`.
fn cw_bounds(v: &[f64], w: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for (&vi, &wi) in v.iter().zip(w) {
        if vi > 0.0 {
            let r = wi / vi;
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    (lo, hi)
}

fn normalize_max(v: &mut [f64]) -> f64 {
    let mx = v.iter().copied().fold(0.0, f64::max);
    if mx > 0.0 {
        v.iter_mut().for_each(|x| *x /= mx);
    }
    mx
}

/// Averaged-iterate estimate for period-2 oscillation: with `w = Xv` and
/// `z = X^2 v`, `r = sqrt(z/v)`, the vector `v + w/r` is an eigenvector when
/// the iterates alternate between two directions.
fn cesaro_candidate(x: &[f64], v: &[f64], d: usize) -> Option<(f64, Vec<f64>, bool)> {
    let w = mat_vec(x, v, d);
    let z = mat_vec(x, &w, d);
    let (lo2, hi2) = cw_bounds(v, &z);
    if hi2 <= 0.0 || !lo2.is_finite() {
        return None;
    }
    let r = (0.5 * (lo2 + hi2)).sqrt();
    let mut a: Vec<f64> = v.iter().zip(&w).map(|(&vi, &wi)| vi + wi / r).collect();
    normalize_max(&mut a);
    let xa = mat_vec(x, &a, d);
    let (lo, hi) = cw_bounds(&a, &xa);
    let ok = hi > 0.0 && (hi - lo) <= EIGEN_TOL * hi;
    Some((0.5 * (lo + hi), a, ok))
}

fn power_iterate(x: &[f64], d: usize) -> Result<PowerResult> {
    let mut v = vec![1.0; d];
    let mut est = 0.0;
    for it in 1..=MAX_POWER_ITERATIONS {
        let mut w = mat_vec(x, &v, d);
        let (lo, hi) = cw_bounds(&v, &w);
        if hi == 0.0 {
            return Err(Error::ZeroSpectralRadius);
        }
        est = 0.5 * (lo + hi);
        if (hi - lo) <= EIGEN_TOL * hi {
            // lo is attained on the support; take the bracket midpoint
            return Ok(PowerResult { rho: est, vec: v, iterations: it, converged: true });
        }
        normalize_max(&mut w);
        v = w;
        if it >= 1000 && it % 64 == 0 {
            if let Some((rho, a, true)) = cesaro_candidate(x, &v, d) {
                return Ok(PowerResult { rho, vec: a, iterations: it, converged: true });
            }
        }
    }
    if let Some((rho, a, ok)) = cesaro_candidate(x, &v, d) {
        return Ok(PowerResult { rho, vec: a, iterations: MAX_POWER_ITERATIONS, converged: ok });
    }
    Ok(PowerResult { rho: est, vec: v, iterations: MAX_POWER_ITERATIONS, converged: false })
}

/// Spectral radius and Perron vectors by power iteration on the max-scaled
/// matrix, starting from the all-ones vector.
///
/// Irreducible but imprimitive inputs may oscillate; an averaged iterate is
/// tried and `converged` reports whether the Collatz-Wielandt bracket closed.
pub fn spectral_radius(m: &LogNonnegMatrix) -> Result<PerronData> {
    let d = m.dim;
    if m.is_zero() {
        return Err(Error::ZeroSpectralRadius);
    }
    let (x, scale) = m.to_scaled_linear();
    let right = power_iterate(&x, d)?;
    let xt: Vec<f64> = (0..d * d).map(|k| x[(k % d) * d + k / d]).collect();
    let left = power_iterate(&xt, d)?;
    let mut right_vec = right.vec;
    normalize_max(&mut right_vec);
    let dot: f64 = left.vec.iter().zip(&right_vec).map(|(a, b)| a * b).sum();
    let left_vec = if dot > 0.0 {
        left.vec.iter().map(|v| v / dot).collect()
    } else {
        left.vec
    };
    Ok(PerronData {
        rho_log: right.rho.ln() + scale,
        right_vec,
        left_vec,
        iterations: right.iterations.max(left.iterations),
        converged: right.converged && left.converged && dot > 0.0,
    })
}

/// Result of the entrywise comparison `v w^T <= m^n / rho^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SandwichReport {
    pub holds: bool,
    /// Largest positive value of `(v w^T)_{ij} - (m^n / rho^n)_{ij}` (0 if none).
    pub max_violation: f64,
}

/// Compares the Perron projector `v w^T` against the normalized power
/// `m^n / rho^n` entrywise, at tolerance [`INEQUALITY_TOL`].
pub fn perron_sandwich_check(m: &LogNonnegMatrix, n: usize) -> Result<SandwichReport> {
    if n == 0 {
        return Err(Error::Precondition("n must be at least 1".into()));
    }
    if !is_primitive(&m.support()).primitive {
        return Err(Error::NotPrimitive);
    }
    let d = m.dim;
    let perron = spectral_radius(m)?;
    let (x, scale) = m.to_scaled_linear();
    let rho_scaled = (perron.rho_log - scale).exp();
    let base: Vec<f64> = x.iter().map(|v| v / rho_scaled).collect();
    let mut power = base.clone();
    for _ in 1..n {
        power = mat_mul_f64(&power, &base, d);
    }
    let mut max_violation = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            let proj = perron.right_vec[i] * perron.left_vec[j];
            max_violation = max_violation.max(proj - power[i * d + j]);
        }
    }
    Ok(SandwichReport { holds: max_violation <= INEQUALITY_TOL, max_violation })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g() -> LogNonnegMatrix {
        LogNonnegMatrix::from_binary(&BinaryMatrix::golden())
    }

    fn exact_rows(m: &LogNonnegMatrix) -> Vec<Vec<u64>> {
        let d = m.dim();
        (0..d)
            .map(|i| (0..d).map(|j| m.exact_entry(i, j).unwrap().to_u64().unwrap()).collect())
            .collect()
    }

    #[test]
    fn binary_matrix_rejects_bad_input() {
        assert_eq!(BinaryMatrix::new::<Vec<u8>>(&[]), Err(Error::EmptyMatrix));
        assert!(matches!(BinaryMatrix::new(&[vec![1, 2], vec![0, 1]]), Err(Error::NotBinary { .. })));
        assert!(matches!(BinaryMatrix::new(&[vec![1, 1], vec![0]]), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn binary_matrix_json_round_trip() {
        let m: BinaryMatrix = serde_json::from_str("[[1,1],[1,0]]").unwrap();
        assert_eq!(m, BinaryMatrix::golden());
        assert_eq!(serde_json::to_string(&m).unwrap(), "[[1,1],[1,0]]");
        assert!(serde_json::from_str::<BinaryMatrix>("[[1,3],[1,0]]").is_err());
    }

    #[test]
    fn hadamard_examples() {
        let gg = hadamard(&g(), &g()).unwrap();
        assert_eq!(exact_rows(&gg), vec![vec![1, 1], vec![1, 0]]);

        let x = LogNonnegMatrix::from_exact_rows(&[vec![2, 3], vec![4, 5]]).unwrap();
        let e2 = LogNonnegMatrix::from_binary(&BinaryMatrix::full(2));
        assert_eq!(exact_rows(&hadamard(&e2, &x).unwrap()), vec![vec![2, 3], vec![4, 5]]);

        let gt = g().transpose();
        assert_eq!(exact_rows(&hadamard(&gt, &x).unwrap()), vec![vec![2, 3], vec![4, 0]]);

        let three = LogNonnegMatrix::from_binary(&BinaryMatrix::full(3));
        assert!(matches!(hadamard(&g(), &three), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn hadamard_log_mode_absorbs_zero() {
        let x = LogNonnegMatrix::from_linear(&[vec![2.0, 3.0], vec![4.0, 5.0]]).unwrap();
        let h = hadamard(&g(), &x).unwrap();
        assert!(!h.is_exact());
        assert_eq!(h.log_entry(1, 1), LOG_ZERO);
        assert!((h.log_entry(1, 0) - 4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn primitivity_examples() {
        assert_eq!(
            is_primitive(&BinaryMatrix::golden()),
            Primitivity { primitive: true, exponent: Some(2) }
        );
        assert!(!is_primitive(&BinaryMatrix::identity(2)).primitive);
        let swap = BinaryMatrix::new(&[vec![0, 1], vec![1, 0]]).unwrap();
        assert!(!is_primitive(&swap).primitive);
        assert_eq!(is_primitive(&BinaryMatrix::new(&[vec![1]]).unwrap()).exponent, Some(1));
        assert_eq!(is_primitive(&BinaryMatrix::new(&[vec![0]]).unwrap()).primitive, false);
    }

    #[test]
    fn primitivity_exhaustive_dim_le_3() {
        // Definition check by direct boolean powering, independent of the early exit.
        for d in 1..=3usize {
            for mask in 0u32..(1 << (d * d)) {
                let m = BinaryMatrix::from_fn(d, |i, j| mask >> (i * d + j) & 1 == 1);
                let bound = (d - 1) * (d - 1) + 1;
                let mut p = m.clone();
                let mut powers = vec![p.clone()];
                for _ in 1..bound {
                    p = p.bool_mul(&m);
                    powers.push(p.clone());
                }
                let expected = powers.iter().position(|q| q.is_positive()).map(|e| e + 1);
                let got = is_primitive(&m);
                assert_eq!(got.exponent, expected, "{m:?}");
                assert_eq!(got.primitive, expected.is_some());
            }
        }
    }

    #[test]
    fn spectral_radius_golden() {
        // Largest root of x^2 - x - 1.
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let p = g().spectral_radius().unwrap();
        assert!(p.converged);
        assert!((p.rho_log - phi.ln()).abs() < 1e-12);
        assert!((p.rho_log - 0.481_211_825_059_603_4).abs() < 1e-12);
        // phi^2 - phi - 1 = 0 at the returned value
        let r = p.rho_log.exp();
        assert!((r * r - r - 1.0).abs() < 1e-11);
        let dot: f64 = p.left_vec.iter().zip(&p.right_vec).map(|(a, b)| a * b).sum();
        assert!((dot - 1.0).abs() < 1e-12);
        assert!(p.right_vec.iter().chain(&p.left_vec).all(|&v| v > 0.0));
    }

    #[test]
    fn spectral_radius_full_and_scalar() {
        for k in 1..=6 {
            let p = LogNonnegMatrix::from_binary(&BinaryMatrix::full(k)).spectral_radius().unwrap();
            assert!((p.rho_log - (k as f64).ln()).abs() < 1e-12);
        }
        let five = LogNonnegMatrix::from_exact_rows(&[vec![5]]).unwrap();
        assert!((five.spectral_radius().unwrap().rho_log - 5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn spectral_radius_zero_and_nilpotent() {
        let z = LogNonnegMatrix::from_exact_rows(&[vec![0, 0], vec![0, 0]]).unwrap();
        assert_eq!(z.spectral_radius(), Err(Error::ZeroSpectralRadius));
        let nil = LogNonnegMatrix::from_exact_rows(&[vec![0, 1], vec![0, 0]]).unwrap();
        assert_eq!(nil.spectral_radius(), Err(Error::ZeroSpectralRadius));
    }

    #[test]
    fn spectral_radius_imprimitive_irreducible() {
        // Period 2, rho = sqrt(2): the averaged iterate recovers it.
        let m = LogNonnegMatrix::from_exact_rows(&[vec![0, 2], vec![1, 0]]).unwrap();
        let p = m.spectral_radius().unwrap();
        assert!(p.converged);
        assert!((p.rho_log - 0.5 * 2f64.ln()).abs() < 1e-12);

        // Period 3 cycle with unequal weights: honest non-convergence allowed,
        // but the estimate must stay within the Collatz-Wielandt bracket.
        let c = LogNonnegMatrix::from_exact_rows(&[vec![0, 1, 0], vec![0, 0, 4], vec![2, 0, 0]])
            .unwrap();
        let p = c.spectral_radius().unwrap();
        if p.converged {
            assert!((p.rho_log - 8f64.ln() / 3.0).abs() < 1e-10);
        }
    }

    #[test]
    fn spectral_radius_of_huge_log_entries() {
        let m = g().scale_log(5000.0);
        let p = m.spectral_radius().unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((p.rho_log - 5000.0 - phi.ln()).abs() < 1e-10);
    }

    #[test]
    fn product_examples() {
        assert_eq!(exact_rows(&product(&[g()]).unwrap()), vec![vec![1, 1], vec![1, 0]]);
        assert_eq!(exact_rows(&product(&[g(), g()]).unwrap()), vec![vec![2, 1], vec![1, 1]]);
        assert_eq!(product(&[]), Err(Error::EmptyProduct));
        let three = LogNonnegMatrix::from_binary(&BinaryMatrix::full(3));
        assert!(matches!(product(&[g(), three]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn product_log_mode_matches_exact() {
        let ms: Vec<LogNonnegMatrix> = (0..40).map(|_| g()).collect();
        let exact = product(&ms).unwrap();
        let logs: Vec<LogNonnegMatrix> = ms.into_iter().map(|m| m.into_log_mode()).collect();
        let approx = product(&logs).unwrap();
        assert!(!approx.is_exact());
        for (a, b) in exact.log_entries().iter().zip(approx.log_entries()) {
            assert!(crate::logspace::log_close(*a, *b, 1e-12));
        }
        // G^40 entries are Fibonacci numbers F_41, F_40, F_39
        assert_eq!(exact_rows(&exact), vec![vec![165580141, 102334155], vec![102334155, 63245986]]);
    }

    #[test]
    fn product_log_mode_no_overflow() {
        let big = g().scale_log(800.0);
        let p = product(&[big.clone(), big.clone(), big]).unwrap();
        // G^3 = [[3,2],[2,1]], times e^2400
        assert!((p.log_entry(0, 0) - (2400.0 + 3f64.ln())).abs() < 1e-9);
        assert!((p.log_entry(1, 1) - 2400.0).abs() < 1e-9);
    }

    #[test]
    fn sandwich_full_matrix_holds_with_equality() {
        let e2 = LogNonnegMatrix::from_binary(&BinaryMatrix::full(2));
        let r = perron_sandwich_check(&e2, 1).unwrap();
        assert!(r.holds);
        assert!(r.max_violation.abs() < 1e-12);
    }

    #[test]
    fn sandwich_rejects_imprimitive_support() {
        let swap = LogNonnegMatrix::from_binary(&BinaryMatrix::new(&[vec![0, 1], vec![1, 0]]).unwrap());
        assert_eq!(perron_sandwich_check(&swap, 2), Err(Error::NotPrimitive));
    }

    #[test]
    fn sandwich_golden_violation_matches_binet() {
        // Binet: the off-diagonal entry of (G/phi)^n is F_n/phi^n =
        // 1/sqrt5 - psi^n/(sqrt5 phi^n). For even n that sits below the
        // projector entry 1/sqrt5 by (|psi|/phi)^n / sqrt5.
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let ratio = (phi - 1.0) / phi;
        for n in [10usize, 20] {
            let r = perron_sandwich_check(&g(), n).unwrap();
            let expected = ratio.powi(n as i32) / 5f64.sqrt();
            // rho carries relative error ~EIGEN_TOL, amplified n-fold by the power
            assert!((r.max_violation - expected).abs() < 1e-10, "n={n}: {r:?} vs {expected}");
            assert_eq!(r.holds, expected <= INEQUALITY_TOL);
        }
        // At n = 1 the zero entry of G makes the inequality fail outright.
        let r1 = perron_sandwich_check(&g(), 1).unwrap();
        assert!(!r1.holds);
        assert!((r1.max_violation - 1.0 / (phi * phi + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn log_nonneg_json() {
        let m: LogNonnegMatrix = serde_json::from_str("[[2,3],[4,0]]").unwrap();
        assert!(m.is_exact());
        assert_eq!(m.log_entry(1, 1), LOG_ZERO);
        let f: LogNonnegMatrix = serde_json::from_str("[[0.5,3],[4,0]]").unwrap();
        assert!(!f.is_exact());
        assert_eq!(serde_json::to_string(&m).unwrap(), "[[2.0,3.0],[4.0,0.0]]");
        assert!(serde_json::from_str::<LogNonnegMatrix>("[[-1,3],[4,0]]").is_err());
    }

    #[test]
    fn from_log_rejects_nan() {
        assert!(LogNonnegMatrix::from_log(1, vec![f64::NAN]).is_err());
        assert!(LogNonnegMatrix::from_log(1, vec![LOG_ZERO]).is_ok());
    }
}
