//! Transfer matrices along a ray and strip entropies.
//!
//! Let `alpha_m(i)` count labelings of the first `m + 1` strip pieces with
//! the path node `p_m` labeled `i`. Moving one step along the ray adds the
//! path node `p_{m+1}` and its off-path branches, so
//!
//! ```text
//! alpha_{m+1}(s) = P(s) * sum_i a(i,s) alpha_m(i),   P(s) = prod_{t off} sum_l a(s,l) gamma_{n-1}(t,l)
//! ```
//!
//! i.e. `alpha_{m+1} = R_{m+1} alpha_m` with `R(s,i) = a(i,s) P(s)`. Over one
//! period of an eventually periodic ray the steps compose to a matrix `D`,
//! and the strip entropy is `log rho(D)` divided by the number of sites one
//! period adds.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::counting::{CountVector, Counter, EXACT_BIT_BUDGET};
use crate::error::{Error, Result};
use crate::logspace::{log_mul, log_sum, LOG_ZERO};
use crate::matrices::{is_primitive, product, spectral_radius, BinaryMatrix, LogNonnegMatrix, Primitivity};
use crate::ray::{lambda_from_table, step_profile, strip_size, Ray, StripProfile};

/// One step matrix `R` and the piece it adds.
#[derive(Debug, Clone)]
pub struct TransferStep {
    pub r: LogNonnegMatrix,
    pub profile: StripProfile,
    pub n: usize,
}

/// `R(s,i) = a(i,s) * weights(s)`.
pub fn step_from_weights(a: &BinaryMatrix, weights: &CountVector) -> LogNonnegMatrix {
    let k = a.dim();
    match weights {
        CountVector::Exact(w) => {
            let entries = (0..k * k)
                .map(|x| {
                    let (s, i) = (x / k, x % k);
                    if a.get(i, s) {
                        w[s].clone()
                    } else {
                        BigUint::zero()
                    }
                })
                .collect();
            LogNonnegMatrix::from_exact(k, entries)
        }
        CountVector::Log(w) => {
            let log = (0..k * k)
                .map(|x| {
                    let (s, i) = (x / k, x % k);
                    if a.get(i, s) {
                        w[s]
                    } else {
                        LOG_ZERO
                    }
                })
                .collect();
            LogNonnegMatrix::from_log(k, log).expect("weights are finite or zero")
        }
    }
}

fn check_width(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::Precondition("strip width n must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// The step matrix `R_j` taking `alpha_{j-1}` to `alpha_j`.
pub fn step_matrix(counter: &mut Counter, ray: &Ray, j: usize, n: usize) -> Result<TransferStep> {
    check_width(n)?;
    if j == 0 {
        return Err(Error::Precondition("step index j must be at least 1".into()));
    }
    let profile = step_profile(counter.tree(), ray, j);
    let weights = counter.branch_product(&profile.off_branches, n - 1);
    let r = step_from_weights(counter.a(), &weights);
    Ok(TransferStep { r, profile, n })
}

/// `alpha_0(i)`: labelings of the root piece with the root labeled `i`.
pub fn initial_alpha(counter: &mut Counter, ray: &Ray, n: usize) -> Result<CountVector> {
    check_width(n)?;
    let profile = step_profile(counter.tree(), ray, 0);
    Ok(counter.branch_product(&profile.off_branches, n - 1))
}

/// `alpha_m`, together with the log of the factor divided out of it.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaState {
    pub m: usize,
    /// Exact counts, or log-domain values normalized to max 0.
    pub alpha: CountVector,
    /// True `alpha_m` is `alpha * exp(log_normalizer)`; 0 in exact mode.
    pub log_normalizer: f64,
}

impl AlphaState {
    /// `log sum_i alpha_m(i)`.
    pub fn log_total(&self) -> f64 {
        self.alpha.total().log() + self.log_normalizer
    }
}

fn apply_exact(a: &BinaryMatrix, w: &[BigUint], alpha: &[BigUint]) -> Vec<BigUint> {
    (0..a.dim())
        .map(|s| {
            let mut acc = BigUint::zero();
            for (i, v) in alpha.iter().enumerate() {
                if a.get(i, s) {
                    acc += v;
                }
            }
            acc * &w[s]
        })
        .collect()
}

/// One log-domain step followed by max normalization; returns the shift.
fn apply_log(a: &BinaryMatrix, w: &[f64], alpha: &mut Vec<f64>) -> f64 {
    let k = a.dim();
    let next: Vec<f64> = (0..k)
        .map(|s| log_mul(w[s], log_sum((0..k).filter(|&i| a.get(i, s)).map(|i| alpha[i]))))
        .collect();
    let mx = next.iter().copied().fold(LOG_ZERO, f64::max);
    *alpha = if mx == LOG_ZERO {
        next
    } else {
        next.into_iter().map(|v| v - mx).collect()
    };
    if mx == LOG_ZERO {
        0.0
    } else {
        mx
    }
}

/// Off-branch weights for step `j`, memoized by profile shape.
struct StepWeights<'a> {
    counter: &'a mut Counter,
    ray: &'a Ray,
    n: usize,
    cache: HashMap<Vec<usize>, CountVector>,
}

impl<'a> StepWeights<'a> {
    fn new(counter: &'a mut Counter, ray: &'a Ray, n: usize) -> Self {
        Self { counter, ray, n, cache: HashMap::new() }
    }

    fn profile(&self, j: usize) -> StripProfile {
        step_profile(self.counter.tree(), self.ray, j)
    }

    fn get(&mut self, j: usize) -> CountVector {
        let off = self.profile(j).off_branches;
        if let Some(w) = self.cache.get(&off) {
            return w.clone();
        }
        let w = self.counter.branch_product(&off, self.n - 1);
        self.cache.insert(off, w.clone());
        w
    }
}

/// Applies `R_1, ..., R_m` to `alpha_0`.
///
/// Exact when the counter is exact and the final count is predicted to fit
/// the exact bit budget; otherwise log-domain with max renormalization.
pub fn alpha_iterate(counter: &mut Counter, ray: &Ray, n: usize, m: usize) -> Result<AlphaState> {
    check_width(n)?;
    let exact = counter.is_exact() && {
        let size = strip_size(counter.tree(), ray, n, m + 1)?.to_f64().unwrap_or(f64::INFINITY);
        size * (counter.k() as f64).log2().max(1.0) <= EXACT_BIT_BUDGET
    };
    let a = counter.a().clone();
    let init = initial_alpha(counter, ray, n)?;
    let mut weights = StepWeights::new(counter, ray, n);
    if exact {
        let mut alpha = init.exact().expect("exact counter").to_vec();
        for j in 1..=m {
            let w = weights.get(j);
            alpha = apply_exact(&a, w.exact().expect("exact counter"), &alpha);
        }
        return Ok(AlphaState { m, alpha: CountVector::Exact(alpha), log_normalizer: 0.0 });
    }
    let mut alpha = init.log_values();
    let mut log_normalizer = 0.0;
    // normalize the starting vector too
    let mx = alpha.iter().copied().fold(LOG_ZERO, f64::max);
    if mx != LOG_ZERO {
        alpha.iter_mut().for_each(|v| *v -= mx);
        log_normalizer += mx;
    }
    for j in 1..=m {
        let w = weights.get(j).log_values();
        log_normalizer += apply_log(&a, &w, &mut alpha);
    }
    Ok(AlphaState { m, alpha: CountVector::Log(alpha), log_normalizer })
}

/// Smallest `p` dividing `v.len()` with `v` invariant under rotation by `p`.
fn minimal_period<T: PartialEq>(v: &[T]) -> usize {
    let l = v.len();
    (1..=l).find(|&p| l % p == 0 && (0..l).all(|i| v[i] == v[(i + p) % l])).unwrap_or(l)
}

/// The composed transfer matrix of one ray period.
#[derive(Debug, Clone)]
pub struct PeriodMatrix {
    /// `D = R_{c+p} ... R_{c+1}`, mapping `alpha_c` to `alpha_{c+p}`.
    pub d: LogNonnegMatrix,
    /// Number of steps composed. Equals the ray's period unless the step
    /// matrices and piece sizes repeat with a shorter period `p`.
    pub steps: usize,
    /// Sites added by those steps: `sum_{i=1..p} lambda^n(p_{c+i})`.
    pub denominator: BigUint,
    pub primitivity: Primitivity,
}

/// Step matrices over one period, composed in the order they act.
///
/// When the weights and piece sizes along the period repeat with a shorter
/// period, only that shorter stretch is composed; `rho` and the site count
/// scale together, so the entropy is unchanged and rays whose step sequences
/// coincide give bit-identical results.
pub fn period_matrix(counter: &mut Counter, ray: &Ray, n: usize) -> Result<PeriodMatrix> {
    check_width(n)?;
    let (c, l) = (ray.c(), ray.ell());
    let table = counter.tree().subtree_node_table(n - 1);
    let a = counter.a().clone();
    let mut weights = StepWeights::new(counter, ray, n);
    let mut per_step = Vec::with_capacity(l);
    for j in c + 1..=c + l {
        let profile = weights.profile(j);
        let lambda = lambda_from_table(&table, &profile, n);
        per_step.push((weights.get(j), lambda));
    }
    let p = minimal_period(&per_step);
    let per_step = &per_step[..p];
    let mats: Vec<LogNonnegMatrix> = per_step.iter().rev().map(|(w, _)| step_from_weights(&a, w)).collect();
    let d = product(&mats)?;
    let denominator = per_step.iter().map(|(_, lam)| lam).sum();
    let primitivity = is_primitive(&d.support());
    Ok(PeriodMatrix { d, steps: p, denominator, primitivity })
}

/// How a strip entropy was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Iterative,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::ClosedForm => "closed_form",
            Method::Iterative => "iterative",
        })
    }
}

/// Supporting numbers for a strip entropy value.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_log: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perron_iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perron_converged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_primitive: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub period_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_max: Option<usize>,
    /// `log |patterns on Lambda_{m+1}| / |Lambda_{m+1}|` at `m = m_max`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cumulative_value: Option<f64>,
    /// Max minus min of the cumulative ratio over the last period.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oscillation: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

fn big_as_string<S: Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// A strip entropy `h^n` along one ray.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StripEntropyResult {
    pub n: usize,
    pub value: f64,
    pub method: Method,
    /// Sites per period for the closed form; sites in the last period
    /// for the iterative estimate.
    #[serde(serialize_with = "big_as_string")]
    pub denominator: BigUint,
    pub diagnostics: Diagnostics,
}

/// `log rho(D) / (sites per period)`. Falls back to iteration with
/// `m_max = 1000` when `D` is not primitive.
pub fn strip_entropy_closed(counter: &mut Counter, ray: &Ray, n: usize) -> Result<StripEntropyResult> {
    let pm = period_matrix(counter, ray, n)?;
    if !pm.primitivity.primitive {
        let m_max = (ray.c() + ray.ell()).max(1000);
        let mut r = strip_entropy_iterative(counter, ray, n, m_max)?;
        r.diagnostics.d_primitive = Some(false);
        r.diagnostics.warnings.push("period matrix not primitive; used iteration".into());
        return Ok(r);
    }
    let perron = spectral_radius(&pm.d)?;
    let denom = pm.denominator.to_f64().unwrap_or(f64::INFINITY);
    let mut diagnostics = Diagnostics {
        rho_log: Some(perron.rho_log),
        perron_iterations: Some(perron.iterations),
        perron_converged: Some(perron.converged),
        d_primitive: Some(true),
        period_steps: Some(pm.steps),
        ..Default::default()
    };
    if !perron.converged {
        diagnostics.warnings.push("power iteration did not converge".into());
    }
    Ok(StripEntropyResult {
        n,
        value: perron.rho_log / denom,
        method: Method::ClosedForm,
        denominator: pm.denominator,
        diagnostics,
    })
}

/// Growth rate from direct iteration up to `m_max`.
///
/// With `L_m = log alpha_m` totals and `N_m = |Lambda_{m+1}|`, the value is
/// the last-period increment `(L_m - L_{m-l}) / (N_m - N_{m-l})` at
/// `m = m_max`. It converges geometrically; the cumulative ratio
/// `L_m / N_m` carries an `O(1/m)` boundary term and is reported in the
/// diagnostics.
pub fn strip_entropy_iterative(
    counter: &mut Counter,
    ray: &Ray,
    n: usize,
    m_max: usize,
) -> Result<StripEntropyResult> {
    check_width(n)?;
    let (c, l) = (ray.c(), ray.ell());
    if m_max < c + l {
        return Err(Error::Precondition(format!("m_max {m_max} < c + l = {}", c + l)));
    }
    let table = counter.tree().subtree_node_table(n - 1);
    let a = counter.a().clone();
    let mut alpha = initial_alpha(counter, ray, n)?.log_values();
    let tree = counter.tree().clone();
    let mut weights = StepWeights::new(counter, ray, n);

    let mut log_norm = 0.0;
    let mut sites = lambda_from_table(&table, &step_profile(&tree, ray, 0), n);
    // (L_m, N_m) for the last l + 1 values of m
    let mut history: std::collections::VecDeque<(f64, BigUint)> = std::collections::VecDeque::new();
    let total = |alpha: &[f64], norm: f64| log_sum(alpha.iter().copied()) + norm;
    history.push_back((total(&alpha, log_norm), sites.clone()));
    for j in 1..=m_max {
        let w = weights.get(j).log_values();
        log_norm += apply_log(&a, &w, &mut alpha);
        sites += lambda_from_table(&table, &weights.profile(j), n);
        history.push_back((total(&alpha, log_norm), sites.clone()));
        if history.len() > l + 1 {
            history.pop_front();
        }
    }
    let (l_end, n_end) = history.back().unwrap().clone();
    let (l_start, n_start) = history.front().unwrap().clone();
    let denominator = &n_end - &n_start;
    let value = if l_end == LOG_ZERO {
        0.0
    } else {
        (l_end - l_start) / denominator.to_f64().unwrap_or(f64::INFINITY)
    };
    let ratios: Vec<f64> = history
        .iter()
        .skip(1)
        .map(|(lg, s)| lg / s.to_f64().unwrap_or(f64::INFINITY))
        .collect();
    let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(StripEntropyResult {
        n,
        value,
        method: Method::Iterative,
        denominator,
        diagnostics: Diagnostics {
            m_max: Some(m_max),
            cumulative_value: Some(l_end / n_end.to_f64().unwrap_or(f64::INFINITY)),
            oscillation: Some(hi - lo),
            ..Default::default()
        },
    })
}

/// Step types on the golden-mean tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GoldenStep {
    /// `f1 -> f1` with off-branch `f2`.
    A1,
    /// `f1 -> f2` with off-branch `f1`.
    A2,
    /// `f2 -> f1`, no off-branch.
    A3,
    Other,
}

/// Tags a step on the golden-mean tree by its profile, then confirms the
/// matrix against the closed expressions
///
/// ```text
/// A1 = A^T o B1,  b1(s) = sum_j (A^2)_{sj} beta_{n-2}(j)   (n >= 2)
/// A2 = A^T o B2,  b2(s) = sum_l a_{sl} beta_{n-1}(l)
/// A3 = A^T
/// ```
///
/// Returns `Other` off the golden-mean tree, at the root, or on mismatch.
pub fn classify_golden_step(counter: &mut Counter, step: &TransferStep) -> GoldenStep {
    if counter.tree().shape() != &BinaryMatrix::golden() {
        return GoldenStep::Other;
    }
    let n = step.n;
    let a = counter.a().clone();
    let k = a.dim();
    let rowsum = |v: &CountVector, m: &BinaryMatrix| -> CountVector {
        match v {
            CountVector::Exact(x) => CountVector::Exact(
                (0..k).map(|s| m.row_ones(s).map(|l| x[l].clone()).sum()).collect(),
            ),
            CountVector::Log(x) => {
                CountVector::Log((0..k).map(|s| log_sum(m.row_ones(s).map(|l| x[l]))).collect())
            }
        }
    };
    let (tag, expected) = match step.profile.shape() {
        (Some(0), 0, [1]) => {
            if n < 2 {
                return GoldenStep::A1;
            }
            let beta = counter.beta(n - 2);
            // (A^2)_{sj} counts the paths s -> l -> j
            let a2 = LogNonnegMatrix::from_binary(&a);
            let a2 = product(&[a2.clone(), a2]).expect("square");
            let b1 = match &beta {
                CountVector::Exact(x) => CountVector::Exact(
                    (0..k)
                        .map(|s| (0..k).map(|j| a2.exact_entry(s, j).unwrap() * &x[j]).sum())
                        .collect(),
                ),
                CountVector::Log(x) => CountVector::Log(
                    (0..k)
                        .map(|s| log_sum((0..k).map(|j| log_mul(a2.log_entry(s, j), x[j]))))
                        .collect(),
                ),
            };
            (GoldenStep::A1, step_from_weights(&a, &b1))
        }
        (Some(0), 1, [0]) => {
            let beta = counter.beta(n - 1);
            (GoldenStep::A2, step_from_weights(&a, &rowsum(&beta, &a)))
        }
        (Some(1), 0, []) => {
            let ones = if counter.is_exact() {
                CountVector::Exact(vec![BigUint::from(1u32); k])
            } else {
                CountVector::Log(vec![0.0; k])
            };
            (GoldenStep::A3, step_from_weights(&a, &ones))
        }
        _ => return GoldenStep::Other,
    };
    let same = match (step.r.exact_entries(), expected.exact_entries()) {
        (Some(x), Some(y)) => x == y,
        _ => step
            .r
            .log_entries()
            .iter()
            .zip(expected.log_entries())
            .all(|(p, q)| crate::logspace::log_close(*p, *q, 1e-12)),
    };
    if same {
        tag
    } else {
        GoldenStep::Other
    }
}
