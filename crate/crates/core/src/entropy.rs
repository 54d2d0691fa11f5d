//! Topological entropy estimates and strip-entropy convergence studies.

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::counting::{Counter, Mode};
use crate::error::{Error, Result};
use crate::matrices::{is_primitive, BinaryMatrix};
use crate::ray::Ray;
use crate::transfer::{strip_entropy_closed, Method, StripEntropyResult};
use crate::tree::MarkovTree;

/// Default block depth for the reference entropy.
pub const DEFAULT_N_BUDGET: usize = 20;

/// Residuals at or below this are treated as zero by [`fit_rate`].
pub const NOISE_FLOOR: f64 = 10.0 * f64::EPSILON;

/// Block-count entropy estimates at one depth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockRow {
    pub n: usize,
    /// `log beta_n`.
    pub log_beta: f64,
    /// `|Delta_n|`.
    pub sites: f64,
    /// `log beta_n / |Delta_n|`.
    pub ratio: f64,
    /// `(log beta_n - log beta_{n-1}) / (|Delta_n| - |Delta_{n-1}|)`; equals
    /// `ratio` at `n = 0`.
    pub increment: f64,
}

/// Reference entropy with its supporting table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopologicalEntropy {
    /// Increment estimate at `n_budget`.
    pub h_ref: f64,
    pub n_budget: usize,
    pub rows: Vec<BlockRow>,
    /// `|increment(n_budget) - increment(n_budget - 1)|`.
    pub last_gap: f64,
    pub a_primitive: bool,
}

/// `log beta_n / |Delta_n|` and its per-layer increment for `n <= n_budget`.
///
/// The reference value is the increment at `n_budget`: the last layer's log
/// count per last layer's sites. The plain ratio carries the boundary of
/// the block and converges like `1/n` on thin trees; the increment
/// cancels that term. Both columns are reported.
pub fn topological_entropy(tree: &MarkovTree, a: &BinaryMatrix, n_budget: usize) -> TopologicalEntropy {
    let mut counter = Counter::new(tree, a, Mode::Log, n_budget);
    let mut rows: Vec<BlockRow> = Vec::with_capacity(n_budget + 1);
    for n in 0..=n_budget {
        let log_beta = counter.beta_total(n).log();
        let sites = tree.delta_size(n).to_f64().unwrap_or(f64::INFINITY);
        let ratio = log_beta / sites;
        let increment = match rows.last() {
            None => ratio,
            Some(prev) => (log_beta - prev.log_beta) / (sites - prev.sites),
        };
        rows.push(BlockRow { n, log_beta, sites, ratio, increment });
    }
    let h_ref = rows[n_budget].increment;
    let last_gap = if n_budget == 0 { f64::NAN } else { (h_ref - rows[n_budget - 1].increment).abs() };
    TopologicalEntropy { h_ref, n_budget, rows, last_gap, a_primitive: is_primitive(a).primitive }
}

/// One row of a convergence study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub h_strip: f64,
    pub residual: f64,
    pub method: Method,
    pub result: StripEntropyResult,
}

/// Least-squares line through `(n, log residual)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points: usize,
}

/// Strip entropies along a ray against the reference entropy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyReport {
    pub tree: String,
    pub a: Vec<Vec<u8>>,
    pub ray: String,
    pub h_ref: f64,
    pub h_ref_n: usize,
    pub h_ref_gap: f64,
    pub rows: Vec<ConvergenceRow>,
    /// `None` when fewer than three residuals sit above the noise floor.
    pub fitted_rate: Option<RateFit>,
    pub fit_note: Option<String>,
    pub runtime_ms: u128,
}

/// Strip entropies for each `n` in `n_range`, in parallel, compared with
/// the reference entropy at depth `n_budget`.
pub fn strip_convergence(
    tree: &MarkovTree,
    a: &BinaryMatrix,
    ray: &Ray,
    n_range: std::ops::RangeInclusive<usize>,
    n_budget: usize,
    mode: Mode,
) -> Result<EntropyReport> {
    let start = std::time::Instant::now();
    if n_range.is_empty() || *n_range.start() == 0 {
        return Err(Error::Precondition("n range must be nonempty and start at 1 or more".into()));
    }
    let reference = topological_entropy(tree, a, n_budget);
    let ns: Vec<usize> = n_range.collect();
    let results: Vec<StripEntropyResult> = ns
        .par_iter()
        .map(|&n| {
            let mut counter = Counter::new(tree, a, mode, n);
            strip_entropy_closed(&mut counter, ray, n)
        })
        .collect::<Result<_>>()?;
    let rows: Vec<ConvergenceRow> = results
        .into_iter()
        .map(|r| ConvergenceRow {
            n: r.n,
            h_strip: r.value,
            residual: (r.value - reference.h_ref).abs(),
            method: r.method,
            result: r,
        })
        .collect();
    let points: Vec<(usize, f64)> = rows.iter().map(|r| (r.n, r.residual)).collect();
    let (fitted_rate, fit_note) = match fit_rate(&points) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(EntropyReport {
        tree: format!("{:?}", tree.shape().to_rows()),
        a: a.to_rows(),
        ray: ray.shorthand(),
        h_ref: reference.h_ref,
        h_ref_n: n_budget,
        h_ref_gap: reference.last_gap,
        rows,
        fitted_rate,
        fit_note,
        runtime_ms: start.elapsed().as_millis(),
    })
}

/// Ordinary least squares on `(n, log residual)`, skipping residuals at or
/// below [`NOISE_FLOOR`]. Needs three usable points.
pub fn fit_rate(rows: &[(usize, f64)]) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|(_, r)| *r > NOISE_FLOOR && r.is_finite())
        .map(|&(n, r)| (n as f64, r.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::DegenerateFit("converged below noise floor"));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all points share one n"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(RateFit { slope, intercept, r2, points: pts.len() })
}
