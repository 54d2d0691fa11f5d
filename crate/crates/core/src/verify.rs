//! Seeded sweeps comparing the count recursions with the brute-force oracle.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::counting::{CountVector, Counter};
use crate::error::Result;
use crate::matrices::{is_primitive, BinaryMatrix};
use crate::oracle::{oracle_alpha, oracle_beta};
use crate::ray::{Ray, RaySpec};
use crate::transfer::alpha_iterate;
use crate::tree::MarkovTree;

/// Draws a uniformly random primitive 0-1 matrix by rejection.
pub fn random_primitive<R: Rng>(rng: &mut R, k: usize) -> BinaryMatrix {
    loop {
        let bits: Vec<bool> = (0..k * k).map(|_| rng.gen_bool(0.5)).collect();
        let m = BinaryMatrix::from_fn(k, |i, j| bits[i * k + j]);
        if is_primitive(&m).primitive {
            return m;
        }
    }
}

/// Draws `count` distinct admissible rays with prefix length at most
/// `max_c` and period length in `1..=max_l`. Periods are kept primitive
/// words so distinct draws give distinct rays.
pub fn random_rays<R: Rng>(tree: &MarkovTree, rng: &mut R, count: usize, max_c: usize, max_l: usize) -> Vec<Ray> {
    let mut out: Vec<Ray> = Vec::new();
    let mut attempts = 0;
    while out.len() < count && attempts < 10_000 {
        attempts += 1;
        let c = rng.gen_range(0..=max_c);
        let l = rng.gen_range(1..=max_l);
        let words = tree.words_of_length(c + l);
        let Some(w) = words.choose(rng) else { continue };
        let Ok(ray) = Ray::new(tree, w[..c].to_vec(), w[c..].to_vec()) else { continue };
        let period = ray.period();
        let reducible = (1..l).any(|p| l % p == 0 && (0..l).all(|i| period[i] == period[(i + p) % l]));
        if reducible || out.contains(&ray) {
            continue;
        }
        out.push(ray);
    }
    out
}

/// Parameters of an oracle sweep.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub seed: u64,
    /// Number of random matrices; sizes alternate through `ks`.
    pub matrices: usize,
    pub ks: Vec<usize>,
    pub trees: Vec<(String, MarkovTree)>,
    pub rays_per_tree: usize,
    pub ns: std::ops::RangeInclusive<usize>,
    pub ms: std::ops::RangeInclusive<usize>,
}

impl SweepConfig {
    /// 20 matrices with `k` in {2, 3}; trees `E:2`, `G`, `crt:3`; three rays
    /// per tree; `n` in 2..=4 and `m` in 1..=5.
    pub fn standard(seed: u64) -> Self {
        Self {
            seed,
            matrices: 20,
            ks: vec![2, 3],
            trees: vec![
                ("E:2".into(), MarkovTree::full(2)),
                ("G".into(), MarkovTree::golden()),
                ("crt:3".into(), MarkovTree::crt_preset(3).expect("d >= 2")),
            ],
            rays_per_tree: 3,
            ns: 2..=4,
            ms: 1..=5,
        }
    }
}

/// A disagreement between the recursion and the oracle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mismatch {
    pub config: String,
    /// `beta n` or `alpha n m`.
    pub index: String,
    pub expected: Vec<String>,
    pub got: Vec<String>,
}

/// Totals of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub seed: u64,
    pub configurations: usize,
    pub checks: usize,
    pub mismatches: Vec<Mismatch>,
}

fn render(v: &CountVector) -> Vec<String> {
    match v {
        CountVector::Exact(x) => x.iter().map(|b| b.to_string()).collect(),
        CountVector::Log(x) => x.iter().map(|f| format!("exp({f})")).collect(),
    }
}

struct Job {
    label: String,
    tree: MarkovTree,
    a: BinaryMatrix,
    rays: Vec<Ray>,
}

fn run_job(job: &Job, ns: &[usize], ms: &[usize]) -> Result<(usize, Vec<Mismatch>)> {
    let mut counter = Counter::exact(&job.tree, &job.a);
    let mut checks = 0;
    let mut bad = Vec::new();
    for &n in ns {
        let got = counter.beta(n);
        let want = oracle_beta(&job.tree, &job.a, n)?;
        checks += 1;
        if got != want {
            bad.push(Mismatch {
                config: job.label.clone(),
                index: format!("beta {n}"),
                expected: render(&want),
                got: render(&got),
            });
        }
        for ray in &job.rays {
            for &m in ms {
                let got = alpha_iterate(&mut counter, ray, n, m)?.alpha;
                let want = oracle_alpha(&job.tree, &job.a, ray, n, m)?;
                checks += 1;
                if got != want {
                    bad.push(Mismatch {
                        config: format!("{} ray={}", job.label, RaySpec::from(ray)),
                        index: format!("alpha {n} {m}"),
                        expected: render(&want),
                        got: render(&got),
                    });
                }
            }
        }
    }
    Ok((checks, bad))
}

/// Runs the sweep. Jobs run in parallel; the report is ordered as the
/// configuration lists them, so output is identical for a given seed.
pub fn oracle_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mats: Vec<BinaryMatrix> =
        (0..cfg.matrices).map(|i| random_primitive(&mut rng, cfg.ks[i % cfg.ks.len()])).collect();
    let rays: Vec<Vec<Ray>> = cfg
        .trees
        .iter()
        .map(|(_, t)| random_rays(t, &mut rng, cfg.rays_per_tree, 2, 3))
        .collect();
    let mut jobs = Vec::new();
    for (mi, a) in mats.iter().enumerate() {
        for ((name, tree), rs) in cfg.trees.iter().zip(&rays) {
            jobs.push(Job {
                label: format!("M={name} A#{mi}={:?}", a.to_rows()),
                tree: tree.clone(),
                a: a.clone(),
                rays: rs.clone(),
            });
        }
    }
    let ns: Vec<usize> = cfg.ns.clone().collect();
    let ms: Vec<usize> = cfg.ms.clone().collect();
    let results: Vec<(usize, Vec<Mismatch>)> =
        jobs.par_iter().map(|j| run_job(j, &ns, &ms)).collect::<Result<_>>()?;
    let mut report = SweepReport { seed: cfg.seed, configurations: jobs.len(), checks: 0, mismatches: vec![] };
    for (c, bad) in results {
        report.checks += c;
        report.mismatches.extend(bad);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_draws_are_valid_and_seeded() {
        let mut r1 = ChaCha8Rng::seed_from_u64(5);
        let mut r2 = ChaCha8Rng::seed_from_u64(5);
        for k in 1..=4 {
            let a = random_primitive(&mut r1, k);
            assert!(is_primitive(&a).primitive);
            assert_eq!(a, random_primitive(&mut r2, k));
        }
        let tree = MarkovTree::crt_preset(3).unwrap();
        let rays = random_rays(&tree, &mut r1, 3, 2, 3);
        assert_eq!(rays.len(), 3);
        assert!(rays.iter().all(|r| r.c() <= 2 && (1..=3).contains(&r.ell())));
    }

    #[test]
    fn small_sweep_is_clean() {
        let cfg = SweepConfig { matrices: 2, ns: 2..=3, ms: 1..=3, ..SweepConfig::standard(11) };
        let rep = oracle_sweep(&cfg).unwrap();
        assert_eq!(rep.configurations, 6);
        assert_eq!(rep.checks, 6 * 2 * (1 + 3 * 3));
        assert!(rep.mismatches.is_empty(), "{:?}", rep.mismatches);
        assert_eq!(rep, oracle_sweep(&cfg).unwrap());
    }
}
