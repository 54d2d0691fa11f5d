//! Pattern counts on follower subtrees and blocks.
//!
//! `gamma_n(t, i)` is the number of admissible labelings of the depth-`n`
//! follower tree of a node of type `t` whose own label is `i`:
//!
//! ```text
//! gamma_0(t, i) = 1
//! gamma_n(t, i) = prod_{t' : M(t,t') = 1} sum_j a(i,j) gamma_{n-1}(t', j)
//! ```
//!
//! `beta_n(i)` is the same count on the block `Delta_n`, where the root has
//! all `d` generators as children. For a full-row generator `t`,
//! `gamma_n(t, .) = beta_n(.)`.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::logspace::{ln_big, log_add, log_sum, LOG_ZERO};
use crate::matrices::BinaryMatrix;
use crate::tree::MarkovTree;

/// Largest predicted count size, in bits, for which `Mode::Auto` stays exact.
pub const EXACT_BIT_BUDGET: f64 = 1e6;

/// Arithmetic mode for counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Log,
    Auto,
}

impl std::str::FromStr for Mode {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "log" => Ok(Mode::Log),
            "auto" => Ok(Mode::Auto),
            _ => Err(crate::Error::Parse(format!("mode '{s}' (expected exact|log|auto)"))),
        }
    }
}

/// A single count, exact or by its log.
#[derive(Debug, Clone, PartialEq)]
pub enum Count {
    Exact(BigUint),
    Log(f64),
}

impl Count {
    pub fn log(&self) -> f64 {
        match self {
            Count::Exact(v) => ln_big(v),
            Count::Log(v) => *v,
        }
    }

    pub fn exact(&self) -> Option<&BigUint> {
        match self {
            Count::Exact(v) => Some(v),
            Count::Log(_) => None,
        }
    }
}

/// Per-symbol counts.
#[derive(Debug, Clone, PartialEq)]
pub enum CountVector {
    Exact(Vec<BigUint>),
    /// Natural logs; `LOG_ZERO` stands for a zero count.
    Log(Vec<f64>),
}

impl CountVector {
    pub fn k(&self) -> usize {
        match self {
            CountVector::Exact(v) => v.len(),
            CountVector::Log(v) => v.len(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, CountVector::Exact(_))
    }

    pub fn exact(&self) -> Option<&[BigUint]> {
        match self {
            CountVector::Exact(v) => Some(v),
            CountVector::Log(_) => None,
        }
    }

    pub fn log_values(&self) -> Vec<f64> {
        match self {
            CountVector::Exact(v) => v.iter().map(ln_big).collect(),
            CountVector::Log(v) => v.clone(),
        }
    }

    pub fn total(&self) -> Count {
        match self {
            CountVector::Exact(v) => Count::Exact(v.iter().sum()),
            CountVector::Log(v) => Count::Log(log_sum(v.iter().copied())),
        }
    }

    pub fn to_log(&self) -> CountVector {
        CountVector::Log(self.log_values())
    }

    /// Exact values as u64, when they fit. Test convenience.
    pub fn as_u64(&self) -> Option<Vec<u64>> {
        self.exact()?.iter().map(|v| v.to_u64()).collect()
    }
}

/// Semiring used by the count recursions.
pub(crate) trait Weight: Clone {
    fn nil() -> Self;
    fn unit() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
}

impl Weight for BigUint {
    fn nil() -> Self {
        Zero::zero()
    }
    fn unit() -> Self {
        One::one()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
}

/// A nonnegative number held by its log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct LogWeight(pub f64);

impl Weight for LogWeight {
    fn nil() -> Self {
        LogWeight(LOG_ZERO)
    }
    fn unit() -> Self {
        LogWeight(0.0)
    }
    fn add(&self, other: &Self) -> Self {
        LogWeight(log_add(self.0, other.0))
    }
    fn mul(&self, other: &Self) -> Self {
        LogWeight(crate::logspace::log_mul(self.0, other.0))
    }
}

/// `i -> sum_j a(i,j) g_j`: ways to label a child given the parent label `i`.
pub(crate) fn attach<W: Weight>(a: &BinaryMatrix, g: &[W]) -> Vec<W> {
    (0..a.dim())
        .map(|i| a.row_ones(i).fold(W::nil(), |acc, j| acc.add(&g[j])))
        .collect()
}

fn product_over<W: Weight>(k: usize, factors: impl Iterator<Item = Vec<W>>) -> Vec<W> {
    factors.fold(vec![W::unit(); k], |acc, f| acc.iter().zip(&f).map(|(x, y)| x.mul(y)).collect())
}

fn next_layer<W: Weight>(tree: &MarkovTree, a: &BinaryMatrix, prev: &[Vec<W>]) -> Vec<Vec<W>> {
    let attached: Vec<Vec<W>> = prev.iter().map(|g| attach(a, g)).collect();
    (0..tree.d())
        .map(|t| product_over(a.dim(), tree.children(t).map(|c| attached[c].clone())))
        .collect()
}

enum Tables {
    /// `layers[n][t][i] = gamma_n(t, i)`
    Exact(Vec<Vec<Vec<BigUint>>>),
    Log(Vec<Vec<Vec<LogWeight>>>),
}

/// Memoized count tables for one `(tree, A, mode)`.
///
/// Tables grow on demand, so the query methods take `&mut self`; confine a
/// counter to one thread or wrap it in a lock.
pub struct Counter {
    tree: MarkovTree,
    a: BinaryMatrix,
    tables: Tables,
}

/// Predicted size in bits of `beta_n`: `|Delta_n| log2 k`.
pub fn predicted_bits(tree: &MarkovTree, k: usize, n: usize) -> f64 {
    let nodes = tree.delta_size(n).to_f64().unwrap_or(f64::INFINITY);
    nodes * (k as f64).log2().max(1.0)
}

impl Counter {
    /// `Mode::Auto` resolves to exact when `beta_{n_hint}` is predicted to fit
    /// in [`EXACT_BIT_BUDGET`] bits.
    pub fn new(tree: &MarkovTree, a: &BinaryMatrix, mode: Mode, n_hint: usize) -> Self {
        let exact = match mode {
            Mode::Exact => true,
            Mode::Log => false,
            Mode::Auto => predicted_bits(tree, a.dim(), n_hint) <= EXACT_BIT_BUDGET,
        };
        let k = a.dim();
        let d = tree.d();
        let tables = if exact {
            Tables::Exact(vec![vec![vec![BigUint::one(); k]; d]])
        } else {
            Tables::Log(vec![vec![vec![LogWeight(0.0); k]; d]])
        };
        Self { tree: tree.clone(), a: a.clone(), tables }
    }

    /// Like [`Counter::new`], but a forced `Mode::Exact` whose predicted
    /// size exceeds [`EXACT_BIT_BUDGET`] is refused.
    pub fn checked(tree: &MarkovTree, a: &BinaryMatrix, mode: Mode, n_hint: usize) -> crate::Result<Self> {
        let bits = predicted_bits(tree, a.dim(), n_hint);
        if mode == Mode::Exact && bits > EXACT_BIT_BUDGET {
            return Err(crate::Error::SizeGuard {
                what: "predicted exact count bits",
                size: bits.min(u128::MAX as f64) as u128,
                limit: EXACT_BIT_BUDGET as u128,
            });
        }
        Ok(Self::new(tree, a, mode, n_hint))
    }

    pub fn exact(tree: &MarkovTree, a: &BinaryMatrix) -> Self {
        Self::new(tree, a, Mode::Exact, 0)
    }

    pub fn log(tree: &MarkovTree, a: &BinaryMatrix) -> Self {
        Self::new(tree, a, Mode::Log, 0)
    }

    /// The resolved mode, `Exact` or `Log`.
    pub fn mode(&self) -> Mode {
        match self.tables {
            Tables::Exact(_) => Mode::Exact,
            Tables::Log(_) => Mode::Log,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.mode() == Mode::Exact
    }

    pub fn tree(&self) -> &MarkovTree {
        &self.tree
    }

    pub fn a(&self) -> &BinaryMatrix {
        &self.a
    }

    pub fn k(&self) -> usize {
        self.a.dim()
    }

    fn ensure(&mut self, n: usize) {
        let (tree, a) = (&self.tree, &self.a);
        match &mut self.tables {
            Tables::Exact(layers) => {
                while layers.len() <= n {
                    let next = next_layer(tree, a, layers.last().unwrap());
                    layers.push(next);
                }
            }
            Tables::Log(layers) => {
                while layers.len() <= n {
                    let next = next_layer(tree, a, layers.last().unwrap());
                    layers.push(next);
                }
            }
        }
    }

    /// `gamma_n(t, .)`.
    pub fn gamma(&mut self, t: usize, n: usize) -> CountVector {
        self.ensure(n);
        match &self.tables {
            Tables::Exact(l) => CountVector::Exact(l[n][t].clone()),
            Tables::Log(l) => CountVector::Log(l[n][t].iter().map(|w| w.0).collect()),
        }
    }

    /// `i -> sum_j a(i,j) gamma_n(t, j)`: labelings of a type-`t` child
    /// carrying a depth-`n` follower tree, given the parent label `i`.
    pub fn branch_weight(&mut self, t: usize, n: usize) -> CountVector {
        self.ensure(n);
        match &self.tables {
            Tables::Exact(l) => CountVector::Exact(attach(&self.a, &l[n][t])),
            Tables::Log(l) => CountVector::Log(attach(&self.a, &l[n][t]).into_iter().map(|w| w.0).collect()),
        }
    }

    /// Product of branch weights over `types`, each carrying depth `n`.
    /// The empty product is the all-ones vector.
    pub fn branch_product(&mut self, types: &[usize], n: usize) -> CountVector {
        self.ensure(n);
        let k = self.k();
        match &self.tables {
            Tables::Exact(l) => CountVector::Exact(product_over(
                k,
                types.iter().map(|&t| attach(&self.a, &l[n][t])),
            )),
            Tables::Log(l) => CountVector::Log(
                product_over(k, types.iter().map(|&t| attach(&self.a, &l[n][t])))
                    .into_iter()
                    .map(|w| w.0)
                    .collect(),
            ),
        }
    }

    /// `beta_n(.)`, root label pinned per entry.
    pub fn beta(&mut self, n: usize) -> CountVector {
        if n == 0 {
            return match self.tables {
                Tables::Exact(_) => CountVector::Exact(vec![BigUint::one(); self.k()]),
                Tables::Log(_) => CountVector::Log(vec![0.0; self.k()]),
            };
        }
        let all: Vec<usize> = (0..self.tree.d()).collect();
        self.branch_product(&all, n - 1)
    }

    /// `beta_n = sum_i beta_n(i)`.
    pub fn beta_total(&mut self, n: usize) -> Count {
        self.beta(n).total()
    }

    /// Compares `gamma_n(t, .)` with `beta_n(.)` for every full-row `t`.
    pub fn gamma_matches_beta(&mut self, n: usize) -> FullRowCheck {
        let full = self.tree.full_rows();
        if full.is_empty() {
            return FullRowCheck { holds: true, vacuous: true };
        }
        let beta = self.beta(n);
        let holds = full.iter().all(|&t| {
            let g = self.gamma(t, n);
            match (&g, &beta) {
                (CountVector::Exact(x), CountVector::Exact(y)) => x == y,
                _ => g
                    .log_values()
                    .iter()
                    .zip(beta.log_values())
                    .all(|(a, b)| crate::logspace::log_close(*a, b, 1e-12)),
            }
        });
        FullRowCheck { holds, vacuous: false }
    }
}

/// Outcome of [`Counter::gamma_matches_beta`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FullRowCheck {
    pub holds: bool,
    /// True when the tree has no full row, so there was nothing to compare.
    pub vacuous: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g() -> BinaryMatrix {
        BinaryMatrix::golden()
    }

    #[test]
    fn gamma_examples() {
        let mut c = Counter::exact(&MarkovTree::golden(), &g());
        assert_eq!(c.gamma(0, 1).as_u64(), Some(vec![4, 1]));
        assert_eq!(c.gamma(1, 1).as_u64(), Some(vec![2, 1]));
        assert_eq!(c.gamma(0, 0).as_u64(), Some(vec![1, 1]));

        let one = BinaryMatrix::new(&[[1u8]]).unwrap();
        let mut c = Counter::exact(&MarkovTree::crt_preset(3).unwrap(), &one);
        for n in 0..6 {
            for t in 0..3 {
                assert_eq!(c.gamma(t, n).as_u64(), Some(vec![1]));
            }
        }
    }

    #[test]
    fn gamma_free_labeling() {
        for tree in [MarkovTree::golden(), MarkovTree::crt_preset(3).unwrap(), MarkovTree::full(2)] {
            for k in 1..=3usize {
                let mut c = Counter::exact(&tree, &BinaryMatrix::full(k));
                for n in 0..5 {
                    for t in 0..tree.d() {
                        let nu = tree.subtree_nodes(t, n as i64).to_u32().unwrap();
                        let expected = BigUint::from(k).pow(nu - 1);
                        assert!(c.gamma(t, n).exact().unwrap().iter().all(|v| *v == expected));
                    }
                }
            }
        }
    }

    #[test]
    fn beta_examples() {
        let mut c = Counter::exact(&MarkovTree::golden(), &g());
        assert_eq!(c.beta(1).as_u64(), Some(vec![4, 1]));
        assert_eq!(c.beta_total(1).exact().unwrap(), &BigUint::from(5u32));
        assert_eq!(c.beta(2).as_u64(), Some(vec![15, 8]));
        assert_eq!(c.beta_total(2).exact().unwrap(), &BigUint::from(23u32));
        assert_eq!(c.beta(0).as_u64(), Some(vec![1, 1]));

        let mut c = Counter::exact(&MarkovTree::full(2), &g());
        assert_eq!(c.beta(1).as_u64(), Some(vec![4, 1]));

        let mut c = Counter::exact(&MarkovTree::full(2), &BinaryMatrix::full(2));
        assert_eq!(c.beta_total(1).exact().unwrap(), &BigUint::from(8u32));
        for n in 0..6 {
            let size = MarkovTree::full(2).delta_size(n).to_u32().unwrap();
            assert_eq!(c.beta_total(n).exact().unwrap(), &BigUint::from(2u32).pow(size));
        }
    }

    #[test]
    fn gamma_matches_beta_examples() {
        let mut c = Counter::exact(&MarkovTree::golden(), &g());
        for n in 0..=6 {
            assert_eq!(c.gamma_matches_beta(n), FullRowCheck { holds: true, vacuous: false });
        }
        let mut c = Counter::exact(&MarkovTree::full(3), &g());
        for n in 0..=4 {
            assert!(c.gamma_matches_beta(n).holds);
        }
        let a = BinaryMatrix::new(&[[1u8, 1, 0], [0, 1, 1], [1, 0, 1]]).unwrap();
        let mut c = Counter::exact(&MarkovTree::crt_preset(3).unwrap(), &a);
        for n in 0..=4 {
            assert!(c.gamma_matches_beta(n).holds);
        }
        let swap = MarkovTree::new(BinaryMatrix::new(&[[0u8, 1], [1, 0]]).unwrap()).unwrap();
        let mut c = Counter::exact(&swap, &g());
        assert_eq!(c.gamma_matches_beta(3), FullRowCheck { holds: true, vacuous: true });
    }

    #[test]
    fn log_mode_matches_exact() {
        let a = BinaryMatrix::new(&[[1u8, 1, 0], [0, 1, 1], [1, 0, 1]]).unwrap();
        for tree in [MarkovTree::golden(), MarkovTree::crt_preset(3).unwrap(), MarkovTree::full(2)] {
            let mut ex = Counter::exact(&tree, &a);
            let mut lg = Counter::log(&tree, &a);
            assert_eq!(lg.mode(), Mode::Log);
            for n in 0..=9 {
                let e = ex.beta(n).log_values();
                let l = lg.beta(n).log_values();
                for (x, y) in e.iter().zip(&l) {
                    assert!(((x - y) / x.max(1.0)).abs() < 1e-9, "n={n}: {x} vs {y}");
                }
                let (te, tl) = (ex.beta_total(n).log(), lg.beta_total(n).log());
                assert!(((te - tl) / te.max(1.0)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn beta_monotone() {
        let a = BinaryMatrix::new(&[[0u8, 1, 1], [1, 0, 1], [1, 1, 0]]).unwrap();
        for tree in [MarkovTree::golden(), MarkovTree::crt_preset(3).unwrap(), MarkovTree::chain()] {
            let mut c = Counter::exact(&tree, &a);
            let mut prev = c.beta_total(0).exact().unwrap().clone();
            for n in 1..=8 {
                let cur = c.beta_total(n).exact().unwrap().clone();
                assert!(cur >= prev);
                prev = cur;
            }
        }
    }

    #[test]
    fn auto_mode_switches_on_size() {
        let tree = MarkovTree::full(2);
        assert_eq!(Counter::new(&tree, &g(), Mode::Auto, 5).mode(), Mode::Exact);
        // |Delta_20| = 2^21 - 1 nodes, over a million bits
        assert_eq!(Counter::new(&tree, &g(), Mode::Auto, 20).mode(), Mode::Log);
        assert_eq!(Counter::new(&tree, &g(), Mode::Exact, 20).mode(), Mode::Exact);
        assert_eq!("auto".parse::<Mode>().unwrap(), Mode::Auto);
        assert!("fast".parse::<Mode>().is_err());
        assert!(matches!(
            Counter::checked(&tree, &g(), Mode::Exact, 20),
            Err(crate::Error::SizeGuard { .. })
        ));
        assert!(Counter::checked(&tree, &g(), Mode::Log, 20).is_ok());
    }

    #[test]
    fn chain_beta_is_fibonacci() {
        let mut c = Counter::exact(&MarkovTree::chain(), &g());
        let mut fib = vec![1u64, 1];
        while fib.len() < 30 {
            let x = fib[fib.len() - 1] + fib[fib.len() - 2];
            fib.push(x);
        }
        // words of length n + 1 avoiding "22": F_{n+3}
        for n in 0..20 {
            assert_eq!(c.beta_total(n).exact().unwrap(), &BigUint::from(fib[n + 2]));
        }
    }

    #[test]
    fn zero_count_in_log_mode() {
        // a symbol with no successors kills every nonleaf count
        let a = BinaryMatrix::new(&[[1u8, 1], [0, 0]]).unwrap();
        let mut c = Counter::log(&MarkovTree::golden(), &a);
        let b = c.beta(2).log_values();
        assert_eq!(b[1], LOG_ZERO);
        assert!(b[0].is_finite());
    }
}
