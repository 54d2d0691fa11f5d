//! Brute-force ground truth for pattern counts.
//!
//! Everything here works on explicit node sets. Nothing is shared with the
//! count recursions in `counting` or `transfer`: regions are enumerated word
//! by word, and labelings are either enumerated one by one (small regions)
//! or folded bottom-up over the explicit parent links (larger regions).

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::counting::CountVector;
use crate::error::{Error, Result};
use crate::matrices::BinaryMatrix;
use crate::ray::{strip_region, Ray};
use crate::tree::{MarkovTree, Word};

/// Node limit for explicit enumeration of labelings.
pub const DFS_NODE_LIMIT: usize = 30;
/// Node limit for the bottom-up fold.
pub const FOLD_NODE_LIMIT: usize = 10_000;

/// A finite set of tree nodes with an optional pinned label.
#[derive(Debug, Clone)]
pub struct Region {
    nodes: Vec<Word>,
    /// `parent[x]` is the index of the parent word, when it lies in the region.
    parent: Vec<Option<usize>>,
    pin: Option<(usize, usize)>,
}

impl Region {
    pub fn new(mut nodes: Vec<Word>) -> Self {
        nodes.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        nodes.dedup();
        let index: HashMap<&Word, usize> = nodes.iter().enumerate().map(|(i, w)| (w, i)).collect();
        let parent = nodes
            .iter()
            .map(|w| {
                if w.is_empty() {
                    None
                } else {
                    index.get(&w[..w.len() - 1].to_vec()).copied()
                }
            })
            .collect();
        Self { nodes, parent, pin: None }
    }

    /// Fixes the label of `node` to `symbol`.
    pub fn pinned(mut self, node: &[usize], symbol: usize) -> Result<Self> {
        let idx = self
            .nodes
            .iter()
            .position(|w| w == node)
            .ok_or_else(|| Error::Precondition(format!("pinned node {node:?} not in region")))?;
        self.pin = Some((idx, symbol));
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Word] {
        &self.nodes
    }

    fn allowed_symbols(&self, x: usize, k: usize) -> Vec<usize> {
        match self.pin {
            Some((p, s)) if p == x => vec![s],
            _ => (0..k).collect(),
        }
    }
}

/// Counts labelings by enumerating them one at a time. Nodes are visited
/// parents-first; a node whose parent lies outside the region is free.
pub fn count_labelings_dfs(region: &Region, a: &BinaryMatrix) -> Result<BigUint> {
    if region.len() > DFS_NODE_LIMIT {
        return Err(Error::SizeGuard {
            what: "region nodes for enumeration",
            size: region.len() as u128,
            limit: DFS_NODE_LIMIT as u128,
        });
    }
    let k = a.dim();
    let mut labels = vec![0usize; region.len()];
    let mut count = 0u64;
    fn go(
        x: usize,
        region: &Region,
        a: &BinaryMatrix,
        k: usize,
        labels: &mut Vec<usize>,
        count: &mut u64,
    ) {
        if x == region.len() {
            *count += 1;
            return;
        }
        for s in region.allowed_symbols(x, k) {
            if let Some(p) = region.parent[x] {
                if !a.get(labels[p], s) {
                    continue;
                }
            }
            labels[x] = s;
            go(x + 1, region, a, k, labels, count);
        }
    }
    go(0, region, a, k, &mut labels, &mut count);
    Ok(BigUint::from(count))
}

/// Counts labelings by folding per-node label vectors from the deepest
/// nodes up: `f(x, i) = prod_{children c} sum_j a(i,j) f(c, j)`, then sums
/// over the labels of every region root.
pub fn count_labelings(region: &Region, a: &BinaryMatrix) -> Result<BigUint> {
    if region.len() > FOLD_NODE_LIMIT {
        return Err(Error::SizeGuard {
            what: "region nodes",
            size: region.len() as u128,
            limit: FOLD_NODE_LIMIT as u128,
        });
    }
    let k = a.dim();
    let mut f: Vec<Vec<BigUint>> = (0..region.len())
        .map(|x| {
            let allowed = region.allowed_symbols(x, k);
            (0..k)
                .map(|i| if allowed.contains(&i) { BigUint::one() } else { BigUint::zero() })
                .collect()
        })
        .collect();
    let mut total = BigUint::one();
    // nodes are sorted by length, so reverse order visits children first
    for x in (0..region.len()).rev() {
        let fx = std::mem::take(&mut f[x]);
        match region.parent[x] {
            Some(p) => {
                for i in 0..k {
                    if f[p][i].is_zero() {
                        continue;
                    }
                    let mut s = BigUint::zero();
                    for (j, v) in fx.iter().enumerate() {
                        if a.get(i, j) {
                            s += v;
                        }
                    }
                    f[p][i] *= s;
                }
            }
            None => total *= fx.iter().sum::<BigUint>(),
        }
    }
    Ok(total)
}

/// Admissible words of length at most `n`, built letter by letter.
pub fn block_words(tree: &MarkovTree, n: usize) -> Vec<Word> {
    let mut out = vec![vec![]];
    let mut frontier: Vec<Word> = vec![vec![]];
    for _ in 0..n {
        let mut next = Vec::new();
        for w in &frontier {
            for c in 0..tree.d() {
                let ok = match w.last() {
                    None => true,
                    Some(&t) => tree.shape().get(t, c),
                };
                if ok {
                    let mut x = w.clone();
                    x.push(c);
                    next.push(x);
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// `beta_n(i)` by direct counting on `Delta_n` with the root pinned to `i`.
pub fn oracle_beta(tree: &MarkovTree, a: &BinaryMatrix, n: usize) -> Result<CountVector> {
    let region = Region::new(block_words(tree, n));
    let counts = (0..a.dim())
        .map(|i| count_labelings(&region.clone().pinned(&[], i)?, a))
        .collect::<Result<Vec<_>>>()?;
    Ok(CountVector::Exact(counts))
}

/// `alpha_{n,m}(i)`: labelings of the strip pieces at `p_0, ..., p_m` with
/// the label of `p_m` pinned to `i`.
pub fn oracle_alpha(
    tree: &MarkovTree,
    a: &BinaryMatrix,
    ray: &Ray,
    n: usize,
    m: usize,
) -> Result<CountVector> {
    let region = Region::new(strip_region(tree, ray, n, m + 1)?);
    let end = ray.node(m);
    let counts = (0..a.dim())
        .map(|i| count_labelings(&region.clone().pinned(&end, i)?, a))
        .collect::<Result<Vec<_>>>()?;
    Ok(CountVector::Exact(counts))
}

/// Number of distinct restrictions to `small` of the labelings of `big`,
/// by enumeration. `small` must be a subset of `big`.
pub fn projection_count(small: &Region, big: &Region, a: &BinaryMatrix) -> Result<usize> {
    if big.len() > DFS_NODE_LIMIT {
        return Err(Error::SizeGuard {
            what: "region nodes for enumeration",
            size: big.len() as u128,
            limit: DFS_NODE_LIMIT as u128,
        });
    }
    let positions: Vec<usize> = small
        .nodes()
        .iter()
        .map(|w| {
            big.nodes()
                .iter()
                .position(|v| v == w)
                .ok_or_else(|| Error::Precondition(format!("{w:?} not in the larger region")))
        })
        .collect::<Result<_>>()?;
    let k = a.dim();
    let mut seen = std::collections::HashSet::new();
    let mut labels = vec![0usize; big.len()];
    fn go(
        x: usize,
        big: &Region,
        a: &BinaryMatrix,
        k: usize,
        labels: &mut Vec<usize>,
        positions: &[usize],
        seen: &mut std::collections::HashSet<Vec<usize>>,
    ) {
        if x == big.len() {
            seen.insert(positions.iter().map(|&p| labels[p]).collect());
            return;
        }
        for s in big.allowed_symbols(x, k) {
            if let Some(p) = big.parent[x] {
                if !a.get(labels[p], s) {
                    continue;
                }
            }
            labels[x] = s;
            go(x + 1, big, a, k, labels, positions, seen);
        }
    }
    go(0, big, a, k, &mut labels, &positions, &mut seen);
    Ok(seen.len())
}
