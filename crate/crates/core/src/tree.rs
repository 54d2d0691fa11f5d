//! Markov-Cayley trees: the words over `d` generators whose consecutive
//! letters are allowed by a 0-1 shape matrix `M`.
//!
//! Generators are 0-based internally (`f1` is `0`). The root is the empty
//! word and has all `d` generators as children; only consecutive letters
//! are constrained.

use std::collections::{BTreeSet, HashSet};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrices::BinaryMatrix;

/// A word of generator indices.
pub type Word = Vec<usize>;

/// Largest `d` accepted by the complete-recursive search.
pub const CRT_SEARCH_LIMIT: usize = 12;

/// A Markov-Cayley tree with shape matrix `M`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct MarkovTree {
    shape: BinaryMatrix,
}

impl MarkovTree {
    /// Accepts `shape` when every row has a one, i.e. every branch extends.
    pub fn new(shape: BinaryMatrix) -> Result<Self> {
        if let Some(i) = (0..shape.dim()).find(|&i| shape.is_zero_row(i)) {
            return Err(Error::ZeroRow(i));
        }
        Ok(Self { shape })
    }

    /// The conventional `d`-tree.
    pub fn full(d: usize) -> Self {
        Self { shape: BinaryMatrix::full(d) }
    }

    /// The golden-mean tree, `M = [[1,1],[1,0]]`.
    pub fn golden() -> Self {
        Self { shape: BinaryMatrix::golden() }
    }

    /// The one-generator tree `M = [1]`, a single infinite path.
    pub fn chain() -> Self {
        Self::full(1)
    }

    /// Row 1 full, `f_i -> f_{i+1}` for `2 <= i < d`, and `f_d -> f_1`.
    /// `crt_preset(2)` is the golden-mean tree.
    pub fn crt_preset(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::Precondition(format!("crt preset needs d >= 2, got {d}")));
        }
        let shape = BinaryMatrix::from_fn(d, |i, j| {
            i == 0 || (i + 1 < d && j == i + 1) || (i == d - 1 && j == 0)
        });
        Ok(Self { shape })
    }

    pub fn shape(&self) -> &BinaryMatrix {
        &self.shape
    }

    pub fn d(&self) -> usize {
        self.shape.dim()
    }

    /// Generators allowed after a node whose last letter is `t`.
    pub fn children(&self, t: usize) -> impl Iterator<Item = usize> + '_ {
        self.shape.row_ones(t)
    }

    pub fn allows(&self, from: usize, to: usize) -> bool {
        self.shape.get(from, to)
    }

    pub fn full_rows(&self) -> Vec<usize> {
        (0..self.d()).filter(|&i| self.shape.is_full_row(i)).collect()
    }

    pub fn check_generator(&self, t: usize) -> Result<()> {
        if t >= self.d() {
            return Err(Error::GeneratorOutOfRange { index: t, d: self.d() });
        }
        Ok(())
    }

    pub fn is_admissible(&self, word: &[usize]) -> bool {
        word.iter().all(|&t| t < self.d()) && word.windows(2).all(|w| self.allows(w[0], w[1]))
    }

    /// `nu_depth(t)`: nodes in the depth-`depth` follower tree of a node of
    /// type `t`, the node included. `nu_{-1} = 0`.
    pub fn subtree_nodes(&self, t: usize, depth: i64) -> BigUint {
        if depth < 0 {
            return BigUint::zero();
        }
        self.subtree_node_table(depth as usize)[depth as usize][t].clone()
    }

    /// `table[r][t] = nu_r(t)` for `0 <= r <= max_depth`.
    pub fn subtree_node_table(&self, max_depth: usize) -> Vec<Vec<BigUint>> {
        let d = self.d();
        let mut table = vec![vec![BigUint::one(); d]];
        for r in 1..=max_depth {
            let prev = &table[r - 1];
            let layer = (0..d)
                .map(|t| self.children(t).fold(BigUint::one(), |acc, c| acc + &prev[c]))
                .collect();
            table.push(layer);
        }
        table
    }

    /// `|Delta_n|`: admissible words of length at most `n`.
    pub fn delta_size(&self, n: usize) -> BigUint {
        if n == 0 {
            return BigUint::one();
        }
        let table = self.subtree_node_table(n - 1);
        table[n - 1].iter().fold(BigUint::one(), |acc, v| acc + v)
    }

    /// All admissible words of exactly `len` letters, in lexicographic order.
    pub fn words_of_length(&self, len: usize) -> Vec<Word> {
        let mut layer: Vec<Word> = vec![vec![]];
        for _ in 0..len {
            let mut next = Vec::new();
            for w in &layer {
                let kids: Vec<usize> = match w.last() {
                    None => (0..self.d()).collect(),
                    Some(&t) => self.children(t).collect(),
                };
                for c in kids {
                    let mut x = w.clone();
                    x.push(c);
                    next.push(x);
                }
            }
            layer = next;
        }
        layer
    }

    /// `F_M(u)` is the whole tree iff every generator may follow the last letter.
    pub fn follower_is_full(&self, u: &[usize]) -> Result<bool> {
        let &last = u.last().ok_or(Error::EmptyWord)?;
        if !self.is_admissible(u) {
            return Err(Error::InadmissibleWord(u.to_vec()));
        }
        Ok(self.shape.is_full_row(last))
    }

    /// Complete-prefix-set test: `s` is an antichain under the prefix order
    /// (distinct elements only) and every admissible word of length
    /// `max |v|` has exactly one element of `s` as a prefix.
    pub fn is_cps(&self, s: &[Word]) -> Result<bool> {
        if s.is_empty() {
            return Err(Error::EmptyWordSet);
        }
        if let Some(bad) = s.iter().find(|v| !self.is_admissible(v)) {
            return Err(Error::InadmissibleWord(bad.clone()));
        }
        let set: BTreeSet<&Word> = s.iter().collect();
        for v in &set {
            for w in &set {
                if v != w && w.starts_with(v) {
                    return Ok(false);
                }
            }
        }
        let max_len = set.iter().map(|v| v.len()).max().unwrap_or(0);
        Ok(self
            .words_of_length(max_len)
            .iter()
            .all(|u| set.iter().filter(|v| u.starts_with(v)).count() == 1))
    }

    /// Searches for the full-row set and a symbol ordering under which every
    /// non-full row is zero on and below its own position.
    pub fn is_complete_recursive(&self) -> Result<CompleteRecursiveWitness> {
        let d = self.d();
        if d > CRT_SEARCH_LIMIT {
            return Err(Error::SearchBoundExceeded(d));
        }
        let full: Vec<bool> = (0..d).map(|i| self.shape.is_full_row(i)).collect();
        let full_rows: BTreeSet<usize> = (0..d).filter(|&i| full[i]).collect();
        if full_rows.is_empty() {
            return Ok(CompleteRecursiveWitness { is_crt: false, full_rows, ordering: None });
        }
        let mut placed = Vec::with_capacity(d);
        let mut dead = HashSet::new();
        let found = self.place(&full, &mut placed, 0, &mut dead);
        Ok(CompleteRecursiveWitness {
            is_crt: found,
            full_rows,
            ordering: found.then_some(placed),
        })
    }

    // Backtracking over placements. Non-full symbols are placed first since
    // full rows carry no constraint; a non-full symbol may be placed only if
    // none of its successors (itself included) is already placed. Failed
    // placement sets are memoized by bitmask.
    fn place(
        &self,
        full: &[bool],
        placed: &mut Vec<usize>,
        mask: u32,
        dead: &mut HashSet<u32>,
    ) -> bool {
        let d = self.d();
        if placed.len() == d {
            return true;
        }
        if dead.contains(&mask) {
            return false;
        }
        let remaining_nonfull = (0..d).any(|x| !full[x] && mask >> x & 1 == 0);
        for x in 0..d {
            if mask >> x & 1 == 1 || full[x] == remaining_nonfull {
                continue;
            }
            if !full[x] && self.children(x).any(|c| c == x || mask >> c & 1 == 1) {
                continue;
            }
            placed.push(x);
            if self.place(full, placed, mask | 1 << x, dead) {
                return true;
            }
            placed.pop();
        }
        dead.insert(mask);
        false
    }
}

/// Evidence for (or against) the complete-recursive characterization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompleteRecursiveWitness {
    pub is_crt: bool,
    /// Generators whose rows of `M` are full.
    pub full_rows: BTreeSet<usize>,
    /// `ordering[p]` is the generator placed at position `p`.
    pub ordering: Option<Vec<usize>>,
}

impl CompleteRecursiveWitness {
    /// Re-checks the zero pattern of the reordered shape.
    pub fn verify(&self, tree: &MarkovTree) -> bool {
        let Some(order) = &self.ordering else {
            return false;
        };
        let re = tree.shape().reorder(order);
        (0..tree.d()).all(|p| {
            self.full_rows.contains(&order[p]) || (0..=p).all(|q| !re.get(p, q))
        })
    }
}

/// Builds a complete prefix set from a witness: the admissible words whose
/// last letter is a full-row generator and no earlier letter is. Returns
/// `None` if such words do not close up within depth `d`.
pub fn cps_from_witness(tree: &MarkovTree, witness: &CompleteRecursiveWitness) -> Option<Vec<Word>> {
    if !witness.is_crt {
        return None;
    }
    let mut out = Vec::new();
    let mut stack: Vec<Word> = (0..tree.d()).rev().map(|t| vec![t]).collect();
    while let Some(w) = stack.pop() {
        let last = *w.last().unwrap();
        if witness.full_rows.contains(&last) {
            out.push(w);
            continue;
        }
        if w.len() >= tree.d() {
            return None;
        }
        for c in tree.children(last).collect::<Vec<_>>().into_iter().rev() {
            let mut x = w.clone();
            x.push(c);
            stack.push(x);
        }
    }
    Some(out)
}
