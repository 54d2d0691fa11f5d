//! Eventually periodic rays and the strip pieces hanging off them.
//!
//! A ray `p = (p_0, p_1, ...)` starts at the root `p_0` and follows the
//! letters `q_1 q_2 ...` of `prefix . period . period . ...`, so that
//! `p_j = q_1 ... q_j`. The strip piece at `p_j` consists of `p_j` itself and,
//! for every allowed child of `p_j` not on the ray, that child with its
//! follower subtree truncated at depth `n - 1` below it. Absolute depths in
//! the piece therefore reach `j + n`.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::{MarkovTree, Word};

/// Node budget for explicit strip regions.
pub const REGION_GUARD: u128 = 1_000_000;

/// An eventually periodic ray: `prefix` then `period` repeated forever.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Ray {
    prefix: Word,
    period: Word,
}

impl Ray {
    /// Checks that `prefix . period . period` is admissible, which covers
    /// every junction of the infinite word.
    pub fn new(tree: &MarkovTree, prefix: Word, period: Word) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::InadmissibleRay("empty period".into()));
        }
        let mut word = prefix.clone();
        word.extend(&period);
        word.extend(&period);
        if let Some(&t) = word.iter().find(|&&t| t >= tree.d()) {
            return Err(Error::InadmissibleRay(format!("generator f{} not in tree (d = {})", t + 1, tree.d())));
        }
        if let Some(w) = word.windows(2).find(|w| !tree.allows(w[0], w[1])) {
            return Err(Error::InadmissibleRay(format!(
                "f{} cannot follow f{} (M[{}][{}] = 0)",
                w[1] + 1,
                w[0] + 1,
                w[0] + 1,
                w[1] + 1
            )));
        }
        Ok(Self { prefix, period })
    }

    pub fn prefix(&self) -> &[usize] {
        &self.prefix
    }

    pub fn period(&self) -> &[usize] {
        &self.period
    }

    /// Prefix length `c`.
    pub fn c(&self) -> usize {
        self.prefix.len()
    }

    /// Period length `l`.
    pub fn ell(&self) -> usize {
        self.period.len()
    }

    /// The letter `q_j` for `j >= 1`.
    pub fn letter(&self, j: usize) -> usize {
        assert!(j >= 1, "letters are indexed from 1");
        let c = self.c();
        if j <= c {
            self.prefix[j - 1]
        } else {
            self.period[(j - c - 1) % self.ell()]
        }
    }

    /// The node `p_j = q_1 ... q_j`.
    pub fn node(&self, j: usize) -> Word {
        (1..=j).map(|i| self.letter(i)).collect()
    }

    /// Shorthand such as `f1^inf` or `f2(f1 f2)^inf`.
    pub fn shorthand(&self) -> String {
        RaySpec::from(self).to_string()
    }
}

impl fmt::Debug for Ray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ray({})", self.shorthand())
    }
}

/// The 1-based wire form of a ray: `{"prefix": [..], "period": [..]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RaySpec {
    #[serde(default)]
    pub prefix: Vec<usize>,
    pub period: Vec<usize>,
}

impl RaySpec {
    /// Parses `f1^inf`, `f2(f1 f2)^inf`, `f1f2(f3)^inf` and similar.
    pub fn parse(s: &str) -> Result<Self> {
        let err = |msg: &str| Error::Parse(format!("ray '{s}': {msg}"));
        let body = s.trim().strip_suffix("^inf").ok_or_else(|| err("missing '^inf' suffix"))?;
        let body = body.trim_end();
        let (prefix_str, period_str) = if let Some(inner) = body.strip_suffix(')') {
            let open = inner.rfind('(').ok_or_else(|| err("unbalanced parenthesis"))?;
            (&inner[..open], &inner[open + 1..])
        } else {
            let split = body.rfind('f').ok_or_else(|| err("no period letter"))?;
            (&body[..split], &body[split..])
        };
        let prefix = parse_letters(prefix_str).map_err(|m| err(&m))?;
        let period = parse_letters(period_str).map_err(|m| err(&m))?;
        if period.is_empty() {
            return Err(err("empty period"));
        }
        Ok(Self { prefix, period })
    }

    pub fn to_ray(&self, tree: &MarkovTree) -> Result<Ray> {
        let zero_based = |v: &[usize]| -> Result<Word> {
            v.iter()
                .map(|&x| {
                    if x == 0 {
                        Err(Error::InadmissibleRay("generator indices are 1-based".into()))
                    } else {
                        Ok(x - 1)
                    }
                })
                .collect()
        };
        Ray::new(tree, zero_based(&self.prefix)?, zero_based(&self.period)?)
    }
}

fn parse_letters(s: &str) -> std::result::Result<Vec<usize>, String> {
    let mut out = Vec::new();
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    for tok in compact.split('f').skip(1) {
        let v: usize = tok.parse().map_err(|_| format!("bad letter 'f{tok}'"))?;
        out.push(v);
    }
    if !compact.is_empty() && !compact.starts_with('f') {
        return Err(format!("unexpected '{compact}'"));
    }
    Ok(out)
}

impl From<&Ray> for RaySpec {
    fn from(r: &Ray) -> Self {
        Self {
            prefix: r.prefix.iter().map(|x| x + 1).collect(),
            period: r.period.iter().map(|x| x + 1).collect(),
        }
    }
}

impl fmt::Display for RaySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let letters = |v: &[usize], sep: &str| {
            v.iter().map(|x| format!("f{x}")).collect::<Vec<_>>().join(sep)
        };
        write!(f, "{}", letters(&self.prefix, ""))?;
        if self.period.len() == 1 {
            write!(f, "f{}^inf", self.period[0])
        } else {
            write!(f, "({})^inf", letters(&self.period, " "))
        }
    }
}

/// Geometry of the strip piece at `p_j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct StripProfile {
    pub node_index: usize,
    /// Last letter of `p_j`, or `None` at the root.
    pub node_type: Option<usize>,
    /// The letter `q_{j+1}` leading to the next path node.
    pub on_path_child: usize,
    /// Allowed children of `p_j` other than the path child, ascending.
    pub off_branches: Vec<usize>,
}

impl StripProfile {
    /// Everything except the index; two pieces with equal shape are
    /// translates of each other.
    pub fn shape(&self) -> (Option<usize>, usize, &[usize]) {
        (self.node_type, self.on_path_child, &self.off_branches)
    }
}

/// Profile of the strip piece at index `j`. For `j >= c` it depends only on
/// `(j - c) mod l`.
pub fn step_profile(tree: &MarkovTree, ray: &Ray, j: usize) -> StripProfile {
    let next = ray.letter(j + 1);
    let (node_type, candidates): (Option<usize>, Vec<usize>) = if j == 0 {
        (None, (0..tree.d()).collect())
    } else {
        let t = ray.letter(j);
        (Some(t), tree.children(t).collect())
    };
    StripProfile {
        node_index: j,
        node_type,
        on_path_child: next,
        off_branches: candidates.into_iter().filter(|&t| t != next).collect(),
    }
}

/// `lambda^n` given a node table `nu[r][t]` covering depth `n - 1`.
pub fn lambda_from_table(table: &[Vec<BigUint>], profile: &StripProfile, n: usize) -> BigUint {
    assert!(n >= 1 && table.len() >= n);
    profile
        .off_branches
        .iter()
        .fold(BigUint::one(), |acc, &t| acc + &table[n - 1][t])
}

/// `lambda^n(p_j) = 1 + sum over off-branches t of nu_{n-1}(t)`.
pub fn lambda_strip(tree: &MarkovTree, profile: &StripProfile, n: usize) -> Result<BigUint> {
    if n == 0 {
        return Err(Error::Precondition("strip width n must be at least 1".into()));
    }
    Ok(lambda_from_table(&tree.subtree_node_table(n - 1), profile, n))
}

/// Checks that profiles repeat with the period: `profile(j) ~ profile(j + l)`
/// for `c + 1 <= j <= horizon - l`, comparing shapes and `lambda^n`.
pub fn check_profile_periodicity(tree: &MarkovTree, ray: &Ray, n: usize, horizon: usize) -> Result<bool> {
    let (c, l) = (ray.c(), ray.ell());
    if horizon < c + 2 * l {
        return Err(Error::Precondition(format!("horizon {horizon} < c + 2l = {}", c + 2 * l)));
    }
    if n == 0 {
        return Err(Error::Precondition("strip width n must be at least 1".into()));
    }
    let table = tree.subtree_node_table(n - 1);
    Ok((c + 1..=horizon - l).all(|j| {
        let a = step_profile(tree, ray, j);
        let b = step_profile(tree, ray, j + l);
        a.shape() == b.shape() && lambda_from_table(&table, &a, n) == lambda_from_table(&table, &b, n)
    }))
}

/// Total size of `Lambda_m^n(p)`, the union of the first `m` pieces.
pub fn strip_size(tree: &MarkovTree, ray: &Ray, n: usize, m: usize) -> Result<BigUint> {
    if n == 0 {
        return Err(Error::Precondition("strip width n must be at least 1".into()));
    }
    let table = tree.subtree_node_table(n - 1);
    Ok((0..m).fold(BigUint::default(), |acc, j| {
        acc + lambda_from_table(&table, &step_profile(tree, ray, j), n)
    }))
}

/// The nodes of `Lambda_m^n(p)` as explicit words, piece by piece.
pub fn strip_region(tree: &MarkovTree, ray: &Ray, n: usize, m: usize) -> Result<Vec<Word>> {
    let size = strip_size(tree, ray, n, m)?;
    let size = size.to_u128().unwrap_or(u128::MAX);
    if size > REGION_GUARD {
        return Err(Error::SizeGuard { what: "strip region nodes", size, limit: REGION_GUARD });
    }
    let mut out = Vec::with_capacity(size as usize);
    for j in 0..m {
        let base = ray.node(j);
        out.push(base.clone());
        for t in step_profile(tree, ray, j).off_branches {
            let mut stack = vec![{
                let mut w = base.clone();
                w.push(t);
                w
            }];
            while let Some(w) = stack.pop() {
                if w.len() < j + n {
                    let last = *w.last().unwrap();
                    for c in tree.children(last) {
                        let mut x = w.clone();
                        x.push(c);
                        stack.push(x);
                    }
                }
                out.push(w);
            }
        }
    }
    Ok(out)
}
