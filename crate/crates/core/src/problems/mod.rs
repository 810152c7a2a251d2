//! Problem representation and objective evaluation.
//!
//! A [`Problem`] is a symmetric coupling matrix with zero diagonal, stored as
//! one [`Edge`] per unordered pair `i < j`. The Ising objective is
//!
//! ```text
//! C(z) = 1/2 sum_{i,j} W_ij z_i z_j = sum_{i<j} W_ij z_i z_j
//! ```
//!
//! and the max-cut value is `1/4 sum_{i,j} W_ij (1 - z_i z_j)`. Both double
//! sums run over ordered pairs; the unordered storage makes the factor of two
//! explicit in exactly one place.

mod generators;
mod io;
mod prune;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;

pub use generators::{gen_random_regular, gen_sk};
pub use io::{
    read_problem, read_problem_str, read_spins, read_spins_str, write_problem, write_problem_string, write_spins,
    write_spins_string,
};
pub use prune::{
    load_mpes, parse_mpes_str, prune_dangling, read_mpes, reconstruct_solution, Component,
    MpesGrid, PruneMap, Removal,
};

/// Entries with magnitude below this are treated as absent when counting
/// terms or building correlation matrices.
pub const SPARSITY_THRESHOLD: f64 = 1e-12;

/// The family a problem belongs to. Decides, among other things, whether the
/// approximation ratio is taken in cut form or in Ising form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProblemKind {
    MaxCutRegular,
    Sk,
    Mpes,
    /// Negated QAOA correlation matrix at depth `p`.
    Preconditioned(usize),
    IdealInfiniteDepth,
    Custom,
}

impl ProblemKind {
    /// Max-cut families are scored by cut value, the others by Ising energy.
    pub fn is_max_cut(self) -> bool {
        matches!(self, ProblemKind::MaxCutRegular | ProblemKind::Mpes)
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemKind::MaxCutRegular => f.write_str("maxcut-regular"),
            ProblemKind::Sk => f.write_str("sk"),
            ProblemKind::Mpes => f.write_str("mpes"),
            ProblemKind::Preconditioned(p) => write!(f, "preconditioned:{p}"),
            ProblemKind::IdealInfiniteDepth => f.write_str("ideal"),
            ProblemKind::Custom => f.write_str("custom"),
        }
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "maxcut-regular" | "regular" => ProblemKind::MaxCutRegular,
            "sk" => ProblemKind::Sk,
            "mpes" => ProblemKind::Mpes,
            "ideal" => ProblemKind::IdealInfiniteDepth,
            "custom" => ProblemKind::Custom,
            other => match other.strip_prefix("preconditioned:") {
                Some(p) => ProblemKind::Preconditioned(
                    p.parse()
                        .map_err(|_| Error::invalid(format!("bad layer count in kind '{s}'")))?,
                ),
                None => return Err(Error::invalid(format!("unknown problem kind '{s}'"))),
            },
        })
    }
}

/// One stored interaction, always with `i < j`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

/// A sparse symmetric Ising problem over `n_vars` spins.
#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    n_vars: usize,
    edges: Vec<Edge>,
    kind: ProblemKind,
    provenance: BTreeMap<String, String>,
}

impl Problem {
    /// Builds a problem from `(i, j, w)` triples in any orientation.
    ///
    /// Self-loops and out-of-range indices are rejected. A pair listed twice
    /// must carry the same weight both times.
    pub fn new(
        n_vars: usize,
        kind: ProblemKind,
        entries: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut edges = Vec::new();
        for (a, b, w) in entries {
            let (i, j) = check_pair(n_vars, a, b)?;
            if !w.is_finite() {
                return Err(Error::Integrity(format!("non-finite weight on ({a}, {b})")));
            }
            edges.push(Edge { i, j, weight: w });
        }
        edges.sort_by_key(|e| (e.i, e.j));
        let mut deduped: Vec<Edge> = Vec::with_capacity(edges.len());
        for e in edges {
            match deduped.last() {
                Some(last) if last.i == e.i && last.j == e.j => {
                    if last.weight.to_bits() != e.weight.to_bits() {
                        return Err(Error::Integrity(format!(
                            "pair ({}, {}) listed with conflicting weights {} and {}",
                            e.i, e.j, last.weight, e.weight
                        )));
                    }
                }
                _ => deduped.push(e),
            }
        }
        Ok(Problem {
            n_vars,
            edges: deduped,
            kind,
            provenance: BTreeMap::new(),
        })
    }

    /// Like [`Problem::new`], but repeated pairs are summed instead of
    /// rejected.
    pub fn from_summed(
        n_vars: usize,
        kind: ProblemKind,
        entries: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (a, b, w) in entries {
            let key = check_pair(n_vars, a, b)?;
            *acc.entry(key).or_insert(0.0) += w;
        }
        Problem::new(n_vars, kind, acc.into_iter().map(|((i, j), w)| (i, j, w)))
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    /// Stored pairs sorted by `(i, j)`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn n_terms(&self) -> usize {
        self.edges.len()
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn provenance(&self) -> &BTreeMap<String, String> {
        &self.provenance
    }

    pub fn with_kind(mut self, kind: ProblemKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn with_provenance(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.provenance.insert(key.into(), value.to_string());
        self
    }

    pub fn set_provenance(&mut self, key: impl Into<String>, value: impl ToString) {
        self.provenance.insert(key.into(), value.to_string());
    }

    /// `W_ij`, zero when the pair is absent or `i == j`.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        if a == b {
            return 0.0;
        }
        self.edges
            .binary_search_by_key(&(a, b), |e| (e.i, e.j))
            .map(|k| self.edges[k].weight)
            .unwrap_or(0.0)
    }

    /// Sum of `|W_ij|` over unordered pairs.
    pub fn total_abs_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight.abs()).sum()
    }

    /// Sum of `W_ij` over unordered pairs.
    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    pub fn adjacency(&self) -> Adjacency {
        Adjacency::new(self)
    }

    /// Applies `f` to every weight, keeping the sparsity pattern.
    pub fn map_weights(&self, mut f: impl FnMut(f64) -> f64) -> Problem {
        let mut out = self.clone();
        for e in &mut out.edges {
            e.weight = f(e.weight);
        }
        out
    }

    /// Keeps the sub-problem induced by `vertices`, relabelled in the given
    /// order.
    pub fn induced(&self, vertices: &[usize]) -> Result<Problem> {
        let mut local = vec![usize::MAX; self.n_vars];
        for (k, &v) in vertices.iter().enumerate() {
            if v >= self.n_vars {
                return Err(Error::Index {
                    index: v,
                    n: self.n_vars,
                });
            }
            local[v] = k;
        }
        let entries = self
            .edges
            .iter()
            .filter(|e| local[e.i] != usize::MAX && local[e.j] != usize::MAX)
            .map(|e| (local[e.i], local[e.j], e.weight));
        let mut sub = Problem::new(vertices.len(), self.kind, entries)?;
        sub.provenance = self.provenance.clone();
        Ok(sub)
    }

    /// Dense `N x N` matrix `W` with both triangles filled.
    pub fn dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.n_vars, self.n_vars);
        for e in &self.edges {
            m[(e.i, e.j)] = e.weight;
            m[(e.j, e.i)] = e.weight;
        }
        m
    }
}

fn check_pair(n: usize, a: usize, b: usize) -> Result<(usize, usize)> {
    for idx in [a, b] {
        if idx >= n {
            return Err(Error::Index { index: idx, n });
        }
    }
    if a == b {
        return Err(Error::Integrity(format!("self-loop on variable {a}")));
    }
    Ok(if a < b { (a, b) } else { (b, a) })
}

/// Compressed adjacency lists with both orientations of every edge.
#[derive(Clone, Debug)]
pub struct Adjacency {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
}

impl Adjacency {
    fn new(problem: &Problem) -> Self {
        let n = problem.n_vars;
        let mut degree = vec![0usize; n];
        for e in &problem.edges {
            degree[e.i] += 1;
            degree[e.j] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let m = offsets[n];
        let mut targets = vec![0; m];
        let mut weights = vec![0.0; m];
        for e in &problem.edges {
            targets[fill[e.i]] = e.j;
            weights[fill[e.i]] = e.weight;
            fill[e.i] += 1;
            targets[fill[e.j]] = e.i;
            weights[fill[e.j]] = e.weight;
            fill[e.j] += 1;
        }
        Adjacency {
            offsets,
            targets,
            weights,
        }
    }

    pub fn n_vars(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n_vars()).map(|i| self.degree(i)).max().unwrap_or(0)
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn weights(&self, i: usize) -> &[f64] {
        &self.weights[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn iter(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.neighbors(i)
            .iter()
            .copied()
            .zip(self.weights(i).iter().copied())
    }

    /// Local fields `f_i = sum_j W_ij z_j`.
    pub fn local_fields(&self, z: &[i8]) -> Vec<f64> {
        (0..self.n_vars())
            .map(|i| self.iter(i).map(|(j, w)| w * f64::from(z[j])).sum())
            .collect()
    }
}

/// An assignment of `+1`/`-1` to every variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct SpinVector(Vec<i8>);

impl SpinVector {
    pub fn new(values: Vec<i8>) -> Result<Self> {
        if let Some((k, v)) = values.iter().enumerate().find(|(_, v)| v.abs() != 1) {
            return Err(Error::invalid(format!("spin {k} has value {v}, expected +1 or -1")));
        }
        Ok(SpinVector(values))
    }

    pub fn all_up(n: usize) -> Self {
        SpinVector(vec![1; n])
    }

    /// Spin `k` is `1 - 2 * bit_k(index)`.
    pub fn from_index(index: u64, n: usize) -> Self {
        SpinVector((0..n).map(|k| 1 - 2 * ((index >> k) & 1) as i8).collect())
    }

    /// Inverse of [`SpinVector::from_index`].
    pub fn to_index(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &s)| s < 0)
            .fold(0, |acc, (k, _)| acc | (1 << k))
    }

    pub fn random(n: usize, rng: &mut Rng) -> Self {
        SpinVector((0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn get(&self, i: usize) -> i8 {
        self.0[i]
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] = -self.0[i];
    }

    pub fn negated(&self) -> Self {
        SpinVector(self.0.iter().map(|s| -s).collect())
    }

    /// Equal to `other` up to the global sign flip.
    pub fn equals_up_to_flip(&self, other: &SpinVector) -> bool {
        self == other || *self == other.negated()
    }

    pub(crate) fn from_raw(values: Vec<i8>) -> Self {
        debug_assert!(values.iter().all(|v| v.abs() == 1));
        SpinVector(values)
    }
}

impl TryFrom<Vec<i8>> for SpinVector {
    type Error = Error;
    fn try_from(v: Vec<i8>) -> Result<Self> {
        SpinVector::new(v)
    }
}

impl From<SpinVector> for Vec<i8> {
    fn from(z: SpinVector) -> Self {
        z.0
    }
}

fn check_len(problem: &Problem, z: &SpinVector) -> Result<()> {
    if z.len() != problem.n_vars {
        return Err(Error::Dimension {
            expected: problem.n_vars,
            actual: z.len(),
        });
    }
    Ok(())
}

/// Ising objective `sum_{i<j} W_ij z_i z_j`.
pub fn evaluate_objective(problem: &Problem, z: &SpinVector) -> Result<f64> {
    check_len(problem, z)?;
    Ok(objective_unchecked(problem, z.as_slice()))
}

pub(crate) fn objective_unchecked(problem: &Problem, z: &[i8]) -> f64 {
    problem
        .edges
        .iter()
        .map(|e| e.weight * f64::from(z[e.i] * z[e.j]))
        .sum()
}

/// Cut value `1/4 sum_{i,j} W_ij (1 - z_i z_j)`, i.e. the total weight of
/// pairs whose spins disagree.
pub fn evaluate_cut(problem: &Problem, z: &SpinVector) -> Result<f64> {
    check_len(problem, z)?;
    let z = z.as_slice();
    Ok(problem
        .edges
        .iter()
        .filter(|e| z[e.i] != z[e.j])
        .map(|e| e.weight)
        .sum())
}
