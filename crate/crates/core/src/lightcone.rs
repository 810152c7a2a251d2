//! Light-cone decomposition of pair correlations on sparse problems.
//!
//! After `p` layers, `<Z_i Z_j>` only depends on the gates inside the causal
//! cone of the two qubits: every vertex within distance `p` of `i` or `j`,
//! and every edge with at least one endpoint within distance `p - 1`. Edges
//! joining two vertices on the outer shell act after the operators have
//! stopped spreading and cancel. When the two radius-`p` balls do not meet
//! (distance above `2p`) the correlation factorizes into `<Z_i><Z_j> = 0`.
//!
//! Most cones of a large random regular graph are trees. Isomorphic marked
//! trees share their correlation, so trees are keyed by a canonical label and
//! emulated once. Trees are also emulated in their canonical vertex order,
//! which makes cached and uncached results bitwise identical.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::problems::{Adjacency, Problem, ProblemKind, SPARSITY_THRESHOLD};
use crate::qaoa::{correlation, evolve, sample_bitstrings, AngleSchedule, CostTable, DEFAULT_QUBIT_CAP};
use crate::rng::derive_seed;

/// The causal cone of a pair, relabelled to local indices.
#[derive(Clone, Debug, PartialEq)]
pub struct LightconeSubgraph {
    /// Original index of each local vertex.
    pub vertices: Vec<usize>,
    /// Edges in local indices.
    pub edges: Vec<(usize, usize, f64)>,
    pub i_local: usize,
    pub j_local: usize,
    /// Canonical label of the marked tree; `None` for graphs with cycles.
    pub canonical_key: Option<String>,
}

impl LightconeSubgraph {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn to_problem(&self) -> Result<Problem> {
        Problem::new(self.vertices.len(), ProblemKind::Custom, self.edges.iter().copied())
    }
}

/// Outcome of a cone query.
#[derive(Clone, Debug, PartialEq)]
pub enum Lightcone {
    /// The radius-`p` balls do not intersect; the correlation is zero.
    Disjoint,
    Subgraph(LightconeSubgraph),
}

/// Connected with exactly one edge fewer than vertices.
pub fn is_tree(sub: &LightconeSubgraph) -> bool {
    let n = sub.vertices.len();
    if n == 0 || sub.edges.len() + 1 != n {
        return false;
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(a, b, _) in &sub.edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra == rb {
            return false;
        }
        parent[ra] = rb;
    }
    true
}

/// The vertex-count bound for a pair cone at depth `p` and max degree `d`.
pub fn subgraph_size_bound(d: usize, p: usize, n: usize) -> usize {
    let bound = match d {
        0 => 2,
        1 => 2,
        2 => 1 + 4 * p,
        _ => {
            let d = d as u128;
            let grow = (d - 1).checked_pow(p as u32).unwrap_or(u128::MAX / 4);
            let b = 1 + 2 * d * (grow - 1) / (d - 2);
            b.min(usize::MAX as u128) as usize
        }
    };
    bound.min(n)
}

/// Breadth-first ball of radius `r`, as `(vertex, distance)` in BFS order.
fn ball(adj: &Adjacency, center: usize, r: usize, dist: &mut [u32], touched: &mut Vec<usize>) -> Vec<(usize, u32)> {
    let mut out = vec![(center, 0u32)];
    dist[center] = 0;
    touched.push(center);
    let mut k = 0;
    while k < out.len() {
        let (v, d) = out[k];
        k += 1;
        if d as usize == r {
            continue;
        }
        for &u in adj.neighbors(v) {
            if dist[u] == u32::MAX {
                dist[u] = d + 1;
                touched.push(u);
                out.push((u, d + 1));
            }
        }
    }
    out
}

/// Cone extraction with reusable scratch space.
pub struct LightconeFinder<'a> {
    adj: Adjacency,
    problem: &'a Problem,
    p: usize,
    balls: Vec<Vec<(usize, u32)>>,
    local: Vec<usize>,
}

impl<'a> LightconeFinder<'a> {
    pub fn new(problem: &'a Problem, p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::invalid("light cones need p >= 1"));
        }
        let adj = problem.adjacency();
        let n = problem.n_vars();
        let mut dist = vec![u32::MAX; n];
        let mut touched = Vec::new();
        let balls = (0..n)
            .map(|v| {
                let b = ball(&adj, v, p, &mut dist, &mut touched);
                for &t in &touched {
                    dist[t] = u32::MAX;
                }
                touched.clear();
                b
            })
            .collect();
        Ok(LightconeFinder {
            adj,
            problem,
            p,
            balls,
            local: vec![usize::MAX; n],
        })
    }

    /// All pairs `i < j` at graph distance at most `2p`.
    pub fn candidate_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.problem.n_vars();
        let mut dist = vec![u32::MAX; n];
        let mut touched = Vec::new();
        let mut pairs = Vec::new();
        for i in 0..n {
            let reach = ball(&self.adj, i, 2 * self.p, &mut dist, &mut touched);
            let mut js: Vec<usize> = reach.iter().map(|&(v, _)| v).filter(|&v| v > i).collect();
            js.sort_unstable();
            pairs.extend(js.into_iter().map(|j| (i, j)));
            for &t in &touched {
                dist[t] = u32::MAX;
            }
            touched.clear();
        }
        pairs
    }

    pub fn subgraph(&mut self, i: usize, j: usize) -> Result<Lightcone> {
        let n = self.problem.n_vars();
        for idx in [i, j] {
            if idx >= n {
                return Err(Error::Index { index: idx, n });
            }
        }
        if i == j {
            return Err(Error::invalid("a pair cone needs i != j"));
        }
        let p = self.p as u32;
        // min distance to {i, j}; a vertex is shared when it lies in both balls
        let mut depth: HashMap<usize, u32> = HashMap::new();
        let mut shared = false;
        let mut order = Vec::new();
        for &(v, d) in &self.balls[i] {
            depth.insert(v, d);
            order.push(v);
        }
        for &(v, d) in &self.balls[j] {
            match depth.get_mut(&v) {
                Some(e) => {
                    shared = true;
                    *e = (*e).min(d);
                }
                None => {
                    depth.insert(v, d);
                    order.push(v);
                }
            }
        }
        if !shared {
            return Ok(Lightcone::Disjoint);
        }
        let mut edges = Vec::new();
        for (li, &v) in order.iter().enumerate() {
            self.local[v] = li;
        }
        for &v in &order {
            for (u, w) in self.adj.iter(v) {
                if v < u {
                    if let Some(&du) = depth.get(&u) {
                        if depth[&v] < p || du < p {
                            edges.push((self.local[v], self.local[u], w));
                        }
                    }
                }
            }
        }
        let (i_local, j_local) = (self.local[i], self.local[j]);
        for &v in &order {
            self.local[v] = usize::MAX;
        }
        let mut sub = LightconeSubgraph {
            vertices: order,
            edges,
            i_local,
            j_local,
            canonical_key: None,
        };
        if is_tree(&sub) {
            sub = canonicalize_tree(&sub);
        }
        Ok(Lightcone::Subgraph(sub))
    }
}

/// Light-cone subgraph of the pair `(i, j)` at depth `p`.
pub fn lightcone_subgraph(problem: &Problem, i: usize, j: usize, p: usize) -> Result<Lightcone> {
    LightconeFinder::new(problem, p)?.subgraph(i, j)
}

/// Rewrites a tree cone in canonical vertex order and attaches its key.
///
/// The key is an AHU-style nested label of the tree rooted at one marked
/// vertex, with the other marked vertex flagged and edge weights (as raw
/// bits) prefixed to child labels. Rooting at `i` and at `j` both give valid
/// keys; the smaller one is kept so that swapping the pair changes nothing.
fn canonicalize_tree(sub: &LightconeSubgraph) -> LightconeSubgraph {
    let n = sub.vertices.len();
    let mut nbrs: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for &(a, b, w) in &sub.edges {
        nbrs[a].push((b, w));
        nbrs[b].push((a, w));
    }

    struct Rooted {
        key: String,
        order: Vec<usize>,
    }

    let root_at = |root: usize, other: usize| -> Rooted {
        // iterative post-order to get labels, children sorted by label
        let mut parent = vec![usize::MAX; n];
        let mut bfs = vec![root];
        parent[root] = root;
        let mut k = 0;
        while k < bfs.len() {
            let v = bfs[k];
            k += 1;
            for &(u, _) in &nbrs[v] {
                if parent[u] == usize::MAX {
                    parent[u] = v;
                    bfs.push(u);
                }
            }
        }
        let mut labels = vec![String::new(); n];
        let mut children: Vec<Vec<(String, usize)>> = vec![Vec::new(); n];
        for &v in bfs.iter().rev() {
            let mut kids = std::mem::take(&mut children[v]);
            kids.sort();
            let mark = if v == root {
                'a'
            } else if v == other {
                'b'
            } else {
                'o'
            };
            let mut label = String::with_capacity(2 + kids.iter().map(|(l, _)| l.len()).sum::<usize>());
            label.push('(');
            label.push(mark);
            for (l, _) in &kids {
                label.push_str(l);
            }
            label.push(')');
            if v != root {
                let w = nbrs[v].iter().find(|&&(u, _)| u == parent[v]).unwrap().1;
                let mut tagged = String::with_capacity(label.len() + 17);
                let _ = write!(tagged, "{:x}", w.to_bits());
                tagged.push_str(&label);
                children[parent[v]].push((tagged, v));
            }
            labels[v] = label;
            children[v] = kids;
        }
        // canonical order: pre-order walk through label-sorted children
        let mut order = Vec::with_capacity(n);
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            order.push(v);
            for (_, c) in children[v].iter().rev() {
                stack.push(*c);
            }
        }
        Rooted {
            key: std::mem::take(&mut labels[root]),
            order,
        }
    };

    let from_i = root_at(sub.i_local, sub.j_local);
    let from_j = root_at(sub.j_local, sub.i_local);
    let (best, root, other) = if from_j.key < from_i.key {
        (from_j, sub.j_local, sub.i_local)
    } else {
        (from_i, sub.i_local, sub.j_local)
    };
    let mut new_of = vec![0; n];
    for (k, &old) in best.order.iter().enumerate() {
        new_of[old] = k;
    }
    let mut edges: Vec<(usize, usize, f64)> = sub
        .edges
        .iter()
        .map(|&(a, b, w)| {
            let (x, y) = (new_of[a], new_of[b]);
            (x.min(y), x.max(y), w)
        })
        .collect();
    edges.sort_by_key(|&(a, b, _)| (a, b));
    // the root always lands on local 0; keep i/j roles of the caller
    let (i_new, j_new) = if root == sub.i_local {
        (new_of[root], new_of[other])
    } else {
        (new_of[other], new_of[root])
    };
    LightconeSubgraph {
        vertices: best.order.iter().map(|&old| sub.vertices[old]).collect(),
        edges,
        i_local: i_new,
        j_local: j_new,
        canonical_key: Some(best.key),
    }
}

/// Exact `<Z_i Z_j>` on a cone subgraph.
pub fn emulate_pair(sub: &LightconeSubgraph, angles: &AngleSchedule, cap: usize) -> Result<f64> {
    check_fits(sub, cap)?;
    let local = sub.to_problem()?;
    let table = CostTable::new(&local);
    let state = evolve(local.n_vars(), &table, angles, Some(&[sub.i_local, sub.j_local]));
    correlation(&state, sub.i_local, sub.j_local)
}

fn check_fits(sub: &LightconeSubgraph, cap: usize) -> Result<()> {
    if sub.vertices.len() > cap {
        return Err(Error::Capacity {
            what: format!(
                "light cone of pair ({}, {})",
                sub.vertices[sub.i_local], sub.vertices[sub.j_local]
            ),
            required: sub.vertices.len(),
            cap,
        });
    }
    Ok(())
}

/// Sample-based `<Z_i Z_j>` estimate on a cone subgraph.
fn sample_pair(sub: &LightconeSubgraph, angles: &AngleSchedule, k: usize, seed: u64, cap: usize) -> Result<f64> {
    check_fits(sub, cap)?;
    let local = sub.to_problem()?;
    let table = CostTable::new(&local);
    let state = evolve(local.n_vars(), &table, angles, None);
    let samples = sample_bitstrings(&state, k, seed)?;
    crate::precond::estimate_from_samples(&samples, sub.i_local, sub.j_local)
}

/// `<C>_p = sum_{i<j} W_ij <Z_i Z_j>` from edge cones, for angle searches on
/// problems too large for one state vector.
pub fn lightcone_energy(problem: &Problem, angles: &AngleSchedule, cap: usize) -> Result<f64> {
    let mut finder = LightconeFinder::new(problem, angles.p())?;
    let mut cache = CorrelationCache::default();
    let mut total = 0.0;
    for e in problem.edges() {
        let Lightcone::Subgraph(sub) = finder.subgraph(e.i, e.j)? else {
            unreachable!("edges are at distance 1");
        };
        let c = match &sub.canonical_key {
            Some(key) => match cache.get(key) {
                Some(c) => c,
                None => {
                    let c = emulate_pair(&sub, angles, cap)?;
                    cache.insert(key.clone(), c);
                    c
                }
            },
            None => emulate_pair(&sub, angles, cap)?,
        };
        total += e.weight * c;
    }
    Ok(total)
}

/// Exact emulation or finite sampling of each correlation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CorrelationMode {
    Exact,
    Sampled { k: usize, seed: u64 },
}

/// Knobs beyond the operation's required arguments.
#[derive(Clone, Debug)]
pub struct LightconeOptions {
    pub qubit_cap: usize,
    /// Reuse tree correlations across isomorphic cones.
    pub cache_trees: bool,
}

impl Default for LightconeOptions {
    fn default() -> Self {
        LightconeOptions {
            qubit_cap: DEFAULT_QUBIT_CAP,
            cache_trees: true,
        }
    }
}

/// Tree-correlation cache keyed by canonical label.
#[derive(Clone, Debug, Default)]
pub struct CorrelationCache {
    values: HashMap<String, f64>,
    pub hits: usize,
    pub misses: usize,
}

impl CorrelationCache {
    pub fn get(&mut self, key: &str) -> Option<f64> {
        let v = self.values.get(key).copied();
        if v.is_some() {
            self.hits += 1;
        }
        v
    }

    pub fn insert(&mut self, key: String, value: f64) {
        self.misses += 1;
        self.values.insert(key, value);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// What a correlation-matrix build did.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LightconeStats {
    /// Pairs within distance `2p`.
    pub pairs: usize,
    /// Pairs whose cone is a tree.
    pub tree_pairs: usize,
    /// Circuits actually emulated (tree cache misses plus every non-tree
    /// cone).
    pub emulations: usize,
    pub cache_hits: usize,
    pub max_subgraph: usize,
    /// Mean qubit count over the emulated circuits.
    pub mean_emulated_size: f64,
    /// Mean qubit count over all pairs.
    pub mean_pair_size: f64,
}

/// Negated correlation matrix `Z_ij = -<Z_i Z_j>_p` built pair by pair from
/// light cones.
pub fn build_correlation_matrix(
    problem: &Problem,
    p: usize,
    angles: &AngleSchedule,
    mode: CorrelationMode,
) -> Result<Problem> {
    Ok(build_correlation_matrix_with(problem, p, angles, mode, &LightconeOptions::default())?.0)
}

pub fn build_correlation_matrix_with(
    problem: &Problem,
    p: usize,
    angles: &AngleSchedule,
    mode: CorrelationMode,
    opts: &LightconeOptions,
) -> Result<(Problem, LightconeStats)> {
    if angles.p() != p {
        return Err(Error::invalid(format!("angle schedule has depth {}, expected {p}", angles.p())));
    }
    if let CorrelationMode::Sampled { k: 0, .. } = mode {
        return Err(Error::invalid("sampled mode needs K >= 1"));
    }
    let mut finder = LightconeFinder::new(problem, p)?;
    let pairs = finder.candidate_pairs();

    enum Job {
        Tree(usize),
        Own(usize),
    }
    let mut subs = Vec::with_capacity(pairs.len());
    let mut jobs = Vec::with_capacity(pairs.len());
    let mut tree_slot: HashMap<String, usize> = HashMap::new();
    let mut stats = LightconeStats {
        pairs: pairs.len(),
        ..Default::default()
    };
    let mut work: Vec<usize> = Vec::new(); // indices into subs to emulate
    let mut size_sum = 0usize;
    for &(i, j) in &pairs {
        let Lightcone::Subgraph(sub) = finder.subgraph(i, j)? else {
            unreachable!("candidate pairs are within 2p");
        };
        check_fits(&sub, opts.qubit_cap)?;
        stats.max_subgraph = stats.max_subgraph.max(sub.n_vertices());
        size_sum += sub.n_vertices();
        let idx = subs.len();
        let cacheable = matches!(mode, CorrelationMode::Exact) && opts.cache_trees;
        match (&sub.canonical_key, cacheable) {
            (Some(key), true) => {
                stats.tree_pairs += 1;
                match tree_slot.get(key) {
                    Some(&slot) => {
                        stats.cache_hits += 1;
                        jobs.push(Job::Tree(slot));
                    }
                    None => {
                        tree_slot.insert(key.clone(), work.len());
                        jobs.push(Job::Tree(work.len()));
                        work.push(idx);
                    }
                }
            }
            (key, _) => {
                if key.is_some() {
                    stats.tree_pairs += 1;
                }
                jobs.push(Job::Own(work.len()));
                work.push(idx);
            }
        }
        subs.push(sub);
    }
    stats.emulations = work.len();
    stats.mean_pair_size = if pairs.is_empty() { 0.0 } else { size_sum as f64 / pairs.len() as f64 };
    stats.mean_emulated_size = if work.is_empty() {
        0.0
    } else {
        work.iter().map(|&k| subs[k].n_vertices()).sum::<usize>() as f64 / work.len() as f64
    };

    let values: Vec<f64> = work
        .par_iter()
        .map(|&k| {
            let sub = &subs[k];
            match mode {
                CorrelationMode::Exact => emulate_pair(sub, angles, opts.qubit_cap),
                CorrelationMode::Sampled { k: shots, seed } => {
                    let (a, b) = (sub.vertices[sub.i_local], sub.vertices[sub.j_local]);
                    sample_pair(sub, angles, shots, derive_seed(seed, &[a as u64, b as u64]), opts.qubit_cap)
                }
            }
        })
        .collect::<Result<_>>()?;

    let entries = pairs.iter().zip(&jobs).filter_map(|(&(i, j), job)| {
        let c = match *job {
            Job::Tree(slot) | Job::Own(slot) => values[slot],
        };
        let z = -c;
        (z.abs() >= SPARSITY_THRESHOLD).then_some((i, j, z))
    });
    let out = Problem::new(problem.n_vars(), ProblemKind::Preconditioned(p), entries)?;
    Ok((out, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::gen_random_regular;
    use crate::qaoa::{all_correlations, apply_qaoa};

    fn ring(n: usize) -> Problem {
        Problem::new(n, ProblemKind::Custom, (0..n).map(|k| (k, (k + 1) % n, 1.0))).unwrap()
    }

    fn sub_from(n: usize, edges: &[(usize, usize)]) -> LightconeSubgraph {
        LightconeSubgraph {
            vertices: (0..n).collect(),
            edges: edges.iter().map(|&(a, b)| (a, b, 1.0)).collect(),
            i_local: 0,
            j_local: 1,
            canonical_key: None,
        }
    }

    #[test]
    fn tree_detection() {
        assert!(is_tree(&sub_from(5, &[(0, 1), (1, 2), (2, 3), (3, 4)])));
        assert!(!is_tree(&sub_from(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)])));
        assert!(!is_tree(&sub_from(4, &[(0, 1), (2, 3)])));
        // right edge count, but a cycle plus an isolated vertex
        assert!(!is_tree(&sub_from(4, &[(0, 1), (1, 2), (0, 2)])));
    }

    #[test]
    fn ring_far_pair_is_disjoint() {
        let r = ring(12);
        assert_eq!(lightcone_subgraph(&r, 0, 6, 1).unwrap(), Lightcone::Disjoint);
        assert_eq!(lightcone_subgraph(&r, 0, 3, 1).unwrap(), Lightcone::Disjoint);
        let Lightcone::Subgraph(s) = lightcone_subgraph(&r, 0, 2, 1).unwrap() else { panic!() };
        assert_eq!(s.n_vertices(), 5);
        assert!(s.n_vertices() <= subgraph_size_bound(2, 1, 12));
    }

    #[test]
    fn disjoint_iff_distance_above_two_p() {
        let g = gen_random_regular(40, 3, 3).unwrap();
        let dist = all_pairs_distance(&g);
        for p in 1..=2 {
            let mut finder = LightconeFinder::new(&g, p).unwrap();
            for i in 0..40 {
                for j in i + 1..40 {
                    let disjoint = finder.subgraph(i, j).unwrap() == Lightcone::Disjoint;
                    assert_eq!(disjoint, dist[i][j] > 2 * p, "({i},{j}) p={p}");
                }
            }
        }
    }

    fn all_pairs_distance(g: &Problem) -> Vec<Vec<usize>> {
        let adj = g.adjacency();
        let n = g.n_vars();
        (0..n)
            .map(|s| {
                let mut d = vec![usize::MAX; n];
                d[s] = 0;
                let mut q = std::collections::VecDeque::from([s]);
                while let Some(v) = q.pop_front() {
                    for &u in adj.neighbors(v) {
                        if d[u] == usize::MAX {
                            d[u] = d[v] + 1;
                            q.push_back(u);
                        }
                    }
                }
                d
            })
            .collect()
    }

    #[test]
    fn bound_formula() {
        assert_eq!(subgraph_size_bound(3, 1, 1000), 7);
        assert_eq!(subgraph_size_bound(3, 2, 1000), 19);
        assert_eq!(subgraph_size_bound(3, 3, 1000), 43);
        assert_eq!(subgraph_size_bound(3, 3, 20), 20);
        assert_eq!(subgraph_size_bound(2, 3, 1000), 13);
    }

    #[test]
    fn tree_keys_are_swap_and_relabel_invariant() {
        let g = gen_random_regular(200, 3, 5).unwrap();
        let mut finder = LightconeFinder::new(&g, 1).unwrap();
        let mut keys = std::collections::HashSet::new();
        for e in g.edges().iter().take(50) {
            let (Lightcone::Subgraph(a), Lightcone::Subgraph(b)) =
                (finder.subgraph(e.i, e.j).unwrap(), finder.subgraph(e.j, e.i).unwrap())
            else {
                panic!()
            };
            assert_eq!(a.canonical_key, b.canonical_key);
            if let Some(k) = a.canonical_key {
                keys.insert(k);
            }
        }
        assert_eq!(keys.len(), 1, "all adjacent tree cones of a 3-regular graph match");
    }

    #[test]
    fn exact_matches_whole_graph_emulation() {
        for (n, seed) in [(12, 1), (14, 2), (16, 3)] {
            let g = gen_random_regular(n, 3, seed).unwrap();
            for angles in [AngleSchedule::regular3_p1(), AngleSchedule::regular3_p2(), AngleSchedule::p1(0.3, 1.1)] {
                let p = angles.p();
                let pre = build_correlation_matrix(&g, p, &angles, CorrelationMode::Exact).unwrap();
                let full = all_correlations(&apply_qaoa(&g, &angles).unwrap());
                for i in 0..n {
                    for j in i + 1..n {
                        let expect = -full[i * n + j];
                        let got = pre.weight(i, j);
                        let expect = if expect.abs() < SPARSITY_THRESHOLD { 0.0 } else { expect };
                        assert!((got - expect).abs() < 1e-10, "n={n} p={p} ({i},{j}): {got} vs {expect}");
                    }
                }
            }
        }
    }

    #[test]
    fn caching_is_bitwise_neutral() {
        let g = gen_random_regular(60, 3, 12).unwrap();
        let angles = AngleSchedule::regular3_p1();
        let on = build_correlation_matrix_with(&g, 1, &angles, CorrelationMode::Exact, &LightconeOptions::default()).unwrap();
        let off = build_correlation_matrix_with(
            &g,
            1,
            &angles,
            CorrelationMode::Exact,
            &LightconeOptions {
                cache_trees: false,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(on.0.n_terms(), off.0.n_terms());
        for (a, b) in on.0.edges().iter().zip(off.0.edges()) {
            assert_eq!((a.i, a.j, a.weight.to_bits()), (b.i, b.j, b.weight.to_bits()));
        }
        assert!(on.1.emulations < off.1.emulations);
        assert_eq!(off.1.emulations, off.1.pairs);
    }

    #[test]
    fn capacity_error_names_the_pair() {
        let g = gen_random_regular(12, 3, 1).unwrap();
        let err = build_correlation_matrix_with(
            &g,
            1,
            &AngleSchedule::regular3_p1(),
            CorrelationMode::Exact,
            &LightconeOptions {
                qubit_cap: 4,
                cache_trees: true,
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::Capacity { .. }));
        assert!(err.to_string().contains("pair"));
    }

    #[test]
    fn sampled_mode_rejects_zero_shots() {
        let g = gen_random_regular(12, 3, 1).unwrap();
        let r = build_correlation_matrix(&g, 1, &AngleSchedule::regular3_p1(), CorrelationMode::Sampled { k: 0, seed: 1 });
        assert!(r.is_err());
    }
}
