//! Power-grid ingestion and dangling-branch pruning.
//!
//! Grid lines become max-cut weights `W_ij = (R_ij^2 + X_ij^2)^(-1/2)`.
//! Tree branches hanging off the meshed part of the grid are unfrustrated:
//! once the core is solved, each removed leaf can be set to satisfy its only
//! remaining edge. [`prune_dangling`] strips them and splits what remains
//! into connected components; [`reconstruct_solution`] puts them back.

use std::collections::{BTreeMap, VecDeque};
use std::path::{Path, PathBuf};

use super::{Problem, ProblemKind, SpinVector};
use crate::error::{Error, Result};

/// One leaf removal: `leaf` hung off `anchor` through `weight`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Removal {
    pub leaf: usize,
    pub anchor: usize,
    pub weight: f64,
}

/// A connected piece of the pruned core, in original indices.
#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub vertices: Vec<usize>,
    pub n_edges: usize,
}

/// Bookkeeping needed to go from the pruned core back to the full problem.
#[derive(Clone, Debug, PartialEq)]
pub struct PruneMap {
    /// Variable count of the unpruned problem.
    pub n_full: usize,
    /// Leaf removals, in the order they happened.
    pub removed: Vec<Removal>,
    /// Original indices of the surviving vertices; core variable `k` is
    /// original variable `kept[k]`.
    pub kept: Vec<usize>,
    /// Connected components of the core, largest first.
    pub components: Vec<Component>,
}

impl PruneMap {
    /// The full problem restricted to component `c`, relabelled in the
    /// component's vertex order.
    pub fn component_problem(&self, full: &Problem, c: usize) -> Result<Problem> {
        let comp = self
            .components
            .get(c)
            .ok_or_else(|| Error::invalid(format!("no component {c}")))?;
        full.induced(&comp.vertices)
    }

    /// Core variable index of an original vertex.
    pub fn core_index(&self) -> Vec<Option<usize>> {
        let mut idx = vec![None; self.n_full];
        for (k, &v) in self.kept.iter().enumerate() {
            idx[v] = Some(k);
        }
        idx
    }

    /// Assembles a core-indexed solution from per-component solutions given
    /// in component vertex order.
    pub fn assemble_core(&self, parts: &[SpinVector]) -> Result<SpinVector> {
        if parts.len() != self.components.len() {
            return Err(Error::Dimension {
                expected: self.components.len(),
                actual: parts.len(),
            });
        }
        let core_idx = self.core_index();
        let mut z = vec![1i8; self.kept.len()];
        for (comp, part) in self.components.iter().zip(parts) {
            if part.len() != comp.vertices.len() {
                return Err(Error::Dimension {
                    expected: comp.vertices.len(),
                    actual: part.len(),
                });
            }
            for (&v, &s) in comp.vertices.iter().zip(part.as_slice()) {
                z[core_idx[v].expect("component vertex is kept")] = s;
            }
        }
        Ok(SpinVector::from_raw(z))
    }
}

/// Iteratively removes degree-1 vertices (and the isolated vertices this
/// leaves behind). Returns the core, relabelled compactly, and the map.
pub fn prune_dangling(problem: &Problem) -> (Problem, PruneMap) {
    let n = problem.n_vars();
    let adj = problem.adjacency();
    let mut degree: Vec<usize> = (0..n).map(|v| adj.degree(v)).collect();
    let mut alive = vec![true; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| degree[v] <= 1).collect();
    let mut removed = Vec::new();

    while let Some(v) = queue.pop_front() {
        if !alive[v] {
            continue;
        }
        alive[v] = false;
        if let Some((anchor, weight)) = adj.iter(v).find(|&(u, _)| alive[u]) {
            removed.push(Removal {
                leaf: v,
                anchor,
                weight,
            });
            degree[anchor] -= 1;
            if degree[anchor] <= 1 {
                queue.push_back(anchor);
            }
        }
    }

    let kept: Vec<usize> = (0..n).filter(|&v| alive[v]).collect();
    let mut core = problem
        .induced(&kept)
        .expect("kept vertices are in range");
    core.set_provenance("pruned_from_n", n);

    let mut seen = vec![false; n];
    let mut components = Vec::new();
    for &start in &kept {
        if seen[start] {
            continue;
        }
        let mut vertices = vec![start];
        seen[start] = true;
        let mut k = 0;
        while k < vertices.len() {
            let v = vertices[k];
            k += 1;
            for &u in adj.neighbors(v) {
                if alive[u] && !seen[u] {
                    seen[u] = true;
                    vertices.push(u);
                }
            }
        }
        vertices.sort_unstable();
        let n_edges = vertices
            .iter()
            .map(|&v| adj.neighbors(v).iter().filter(|&&u| alive[u]).count())
            .sum::<usize>()
            / 2;
        components.push(Component { vertices, n_edges });
    }
    components.sort_by(|a, b| b.vertices.len().cmp(&a.vertices.len()).then(a.vertices[0].cmp(&b.vertices[0])));

    (
        core,
        PruneMap {
            n_full: n,
            removed,
            kept,
            components,
        },
    )
}

/// Extends a core solution to the full problem.
///
/// Removals are replayed newest first; each leaf takes the spin that
/// minimizes its single edge, `z_leaf = -sign(W) * z_anchor`. Vertices that
/// ended up isolated are set to `+1`.
pub fn reconstruct_solution(core_z: &SpinVector, map: &PruneMap, problem: &Problem) -> Result<SpinVector> {
    if problem.n_vars() != map.n_full {
        return Err(Error::Integrity(format!(
            "map describes {} variables but the problem has {}",
            map.n_full,
            problem.n_vars()
        )));
    }
    if core_z.len() != map.kept.len() {
        return Err(Error::Dimension {
            expected: map.kept.len(),
            actual: core_z.len(),
        });
    }
    let mut z = vec![0i8; map.n_full];
    for (&v, &s) in map.kept.iter().zip(core_z.as_slice()) {
        if v >= map.n_full {
            return Err(Error::Integrity(format!("kept vertex {v} out of range")));
        }
        z[v] = s;
    }
    let mut is_leaf = vec![false; map.n_full];
    for r in &map.removed {
        if r.leaf >= map.n_full || r.anchor >= map.n_full {
            return Err(Error::Integrity(format!("removal {r:?} out of range")));
        }
        is_leaf[r.leaf] = true;
    }
    for v in 0..map.n_full {
        if z[v] == 0 && !is_leaf[v] {
            z[v] = 1;
        }
    }
    for r in map.removed.iter().rev() {
        if z[r.anchor] == 0 {
            return Err(Error::Integrity(format!(
                "anchor {} of leaf {} is not placed before it",
                r.anchor, r.leaf
            )));
        }
        let w = problem.weight(r.leaf, r.anchor);
        if w.to_bits() != r.weight.to_bits() {
            return Err(Error::Integrity(format!(
                "edge ({}, {}) has weight {w}, map recorded {}",
                r.leaf, r.anchor, r.weight
            )));
        }
        let sign: i8 = if w > 0.0 { -1 } else { 1 };
        z[r.leaf] = sign * z[r.anchor];
    }
    Ok(SpinVector::from_raw(z))
}

/// A parsed grid: the weighted problem plus the bus label of each variable.
#[derive(Clone, Debug)]
pub struct MpesGrid {
    pub problem: Problem,
    pub bus_ids: Vec<String>,
    /// Number of bus pairs that carried more than one line.
    pub merged_parallel: usize,
}

/// Reads a grid line table. See [`parse_mpes_str`] for the format.
pub fn read_mpes(path: impl AsRef<Path>) -> Result<MpesGrid> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_mpes(&text, path)
}

/// Parses a grid line table.
///
/// One line per transmission line, fields separated by commas, tabs or
/// spaces: `bus_from bus_to R X [ignored...]`. Lines starting with `#` or
/// `%`, blank lines, and a leading header row whose third field is not
/// numeric are skipped. Bus labels are free-form and numbered in sorted
/// order (numerically when every label is an integer).
pub fn parse_mpes_str(text: &str) -> Result<MpesGrid> {
    parse_mpes(text, Path::new("<memory>"))
}

fn parse_mpes(text: &str, path: &Path) -> Result<MpesGrid> {
    let err = |line: usize, message: String| Error::Parse {
        path: PathBuf::from(path),
        line,
        message,
    };
    let mut lines = Vec::new();
    let mut first_record = true;
    for (k, raw) in text.lines().enumerate() {
        let lineno = k + 1;
        let line = raw.trim().trim_end_matches(';');
        if line.is_empty() || line.starts_with('#') || line.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = line
            .split([',', '\t', ' '])
            .filter(|f| !f.is_empty())
            .collect();
        if fields.len() < 4 {
            return Err(err(lineno, format!("expected 'bus_from bus_to R X', found '{line}'")));
        }
        let header = first_record && fields[2].parse::<f64>().is_err();
        first_record = false;
        if header {
            continue;
        }
        let r: f64 = fields[2]
            .parse()
            .map_err(|_| err(lineno, format!("non-numeric resistance '{}'", fields[2])))?;
        let x: f64 = fields[3]
            .parse()
            .map_err(|_| err(lineno, format!("non-numeric reactance '{}'", fields[3])))?;
        if !r.is_finite() || !x.is_finite() {
            return Err(err(lineno, "non-finite impedance".to_string()));
        }
        if r == 0.0 && x == 0.0 {
            return Err(err(lineno, format!("line {}-{} has zero impedance", fields[0], fields[1])));
        }
        if fields[0] == fields[1] {
            return Err(err(lineno, format!("line connects bus {} to itself", fields[0])));
        }
        lines.push((fields[0].to_string(), fields[1].to_string(), (r * r + x * x).sqrt().recip()));
    }

    let mut labels: Vec<String> = lines
        .iter()
        .flat_map(|(a, b, _)| [a.clone(), b.clone()])
        .collect();
    if labels.iter().all(|l| l.parse::<i64>().is_ok()) {
        labels.sort_by_key(|l| l.parse::<i64>().unwrap());
    } else {
        labels.sort();
    }
    labels.dedup();
    let index: BTreeMap<&str, usize> = labels.iter().enumerate().map(|(k, l)| (l.as_str(), k)).collect();

    let mut pair_counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let entries: Vec<(usize, usize, f64)> = lines
        .iter()
        .map(|(a, b, w)| {
            let (i, j) = (index[a.as_str()], index[b.as_str()]);
            *pair_counts.entry((i.min(j), i.max(j))).or_default() += 1;
            (i, j, *w)
        })
        .collect();
    let merged_parallel = pair_counts.values().filter(|&&c| c > 1).count();
    let problem = Problem::from_summed(labels.len(), ProblemKind::Mpes, entries)?
        .with_provenance("source", path.display())
        .with_provenance("parallel_lines", format!("summed ({merged_parallel} bus pairs)"));
    Ok(MpesGrid {
        problem,
        bus_ids: labels,
        merged_parallel,
    })
}

/// Reads a grid file and prunes its dangling branches. Returns the full
/// (unpruned) problem together with the map describing the core.
pub fn load_mpes(path: impl AsRef<Path>) -> Result<(Problem, PruneMap)> {
    let grid = read_mpes(path)?;
    let (_, map) = prune_dangling(&grid.problem);
    Ok((grid.problem, map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::evaluate_objective;

    fn problem(n: usize, edges: &[(usize, usize, f64)]) -> Problem {
        Problem::new(n, ProblemKind::Custom, edges.iter().copied()).unwrap()
    }

    #[test]
    fn path_collapses() {
        let (core, map) = prune_dangling(&problem(3, &[(0, 1, 1.0), (1, 2, 1.0)]));
        assert_eq!(core.n_vars(), 0);
        assert_eq!(map.removed.len(), 2);
        assert!(map.components.is_empty());
    }

    #[test]
    fn cycle_is_untouched() {
        let cyc = problem(5, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0), (0, 4, 1.0)]);
        let (core, map) = prune_dangling(&cyc);
        assert_eq!(core.edges(), cyc.edges());
        assert!(map.removed.is_empty());
        assert_eq!(map.components.len(), 1);
        assert_eq!(map.components[0].n_edges, 5);
    }

    #[test]
    fn pendant_is_removed() {
        let p = problem(4, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (2, 3, 2.0)]);
        let (core, map) = prune_dangling(&p);
        assert_eq!(core.n_vars(), 3);
        assert_eq!(map.kept, vec![0, 1, 2]);
        assert_eq!(map.removed, vec![Removal { leaf: 3, anchor: 2, weight: 2.0 }]);
    }

    #[test]
    fn leaf_rule() {
        let p = problem(2 + 1, &[(0, 1, 1.0), (0, 2, -2.0)]);
        let map = PruneMap {
            n_full: 3,
            removed: vec![
                Removal { leaf: 1, anchor: 0, weight: 1.0 },
                Removal { leaf: 2, anchor: 0, weight: -2.0 },
            ],
            kept: vec![0],
            components: vec![],
        };
        let z = reconstruct_solution(&SpinVector::new(vec![1]).unwrap(), &map, &p).unwrap();
        assert_eq!(z.get(1), -1);
        assert_eq!(z.get(2), 1);
        let z = reconstruct_solution(&SpinVector::new(vec![-1]).unwrap(), &map, &p).unwrap();
        assert_eq!(z.get(2), -1);
    }

    #[test]
    fn inconsistent_map_is_rejected() {
        let p = problem(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        let (_, mut map) = prune_dangling(&p);
        map.removed[0].weight = 5.0;
        assert!(matches!(
            reconstruct_solution(&SpinVector::new(vec![]).unwrap(), &map, &p),
            Err(Error::Integrity(_))
        ));
        let other = problem(4, &[(0, 1, 1.0)]);
        let (_, map) = prune_dangling(&p);
        assert!(reconstruct_solution(&SpinVector::new(vec![]).unwrap(), &map, &other).is_err());
    }

    #[test]
    fn reconstruction_adds_satisfied_leaf_edges() {
        // triangle core with a two-edge tail and a pendant
        let p = problem(
            6,
            &[(0, 1, 1.0), (1, 2, -0.5), (0, 2, 2.0), (2, 3, 1.5), (3, 4, -1.0), (1, 5, 0.75)],
        );
        let (core, map) = prune_dangling(&p);
        assert_eq!(core.n_vars(), 3);
        for idx in 0..8u64 {
            let cz = SpinVector::from_index(idx, 3);
            let full = reconstruct_solution(&cz, &map, &p).unwrap();
            let expect = evaluate_objective(&core, &cz).unwrap()
                - map.removed.iter().map(|r| r.weight.abs()).sum::<f64>();
            assert!((evaluate_objective(&p, &full).unwrap() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn impedance_weights_and_parallel_lines() {
        let grid = parse_mpes_str("from,to,r,x\n1,2,3,4\n2,3,0,1\n3,2,0,2\n").unwrap();
        let p = &grid.problem;
        assert_eq!(p.n_vars(), 3);
        assert!((p.weight(0, 1) - 0.2).abs() < 1e-15);
        assert!((p.weight(1, 2) - 1.5).abs() < 1e-15);
        assert_eq!(grid.merged_parallel, 1);
        assert_eq!(grid.bus_ids, vec!["1", "2", "3"]);
    }

    #[test]
    fn bad_grid_records() {
        for (text, line) in [
            ("1 2 0 0\n", 1),
            ("1 2 0.1 0.2\n1 3 abc 0.2\n", 2),
            ("1 2 0.1\n", 1),
            ("1 1 0.1 0.2\n", 1),
        ] {
            match parse_mpes_str(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }
}
