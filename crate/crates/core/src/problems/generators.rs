use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};

use super::{Problem, ProblemKind};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

const MAX_PAIRING_ATTEMPTS: usize = 10_000;

/// Random `d`-regular graph with unit weights (max-cut instance).
///
/// Stubs are paired uniformly at random; pairs that would create a self-loop
/// or a repeated edge are returned to the pool and re-paired. When the pool
/// can no longer produce a valid pair the whole attempt restarts.
pub fn gen_random_regular(n: usize, d: usize, seed: u64) -> Result<Problem> {
    if !(n * d).is_multiple_of(2) {
        return Err(Error::invalid(format!("n*d must be even (n={n}, d={d})")));
    }
    if d >= n {
        return Err(Error::invalid(format!("degree d={d} must be below n={n}")));
    }
    let mut rng = rng_from_seed(seed);
    let edges = if d == 0 {
        HashSet::new()
    } else {
        (0..MAX_PAIRING_ATTEMPTS)
            .find_map(|_| try_pairing(n, d, &mut rng))
            .ok_or_else(|| Error::Numeric(format!("no simple {d}-regular graph on {n} vertices found")))?
    };
    let mut edges: Vec<(usize, usize)> = edges.into_iter().collect();
    edges.sort_unstable();
    Ok(
        Problem::new(n, ProblemKind::MaxCutRegular, edges.into_iter().map(|(i, j)| (i, j, 1.0)))?
            .with_provenance("generator", format!("regular(n={n},d={d})"))
            .with_provenance("seed", seed),
    )
}

fn try_pairing(n: usize, d: usize, rng: &mut crate::rng::Rng) -> Option<HashSet<(usize, usize)>> {
    let mut edges = HashSet::with_capacity(n * d / 2);
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    while !stubs.is_empty() {
        // BTreeMap keeps the rebuilt stub list in a seed-stable order.
        let mut leftover: BTreeMap<usize, usize> = BTreeMap::new();
        stubs.shuffle(rng);
        for pair in stubs.chunks_exact(2) {
            let (a, b) = if pair[0] < pair[1] { (pair[0], pair[1]) } else { (pair[1], pair[0]) };
            if a != b && edges.insert((a, b)) {
                continue;
            }
            *leftover.entry(a).or_default() += 1;
            *leftover.entry(b).or_default() += 1;
        }
        if !leftover.is_empty() && !pairable(&edges, &leftover) {
            return None;
        }
        stubs = leftover
            .into_iter()
            .flat_map(|(v, k)| std::iter::repeat_n(v, k))
            .collect();
    }
    Some(edges)
}

fn pairable(edges: &HashSet<(usize, usize)>, leftover: &BTreeMap<usize, usize>) -> bool {
    let nodes: Vec<usize> = leftover.keys().copied().collect();
    nodes.iter().enumerate().any(|(k, &a)| {
        nodes[k + 1..]
            .iter()
            .any(|&b| !edges.contains(&(a.min(b), a.max(b))))
    })
}

/// Sherrington-Kirkpatrick instance: all pairs, i.i.d. standard normal
/// weights.
pub fn gen_sk(n: usize, seed: u64) -> Result<Problem> {
    if n < 2 {
        return Err(Error::invalid(format!("SK instances need n >= 2, got {n}")));
    }
    let mut rng = rng_from_seed(seed);
    let mut entries = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let w: f64 = StandardNormal.sample(&mut rng);
            entries.push((i, j, w));
        }
    }
    Ok(Problem::new(n, ProblemKind::Sk, entries)?
        .with_provenance("generator", format!("sk(n={n})"))
        .with_provenance("seed", seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regular_graph_degrees() {
        let g = gen_random_regular(8, 3, 1).unwrap();
        assert_eq!(g.n_terms(), 12);
        assert!(g.edges().iter().all(|e| e.weight == 1.0));
        let adj = g.adjacency();
        assert!((0..8).all(|v| adj.degree(v) == 3));
    }

    #[test]
    fn regular_graph_degrees_large_and_dense() {
        for (n, d, seed) in [(1024, 3, 5), (200, 10, 3), (9, 8, 1), (30, 4, 11)] {
            let g = gen_random_regular(n, d, seed).unwrap();
            let adj = g.adjacency();
            assert!((0..n).all(|v| adj.degree(v) == d), "n={n} d={d}");
            assert_eq!(g.n_terms(), n * d / 2);
        }
    }

    #[test]
    fn regular_graph_parameter_errors() {
        assert!(matches!(gen_random_regular(5, 3, 0), Err(Error::InvalidParameter(_))));
        assert!(matches!(gen_random_regular(4, 4, 0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn regular_graph_is_deterministic() {
        assert_eq!(gen_random_regular(64, 3, 9).unwrap(), gen_random_regular(64, 3, 9).unwrap());
        assert_ne!(gen_random_regular(64, 3, 9).unwrap().edges(), gen_random_regular(64, 3, 10).unwrap().edges());
    }

    #[test]
    fn sk_counts_and_determinism() {
        assert_eq!(gen_sk(4, 0).unwrap().n_terms(), 6);
        assert_eq!(gen_sk(10, 3).unwrap(), gen_sk(10, 3).unwrap());
        assert!(gen_sk(1, 0).is_err());
    }

    #[test]
    fn sk_weight_statistics() {
        let p = gen_sk(64, 2024).unwrap();
        let w: Vec<f64> = p.edges().iter().map(|e| e.weight).collect();
        let m = w.len() as f64;
        assert_eq!(w.len(), 64 * 63 / 2);
        let mean = w.iter().sum::<f64>() / m;
        let var = w.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
        assert!(mean.abs() < 4.0 * var.sqrt() / m.sqrt(), "mean {mean}");
        assert!((0.8..=1.2).contains(&var), "variance {var}");
    }
}
