use std::time::Instant;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};

use super::greedy::descend;
use super::{checkpoint_grid, Checkpoint, SolveTrace};
use crate::error::{Error, Result};
use crate::problems::{objective_unchecked, Adjacency, Problem, SpinVector};
use crate::rng::{rng_from_seed, Rng};

/// `ceil(sqrt(2N))`, capped at 20.
pub fn bm_rank(n: usize) -> usize {
    ((2.0 * n as f64).sqrt().ceil() as usize).clamp(1, 20)
}

/// Unit vectors `v_i` in `R^k`, row-major.
pub struct BmState {
    k: usize,
    v: Vec<f64>,
}

impl BmState {
    pub fn random(n: usize, k: usize, rng: &mut Rng) -> Self {
        let mut v: Vec<f64> = (0..n * k).map(|_| StandardNormal.sample(rng)).collect();
        for row in v.chunks_mut(k) {
            normalize(row);
        }
        BmState { k, v }
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.v[i * self.k..(i + 1) * self.k]
    }

    /// `sum_{i<j} W_ij v_i . v_j`.
    pub fn relaxed_objective(&self, problem: &Problem) -> f64 {
        problem
            .edges()
            .iter()
            .map(|e| e.weight * dot(self.vector(e.i), self.vector(e.j)))
            .sum()
    }

    /// One coordinate pass: `v_i <- normalize(-sum_j W_ij v_j)` in `order`.
    pub fn pass(&mut self, adj: &Adjacency, order: &[usize]) {
        let k = self.k;
        let mut g = vec![0.0; k];
        for &i in order {
            g.iter_mut().for_each(|x| *x = 0.0);
            for (j, w) in adj.iter(i) {
                for (gx, vx) in g.iter_mut().zip(&self.v[j * k..(j + 1) * k]) {
                    *gx -= w * vx;
                }
            }
            if normalize(&mut g) {
                self.v[i * k..(i + 1) * k].copy_from_slice(&g);
            }
        }
    }

    /// Signs of the projections onto a random direction.
    pub fn round(&self, rng: &mut Rng) -> Vec<i8> {
        let r: Vec<f64> = (0..self.k).map(|_| StandardNormal.sample(rng)).collect();
        self.v
            .chunks(self.k)
            .map(|row| if dot(row, &r) >= 0.0 { 1 } else { -1 })
            .collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(x: &mut [f64]) -> bool {
    let norm = dot(x, x).sqrt();
    if norm > 0.0 && norm.is_finite() {
        x.iter_mut().for_each(|v| *v /= norm);
        true
    } else {
        false
    }
}

/// Burer-Monteiro low-rank heuristic. Each iteration is one coordinate pass
/// in random order, then hyperplane rounding polished by 1-opt descent; the
/// best rounded solution is kept.
pub fn burer_monteiro(problem: &Problem, n_iter: usize, seed: u64, checkpoints: &[usize]) -> Result<SolveTrace> {
    if n_iter == 0 {
        return Err(Error::invalid("Burer-Monteiro needs n_iter >= 1"));
    }
    let n = problem.n_vars();
    if n == 0 {
        return Err(Error::EmptyProblem);
    }
    let adj = problem.adjacency();
    let mut rng = rng_from_seed(seed);
    let mut state = BmState::random(n, bm_rank(n), &mut rng);
    let mut order: Vec<usize> = (0..n).collect();
    let mut best_z: Vec<i8> = vec![1; n];
    let mut best = f64::INFINITY;
    let grid = checkpoint_grid(checkpoints, n_iter);
    let mut next = 0;
    let mut rows = Vec::with_capacity(grid.len());
    // only the iterations are timed; there is nothing to tune up front
    let start = Instant::now();
    for it in 1..=n_iter {
        order.shuffle(&mut rng);
        state.pass(&adj, &order);
        let mut z = state.round(&mut rng);
        descend(&adj, &mut z);
        let c = objective_unchecked(problem, &z);
        if c < best {
            best = c;
            best_z = z;
        }
        if grid[next] == it {
            rows.push(Checkpoint {
                n_iter: it,
                objective: best,
                elapsed_s: start.elapsed().as_secs_f64(),
                z: SpinVector::from_raw(best_z.clone()),
            });
            next += 1;
        }
    }
    Ok(SolveTrace {
        best_z: SpinVector::from_raw(best_z),
        best_objective: best,
        checkpoints: rows,
        seed,
        elapsed_s: start.elapsed().as_secs_f64(),
    })
}
