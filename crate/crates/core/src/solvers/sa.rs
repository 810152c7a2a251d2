use std::time::Instant;

use rand::Rng as _;

use super::{checkpoint_grid, temperature_schedule, Checkpoint, SolveTrace};
use crate::error::{Error, Result};
use crate::problems::{objective_unchecked, Adjacency, Problem, SpinVector};
use crate::rng::{rng_from_seed, Rng};

/// Spin configuration with cached local fields `f_i = sum_j W_ij z_j`, so a
/// flip costs `O(deg(i))`.
pub struct Annealer<'a> {
    adj: &'a Adjacency,
    z: Vec<i8>,
    fields: Vec<f64>,
    objective: f64,
}

impl<'a> Annealer<'a> {
    pub fn new(adj: &'a Adjacency, problem: &Problem, z: SpinVector) -> Result<Self> {
        if z.len() != adj.n_vars() {
            return Err(Error::Dimension {
                expected: adj.n_vars(),
                actual: z.len(),
            });
        }
        let z: Vec<i8> = z.into();
        let fields = adj.local_fields(&z);
        let objective = objective_unchecked(problem, &z);
        Ok(Annealer { adj, z, fields, objective })
    }

    /// Change of the objective if spin `i` flips.
    pub fn delta(&self, i: usize) -> f64 {
        -2.0 * f64::from(self.z[i]) * self.fields[i]
    }

    pub fn flip(&mut self, i: usize) {
        self.objective += self.delta(i);
        let twice = -2.0 * f64::from(self.z[i]);
        self.z[i] = -self.z[i];
        for (k, w) in self.adj.iter(i) {
            self.fields[k] += twice * w;
        }
    }

    /// Metropolis step at inverse temperature `beta`; returns whether the
    /// flip was taken.
    pub fn try_flip(&mut self, i: usize, beta: f64, rng: &mut Rng) -> bool {
        let d = self.delta(i);
        if d <= 0.0 || rng.random::<f64>() < (-beta * d).exp() {
            self.flip(i);
            true
        } else {
            false
        }
    }

    /// Incrementally tracked objective.
    pub fn objective(&self) -> f64 {
        self.objective
    }

    pub fn spins(&self) -> &[i8] {
        &self.z
    }
}

/// Simulated annealing with `m` sweeps of `N` uniformly random single-spin
/// proposals each, cooled along [`temperature_schedule`].
///
/// `checkpoints` lists sweep counts at which the best-so-far objective is
/// recorded; the final sweep is always recorded.
pub fn simulated_annealing(problem: &Problem, m: usize, seed: u64, checkpoints: &[usize]) -> Result<SolveTrace> {
    if m == 0 {
        return Err(Error::invalid("annealing needs M >= 1"));
    }
    let n = problem.n_vars();
    let adj = problem.adjacency();
    let mut rng = rng_from_seed(seed);
    let z0 = SpinVector::random(n, &mut rng);
    // the clock covers the temperature heuristic but not the random start
    let start = Instant::now();
    let schedule = temperature_schedule(problem, m)?;
    let mut state = Annealer::new(&adj, problem, z0)?;
    let mut best_z = state.z.clone();
    let mut best = state.objective;
    let grid = checkpoint_grid(checkpoints, m);
    let mut next = 0;
    let mut rows = Vec::with_capacity(grid.len());
    for (sweep, t) in schedule.temps.iter().enumerate() {
        let beta = 1.0 / t;
        for _ in 0..n {
            let i = rng.random_range(0..n);
            state.try_flip(i, beta, &mut rng);
        }
        if state.objective < best {
            best = state.objective;
            best_z.copy_from_slice(&state.z);
        }
        if grid[next] == sweep + 1 {
            // resynchronise away float drift from the incremental updates
            state.objective = objective_unchecked(problem, &state.z);
            best = objective_unchecked(problem, &best_z);
            rows.push(Checkpoint {
                n_iter: sweep + 1,
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
