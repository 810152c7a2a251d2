//! Classical heuristics and the exact oracle.
//!
//! Every solver minimizes the Ising objective `sum_{i<j} W_ij z_i z_j` of the
//! problem it is given and reports a [`SolveTrace`].

mod bm;
mod brute;
mod greedy;
mod sa;
mod schedule;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::problems::{evaluate_objective, Problem, SpinVector};

pub use bm::{burer_monteiro, bm_rank, BmState};
pub use brute::{brute_force, BRUTE_FORCE_CAP};
pub use greedy::greedy_local_descent;
pub use sa::{simulated_annealing, Annealer};
pub use schedule::{temperature_schedule, TemperatureSchedule};

/// Best-so-far state after `n_iter` iterations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub n_iter: usize,
    pub objective: f64,
    /// Seconds since the solver started.
    pub elapsed_s: f64,
    /// Best-so-far configuration.
    pub z: SpinVector,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace {
    pub best_z: SpinVector,
    pub best_objective: f64,
    pub checkpoints: Vec<Checkpoint>,
    pub seed: u64,
    pub elapsed_s: f64,
}

/// Sorted, de-duplicated checkpoints inside `1..=total`, always ending at
/// `total`.
pub(crate) fn checkpoint_grid(requested: &[usize], total: usize) -> Vec<usize> {
    let mut grid: Vec<usize> = requested.iter().copied().filter(|&c| c >= 1 && c <= total).collect();
    grid.push(total);
    grid.sort_unstable();
    grid.dedup();
    grid
}

#[derive(Serialize)]
struct TraceRow {
    n_iter: usize,
    objective: f64,
    original_objective: Option<f64>,
    elapsed_s: f64,
    seed: u64,
}

/// One CSV row per checkpoint. With `original`, each best-so-far
/// configuration is also scored on that problem.
pub fn write_trace_csv(trace: &SolveTrace, original: Option<&Problem>, writer: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for c in &trace.checkpoints {
        w.serialize(TraceRow {
            n_iter: c.n_iter,
            objective: c.objective,
            original_objective: original.map(|p| evaluate_objective(p, &c.z)).transpose()?,
            elapsed_s: c.elapsed_s,
            seed: trace.seed,
        })?;
    }
    w.flush()?;
    Ok(())
}
