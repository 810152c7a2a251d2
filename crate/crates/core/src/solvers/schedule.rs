use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::Problem;

/// Annealing temperatures, geometric in `1/T`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemperatureSchedule {
    pub temps: Vec<f64>,
    pub t_hot: f64,
    pub t_cold: f64,
}

/// `T_hot = 2 max_i h_i / ln 2` with `h_i = sum_j |W_ij|`, and
/// `T_cold = 2 min |W_ij| / ln(100 nu)`, where `nu` counts the spins whose
/// weakest coupling is the global weakest one. Sweep `l = 1..M` runs at
/// `1/T_l = exp(ln(1/T_hot) + l (ln(1/T_cold) - ln(1/T_hot)) / M)`.
///
/// Zero weights are ignored.
pub fn temperature_schedule(problem: &Problem, m: usize) -> Result<TemperatureSchedule> {
    if m == 0 {
        return Err(Error::invalid("schedule needs M >= 1"));
    }
    let n = problem.n_vars();
    let mut h = vec![0.0f64; n];
    let mut weakest = vec![f64::INFINITY; n];
    for e in problem.edges() {
        let w = e.weight.abs();
        if w == 0.0 {
            continue;
        }
        for v in [e.i, e.j] {
            h[v] += w;
            weakest[v] = weakest[v].min(w);
        }
    }
    let w_min = weakest.iter().copied().fold(f64::INFINITY, f64::min);
    if !w_min.is_finite() {
        return Err(Error::EmptyProblem);
    }
    let nu = weakest.iter().filter(|&&w| w == w_min).count();
    let h_max = h.iter().copied().fold(0.0, f64::max);
    let t_hot = 2.0 * h_max / std::f64::consts::LN_2;
    let t_cold = 2.0 * w_min / (100.0 * nu as f64).ln();
    let (b_hot, b_cold) = ((1.0 / t_hot).ln(), (1.0 / t_cold).ln());
    let mut temps: Vec<f64> = (1..=m)
        .map(|l| 1.0 / (b_hot + l as f64 * (b_cold - b_hot) / m as f64).exp())
        .collect();
    temps[m - 1] = t_cold;
    Ok(TemperatureSchedule { temps, t_hot, t_cold })
}
