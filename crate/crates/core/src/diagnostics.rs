//! Solution quality, problem hardness and hardware cost models.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::{evaluate_cut, evaluate_objective, Problem, SpinVector, SPARSITY_THRESHOLD};

/// The value the approximation ratio is taken on: the cut for max-cut
/// kinds, the Ising objective otherwise.
pub fn ratio_objective(original: &Problem, z: &SpinVector) -> Result<f64> {
    if original.kind().is_max_cut() {
        evaluate_cut(original, z)
    } else {
        evaluate_objective(original, z)
    }
}

/// `alpha = C(z) / c_opt` on the original problem, with `C` as in
/// [`ratio_objective`]. `z` may come from any preconditioned variant.
pub fn approximation_ratio(original: &Problem, z: &SpinVector, c_opt: f64) -> Result<f64> {
    if c_opt == 0.0 || !c_opt.is_finite() {
        return Err(Error::invalid(format!("optimal value {c_opt} cannot normalize a ratio")));
    }
    Ok(ratio_objective(original, z)? / c_opt)
}

/// `f = 1/2 + sum W_ij z_i z_j / (2 sum |W_ij|)`; zero when every term is
/// satisfied, one when every term is violated.
pub fn frustration_index(problem: &Problem, z_opt: &SpinVector) -> Result<f64> {
    let norm = problem.total_abs_weight();
    if norm == 0.0 {
        return Err(Error::EmptyProblem);
    }
    Ok(0.5 + evaluate_objective(problem, z_opt)? / (2.0 * norm))
}

/// `Delta = (s_2 - s_1) / (s_N - s_1)` over the singular values of `I - W`
/// sorted in descending order.
///
/// For a preconditioned problem `I - Z` is the full correlation matrix, and
/// for the infinite-depth preconditioner it is `z z^T`, where `Delta = 1`.
/// Singular values below `s_1 N eps` are treated as exact zeros. An
/// all-equal spectrum gives 0.
pub fn normalized_gap(problem: &Problem) -> Result<f64> {
    let n = problem.n_vars();
    if n < 2 {
        return Err(Error::invalid("normalized gap needs N >= 2"));
    }
    let m = nalgebra::DMatrix::<f64>::identity(n, n) - problem.dense();
    let mut s: Vec<f64> = m.symmetric_eigenvalues().iter().map(|v| v.abs()).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    let floor = s[0] * n as f64 * f64::EPSILON;
    for v in &mut s {
        if *v < floor {
            *v = 0.0;
        }
    }
    let spread = s[n - 1] - s[0];
    if spread == 0.0 {
        return Ok(0.0);
    }
    Ok((s[1] - s[0]) / spread)
}

/// `q^2 = ((1/N) sum z_opt,i z_i)^2`.
pub fn overlap(z: &SpinVector, z_opt: &SpinVector) -> Result<f64> {
    if z.len() != z_opt.len() {
        return Err(Error::Dimension {
            expected: z_opt.len(),
            actual: z.len(),
        });
    }
    let dot: i64 = z.as_slice().iter().zip(z_opt.as_slice()).map(|(&a, &b)| i64::from(a * b)).sum();
    let q = dot as f64 / z.len() as f64;
    Ok(q * q)
}

/// Stored pairs with `|W_ij|` at or above the sparsity threshold.
pub fn count_nonzero_terms(problem: &Problem) -> usize {
    problem.edges().iter().filter(|e| e.weight.abs() >= SPARSITY_THRESHOLD).count()
}

/// Gate, readout and reset durations of a superconducting device.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardwareTimingParams {
    pub t_2q: Duration,
    pub t_1q: Duration,
    pub t_mes: Duration,
    pub t_res: Duration,
    /// Fixed job overhead added once per sampling run.
    pub overhead_base: Duration,
    /// Overhead added per shot on top of the circuit time.
    pub overhead_per_shot: Duration,
}

impl Default for HardwareTimingParams {
    /// 80 ns two-qubit gates, 40 ns one-qubit gates, 1 us readout and 200 us
    /// passive reset; no overhead.
    fn default() -> Self {
        HardwareTimingParams {
            t_2q: Duration::from_nanos(80),
            t_1q: Duration::from_nanos(40),
            t_mes: Duration::from_micros(1),
            t_res: Duration::from_micros(200),
            overhead_base: Duration::ZERO,
            overhead_per_shot: Duration::ZERO,
        }
    }
}

fn times(d: Duration, k: u64) -> Result<Duration> {
    let k = u32::try_from(k).map_err(|_| Error::invalid("gate count overflows the timing model"))?;
    d.checked_mul(k).ok_or_else(|| Error::invalid("duration overflow"))
}

/// One shot of a depth-`p` circuit on `N` qubits:
/// `3Np t_2q + (2(2N+1)p + 1) t_1q + t_mes + t_res`.
pub fn circuit_time(n_qubits: usize, p: usize, params: &HardwareTimingParams) -> Result<Duration> {
    if n_qubits == 0 || p == 0 {
        return Err(Error::invalid("circuit time needs N >= 1 and p >= 1"));
    }
    let (n, p) = (n_qubits as u64, p as u64);
    let two = times(params.t_2q, 3 * n * p)?;
    let one = times(params.t_1q, 2 * (2 * n + 1) * p + 1)?;
    [one, params.t_mes, params.t_res]
        .into_iter()
        .try_fold(two, |acc, d| acc.checked_add(d))
        .ok_or_else(|| Error::invalid("duration overflow"))
}

/// `K` shots: `t_overhead + K t_circ`.
pub fn sampling_time(k: usize, n_qubits: usize, p: usize, params: &HardwareTimingParams) -> Result<Duration> {
    if k == 0 {
        return Err(Error::invalid("sampling time needs K >= 1"));
    }
    let per_shot = circuit_time(n_qubits, p, params)? + params.overhead_per_shot;
    times(per_shot, k as u64)?
        .checked_add(params.overhead_base)
        .ok_or_else(|| Error::invalid("duration overflow"))
}

/// Global fidelity `f^(3pN^2/2)` of a naive swap-network circuit.
pub fn fidelity_model(f: f64, n_qubits: usize, p: usize) -> Result<f64> {
    let n = n_qubits as f64;
    fidelity_from_gates(f, 1.5 * p as f64 * n * n)
}

/// Global fidelity `f^(n_2Q)` for an explicit two-qubit gate count.
pub fn fidelity_from_gates(f: f64, n_2q: f64) -> Result<f64> {
    if !(f > 0.0 && f <= 1.0) {
        return Err(Error::invalid(format!("gate fidelity {f} outside (0, 1]")));
    }
    if n_2q.is_nan() || n_2q < 0.0 {
        return Err(Error::invalid("negative gate count"));
    }
    Ok(f.powf(n_2q))
}

/// Ordinary least squares `y = slope x + intercept`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub slope_stderr: f64,
    pub intercept_stderr: f64,
    pub n_points: usize,
}

pub fn ols(points: &[(f64, f64)]) -> Result<LinearFit> {
    let m = points.len();
    if m < 2 {
        return Err(Error::invalid("a line fit needs two points"));
    }
    let mf = m as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / mf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / mf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("degenerate design: all x values are equal"));
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = points.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { (1.0 - sse / syy).clamp(0.0, 1.0) };
    let (slope_stderr, intercept_stderr) = if m > 2 {
        let s2 = sse / (mf - 2.0);
        let sum_x2: f64 = points.iter().map(|p| p.0 * p.0).sum();
        ((s2 / sxx).sqrt(), (s2 * sum_x2 / (mf * sxx)).sqrt())
    } else {
        (0.0, 0.0)
    };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
        slope_stderr,
        intercept_stderr,
        n_points: m,
    })
}

/// Per-term run-time model `t/n = A n_iter + B`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuntimeFit {
    pub a_slope: f64,
    pub b_intercept: f64,
    pub r_squared: f64,
    pub a_stderr: f64,
    pub b_stderr: f64,
}

/// Fits `t/n = A n_iter + B` to `(n_terms, n_iter, seconds)` rows.
pub fn fit_runtime_model(rows: &[(usize, usize, f64)]) -> Result<RuntimeFit> {
    if rows.iter().any(|r| r.0 == 0) {
        return Err(Error::invalid("run-time rows need n_terms >= 1"));
    }
    let points: Vec<(f64, f64)> = rows.iter().map(|&(n, it, t)| (it as f64, t / n as f64)).collect();
    let fit = ols(&points)?;
    Ok(RuntimeFit {
        a_slope: fit.slope,
        b_intercept: fit.intercept,
        r_squared: fit.r_squared,
        a_stderr: fit.slope_stderr,
        b_stderr: fit.intercept_stderr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precond::ideal_preconditioner;
    use crate::problems::ProblemKind;
    use crate::rng::rng_from_seed;

    fn triangle() -> Problem {
        Problem::new(3, ProblemKind::MaxCutRegular, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap()
    }

    #[test]
    fn ratios() {
        let t = triangle();
        let opt = SpinVector::new(vec![1, 1, -1]).unwrap();
        assert_eq!(approximation_ratio(&t, &opt, 2.0).unwrap(), 1.0);
        assert_eq!(approximation_ratio(&t, &SpinVector::all_up(3), 2.0).unwrap(), 0.0);
        assert!(approximation_ratio(&t, &opt, 0.0).is_err());
    }

    #[test]
    fn frustration_values() {
        let chain = Problem::new(4, ProblemKind::Custom, [(0, 1, -1.0), (1, 2, -1.0), (2, 3, -1.0)]).unwrap();
        assert_eq!(frustration_index(&chain, &SpinVector::all_up(4)).unwrap(), 0.0);
        let f = frustration_index(&triangle(), &SpinVector::new(vec![1, 1, -1]).unwrap()).unwrap();
        assert!((f - 1.0 / 3.0).abs() < 1e-15);
        let z = SpinVector::new(vec![1, -1, -1, 1, 1]).unwrap();
        assert_eq!(frustration_index(&ideal_preconditioner(&z).unwrap(), &z).unwrap(), 0.0);
    }

    #[test]
    fn gap_values() {
        let mut rng = rng_from_seed(1);
        for n in 2..20 {
            let z = SpinVector::random(n, &mut rng);
            assert_eq!(normalized_gap(&ideal_preconditioner(&z).unwrap()).unwrap(), 1.0, "n={n}");
        }
        let empty = Problem::new(5, ProblemKind::Custom, []).unwrap();
        assert_eq!(normalized_gap(&empty).unwrap(), 0.0);
        // I - W = [[1, -w], [-w, 1]] has singular values |1 - w| and |1 + w|;
        // two distinct values always give 1, equal ones give 0
        for w in [0.3, -0.6, 2.5, 1.0] {
            let p = Problem::new(2, ProblemKind::Custom, [(0, 1, w)]).unwrap();
            assert_eq!(normalized_gap(&p).unwrap(), 1.0);
        }
        let three = Problem::new(3, ProblemKind::Custom, [(0, 1, 0.5)]).unwrap();
        // singular values 1.5, 1, 0.5
        assert!((normalized_gap(&three).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn overlap_values() {
        let z = SpinVector::new(vec![1, -1, 1, 1]).unwrap();
        assert_eq!(overlap(&z, &z).unwrap(), 1.0);
        assert_eq!(overlap(&z.negated(), &z).unwrap(), 1.0);
        let half = SpinVector::new(vec![1, 1, -1, -1]).unwrap();
        assert_eq!(overlap(&half, &SpinVector::all_up(4)).unwrap(), 0.0);
        assert!(overlap(&z, &SpinVector::all_up(3)).is_err());
    }

    #[test]
    fn random_overlap_is_one_over_n() {
        let n = 10_000;
        let mut rng = rng_from_seed(7);
        let opt = SpinVector::random(n, &mut rng);
        let trials = 400;
        let mean: f64 = (0..trials)
            .map(|_| overlap(&SpinVector::random(n, &mut rng), &opt).unwrap())
            .sum::<f64>()
            / trials as f64;
        // q^2 N is chi-squared with one degree of freedom: mean 1, sd sqrt(2)
        let se = 2f64.sqrt() / (trials as f64).sqrt();
        assert!((mean * n as f64 - 1.0).abs() < 4.0 * se, "{}", mean * n as f64);
    }

    #[test]
    fn term_counts() {
        let k = Problem::new(6, ProblemKind::Custom, (0..6).flat_map(|i| (i + 1..6).map(move |j| (i, j, 1.0)))).unwrap();
        assert_eq!(count_nonzero_terms(&k), 15);
        let tiny = Problem::new(3, ProblemKind::Custom, [(0, 1, 1e-13), (1, 2, 1.0)]).unwrap();
        assert_eq!(count_nonzero_terms(&tiny), 1);
    }

    #[test]
    fn circuit_time_default_case() {
        let d = HardwareTimingParams::default();
        assert_eq!(circuit_time(5, 1, &d).unwrap(), Duration::from_nanos(203_120));
        let k = 100_000;
        let t = sampling_time(k, 5, 1, &d).unwrap().as_secs_f64();
        let reset = k as f64 * d.t_res.as_secs_f64();
        assert!((t - reset) / t < 0.02);
        let active = HardwareTimingParams {
            t_res: Duration::from_micros(6) - d.t_mes,
            ..d.clone()
        };
        let before = (d.t_mes + d.t_res).as_secs_f64();
        let after = (active.t_mes + active.t_res).as_secs_f64();
        assert!((before / after - 33.5).abs() < 0.1);
    }

    #[test]
    fn fidelities() {
        assert_eq!(fidelity_model(1.0, 50, 3).unwrap(), 1.0);
        let big = fidelity_from_gates(0.995, 1e4).unwrap();
        assert!((1e-23..=1e-21).contains(&big), "{big}");
        let small = fidelity_from_gates(0.995, 1e3).unwrap();
        assert!((1e-3..=1e-1).contains(&small));
        assert!(fidelity_model(0.99, 10, 1).unwrap() > fidelity_model(0.99, 11, 1).unwrap());
        assert!(fidelity_model(0.99, 10, 1).unwrap() > fidelity_model(0.99, 10, 2).unwrap());
        assert!(fidelity_model(0.99, 10, 1).unwrap() > fidelity_model(0.98, 10, 1).unwrap());
        assert!(fidelity_model(0.0, 10, 1).is_err());
        assert!(fidelity_model(1.1, 10, 1).is_err());
    }

    #[test]
    fn exact_line_recovered() {
        let rows: Vec<(usize, usize, f64)> = (1..=6).map(|it| (100, it * 10, 100.0 * (3e-6 * (it * 10) as f64 + 2e-5))).collect();
        let fit = fit_runtime_model(&rows).unwrap();
        assert!((fit.a_slope - 3e-6).abs() < 1e-12);
        assert!((fit.b_intercept - 2e-5).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!(fit_runtime_model(&[(10, 5, 1.0), (10, 5, 2.0)]).is_err());
    }
}
