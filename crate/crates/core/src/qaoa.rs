//! Exact state-vector emulation of the depth-`p` QAOA.
//!
//! The state is
//!
//! ```text
//! |psi> = prod_l [ exp(-i beta_l sum_j X_j) exp(-i gamma_l H) ] H^N |0>,   H = -C/2
//! ```
//!
//! with `C` the diagonal Ising objective. For a max-cut problem `H` is the cut
//! operator up to a constant, so tabulated max-cut angles carry over
//! unchanged, and the closed-form `p = 1` correlation of
//! [`crate::precond::analytic_p1_correlation`] uses the same `(gamma, beta)`. Qubit `k` is bit `k` of the basis
//! index and a set bit means spin `-1`, so basis index `x` is the spin vector
//! [`SpinVector::from_index`]`(x, n)`.

use num_complex::Complex64;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::{minimize_bfgs, BfgsOptions};
use crate::problems::{Problem, SpinVector};
use crate::rng::{derive_seed, rng_from_seed};

/// Largest register emulated by default (2^26 amplitudes, 1 GiB).
pub const DEFAULT_QUBIT_CAP: usize = 26;

/// QAOA angles `(gamma_1..gamma_p, beta_1..beta_p)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleSchedule {
    gammas: Vec<f64>,
    betas: Vec<f64>,
}

impl AngleSchedule {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if gammas.len() != betas.len() {
            return Err(Error::invalid(format!(
                "{} gammas but {} betas",
                gammas.len(),
                betas.len()
            )));
        }
        if gammas.iter().chain(&betas).any(|a| !a.is_finite()) {
            return Err(Error::invalid("angles must be finite"));
        }
        Ok(AngleSchedule { gammas, betas })
    }

    /// Reads `{"gammas": [...], "betas": [...]}`.
    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let raw: AngleSchedule = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        AngleSchedule::new(raw.gammas, raw.betas)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("angles serialize")
    }

    /// Depth-0 schedule: the uniform superposition.
    pub fn uniform() -> Self {
        AngleSchedule {
            gammas: vec![],
            betas: vec![],
        }
    }

    pub fn p1(gamma: f64, beta: f64) -> Self {
        AngleSchedule {
            gammas: vec![gamma],
            betas: vec![beta],
        }
    }

    /// Depth-1 angles maximizing the expected cut of a unit-weight
    /// 3-regular graph in the large-girth limit (per-edge `<ZZ>` =
    /// `-1/sqrt(27)`, cut fraction ~0.6925).
    pub fn regular3_p1() -> Self {
        AngleSchedule::p1(REGULAR3_P1[0], REGULAR3_P1[1])
    }

    /// Depth-2 counterpart of [`AngleSchedule::regular3_p1`] (cut fraction
    /// ~0.7559).
    pub fn regular3_p2() -> Self {
        AngleSchedule {
            gammas: vec![REGULAR3_P2[0], REGULAR3_P2[1]],
            betas: vec![REGULAR3_P2[2], REGULAR3_P2[3]],
        }
    }

    pub fn p(&self) -> usize {
        self.gammas.len()
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    /// Flat `[gammas..., betas...]` parameter vector.
    pub fn to_flat(&self) -> Vec<f64> {
        self.gammas.iter().chain(&self.betas).copied().collect()
    }

    pub fn from_flat(x: &[f64]) -> Result<Self> {
        if !x.len().is_multiple_of(2) {
            return Err(Error::invalid("flat angle vector must have even length"));
        }
        let p = x.len() / 2;
        AngleSchedule::new(x[..p].to_vec(), x[p..].to_vec())
    }
}

// Found with `optimize_angles` on the edge light cone of an infinite
// 3-regular tree; see the angle tests below.
const REGULAR3_P1: [f64; 2] = [0.615_479_708_670_387_3, std::f64::consts::FRAC_PI_8];
const REGULAR3_P2: [f64; 4] = [
    0.487_835_526_419_509_34,
    0.897_839_182_435_963_6,
    0.554_904_187_080_796_5,
    0.292_380_736_955_457_4,
];

/// `2^n` complex amplitudes.
#[derive(Clone, Debug)]
pub struct StateVector {
    amps: Vec<Complex64>,
    n_qubits: usize,
}

impl StateVector {
    /// `H^N |0>`.
    pub fn uniform(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        let a = (dim as f64).sqrt().recip();
        StateVector {
            amps: vec![Complex64::new(a, 0.0); dim],
            n_qubits,
        }
    }

    /// The computational basis state holding spin vector `z`.
    pub fn basis(z: &SpinVector) -> Self {
        let n = z.len();
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[z.to_index() as usize] = Complex64::new(1.0, 0.0);
        StateVector { amps, n_qubits: n }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Multiplies amplitude `x` by `exp(i gamma cost[x] / 2)`.
    fn apply_phase(&mut self, table: &CostTable, gamma: f64) {
        match &table.integer {
            Some((offset, _)) => {
                let offset = *offset;
                let len = 2 * offset as usize + 1;
                let phases: Vec<Complex64> = (0..len)
                    .map(|k| Complex64::from_polar(1.0, 0.5 * gamma * (k as f64 - offset as f64)))
                    .collect();
                let idx = &table.integer.as_ref().unwrap().1;
                for (a, &k) in self.amps.iter_mut().zip(idx) {
                    *a *= phases[k as usize];
                }
            }
            None => {
                for (a, &c) in self.amps.iter_mut().zip(&table.values) {
                    *a *= Complex64::from_polar(1.0, 0.5 * gamma * c);
                }
            }
        }
    }

    /// `exp(-i beta X_q)` on one qubit.
    fn apply_rx(&mut self, q: usize, beta: f64) {
        let (s, c) = beta.sin_cos();
        let stride = 1usize << q;
        for block in self.amps.chunks_exact_mut(2 * stride) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                // c*x - i s*y,  c*y - i s*x
                *a = Complex64::new(c * x.re + s * y.im, c * x.im - s * y.re);
                *b = Complex64::new(c * y.re + s * x.im, c * y.im - s * x.re);
            }
        }
    }
}

/// Diagonal of the cost operator, `C(x)` for every basis index.
pub(crate) struct CostTable {
    values: Vec<f64>,
    /// For integer-weighted problems: an offset and `C(x) + offset` per index,
    /// which lets each layer look phases up instead of evaluating `exp`.
    integer: Option<(i64, Vec<u32>)>,
}

impl CostTable {
    pub(crate) fn new(problem: &Problem) -> Self {
        let n = problem.n_vars();
        let adj = problem.adjacency();
        let mut values = vec![0.0; 1 << n];
        values[0] = problem.total_weight();
        for h in 0..n {
            let lower: Vec<(usize, f64)> = adj.iter(h).filter(|&(k, _)| k < h).collect();
            let upper: f64 = adj.iter(h).filter(|&(k, _)| k > h).map(|(_, w)| w).sum();
            let bit = 1usize << h;
            let (done, rest) = values.split_at_mut(bit);
            for (x, (src, dst)) in done.iter().zip(rest.iter_mut()).enumerate() {
                // flipping spin h from +1 to -1 changes C by -2 * (its field)
                let field: f64 = lower
                    .iter()
                    .map(|&(k, w)| if (x >> k) & 1 == 0 { w } else { -w })
                    .sum::<f64>()
                    + upper;
                *dst = src - 2.0 * field;
            }
        }
        let bound = problem.total_abs_weight();
        let integer = (problem.edges().iter().all(|e| e.weight.fract() == 0.0) && bound <= 1e6).then(|| {
            let offset = bound as i64;
            let idx = values.iter().map(|&c| (c.round() as i64 + offset) as u32).collect();
            (offset, idx)
        });
        CostTable { values, integer }
    }

    #[cfg(test)]
    pub(crate) fn values(&self) -> &[f64] {
        &self.values
    }
}

fn check_cap(problem: &Problem, cap: usize) -> Result<()> {
    if problem.n_vars() > cap {
        return Err(Error::Capacity {
            what: format!("state-vector emulation of {} variables", problem.n_vars()),
            required: problem.n_vars(),
            cap,
        });
    }
    Ok(())
}

/// Prepares the QAOA state for `problem` under the default qubit cap.
pub fn apply_qaoa(problem: &Problem, angles: &AngleSchedule) -> Result<StateVector> {
    apply_qaoa_capped(problem, angles, DEFAULT_QUBIT_CAP)
}

pub fn apply_qaoa_capped(problem: &Problem, angles: &AngleSchedule, cap: usize) -> Result<StateVector> {
    check_cap(problem, cap)?;
    let table = CostTable::new(problem);
    Ok(evolve(problem.n_vars(), &table, angles, None))
}

/// Runs the circuit. With `last_mixer = Some(qubits)`, the final mixer layer
/// is applied to those qubits only, which leaves every observable supported
/// on them unchanged.
pub(crate) fn evolve(n: usize, table: &CostTable, angles: &AngleSchedule, last_mixer: Option<&[usize]>) -> StateVector {
    let mut state = StateVector::uniform(n);
    let p = angles.p();
    for layer in 0..p {
        state.apply_phase(table, angles.gammas[layer]);
        let beta = angles.betas[layer];
        match last_mixer {
            Some(qubits) if layer + 1 == p => {
                for &q in qubits {
                    state.apply_rx(q, beta);
                }
            }
            _ => {
                for q in 0..n {
                    state.apply_rx(q, beta);
                }
            }
        }
    }
    state
}

fn check_dims(state: &StateVector, problem: &Problem) -> Result<()> {
    if state.n_qubits != problem.n_vars() {
        return Err(Error::Dimension {
            expected: problem.n_vars(),
            actual: state.n_qubits,
        });
    }
    Ok(())
}

/// `<C> = sum_x |psi(x)|^2 C(x)`.
pub fn expectation_objective(state: &StateVector, problem: &Problem) -> Result<f64> {
    check_dims(state, problem)?;
    let table = CostTable::new(problem);
    Ok(expectation_with(state, &table))
}

fn expectation_with(state: &StateVector, table: &CostTable) -> f64 {
    state
        .amps
        .iter()
        .zip(&table.values)
        .map(|(a, c)| a.norm_sqr() * c)
        .sum()
}

/// `<Z_i Z_j>`.
pub fn correlation(state: &StateVector, i: usize, j: usize) -> Result<f64> {
    for idx in [i, j] {
        if idx >= state.n_qubits {
            return Err(Error::Index {
                index: idx,
                n: state.n_qubits,
            });
        }
    }
    if i == j {
        return Ok(1.0);
    }
    let mask = (1usize << i) | (1usize << j);
    Ok(state
        .amps
        .iter()
        .enumerate()
        .map(|(x, a)| {
            let p = a.norm_sqr();
            if (x & mask).count_ones() == 1 {
                -p
            } else {
                p
            }
        })
        .sum())
}

/// `<Z_i>`.
pub fn magnetization(state: &StateVector, i: usize) -> Result<f64> {
    if i >= state.n_qubits {
        return Err(Error::Index {
            index: i,
            n: state.n_qubits,
        });
    }
    Ok(state
        .amps
        .iter()
        .enumerate()
        .map(|(x, a)| if (x >> i) & 1 == 1 { -a.norm_sqr() } else { a.norm_sqr() })
        .sum())
}

/// Every `<Z_i Z_j>` at once, as a dense row-major `n x n` matrix with unit
/// diagonal.
///
/// The Walsh-Hadamard transform of the probability vector holds
/// `<prod_{k in S} Z_k>` at index `S`; the two-bit indices are the pair
/// correlations. Costs `O(n 2^n)` instead of `O(n^2 2^n)`.
pub fn all_correlations(state: &StateVector) -> Vec<f64> {
    let n = state.n_qubits;
    let mut f = state.probabilities();
    let mut h = 1;
    while h < f.len() {
        for block in f.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        out[i * n + i] = 1.0;
        for j in i + 1..n {
            let v = f[(1 << i) | (1 << j)];
            out[i * n + j] = v;
            out[j * n + i] = v;
        }
    }
    out
}

/// Draws `k` basis states from `|psi(x)|^2`.
pub fn sample_bitstrings(state: &StateVector, k: usize, seed: u64) -> Result<Vec<SpinVector>> {
    if k == 0 {
        return Err(Error::invalid("need at least one sample"));
    }
    let mut cdf = Vec::with_capacity(state.amps.len());
    let mut acc = 0.0;
    for a in &state.amps {
        acc += a.norm_sqr();
        cdf.push(acc);
    }
    let total = acc;
    let mut rng = rng_from_seed(seed);
    Ok((0..k)
        .map(|_| {
            let u = rng.random::<f64>() * total;
            let x = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
            SpinVector::from_index(x as u64, state.n_qubits)
        })
        .collect())
}

/// Result of a multi-start angle search.
#[derive(Clone, Debug)]
pub struct AngleSearch {
    pub angles: AngleSchedule,
    pub value: f64,
    /// Best value reached from each start, in start order.
    pub per_start: Vec<f64>,
}

/// Root-mean-square local coupling `sqrt(sum_ij W_ij^2 / N)`: the rate at
/// which the phase layer winds with `gamma`. Angle searches run in
/// `gamma * coupling_scale`.
pub fn coupling_scale(problem: &Problem) -> f64 {
    let n = problem.n_vars().max(1) as f64;
    let s = (2.0 * problem.edges().iter().map(|e| e.weight * e.weight).sum::<f64>() / n).sqrt();
    if s.is_normal() {
        s
    } else {
        1.0
    }
}

/// Minimizes `<C>_p` over the angles with BFGS from `restarts` uniform random
/// starts (`gamma * coupling_scale` in `[-pi, pi]`, `beta` in `[0, pi)`),
/// returning the best schedule and its energy.
pub fn optimize_angles(problem: &Problem, p: usize, restarts: usize, seed: u64) -> Result<(AngleSchedule, f64)> {
    check_cap(problem, DEFAULT_QUBIT_CAP)?;
    let table = CostTable::new(problem);
    let n = problem.n_vars();
    let search = optimize_angles_with(
        |angles| expectation_with(&evolve(n, &table, angles, None), &table),
        p,
        restarts,
        seed,
        coupling_scale(problem),
    )?;
    Ok((search.angles, search.value))
}

/// Multi-start angle search against an arbitrary energy function, for callers
/// that evaluate `<C>_p` without a full state vector. The search variable for
/// each `gamma` is `gamma * gamma_scale`.
pub fn optimize_angles_with(
    mut energy: impl FnMut(&AngleSchedule) -> f64,
    p: usize,
    restarts: usize,
    seed: u64,
    gamma_scale: f64,
) -> Result<AngleSearch> {
    if p == 0 {
        return Err(Error::invalid("angle search needs p >= 1"));
    }
    if !(gamma_scale.is_finite() && gamma_scale > 0.0) {
        return Err(Error::invalid(format!("gamma scale must be positive, got {gamma_scale}")));
    }
    let unscale = |x: &[f64]| {
        let mut y = x.to_vec();
        y[..p].iter_mut().for_each(|g| *g /= gamma_scale);
        y
    };
    if restarts == 0 {
        return Err(Error::invalid("need at least one restart"));
    }
    let opts = BfgsOptions::default();
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut per_start = Vec::with_capacity(restarts);
    for r in 0..restarts {
        let mut rng = rng_from_seed(derive_seed(seed, &[r as u64]));
        let mut x0: Vec<f64> = (0..p).map(|_| rng.random_range(-std::f64::consts::PI..=std::f64::consts::PI)).collect();
        x0.extend((0..p).map(|_| rng.random_range(0.0..std::f64::consts::PI)));
        let mut f = |x: &[f64]| energy(&AngleSchedule::from_flat(&unscale(x)).expect("even length"));
        let (x, fx) = minimize_bfgs(&mut f, x0, &opts)?;
        per_start.push(fx);
        if best.as_ref().is_none_or(|(_, b)| fx < *b) {
            best = Some((x, fx));
        }
    }
    let (x, value) = best.expect("restarts >= 1");
    Ok(AngleSearch {
        angles: AngleSchedule::from_flat(&unscale(&x))?,
        value,
        per_start,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{gen_random_regular, gen_sk, objective_unchecked, ProblemKind};
    use crate::rng::rng_from_seed;
    use proptest::prelude::*;

    fn random_weighted(n: usize, seed: u64) -> Problem {
        let mut rng = rng_from_seed(seed);
        let mut entries = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random::<f64>() < 0.5 {
                    entries.push((i, j, rng.random_range(-1.5..1.5)));
                }
            }
        }
        Problem::new(n, ProblemKind::Custom, entries).unwrap()
    }

    fn random_angles(p: usize, seed: u64) -> AngleSchedule {
        let mut rng = rng_from_seed(seed);
        AngleSchedule::new(
            (0..p).map(|_| rng.random_range(-3.0..3.0)).collect(),
            (0..p).map(|_| rng.random_range(0.0..3.0)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn cost_table_matches_direct_evaluation() {
        for seed in 0..5 {
            let p = random_weighted(9, seed);
            let t = CostTable::new(&p);
            for x in 0..(1u64 << 9) {
                let z = SpinVector::from_index(x, 9);
                assert!((t.values[x as usize] - objective_unchecked(&p, z.as_slice())).abs() < 1e-12);
            }
        }
        let g = gen_random_regular(10, 3, 1).unwrap();
        let t = CostTable::new(&g);
        assert!(t.integer.is_some());
    }

    #[test]
    fn depth_zero_is_uniform() {
        let g = gen_random_regular(8, 3, 0).unwrap();
        let s = apply_qaoa(&g, &AngleSchedule::uniform()).unwrap();
        let a = 2f64.powf(-4.0);
        assert!(s.amplitudes().iter().all(|c| (c.re - a).abs() < 1e-15 && c.im == 0.0));
        assert!(expectation_objective(&s, &g).unwrap().abs() < 1e-12);
        assert_eq!(correlation(&s, 0, 0).unwrap(), 1.0);
        assert!(correlation(&s, 0, 3).unwrap().abs() < 1e-15);
    }

    #[test]
    fn two_spin_closed_form() {
        for (w, gamma, beta) in [(1.0, 0.3, 0.2), (-0.7, 1.1, 0.9), (2.5, -0.4, 2.0)] {
            let p = Problem::new(2, ProblemKind::Custom, [(0, 1, w)]).unwrap();
            let s = apply_qaoa(&p, &AngleSchedule::p1(gamma, beta)).unwrap();
            let expect = -(4.0 * beta).sin() * (gamma * w).sin();
            assert!((correlation(&s, 0, 1).unwrap() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn basis_states() {
        let p = random_weighted(6, 3);
        let z = SpinVector::new(vec![1, -1, -1, 1, -1, 1]).unwrap();
        let s = StateVector::basis(&z);
        assert_eq!(expectation_objective(&s, &p).unwrap(), objective_unchecked(&p, z.as_slice()));
        let samples = sample_bitstrings(&s, 50, 1).unwrap();
        assert!(samples.iter().all(|x| *x == z));
    }

    #[test]
    fn capacity_and_index_errors() {
        let p = Problem::new(27, ProblemKind::Custom, [(0, 1, 1.0)]).unwrap();
        assert!(matches!(apply_qaoa(&p, &AngleSchedule::uniform()), Err(Error::Capacity { .. })));
        let s = StateVector::uniform(3);
        assert!(matches!(correlation(&s, 0, 3), Err(Error::Index { .. })));
        assert!(expectation_objective(&s, &random_weighted(4, 0)).is_err());
        assert!(sample_bitstrings(&s, 0, 0).is_err());
    }

    #[test]
    fn uniform_sampling_bit_means() {
        let s = StateVector::uniform(8);
        let k = 100_000;
        let samples = sample_bitstrings(&s, k, 11).unwrap();
        for q in 0..8 {
            let ones = samples.iter().filter(|z| z.get(q) < 0).count() as f64 / k as f64;
            assert!((ones - 0.5).abs() < 4.0 / (2.0 * (k as f64).sqrt()), "qubit {q}: {ones}");
        }
    }

    #[test]
    fn sampled_correlation_error_shrinks_like_inverse_sqrt() {
        let g = gen_random_regular(10, 3, 4).unwrap();
        let s = apply_qaoa(&g, &AngleSchedule::regular3_p1()).unwrap();
        let exact = correlation(&s, 0, g.edges()[0].j).unwrap();
        let (i, j) = (0, g.edges()[0].j);
        let mut points = Vec::new();
        for &k in &[100usize, 1000, 10_000] {
            let mut se = 0.0;
            let reps = 40;
            for r in 0..reps {
                let zs = sample_bitstrings(&s, k, 1000 * k as u64 + r).unwrap();
                let est = zs.iter().map(|z| f64::from(z.get(i) * z.get(j))).sum::<f64>() / k as f64;
                se += (est - exact).powi(2);
            }
            points.push(((k as f64).ln(), (se / reps as f64).sqrt().ln()));
        }
        let slope = crate::diagnostics::ols(&points).unwrap().slope;
        assert!((slope + 0.5).abs() < 0.1, "slope {slope}");
    }

    #[test]
    fn fast_path_and_walsh_transform_agree_with_direct() {
        let p = random_weighted(8, 21);
        let angles = random_angles(2, 5);
        let table = CostTable::new(&p);
        let full = evolve(8, &table, &angles, None);
        let all = all_correlations(&full);
        for i in 0..8 {
            for j in 0..8 {
                let direct = correlation(&full, i, j).unwrap();
                assert!((all[i * 8 + j] - direct).abs() < 1e-12);
                if i != j {
                    let partial = evolve(8, &table, &angles, Some(&[i, j]));
                    assert!((correlation(&partial, i, j).unwrap() - direct).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn optimizes_single_edge() {
        let p = Problem::new(2, ProblemKind::Custom, [(0, 1, 1.0)]).unwrap();
        let (angles, value) = optimize_angles(&p, 1, 20, 3).unwrap();
        assert!((value + 1.0).abs() < 1e-6, "{value}");
        let (g, b) = (angles.gammas()[0], angles.betas()[0]);
        assert!(((4.0 * b).sin() * g.sin() - 1.0).abs() < 1e-5);
    }

    /// Edge light cone of the infinite 3-regular tree at depth `p`.
    fn regular3_edge_tree(p: usize) -> Problem {
        let mut edges = vec![(0, 1, 1.0)];
        let mut frontier = vec![0, 1];
        let mut next = 2;
        for _ in 0..p {
            let mut grown = Vec::new();
            for &v in &frontier {
                for _ in 0..2 {
                    edges.push((v, next, 1.0));
                    grown.push(next);
                    next += 1;
                }
            }
            frontier = grown;
        }
        Problem::new(next, ProblemKind::Custom, edges).unwrap()
    }

    #[test]
    fn regular3_presets_are_tree_optimal() {
        let p1 = correlation(&apply_qaoa(&regular3_edge_tree(1), &AngleSchedule::regular3_p1()).unwrap(), 0, 1).unwrap();
        assert!((p1 + 2.0 / 27f64.sqrt()).abs() < 1e-12);
        assert!(((1.0 - p1) / 2.0 - 0.6925).abs() < 1e-4);
        let tree = regular3_edge_tree(2);
        let energy = |a: &AngleSchedule| correlation(&apply_qaoa(&tree, a).unwrap(), 0, 1).unwrap();
        let p2 = energy(&AngleSchedule::regular3_p2());
        assert!(((1.0 - p2) / 2.0 - 0.7559).abs() < 1e-4);
        let best = optimize_angles_with(energy, 2, 3, 1, 1.0).unwrap();
        assert!(p2 - best.value < 1e-9, "{p2} vs {}", best.value);
    }

    #[test]
    fn angle_search_follows_weight_scale() {
        let g = gen_random_regular(10, 3, 4).unwrap();
        let heavy = g.map_weights(|w| 40.0 * w);
        let (a, va) = optimize_angles(&g, 1, 4, 5).unwrap();
        let (b, vb) = optimize_angles(&heavy, 1, 4, 5).unwrap();
        assert!((vb - 40.0 * va).abs() < 1e-6 * vb.abs(), "{va} {vb}");
        assert!((b.gammas()[0].abs() * 40.0 - a.gammas()[0].abs()).abs() < 1e-5);
    }

    #[test]
    fn angle_search_is_deterministic() {
        let p = gen_sk(6, 2).unwrap();
        let a = optimize_angles(&p, 1, 1, 17).unwrap();
        let b = optimize_angles(&p, 1, 1, 17).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1.to_bits(), b.1.to_bits());
    }

    #[test]
    fn linearity_of_expectation() {
        let g = gen_random_regular(12, 3, 8).unwrap();
        let (angles, _) = optimize_angles(&g, 1, 3, 1).unwrap();
        let s = apply_qaoa(&g, &angles).unwrap();
        let by_pairs: f64 = g
            .edges()
            .iter()
            .map(|e| e.weight * correlation(&s, e.i, e.j).unwrap())
            .sum();
        assert!((expectation_objective(&s, &g).unwrap() - by_pairs).abs() < 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn norm_symmetry_and_zero_magnetization(seed in 0u64..10_000, n in 2usize..9, p in 1usize..4) {
            let prob = random_weighted(n, seed);
            let angles = random_angles(p, seed ^ 77);
            let table = CostTable::new(&prob);
            for depth in 0..=p {
                let partial = AngleSchedule::new(angles.gammas()[..depth].to_vec(), angles.betas()[..depth].to_vec()).unwrap();
                let s = evolve(n, &table, &partial, None);
                prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
            }
            let s = evolve(n, &table, &angles, None);
            let full = (1usize << n) - 1;
            for (x, a) in s.amplitudes().iter().enumerate() {
                prop_assert!((a.norm() - s.amplitudes()[full ^ x].norm()).abs() < 1e-12);
            }
            for i in 0..n {
                prop_assert!(magnetization(&s, i).unwrap().abs() < 1e-10);
                for j in 0..n {
                    let c = correlation(&s, i, j).unwrap();
                    prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&c));
                }
            }
        }
    }
}
