//! Quantum preconditioning front end.
//!
//! [`precondition`] maps a problem `W` to `Z^(p)` with
//! `Z_ij = -<Z_i Z_j>_p` for `i != j`. The diagonal of the correlation
//! matrix is never stored. Three engines compute the same numbers:
//!
//! - [`Engine::AnalyticP1`]: the closed-form `p = 1` correlation, `O(N)` per
//!   pair, for dense problems of any size.
//! - [`Engine::Lightcone`]: exact emulation of each pair's causal cone, for
//!   sparse problems.
//! - [`Engine::FullStateVector`]: one `N`-qubit emulation for small `N`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lightcone::{self, build_correlation_matrix_with, CorrelationMode, LightconeOptions};
use crate::problems::{Problem, ProblemKind, SpinVector, SPARSITY_THRESHOLD};
use crate::qaoa::{
    all_correlations, apply_qaoa_capped, coupling_scale, optimize_angles, optimize_angles_with, sample_bitstrings, AngleSchedule,
    DEFAULT_QUBIT_CAP,
};

/// Where the QAOA angles come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum AngleSource {
    Provided(AngleSchedule),
    /// `gamma = 1/(2 sqrt N)`, `beta = pi/8`; `p = 1` only.
    SkDefault,
    /// Multi-start BFGS on `<C>_p`.
    Optimize { restarts: usize, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Engine {
    Auto,
    AnalyticP1,
    Lightcone,
    FullStateVector,
}

impl std::fmt::Display for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Engine::Auto => "auto",
            Engine::AnalyticP1 => "analytic",
            Engine::Lightcone => "lightcone",
            Engine::FullStateVector => "statevector",
        })
    }
}

impl std::str::FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Engine::Auto),
            "analytic" | "analytic-p1" => Ok(Engine::AnalyticP1),
            "lightcone" => Ok(Engine::Lightcone),
            "statevector" | "full" => Ok(Engine::FullStateVector),
            _ => Err(Error::invalid(format!("unknown engine '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrecondOptions {
    pub p: usize,
    pub angle_source: AngleSource,
    pub engine: Engine,
    /// `(K, seed)`: estimate correlations from `K` shots.
    pub sampling: Option<(usize, u64)>,
    /// Global depolarizing fidelity applied after everything else.
    pub noise_f: Option<f64>,
    pub qubit_cap: usize,
}

impl PrecondOptions {
    /// Depth `p`, optimized angles (8 restarts, seed 0), automatic engine.
    pub fn new(p: usize) -> Self {
        PrecondOptions {
            p,
            angle_source: AngleSource::Optimize { restarts: 8, seed: 0 },
            engine: Engine::Auto,
            sampling: None,
            noise_f: None,
            qubit_cap: DEFAULT_QUBIT_CAP,
        }
    }

    pub fn with_angles(mut self, source: AngleSource) -> Self {
        self.angle_source = source;
        self
    }

    pub fn with_engine(mut self, engine: Engine) -> Self {
        self.engine = engine;
        self
    }

    pub fn with_sampling(mut self, k: usize, seed: u64) -> Self {
        self.sampling = Some((k, seed));
        self
    }

    pub fn with_noise(mut self, f: f64) -> Self {
        self.noise_f = Some(f);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::invalid("preconditioning needs p >= 1"));
        }
        if self.engine == Engine::AnalyticP1 && self.p != 1 {
            return Err(Error::invalid("the analytic engine is p = 1 only"));
        }
        if let Some(f) = self.noise_f {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::invalid(format!("fidelity {f} outside [0, 1]")));
            }
        }
        if let Some((0, _)) = self.sampling {
            return Err(Error::invalid("sampling needs K >= 1"));
        }
        if self.sampling.is_some() && self.engine == Engine::AnalyticP1 {
            return Err(Error::invalid("sampling needs a circuit engine, not the analytic formula"));
        }
        match &self.angle_source {
            AngleSource::Provided(a) if a.p() != self.p => Err(Error::invalid(format!(
                "provided angles have depth {}, expected {}",
                a.p(),
                self.p
            ))),
            AngleSource::SkDefault if self.p != 1 => Err(Error::invalid("SK default angles are p = 1 only")),
            AngleSource::Optimize { restarts: 0, .. } => Err(Error::invalid("need at least one restart")),
            _ => Ok(()),
        }
    }
}

/// `gamma = 1/(2 sqrt N)`, `beta = pi/8`.
pub fn sk_default_angles(n: usize) -> Result<AngleSchedule> {
    perturbed_sk_angles(n, 0.0, 0.0)
}

/// SK default angles displaced by `epsilon` in direction `theta` of the
/// `(gamma sqrt N, beta)` plane.
pub fn perturbed_sk_angles(n: usize, epsilon: f64, theta: f64) -> Result<AngleSchedule> {
    if n < 2 {
        return Err(Error::invalid("SK angles need n >= 2"));
    }
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(Error::invalid("epsilon must be non-negative"));
    }
    let root = (n as f64).sqrt();
    Ok(AngleSchedule::p1(
        (epsilon * theta.cos() + 0.5) / root,
        epsilon * theta.sin() + PI / 8.0,
    ))
}

fn check_index(problem: &Problem, i: usize) -> Result<()> {
    if i >= problem.n_vars() {
        return Err(Error::Index {
            index: i,
            n: problem.n_vars(),
        });
    }
    Ok(())
}

/// Closed-form `p = 1` correlation `<Z_i Z_j>`.
pub fn analytic_p1_correlation(problem: &Problem, gamma: f64, beta: f64, i: usize, j: usize) -> Result<f64> {
    check_index(problem, i)?;
    check_index(problem, j)?;
    if i == j {
        return Err(Error::invalid("analytic correlation needs i != j"));
    }
    let n = problem.n_vars();
    let row = |a: usize| {
        let mut w = vec![0.0; n];
        for (k, x) in problem.adjacency().iter(a) {
            w[k] = x;
        }
        w
    };
    let (wi, wj) = (row(i), row(j));
    Ok(p1_pair(gamma, beta, wi[j], (0..n).filter(|&k| k != i && k != j).map(|k| (wi[k], wj[k]))))
}

fn p1_pair(gamma: f64, beta: f64, wij: f64, others: impl Iterator<Item = (f64, f64)>) -> f64 {
    let (mut pi, mut pj, mut plus, mut minus) = (1.0, 1.0, 1.0, 1.0);
    for (a, b) in others {
        let (ca, cb) = ((gamma * a).cos(), (gamma * b).cos());
        pi *= ca;
        pj *= cb;
        plus *= (gamma * (a + b)).cos();
        minus *= (gamma * (b - a)).cos();
    }
    let s2 = (2.0 * beta).sin();
    -s2 * (2.0 * beta).cos() * (gamma * wij).sin() * (pi + pj) - 0.5 * s2 * s2 * (plus - minus)
}

/// All `p = 1` correlations, dense row-major `N x N` with unit diagonal.
fn analytic_p1_matrix(problem: &Problem, gamma: f64, beta: f64) -> Vec<f64> {
    let n = problem.n_vars();
    let mut cos = vec![1.0; n * n];
    let mut sin = vec![0.0; n * n];
    for e in problem.edges() {
        let (c, s) = ((gamma * e.weight).cos(), (gamma * e.weight).sin());
        for (a, b) in [(e.i, e.j), (e.j, e.i)] {
            cos[a * n + b] = c;
            sin[a * n + b] = s;
        }
    }
    let s2 = (2.0 * beta).sin();
    let c2 = (2.0 * beta).cos();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        out[i * n + i] = 1.0;
        for j in i + 1..n {
            let (mut pi, mut pj, mut plus, mut minus) = (1.0, 1.0, 1.0, 1.0);
            let (ci, si) = (&cos[i * n..(i + 1) * n], &sin[i * n..(i + 1) * n]);
            let (cj, sj) = (&cos[j * n..(j + 1) * n], &sin[j * n..(j + 1) * n]);
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                pi *= ci[k];
                pj *= cj[k];
                let cc = ci[k] * cj[k];
                let ss = si[k] * sj[k];
                plus *= cc - ss;
                minus *= cc + ss;
            }
            let c = -s2 * c2 * sin[i * n + j] * (pi + pj) - 0.5 * s2 * s2 * (plus - minus);
            out[i * n + j] = c;
            out[j * n + i] = c;
        }
    }
    out
}

/// `(1/K) sum_k z_i^(k) z_j^(k)`.
pub fn estimate_from_samples(samples: &[SpinVector], i: usize, j: usize) -> Result<f64> {
    let first = samples.first().ok_or_else(|| Error::invalid("no samples"))?;
    for idx in [i, j] {
        if idx >= first.len() {
            return Err(Error::Index {
                index: idx,
                n: first.len(),
            });
        }
    }
    let mut acc = 0i64;
    for s in samples {
        if s.len() != first.len() {
            return Err(Error::Dimension {
                expected: first.len(),
                actual: s.len(),
            });
        }
        acc += i64::from(s.get(i) * s.get(j));
    }
    Ok(acc as f64 / samples.len() as f64)
}

/// `Z^(inf)` off the diagonal: `Z_ij = -z_i z_j`.
pub fn ideal_preconditioner(z_opt: &SpinVector) -> Result<Problem> {
    let n = z_opt.len();
    let z = z_opt.as_slice();
    let entries = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j, -f64::from(z[i] * z[j]))));
    Problem::new(n, ProblemKind::IdealInfiniteDepth, entries)
}

/// Multiplies every entry by the global fidelity `F`. Entries are kept even
/// when they fall below the sparsity threshold.
pub fn apply_depolarizing(z: &Problem, f: f64) -> Result<Problem> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::invalid(format!("fidelity {f} outside [0, 1]")));
    }
    let mut out = z.map_weights(|w| w * f);
    out.set_provenance("F", f);
    Ok(out)
}

/// Whether the pair cones at depth `p` are strictly smaller than the graph.
fn is_sparse(problem: &Problem, p: usize) -> bool {
    let d = problem.adjacency().max_degree();
    lightcone::subgraph_size_bound(d, p, usize::MAX) < problem.n_vars()
}

fn resolve_engine(problem: &Problem, opts: &PrecondOptions) -> Result<Engine> {
    let n = problem.n_vars();
    Ok(match opts.engine {
        Engine::Auto => {
            if is_sparse(problem, opts.p) {
                Engine::Lightcone
            } else if opts.p == 1 && opts.sampling.is_none() {
                Engine::AnalyticP1
            } else if n <= opts.qubit_cap {
                Engine::FullStateVector
            } else {
                return Err(Error::Capacity {
                    what: format!("dense depth-{} preconditioning of {n} variables", opts.p),
                    required: n,
                    cap: opts.qubit_cap,
                });
            }
        }
        e => e,
    })
}

/// Angles for `problem` per `opts.angle_source`.
pub fn resolve_angles(problem: &Problem, opts: &PrecondOptions) -> Result<AngleSchedule> {
    match &opts.angle_source {
        AngleSource::Provided(a) => Ok(a.clone()),
        AngleSource::SkDefault => sk_default_angles(problem.n_vars()),
        &AngleSource::Optimize { restarts, seed } => {
            if problem.n_vars() <= 20 {
                Ok(optimize_angles(problem, opts.p, restarts, seed)?.0)
            } else if is_sparse(problem, opts.p) {
                let mut err = None;
                let search = optimize_angles_with(
                    |a| match lightcone::lightcone_energy(problem, a, opts.qubit_cap) {
                        Ok(v) => v,
                        Err(e) => {
                            err.get_or_insert(e);
                            f64::NAN
                        }
                    },
                    opts.p,
                    restarts,
                    seed,
                    coupling_scale(problem),
                );
                if let Some(e) = err {
                    return Err(e);
                }
                Ok(search?.angles)
            } else {
                Err(Error::invalid(format!(
                    "angle optimization on a dense problem of {} variables; provide angles instead",
                    problem.n_vars()
                )))
            }
        }
    }
}

/// Builds `Z^(p)` for `problem`.
pub fn precondition(problem: &Problem, opts: &PrecondOptions) -> Result<Problem> {
    opts.validate()?;
    let angles = resolve_angles(problem, opts)?;
    let engine = resolve_engine(problem, opts)?;
    let n = problem.n_vars();
    let p = opts.p;

    let from_dense = |corr: &[f64]| {
        let entries = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j, -corr[i * n + j])));
        Problem::new(n, ProblemKind::Preconditioned(p), entries.filter(|e| e.2.abs() >= SPARSITY_THRESHOLD))
    };

    let mut out = match engine {
        Engine::AnalyticP1 => {
            if p != 1 {
                return Err(Error::invalid("the analytic engine is p = 1 only"));
            }
            from_dense(&analytic_p1_matrix(problem, angles.gammas()[0], angles.betas()[0]))?
        }
        Engine::Lightcone => {
            let mode = match opts.sampling {
                Some((k, seed)) => CorrelationMode::Sampled { k, seed },
                None => CorrelationMode::Exact,
            };
            let lc = LightconeOptions {
                qubit_cap: opts.qubit_cap,
                cache_trees: true,
            };
            build_correlation_matrix_with(problem, p, &angles, mode, &lc)?.0
        }
        Engine::FullStateVector => {
            let state = apply_qaoa_capped(problem, &angles, opts.qubit_cap)?;
            match opts.sampling {
                None => from_dense(&all_correlations(&state))?,
                Some((k, seed)) => {
                    // one shot set serves every pair
                    let shots = sample_bitstrings(&state, k, seed)?;
                    let mut acc = vec![0i64; n * n];
                    for s in &shots {
                        let z = s.as_slice();
                        for i in 0..n {
                            for j in i + 1..n {
                                acc[i * n + j] += i64::from(z[i] * z[j]);
                            }
                        }
                    }
                    let corr: Vec<f64> = acc.iter().map(|&a| a as f64 / k as f64).collect();
                    from_dense(&corr)?
                }
            }
        }
        Engine::Auto => unreachable!("resolved above"),
    };
    out.set_provenance("p", p);
    out.set_provenance("gammas", format!("{:?}", angles.gammas()));
    out.set_provenance("betas", format!("{:?}", angles.betas()));
    out.set_provenance("engine", engine);
    out.set_provenance("parent_kind", problem.kind());
    if let Some((k, _)) = opts.sampling {
        out.set_provenance("K", k);
    }
    if let Some(f) = opts.noise_f {
        out = apply_depolarizing(&out, f)?;
    }
    Ok(out)
}
