//! Experiment campaigns: instance ensembles, preconditioned variants, solver
//! grids and the CSV record stream.
//!
//! A campaign is described by a JSON manifest:
//!
//! ```json
//! {
//!   "problem": { "kind": "regular", "n": 64, "d": 3, "count": 20, "seed": 1 },
//!   "variants": [
//!     { "type": "original" },
//!     { "type": "precond", "p": 1, "angles": "regular3" }
//!   ],
//!   "solvers": [ { "solver": "sa", "n_iter": [1, 3, 10, 30, 100] } ]
//! }
//! ```
//!
//! Every random choice is derived from `problem.seed` and the coordinates of
//! the cell it belongs to, so the records do not depend on `jobs`.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{approximation_ratio, ratio_objective};
use crate::error::{Error, Result};
use crate::precond::{ideal_preconditioner, precondition, AngleSource, Engine, PrecondOptions};
use crate::problems::{evaluate_objective, gen_random_regular, gen_sk, read_problem, Problem, SpinVector};
use crate::qaoa::AngleSchedule;
use crate::rng::{derive_seed, label_coord};
use crate::solvers::{brute_force, burer_monteiro, simulated_annealing, SolveTrace, BRUTE_FORCE_CAP};

/// Instance source.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProblemSpec {
    Regular { n: usize, d: usize, count: usize, seed: u64 },
    Sk { n: usize, count: usize, seed: u64 },
    /// Problems read from disk; `seed` drives the solvers.
    Files { paths: Vec<String>, seed: u64 },
}

impl ProblemSpec {
    fn count(&self) -> usize {
        match self {
            ProblemSpec::Regular { count, .. } | ProblemSpec::Sk { count, .. } => *count,
            ProblemSpec::Files { paths, .. } => paths.len(),
        }
    }

    fn seed(&self) -> u64 {
        match self {
            ProblemSpec::Regular { seed, .. } | ProblemSpec::Sk { seed, .. } | ProblemSpec::Files { seed, .. } => *seed,
        }
    }

    fn instance(&self, k: usize) -> Result<(String, Problem)> {
        let s = derive_seed(self.seed(), &[label_coord("instance"), k as u64]);
        match self {
            ProblemSpec::Regular { n, d, .. } => Ok((format!("regular-n{n}-d{d}-{k}"), gen_random_regular(*n, *d, s)?)),
            ProblemSpec::Sk { n, .. } => Ok((format!("sk-n{n}-{k}"), gen_sk(*n, s)?)),
            ProblemSpec::Files { paths, .. } => {
                let p = read_problem(&paths[k]).map_err(|e| e.context(format!("reading {}", paths[k])))?;
                Ok((paths[k].clone(), p))
            }
        }
    }
}

/// Named or explicit QAOA angles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AngleSpec {
    /// Tree-optimal 3-regular presets (`p` = 1 or 2).
    Regular3,
    SkDefault,
    Optimize { restarts: usize },
    Schedule(AngleSchedule),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum VariantSpec {
    Original,
    Precond {
        p: usize,
        angles: AngleSpec,
        #[serde(default = "auto_engine")]
        engine: Engine,
        #[serde(default)]
        samples: Option<usize>,
        #[serde(default)]
        noise_f: Option<f64>,
    },
    /// The infinite-depth preconditioner built from the exact optimum.
    Ideal,
}

fn auto_engine() -> Engine {
    Engine::Auto
}

impl VariantSpec {
    pub fn label(&self) -> String {
        match self {
            VariantSpec::Original => "original".into(),
            VariantSpec::Ideal => "ideal".into(),
            VariantSpec::Precond { p, samples, noise_f, .. } => {
                let mut s = format!("p={p}");
                if let Some(k) = samples {
                    s.push_str(&format!(";K={k}"));
                }
                if let Some(f) = noise_f {
                    s.push_str(&format!(";F={f}"));
                }
                s
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Sa,
    Bm,
}

impl SolverKind {
    pub fn label(self) -> &'static str {
        match self {
            SolverKind::Sa => "sa",
            SolverKind::Bm => "bm",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSpec {
    pub solver: SolverKind,
    /// Iteration counts to record. SA runs once per value (the schedule
    /// depends on the sweep count); BM runs once to the largest value and is
    /// read off at each.
    pub n_iter: Vec<usize>,
    #[serde(default = "one")]
    pub seeds: usize,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub problem: ProblemSpec,
    pub variants: Vec<VariantSpec>,
    pub solvers: Vec<SolverSpec>,
    /// Worker threads.
    #[serde(default = "one")]
    pub jobs: usize,
    /// Solver timings are the median over this many identical runs.
    #[serde(default = "one")]
    pub timing_repeats: usize,
    /// Extra SA sweeps spent on improving the best-known optimum when brute
    /// force is out of reach (0 disables).
    #[serde(default)]
    pub reference_sweeps: usize,
}

impl CampaignConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let cfg = Self::from_json(&std::fs::read_to_string(path)?)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.problem.count() == 0 {
            return Err(Error::invalid("campaign has no instances"));
        }
        if self.variants.is_empty() {
            return Err(Error::invalid("campaign has no variants"));
        }
        if self.solvers.is_empty() {
            return Err(Error::invalid("campaign has no solvers"));
        }
        for s in &self.solvers {
            if s.n_iter.is_empty() || s.n_iter.contains(&0) {
                return Err(Error::invalid(format!("{} needs a non-empty grid of positive n_iter", s.solver.label())));
            }
            if s.seeds == 0 {
                return Err(Error::invalid("seeds must be >= 1"));
            }
        }
        if self.jobs == 0 || self.timing_repeats == 0 {
            return Err(Error::invalid("jobs and timing_repeats must be >= 1"));
        }
        Ok(())
    }
}

/// One CSV row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance_id: String,
    pub kind: String,
    pub n_vars: usize,
    /// Terms of the problem the solver saw.
    pub n_terms: usize,
    pub variant: String,
    pub p: Option<usize>,
    pub engine: Option<String>,
    #[serde(rename = "K")]
    pub k: Option<usize>,
    #[serde(rename = "F")]
    pub f: Option<f64>,
    pub solver: String,
    pub n_iter: usize,
    /// Ising objective of the solution on the original problem.
    pub objective: f64,
    pub alpha: f64,
    pub elapsed_s: f64,
    pub precond_s: f64,
    pub seed: u64,
}

impl RunRecord {
    /// Equality ignoring wall-clock fields.
    pub fn same_outcome(&self, other: &RunRecord) -> bool {
        let strip = |r: &RunRecord| RunRecord {
            elapsed_s: 0.0,
            precond_s: 0.0,
            ..r.clone()
        };
        strip(self) == strip(other)
    }
}

pub const CSV_HEADER: [&str; 16] = [
    "instance_id",
    "kind",
    "n_vars",
    "n_terms",
    "variant",
    "p",
    "engine",
    "K",
    "F",
    "solver",
    "n_iter",
    "objective",
    "alpha",
    "elapsed_s",
    "precond_s",
    "seed",
];

pub fn write_records(records: &[RunRecord], writer: impl std::io::Write) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_records_csv(records: &[RunRecord], path: impl AsRef<Path>) -> Result<()> {
    write_records(records, std::fs::File::create(path)?)
}

pub fn read_records(reader: impl std::io::Read) -> Result<Vec<RunRecord>> {
    let mut r = csv::Reader::from_reader(reader);
    let header: Vec<String> = r.headers()?.iter().map(String::from).collect();
    if header != CSV_HEADER {
        return Err(Error::Integrity(format!("unexpected CSV header {header:?}")));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn read_records_csv(path: impl AsRef<Path>) -> Result<Vec<RunRecord>> {
    read_records(std::fs::File::open(path)?)
}

struct Variant {
    spec: VariantSpec,
    problem: Problem,
    precond_s: f64,
    engine: Option<String>,
}

fn build_variant(spec: &VariantSpec, original: &Problem, z_opt: Option<&SpinVector>, seed: u64) -> Result<Variant> {
    let start = Instant::now();
    let (problem, engine) = match spec {
        VariantSpec::Original => (original.clone(), None),
        VariantSpec::Ideal => {
            let z = z_opt.ok_or_else(|| Error::invalid(format!("the ideal variant needs N <= {BRUTE_FORCE_CAP}")))?;
            (ideal_preconditioner(z)?, None)
        }
        VariantSpec::Precond {
            p,
            angles,
            engine,
            samples,
            noise_f,
        } => {
            let source = match angles {
                AngleSpec::Regular3 => AngleSource::Provided(match p {
                    1 => AngleSchedule::regular3_p1(),
                    2 => AngleSchedule::regular3_p2(),
                    _ => return Err(Error::invalid("3-regular presets exist for p = 1 and 2")),
                }),
                AngleSpec::SkDefault => AngleSource::SkDefault,
                AngleSpec::Optimize { restarts } => AngleSource::Optimize {
                    restarts: *restarts,
                    seed: derive_seed(seed, &[label_coord("angles")]),
                },
                AngleSpec::Schedule(a) => AngleSource::Provided(a.clone()),
            };
            let mut opts = PrecondOptions::new(*p).with_angles(source).with_engine(*engine);
            if let Some(k) = samples {
                opts = opts.with_sampling(*k, derive_seed(seed, &[label_coord("samples")]));
            }
            if let Some(f) = noise_f {
                opts = opts.with_noise(*f);
            }
            let z = precondition(original, &opts)?;
            let engine = z.provenance().get("engine").cloned();
            (z, engine)
        }
    };
    Ok(Variant {
        spec: spec.clone(),
        problem,
        precond_s: start.elapsed().as_secs_f64(),
        engine,
    })
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// Runs `solve` `repeats` times and replaces the timings by their medians.
fn timed(repeats: usize, mut solve: impl FnMut() -> Result<SolveTrace>) -> Result<SolveTrace> {
    let mut trace = solve()?;
    if repeats > 1 {
        let mut per_cp: Vec<Vec<f64>> = trace.checkpoints.iter().map(|c| vec![c.elapsed_s]).collect();
        let mut total = vec![trace.elapsed_s];
        for _ in 1..repeats {
            let t = solve()?;
            for (acc, c) in per_cp.iter_mut().zip(&t.checkpoints) {
                acc.push(c.elapsed_s);
            }
            total.push(t.elapsed_s);
        }
        for (c, v) in trace.checkpoints.iter_mut().zip(per_cp) {
            c.elapsed_s = median(v);
        }
        trace.elapsed_s = median(total);
    }
    Ok(trace)
}

struct Pending {
    record: RunRecord,
    z: SpinVector,
}

fn run_instance(cfg: &CampaignConfig, k: usize) -> Result<Vec<RunRecord>> {
    let (id, original) = cfg.problem.instance(k)?;
    let base = derive_seed(cfg.problem.seed(), &[label_coord("cells"), k as u64]);
    let exact = if original.n_vars() <= BRUTE_FORCE_CAP {
        Some(brute_force(&original)?)
    } else {
        None
    };
    let mut pending: Vec<Pending> = Vec::new();
    for spec in &cfg.variants {
        let variant = build_variant(spec, &original, exact.as_ref().map(|e| &e.0), base)
            .map_err(|e| e.context(format!("instance {id}, variant {}", spec.label())))?;
        let (p, kk, f) = match spec {
            VariantSpec::Precond { p, samples, noise_f, .. } => (Some(*p), *samples, *noise_f),
            _ => (None, None, None),
        };
        for solver in &cfg.solvers {
            for s in 0..solver.seeds {
                let ctx = |e: Error| e.context(format!("instance {id}, variant {}, solver {}", spec.label(), solver.solver.label()));
                // common random numbers across variants
                let cell = |n_iter: usize| {
                    derive_seed(base, &[label_coord(solver.solver.label()), s as u64, n_iter as u64])
                };
                let mut rows: Vec<(usize, f64, SpinVector, u64)> = Vec::new();
                match solver.solver {
                    SolverKind::Sa => {
                        for &m in &solver.n_iter {
                            let seed = cell(m);
                            let t = timed(cfg.timing_repeats, || simulated_annealing(&variant.problem, m, seed, &[]))
                                .map_err(ctx)?;
                            rows.push((m, t.elapsed_s, t.best_z, seed));
                        }
                    }
                    SolverKind::Bm => {
                        let top = *solver.n_iter.iter().max().expect("validated");
                        let seed = cell(0);
                        let t = timed(cfg.timing_repeats, || burer_monteiro(&variant.problem, top, seed, &solver.n_iter))
                            .map_err(ctx)?;
                        for c in t.checkpoints {
                            rows.push((c.n_iter, c.elapsed_s, c.z, seed));
                        }
                    }
                }
                for (n_iter, elapsed, z, seed) in rows {
                    pending.push(Pending {
                        record: RunRecord {
                            instance_id: id.clone(),
                            kind: original.kind().to_string(),
                            n_vars: original.n_vars(),
                            n_terms: variant.problem.n_terms(),
                            variant: variant.spec.label(),
                            p,
                            engine: variant.engine.clone(),
                            k: kk,
                            f,
                            solver: solver.solver.label().into(),
                            n_iter,
                            objective: evaluate_objective(&original, &z)?,
                            alpha: f64::NAN,
                            elapsed_s: elapsed,
                            precond_s: variant.precond_s,
                            seed,
                        },
                        z,
                    });
                }
            }
        }
    }

    // c_opt: exact when possible, else the best configuration seen
    let z_ref = match exact {
        Some((z, _)) => z,
        None => {
            let mut best = pending
                .iter()
                .min_by(|a, b| a.record.objective.total_cmp(&b.record.objective))
                .map(|p| p.z.clone())
                .expect("validated grids are non-empty");
            if cfg.reference_sweeps > 0 {
                let seed = derive_seed(base, &[label_coord("reference")]);
                let t = simulated_annealing(&original, cfg.reference_sweeps, seed, &[])?;
                if t.best_objective < evaluate_objective(&original, &best)? {
                    best = t.best_z;
                }
            }
            best
        }
    };
    let c_opt = ratio_objective(&original, &z_ref)?;
    pending
        .into_iter()
        .map(|mut p| {
            p.record.alpha = approximation_ratio(&original, &p.z, c_opt)?;
            Ok(p.record)
        })
        .collect()
}

/// Runs every cell of the campaign; records come back in instance order.
pub fn run_campaign(config: &CampaignConfig) -> Result<Vec<RunRecord>> {
    config.validate()?;
    let count = config.problem.count();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    let per_instance: Vec<Vec<RunRecord>> =
        pool.install(|| (0..count).into_par_iter().map(|k| run_instance(config, k)).collect::<Result<_>>())?;
    Ok(per_instance.into_iter().flatten().collect())
}

/// Preconditioning budget of one variant against the original input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetRow {
    pub n_vars: usize,
    pub solver: String,
    pub variant: String,
    /// Mean solver time at the first grid point whose mean alpha reaches the
    /// target on the original input.
    pub t_original: Option<f64>,
    pub t_variant: Option<f64>,
    /// `t_original - t_variant`.
    pub budget: Option<f64>,
    pub precond_s: f64,
    /// Whether the mean preconditioning time fits inside the budget.
    pub fits: Option<bool>,
    pub reachable: bool,
}

pub fn write_budget(rows: &[BudgetRow], writer: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Mean time to reach `alpha_target` per (N, solver, variant), compared with
/// the original input.
pub fn budget_report(records: &[RunRecord], alpha_target: f64) -> Vec<BudgetRow> {
    // (n, solver, variant) -> n_iter -> (sum alpha, sum t, count)
    type Curve = BTreeMap<usize, (f64, f64, usize)>;
    let mut curves: BTreeMap<(usize, String, String), (Curve, f64, usize)> = BTreeMap::new();
    for r in records {
        let entry = curves
            .entry((r.n_vars, r.solver.clone(), r.variant.clone()))
            .or_insert_with(|| (Curve::new(), 0.0, 0));
        let cell = entry.0.entry(r.n_iter).or_insert((0.0, 0.0, 0));
        cell.0 += r.alpha;
        cell.1 += r.elapsed_s;
        cell.2 += 1;
        entry.1 += r.precond_s;
        entry.2 += 1;
    }
    let time_to_target = |curve: &Curve| {
        curve
            .values()
            .find(|(a, _, c)| a / *c as f64 >= alpha_target)
            .map(|(_, t, c)| t / *c as f64)
    };
    let mut rows = Vec::new();
    for ((n, solver, variant), (curve, pre_sum, pre_count)) in &curves {
        if variant == "original" {
            continue;
        }
        let t_original = curves
            .get(&(*n, solver.clone(), "original".to_string()))
            .and_then(|(c, _, _)| time_to_target(c));
        let t_variant = time_to_target(curve);
        let precond_s = pre_sum / *pre_count as f64;
        let budget = t_original.zip(t_variant).map(|(o, v)| o - v);
        rows.push(BudgetRow {
            n_vars: *n,
            solver: solver.clone(),
            variant: variant.clone(),
            t_original,
            t_variant,
            budget,
            precond_s,
            fits: budget.map(|b| precond_s <= b),
            reachable: budget.is_some(),
        });
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(variant: &str, n_iter: usize, alpha: f64, elapsed: f64, pre: f64) -> RunRecord {
        RunRecord {
            instance_id: "x".into(),
            kind: "maxcut-regular".into(),
            n_vars: 100,
            n_terms: 150,
            variant: variant.into(),
            p: None,
            engine: None,
            k: None,
            f: None,
            solver: "sa".into(),
            n_iter,
            objective: -1.0,
            alpha,
            elapsed_s: elapsed,
            precond_s: pre,
            seed: 0,
        }
    }

    #[test]
    fn budget_arithmetic() {
        let recs = vec![
            record("original", 10, 0.9, 1.0, 0.0),
            record("original", 100, 0.99, 10.0, 0.0),
            record("p=1", 10, 0.99, 1.0, 0.5),
        ];
        let rows = budget_report(&recs, 0.99);
        assert_eq!(rows.len(), 1);
        assert!((rows[0].budget.unwrap() - 9.0).abs() < 1e-12);
        assert_eq!(rows[0].fits, Some(true));
        let rows = budget_report(&recs[2..], 0.99);
        assert!(!rows[0].reachable);
        assert_eq!(rows[0].fits, None);
    }

    #[test]
    fn csv_round_trip() {
        let mut r = record("p=1;K=100", 3, 0.5, 0.25, 0.125);
        r.p = Some(1);
        r.k = Some(100);
        r.engine = Some("lightcone".into());
        let mut buf = Vec::new();
        write_records(&[r.clone(), record("original", 1, 1.0, 0.0, 0.0)], &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(&CSV_HEADER.join(",")));
        let back = read_records(&buf[..]).unwrap();
        assert_eq!(back[0], r);
        assert_eq!(back[1].p, None);
    }

    #[test]
    fn empty_solver_grid_rejected() {
        let cfg = CampaignConfig::from_json(
            r#"{"problem": {"kind": "regular", "n": 8, "d": 3, "count": 1, "seed": 1},
                "variants": [{"type": "original"}], "solvers": []}"#,
        )
        .unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn manifest_parses() {
        let cfg = CampaignConfig::from_json(
            r#"{"problem": {"kind": "sk", "n": 16, "count": 2, "seed": 3},
                "variants": [{"type": "original"},
                             {"type": "precond", "p": 1, "angles": "sk-default", "noise_f": 0.5},
                             {"type": "precond", "p": 1, "angles": {"schedule": {"gammas": [0.1], "betas": [0.3]}}},
                             {"type": "ideal"}],
                "solvers": [{"solver": "bm", "n_iter": [1, 5]}], "jobs": 2}"#,
        )
        .unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.variants[1].label(), "p=1;F=0.5");
    }
}
