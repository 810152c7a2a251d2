//! `qprecond`: command-line front end for the preconditioning library.
//!
//! Exit status is 0 on success, 1 on a usage error (bad flags or parameter
//! values) and 2 on a data error (unreadable or malformed input).

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qprecond::bench::{budget_report, read_records_csv, run_campaign, write_budget, write_records_csv, CampaignConfig};
use qprecond::diagnostics::{approximation_ratio, count_nonzero_terms, frustration_index, normalized_gap, overlap, ratio_objective};
use qprecond::precond::{precondition, AngleSource, PrecondOptions};
use qprecond::problems::{
    evaluate_cut, evaluate_objective, gen_random_regular, gen_sk, load_mpes, read_problem, read_spins, write_problem,
    write_spins, Problem, SpinVector,
};
use qprecond::qaoa::AngleSchedule;
use qprecond::rng::rng_from_seed;
use qprecond::solvers::{brute_force, burer_monteiro, greedy_local_descent, simulated_annealing, write_trace_csv, Checkpoint, SolveTrace, BRUTE_FORCE_CAP};
use qprecond::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "qprecond", version, about = "QAOA correlation-matrix preconditioning for Ising problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a random problem instance.
    Generate(GenerateArgs),
    /// Replace a problem by its negated QAOA correlation matrix.
    Precondition(PrecondArgs),
    /// Run a solver and write its checkpoint trace.
    Solve(SolveArgs),
    /// Report hardness and quality metrics.
    Diagnose(DiagnoseArgs),
    /// Run an experiment campaign described by a JSON manifest.
    Campaign(CampaignArgs),
    /// Preconditioning budgets from campaign records.
    Budget(BudgetArgs),
    /// Load a power-grid line table as a max-cut problem.
    MpesLoad(MpesArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Family {
    /// Random d-regular max-cut graph.
    Regular,
    /// Sherrington-Kirkpatrick spin glass.
    Sk,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    family: Family,
    /// Number of variables.
    #[arg(long)]
    n: usize,
    /// Degree (regular graphs only).
    #[arg(long, default_value_t = 3)]
    d: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output problem file.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct PrecondArgs {
    /// Input problem file.
    #[arg(short, long)]
    input: PathBuf,
    /// QAOA depth.
    #[arg(long)]
    p: usize,
    /// auto, analytic, lightcone or statevector.
    #[arg(long, default_value = "auto")]
    engine: String,
    /// sk-default, regular3, optimize:RESTARTS or file:PATH (JSON with
    /// "gammas" and "betas").
    #[arg(long)]
    angles: String,
    /// Estimate correlations from this many shots.
    #[arg(long)]
    samples: Option<usize>,
    /// Global depolarizing fidelity F in (0, 1].
    #[arg(long)]
    noise_f: Option<f64>,
    /// Seed for angle restarts and shot sampling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output problem file.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SolverName {
    Sa,
    Bm,
    Greedy,
    Brute,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Input problem file.
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    solver: SolverName,
    /// Sweeps (sa) or iterations (bm).
    #[arg(long, default_value_t = 100)]
    iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated iteration counts to record.
    #[arg(long, value_delimiter = ',')]
    checkpoints: Vec<usize>,
    /// Also score every checkpoint on this problem (the unpreconditioned
    /// original).
    #[arg(long)]
    original: Option<PathBuf>,
    /// Trace CSV.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Write the best configuration here.
    #[arg(long)]
    solution: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DiagnoseArgs {
    /// Input problem file.
    #[arg(short, long)]
    input: PathBuf,
    /// Optimal configuration; found by brute force when omitted and N is
    /// small enough.
    #[arg(long)]
    zopt: Option<PathBuf>,
    /// Candidate configuration for alpha and overlap.
    #[arg(long)]
    z: Option<PathBuf>,
    /// Comma-separated: alpha, frustration, gap, overlap, terms.
    #[arg(long, value_delimiter = ',', default_value = "terms")]
    metrics: Vec<String>,
}

#[derive(Args, Debug)]
struct CampaignArgs {
    /// JSON manifest.
    #[arg(short, long)]
    config: PathBuf,
    /// Output CSV.
    #[arg(short, long)]
    output: PathBuf,
    /// Worker threads; overrides the manifest.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args, Debug)]
struct BudgetArgs {
    /// Campaign CSV.
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long, default_value_t = 0.999)]
    alpha_target: f64,
}

#[derive(Args, Debug)]
struct MpesArgs {
    /// Line table.
    #[arg(short, long)]
    input: PathBuf,
    /// Output problem file (the full grid).
    #[arg(short, long)]
    output: PathBuf,
    /// Also write each core component as `component-K.txt` here.
    #[arg(long)]
    components: Option<PathBuf>,
}

fn invocation() -> String {
    std::env::args().collect::<Vec<_>>().join(" ")
}

fn parse_angles(spec: &str, seed: u64) -> Result<AngleSource> {
    Ok(match spec {
        "sk-default" => AngleSource::SkDefault,
        "regular3" => AngleSource::Provided(AngleSchedule::regular3_p1()),
        "regular3-p2" => AngleSource::Provided(AngleSchedule::regular3_p2()),
        _ => {
            if let Some(r) = spec.strip_prefix("optimize:") {
                let restarts = r
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("bad restart count in '{spec}'")))?;
                AngleSource::Optimize { restarts, seed }
            } else if let Some(path) = spec.strip_prefix("file:") {
                AngleSource::Provided(AngleSchedule::load(path).map_err(|e| e.context(format!("reading {path}")))?)
            } else {
                return Err(Error::InvalidParameter(format!(
                    "unknown angle source '{spec}' (sk-default, regular3, regular3-p2, optimize:R, file:PATH)"
                )));
            }
        }
    })
}

fn load(path: &Path) -> Result<Problem> {
    read_problem(path).map_err(|e| e.context(format!("reading {}", path.display())))
}

fn generate(a: GenerateArgs) -> Result<()> {
    let problem = match a.family {
        Family::Regular => gen_random_regular(a.n, a.d, a.seed)?,
        Family::Sk => gen_sk(a.n, a.seed)?,
    }
    .with_provenance("invocation", invocation());
    write_problem(&problem, &a.output)?;
    println!("wrote {} variables, {} terms to {}", problem.n_vars(), problem.n_terms(), a.output.display());
    Ok(())
}

fn precond(a: PrecondArgs) -> Result<()> {
    let problem = load(&a.input)?;
    let mut opts = PrecondOptions::new(a.p)
        .with_angles(parse_angles(&a.angles, a.seed)?)
        .with_engine(a.engine.parse()?);
    if let Some(k) = a.samples {
        opts = opts.with_sampling(k, a.seed);
    }
    if let Some(f) = a.noise_f {
        opts = opts.with_noise(f);
    }
    let z = precondition(&problem, &opts)?.with_provenance("invocation", invocation());
    write_problem(&z, &a.output)?;
    println!(
        "wrote {} ({} terms, engine {})",
        a.output.display(),
        z.n_terms(),
        z.provenance().get("engine").map_or("?", String::as_str)
    );
    Ok(())
}

fn solve(a: SolveArgs) -> Result<()> {
    let problem = load(&a.input)?;
    let original = a.original.as_deref().map(load).transpose()?;
    let trace = match a.solver {
        SolverName::Sa => simulated_annealing(&problem, a.iters, a.seed, &a.checkpoints)?,
        SolverName::Bm => burer_monteiro(&problem, a.iters, a.seed, &a.checkpoints)?,
        SolverName::Greedy => {
            let start = std::time::Instant::now();
            let z0 = SpinVector::random(problem.n_vars(), &mut rng_from_seed(a.seed));
            let z = greedy_local_descent(&problem, &z0)?;
            single_point_trace(&problem, z, a.seed, start.elapsed().as_secs_f64())?
        }
        SolverName::Brute => {
            let start = std::time::Instant::now();
            let (z, _) = brute_force(&problem)?;
            single_point_trace(&problem, z, a.seed, start.elapsed().as_secs_f64())?
        }
    };
    if let Some(path) = &a.output {
        write_trace_csv(&trace, original.as_ref(), std::fs::File::create(path)?)?;
    }
    if let Some(path) = &a.solution {
        write_spins(&trace.best_z, path)?;
    }
    println!("objective {}", trace.best_objective);
    println!("cut {}", evaluate_cut(&problem, &trace.best_z)?);
    if let Some(orig) = &original {
        println!("original_objective {}", evaluate_objective(orig, &trace.best_z)?);
        println!("original_cut {}", evaluate_cut(orig, &trace.best_z)?);
    }
    println!("seed {}", a.seed);
    Ok(())
}

fn single_point_trace(problem: &Problem, z: SpinVector, seed: u64, elapsed_s: f64) -> Result<SolveTrace> {
    let objective = evaluate_objective(problem, &z)?;
    Ok(SolveTrace {
        checkpoints: vec![Checkpoint {
            n_iter: 1,
            objective,
            elapsed_s,
            z: z.clone(),
        }],
        best_z: z,
        best_objective: objective,
        seed,
        elapsed_s,
    })
}

fn diagnose(a: DiagnoseArgs) -> Result<()> {
    let problem = load(&a.input)?;
    let needs_opt = a.metrics.iter().any(|m| matches!(m.as_str(), "alpha" | "frustration" | "overlap"));
    let needs_z = a.metrics.iter().any(|m| matches!(m.as_str(), "alpha" | "overlap"));
    let z_opt = match (&a.zopt, needs_opt) {
        (Some(path), _) => Some(read_spins(path)?),
        (None, true) if problem.n_vars() <= BRUTE_FORCE_CAP => Some(brute_force(&problem)?.0),
        (None, true) => {
            return Err(Error::InvalidParameter(format!(
                "these metrics need --zopt for N = {} > {BRUTE_FORCE_CAP}",
                problem.n_vars()
            )))
        }
        (None, false) => None,
    };
    let z = match (&a.z, needs_z) {
        (Some(path), _) => Some(read_spins(path)?),
        (None, true) => return Err(Error::InvalidParameter("alpha and overlap need --z".into())),
        (None, false) => None,
    };
    let mut out = std::io::stdout().lock();
    for m in &a.metrics {
        let value = match m.as_str() {
            "terms" => count_nonzero_terms(&problem) as f64,
            "gap" => normalized_gap(&problem)?,
            "frustration" => frustration_index(&problem, z_opt.as_ref().expect("resolved"))?,
            "alpha" => {
                let c_opt = ratio_objective(&problem, z_opt.as_ref().expect("resolved"))?;
                approximation_ratio(&problem, z.as_ref().expect("resolved"), c_opt)?
            }
            "overlap" => overlap(z.as_ref().expect("resolved"), z_opt.as_ref().expect("resolved"))?,
            other => return Err(Error::InvalidParameter(format!("unknown metric '{other}'"))),
        };
        writeln!(out, "{m}\t{value}")?;
    }
    Ok(())
}

fn campaign(a: CampaignArgs) -> Result<()> {
    let mut cfg = CampaignConfig::load(&a.config).map_err(|e| e.context(format!("reading {}", a.config.display())))?;
    if let Some(j) = a.jobs {
        cfg.jobs = j;
    }
    let records = run_campaign(&cfg)?;
    write_records_csv(&records, &a.output)?;
    println!("wrote {} records to {}", records.len(), a.output.display());
    Ok(())
}

fn budget(a: BudgetArgs) -> Result<()> {
    let records = read_records_csv(&a.input)?;
    write_budget(&budget_report(&records, a.alpha_target), std::io::stdout().lock())
}

fn mpes(a: MpesArgs) -> Result<()> {
    let (full, map) = load_mpes(&a.input).map_err(|e| e.context(format!("reading {}", a.input.display())))?;
    write_problem(&full.clone().with_provenance("invocation", invocation()), &a.output)?;
    let core_terms: usize = map.components.iter().map(|c| c.n_edges).sum();
    println!("full {} variables, {} terms", full.n_vars(), full.n_terms());
    println!("core {} variables, {} terms", map.kept.len(), core_terms);
    for (k, c) in map.components.iter().enumerate() {
        println!("component {k}: {} variables, {} terms", c.vertices.len(), c.n_edges);
        if let Some(dir) = &a.components {
            std::fs::create_dir_all(dir)?;
            let part = map.component_problem(&full, k)?.with_provenance("component", k);
            write_problem(&part, dir.join(format!("component-{k}.txt")))?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(a) => generate(a),
        Command::Precondition(a) => precond(a),
        Command::Solve(a) => solve(a),
        Command::Diagnose(a) => diagnose(a),
        Command::Campaign(a) => campaign(a),
        Command::Budget(a) => budget(a),
        Command::MpesLoad(a) => mpes(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_data_error() { 2 } else { 1 })
        }
    }
}
