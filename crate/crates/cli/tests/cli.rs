use std::path::Path;
use std::process::{Command, Output};

fn qprecond(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qprecond"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value(out: &str, key: &str) -> f64 {
    out.lines()
        .find_map(|l| l.strip_prefix(key).map(|v| v.trim().parse().unwrap()))
        .unwrap_or_else(|| panic!("no '{key}' in {out}"))
}

#[test]
fn odd_degree_sum_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = qprecond(&["generate", "regular", "--n", "5", "--d", "3", "-o", "x.txt"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("even"));
    assert!(!dir.path().join("x.txt").exists());
}

#[test]
fn malformed_input_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.txt"), "qubo 3\n0 7 1.0\n").unwrap();
    let o = qprecond(&["solve", "-i", "bad.txt", "--solver", "sa"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = qprecond(&["diagnose", "-i", "missing.txt"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_flags_print_usage() {
    let dir = tempfile::tempdir().unwrap();
    let o = qprecond(&["solve", "--bogus"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn every_subcommand_has_help() {
    let dir = tempfile::tempdir().unwrap();
    for sub in ["generate", "precondition", "solve", "diagnose", "campaign", "budget", "mpes-load"] {
        let o = qprecond(&[sub, "--help"], dir.path());
        assert_eq!(o.status.code(), Some(0), "{sub}");
        assert!(stdout(&o).contains("Usage"), "{sub}");
    }
}

#[test]
fn generate_precondition_solve_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = qprecond(&["generate", "regular", "--n", "16", "--d", "3", "--seed", "4", "-o", "g.txt"], d);
    assert!(o.status.success());
    let text = std::fs::read_to_string(d.join("g.txt")).unwrap();
    assert!(text.contains("invocation="));

    let o = qprecond(&["precondition", "-i", "g.txt", "--p", "1", "--angles", "regular3", "-o", "z.txt"], d);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let o = qprecond(
        &[
            "solve", "-i", "z.txt", "--original", "g.txt", "--solver", "sa", "--iters", "200", "--checkpoints",
            "1,20,200", "-o", "t.csv", "--solution", "s.txt",
        ],
        d,
    );
    assert!(o.status.success());
    let trace = std::fs::read_to_string(d.join("t.csv")).unwrap();
    let lines: Vec<_> = trace.lines().collect();
    assert_eq!(lines[0], "n_iter,objective,original_objective,elapsed_s,seed");
    assert_eq!(lines.len(), 4);

    let best = qprecond(&["solve", "-i", "g.txt", "--solver", "brute"], d);
    let best_cut = value(&stdout(&best), "cut");
    let found = value(&stdout(&o), "original_cut");
    assert!(found <= best_cut + 1e-9);

    let o = qprecond(&["diagnose", "-i", "g.txt", "--z", "s.txt", "--metrics", "alpha,overlap,terms"], d);
    assert!(o.status.success());
    let out = stdout(&o);
    let alpha = value(&out, "alpha");
    assert!(alpha > 0.0 && alpha <= 1.0 + 1e-12);
    assert_eq!(value(&out, "terms"), 24.0);
}

#[test]
fn angles_round_trip_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(qprecond(&["generate", "sk", "--n", "8", "--seed", "1", "-o", "sk.txt"], d).status.success());
    std::fs::write(d.join("a.json"), r#"{"gammas":[0.6154797086703873],"betas":[0.39269908169872414]}"#).unwrap();
    for (angles, out) in [("file:a.json", "a.txt"), ("regular3", "b.txt")] {
        let o = qprecond(&["precondition", "-i", "sk.txt", "--p", "1", "--angles", angles, "-o", out], d);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = qprecond::problems::read_problem(d.join("a.txt")).unwrap();
    let b = qprecond::problems::read_problem(d.join("b.txt")).unwrap();
    for i in 0..8 {
        for j in 0..8 {
            assert!((a.weight(i, j) - b.weight(i, j)).abs() < 1e-12);
        }
    }
}

#[test]
fn campaign_then_budget() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("c.json"),
        r#"{
  "problem": {"kind": "regular", "n": 12, "d": 3, "count": 2, "seed": 1},
  "variants": [{"type": "original"}, {"type": "precond", "p": 1, "angles": "regular3"}],
  "solvers": [{"solver": "sa", "n_iter": [1, 50]}]
}"#,
    )
    .unwrap();
    let o = qprecond(&["campaign", "-c", "c.json", "-o", "r.csv", "--jobs", "1"], d);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let records = qprecond::bench::read_records_csv(d.join("r.csv")).unwrap();
    assert_eq!(records.len(), 8);

    let o = qprecond(&["budget", "-i", "r.csv", "--alpha-target", "0.5"], d);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("n_vars,solver,variant"));
}

#[test]
fn mpes_components_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let grid = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data/minigrid.csv");
    let o = qprecond(&["mpes-load", "-i", grid, "-o", "grid.txt", "--components", "parts"], d);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("core 22 variables, 32 terms"));
    let c0 = qprecond::problems::read_problem(d.join("parts/component-0.txt")).unwrap();
    assert_eq!(c0.n_vars(), 16);
}
