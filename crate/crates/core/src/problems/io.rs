//! Text edge-list format.
//!
//! ```text
//! qubo 3
//! # kind sk
//! # meta seed=7
//! 0 1 0.25
//! 0 2 -1.5
//! ```
//!
//! The header is the first non-blank line. `# kind` and `# meta` comments
//! carry the problem kind and provenance; any other `#` line is ignored.
//! Weights are written with Rust's shortest round-trip formatting, so reading
//! a written file reproduces every weight bit for bit.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{Problem, ProblemKind, SpinVector};
use crate::error::{Error, Result};

pub fn write_problem_string(problem: &Problem) -> String {
    let mut out = String::with_capacity(32 * (problem.n_terms() + 4));
    let _ = writeln!(out, "qubo {}", problem.n_vars());
    let _ = writeln!(out, "# kind {}", problem.kind());
    for (k, v) in problem.provenance() {
        let _ = writeln!(out, "# meta {}={}", k.replace(['\n', '='], " "), v.replace('\n', " "));
    }
    for e in problem.edges() {
        let _ = writeln!(out, "{} {} {:?}", e.i, e.j, e.weight);
    }
    out
}

pub fn write_problem(problem: &Problem, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_problem_string(problem))?;
    Ok(())
}

pub fn read_problem(path: impl AsRef<Path>) -> Result<Problem> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse(&text, path)
}

/// Parses the edge-list format from memory.
pub fn read_problem_str(text: &str) -> Result<Problem> {
    parse(text, Path::new("<memory>"))
}

fn parse(text: &str, path: &Path) -> Result<Problem> {
    let err = |line: usize, message: String| Error::Parse {
        path: PathBuf::from(path),
        line,
        message,
    };
    let mut n_vars = None;
    let mut kind = ProblemKind::Custom;
    let mut meta = Vec::new();
    let mut entries = Vec::new();

    for (k, raw) in text.lines().enumerate() {
        let lineno = k + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(rest) = comment.strip_prefix("kind ") {
                kind = rest.trim().parse().map_err(|e: Error| err(lineno, e.to_string()))?;
            } else if let Some(rest) = comment.strip_prefix("meta ") {
                if let Some((key, value)) = rest.split_once('=') {
                    meta.push((key.trim().to_string(), value.to_string()));
                }
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let Some(n) = n_vars else {
            if fields.len() != 2 || fields[0] != "qubo" {
                return Err(err(lineno, format!("expected header 'qubo <N>', found '{line}'")));
            }
            n_vars = Some(
                fields[1]
                    .parse::<usize>()
                    .map_err(|_| err(lineno, format!("bad variable count '{}'", fields[1])))?,
            );
            continue;
        };
        if fields.len() != 3 {
            return Err(err(lineno, format!("expected '<i> <j> <weight>', found '{line}'")));
        }
        let i: usize = fields[0]
            .parse()
            .map_err(|_| err(lineno, format!("bad index '{}'", fields[0])))?;
        let j: usize = fields[1]
            .parse()
            .map_err(|_| err(lineno, format!("bad index '{}'", fields[1])))?;
        let w: f64 = fields[2]
            .parse()
            .map_err(|_| err(lineno, format!("bad weight '{}'", fields[2])))?;
        if i == j {
            return Err(err(lineno, format!("self-loop on variable {i}")));
        }
        if i >= n || j >= n {
            return Err(err(lineno, format!("index out of range for {n} variables")));
        }
        if !w.is_finite() {
            return Err(err(lineno, format!("non-finite weight '{}'", fields[2])));
        }
        entries.push((i, j, w));
    }
    let n = n_vars.ok_or_else(|| err(1, "missing 'qubo <N>' header".to_string()))?;
    let mut problem = Problem::new(n, kind, entries)?;
    for (k, v) in meta {
        problem.set_provenance(k, v);
    }
    Ok(problem)
}

/// Spins as one line of `1`/`-1` tokens.
pub fn write_spins_string(z: &SpinVector) -> String {
    let mut out = String::with_capacity(3 * z.len() + 1);
    for (k, s) in z.as_slice().iter().enumerate() {
        if k > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{s}");
    }
    out.push('\n');
    out
}

pub fn write_spins(z: &SpinVector, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_spins_string(z))?;
    Ok(())
}

/// Reads whitespace-separated `1`/`-1` (or `+1`) tokens; `#` starts a comment.
pub fn read_spins(path: impl AsRef<Path>) -> Result<SpinVector> {
    let path = path.as_ref();
    parse_spins(&std::fs::read_to_string(path)?, path)
}

pub fn read_spins_str(text: &str) -> Result<SpinVector> {
    parse_spins(text, Path::new("<memory>"))
}

fn parse_spins(text: &str, path: &Path) -> Result<SpinVector> {
    let mut values = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        for tok in line.split_whitespace() {
            let v = match tok {
                "1" | "+1" => 1,
                "-1" => -1,
                _ => {
                    return Err(Error::Parse {
                        path: PathBuf::from(path),
                        line: k + 1,
                        message: format!("expected 1 or -1, found '{tok}'"),
                    })
                }
            };
            values.push(v);
        }
    }
    if values.is_empty() {
        return Err(Error::Parse {
            path: PathBuf::from(path),
            line: 1,
            message: "no spins".into(),
        });
    }
    SpinVector::new(values)
}
