use crate::error::{Error, Result};
use crate::problems::{objective_unchecked, Problem, SpinVector};

/// Largest problem [`brute_force`] accepts.
pub const BRUTE_FORCE_CAP: usize = 26;

/// Exact minimizer by Gray-code enumeration of the `2^(N-1)` assignments with
/// `z_0 = +1`.
pub fn brute_force(problem: &Problem) -> Result<(SpinVector, f64)> {
    let n = problem.n_vars();
    if n > BRUTE_FORCE_CAP {
        return Err(Error::Capacity {
            what: format!("brute force over {n} spins"),
            required: n,
            cap: BRUTE_FORCE_CAP,
        });
    }
    if n == 0 {
        return Err(Error::EmptyProblem);
    }
    let adj = problem.adjacency();
    let mut z = vec![1i8; n];
    let mut c = objective_unchecked(problem, &z);
    let mut best = c;
    let mut best_code = 0u64;
    let free = n - 1;
    for step in 1u64..(1u64 << free) {
        // spin 1 + (index of lowest set bit) toggles at this step
        let i = 1 + step.trailing_zeros() as usize;
        let field: f64 = adj.iter(i).map(|(k, w)| w * f64::from(z[k])).sum();
        c -= 2.0 * f64::from(z[i]) * field;
        z[i] = -z[i];
        if c < best {
            best = c;
            best_code = step;
        }
    }
    let gray = best_code ^ (best_code >> 1);
    let mut out = vec![1i8; n];
    for (k, s) in out.iter_mut().enumerate().skip(1) {
        if (gray >> (k - 1)) & 1 == 1 {
            *s = -1;
        }
    }
    let value = objective_unchecked(problem, &out);
    Ok((SpinVector::from_raw(out), value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{evaluate_objective, gen_sk, ProblemKind};

    #[test]
    fn small_cases() {
        let tri = Problem::new(3, ProblemKind::MaxCutRegular, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        assert_eq!(brute_force(&tri).unwrap().1, -1.0);
        let edge = Problem::new(2, ProblemKind::Custom, [(0, 1, -3.0)]).unwrap();
        let (z, c) = brute_force(&edge).unwrap();
        assert_eq!((z.get(0), z.get(1), c), (1, 1, -3.0));
    }

    #[test]
    fn matches_plain_enumeration() {
        for seed in 0..4 {
            let g = gen_sk(12, seed).unwrap();
            let min = (0..1u64 << 12)
                .map(|x| evaluate_objective(&g, &SpinVector::from_index(x, 12)).unwrap())
                .fold(f64::INFINITY, f64::min);
            let (z, c) = brute_force(&g).unwrap();
            assert!((c - min).abs() < 1e-12);
            assert_eq!(z.get(0), 1);
        }
    }

    #[test]
    fn capacity() {
        let g = Problem::new(27, ProblemKind::Custom, [(0, 1, 1.0)]).unwrap();
        assert!(matches!(brute_force(&g), Err(Error::Capacity { .. })));
    }
}
