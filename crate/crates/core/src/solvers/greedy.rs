use crate::error::{Error, Result};
use crate::problems::{Adjacency, Problem, SpinVector};

/// First-improvement 1-opt descent: sweeps the spins in order, flipping any
/// spin whose flip strictly lowers the objective, until a full sweep makes no
/// flip.
pub fn greedy_local_descent(problem: &Problem, z0: &SpinVector) -> Result<SpinVector> {
    if z0.len() != problem.n_vars() {
        return Err(Error::Dimension {
            expected: problem.n_vars(),
            actual: z0.len(),
        });
    }
    let adj = problem.adjacency();
    let mut z: Vec<i8> = z0.as_slice().to_vec();
    descend(&adj, &mut z);
    Ok(SpinVector::from_raw(z))
}

/// In-place descent; returns the number of flips.
pub(crate) fn descend(adj: &Adjacency, z: &mut [i8]) -> usize {
    let mut fields = adj.local_fields(z);
    let mut flips = 0;
    loop {
        let mut changed = false;
        for i in 0..z.len() {
            let delta = -2.0 * f64::from(z[i]) * fields[i];
            if delta < 0.0 {
                let twice = -2.0 * f64::from(z[i]);
                z[i] = -z[i];
                for (k, w) in adj.iter(i) {
                    fields[k] += twice * w;
                }
                flips += 1;
                changed = true;
            }
        }
        if !changed {
            return flips;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precond::ideal_preconditioner;
    use crate::problems::{evaluate_objective, gen_sk, ProblemKind};
    use crate::rng::rng_from_seed;

    #[test]
    fn single_edge_takes_one_flip() {
        let g = Problem::new(2, ProblemKind::Custom, [(0, 1, 1.0)]).unwrap();
        let z = greedy_local_descent(&g, &SpinVector::all_up(2)).unwrap();
        assert_eq!(evaluate_objective(&g, &z).unwrap(), -1.0);
    }

    #[test]
    fn fixed_points_are_one_opt() {
        let mut rng = rng_from_seed(2);
        for seed in 0..20 {
            let g = gen_sk(24, seed).unwrap();
            let z0 = SpinVector::random(24, &mut rng);
            let z = greedy_local_descent(&g, &z0).unwrap();
            let c = evaluate_objective(&g, &z).unwrap();
            assert!(c <= evaluate_objective(&g, &z0).unwrap());
            for i in 0..24 {
                let mut y = z.clone();
                y.flip(i);
                assert!(evaluate_objective(&g, &y).unwrap() >= c - 1e-12);
            }
        }
    }

    #[test]
    fn ideal_problem_descends_to_optimum() {
        let mut rng = rng_from_seed(5);
        for _ in 0..10 {
            let opt = SpinVector::random(16, &mut rng);
            let ideal = ideal_preconditioner(&opt).unwrap();
            for _ in 0..20 {
                let z = greedy_local_descent(&ideal, &SpinVector::random(16, &mut rng)).unwrap();
                assert!(z.equals_up_to_flip(&opt));
            }
        }
    }

    #[test]
    fn dimension_mismatch() {
        let g = gen_sk(4, 1).unwrap();
        assert!(greedy_local_descent(&g, &SpinVector::all_up(3)).is_err());
    }
}
