//! Quantum preconditioning of Ising and QUBO problems.
//!
//! The coupling matrix `W` of a problem is replaced by the negated two-point
//! correlation matrix of a depth-`p` QAOA state prepared for that problem,
//! and classical heuristics are run on the result. The crate covers every
//! step: problem generation and I/O ([`problems`]), exact state-vector QAOA
//! emulation ([`qaoa`]), light-cone decomposition for sparse problems
//! ([`lightcone`]), the preconditioner front end ([`precond`]), simulated
//! annealing and Burer-Monteiro solvers ([`solvers`]), hardness and cost
//! diagnostics ([`diagnostics`]) and experiment campaigns ([`bench`]).
//!
//! ```
//! use qprecond::prelude::*;
//!
//! let graph = gen_random_regular(16, 3, 7)?;
//! let opts = PrecondOptions::new(1)
//!     .with_angles(AngleSource::Provided(AngleSchedule::regular3_p1()))
//!     .with_engine(Engine::Lightcone);
//! let pre = precondition(&graph, &opts)?;
//! assert_eq!(pre.kind(), ProblemKind::Preconditioned(1));
//!
//! let trace = simulated_annealing(&pre, 50, 1, &[])?;
//! let (z_opt, _) = brute_force(&graph)?;
//! let c_opt = ratio_objective(&graph, &z_opt)?;
//! let alpha = approximation_ratio(&graph, &trace.best_z, c_opt)?;
//! assert!(alpha > 0.8 && alpha <= 1.0);
//! # Ok::<(), qprecond::Error>(())
//! ```

pub mod bench;
pub mod diagnostics;
mod error;
pub mod lightcone;
mod optimize;
pub mod precond;
pub mod problems;
pub mod qaoa;
pub mod rng;
pub mod solvers;

#[cfg(doctest)]
mod book;

pub use error::{Error, Result};

/// The names most programs need.
pub mod prelude {
    pub use crate::bench::{budget_report, run_campaign, CampaignConfig, RunRecord};
    pub use crate::diagnostics::{
        approximation_ratio, count_nonzero_terms, frustration_index, normalized_gap, overlap,
        ratio_objective,
    };
    pub use crate::error::{Error, Result};
    pub use crate::lightcone::{build_correlation_matrix, CorrelationMode};
    pub use crate::precond::{
        analytic_p1_correlation, ideal_preconditioner, precondition, sk_default_angles, AngleSource,
        Engine, PrecondOptions,
    };
    pub use crate::problems::{
        evaluate_cut, evaluate_objective, gen_random_regular, gen_sk, read_problem, write_problem,
        Problem, ProblemKind, SpinVector,
    };
    pub use crate::qaoa::{apply_qaoa, correlation, AngleSchedule, StateVector};
    pub use crate::solvers::{brute_force, burer_monteiro, greedy_local_descent, simulated_annealing};
}
