//! Stable principal component pursuit
//!
//! ```text
//! min ||L||_* + xi ||S||_1   s.t.   ||pi_Omega(L + S - D)||_F <= delta
//! ```
//!
//! solved by a two-block ADMM on the splitting `L = Z` with a non-decreasing,
//! unbounded penalty sequence. The `(Z, S)` block has a closed form once a
//! scalar multiplier `theta` is known; [`theta_search`] finds it exactly by
//! sorting and a single quartic solve.

pub mod diagnostics;
pub mod error;
pub mod frames;
pub mod instance;
pub mod linalg;
pub mod postprocess;
pub mod problem;
pub mod quartic;
pub mod schedule;
pub mod shrinkage;
pub mod solver;
pub mod subproblem;
pub mod theta;

pub use diagnostics::{check_dual_feasibility, check_lyapunov, DualFeasibility, LyapunovCheck};
pub use error::{Result, SpcpError};
pub use instance::{generate, rel_errors, GenParams, GroundTruth};
pub use linalg::{DenseMatrix, ObservationMask};
pub use postprocess::refine_sparse;
pub use problem::SpcpInstance;
pub use schedule::{default_rho0, PenaltySchedule, StopCriterion, StoppingRule};
pub use shrinkage::{singular_value_shrink, soft_threshold};
pub use solver::{
    admip_solve, admm_solve, solve, solve_with, IterationRecord, SolveOptions, SolveReport,
    SolveStatus, SolverState,
};
pub use subproblem::{subproblem_zs, ZsSolution};
pub use theta::{phi, theta_search, ThetaProblem};
