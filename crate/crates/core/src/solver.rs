//! Two-block ADMM with partial splitting `L = Z` and a non-decreasing
//! penalty sequence.
//!
//! Each iteration `k` (with penalty `rho_k`):
//!
//! 1. `L_{k+1} = shrink(Z_k - Y_k / rho_k, 1 / rho_k)`
//! 2. `(Z_{k+1}, S_{k+1}) = argmin` of the (Z, S) step with `Q = -Y_k`,
//!    `Zt = L_{k+1}`
//! 3. `Y_{k+1} = Y_k + rho_k (L_{k+1} - Z_{k+1})`
//!
//! The auxiliary `Yhat_{k+1} = Y_k + rho_k (L_{k+1} - Z_k)` is formed only
//! when diagnostics are enabled.

use std::time::Instant;

use crate::diagnostics::{check_dual_feasibility, DualFeasibility};
use crate::error::{invalid, Result, SpcpError};
use crate::linalg::{ensure_same_shape, frobenius_norm, project_omega, DenseMatrix};
use crate::problem::SpcpInstance;
use crate::schedule::{PenaltySchedule, StopCriterion, StoppingRule};
use crate::shrinkage::singular_value_shrink;
use crate::subproblem::solve_from_center;

/// Iterates after a completed iteration.
#[derive(Clone, Debug)]
pub struct SolverState {
    pub l: DenseMatrix,
    pub z: DenseMatrix,
    pub s: DenseMatrix,
    pub y: DenseMatrix,
    /// `Y_{k-1} + rho_{k-1} (L_k - Z_{k-1})`; empty (0x0) unless diagnostics are on.
    pub y_hat: DenseMatrix,
    /// Penalty used to produce these iterates.
    pub rho: f64,
    /// Penalty for the next iteration.
    pub next_rho: f64,
    pub theta: f64,
    /// Index of the iterates, i.e. the number of completed iterations.
    pub k: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIterations,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Converged => "converged",
            Self::MaxIterations => "max_iter",
        }
    }
}

#[derive(Clone, Debug)]
pub struct IterationRecord {
    /// `||L_{k+1} - Z_{k+1}||_F / ||D||_F`.
    pub primal_residual: f64,
    /// `rho_k ||Z_{k+1} - Z_k||_F / ||D||_F`.
    pub dual_residual: f64,
    /// `||(L, S)_{k+1} - (L, S)_k||_F / (||(L, S)_k||_F + 1)`.
    pub relative_change: f64,
    pub rho: f64,
    pub theta: f64,
    pub rank: usize,
    pub lsv: usize,
    pub dual_feasibility: Option<DualFeasibility>,
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub iterations: usize,
    /// Mean number of singular triplets computed per iteration.
    pub lsv_avg: f64,
    pub wall_time_s: f64,
    pub l: DenseMatrix,
    pub s: DenseMatrix,
    pub z: DenseMatrix,
    pub y: DenseMatrix,
    pub history: Vec<IterationRecord>,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }

    pub fn final_rank(&self) -> usize {
        self.history.last().map_or(0, |r| r.rank)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub schedule: PenaltySchedule,
    pub stop: StoppingRule,
    /// Evaluate the dual-feasibility residuals every iteration (one extra SVD).
    pub diagnostics: bool,
}

/// Runs the method with an increasing (or any) penalty schedule, with diagnostics.
pub fn admip_solve(
    inst: &SpcpInstance,
    schedule: &PenaltySchedule,
    stop: &StoppingRule,
    z0: &DenseMatrix,
    y0: &DenseMatrix,
) -> Result<SolveReport> {
    let opts = SolveOptions {
        schedule: *schedule,
        stop: *stop,
        diagnostics: true,
    };
    solve_with(inst, &opts, z0, y0, |_| {})
}

/// Constant-penalty baseline; the same loop with `rho_k = rho`.
pub fn admm_solve(
    inst: &SpcpInstance,
    rho: f64,
    stop: &StoppingRule,
    z0: &DenseMatrix,
    y0: &DenseMatrix,
) -> Result<SolveReport> {
    admip_solve(inst, &PenaltySchedule::constant(rho)?, stop, z0, y0)
}

/// Zero starting point `(Z_0, Y_0) = (0, 0)`.
pub fn solve(inst: &SpcpInstance, opts: &SolveOptions) -> Result<SolveReport> {
    let (m, n) = inst.shape();
    let zero = DenseMatrix::zeros(m, n);
    solve_with(inst, opts, &zero, &zero, |_| {})
}

/// Full loop; `observer` sees the state after every iteration.
pub fn solve_with(
    inst: &SpcpInstance,
    opts: &SolveOptions,
    z0: &DenseMatrix,
    y0: &DenseMatrix,
    mut observer: impl FnMut(&SolverState),
) -> Result<SolveReport> {
    ensure_same_shape(inst.data(), z0)?;
    ensure_same_shape(inst.data(), y0)?;
    if !z0.is_finite() || !y0.is_finite() {
        return Err(invalid("starting point must be finite"));
    }
    let start = Instant::now();
    let (m, n) = inst.shape();
    let d_norm = match frobenius_norm(inst.data()) {
        x if x > 0.0 => x,
        _ => 1.0,
    };

    let mut state = SolverState {
        l: DenseMatrix::zeros(m, n),
        z: z0.clone(),
        s: DenseMatrix::zeros(m, n),
        y: y0.clone(),
        y_hat: DenseMatrix::zeros(0, 0),
        rho: opts.schedule.initial(),
        next_rho: opts.schedule.initial(),
        theta: 0.0,
        k: 0,
    };
    let zero_feasible = frobenius_norm(&project_omega(inst.data(), inst.mask())?) <= inst.delta();
    let mut rho = opts.schedule.initial();
    let mut history = Vec::new();
    let mut lsv_total = 0usize;
    let mut status = SolveStatus::MaxIterations;

    for k in 0..opts.stop.max_iter {
        let inv_rho = 1.0 / rho;

        let mut center = state.z.clone();
        center.axpy(-inv_rho, &state.y);
        let shrunk = singular_value_shrink(&center, inv_rho)?;
        let l_next = shrunk.matrix;
        lsv_total += shrunk.lsv_count;

        let y_hat = if opts.diagnostics {
            let mut yh = &l_next - &state.z;
            yh.scale(rho);
            yh += &state.y;
            yh
        } else {
            DenseMatrix::zeros(0, 0)
        };

        let mut center = l_next.clone();
        center.axpy(inv_rho, &state.y);
        let sol = solve_from_center(center, rho, inst)?;

        let mut y_next = &l_next - &sol.z;
        let primal = frobenius_norm(&y_next) / d_norm;
        y_next.scale(rho);
        y_next += &state.y;

        let dual = rho * frobenius_norm(&(&sol.z - &state.z)) / d_norm;
        let change = {
            let dl = frobenius_norm(&(&l_next - &state.l));
            let ds = frobenius_norm(&(&sol.s - &state.s));
            let base = frobenius_norm(&state.l).hypot(frobenius_norm(&state.s));
            dl.hypot(ds) / (base + 1.0)
        };

        let next_rho = opts.schedule.advance(rho, k);
        state = SolverState {
            l: l_next,
            z: sol.z,
            s: sol.s,
            y: y_next,
            y_hat,
            rho,
            next_rho,
            theta: sol.theta,
            k: k + 1,
        };

        if !(state.l.is_finite() && state.z.is_finite() && state.y.is_finite()) {
            return Err(SpcpError::Diverged {
                iteration: k + 1,
                detail: format!(
                    "rho = {rho:e}, theta = {:e}, |L| = {:e}, |Z| = {:e}, |Y| = {:e}",
                    state.theta,
                    frobenius_norm(&state.l),
                    frobenius_norm(&state.z),
                    frobenius_norm(&state.y)
                ),
            });
        }

        let dual_feasibility = if opts.diagnostics {
            Some(check_dual_feasibility(&state, inst)?)
        } else {
            None
        };
        history.push(IterationRecord {
            primal_residual: primal,
            dual_residual: dual,
            relative_change: change,
            rho,
            theta: state.theta,
            rank: shrunk.rank,
            lsv: shrunk.lsv_count,
            dual_feasibility,
        });
        observer(&state);

        let done = match opts.stop.criterion {
            StopCriterion::PrimalDual { tol_p, tol_d } => primal <= tol_p && dual <= tol_d,
            // From a zero start the first iterates can stay at zero while Y
            // builds up; a zero change there does not mean convergence.
            StopCriterion::Practical { tol, varrho } => {
                change <= tol * varrho && (zero_feasible || !(is_zero(&state.l) && is_zero(&state.s)))
            }
        };
        rho = next_rho;
        if done {
            status = SolveStatus::Converged;
            break;
        }
    }

    let iterations = history.len();
    Ok(SolveReport {
        status,
        iterations,
        lsv_avg: if iterations > 0 {
            lsv_total as f64 / iterations as f64
        } else {
            0.0
        },
        wall_time_s: start.elapsed().as_secs_f64(),
        l: state.l,
        s: state.s,
        z: state.z,
        y: state.y,
        history,
    })
}

fn is_zero(m: &DenseMatrix) -> bool {
    m.as_slice().iter().all(|&v| v == 0.0)
}
