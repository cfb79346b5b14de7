//! Runtime checks of the dual sequences.
//!
//! After every iteration `-Y_k` is a subgradient of `xi ||.||_1` at `S_k`
//! and `-Yhat_k` a subgradient of the nuclear norm at `L_k`; in particular
//! `||Y_k||_inf <= xi`, `sigma_max(Yhat_k) <= 1` and `Y_k` vanishes off the
//! observed set.

use crate::error::Result;
use crate::linalg::{frobenius_norm, spectral_norm, DenseMatrix};
use crate::problem::SpcpInstance;
use crate::solver::SolverState;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DualFeasibility {
    /// `sigma_max(Yhat)`; NaN when `Yhat` was not formed.
    pub yhat_spectral_norm: f64,
    /// `||Y||_inf`.
    pub y_max_abs: f64,
    /// `max(sigma_max(Yhat) - 1, 0)`.
    pub r1: f64,
    /// `max(||Y||_inf - xi, 0)`.
    pub r2: f64,
    /// `||Y - pi_Omega(Y)||_F`.
    pub r3: f64,
    /// `max |Y_ij + xi sgn(S_ij)|` over the nonzeros of `S`.
    pub r4: f64,
}

impl DualFeasibility {
    pub fn max(&self) -> f64 {
        [self.r1, self.r2, self.r3, self.r4]
            .into_iter()
            .filter(|x| !x.is_nan())
            .fold(0.0, f64::max)
    }
}

pub fn check_dual_feasibility(state: &SolverState, inst: &SpcpInstance) -> Result<DualFeasibility> {
    let xi = inst.xi();
    let member = inst.mask().bitmap();
    let y = state.y.as_slice();
    let s = state.s.as_slice();

    let y_max_abs = y.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let off_mask_sq: f64 = y
        .iter()
        .zip(member)
        .filter(|(_, &obs)| !obs)
        .map(|(v, _)| v * v)
        .sum();
    let r4 = y
        .iter()
        .zip(s)
        .filter(|(_, &sv)| sv != 0.0)
        .map(|(&yv, &sv)| (yv + xi * sv.signum()).abs())
        .fold(0.0, f64::max);

    let yhat_spectral_norm = if state.y_hat.is_empty() {
        f64::NAN
    } else {
        spectral_norm(&state.y_hat)?
    };
    Ok(DualFeasibility {
        yhat_spectral_norm,
        y_max_abs,
        r1: (yhat_spectral_norm - 1.0).max(0.0),
        r2: (y_max_abs - xi).max(0.0),
        r3: off_mask_sq.sqrt(),
        r4,
    })
}

/// `||Z - L*||_F^2 + rho^-2 ||Y - Y*||_F^2`.
pub fn lyapunov_value(
    z: &DenseMatrix,
    y: &DenseMatrix,
    rho: f64,
    l_star: &DenseMatrix,
    y_star: &DenseMatrix,
) -> f64 {
    let dz = frobenius_norm(&(z - l_star));
    let dy = frobenius_norm(&(y - y_star)) / rho;
    dz * dz + dy * dy
}

#[derive(Clone, Debug)]
pub struct LyapunovCheck {
    pub values: Vec<f64>,
    /// Largest `V_{k+1} - V_k` (negative when strictly decreasing).
    pub max_increase: f64,
    pub slack: f64,
    pub monotone: bool,
}

/// Checks that `V_k = ||Z_k - L*||^2 + rho_k^-2 ||Y_k - Y*||^2` is
/// non-increasing up to `1e-7 * V_0`. `rhos[k]` is the penalty used in the
/// iteration that starts from `(Z_k, Y_k)`.
pub fn check_lyapunov(
    zs: &[DenseMatrix],
    ys: &[DenseMatrix],
    rhos: &[f64],
    l_star: &DenseMatrix,
    y_star: &DenseMatrix,
) -> LyapunovCheck {
    assert_eq!(zs.len(), ys.len());
    assert_eq!(zs.len(), rhos.len());
    let values: Vec<f64> = zs
        .iter()
        .zip(ys)
        .zip(rhos)
        .map(|((z, y), &rho)| lyapunov_value(z, y, rho, l_star, y_star))
        .collect();
    let slack = 1e-7 * values.first().copied().unwrap_or(0.0);
    let max_increase = values
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    LyapunovCheck {
        monotone: values.len() < 2 || max_increase <= slack,
        values,
        max_increase,
        slack,
    }
}
