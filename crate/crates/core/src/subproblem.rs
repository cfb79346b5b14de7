//! Closed-form solution of the (Z, S) step
//!
//! ```text
//! min  xi ||S||_1 + <Q, Z - Zt> + (rho/2) ||Z - Zt||_F^2
//! s.t. ||pi_Omega(Z + S - D)||_F <= delta
//! ```
//!
//! With `q = Zt - Q/rho` and the optimal multiplier `theta` of the ball
//! constraint, the minimiser soft-thresholds `pi_Omega(D - q)` at
//! `xi (rho + theta) / (rho theta)`, blends `D - S` with `q` on the observed
//! set and copies `q` off it.

use crate::error::{invalid, Result};
use crate::linalg::{ensure_same_shape, inner, l1_norm, DenseMatrix};
use crate::problem::SpcpInstance;
use crate::shrinkage::soft_threshold_scalar;
use crate::theta::{theta_search, ThetaProblem};

#[derive(Clone, Debug)]
pub struct ZsSolution {
    pub z: DenseMatrix,
    pub s: DenseMatrix,
    /// Multiplier of the ball constraint; zero when it is inactive, and
    /// reported as zero for `delta = 0` where no finite scalar exists.
    pub theta: f64,
}

pub fn subproblem_zs(
    q: &DenseMatrix,
    z_tilde: &DenseMatrix,
    rho: f64,
    inst: &SpcpInstance,
) -> Result<ZsSolution> {
    ensure_same_shape(q, z_tilde)?;
    ensure_same_shape(q, inst.data())?;
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(invalid(format!("rho must be > 0, got {rho}")));
    }
    let mut center = z_tilde.clone();
    center.axpy(-1.0 / rho, q);
    solve_from_center(center, rho, inst)
}

/// Same as [`subproblem_zs`] given `center = Zt - Q/rho` directly. `center`
/// is reused as the storage for `Z`.
pub(crate) fn solve_from_center(center: DenseMatrix, rho: f64, inst: &SpcpInstance) -> Result<ZsSolution> {
    let (m, n) = inst.shape();
    let offsets = inst.mask().offsets();
    let d = inst.data().as_slice();
    let xi = inst.xi();
    let delta = inst.delta();

    let mut z = center;
    let mut s = DenseMatrix::zeros(m, n);

    if delta == 0.0 {
        let level = xi / rho;
        let (zs, ss) = (z.as_mut_slice(), s.as_mut_slice());
        for &o in offsets {
            let sv = soft_threshold_scalar(d[o] - zs[o], level);
            ss[o] = sv;
            zs[o] = d[o] - sv;
        }
        return Ok(ZsSolution { z, s, theta: 0.0 });
    }

    let mags: Vec<f64> = offsets.iter().map(|&o| (d[o] - z.as_slice()[o]).abs()).collect();
    let prob = ThetaProblem::new(mags, delta, rho, xi)?;
    let theta = theta_search(&prob)?;
    if theta == 0.0 {
        return Ok(ZsSolution { z, s, theta });
    }

    let level = xi * (rho + theta) / (rho * theta);
    let w_data = theta / (rho + theta);
    let w_center = rho / (rho + theta);
    let (zs, ss) = (z.as_mut_slice(), s.as_mut_slice());
    for &o in offsets {
        let sv = soft_threshold_scalar(d[o] - zs[o], level);
        ss[o] = sv;
        zs[o] = w_data * (d[o] - sv) + w_center * zs[o];
    }
    Ok(ZsSolution { z, s, theta })
}

/// `xi ||S||_1 + <Q, Z - Zt> + (rho/2) ||Z - Zt||_F^2`.
pub fn zs_objective(
    q: &DenseMatrix,
    z_tilde: &DenseMatrix,
    rho: f64,
    xi: f64,
    z: &DenseMatrix,
    s: &DenseMatrix,
) -> Result<f64> {
    let dz = z - z_tilde;
    Ok(xi * l1_norm(s) + inner(q, &dz)? + 0.5 * rho * inner(&dz, &dz)?)
}

/// Residuals of the optimality system of the (Z, S) step for `delta > 0`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct KktResiduals {
    /// `||Q + rho (Z - Zt) + theta pi_Omega(Z + S - D)||_F`.
    pub stationarity_z: f64,
    /// Distance of `-theta pi_Omega(Z + S - D) / xi` from `d||S||_1`, scaled by `xi`.
    pub stationarity_s: f64,
    /// `max(||pi_Omega(Z + S - D)||_F - delta, 0)`.
    pub primal_feasibility: f64,
    /// `max(-theta, 0)`.
    pub dual_feasibility: f64,
    /// `|theta (||pi_Omega(Z + S - D)||_F - delta)|`.
    pub complementarity: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        [
            self.stationarity_z,
            self.stationarity_s,
            self.primal_feasibility,
            self.dual_feasibility,
            self.complementarity,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn kkt_residuals(
    q: &DenseMatrix,
    z_tilde: &DenseMatrix,
    rho: f64,
    inst: &SpcpInstance,
    sol: &ZsSolution,
) -> Result<KktResiduals> {
    ensure_same_shape(q, inst.data())?;
    ensure_same_shape(z_tilde, inst.data())?;
    ensure_same_shape(&sol.z, inst.data())?;
    ensure_same_shape(&sol.s, inst.data())?;
    if !(inst.delta() > 0.0) {
        return Err(invalid("KKT residuals are defined for delta > 0"));
    }
    let theta = sol.theta;
    let xi = inst.xi();
    let (d, z, s) = (inst.data().as_slice(), sol.z.as_slice(), sol.s.as_slice());
    let (qs, zt) = (q.as_slice(), z_tilde.as_slice());
    let member = inst.mask().bitmap();

    let mut stat_z = 0.0;
    let mut stat_s = 0.0;
    let mut resid_sq = 0.0;
    for o in 0..d.len() {
        let w = if member[o] { z[o] + s[o] - d[o] } else { 0.0 };
        resid_sq += w * w;
        let r1 = qs[o] + rho * (z[o] - zt[o]) + theta * w;
        stat_z += r1 * r1;
        let tw = theta * w;
        let r2 = if !member[o] {
            // G must vanish off the mask, so S must too.
            if s[o] != 0.0 {
                xi
            } else {
                0.0
            }
        } else if s[o] != 0.0 {
            xi * s[o].signum() + tw
        } else {
            (tw.abs() - xi).max(0.0)
        };
        stat_s += r2 * r2;
    }
    let resid = resid_sq.sqrt();
    Ok(KktResiduals {
        stationarity_z: stat_z.sqrt(),
        stationarity_s: stat_s.sqrt(),
        primal_feasibility: (resid - inst.delta()).max(0.0),
        dual_feasibility: (-theta).max(0.0),
        complementarity: (theta * (resid - inst.delta())).abs(),
    })
}
