//! l1 refinement of the sparse component for a fixed low-rank estimate:
//!
//! ```text
//! S_post = argmin_S { ||S||_1 : ||pi_Omega(S + L - D)||_F <= delta }
//! ```
//!
//! The constraint only sees observed entries, so `S_post` vanishes off the
//! mask. On the mask the minimiser soft-thresholds `R = pi_Omega(D - L)` at
//! the level `lambda` solving `||min{lambda, |R|}||_F = delta`.

use crate::error::Result;
use crate::linalg::{ensure_same_shape, DenseMatrix};
use crate::problem::SpcpInstance;
use crate::shrinkage::soft_threshold_scalar;
use crate::theta::clip_level_search;

pub fn refine_sparse(l_sol: &DenseMatrix, inst: &SpcpInstance) -> Result<DenseMatrix> {
    ensure_same_shape(l_sol, inst.data())?;
    let (m, n) = inst.shape();
    let offsets = inst.mask().offsets();
    let d = inst.data().as_slice();
    let l = l_sol.as_slice();
    let residual: Vec<f64> = offsets.iter().map(|&o| d[o] - l[o]).collect();

    let mut s = DenseMatrix::zeros(m, n);
    let delta = inst.delta();
    let level = if delta == 0.0 {
        0.0
    } else {
        let norm_sq: f64 = residual.iter().map(|r| r * r).sum();
        if norm_sq <= delta * delta {
            return Ok(s);
        }
        let mags: Vec<f64> = residual.iter().map(|r| r.abs()).collect();
        clip_level_search(&mags, delta)?
    };
    let out = s.as_mut_slice();
    for (&o, &r) in offsets.iter().zip(&residual) {
        out[o] = soft_threshold_scalar(r, level);
    }
    Ok(s)
}
