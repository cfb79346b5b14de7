//! Proximal operators of the nuclear norm and the entrywise l1 norm.

use crate::error::{invalid, Result, SpcpError};
use crate::linalg::{svd_threshold, DenseMatrix};

/// Output of [`singular_value_shrink`].
#[derive(Clone, Debug)]
pub struct ShrinkResult {
    pub matrix: DenseMatrix,
    /// Number of singular values that survived the shrinkage.
    pub rank: usize,
    /// Singular triplets the SVD backend computed (the `lsv` statistic).
    pub lsv_count: usize,
}

/// `argmin_L ||L||_* + (1/(2 alpha)) ||L - M||_F^2`, i.e.
/// `sum_i max(sigma_i - alpha, 0) u_i v_i^T`.
pub fn singular_value_shrink(m: &DenseMatrix, alpha: f64) -> Result<ShrinkResult> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(invalid(format!("shrinkage level must be positive, got {alpha}")));
    }
    let svd = svd_threshold(m, alpha)?;
    Ok(ShrinkResult {
        matrix: svd.reconstruct_shifted(alpha),
        rank: svd.rank(),
        lsv_count: svd.count_computed,
    })
}

#[inline]
pub fn soft_threshold_scalar(x: f64, lambda: f64) -> f64 {
    if x > lambda {
        x - lambda
    } else if x < -lambda {
        x + lambda
    } else {
        0.0
    }
}

/// Entrywise `sgn(m) * max(|m| - lambda, 0)`.
pub fn soft_threshold(m: &DenseMatrix, lambda: f64) -> Result<DenseMatrix> {
    if !(lambda >= 0.0) {
        return Err(invalid(format!("soft-threshold level must be >= 0, got {lambda}")));
    }
    if !m.is_finite() {
        return Err(SpcpError::NonFinite("soft-threshold input"));
    }
    Ok(m.map(|x| soft_threshold_scalar(x, lambda)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius_norm, inner, nuclear_norm, spectral_norm};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diagonal_shrink() {
        let out = singular_value_shrink(&DenseMatrix::from_diag(&[3.0, 1.0]), 2.0).unwrap();
        let expected = DenseMatrix::from_diag(&[1.0, 0.0]);
        assert!(frobenius_norm(&(&out.matrix - &expected)) < 1e-14);
        assert_eq!(out.rank, 1);
        assert_eq!(out.lsv_count, 2);
    }

    #[test]
    fn shrink_above_spectral_norm_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = DenseMatrix::from_fn(4, 5, |_, _| rng.gen_range(-1.0..1.0));
        let s = spectral_norm(&m).unwrap();
        let out = singular_value_shrink(&m, s * 1.001).unwrap();
        assert_eq!(out.rank, 0);
        assert_eq!(out.matrix, DenseMatrix::zeros(4, 5));
        let zero = singular_value_shrink(&DenseMatrix::zeros(3, 3), 0.5).unwrap();
        assert_eq!(zero.matrix, DenseMatrix::zeros(3, 3));
    }

    #[test]
    fn shrink_rejects_nonpositive_alpha() {
        assert!(singular_value_shrink(&DenseMatrix::identity(2), 0.0).is_err());
        assert!(singular_value_shrink(&DenseMatrix::identity(2), -1.0).is_err());
    }

    // Subgradient characterisation of the prox: G = (M - L*)/alpha has
    // spectral norm <= 1 and <G, L*> = ||L*||_*.
    #[test]
    fn shrink_satisfies_subgradient_condition() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let m = DenseMatrix::from_fn(10, 8, |_, _| rng.gen_range(-1.0..1.0));
        let alpha = 0.7;
        let l = singular_value_shrink(&m, alpha).unwrap().matrix;
        let g = &(&m - &l) * (1.0 / alpha);
        assert!(spectral_norm(&g).unwrap() <= 1.0 + 1e-8);
        let nuc = nuclear_norm(&l).unwrap();
        let ip = inner(&g, &l).unwrap();
        assert!((ip - nuc).abs() <= 1e-8 * nuc.max(1.0));
    }

    #[test]
    fn soft_threshold_examples() {
        let m = DenseMatrix::from_rows(&[&[2.0, -0.5]]);
        assert_eq!(soft_threshold(&m, 1.0).unwrap(), DenseMatrix::from_rows(&[&[1.0, 0.0]]));
        assert_eq!(soft_threshold(&m, 0.0).unwrap(), m);
        assert!(soft_threshold(&m, -0.1).is_err());
    }

    // Per-entry brute force: minimise lambda|s| + (s - x)^2 / 2 on a fine grid.
    #[test]
    fn soft_threshold_matches_scalar_grid_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let m = DenseMatrix::from_fn(4, 4, |_, _| rng.gen_range(-2.0..2.0));
        let lambda = 0.6;
        let s = soft_threshold(&m, lambda).unwrap();
        for (&x, &got) in m.as_slice().iter().zip(s.as_slice()) {
            let obj = |v: f64| lambda * v.abs() + 0.5 * (v - x).powi(2);
            let best = (-40_000..=40_000)
                .map(|k| k as f64 * 1e-4)
                .min_by(|a, b| obj(*a).total_cmp(&obj(*b)))
                .unwrap();
            assert!((best - got).abs() <= 1e-4, "x={x} grid={best} got={got}");
            assert!(obj(got) <= obj(best) + 1e-12);
        }
    }
}
