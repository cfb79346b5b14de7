#![allow(dead_code)]

use admip::DenseMatrix;
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

pub fn to_na(m: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_column_slice(m.nrows(), m.ncols(), m.as_slice())
}

pub fn from_na(m: &DMatrix<f64>) -> DenseMatrix {
    DenseMatrix::from_col_major(m.nrows(), m.ncols(), m.as_slice().to_vec()).unwrap()
}

pub fn gaussian(rows: usize, cols: usize, rng: &mut impl Rng) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Singular value shrinkage through a full nalgebra SVD.
pub fn na_shrink(m: &DenseMatrix, alpha: f64) -> DenseMatrix {
    let svd = to_na(m).svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let sig = svd.singular_values.map(|s| (s - alpha).max(0.0));
    from_na(&(u * DMatrix::from_diagonal(&sig) * vt))
}

pub fn soft(x: f64, t: f64) -> f64 {
    x.signum() * (x.abs() - t).max(0.0)
}

/// `|| min{xi/theta, rho/(rho+theta) a} ||_F`, straight from the definition.
pub fn phi_direct(theta: f64, a: &[f64], rho: f64, xi: f64) -> f64 {
    a.iter()
        .map(|&v| (xi / theta).min(rho / (rho + theta) * v).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Root of `phi = delta` by bisection on a log scale, then linear.
pub fn theta_bisection(a: &[f64], delta: f64, rho: f64, xi: f64) -> f64 {
    let (mut lo, mut hi) = (1e-14_f64, 1.0_f64);
    while phi_direct(hi, a, rho, xi) > delta {
        hi *= 4.0;
    }
    for _ in 0..600 {
        let mid = if hi / lo > 4.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        if mid <= lo || mid >= hi {
            break;
        }
        if phi_direct(mid, a, rho, xi) > delta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// With `Z` eliminated, the (Z, S) step reduces to
/// `F(S) = xi ||S||_1 + (rho/2) max(||S - R||_F - delta, 0)^2`, `R = pi_Omega(D - q)`,
/// over entries in the mask. Minimised here by FISTA with step `1/rho`.
pub fn reduced_objective(s: &[f64], r: &[f64], rho: f64, xi: f64, delta: f64) -> f64 {
    let l1: f64 = s.iter().map(|v| v.abs()).sum();
    let dist = s.iter().zip(r).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    xi * l1 + 0.5 * rho * (dist - delta).max(0.0).powi(2)
}

pub fn fista_reduced(r: &[f64], rho: f64, xi: f64, delta: f64, iters: usize) -> Vec<f64> {
    let grad = |s: &[f64]| -> Vec<f64> {
        let dist = s.iter().zip(r).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        if dist <= delta {
            vec![0.0; s.len()]
        } else {
            let c = rho * (1.0 - delta / dist);
            s.iter().zip(r).map(|(a, b)| c * (a - b)).collect()
        }
    };
    let mut x = vec![0.0; r.len()];
    let mut y = x.clone();
    let mut t = 1.0_f64;
    for _ in 0..iters {
        let g = grad(&y);
        let x_next: Vec<f64> = y.iter().zip(&g).map(|(v, gv)| soft(v - gv / rho, xi / rho)).collect();
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_next;
        y = x_next.iter().zip(&x).map(|(a, b)| a + beta * (a - b)).collect();
        x = x_next;
        t = t_next;
    }
    x
}
