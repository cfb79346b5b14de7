//! Random instances with planted low-rank, sparse and noise components.
//!
//! For an `n x n` instance with `r = ceil(c_r n)`:
//!
//! * `L0 = U V^T` with `U, V` in `R^{n x r}` having i.i.d. `N(0, 1)` entries;
//! * the support of `S0` is a uniform subset of size `ceil(c_s n^2)`, with
//!   values i.i.d. uniform on `[-sqrt(8r/pi), sqrt(8r/pi)]`, so that nonzero
//!   sparse entries match `E|L0_ij| = sqrt(2r/pi)`;
//! * `N0` has i.i.d. `N(0, varrho^2)` entries where
//!   `varrho^2 = (c_r n + c_s 8r / (3 pi)) 10^(-SNR/10)`;
//! * `Omega` is a uniform subset of size `ceil(SR n^2)`, `D = pi_Omega(L0 + S0 + N0)`,
//!   `delta = sqrt(n + sqrt(8n)) varrho` and `xi = 1/sqrt(n)`.
//!
//! # Reproducibility
//!
//! Every random draw comes from ChaCha20 seeded with `seed_from_u64(seed)`,
//! one stream per component (`set_stream`): 1 = `U`, 2 = `V`, 3 = support of
//! `S0`, 4 = values of `S0`, 5 = `N0`, 6 = `Omega`. Subsets are the prefix of
//! a partial Fisher-Yates shuffle of the column-major offsets `0..n^2`, with
//! swap positions drawn as `u64`. Gaussians use `rand_distr::StandardNormal`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::linalg::{frobenius_norm, DenseMatrix, ObservationMask};
use crate::problem::SpcpInstance;

pub const STREAM_U: u64 = 1;
pub const STREAM_V: u64 = 2;
pub const STREAM_SUPPORT: u64 = 3;
pub const STREAM_SPARSE: u64 = 4;
pub const STREAM_NOISE: u64 = 5;
pub const STREAM_MASK: u64 = 6;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `ceil(x)` that ignores floating-point noise just above an integer
/// (`0.05 * 500` evaluates to `25.000000000000004`).
pub fn ceil_count(x: f64) -> usize {
    (x - 1e-9 * x.abs().max(1.0)).ceil().max(0.0) as usize
}

/// Uniform random `k`-subset of `0..total`, in sorted order.
pub fn sample_subset(rng: &mut impl Rng, total: usize, k: usize) -> Vec<usize> {
    assert!(k <= total);
    let mut idx: Vec<usize> = (0..total).collect();
    for i in 0..k {
        let j = rng.gen_range(i as u64..total as u64) as usize;
        idx.swap(i, j);
    }
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenParams {
    pub n: usize,
    pub c_s: f64,
    pub c_r: f64,
    /// Signal-to-noise ratio in dB; `f64::INFINITY` gives a noiseless instance.
    pub snr_db: f64,
    pub sr: f64,
    pub seed: u64,
}

impl GenParams {
    pub fn rank(&self) -> usize {
        ceil_count(self.c_r * self.n as f64)
    }

    pub fn support_size(&self) -> usize {
        ceil_count(self.c_s * (self.n * self.n) as f64)
    }

    pub fn observed_size(&self) -> usize {
        ceil_count(self.sr * (self.n * self.n) as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("n must be positive"));
        }
        if !(self.c_s > 0.0 && self.c_s < 1.0) {
            return Err(invalid(format!("c_s must lie in (0, 1), got {}", self.c_s)));
        }
        if !(self.c_r > 0.0 && self.c_r < 1.0) {
            return Err(invalid(format!("c_r must lie in (0, 1), got {}", self.c_r)));
        }
        if !(self.sr > 0.0 && self.sr <= 1.0) {
            return Err(invalid(format!("sr must lie in (0, 1], got {}", self.sr)));
        }
        if self.snr_db.is_nan() || self.snr_db == f64::NEG_INFINITY {
            return Err(invalid("snr must be a number"));
        }
        if self.rank() < 1 || self.observed_size() < 1 || self.support_size() > self.n * self.n {
            return Err(invalid("parameters give an empty rank, mask or oversized support"));
        }
        Ok(())
    }

    /// `varrho^2 = (c_r n + c_s 8r/(3 pi)) 10^(-SNR/10)`.
    pub fn noise_variance(&self) -> f64 {
        let r = self.rank() as f64;
        (self.c_r * self.n as f64 + self.c_s * 8.0 * r / (3.0 * PI)) * 10f64.powf(-self.snr_db / 10.0)
    }
}

/// `sqrt(n + sqrt(8n)) varrho`.
pub fn noise_radius(n: usize, varrho: f64) -> f64 {
    let n = n as f64;
    (n + (8.0 * n).sqrt()).sqrt() * varrho
}

#[derive(Clone, Debug)]
pub struct GroundTruth {
    pub l0: DenseMatrix,
    pub s0: DenseMatrix,
    pub n0: DenseMatrix,
    pub rank: usize,
    pub varrho: f64,
    /// Support of `S0`, lexicographic.
    pub support: Vec<(usize, usize)>,
}

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

fn offsets_to_pairs(offsets: &[usize], rows: usize) -> Vec<(usize, usize)> {
    offsets.iter().map(|&o| (o % rows, o / rows)).collect()
}

pub fn generate(params: &GenParams) -> Result<(SpcpInstance, GroundTruth)> {
    params.validate()?;
    let n = params.n;
    let r = params.rank();
    let total = n * n;

    let u = gaussian_matrix(n, r, &mut stream_rng(params.seed, STREAM_U));
    let v = gaussian_matrix(n, r, &mut stream_rng(params.seed, STREAM_V));
    let l0 = u.matmul(&v.transpose())?;

    let support_offsets = sample_subset(
        &mut stream_rng(params.seed, STREAM_SUPPORT),
        total,
        params.support_size(),
    );
    let bound = (8.0 * r as f64 / PI).sqrt();
    let mut s0 = DenseMatrix::zeros(n, n);
    let mut rng = stream_rng(params.seed, STREAM_SPARSE);
    for &o in &support_offsets {
        s0.as_mut_slice()[o] = rng.gen_range(-bound..=bound);
    }

    let varrho = params.noise_variance().sqrt();
    let n0 = if varrho > 0.0 {
        let mut g = gaussian_matrix(n, n, &mut stream_rng(params.seed, STREAM_NOISE));
        g.scale(varrho);
        g
    } else {
        DenseMatrix::zeros(n, n)
    };

    let observed = sample_subset(
        &mut stream_rng(params.seed, STREAM_MASK),
        total,
        params.observed_size(),
    );
    let mask = ObservationMask::new(n, n, offsets_to_pairs(&observed, n))?;
    let mut d = &l0 + &s0;
    d += &n0;

    let delta = noise_radius(n, varrho);
    let inst = SpcpInstance::with_default_xi(d, mask, delta)?;
    let mut support = offsets_to_pairs(&support_offsets, n);
    support.sort_unstable();
    Ok((
        inst,
        GroundTruth {
            l0,
            s0,
            n0,
            rank: r,
            varrho,
            support,
        },
    ))
}

/// `(||L - L0||_F / ||L0||_F, ||S - S0||_F / ||S0||_F)`.
pub fn rel_errors(l: &DenseMatrix, s: &DenseMatrix, gt: &GroundTruth) -> Result<(f64, f64)> {
    let nl = frobenius_norm(&gt.l0);
    let ns = frobenius_norm(&gt.s0);
    if nl == 0.0 || ns == 0.0 {
        return Err(invalid("ground truth has a zero component"));
    }
    crate::linalg::ensure_same_shape(l, &gt.l0)?;
    crate::linalg::ensure_same_shape(s, &gt.s0)?;
    Ok((frobenius_norm(&(l - &gt.l0)) / nl, frobenius_norm(&(s - &gt.s0)) / ns))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, snr: f64, sr: f64, seed: u64) -> GenParams {
        GenParams {
            n,
            c_s: 0.05,
            c_r: 0.05,
            snr_db: snr,
            sr,
            seed,
        }
    }

    #[test]
    fn ceil_count_ignores_rounding_noise() {
        assert_eq!(ceil_count(0.05 * 500.0), 25);
        assert_eq!(ceil_count(25.5), 26);
        assert_eq!(ceil_count(0.05 * 30.0), 2);
        assert_eq!(params(500, 80.0, 1.0, 0).rank(), 25);
    }

    #[test]
    fn cardinalities_are_exact() {
        let p = params(40, 40.0, 0.7, 3);
        let (inst, gt) = generate(&p).unwrap();
        assert_eq!(gt.rank, 2);
        assert_eq!(gt.support.len(), 80);
        assert_eq!(inst.mask().len(), ceil_count(0.7 * 1600.0));
        let nnz = gt.s0.as_slice().iter().filter(|&&x| x != 0.0).count();
        assert_eq!(nnz, 80);
        for &(i, j) in &gt.support {
            assert!(gt.s0[(i, j)].abs() <= (8.0 * 2.0 / PI).sqrt());
        }
        assert!((inst.xi() - 1.0 / 40.0f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn generation_is_deterministic() {
        let p = params(30, 60.0, 0.8, 42);
        let (a, ga) = generate(&p).unwrap();
        let (b, gb) = generate(&p).unwrap();
        assert_eq!(a.data(), b.data());
        assert_eq!(a.mask(), b.mask());
        assert_eq!(ga.l0, gb.l0);
        let (c, _) = generate(&GenParams { seed: 43, ..p }).unwrap();
        assert_ne!(a.data(), c.data());
    }

    #[test]
    fn infinite_snr_is_noiseless() {
        let (inst, gt) = generate(&params(20, f64::INFINITY, 1.0, 1)).unwrap();
        assert_eq!(gt.varrho, 0.0);
        assert_eq!(inst.delta(), 0.0);
        assert_eq!(inst.data(), &(&gt.l0 + &gt.s0));
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(generate(&GenParams { c_s: 0.0, ..params(10, 40.0, 1.0, 0) }).is_err());
        assert!(generate(&GenParams { sr: 1.5, ..params(10, 40.0, 1.0, 0) }).is_err());
        assert!(generate(&GenParams { n: 0, ..params(10, 40.0, 1.0, 0) }).is_err());
    }

    #[test]
    fn rel_error_examples() {
        let (_, gt) = generate(&params(15, 40.0, 1.0, 9)).unwrap();
        let (a, b) = rel_errors(&gt.l0, &gt.s0, &gt).unwrap();
        assert_eq!((a, b), (0.0, 0.0));
        let zero = DenseMatrix::zeros(15, 15);
        assert!((rel_errors(&zero, &gt.s0, &gt).unwrap().0 - 1.0).abs() < 1e-15);
        assert!((rel_errors(&(&gt.l0 * 2.0), &gt.s0, &gt).unwrap().0 - 1.0).abs() < 1e-15);
    }
}
