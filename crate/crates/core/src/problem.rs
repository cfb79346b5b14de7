use crate::error::{invalid, Result};
use crate::linalg::{l1_norm, nuclear_norm, project_omega, DenseMatrix, ObservationMask};

/// `min ||L||_* + xi ||S||_1  s.t.  ||pi_Omega(L + S - D)||_F <= delta`.
#[derive(Clone, Debug)]
pub struct SpcpInstance {
    d: DenseMatrix,
    mask: ObservationMask,
    delta: f64,
    xi: f64,
}

impl SpcpInstance {
    /// Entries of `d` off the mask are zeroed.
    pub fn new(d: DenseMatrix, mask: ObservationMask, delta: f64, xi: f64) -> Result<Self> {
        let d = project_omega(&d, &mask)?;
        if !d.is_finite() {
            return Err(invalid("observed data must be finite"));
        }
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(invalid(format!("delta must be finite and >= 0, got {delta}")));
        }
        if !(xi > 0.0 && xi.is_finite()) {
            return Err(invalid(format!("xi must be finite and > 0, got {xi}")));
        }
        Ok(Self { d, mask, delta, xi })
    }

    /// Uses `xi = 1 / sqrt(max(m, n))`.
    pub fn with_default_xi(d: DenseMatrix, mask: ObservationMask, delta: f64) -> Result<Self> {
        let xi = default_xi(d.nrows(), d.ncols());
        Self::new(d, mask, delta, xi)
    }

    pub fn data(&self) -> &DenseMatrix {
        &self.d
    }

    pub fn mask(&self) -> &ObservationMask {
        &self.mask
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn shape(&self) -> (usize, usize) {
        self.d.shape()
    }

    /// `||L||_* + xi ||S||_1`.
    pub fn objective(&self, l: &DenseMatrix, s: &DenseMatrix) -> Result<f64> {
        Ok(nuclear_norm(l)? + self.xi * l1_norm(s))
    }

    /// `||pi_Omega(L + S - D)||_F`.
    pub fn residual_norm(&self, l: &DenseMatrix, s: &DenseMatrix) -> f64 {
        self.mask
            .offsets()
            .iter()
            .map(|&o| {
                let r = l.as_slice()[o] + s.as_slice()[o] - self.d.as_slice()[o];
                r * r
            })
            .sum::<f64>()
            .sqrt()
    }
}

pub fn default_xi(rows: usize, cols: usize) -> f64 {
    1.0 / (rows.max(cols) as f64).sqrt()
}
