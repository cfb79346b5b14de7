use crate::error::{invalid, Result, SpcpError};
use crate::linalg::spectral_norm;
use crate::problem::SpcpInstance;

/// Growth factor of the geometric phase.
pub const DEFAULT_KAPPA: f64 = 1.25;
/// `rho_bar = DEFAULT_RHO_BAR_FACTOR * rho_0`.
pub const DEFAULT_RHO_BAR_FACTOR: f64 = 1000.0;
/// `rho_0 = RHO0_SCALE / sigma_max(pi_Omega(D))`.
pub const RHO0_SCALE: f64 = 1.25;
pub const DEFAULT_MAX_ITER: usize = 500;

/// Penalty sequence `{rho_k}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PenaltySchedule {
    /// `rho_1 = rho_0`, then `rho_{k+1} = min(kappa rho_k, rho_bar + k)`:
    /// geometric until the cap, linear afterwards, unbounded either way.
    Increasing { rho0: f64, kappa: f64, rho_bar: f64 },
    Constant { rho: f64 },
}

impl PenaltySchedule {
    pub fn increasing(rho0: f64, kappa: f64, rho_bar: f64) -> Result<Self> {
        if !(rho0 > 0.0 && rho0.is_finite()) {
            return Err(invalid(format!("rho0 must be > 0, got {rho0}")));
        }
        if !(kappa > 1.0 && kappa.is_finite()) {
            return Err(invalid(format!("kappa must be > 1, got {kappa}")));
        }
        if !(rho_bar > 0.0 && rho_bar.is_finite()) {
            return Err(invalid(format!("rho_bar must be > 0, got {rho_bar}")));
        }
        Ok(Self::Increasing { rho0, kappa, rho_bar })
    }

    /// `kappa = 1.25`, `rho_bar = 1000 rho0`.
    pub fn admip_default(rho0: f64) -> Result<Self> {
        Self::increasing(rho0, DEFAULT_KAPPA, DEFAULT_RHO_BAR_FACTOR * rho0)
    }

    /// Default increasing schedule with `rho0` taken from the data.
    pub fn admip_for(inst: &SpcpInstance, kappa: f64) -> Result<Self> {
        let rho0 = default_rho0(inst)?;
        Self::increasing(rho0, kappa, DEFAULT_RHO_BAR_FACTOR * rho0)
    }

    pub fn constant(rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(invalid(format!("rho must be > 0, got {rho}")));
        }
        Ok(Self::Constant { rho })
    }

    pub fn initial(&self) -> f64 {
        match *self {
            Self::Increasing { rho0, .. } => rho0,
            Self::Constant { rho } => rho,
        }
    }

    /// `rho_{k+1}` from `rho_k` for `k >= 1`.
    pub fn next_rho(&self, rho_k: f64, k: usize) -> f64 {
        match *self {
            Self::Increasing { kappa, rho_bar, .. } => (kappa * rho_k).min(rho_bar + k as f64),
            Self::Constant { rho } => rho,
        }
    }

    /// `rho_{k+1}` for any `k >= 0`, honouring `rho_1 = rho_0`.
    pub fn advance(&self, rho_k: f64, k: usize) -> f64 {
        if k == 0 {
            self.initial()
        } else {
            self.next_rho(rho_k, k)
        }
    }

    /// `rho_0, ..., rho_{len-1}`.
    pub fn sequence(&self, len: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(len);
        let mut rho = self.initial();
        for k in 0..len {
            out.push(rho);
            rho = self.advance(rho, k);
        }
        out
    }
}

/// `1.25 / sigma_max(pi_Omega(D))`.
pub fn default_rho0(inst: &SpcpInstance) -> Result<f64> {
    let s = spectral_norm(inst.data())?;
    if s == 0.0 {
        return Err(SpcpError::ZeroData);
    }
    Ok(RHO0_SCALE / s)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StopCriterion {
    /// `||L_{k+1} - Z_{k+1}||_F / ||D||_F <= tol_p` and
    /// `rho_k ||Z_{k+1} - Z_k||_F / ||D||_F <= tol_d`.
    PrimalDual { tol_p: f64, tol_d: f64 },
    /// `||(L_{k+1}, S_{k+1}) - (L_k, S_k)||_F / (||(L_k, S_k)||_F + 1) <= tol * varrho`,
    /// with `varrho` the noise standard deviation. Not applied while `L` and
    /// `S` are both zero, unless zero is feasible.
    Practical { tol: f64, varrho: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StoppingRule {
    pub criterion: StopCriterion,
    pub max_iter: usize,
}

impl StoppingRule {
    pub fn primal_dual(tol_p: f64, tol_d: f64, max_iter: usize) -> Result<Self> {
        if !(tol_p > 0.0 && tol_d > 0.0) {
            return Err(invalid("primal/dual tolerances must be > 0"));
        }
        Self::checked(StopCriterion::PrimalDual { tol_p, tol_d }, max_iter)
    }

    pub fn practical(tol: f64, varrho: f64, max_iter: usize) -> Result<Self> {
        if !(tol > 0.0 && varrho > 0.0) {
            return Err(invalid("practical rule needs tol > 0 and varrho > 0"));
        }
        Self::checked(StopCriterion::Practical { tol, varrho }, max_iter)
    }

    fn checked(criterion: StopCriterion, max_iter: usize) -> Result<Self> {
        if max_iter == 0 {
            return Err(invalid("max_iter must be >= 1"));
        }
        Ok(Self { criterion, max_iter })
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter.max(1);
        self
    }
}
