use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use admip::schedule::{DEFAULT_KAPPA, DEFAULT_MAX_ITER, DEFAULT_RHO_BAR_FACTOR};
use admip::{default_rho0, PenaltySchedule, SolveOptions, SpcpInstance, StoppingRule};

use crate::config::Config;
use crate::error::{config_err, Result};

/// Tolerance of the primal-dual rule used for the random-instance tables.
pub const DEFAULT_PD_TOL: f64 = 8.9e-5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScheduleSpec {
    /// Increasing penalties; `rho0 = None` takes `1.25 / sigma_max(D)`.
    Admip {
        kappa: f64,
        rho_bar_factor: f64,
        rho0: Option<f64>,
    },
    Constant(f64),
}

impl ScheduleSpec {
    /// `admip` or `constant:R`.
    pub fn parse(s: &str, kappa: f64, rho_bar_factor: f64, rho0: Option<f64>) -> Result<Self> {
        match s.trim() {
            "admip" => Ok(Self::Admip {
                kappa,
                rho_bar_factor,
                rho0,
            }),
            other => {
                let r = other
                    .strip_prefix("constant:")
                    .and_then(|r| r.trim().parse::<f64>().ok())
                    .ok_or_else(|| config_err(format!("schedule must be admip or constant:R, got {other:?}")))?;
                if !(r > 0.0 && r.is_finite()) {
                    return Err(config_err("constant penalty must be > 0"));
                }
                Ok(Self::Constant(r))
            }
        }
    }

    pub fn solver_name(&self) -> &'static str {
        match self {
            Self::Admip { .. } => "admip",
            Self::Constant(_) => "admm",
        }
    }

    pub fn kappa(&self) -> f64 {
        match self {
            Self::Admip { kappa, .. } => *kappa,
            Self::Constant(_) => 1.0,
        }
    }

    pub fn build(&self, inst: &SpcpInstance) -> Result<PenaltySchedule> {
        Ok(match *self {
            Self::Admip {
                kappa,
                rho_bar_factor,
                rho0,
            } => {
                let rho0 = match rho0 {
                    Some(r) => r,
                    None => default_rho0(inst)?,
                };
                PenaltySchedule::increasing(rho0, kappa, rho_bar_factor * rho0)?
            }
            Self::Constant(r) => PenaltySchedule::constant(r)?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StopSpec {
    PrimalDual { tol_p: f64, tol_d: f64 },
    Practical { tol: f64 },
}

impl StopSpec {
    /// `pd:TOLP,TOLD` or `practical:TOL`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || config_err(format!("stop must be pd:TOLP,TOLD or practical:TOL, got {s:?}"));
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("pd:") {
            let (a, b) = rest.split_once(',').ok_or_else(bad)?;
            let tol_p: f64 = a.trim().parse().map_err(|_| bad())?;
            let tol_d: f64 = b.trim().parse().map_err(|_| bad())?;
            if !(tol_p > 0.0 && tol_d > 0.0) {
                return Err(bad());
            }
            Ok(Self::PrimalDual { tol_p, tol_d })
        } else if let Some(rest) = s.strip_prefix("practical:") {
            let tol: f64 = rest.trim().parse().map_err(|_| bad())?;
            if !(tol > 0.0) {
                return Err(bad());
            }
            Ok(Self::Practical { tol })
        } else {
            Err(bad())
        }
    }

    pub fn build(&self, varrho: f64, max_iter: usize) -> Result<StoppingRule> {
        match *self {
            Self::PrimalDual { tol_p, tol_d } => Ok(StoppingRule::primal_dual(tol_p, tol_d, max_iter)?),
            Self::Practical { tol } => {
                if !(varrho > 0.0) {
                    return Err(config_err("practical stopping needs a noisy instance (varrho > 0)"));
                }
                Ok(StoppingRule::practical(tol, varrho, max_iter)?)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunSettings {
    pub schedule: ScheduleSpec,
    pub stop: StopSpec,
    pub max_iter: usize,
    pub threads: usize,
}

impl RunSettings {
    /// Reads `schedule`, `kappa`, `rho_bar_factor`, `rho0`, `stop`, `max_iter`, `threads`.
    pub fn from_config(cfg: &Config, default_stop: &str) -> Result<Self> {
        let kappa = cfg.get_or("kappa", DEFAULT_KAPPA)?;
        let rho_bar_factor = cfg.get_or("rho_bar_factor", DEFAULT_RHO_BAR_FACTOR)?;
        let rho0 = match cfg.str_or("rho0", "auto").as_str() {
            "auto" => None,
            v => Some(
                v.parse::<f64>()
                    .map_err(|_| config_err(format!("rho0: cannot parse {v:?}")))?,
            ),
        };
        let schedule = ScheduleSpec::parse(&cfg.str_or("schedule", "admip"), kappa, rho_bar_factor, rho0)?;
        let stop = StopSpec::parse(&cfg.str_or("stop", default_stop))?;
        let max_iter = cfg.get_or("max_iter", DEFAULT_MAX_ITER)?;
        let threads = cfg.get_or("threads", 1usize)?;
        if max_iter == 0 || threads == 0 {
            return Err(config_err("max_iter and threads must be >= 1"));
        }
        Ok(Self {
            schedule,
            stop,
            max_iter,
            threads,
        })
    }

    pub fn options(&self, inst: &SpcpInstance, varrho: f64) -> Result<SolveOptions> {
        Ok(SolveOptions {
            schedule: self.schedule.build(inst)?,
            stop: self.stop.build(varrho, self.max_iter)?,
            diagnostics: false,
        })
    }
}

/// Runs `job(i)` for `i in 0..count` on up to `threads` workers; results
/// come back in index order. The first error (by index) wins.
pub fn run_pool<T: Send>(
    count: usize,
    threads: usize,
    job: impl Fn(usize) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    let slots: Vec<Mutex<Option<Result<T>>>> = (0..count).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = threads.clamp(1, count.max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= count {
                    break;
                }
                let r = job(i);
                *slots[i].lock().unwrap() = Some(r);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().unwrap().expect("every job ran"))
        .collect()
}
