//! Constant-penalty sweeps: iterations of ADMM as a function of `rho`.
//!
//! Every `rho` in the grid is run on the same `reps` instances. With
//! `prune = true` a `rho` is abandoned as soon as its total iteration count
//! reaches the best total seen so far; its average can then no longer be
//! the minimum, so the selected `rho*` is unchanged. Such runs are reported
//! with status `pruned`. A `rho` with any run hitting `max_iter` is not
//! eligible for `rho*`.
//!
//! Summary CSV:
//!
//! ```text
//! rho,runs,iter_min,iter_avg,iter_max,lsv_avg,status,best
//! ```
//!
//! `status` is `ok`, `max_iter` or `pruned`; `best` is 1 on the `rho*` row.

use std::io::Write;

use admip::instance::{generate, rel_errors, GroundTruth};
use admip::{solve, SpcpInstance};

use crate::config::{expand_range, Config};
use crate::error::{config_err, Result};
use crate::settings::{run_pool, RunSettings, ScheduleSpec, DEFAULT_PD_TOL};
use crate::table::{Cell, RunRow};

pub const SUMMARY_HEADER: [&str; 8] = ["rho", "runs", "iter_min", "iter_avg", "iter_max", "lsv_avg", "status", "best"];

#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub cell: Cell,
    pub reps: usize,
    pub base_seed: u64,
    pub rhos: Vec<f64>,
    pub settings: RunSettings,
    pub prune: bool,
}

impl SweepSpec {
    /// Single-cell keys as for tables, `rho` (list or range, default
    /// `0.025:0.025:1.25`) and `prune` (default true).
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let n = cfg.get_or("n", 500usize)?;
        let c_s = cfg.get_or("c_s", 0.05)?;
        let c_r = cfg.get_or("c_r", 0.05)?;
        let snr = cfg.get_or("snr", 80.0)?;
        let sr = cfg.get_or("sr", 1.0)?;
        let reps = cfg.get_or("reps", 5usize)?;
        let base_seed = cfg.get_or("seed", 0u64)?;
        let rhos = cfg.real_list_or("rho", &default_rho_grid())?;
        let prune = cfg.bool_or("prune", true)?;
        let mut settings = RunSettings::from_config(cfg, &format!("pd:{DEFAULT_PD_TOL},{DEFAULT_PD_TOL}"))?;
        // the penalty comes from the grid
        settings.schedule = ScheduleSpec::Constant(1.0);
        if rhos.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(config_err("rho values must be > 0"));
        }
        let cell = Cell { n, c_s, c_r, snr, sr };
        cell.params(0).validate().map_err(|e| config_err(e.to_string()))?;
        Ok(Self {
            cell,
            reps,
            base_seed,
            rhos,
            settings,
            prune,
        })
    }
}

/// `{0.025 i : 1 <= i <= 50}`.
pub fn default_rho_grid() -> Vec<f64> {
    expand_range("rho", 0.025, 0.025, 1.25).expect("static range")
}

#[derive(Clone, Debug, PartialEq)]
pub struct RhoSummary {
    pub rho: f64,
    pub runs: usize,
    pub iter_min: f64,
    pub iter_avg: f64,
    pub iter_max: f64,
    pub lsv_avg: f64,
    pub status: String,
}

#[derive(Clone, Debug, Default)]
pub struct SweepReport {
    /// Per-run rows, grouped by `rho` in grid order.
    pub runs: Vec<RunRow>,
    pub summary: Vec<RhoSummary>,
    /// Index into `summary` of `rho*`.
    pub best: Option<usize>,
}

impl SweepReport {
    pub fn best_rho(&self) -> Option<f64> {
        self.best.map(|i| self.summary[i].rho)
    }
}

/// Summary of the rows of one `rho`, as written to the summary CSV.
pub fn summarize(rho: f64, rows: &[RunRow]) -> RhoSummary {
    let iters: Vec<f64> = rows.iter().map(|r| r.iter).collect();
    let status = if rows.iter().any(|r| r.status == "pruned") {
        "pruned"
    } else if rows.iter().any(|r| r.status == "max_iter") {
        "max_iter"
    } else {
        "ok"
    };
    let k = rows.len().max(1) as f64;
    RhoSummary {
        rho,
        runs: rows.len(),
        iter_min: iters.iter().copied().fold(f64::INFINITY, f64::min),
        iter_avg: iters.iter().sum::<f64>() / k,
        iter_max: iters.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        lsv_avg: rows.iter().map(|r| r.lsv).sum::<f64>() / k,
        status: status.to_string(),
    }
}

/// Lowest average among `ok` rows; ties keep the smaller grid index.
pub fn select_best(summary: &[RhoSummary], reps: usize) -> Option<usize> {
    summary
        .iter()
        .enumerate()
        .filter(|(_, s)| s.status == "ok" && s.runs == reps && reps > 0)
        .fold(None, |best: Option<(usize, f64)>, (i, s)| match best {
            Some((_, v)) if v <= s.iter_avg => best,
            _ => Some((i, s.iter_avg)),
        })
        .map(|(i, _)| i)
}

fn run_one(
    inst: &SpcpInstance,
    gt: &GroundTruth,
    cell: &Cell,
    seed: u64,
    rho: f64,
    settings: &RunSettings,
    cap: usize,
) -> Result<RunRow> {
    let pruning = cap < settings.max_iter;
    let mut s = *settings;
    s.schedule = ScheduleSpec::Constant(rho);
    s.max_iter = cap.max(1);
    let opts = s.options(inst, gt.varrho)?;
    let rep = solve(inst, &opts)?;
    let (rel_l, rel_s) = rel_errors(&rep.l, &rep.s, gt)?;
    let status = if !rep.converged() && pruning {
        "pruned"
    } else {
        rep.status.as_str()
    };
    Ok(RunRow {
        cell: *cell,
        seed: Some(seed),
        solver: "admm".into(),
        kappa: 1.0,
        rho0: rho,
        iter: rep.iterations as f64,
        lsv: rep.lsv_avg,
        rel_l,
        rel_s,
        wall_s: rep.wall_time_s,
        status: status.to_string(),
    })
}

/// Coarse pass over every fifth grid point, then the rest by distance (in
/// grid index) from `centre`. Only affects how much pruning happens, never
/// the result.
fn visit_order(count: usize, centre: usize) -> Vec<usize> {
    let mut rest: Vec<usize> = (0..count).filter(|i| i % 5 != 0).collect();
    rest.sort_by_key(|&i| (i as isize - centre as isize).unsigned_abs());
    rest
}

pub fn run_rho_sweep(spec: &SweepSpec) -> Result<SweepReport> {
    let seeds: Vec<u64> = (0..spec.reps).map(|r| spec.base_seed + r as u64).collect();
    let instances = run_pool(seeds.len(), spec.settings.threads, |i| {
        Ok(generate(&spec.cell.params(seeds[i]))?)
    })?;
    let max_iter = spec.settings.max_iter;
    let mut per_rho: Vec<Option<Vec<RunRow>>> = vec![None; spec.rhos.len()];
    let mut best: Option<(usize, usize)> = None; // (grid index, total iterations)

    let evaluate = |idx: usize, best_total: Option<usize>| -> Result<Vec<RunRow>> {
        let rho = spec.rhos[idx];
        let budget = |used: usize| match (spec.prune, best_total) {
            (true, Some(b)) => max_iter.min(b.saturating_sub(used).max(1)),
            _ => max_iter,
        };
        if spec.settings.threads > 1 {
            let cap = budget(0);
            return run_pool(seeds.len(), spec.settings.threads, |i| {
                let (inst, gt) = &instances[i];
                run_one(inst, gt, &spec.cell, seeds[i], rho, &spec.settings, cap)
            });
        }
        let mut rows = Vec::with_capacity(seeds.len());
        let mut used = 0;
        for (i, (inst, gt)) in instances.iter().enumerate() {
            let r = run_one(inst, gt, &spec.cell, seeds[i], rho, &spec.settings, budget(used))?;
            used += r.iter as usize;
            let stop = r.status == "pruned";
            rows.push(r);
            if stop {
                break;
            }
        }
        Ok(rows)
    };

    let mut visit = |idx: usize, best: &mut Option<(usize, usize)>| -> Result<()> {
        let rows = evaluate(idx, best.map(|b| b.1))?;
        if rows.len() == seeds.len() && rows.iter().all(|r| r.status == "converged") {
            let total: usize = rows.iter().map(|r| r.iter as usize).sum();
            if best.map_or(true, |(_, b)| total < b) {
                *best = Some((idx, total));
            }
        }
        per_rho[idx] = Some(rows);
        Ok(())
    };
    for idx in (0..spec.rhos.len()).step_by(5) {
        visit(idx, &mut best)?;
    }
    let centre = best.map_or(spec.rhos.len() / 2, |b| b.0);
    for idx in visit_order(spec.rhos.len(), centre) {
        visit(idx, &mut best)?;
    }

    let mut runs = Vec::new();
    let mut summary = Vec::new();
    for (idx, rows) in per_rho.into_iter().enumerate() {
        let rows = rows.unwrap_or_default();
        summary.push(summarize(spec.rhos[idx], &rows));
        runs.extend(rows);
    }
    let best = select_best(&summary, spec.reps);
    Ok(SweepReport { runs, summary, best })
}

pub fn write_summary<W: Write>(out: W, report: &SweepReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for (i, s) in report.summary.iter().enumerate() {
        w.write_record([
            s.rho.to_string(),
            s.runs.to_string(),
            s.iter_min.to_string(),
            s.iter_avg.to_string(),
            s.iter_max.to_string(),
            s.lsv_avg.to_string(),
            s.status.clone(),
            u8::from(report.best == Some(i)).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
