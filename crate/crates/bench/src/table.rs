//! Grids of random instances solved once per (cell, repetition).
//!
//! CSV schema, one row per solve followed by three aggregate rows per cell:
//!
//! ```text
//! n,c_s,c_r,snr,sr,seed,solver,kappa,rho0,iter,lsv,relL,relS,wall_s,status
//! ```
//!
//! `status` is `converged` or `max_iter` for solves; aggregate rows carry
//! `min`, `avg` or `max` there and leave `seed` empty. `kappa` is 1 for the
//! constant-penalty solver, whose `rho0` column holds its fixed penalty.
//! Numbers use the shortest representation that round-trips.

use std::io::Write;

use admip::instance::{generate, rel_errors, GenParams};
use admip::solve;

use crate::config::Config;
use crate::error::{config_err, Result};
use crate::settings::{run_pool, RunSettings, DEFAULT_PD_TOL};

pub const CSV_HEADER: [&str; 15] = [
    "n", "c_s", "c_r", "snr", "sr", "seed", "solver", "kappa", "rho0", "iter", "lsv", "relL", "relS",
    "wall_s", "status",
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub n: usize,
    pub c_s: f64,
    pub c_r: f64,
    pub snr: f64,
    pub sr: f64,
}

impl Cell {
    pub fn params(&self, seed: u64) -> GenParams {
        GenParams {
            n: self.n,
            c_s: self.c_s,
            c_r: self.c_r,
            snr_db: self.snr,
            sr: self.sr,
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRow {
    pub cell: Cell,
    /// `None` on aggregate rows.
    pub seed: Option<u64>,
    pub solver: String,
    pub kappa: f64,
    pub rho0: f64,
    pub iter: f64,
    pub lsv: f64,
    pub rel_l: f64,
    pub rel_s: f64,
    pub wall_s: f64,
    pub status: String,
}

impl RunRow {
    pub fn record(&self) -> Vec<String> {
        let c = &self.cell;
        vec![
            c.n.to_string(),
            c.c_s.to_string(),
            c.c_r.to_string(),
            c.snr.to_string(),
            c.sr.to_string(),
            self.seed.map_or(String::new(), |s| s.to_string()),
            self.solver.clone(),
            self.kappa.to_string(),
            self.rho0.to_string(),
            self.iter.to_string(),
            self.lsv.to_string(),
            self.rel_l.to_string(),
            self.rel_s.to_string(),
            self.wall_s.to_string(),
            self.status.clone(),
        ]
    }
}

#[derive(Clone, Debug)]
pub struct TableSpec {
    pub cells: Vec<Cell>,
    pub reps: usize,
    pub base_seed: u64,
    pub settings: RunSettings,
}

impl TableSpec {
    /// Grid keys `n`, `c_s`, `c_r`, `snr`, `sr` (lists, full Cartesian
    /// product in that nesting order), `reps`, `seed`, plus the solver keys.
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let ns = cfg.list_or("n", &[500usize])?;
        let css = cfg.real_list_or("c_s", &[0.05])?;
        let crs = cfg.real_list_or("c_r", &[0.05])?;
        let snrs = cfg.real_list_or("snr", &[80.0])?;
        let srs = cfg.real_list_or("sr", &[1.0])?;
        let reps = cfg.get_or("reps", 5usize)?;
        let base_seed = cfg.get_or("seed", 0u64)?;
        let settings = RunSettings::from_config(cfg, &format!("pd:{DEFAULT_PD_TOL},{DEFAULT_PD_TOL}"))?;
        let mut cells = Vec::new();
        for &n in &ns {
            for &c_s in &css {
                for &c_r in &crs {
                    for &snr in &snrs {
                        for &sr in &srs {
                            let cell = Cell { n, c_s, c_r, snr, sr };
                            cell.params(0).validate().map_err(|e| config_err(e.to_string()))?;
                            cells.push(cell);
                        }
                    }
                }
            }
        }
        Ok(Self {
            cells,
            reps,
            base_seed,
            settings,
        })
    }
}

pub fn solve_cell(cell: &Cell, seed: u64, settings: &RunSettings) -> Result<RunRow> {
    let (inst, gt) = generate(&cell.params(seed))?;
    let opts = settings.options(&inst, gt.varrho)?;
    let rep = solve(&inst, &opts)?;
    let (rel_l, rel_s) = rel_errors(&rep.l, &rep.s, &gt)?;
    Ok(RunRow {
        cell: *cell,
        seed: Some(seed),
        solver: settings.schedule.solver_name().to_string(),
        kappa: settings.schedule.kappa(),
        rho0: opts.schedule.initial(),
        iter: rep.iterations as f64,
        lsv: rep.lsv_avg,
        rel_l,
        rel_s,
        wall_s: rep.wall_time_s,
        status: rep.status.as_str().to_string(),
    })
}

/// min / avg / max rows over a group of solves of the same cell.
pub fn aggregate(rows: &[RunRow]) -> Vec<RunRow> {
    let Some(first) = rows.first() else {
        return Vec::new();
    };
    let pick = |f: &dyn Fn(&RunRow) -> f64| -> [f64; 3] {
        let v: Vec<f64> = rows.iter().map(f).collect();
        [
            v.iter().copied().fold(f64::INFINITY, f64::min),
            v.iter().sum::<f64>() / v.len() as f64,
            v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        ]
    };
    let rho0 = pick(&|r| r.rho0);
    let iter = pick(&|r| r.iter);
    let lsv = pick(&|r| r.lsv);
    let rel_l = pick(&|r| r.rel_l);
    let rel_s = pick(&|r| r.rel_s);
    let wall = pick(&|r| r.wall_s);
    ["min", "avg", "max"]
        .iter()
        .enumerate()
        .map(|(k, name)| RunRow {
            cell: first.cell,
            seed: None,
            solver: first.solver.clone(),
            kappa: first.kappa,
            rho0: rho0[k],
            iter: iter[k],
            lsv: lsv[k],
            rel_l: rel_l[k],
            rel_s: rel_s[k],
            wall_s: wall[k],
            status: name.to_string(),
        })
        .collect()
}

#[derive(Clone, Debug, Default)]
pub struct TableReport {
    pub rows: Vec<RunRow>,
    pub aggregates: Vec<RunRow>,
}

impl TableReport {
    /// Per-cell solve rows each followed by that cell's aggregates.
    pub fn ordered_rows(&self) -> Vec<&RunRow> {
        let mut out = Vec::new();
        let mut agg = self.aggregates.chunks(3);
        for group in self.rows.chunk_by(|a, b| a.cell == b.cell) {
            out.extend(group);
            if let Some(a) = agg.next() {
                out.extend(a);
            }
        }
        out
    }
}

pub fn run_table(spec: &TableSpec) -> Result<TableReport> {
    let jobs: Vec<(Cell, u64)> = spec
        .cells
        .iter()
        .flat_map(|c| (0..spec.reps).map(move |r| (*c, spec.base_seed + r as u64)))
        .collect();
    let rows = run_pool(jobs.len(), spec.settings.threads, |i| {
        solve_cell(&jobs[i].0, jobs[i].1, &spec.settings)
    })?;
    let aggregates = if spec.reps == 0 {
        Vec::new()
    } else {
        rows.chunks(spec.reps).flat_map(aggregate).collect()
    };
    Ok(TableReport { rows, aggregates })
}

pub fn write_rows<W: Write>(out: W, rows: &[&RunRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(())
}
