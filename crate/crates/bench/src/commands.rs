//! Subcommand bodies shared by the binary and the tests.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use admip::instance::{generate, rel_errors};
use admip::solve;

use crate::config::Config;
use crate::container::{read_instance, write_instance};
use crate::error::{config_err, Result};
use crate::settings::{RunSettings, DEFAULT_PD_TOL};
use crate::sweep::{run_rho_sweep, write_summary, SweepReport, SweepSpec};
use crate::table::{run_table, write_rows, Cell, RunRow, TableReport, TableSpec};
use crate::video::{run_video, VideoResult, VideoSpec};

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn writer(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_provenance(out: Option<&Path>, cfg: &Config) -> Result<()> {
    if let Some(p) = out {
        let text = format!("# admip-bench {}\n{}", env!("CARGO_PKG_VERSION"), cfg.provenance());
        std::fs::write(sidecar(p, ".config"), text)?;
    }
    Ok(())
}

/// Writes the table CSV to `out` (stdout if `None`) and the resolved
/// configuration to `<out>.config`.
pub fn table(cfg: &Config, out: Option<&Path>) -> Result<TableReport> {
    let spec = TableSpec::from_config(cfg)?;
    cfg.finish()?;
    let report = run_table(&spec)?;
    write_rows(writer(out)?, &report.ordered_rows())?;
    write_provenance(out, cfg)?;
    Ok(report)
}

/// Summary CSV to `out`, per-run rows to `<out>.runs.csv`.
pub fn rho_sweep(cfg: &Config, out: Option<&Path>) -> Result<SweepReport> {
    let spec = SweepSpec::from_config(cfg)?;
    cfg.finish()?;
    let report = run_rho_sweep(&spec)?;
    write_summary(writer(out)?, &report)?;
    if let Some(p) = out {
        let rows: Vec<&RunRow> = report.runs.iter().collect();
        write_rows(File::create(sidecar(p, ".runs.csv"))?, &rows)?;
    }
    write_provenance(out, cfg)?;
    Ok(report)
}

/// Frames and `stats.json` under `out` (default `video_out`).
pub fn video(cfg: &Config, out: Option<&Path>) -> Result<VideoResult> {
    let spec = VideoSpec::from_config(cfg)?;
    cfg.finish()?;
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("video_out"));
    let result = run_video(&spec, Some(&dir))?;
    std::fs::write(dir.join("stats.config"), cfg.provenance())?;
    Ok(result)
}

/// One solve of `instance = PATH` or of a generated instance (table keys,
/// single values). Writes one CSV row; `save_instance = PATH` stores the
/// instance. Errors are not available for loaded instances, so `relL` and
/// `relS` are NaN there.
pub fn solve_one(cfg: &Config, out: Option<&Path>) -> Result<RunRow> {
    let settings = RunSettings::from_config(cfg, &format!("pd:{DEFAULT_PD_TOL},{DEFAULT_PD_TOL}"))?;
    let save = cfg.opt_str("save_instance");
    let row = if let Some(path) = cfg.opt_str("instance") {
        let varrho = cfg.get_or("varrho", 0.0)?;
        cfg.finish()?;
        let inst = read_instance(Path::new(&path))?;
        let opts = settings.options(&inst, varrho)?;
        let rep = solve(&inst, &opts)?;
        if let Some(p) = save {
            write_instance(Path::new(&p), &inst)?;
        }
        let (m, n) = inst.shape();
        RunRow {
            cell: Cell {
                n: m.max(n),
                c_s: f64::NAN,
                c_r: f64::NAN,
                snr: f64::NAN,
                sr: inst.mask().sampling_ratio(),
            },
            seed: None,
            solver: settings.schedule.solver_name().into(),
            kappa: settings.schedule.kappa(),
            rho0: opts.schedule.initial(),
            iter: rep.iterations as f64,
            lsv: rep.lsv_avg,
            rel_l: f64::NAN,
            rel_s: f64::NAN,
            wall_s: rep.wall_time_s,
            status: rep.status.as_str().into(),
        }
    } else {
        let cell = Cell {
            n: cfg.get_or("n", 500usize)?,
            c_s: cfg.get_or("c_s", 0.05)?,
            c_r: cfg.get_or("c_r", 0.05)?,
            snr: cfg.get_or("snr", 80.0)?,
            sr: cfg.get_or("sr", 1.0)?,
        };
        let seed = cfg.get_or("seed", 0u64)?;
        cfg.finish()?;
        let (inst, gt) = generate(&cell.params(seed)).map_err(|e| config_err(e.to_string()))?;
        if let Some(p) = save {
            write_instance(Path::new(&p), &inst)?;
        }
        let opts = settings.options(&inst, gt.varrho)?;
        let rep = solve(&inst, &opts)?;
        let (rel_l, rel_s) = rel_errors(&rep.l, &rep.s, &gt)?;
        RunRow {
            cell,
            seed: Some(seed),
            solver: settings.schedule.solver_name().into(),
            kappa: settings.schedule.kappa(),
            rho0: opts.schedule.initial(),
            iter: rep.iterations as f64,
            lsv: rep.lsv_avg,
            rel_l,
            rel_s,
            wall_s: rep.wall_time_s,
            status: rep.status.as_str().into(),
        }
    };
    write_rows(writer(out)?, &[&row])?;
    write_provenance(out, cfg)?;
    Ok(row)
}
