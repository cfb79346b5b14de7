use std::path::PathBuf;
use std::process::ExitCode;

use admip_bench::{commands, BenchError, Config};
use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "admip-bench", version, about = "Stable PCP experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Flat key = value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output CSV (table, rho-sweep, solve) or directory (video).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long = "max-iter", global = true)]
    max_iter: Option<usize>,
    /// admip | constant:R
    #[arg(long, global = true)]
    schedule: Option<String>,
    /// pd:TOLP,TOLD | practical:TOL
    #[arg(long, global = true)]
    stop: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Grid of random instances, one row per solve plus min/avg/max rows.
    Table,
    /// Constant-penalty iteration counts over a rho grid.
    RhoSweep,
    /// Foreground extraction on a frame directory or a synthetic video.
    Video,
    /// A single solve.
    Solve,
}

fn run(cli: &Cli) -> Result<(), BenchError> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let overrides = [
        ("seed", cli.seed.map(|v| v.to_string())),
        ("threads", cli.threads.map(|v| v.to_string())),
        ("max_iter", cli.max_iter.map(|v| v.to_string())),
        ("schedule", cli.schedule.clone()),
        ("stop", cli.stop.clone()),
    ];
    for (k, v) in overrides {
        if let Some(v) = v {
            cfg.set(k, &v);
        }
    }
    let out = cli.out.as_deref();
    match cli.command {
        Command::Table => {
            commands::table(&cfg, out)?;
        }
        Command::RhoSweep => {
            let r = commands::rho_sweep(&cfg, out)?;
            match r.best_rho() {
                Some(rho) => eprintln!("rho* = {rho}"),
                None => eprintln!("rho* undefined: no rho converged on every instance"),
            }
        }
        Command::Video => {
            let r = commands::video(&cfg, out)?;
            eprintln!("{}", r.stats);
        }
        Command::Solve => {
            commands::solve_one(&cfg, out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
