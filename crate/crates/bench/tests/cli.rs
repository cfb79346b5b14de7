use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bench(dir: &Path, config: &str, args: &[&str]) -> Output {
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_admip-bench"))
        .arg("--config")
        .arg(&cfg)
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

const SMALL: &str = "n = 24\nc_s = 0.05\nc_r = 0.1\nsnr = 60\nreps = 3\n";

#[test]
fn table_is_reproducible_apart_from_timings() {
    let dir = TempDir::new().unwrap();
    let mut runs = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let out = bench(dir.path(), SMALL, &["table", "--out", name]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let mut rows = read_csv(&dir.path().join(name));
        let wall = rows[0].iter().position(|c| c == "wall_s").unwrap();
        for r in &mut rows[1..] {
            r[wall].clear();
        }
        runs.push(rows);
    }
    assert_eq!(runs[0], runs[1]);
    // 3 solves and min / avg / max
    assert_eq!(runs[0].len(), 1 + 3 + 3);
    assert!(dir.path().join("a.csv.config").exists());
}

#[test]
fn aggregate_rows_match_the_solve_rows() {
    let dir = TempDir::new().unwrap();
    assert!(bench(dir.path(), SMALL, &["table", "--out", "t.csv"]).status.success());
    let rows = read_csv(&dir.path().join("t.csv"));
    let col = |name: &str| rows[0].iter().position(|c| c == name).unwrap();
    let (iter, status, seed) = (col("iter"), col("status"), col("seed"));
    let solves: Vec<f64> = rows[1..4].iter().map(|r| r[iter].parse().unwrap()).collect();
    let agg = &rows[4..7];
    assert_eq!(agg.iter().map(|r| r[status].as_str()).collect::<Vec<_>>(), ["min", "avg", "max"]);
    assert!(agg.iter().all(|r| r[seed].is_empty()));
    let get = |k: usize| agg[k][iter].parse::<f64>().unwrap();
    assert_eq!(get(0), solves.iter().copied().fold(f64::INFINITY, f64::min));
    assert!((get(1) - solves.iter().sum::<f64>() / 3.0).abs() < 1e-12);
    assert_eq!(get(2), solves.iter().copied().fold(0.0, f64::max));
}

#[test]
fn zero_repetitions_give_a_header_only_csv() {
    let dir = TempDir::new().unwrap();
    let out = bench(dir.path(), "n = 24\nreps = 0\n", &["table", "--out", "e.csv"]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("e.csv")).unwrap();
    assert_eq!(text, "n,c_s,c_r,snr,sr,seed,solver,kappa,rho0,iter,lsv,relL,relS,wall_s,status\n");
}

#[test]
fn single_rho_sweep_selects_it() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("{SMALL}rho = 2\n");
    let out = bench(dir.path(), &cfg, &["rho-sweep", "--out", "s.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_csv(&dir.path().join("s.csv"));
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1][0], "2");
    assert_eq!(rows[1][6], "ok");
    assert_eq!(rows[1][7], "1");
    assert_eq!(read_csv(&dir.path().join("s.csv.runs.csv")).len(), 1 + 3);
}

#[test]
fn saved_instance_solves_identically() {
    let dir = TempDir::new().unwrap();
    let first = bench(dir.path(), "n = 20\nsave_instance = inst.bin\n", &["solve", "--out", "a.csv"]);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    let second = bench(dir.path(), "instance = inst.bin\n", &["solve", "--out", "b.csv"]);
    assert!(second.status.success(), "{}", String::from_utf8_lossy(&second.stderr));
    let (a, b) = (read_csv(&dir.path().join("a.csv")), read_csv(&dir.path().join("b.csv")));
    let iter = a[0].iter().position(|c| c == "iter").unwrap();
    assert_eq!(a[1][iter], b[1][iter]);
    assert_eq!(b[1][a[0].iter().position(|c| c == "relL").unwrap()], "NaN");
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let unknown = bench(dir.path(), "n = 20\nbogus = 1\n", &["solve"]);
    assert_eq!(unknown.status.code(), Some(1));
    let bad_schedule = bench(dir.path(), "n = 20\n", &["solve", "--schedule", "fast"]);
    assert_eq!(bad_schedule.status.code(), Some(1));
    let missing = bench(dir.path(), "instance = nowhere.bin\n", &["solve"]);
    assert_eq!(missing.status.code(), Some(3));
}

#[test]
fn video_writes_frames_and_stats() {
    let dir = TempDir::new().unwrap();
    let cfg = "height = 12\nwidth = 10\nframes = 8\nblock = 3\nsr = 0.8\n";
    let out = bench(dir.path(), cfg, &["video", "--out", "v"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = dir.path().join("v");
    for sub in ["background", "foreground", "foreground_post"] {
        assert_eq!(std::fs::read_dir(v.join(sub)).unwrap().count(), 8, "{sub}");
    }
    let stats: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(v.join("stats.json")).unwrap()).unwrap();
    assert_eq!(stats["frames"], 8);
    assert!(stats["f1"].is_number());
}
