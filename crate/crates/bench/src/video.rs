//! Foreground extraction: corrupt a frame sequence, solve, refine the
//! sparse part and write the three frame sequences plus `stats.json`.
//!
//! Output layout under the output directory:
//!
//! ```text
//! background/frame_NNNNN.pgm       L
//! foreground/frame_NNNNN.pgm       |S|
//! foreground_post/frame_NNNNN.pgm  |S_post|
//! stats.json
//! ```
//!
//! The solve runs on 8-bit gray levels (pixel values times 255), the scale
//! the practical stopping rule's `tol * varrho` is meant for; outputs are
//! scaled back. For synthetic input a pixel counts as detected when
//! `|S_post| > detect_k * varrho`; precision, recall and F1 are taken over
//! observed entries only, since nothing is recovered off the mask.

use std::path::{Path, PathBuf};

use admip::frames::{
    corrupt_video, f1_score, frames_to_matrix, matrix_to_frames, read_frames_dir, synthetic_video,
    write_frames_dir, Frame, SyntheticVideoParams,
};
use admip::{refine_sparse, solve};
use serde_json::{json, Value};

use crate::config::Config;
use crate::error::{config_err, Result};
use crate::settings::RunSettings;

#[derive(Clone, Debug, PartialEq)]
pub enum VideoSource {
    Frames(PathBuf),
    Synthetic(SyntheticVideoParams),
}

#[derive(Clone, Debug)]
pub struct VideoSpec {
    pub source: VideoSource,
    pub sr: f64,
    pub snr: f64,
    pub seed: u64,
    pub detect_k: f64,
    pub write_frames: bool,
    pub settings: RunSettings,
}

pub const DEFAULT_VIDEO_STOP: &str = "practical:5e-6";
pub const DEFAULT_DETECT_K: f64 = 4.0;
/// Pixel values in `[0, 1]` are multiplied by this before solving.
pub const GRAY_LEVELS: f64 = 255.0;

impl VideoSpec {
    /// `input` (frame directory) or `height`, `width`, `frames`, `block`,
    /// `video_seed` for a synthetic video; `sr`, `snr`, `seed`, `detect_k`,
    /// `write_frames` and the solver keys.
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let source = match cfg.opt_str("input") {
            Some(dir) => VideoSource::Frames(PathBuf::from(dir)),
            None => {
                let d = SyntheticVideoParams::default();
                VideoSource::Synthetic(SyntheticVideoParams {
                    height: cfg.get_or("height", d.height)?,
                    width: cfg.get_or("width", d.width)?,
                    frames: cfg.get_or("frames", d.frames)?,
                    block: cfg.get_or("block", d.block)?,
                    seed: cfg.get_or("video_seed", d.seed)?,
                })
            }
        };
        let sr = cfg.get_or("sr", 1.0)?;
        let snr = cfg.get_or("snr", 20.0)?;
        let seed = cfg.get_or("seed", 0u64)?;
        let detect_k = cfg.get_or("detect_k", DEFAULT_DETECT_K)?;
        let write_frames = cfg.bool_or("write_frames", true)?;
        let settings = RunSettings::from_config(cfg, DEFAULT_VIDEO_STOP)?;
        if !(sr > 0.0 && sr <= 1.0) {
            return Err(config_err(format!("sr must lie in (0, 1], got {sr}")));
        }
        if !(detect_k > 0.0) {
            return Err(config_err("detect_k must be > 0"));
        }
        Ok(Self {
            source,
            sr,
            snr,
            seed,
            detect_k,
            write_frames,
            settings,
        })
    }
}

#[derive(Clone, Debug)]
pub struct VideoResult {
    pub stats: Value,
    pub f1: Option<f64>,
    pub iterations: usize,
    pub frames_out: (usize, usize, usize),
}

fn abs_frames(m: &admip::DenseMatrix, h: usize, w: usize) -> Result<Vec<Frame>> {
    Ok(matrix_to_frames(&m.map(f64::abs), h, w)?)
}

pub fn run_video(spec: &VideoSpec, out_dir: Option<&Path>) -> Result<VideoResult> {
    let (frames, truth) = match &spec.source {
        VideoSource::Frames(dir) => (read_frames_dir(dir)?, None),
        VideoSource::Synthetic(p) => {
            let v = synthetic_video(p).map_err(|e| config_err(e.to_string()))?;
            (v.frames, Some(v.foreground))
        }
    };
    let (h, w) = (frames[0].height, frames[0].width);
    let mut m = frames_to_matrix(&frames)?;
    m.scale(GRAY_LEVELS);
    let corrupted = corrupt_video(&m, spec.sr, spec.snr, spec.seed)?;
    let inst = &corrupted.instance;
    let opts = spec.settings.options(inst, corrupted.varrho)?;
    let rep = solve(inst, &opts)?;
    let s_post = refine_sparse(&rep.l, inst)?;

    let threshold = (spec.detect_k * corrupted.varrho).max(1e-12);
    let detection = truth.as_ref().map(|t| {
        let detected: Vec<bool> = s_post.as_slice().iter().map(|v| v.abs() > threshold).collect();
        f1_score(&detected, t, inst.mask().bitmap())
    });

    let unit = |x: &admip::DenseMatrix| {
        let mut x = x.clone();
        x.scale(1.0 / GRAY_LEVELS);
        x
    };
    let background = matrix_to_frames(&unit(&rep.l), h, w)?;
    let foreground = abs_frames(&unit(&rep.s), h, w)?;
    let foreground_post = abs_frames(&unit(&s_post), h, w)?;
    if let (Some(dir), true) = (out_dir, spec.write_frames) {
        write_frames_dir(&dir.join("background"), "frame", &background)?;
        write_frames_dir(&dir.join("foreground"), "frame", &foreground)?;
        write_frames_dir(&dir.join("foreground_post"), "frame", &foreground_post)?;
    }

    let stats = json!({
        "height": h,
        "width": w,
        "frames": frames.len(),
        "sr": spec.sr,
        "snr": spec.snr,
        "seed": spec.seed,
        "observed": inst.mask().len(),
        "varrho": corrupted.varrho,
        "delta": inst.delta(),
        "xi": inst.xi(),
        "solver": spec.settings.schedule.solver_name(),
        "kappa": spec.settings.schedule.kappa(),
        "rho0": opts.schedule.initial(),
        "svd_count": rep.iterations,
        "lsv": rep.lsv_avg,
        "rank": rep.final_rank(),
        "wall_s": rep.wall_time_s,
        "status": rep.status.as_str(),
        "detect_threshold": threshold,
        "precision": detection.map(|d| d.0),
        "recall": detection.map(|d| d.1),
        "f1": detection.map(|d| d.2),
    });
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("stats.json"), serde_json::to_string_pretty(&stats).expect("json") + "\n")?;
    }
    Ok(VideoResult {
        stats,
        f1: detection.map(|d| d.2),
        iterations: rep.iterations,
        frames_out: (background.len(), foreground.len(), foreground_post.len()),
    })
}
