//! Grayscale frames, 8-bit binary PGM files and the frame-matrix layout.
//!
//! A sequence of `T` frames of size `h x w` maps to an `R x T` matrix with
//! `R = h w`; column `t` is frame `t` stacked column by column, so pixel
//! `(y, x)` of frame `t` sits at row `x h + y`.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result, SpcpError};
use crate::instance::{noise_radius, sample_subset, stream_rng, STREAM_MASK, STREAM_NOISE};
use crate::linalg::{DenseMatrix, ObservationMask};
use crate::problem::SpcpInstance;

/// Pixel intensities in `[0, 1]`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub height: usize,
    pub width: usize,
    pub pixels: Vec<f64>,
}

impl Frame {
    pub fn new(height: usize, width: usize, pixels: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(invalid("frame must be non-empty"));
        }
        if pixels.len() != height * width {
            return Err(SpcpError::DimensionMismatch {
                expected: (height, width),
                found: (pixels.len(), 1),
            });
        }
        if pixels.iter().any(|p| !p.is_finite()) {
            return Err(SpcpError::NonFinite("frame"));
        }
        Ok(Self { height, width, pixels })
    }

    pub fn get(&self, y: usize, x: usize) -> f64 {
        self.pixels[y * self.width + x]
    }
}

pub fn frames_to_matrix(frames: &[Frame]) -> Result<DenseMatrix> {
    let first = frames.first().ok_or_else(|| invalid("no frames"))?;
    let (h, w) = (first.height, first.width);
    let mut out = DenseMatrix::zeros(h * w, frames.len());
    for (t, f) in frames.iter().enumerate() {
        if (f.height, f.width) != (h, w) {
            return Err(SpcpError::DimensionMismatch {
                expected: (h, w),
                found: (f.height, f.width),
            });
        }
        for x in 0..w {
            for y in 0..h {
                out[(x * h + y, t)] = f.get(y, x);
            }
        }
    }
    Ok(out)
}

/// Inverse of [`frames_to_matrix`]; values are clamped to `[0, 1]`.
pub fn matrix_to_frames(m: &DenseMatrix, height: usize, width: usize) -> Result<Vec<Frame>> {
    if height * width != m.nrows() || height == 0 || width == 0 {
        return Err(invalid(format!(
            "{} rows do not match {height}x{width} frames",
            m.nrows()
        )));
    }
    (0..m.ncols())
        .map(|t| {
            let col = m.column(t);
            let mut pixels = vec![0.0; height * width];
            for x in 0..width {
                for y in 0..height {
                    let v = col[x * height + y];
                    pixels[y * width + x] = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
                }
            }
            Frame::new(height, width, pixels)
        })
        .collect()
}

pub fn encode_pgm(frame: &Frame) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", frame.width, frame.height).into_bytes();
    out.extend(
        frame
            .pixels
            .iter()
            .map(|p| (p.clamp(0.0, 1.0) * 255.0).round() as u8),
    );
    out
}

/// Parses a binary (P5) PGM with `maxval <= 255`.
pub fn decode_pgm(bytes: &[u8]) -> Result<Frame> {
    let mut pos = 0;
    let mut header = [0usize; 3];
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(SpcpError::Format("not a binary PGM (missing P5)".into()));
    }
    pos += 2;
    for slot in header.iter_mut() {
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(_) => break,
                None => return Err(SpcpError::Format("truncated PGM header".into())),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(|b| b.is_ascii_digit()) {
            pos += 1;
        }
        *slot = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| SpcpError::Format("bad PGM header field".into()))?;
    }
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(SpcpError::Format("missing whitespace after maxval".into())),
    }
    let [width, height, maxval] = header;
    if maxval == 0 || maxval > 255 {
        return Err(SpcpError::Format(format!("unsupported maxval {maxval}")));
    }
    let n = width * height;
    let data = bytes
        .get(pos..pos + n)
        .ok_or_else(|| SpcpError::Format("truncated PGM data".into()))?;
    let pixels = data.iter().map(|&b| (b as f64 / maxval as f64).min(1.0)).collect();
    Frame::new(height, width, pixels)
}

pub fn write_pgm(path: &Path, frame: &Frame) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode_pgm(frame))?;
    Ok(())
}

pub fn read_pgm(path: &Path) -> Result<Frame> {
    decode_pgm(&fs::read(path)?)
}

/// Writes `{prefix}_{t:05}.pgm` for every frame, creating `dir` if needed.
pub fn write_frames_dir(dir: &Path, prefix: &str, frames: &[Frame]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    frames
        .iter()
        .enumerate()
        .map(|(t, f)| {
            let p = dir.join(format!("{prefix}_{t:05}.pgm"));
            write_pgm(&p, f)?;
            Ok(p)
        })
        .collect()
}

/// Reads every `.pgm` in `dir`, in file-name order.
pub fn read_frames_dir(dir: &Path) -> Result<Vec<Frame>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(invalid(format!("no .pgm files in {}", dir.display())));
    }
    paths.iter().map(|p| read_pgm(p)).collect()
}

#[derive(Clone, Debug)]
pub struct CorruptedVideo {
    pub instance: SpcpInstance,
    pub varrho: f64,
}

/// Samples `ceil(sr R T)` entries of `m` and adds Gaussian noise with
/// `varrho = ||pi_Omega(M)||_F / (sqrt(|Omega|) 10^(SNR/20))`.
/// `delta = sqrt(n + sqrt(8n)) varrho` and `xi = 1/sqrt(n)` with `n = max(R, T)`.
pub fn corrupt_video(m: &DenseMatrix, sr: f64, snr_db: f64, seed: u64) -> Result<CorruptedVideo> {
    if !(sr > 0.0 && sr <= 1.0) {
        return Err(invalid(format!("sr must lie in (0, 1], got {sr}")));
    }
    if snr_db.is_nan() {
        return Err(invalid("snr must be a number"));
    }
    let (rows, cols) = m.shape();
    let total = rows * cols;
    let k = crate::instance::ceil_count(sr * total as f64).max(1);
    let offsets = sample_subset(&mut stream_rng(seed, STREAM_MASK), total, k);
    let mask = ObservationMask::new(rows, cols, offsets.iter().map(|&o| (o % rows, o / rows)).collect())?;

    let signal: f64 = offsets.iter().map(|&o| m.as_slice()[o].powi(2)).sum::<f64>().sqrt();
    let varrho = signal / ((k as f64).sqrt() * 10f64.powf(snr_db / 20.0));
    let mut d = m.clone();
    if varrho > 0.0 {
        let mut rng = stream_rng(seed, STREAM_NOISE);
        for v in d.as_mut_slice() {
            *v += varrho * rng.sample::<f64, _>(StandardNormal);
        }
    }
    let delta = noise_radius(rows.max(cols), varrho);
    Ok(CorruptedVideo {
        instance: SpcpInstance::with_default_xi(d, mask, delta)?,
        varrho,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SyntheticVideoParams {
    pub height: usize,
    pub width: usize,
    pub frames: usize,
    /// Side of each square moving block.
    pub block: usize,
    pub seed: u64,
}

impl Default for SyntheticVideoParams {
    fn default() -> Self {
        Self {
            height: 32,
            width: 32,
            frames: 40,
            block: 6,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SyntheticVideo {
    pub frames: Vec<Frame>,
    /// Static background, one frame.
    pub background: Frame,
    /// Foreground indicator, same layout as [`frames_to_matrix`].
    pub foreground: Vec<bool>,
}

pub const FOREGROUND_INTENSITY: f64 = 0.95;

/// Static background uniform on `[0.1, 0.6]` with two blocks of intensity
/// [`FOREGROUND_INTENSITY`] bouncing off the frame edges.
pub fn synthetic_video(p: &SyntheticVideoParams) -> Result<SyntheticVideo> {
    let SyntheticVideoParams { height: h, width: w, frames: t_len, block: b, seed } = *p;
    if t_len == 0 || b == 0 || b > h || b > w {
        return Err(invalid("block must fit the frame and frames must be >= 1"));
    }
    let mut rng = stream_rng(seed, 1);
    let bg: Vec<f64> = (0..h * w).map(|_| rng.gen_range(0.1..0.6)).collect();
    let background = Frame::new(h, w, bg.clone())?;

    let bounce = |start: usize, vel: isize, t: usize, span: usize| -> usize {
        if span == 0 {
            return 0;
        }
        let period = 2 * span as isize;
        let raw = (start as isize + vel * t as isize).rem_euclid(period);
        (if raw > span as isize { period - raw } else { raw }) as usize
    };
    let movers = [
        (rng.gen_range(0..=h - b), rng.gen_range(0..=w - b), 1isize, 2isize),
        (rng.gen_range(0..=h - b), rng.gen_range(0..=w - b), -2isize, 1isize),
    ];

    let mut frames = Vec::with_capacity(t_len);
    let mut foreground = vec![false; h * w * t_len];
    for t in 0..t_len {
        let mut px = bg.clone();
        for &(y0, x0, vy, vx) in &movers {
            let y = bounce(y0, vy, t, h - b);
            let x = bounce(x0, vx, t, w - b);
            for yy in y..y + b {
                for xx in x..x + b {
                    px[yy * w + xx] = FOREGROUND_INTENSITY;
                    foreground[t * h * w + xx * h + yy] = true;
                }
            }
        }
        frames.push(Frame::new(h, w, px)?);
    }
    Ok(SyntheticVideo {
        frames,
        background,
        foreground,
    })
}

/// `(precision, recall, F1)` of `detected` against `truth`, restricted to
/// entries where `within` is true. Empty denominators count as 1.
pub fn f1_score(detected: &[bool], truth: &[bool], within: &[bool]) -> (f64, f64, f64) {
    assert_eq!(detected.len(), truth.len());
    assert_eq!(detected.len(), within.len());
    let (mut tp, mut fp, mut fneg) = (0usize, 0usize, 0usize);
    for ((&d, &t), &w) in detected.iter().zip(truth).zip(within) {
        if !w {
            continue;
        }
        match (d, t) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fneg += 1,
            _ => {}
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 1.0 } else { a as f64 / b as f64 };
    let p = ratio(tp, tp + fp);
    let r = ratio(tp, tp + fneg);
    let f1 = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    (p, r, f1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_layout_is_column_stacked() {
        let f = Frame::new(2, 3, vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5]).unwrap();
        let m = frames_to_matrix(&[f.clone()]).unwrap();
        assert_eq!(m.column(0), &[0.0, 0.3, 0.1, 0.4, 0.2, 0.5]);
        assert_eq!(matrix_to_frames(&m, 2, 3).unwrap(), vec![f]);
    }

    #[test]
    fn pgm_round_trip_is_exact_on_the_grid() {
        let px: Vec<f64> = (0..12).map(|i| (i * 20) as f64 / 255.0).collect();
        let f = Frame::new(3, 4, px).unwrap();
        let back = decode_pgm(&encode_pgm(&f)).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn pgm_header_with_comment_and_maxval() {
        let mut bytes = b"P5\n# made by hand\n2 1\n# more\n15\n".to_vec();
        bytes.extend([0u8, 15]);
        let f = decode_pgm(&bytes).unwrap();
        assert_eq!(f.pixels, vec![0.0, 1.0]);
        assert!(decode_pgm(b"P2\n1 1\n255\n0").is_err());
        assert!(decode_pgm(b"P5\n2 2\n255\n\x00").is_err());
        assert!(decode_pgm(b"P5\n1 1\n65535\n\x00\x00").is_err());
    }

    #[test]
    fn clamping_on_export() {
        let m = DenseMatrix::from_rows(&[&[-0.5], &[1.7]]);
        let f = matrix_to_frames(&m, 2, 1).unwrap();
        assert_eq!(f[0].pixels, vec![0.0, 1.0]);
    }

    #[test]
    fn f1_examples() {
        let all = [true; 4];
        let (p, r, f) = f1_score(&[true, true, false, false], &[true, false, true, false], &all);
        assert_eq!((p, r, f), (0.5, 0.5, 0.5));
        let (_, _, f) = f1_score(&[true, false], &[true, false], &[true, true]);
        assert_eq!(f, 1.0);
        let (_, _, f) = f1_score(&[false, true], &[true, true], &[true, false]);
        assert_eq!(f, 0.0);
    }

    #[test]
    fn synthetic_video_shapes() {
        let v = synthetic_video(&SyntheticVideoParams::default()).unwrap();
        assert_eq!(v.frames.len(), 40);
        let per_frame = v.foreground.chunks(32 * 32).map(|c| c.iter().filter(|&&b| b).count());
        for c in per_frame {
            assert!((36..=72).contains(&c));
        }
    }

    #[test]
    fn corruption_noise_level() {
        let m = DenseMatrix::from_fn(400, 30, |i, j| 0.2 + 0.001 * ((i * 31 + j * 7) % 300) as f64);
        let c = corrupt_video(&m, 0.9, 20.0, 5).unwrap();
        let omega = c.instance.mask().gather(&m).unwrap();
        let rms = (omega.iter().map(|v| v * v).sum::<f64>() / omega.len() as f64).sqrt();
        assert!((c.varrho - rms / 10.0).abs() < 1e-14);
        assert_eq!(c.instance.mask().len(), 10800);
        assert!((c.instance.xi() - 1.0 / 20.0).abs() < 1e-15);
    }
}
