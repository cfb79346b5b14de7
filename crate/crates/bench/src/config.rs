//! Flat key-value configuration files.
//!
//! ```text
//! file    := line*
//! line    := blank | '#' text | key '=' value ['#' text]
//! key     := [A-Za-z0-9_]+            (unique within a file)
//! value   := list | range | scalar
//! list    := scalar (',' scalar)*     (an empty value is the empty list)
//! range   := start ':' step ':' stop  (numeric, stop inclusive up to 1e-9 step)
//! ```
//!
//! Whitespace around keys, values and list items is ignored. Every key must
//! be consumed by the command that reads the file; leftovers are an error.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{config_err, Result};

#[derive(Debug, Default)]
pub struct Config {
    entries: BTreeMap<String, String>,
    used: RefCell<BTreeSet<String>>,
    /// Values actually used, including defaults, in read order.
    resolved: RefCell<Vec<(String, String)>>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_err(format!("line {}: expected key = value", lineno + 1)))?;
            let key = key.trim();
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(config_err(format!("line {}: bad key {key:?}", lineno + 1)));
            }
            if entries.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(config_err(format!("line {}: duplicate key {key}", lineno + 1)));
            }
        }
        Ok(Self {
            entries,
            ..Default::default()
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Sets `key` unless the file already has it.
    pub fn set_default(&mut self, key: &str, value: &str) {
        self.entries.entry(key.to_string()).or_insert_with(|| value.to_string());
    }

    /// Overrides `key` (command-line flags).
    pub fn set(&mut self, key: &str, value: &str) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.used.borrow_mut().insert(key.to_string());
        self.entries.get(key).map(String::as_str)
    }

    fn record(&self, key: &str, value: String) {
        let mut r = self.resolved.borrow_mut();
        if !r.iter().any(|(k, _)| k == key) {
            r.push((key.to_string(), value));
        }
    }

    pub fn str_or(&self, key: &str, default: &str) -> String {
        let v = self.raw(key).unwrap_or(default).to_string();
        self.record(key, v.clone());
        v
    }

    pub fn opt_str(&self, key: &str) -> Option<String> {
        let v = self.raw(key).map(str::to_string);
        if let Some(v) = &v {
            self.record(key, v.clone());
        }
        v
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T: std::fmt::Display,
    {
        match self.raw(key) {
            None => {
                self.record(key, default.to_string());
                Ok(default)
            }
            Some(v) => {
                self.record(key, v.to_string());
                parse_scalar(key, v)
            }
        }
    }

    pub fn list_or<T: FromStr + Copy + std::fmt::Display>(&self, key: &str, default: &[T]) -> Result<Vec<T>> {
        match self.raw(key) {
            None => {
                let joined = default.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
                self.record(key, joined);
                Ok(default.to_vec())
            }
            Some(v) => {
                self.record(key, v.to_string());
                if v.is_empty() {
                    return Ok(Vec::new());
                }
                v.split(',').map(|item| parse_scalar(key, item.trim())).collect()
            }
        }
    }

    /// A list of reals that may also be written as `start:step:stop`.
    pub fn real_list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.raw(key) {
            Some(v) if v.matches(':').count() == 2 => {
                self.record(key, v.to_string());
                let parts: Vec<f64> = v
                    .split(':')
                    .map(|p| parse_scalar(key, p.trim()))
                    .collect::<Result<_>>()?;
                expand_range(key, parts[0], parts[1], parts[2])
            }
            _ => self.list_or(key, default),
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        self.get_or(key, default)
    }

    /// Errors on keys present in the file but never read.
    pub fn finish(&self) -> Result<()> {
        let used = self.used.borrow();
        let unknown: Vec<&str> = self
            .entries
            .keys()
            .filter(|k| !used.contains(*k))
            .map(String::as_str)
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(config_err(format!("unknown keys: {}", unknown.join(", "))))
        }
    }

    /// Every value read so far, defaults included, as `key = value` lines.
    pub fn provenance(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.resolved.borrow().iter() {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

fn parse_scalar<T: FromStr>(key: &str, v: &str) -> Result<T> {
    let v = match v {
        "inf" | "+inf" => "inf",
        other => other,
    };
    v.parse()
        .map_err(|_| config_err(format!("{key}: cannot parse {v:?}")))
}

pub fn expand_range(key: &str, start: f64, step: f64, stop: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(config_err(format!("{key}: bad range {start}:{step}:{stop}")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > 1_000_000 {
        return Err(config_err(format!("{key}: range too long")));
    }
    // i * step rather than accumulation keeps grid points exact (0.025 i).
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}
