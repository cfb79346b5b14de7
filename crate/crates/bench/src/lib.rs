//! Experiment harness around the `admip` solver: random-instance tables,
//! constant-penalty sweeps, the video pipeline and single solves.

pub mod commands;
pub mod config;
pub mod container;
pub mod error;
pub mod settings;
pub mod sweep;
pub mod table;
pub mod video;

pub use config::Config;
pub use error::{BenchError, Result};
