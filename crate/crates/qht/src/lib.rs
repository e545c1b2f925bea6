//! Experiment runner for `qht-core`.
//!
//! The core crate is `no_std` and only knows how to simulate; this crate
//! supplies what a desk experiment needs around it:
//! - [`fft::RustFftBackend`], a fast [`qht_core::spectral_core::FftBackend`]
//!   built on `rustfft`;
//! - [`config::ExperimentConfig`] and the versioned calibration file;
//! - [`output::Table`], CSV or JSON with the full configuration and its
//!   hash in the header, plus a loader for both;
//! - [`corpus`], the planted instances shared by the commands and the
//!   acceptance suite;
//! - [`commands`], one function per CLI subcommand.

pub mod commands;
pub mod config;
pub mod corpus;
pub mod fft;
pub mod output;

pub use commands::{run, Report};
pub use config::{Command, ExperimentConfig, Format};
pub use output::Table;

/// Failures of the experiment runner.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// The simulation core rejected an operation.
    #[error(transparent)]
    Core(#[from] qht_core::Error),
    /// Reading or writing a file failed.
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    /// CSV encoding or decoding failed.
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    /// JSON encoding or decoding failed.
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    /// The calibration file is malformed.
    #[error("calibration: {0}")]
    Calibration(String),
    /// An output file does not follow the table layout.
    #[error("malformed output file: {0}")]
    Format(String),
    /// The configuration is inconsistent.
    #[error("configuration: {0}")]
    Config(String),
}

/// Result alias with [`Error`].
pub type Result<T> = std::result::Result<T, Error>;
