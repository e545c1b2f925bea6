//! Experiment configuration and the calibration file.
//!
//! A run is fully described by an [`ExperimentConfig`]. The configuration
//! is serialized into the header of every output file together with its
//! SHA-256 hash, so a file names the exact experiment that produced it.
//! The output path is deliberately not part of the configuration: the same
//! experiment written to two places gives byte-identical files.

use std::path::Path;

use qht_core::qht_pipeline::Calibration;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Error, Result};

/// Subcommand that produced a table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Fast-forwarding error atlas.
    FfError,
    /// Plancherel–Rotach overlap curve.
    Overlap,
    /// End-to-end transform fidelity.
    Qht,
    /// Hermite sampling histogram.
    Sample,
    /// Gaussian Goldreich–Levin transcript.
    Ggl,
    /// Tester verdict table.
    Test,
    /// Calibration sweep for `c₀`.
    Calibrate,
}

impl Command {
    /// Name used on the command line and in file headers.
    pub fn name(self) -> &'static str {
        match self {
            Command::FfError => "ff-error",
            Command::Overlap => "overlap",
            Command::Qht => "qht",
            Command::Sample => "sample",
            Command::Ggl => "ggl",
            Command::Test => "test",
            Command::Calibrate => "calibrate",
        }
    }
}

/// Output encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    /// CSV preceded by `#` comment lines carrying JSON.
    #[default]
    Csv,
    /// One JSON document.
    Json,
}

/// Which weight source the learner uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum LearnerMode {
    /// Paired Monte-Carlo draws of `f`.
    Classical,
    /// Prefix frequencies of Hermite samples.
    Sampled,
    /// Both, one row each.
    #[default]
    Both,
}

/// Calibration constants of the dimension rule, as stored on disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationRecord {
    /// Format version; only version 1 exists.
    pub version: u32,
    /// Prefactor of `M ≥ c₀·N^{9/4}/ε^{13/4}`.
    pub c0: f64,
    /// Prefactor of `N_high = ⌈c₁·N/ε⌉`.
    pub c1: f64,
    /// Largest admissible `M`.
    pub hard_cap: usize,
}

impl From<Calibration> for CalibrationRecord {
    fn from(c: Calibration) -> Self {
        Self {
            version: c.version,
            c0: c.c0,
            c1: c.c1,
            hard_cap: c.hard_cap,
        }
    }
}

impl From<CalibrationRecord> for Calibration {
    fn from(c: CalibrationRecord) -> Self {
        Calibration {
            version: c.version,
            c0: c.c0,
            c1: c.c1,
            hard_cap: c.hard_cap,
        }
    }
}

impl CalibrationRecord {
    /// Parses and validates a TOML calibration record.
    pub fn from_toml(text: &str) -> Result<Self> {
        let rec: CalibrationRecord = toml::from_str(text).map_err(|e| Error::Calibration(e.to_string()))?;
        rec.validate()?;
        Ok(rec)
    }

    /// Reads a calibration file.
    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// TOML text of the record.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("a flat record always serializes")
    }

    fn validate(&self) -> Result<()> {
        if self.version != 1 {
            return Err(Error::Calibration(format!("unsupported version {}", self.version)));
        }
        if !(self.c0 > 0.0 && self.c0.is_finite()) || !(self.c1 > 0.0 && self.c1.is_finite()) {
            return Err(Error::Calibration(format!(
                "c0 and c1 must be positive and finite, got {} and {}",
                self.c0, self.c1
            )));
        }
        if self.hard_cap < 8 {
            return Err(Error::Calibration(format!("hard_cap {} is below 8", self.hard_cap)));
        }
        Ok(())
    }
}

impl Default for CalibrationRecord {
    /// The shipped desk calibration.
    fn default() -> Self {
        Calibration::DESK.into()
    }
}

/// Everything that determines the contents of one output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Producing subcommand.
    pub command: Command,
    /// Grid dimensions `M` (empty: derived from the calibration).
    #[serde(rename = "M")]
    pub m: Vec<usize>,
    /// Transform or subspace dimensions `N` (for `overlap`: the top degree).
    #[serde(rename = "N")]
    pub big_n: Vec<usize>,
    /// Per-coordinate degree cutoff `D`.
    #[serde(rename = "D")]
    pub d: usize,
    /// Number of variables `n`.
    pub n: usize,
    /// Evolution times.
    pub t: Vec<f64>,
    /// Accuracy `ε` (for `test`: the inner promise parameter `ε₁`).
    pub eps: f64,
    /// Outer promise parameter `ε₂` of the testers.
    pub eps2: f64,
    /// Learner threshold `τ` (absent: each instance's own).
    pub tau: Option<f64>,
    /// Failure probability `δ`.
    pub delta: f64,
    /// Seeded trials per instance.
    pub trials: usize,
    /// Samples drawn by `sample`.
    pub samples: usize,
    /// Planted instance sampled by `sample`.
    pub instance: String,
    /// Learner weight source.
    pub mode: LearnerMode,
    /// Master seed; each task draws from its own stream of it.
    pub seed: u64,
    /// Output encoding.
    pub format: Format,
    /// Calibration constants in force.
    pub calibration: CalibrationRecord,
}

impl ExperimentConfig {
    /// The documented defaults of `command`.
    pub fn defaults(command: Command) -> Self {
        let mut c = ExperimentConfig {
            command,
            m: Vec::new(),
            big_n: Vec::new(),
            d: 4,
            n: 1,
            t: Vec::new(),
            eps: 0.01,
            eps2: 0.3,
            tau: None,
            delta: 0.1,
            trials: 20,
            samples: 10_000,
            instance: "constant".into(),
            mode: LearnerMode::Both,
            seed: 0,
            format: Format::Csv,
            calibration: CalibrationRecord::default(),
        };
        match command {
            Command::FfError => {
                c.m = vec![128, 256, 512];
                c.big_n = vec![4, 8, 16];
                c.t = vec![0.25, 1.0, 3.0];
            }
            Command::Overlap => {
                c.m = vec![100_000];
                c.big_n = vec![100];
            }
            Command::Qht | Command::Calibrate => c.big_n = vec![8],
            Command::Sample => c.m = vec![1024],
            Command::Ggl => {}
            Command::Test => c.eps = 0.1,
        }
        c
    }

    /// Canonical JSON of the configuration.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("configuration always serializes")
    }

    /// Hex SHA-256 of [`ExperimentConfig::to_json`].
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_json().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Checks value ranges shared by every command.
    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(Error::Config(what));
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return bad(format!("eps must lie in (0, 1), got {}", self.eps));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        if let Some(tau) = self.tau {
            if !(tau > 0.0 && tau < 1.0) {
                return bad(format!("tau must lie in (0, 1), got {tau}"));
            }
        }
        if self.command == Command::Test && !(self.eps2 > self.eps && self.eps2 <= 1.0) {
            return bad(format!("need eps < eps2 ≤ 1, got {} and {}", self.eps, self.eps2));
        }
        if self.t.iter().any(|t| !t.is_finite()) {
            return bad("every t must be finite".into());
        }
        if self.n == 0 {
            return bad("n must be ≥ 1".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calibration_round_trips_through_toml() {
        let rec = CalibrationRecord::default();
        let back = CalibrationRecord::from_toml(&rec.to_toml()).unwrap();
        assert_eq!(rec, back);
        assert_eq!(Calibration::from(back), Calibration::DESK);
        assert!(CalibrationRecord::from_toml("version = 2\nc0 = 1.0\nc1 = 4.0\nhard_cap = 64").is_err());
        assert!(CalibrationRecord::from_toml("version = 1\nc0 = -1.0\nc1 = 4.0\nhard_cap = 64").is_err());
        assert!(CalibrationRecord::from_toml("version = 1\nc0 = 1.0\nc1 = 4.0").is_err());
    }

    #[test]
    fn shipped_calibration_file_is_the_desk_record() {
        let text = include_str!("../calibration/desk.toml");
        assert_eq!(
            CalibrationRecord::from_toml(text).unwrap(),
            CalibrationRecord::default()
        );
    }

    #[test]
    fn hash_tracks_every_field() {
        let a = ExperimentConfig::defaults(Command::Ggl);
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
        let back: ExperimentConfig = serde_json::from_str(&a.to_json()).unwrap();
        assert_eq!(back, a);
        assert_eq!(a.hash().len(), 64);
    }
}
