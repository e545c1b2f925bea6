//! `qht` command line.
//!
//! Exit codes: 0 when every row was computed, 2 when some rows were
//! infeasible (they are reported in the output), 1 on usage or
//! configuration errors.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qht::config::{CalibrationRecord, Command, ExperimentConfig, Format, LearnerMode};

#[derive(Parser, Debug)]
#[command(
    name = "qht",
    version,
    about = "Desk experiments for the discrete quantum Hermite transform"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Sub {
    /// Fast-forwarding error atlas over (M, N, t).
    FfError,
    /// Plancherel–Rotach overlap curve for n ∈ [0, N].
    Overlap,
    /// End-to-end transform fidelity per block.
    Qht,
    /// Hermite sampling histogram and TV report.
    Sample,
    /// Gaussian Goldreich–Levin transcript over the planted corpus.
    Ggl,
    /// Tester verdicts over the promise corpus.
    Test,
    /// Sweep M for the smallest passing c0.
    Calibrate,
}

#[derive(Args, Debug)]
struct Common {
    /// Grid dimensions M (comma-separated).
    #[arg(long = "M", value_delimiter = ',', global = true)]
    m: Option<Vec<usize>>,
    /// Transform dimensions N (comma-separated; overlap: top degree).
    #[arg(long = "N", value_delimiter = ',', global = true)]
    big_n: Option<Vec<usize>>,
    /// Per-coordinate degree cutoff D.
    #[arg(long = "D", global = true)]
    d: Option<usize>,
    /// Number of variables n.
    #[arg(long = "n", global = true)]
    n: Option<usize>,
    /// Evolution times (comma-separated).
    #[arg(long = "t", value_delimiter = ',', allow_negative_numbers = true, global = true)]
    t: Option<Vec<f64>>,
    /// Accuracy ε (test: inner promise parameter ε₁).
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// Outer promise parameter ε₂ (test).
    #[arg(long, global = true)]
    eps2: Option<f64>,
    /// Learner threshold τ (default: each instance's own).
    #[arg(long, global = true)]
    tau: Option<f64>,
    /// Failure probability δ.
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Seeded trials per instance (ggl, test).
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Samples to draw (sample).
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Planted instance (sample).
    #[arg(long, global = true)]
    instance: Option<String>,
    /// Learner weight source (ggl).
    #[arg(long, value_enum, global = true)]
    mode: Option<LearnerMode>,
    /// Output file (default: standard output).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,
    /// Calibration file (TOML).
    #[arg(long, global = true)]
    calibration: Option<PathBuf>,
}

fn build_config(cli: Cli) -> qht::Result<(ExperimentConfig, Option<PathBuf>)> {
    let command = match cli.command {
        Sub::FfError => Command::FfError,
        Sub::Overlap => Command::Overlap,
        Sub::Qht => Command::Qht,
        Sub::Sample => Command::Sample,
        Sub::Ggl => Command::Ggl,
        Sub::Test => Command::Test,
        Sub::Calibrate => Command::Calibrate,
    };
    let a = cli.common;
    let mut c = ExperimentConfig::defaults(command);
    macro_rules! set {
        ($($field:ident <- $value:expr),* $(,)?) => {
            $(if let Some(v) = $value { c.$field = v; })*
        };
    }
    set!(
        m <- a.m,
        big_n <- a.big_n,
        d <- a.d,
        n <- a.n,
        t <- a.t,
        eps <- a.eps,
        eps2 <- a.eps2,
        delta <- a.delta,
        seed <- a.seed,
        trials <- a.trials,
        samples <- a.samples,
        instance <- a.instance,
        mode <- a.mode,
        format <- a.format,
    );
    c.tau = a.tau.or(c.tau);
    if let Some(path) = &a.calibration {
        c.calibration = CalibrationRecord::load(path)?;
    }
    Ok((c, a.out))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = build_config(cli).and_then(|(config, out)| {
        let report = qht::run(&config)?;
        let bytes = report.table.encode()?;
        match out {
            Some(path) => std::fs::write(path, bytes)?,
            None => std::io::stdout().write_all(&bytes)?,
        }
        Ok(report)
    });
    match result {
        Ok(report) => {
            if report.infeasible > 0 {
                eprintln!("qht: {} row(s) infeasible; see the status column", report.infeasible);
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("qht: {e}");
            ExitCode::from(1)
        }
    }
}
