//! `permadde`: simulate delayed population models, certify permanence
//! bounds, verify trajectory asymptotics and sweep parameters.
//!
//! Exit codes: 0 success (or verification pass), 1 invalid input,
//! 2 verification failure or certification refused, 3 integrator failure.

// `!(x > 0)` guards deliberately reject NaN alongside nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod input;

use clap::{Args, Parser, Subcommand};
use permadde::integrate::SolverConfig;

#[derive(Debug)]
pub struct CliError {
    pub msg: String,
    pub code: i32,
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError {
            msg: msg.into(),
            code: 1,
        }
    }

    pub fn integrator(msg: impl Into<String>) -> Self {
        CliError {
            msg: msg.into(),
            code: 3,
        }
    }
}

/// Sampled-validation horizon, overridable via `PERMADDE_CHECK_HORIZON`.
pub fn check_horizon() -> Result<f64, CliError> {
    match std::env::var("PERMADDE_CHECK_HORIZON") {
        Ok(s) => s
            .parse::<f64>()
            .ok()
            .filter(|v| *v > 0.0)
            .ok_or_else(|| CliError::input(format!("bad PERMADDE_CHECK_HORIZON `{s}`"))),
        Err(_) => Ok(permadde::model::DEFAULT_CHECK_HORIZON),
    }
}

#[derive(Args)]
pub struct ModelArgs {
    /// JSON model file, or an inline `preset:name?key=value&...` URI
    #[arg(long)]
    pub model: Option<String>,
    /// Inline preset without the scheme: `name?key=value&...`
    #[arg(long)]
    pub preset: Option<String>,
}

#[derive(Args)]
pub struct SolverArgs {
    /// Integration step size
    #[arg(long = "h", default_value_t = 0.01)]
    pub step: f64,
    /// Integration horizon
    #[arg(long = "T", default_value_t = 200.0)]
    pub horizon: f64,
    /// Record every n-th node
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
}

impl SolverArgs {
    pub fn config(&self) -> Result<SolverConfig, CliError> {
        if !(self.step > 0.0) || !(self.horizon > 0.0) || self.stride == 0 {
            return Err(CliError::input(
                "solver settings require --h > 0, --T > 0, --stride >= 1",
            ));
        }
        Ok(SolverConfig {
            h: self.step,
            horizon: self.horizon,
            record_stride: self.stride,
            check_horizon: check_horizon()?,
            ..SolverConfig::default()
        })
    }
}

#[derive(Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Initial history: a number, `sin(a,b,w,p)` or `table(t:v,...)`
    #[arg(long, default_value = "1.0")]
    pub history: String,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

#[derive(Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Output JSON path (stdout when omitted)
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

#[derive(Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Ensemble size
    #[arg(long = "N", default_value_t = 10)]
    pub ensemble: usize,
    /// Master seed for the admissible-history ensemble
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fraction of the horizon treated as the tail
    #[arg(long = "tail-fraction", default_value_t = 0.25)]
    pub tail_fraction: f64,
    /// Verification tolerance (default: 1e-2 of the certified width,
    /// floor 1e-6; 1e-4 for extinction checks)
    #[arg(long)]
    pub tol: Option<f64>,
    /// Co-simulate the envelope pair and check the node-wise sandwich
    #[arg(long, default_value_t = false)]
    pub envelopes: bool,
    /// Verify against a previously written bounds report instead of
    /// recomputing it
    #[arg(long)]
    pub bounds: Option<std::path::PathBuf>,
    /// Output JSON path (stdout when omitted)
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

#[derive(Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Parameter path, e.g. `mortality.mu` or `recruitment.0.alpha`
    #[arg(long)]
    pub param: String,
    /// Sweep range `lo:hi:count` (count >= 2)
    #[arg(long)]
    pub range: String,
    /// Master seed for the per-row reference history
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fraction of the horizon treated as the tail
    #[arg(long = "tail-fraction", default_value_t = 0.25)]
    pub tail_fraction: f64,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

#[derive(Parser)]
#[command(
    name = "permadde",
    about = "Simulation and permanence certification for scalar delayed population models",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a model and write the trajectory as CSV
    Simulate(SimulateArgs),
    /// Check hypotheses and write the bounds report as JSON
    Bounds(BoundsArgs),
    /// Run a seeded ensemble and verify tails against the certified bounds
    Verify(VerifyArgs),
    /// Sweep one scalar parameter and tabulate bounds per value
    Sweep(SweepArgs),
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(args) => commands::cmd_simulate(args),
        Command::Bounds(args) => commands::cmd_bounds(args),
        Command::Verify(args) => commands::cmd_verify(args),
        Command::Sweep(args) => commands::cmd_sweep(args),
    };
    match result {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {}", e.msg);
            std::process::exit(e.code);
        }
    }
}
