//! `cim-steady`: phase diagrams, field curves, SDE ensembles and
//! detailed-balance diagnostics for coherent Ising machine networks.

mod config;
mod error;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{
    CrossvalOpts, DbCheckOpts, FieldCurveOpts, IntegrationOpts, ProblemOpts, SaddleOpts,
    SimulateOpts, SweepOpts,
};

#[derive(Debug, Parser)]
#[command(name = "cim-steady", version, about)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonOpts {
    /// TOML file whose keys mirror the flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output CSV path (default: standard output).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads, a positive integer or "auto" [env: CIM_STEADY_THREADS].
    #[arg(long, global = true)]
    pub threads: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the mean-field saddle-point equations at one point.
    Saddle(SaddleOpts),
    /// Sweep a one- or two-dimensional parameter grid.
    Sweep {
        #[command(flatten)]
        sweep: SweepOpts,
        #[command(flatten)]
        integration: IntegrationOpts,
    },
    /// Spin readout versus random-field strength.
    FieldCurve {
        #[command(flatten)]
        curve: FieldCurveOpts,
        #[command(flatten)]
        integration: IntegrationOpts,
    },
    /// Integrate an SDE ensemble and report its observables.
    Simulate {
        #[command(flatten)]
        sim: SimulateOpts,
        #[command(flatten)]
        problem: ProblemOpts,
        #[command(flatten)]
        integration: IntegrationOpts,
    },
    /// Compare an SDE ensemble with the saddle-point prediction.
    Crossval {
        #[command(flatten)]
        cv: CrossvalOpts,
        #[command(flatten)]
        integration: IntegrationOpts,
    },
    /// Detailed-balance violation along SDE trajectories.
    DbCheck {
        #[command(flatten)]
        db: DbCheckOpts,
        #[command(flatten)]
        problem: ProblemOpts,
        #[command(flatten)]
        integration: IntegrationOpts,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
