//! Command-line driver: `fig1`, `train-compare` and `construct`.
//!
//! Exit codes: 0 when the run's check holds, 1 when it does not, 2 on errors.

mod checkpoint;
mod commands;
mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use checkpoint::{load, read, save, write, write_atomic, write_dense, write_graph, Checkpoint, MAGIC};
pub use commands::{
    cmd_construct, cmd_fig1, cmd_train_compare, fig1_csv, history_path, relu_net_gap, CompareOutcome, ConstructOutcome,
    ConstructRequest, Fig1Outcome, TrainRun,
};
pub use config::{ExperimentConfig, SEED_ENV};

use crate::classic::Family;
use crate::error::Result;
use crate::nn::ActivationKind;

#[derive(Debug, Parser)]
#[command(name = "ratnet", version, about = "Rational approximation and rational neural network experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sup error to ReLU against parameter count for the three families.
    Fig1 {
        #[arg(long, default_value = "fig1.csv")]
        out: PathBuf,
        /// Comma-separated subset of zolotarev, newman, best_poly.
        #[arg(long, value_delimiter = ',')]
        families: Vec<Family>,
        /// Parameter budgets applied to every family (defaults per family).
        #[arg(long, value_delimiter = ',')]
        budgets: Vec<usize>,
    },
    /// Train relu, sinusoid, rational and polynomial nets on one target.
    TrainCompare {
        /// key=value file; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "train_compare.csv")]
        out: PathBuf,
    },
    /// Build a constructive rational network and certify it.
    Construct {
        #[command(subcommand)]
        kind: ConstructCommand,
        /// Checkpoint destination.
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum ConstructCommand {
    /// Exact x^n.
    Monomial {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 3)]
        rp: u32,
    },
    /// Random piecewise-linear function on [0, 1].
    Piecewise {
        #[arg(long, default_value_t = 5)]
        m: usize,
        #[arg(long, default_value_t = 3.0)]
        lipschitz: f64,
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Local Taylor network for exp(x - 1) on [0, 1].
    Taylor {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 1e-2)]
        eps: f64,
    },
    /// Convert a random norm-constrained ReLU network.
    Ratify {
        #[arg(long, default_value_t = 1)]
        input_dim: usize,
        #[arg(long, value_delimiter = ',', default_value = "3,3")]
        widths: Vec<usize>,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Composed Zolotarev ReLU approximant.
    ReluApprox {
        #[arg(long)]
        eps: f64,
    },
}

impl From<&ConstructCommand> for ConstructRequest {
    fn from(command: &ConstructCommand) -> Self {
        match command {
            ConstructCommand::Monomial { n, rp } => ConstructRequest::Monomial { n: *n, radix: *rp },
            ConstructCommand::Piecewise { m, lipschitz, eps, seed } => {
                ConstructRequest::Piecewise { breakpoints: *m, lipschitz: *lipschitz, epsilon: *eps, seed: *seed }
            }
            ConstructCommand::Taylor { n, eps } => ConstructRequest::Taylor { order: *n, epsilon: *eps },
            ConstructCommand::Ratify { input_dim, widths, eps, seed } => {
                ConstructRequest::Ratify { input_dim: *input_dim, widths: widths.clone(), epsilon: *eps, seed: *seed }
            }
            ConstructCommand::ReluApprox { eps } => ConstructRequest::ReluApprox { epsilon: *eps },
        }
    }
}

fn exit_code(ok: bool) -> i32 {
    if ok {
        0
    } else {
        1
    }
}

/// Runs a parsed command, printing results to stdout.
pub fn execute(command: &Command) -> Result<i32> {
    match command {
        Command::Fig1 { out, families, budgets } => {
            let outcome = cmd_fig1(out, families, budgets)?;
            print!("{}", fig1_csv(&outcome.rows));
            match &outcome.ordering {
                Ok(()) => println!("ordering: pass"),
                Err(why) => println!("ordering: fail ({why})"),
            }
            Ok(exit_code(outcome.ordering.is_ok()))
        }
        Command::TrainCompare { config, out } => {
            let base = match config {
                Some(path) => ExperimentConfig::load(path)?,
                None => ExperimentConfig::default(),
            };
            let env = std::env::var(SEED_ENV).ok();
            let config = base.with_seed_override(env.as_deref())?;
            let outcome = cmd_train_compare(&config, &ActivationKind::ALL, out)?;
            for run in &outcome.runs {
                let last = run.history.records.last().expect("history holds epoch 0");
                println!(
                    "{}: params={} final_val_mse={:.6e} -> {}",
                    run.kind,
                    run.param_count,
                    last.val_mse,
                    run.csv_path.display()
                );
            }
            let ok = outcome.rational_beats_relu();
            println!("rational < relu: {}", if ok { "pass" } else { "fail" });
            Ok(exit_code(ok))
        }
        Command::Construct { kind, out } => {
            let outcome = cmd_construct(&ConstructRequest::from(kind), out.as_deref())?;
            println!("{}", outcome.report.join(" "));
            println!("certified: {}", if outcome.passed { "pass" } else { "fail" });
            Ok(exit_code(outcome.passed))
        }
    }
}

/// Entry point for the binary; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_subcommands() {
        let cli = Cli::try_parse_from(["ratnet", "construct", "relu-approx", "--eps", "0.1"]).unwrap();
        assert!(
            matches!(cli.command, Command::Construct { kind: ConstructCommand::ReluApprox { eps }, out: None } if eps == 0.1)
        );
        let cli =
            Cli::try_parse_from(["ratnet", "fig1", "--families", "zolotarev,newman", "--budgets", "14,28"]).unwrap();
        match cli.command {
            Command::Fig1 { families, budgets, .. } => {
                assert_eq!(families, vec![Family::Zolotarev, Family::Newman]);
                assert_eq!(budgets, vec![14, 28]);
            }
            other => panic!("{other:?}"),
        }
        assert!(Cli::try_parse_from(["ratnet", "fig1", "--families", "pade"]).is_err());
    }

    #[test]
    fn bad_arguments_exit_two() {
        assert_eq!(run(["ratnet", "construct", "relu-approx", "--eps", "2"]), 2);
        assert_eq!(run(["ratnet", "launch"]), 2);
    }
}
