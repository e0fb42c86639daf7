use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ftag::verify::{self, VerifyContext};
use ftag::{AdversaryArgs, CliError, SimulateArgs};
use ftag_core::random::RandomConfig;
use ftag_core::strategy::StrategyOptions;
use ftag_core::SolverConfig;

/// Online time-dependent freeze-tag experiments.
#[derive(Parser)]
#[command(name = "ftag", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct StrategyFlags {
    /// `patience` or `greedy`.
    #[arg(long)]
    strategy: String,
    /// Patience waits until this factor times OPT before replaying.
    #[arg(long, default_value_t = std::f64::consts::SQRT_2)]
    wait_factor: f64,
    /// `exact` or `greedy-upper-bound` (the latter voids the guarantee).
    #[arg(long, default_value = "exact")]
    opt_backend: String,
    /// JSON options object; overrides the flags above.
    #[arg(long)]
    options: Option<String>,
}

impl StrategyFlags {
    fn options(&self) -> Result<StrategyOptions, CliError> {
        if let Some(json) = &self.options {
            return serde_json::from_str(json).map_err(|e| CliError::Usage(format!("--options: {e}")));
        }
        Ok(StrategyOptions {
            wait_factor: self.wait_factor,
            opt_backend: self.opt_backend.clone(),
            solver_cap: SolverConfig::from_env().frozen_cap,
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute the offline optimum of an instance.
    Solve {
        file: PathBuf,
        /// Write the solution JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an online strategy on an instance.
    Simulate {
        #[command(flatten)]
        strategy: StrategyFlags,
        /// Optimum to divide by; computed exactly when omitted.
        #[arg(long)]
        opt: Option<f64>,
        /// Write the event trace CSV here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write sampled positions CSV here.
        #[arg(long)]
        positions: Option<PathBuf>,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        #[arg(long)]
        max_time: Option<f64>,
        file: PathBuf,
    },
    /// Play the lower-bound adversary on M_k against a strategy.
    Adversary {
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        strategy: StrategyFlags,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// Write the report JSON here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write the realized instance here.
        #[arg(long)]
        instance: Option<PathBuf>,
    },
    /// Run the acceptance criteria.
    Verify {
        /// Only criteria whose number or name matches.
        #[arg(long)]
        filter: Option<String>,
    },
    /// Generate a seeded random instance.
    Random {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        max_vertices: usize,
        #[arg(long, default_value_t = 2)]
        max_active: usize,
        #[arg(long, default_value_t = 0)]
        min_frozen: usize,
        #[arg(long, default_value_t = 5)]
        max_frozen: usize,
        #[arg(long, default_value_t = 3.0)]
        max_release: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Solve { file, out } => ftag::cmd_solve(&file, out.as_deref()),
        Command::Simulate {
            strategy,
            opt,
            trace,
            positions,
            dt,
            max_time,
            file,
        } => ftag::cmd_simulate(
            &file,
            &SimulateArgs {
                strategy: strategy.strategy.clone(),
                options: strategy.options()?,
                opt,
                trace,
                positions,
                dt,
                max_time,
            },
        ),
        Command::Adversary {
            k,
            strategy,
            dt,
            report,
            instance,
        } => ftag::cmd_adversary(&AdversaryArgs {
            k,
            strategy: strategy.strategy.clone(),
            options: strategy.options()?,
            dt,
            report,
            instance,
        }),
        Command::Verify { filter } => {
            let rows = verify::run(filter.as_deref(), &VerifyContext::default());
            print!("{}", verify::table(&rows));
            let failed = rows.iter().filter(|r| !r.passed).count();
            if failed > 0 {
                return Err(CliError::VerifyFailed { failed });
            }
            Ok(String::new())
        }
        Command::Random {
            seed,
            max_vertices,
            max_active,
            min_frozen,
            max_frozen,
            max_release,
            out,
        } => ftag::cmd_random(
            seed,
            &RandomConfig {
                max_vertices,
                max_active,
                min_frozen,
                max_frozen,
                max_release,
            },
            out.as_deref(),
        ),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
