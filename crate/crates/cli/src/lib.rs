//! Commands behind the `ftag` binary. Each command returns the text it
//! prints so that tests can check it without spawning a process.

pub mod verify;

use std::fs;
use std::path::{Path, PathBuf};

use ftag_core::adversary::AdversaryError;
use ftag_core::random::{random_instance, RandomConfig};
use ftag_core::strategy::{strategy_by_name, StrategyConfigError, StrategyOptions};
use ftag_core::{
    opt_exact, run_adversary, simulate, AdversaryOptions, Instance, InstanceError, SimError,
    SimOptions, SolverConfig, SolverError,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Instance(#[from] InstanceError),
    #[error("{0}")]
    Solver(#[from] SolverError),
    #[error("{0}")]
    Sim(#[from] SimError),
    #[error("{0}")]
    Config(#[from] StrategyConfigError),
    #[error("{0}")]
    Adversary(#[from] AdversaryError),
    #[error("{0}")]
    Usage(String),
    #[error("{failed} acceptance criteria failed")]
    VerifyFailed { failed: usize },
}

impl CliError {
    /// 2: unreadable or invalid input, 3: solver cap, 4: horizon reached,
    /// 1: anything else, including failed verification.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Read { .. } | CliError::Instance(_) | CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Solver(e) => solver_code(e),
            CliError::Sim(e) => sim_code(e),
            CliError::Adversary(AdversaryError::Sim(e)) => sim_code(e),
            CliError::Adversary(AdversaryError::KOutOfRange { .. }) => 2,
            _ => 1,
        }
    }
}

fn solver_code(e: &SolverError) -> i32 {
    match e {
        SolverError::TooLarge { .. } => 3,
        SolverError::InvalidInstance(_) => 2,
        SolverError::InconsistentSolution(_) => 1,
    }
}

fn sim_code(e: &SimError) -> i32 {
    match e {
        SimError::HorizonExceeded { .. } => 4,
        SimError::Strategy(ftag_core::StrategyError::OptBackend(s)) => solver_code(s),
        SimError::Instance(_) => 2,
        _ => 1,
    }
}

pub fn load_instance(path: &Path) -> Result<Instance, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(Instance::from_json(&text)?)
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

pub fn fmt9(x: f64) -> String {
    format!("{x:.9}")
}

pub fn cmd_solve(path: &Path, out: Option<&Path>) -> Result<String, CliError> {
    let inst = load_instance(path)?;
    let sol = opt_exact(&inst, &SolverConfig::from_env())?;
    if let Some(out) = out {
        write(out, &sol.to_json())?;
    }
    Ok(format!("makespan {}\n", fmt9(sol.makespan)))
}

#[derive(Debug, Clone, Default)]
pub struct SimulateArgs {
    pub strategy: String,
    pub options: StrategyOptions,
    pub opt: Option<f64>,
    pub trace: Option<PathBuf>,
    pub positions: Option<PathBuf>,
    pub dt: f64,
    pub max_time: Option<f64>,
}

pub fn cmd_simulate(path: &Path, args: &SimulateArgs) -> Result<String, CliError> {
    let inst = load_instance(path)?;
    let mut strategy = strategy_by_name(&args.strategy, &args.options)?;
    let mut sim_opts = SimOptions::default();
    if let Some(t) = args.max_time {
        sim_opts.max_time = t;
    }
    let trace = simulate(&inst, strategy.as_mut(), sim_opts)?;
    if let Some(p) = &args.trace {
        write(p, &trace.events_csv())?;
    }
    if let Some(p) = &args.positions {
        write(p, &trace.positions_csv(args.dt))?;
    }
    let mut out = format!(
        "strategy {}\nmakespan {}\n",
        strategy.name(),
        fmt9(trace.makespan())
    );
    let opt = match args.opt {
        Some(x) => Some(x),
        None if inst.frozen_count() > 0 => {
            let cfg = SolverConfig::from_env();
            (inst.frozen_count() <= cfg.frozen_cap)
                .then(|| opt_exact(&inst, &cfg))
                .transpose()?
                .map(|s| s.makespan)
        }
        None => None,
    };
    match opt {
        Some(o) if o > 0.0 => {
            out += &format!("opt {}\nratio {}\n", fmt9(o), fmt9(trace.makespan() / o));
        }
        Some(o) => out += &format!("opt {}\n", fmt9(o)),
        None => {}
    }
    if !trace.late_waits().is_empty() {
        out += &format!("late waits {}\n", trace.late_waits().len());
    }
    Ok(out)
}

#[derive(Debug, Clone, Default)]
pub struct AdversaryArgs {
    pub k: usize,
    pub strategy: String,
    pub options: StrategyOptions,
    pub dt: f64,
    pub report: Option<PathBuf>,
    pub instance: Option<PathBuf>,
}

pub fn cmd_adversary(args: &AdversaryArgs) -> Result<String, CliError> {
    let mut strategy = strategy_by_name(&args.strategy, &args.options)?;
    let opts = AdversaryOptions {
        dt: args.dt,
        ..AdversaryOptions::default()
    };
    let rep = run_adversary(args.k, strategy.as_mut(), &opts)?;
    if let Some(p) = &args.report {
        write(p, &rep.to_json())?;
    }
    if let Some(p) = &args.instance {
        write(p, &rep.instance.to_json())?;
    }
    let t_star = rep.case.t_star().map_or("-".to_string(), fmt9);
    Ok(format!(
        "k {}\nstrategy {}\ncase {}\nt_star {}\ncertified_opt {}\nmakespan {}\nratio {}\nr_bound {}\n",
        rep.k,
        rep.strategy,
        rep.case.tag(),
        t_star,
        fmt9(rep.certified_opt),
        fmt9(rep.makespan),
        fmt9(rep.achieved_ratio),
        fmt9(rep.r_bound),
    ))
}

pub fn cmd_random(seed: u64, cfg: &RandomConfig, out: Option<&Path>) -> Result<String, CliError> {
    if cfg.max_vertices < 2 || cfg.min_frozen > cfg.max_frozen || !(cfg.max_release >= 0.0) {
        return Err(CliError::Usage("inconsistent random instance bounds".into()));
    }
    let json = random_instance(seed, cfg).to_json() + "\n";
    match out {
        Some(p) => {
            write(p, &json)?;
            Ok(String::new())
        }
        None => Ok(json),
    }
}
