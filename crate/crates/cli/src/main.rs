//! `egw`: mutual information regions and derived quantities from the command line.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use egw_core::opt::OptimizerConfig;
use egw_core::Error;

#[derive(Parser, Debug)]
#[command(name = "egw", version, about = "Mutual information region toolkit")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Seed for every random restart.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Random restarts per solve.
    #[arg(long, global = true, default_value_t = 64)]
    pub restarts: usize,
    /// Auxiliary alphabet size; defaults to |X||Y| + 2.
    #[arg(long = "usize", global = true)]
    pub u_size: Option<usize>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write the tabular extract as CSV instead of JSON.
    #[arg(long, global = true)]
    pub csv: bool,
    /// Write to a file instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Print per-stage wall-clock times to stderr.
    #[arg(long, global = true)]
    pub timings: bool,
}

impl Global {
    pub fn optimizer(&self) -> OptimizerConfig {
        OptimizerConfig { seed: self.seed, restarts: self.restarts, u_size: self.u_size, ..OptimizerConfig::default() }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the named quantities and the interaction information chain.
    Quantities {
        input: PathBuf,
        /// Comma-separated subset of quantity names.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<String>>,
    },
    /// Sample the region, evaluate a support function or decide membership.
    Region {
        input: PathBuf,
        #[arg(long, group = "mode")]
        samples: bool,
        /// Direction b as `b1,b2,b3`.
        #[arg(long, group = "mode", value_delimiter = ',', allow_hyphen_values = true)]
        support: Option<Vec<f64>>,
        /// Point v as `vx,vy,vxy`.
        #[arg(long, group = "mode", value_delimiter = ',', allow_hyphen_values = true)]
        member: Option<Vec<f64>>,
    },
    /// Decide membership of a rate tuple (R0,...,R4).
    Rates {
        input: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        tuple: Vec<f64>,
        /// Use the region with noncausal side information.
        #[arg(long)]
        noncausal: bool,
    },
    /// Sweep a curve over a grid of t.
    Curve {
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: CurveArg,
        /// `start:step:stop` or a comma-separated list.
        #[arg(long = "t-grid")]
        t_grid: String,
    },
    /// Construct a witness channel and verify it.
    Witness {
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: WitnessArg,
        /// Perturbation size for path and cycle witnesses.
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Structural facts about the support graph.
    Graph { input: PathBuf },
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum CurveArg {
    Ib,
    Pf,
    Synth,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum WitnessArg {
    Path,
    Cycle,
    Bvn,
    Frl,
    Gk,
}

/// Failure of a command, with its exit code.
#[derive(Debug)]
pub enum CliError {
    Io(String),
    Parse(String),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Json(j) => CliError::Parse(j.to_string()),
            e => CliError::Core(e),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) | CliError::Parse(_) => 2,
            CliError::Core(
                Error::Infeasible { .. }
                | Error::InfeasibleT { .. }
                | Error::ConditionNotMet(_)
                | Error::DegenerateRatio,
            ) => 4,
            CliError::Core(_) => 3,
        }
    }

    fn to_json(&self) -> Value {
        let (kind, message) = match self {
            CliError::Io(m) => ("Io".to_string(), m.clone()),
            CliError::Parse(m) => ("Parse".to_string(), m.clone()),
            CliError::Core(e) => (error_kind(e).to_string(), e.to_string()),
        };
        json!({ "error": { "kind": kind, "message": message, "exit_code": self.code() } })
    }
}

pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::EmptyMatrix => "EmptyMatrix",
        Error::NotRectangular { .. } => "NotRectangular",
        Error::NonFinite { .. } => "NonFinite",
        Error::NegativeEntry { .. } => "NegativeEntry",
        Error::MassDeviationTooLarge { .. } => "MassDeviationTooLarge",
        Error::LabelCount { .. } => "LabelCount",
        Error::DimensionMismatch(_) => "DimensionMismatch",
        Error::InvalidChannel(_) => "InvalidChannel",
        Error::InvalidArgument(_) => "InvalidArgument",
        Error::AlphabetTooLarge { .. } => "AlphabetTooLarge",
        Error::GraphTooLarge { .. } => "GraphTooLarge",
        Error::EnumerationTooLarge { .. } => "EnumerationTooLarge",
        Error::OracleTooLarge(_) => "OracleTooLarge",
        Error::Infeasible { .. } => "Infeasible",
        Error::InfeasibleT { .. } => "InfeasibleT",
        Error::OuterBoundViolated { .. } => "OuterBoundViolated",
        Error::EpsilonTooLarge { .. } => "EpsilonTooLarge",
        Error::InvalidPath(_) => "InvalidPath",
        Error::InvalidCycle(_) => "InvalidCycle",
        Error::ConditionNotMet(_) => "ConditionNotMet",
        Error::NotIndependent { .. } => "NotIndependent",
        Error::DegenerateRatio => "DegenerateRatio",
        Error::Lp(_) => "Lp",
        Error::Json(_) => "Json",
    }
}

/// Per-stage wall-clock times, reported on stderr only so that primary
/// output stays reproducible.
pub struct Timer {
    enabled: bool,
    last: Instant,
    stages: Vec<(String, f64)>,
}

impl Timer {
    fn new(enabled: bool) -> Self {
        Self { enabled, last: Instant::now(), stages: Vec::new() }
    }

    pub fn stage(&mut self, name: &str) {
        let now = Instant::now();
        self.stages.push((name.to_string(), (now - self.last).as_secs_f64()));
        self.last = now;
    }

    fn report(&self) {
        if self.enabled {
            let stages: Vec<Value> = self.stages.iter().map(|(n, s)| json!({ "stage": n, "seconds": s })).collect();
            eprintln!("{}", json!({ "timings": stages }));
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.global.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Core(Error::InvalidArgument(format!("thread pool: {e}"))))?;
    }
    let mut timer = Timer::new(cli.global.timings);
    let g = &cli.global;
    let out = match &cli.command {
        Command::Quantities { input, only } => commands::quantities(g, input, only.as_deref(), &mut timer)?,
        Command::Region { input, samples, support, member } => {
            commands::region(g, input, *samples, support.as_deref(), member.as_deref(), &mut timer)?
        }
        Command::Rates { input, tuple, noncausal } => commands::rates(g, input, tuple, *noncausal, &mut timer)?,
        Command::Curve { input, kind, t_grid } => commands::curve(g, input, *kind, t_grid, &mut timer)?,
        Command::Witness { input, kind, epsilon } => commands::witness(g, input, *kind, *epsilon, &mut timer)?,
        Command::Graph { input } => commands::graph(g, input, &mut timer)?,
    };
    match &g.output {
        Some(path) => std::fs::write(path, &out).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        None => print!("{out}"),
    }
    timer.stage("write");
    timer.report();
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let err = CliError::Parse(e.to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.code());
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.code())
        }
    }
}
