//! `tempocf`: compile formulas, check logs, train a model, explain
//! predictions and run benchmark grids.
//!
//! Exit codes: 0 success, 2 bad input, 3 the query violates the formula,
//! 4 nothing to explain, 1 anything else.

pub mod bench;
pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use tempocf_core::automata::AutomataError;
use tempocf_core::engine::EngineError;
use tempocf_core::log::LogError;
use tempocf_core::ltl::LtlError;
use tempocf_core::metrics::MetricsError;
use tempocf_core::model::ModelError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Hypothesis(String),
    #[error("{0}")]
    NothingToExplain(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Hypothesis(_) => 3,
            CliError::NothingToExplain(_) => 4,
            CliError::Internal(_) => 1,
        }
    }
}

impl From<LtlError> for CliError {
    fn from(e: LtlError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<LogError> for CliError {
    fn from(e: LogError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<AutomataError> for CliError {
    fn from(e: AutomataError) -> Self {
        match e {
            AutomataError::StateBudget(_) => CliError::Internal(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Spawn { .. } | ModelError::Protocol(_) | ModelError::Timeout(_) => {
                CliError::Internal(e.to_string())
            }
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        match e {
            MetricsError::Automata(e) => e.into(),
            MetricsError::Model(e) => e.into(),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::QueryViolatesFormula => CliError::Hypothesis(format!(
                "{e}; constrained crossover and mutation preserve compliance only when started from a compliant query"
            )),
            EngineError::AlreadyDesired => CliError::NothingToExplain(e.to_string()),
            EngineError::Automata(e) => e.into(),
            EngineError::Metrics(e) => e.into(),
            EngineError::Model(e) => e.into(),
            EngineError::Log(e) => e.into(),
            EngineError::InvalidConfig(_)
            | EngineError::LengthMismatch { .. }
            | EngineError::UnknownStrategy(_) => CliError::Input(e.to_string()),
        }
    }
}

impl From<bench::BenchError> for CliError {
    fn from(e: bench::BenchError) -> Self {
        match e {
            bench::BenchError::Engine(e) => e.into(),
            bench::BenchError::Model(e) => e.into(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "tempocf",
    version,
    about = "Counterfactual explanations for process traces under LTL background knowledge"
)]
pub struct Cli {
    /// Log more (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compile a formula to a minimal DFA.
    Compile(CompileArgs),
    /// Check every case of a log against a formula.
    Check(CheckArgs),
    /// Train the linear outcome classifier on fixed-length prefixes.
    Train(TrainArgs),
    /// Search counterfactuals for one trace.
    Explain(ExplainArgs),
    /// Run an experiment grid and write one CSV row per cell.
    Bench(BenchArgs),
    /// Write the synthetic claim-management log.
    GenLog(GenLogArgs),
}

#[derive(Debug, Args)]
pub struct CompileArgs {
    /// Formula file.
    #[arg(long)]
    pub formula: PathBuf,
    /// Take the alphabet from this CSV log.
    #[arg(long, conflicts_with = "alphabet")]
    pub log: Option<PathBuf>,
    /// Comma-separated activity names.
    #[arg(long, value_delimiter = ',')]
    pub alphabet: Option<Vec<String>>,
    /// Write the automaton in Graphviz format.
    #[arg(long)]
    pub dot: Option<PathBuf>,
    /// Keep the unminimized automaton.
    #[arg(long)]
    pub no_minimize: bool,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub log: PathBuf,
    #[arg(long)]
    pub formula: PathBuf,
    /// Check prefixes of this length instead of whole traces.
    #[arg(long)]
    pub prefix: Option<usize>,
    /// Print only the aggregate line.
    #[arg(long, short)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub log: PathBuf,
    #[arg(long)]
    pub prefix: Option<usize>,
    /// Model file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// key = value file with prefix_length and training settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ExplainArgs {
    /// Reference log; activity ids follow the model's alphabet.
    #[arg(long)]
    pub log: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub formula: Option<PathBuf>,
    /// Explain the prefix of this case.
    #[arg(long, conflicts_with = "trace")]
    pub case: Option<String>,
    /// Explain this comma-separated trace.
    #[arg(long)]
    pub trace: Option<String>,
    /// Desired label; defaults to the opposite of the prediction.
    #[arg(long)]
    pub desired: Option<bool>,
    #[arg(long)]
    pub strategy: Option<String>,
    #[arg(long)]
    pub t: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// key = value file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// JSON output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Include wall-clock runtime in the output.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Experiment grid in key = value form.
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the grid's log.
    #[arg(long)]
    pub log: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// CSV output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Fill the runtime column.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct GenLogArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 4800)]
    pub cases: usize,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Compile(a) => commands::compile(&a),
        Command::Check(a) => commands::check(&a),
        Command::Train(a) => commands::train(&a),
        Command::Explain(a) => commands::explain(&a),
        Command::Bench(a) => commands::bench(&a),
        Command::GenLog(a) => commands::gen_log(&a),
    }
}
