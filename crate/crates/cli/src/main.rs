//! `shopxai`: simulate, train, explain, analyse and check hypotheses about a
//! scheduling agent. Exit codes: 0 success (or valid verdict), 10 partly
//! valid, 20 not valid, 1 error, 2 bad usage.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use shopxai::xattr::Method;

#[derive(Parser)]
#[command(name = "shopxai", version, about = "Explainable RL workflow for a two-stage flow shop")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one episode with a trained policy or a heuristic and record the trace.
    Simulate(SimulateArgs),
    /// Train a policy with domain randomisation over scenario weeks.
    Train(TrainArgs),
    /// Attribute the taken action of every trace row to the 33 features.
    Explain(ExplainArgs),
    /// Exploratory statistics and plots for a trace.
    Eda(EdaArgs),
    /// Test hypotheses against attributions; exit code carries the verdict.
    Check(CheckArgs),
    /// train, rollout, eda, explain and check in one go.
    Pipeline(PipelineArgs),
}

#[derive(Args)]
#[command(group(ArgGroup::new("policy").required(true).args(["weights", "heuristic"])))]
pub struct SimulateArgs {
    /// Scenario TOML file, or the id of a shipped week (w01..w06, week42).
    #[arg(long)]
    pub scenario: String,
    /// Policy weights JSON.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// random, most-critical or constant:<1..8>.
    #[arg(long)]
    pub heuristic: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct TrainArgs {
    /// Training configuration TOML; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Training weeks (files or shipped ids); defaults to the six shipped training weeks.
    #[arg(long)]
    pub scenario: Vec<String>,
    /// Overrides `rng_seed` from the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides `episodes` from the config.
    #[arg(long)]
    pub episodes: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: shopxai::Error| e.to_string())
}

#[derive(Args)]
pub struct ExplainArgs {
    #[arg(long)]
    pub weights: PathBuf,
    #[arg(long)]
    pub trace: PathBuf,
    /// ixg, deepshap or exact.
    #[arg(long, value_parser = parse_method, default_value = "deepshap")]
    pub method: Method,
    /// Trace CSV whose rows form the background set; defaults to --trace.
    #[arg(long)]
    pub background: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct EdaArgs {
    #[arg(long)]
    pub trace: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct CheckArgs {
    /// Hypotheses TOML; defaults to the built-in templates.
    #[arg(long)]
    pub hypotheses: Option<PathBuf>,
    /// Attribution CSVs, one per method.
    #[arg(long = "attributions", required = true, num_args = 1..)]
    pub attributions: Vec<PathBuf>,
    #[arg(long)]
    pub trace: PathBuf,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub agree_threshold: Option<f64>,
    #[arg(long)]
    pub n_min: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct PipelineArgs {
    /// Pipeline configuration TOML; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the training seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the number of training episodes.
    #[arg(long)]
    pub episodes: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub agree_threshold: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

/// The error chain on one line, skipping causes already quoted by their parent.
fn one_line(e: &anyhow::Error) -> String {
    let mut parts: Vec<String> = Vec::new();
    for cause in e.chain() {
        let text = cause.to_string().replace('\n', " ");
        if parts.last().is_some_and(|p| p.contains(&text)) {
            continue;
        }
        parts.push(text);
    }
    parts.join(": ")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(&a).map(|()| 0),
        Command::Train(a) => commands::train(&a).map(|()| 0),
        Command::Explain(a) => commands::explain(&a).map(|()| 0),
        Command::Eda(a) => commands::eda(&a).map(|()| 0),
        Command::Check(a) => commands::check(&a),
        Command::Pipeline(a) => commands::pipeline(&a).map(|()| 0),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", one_line(&e));
            ExitCode::from(1)
        }
    }
}
