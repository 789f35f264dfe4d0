//! Command-line front end for fairness-aware influence maximization:
//! dataset ingestion, planted-partition synthesis, method execution over
//! budget sweeps, exact small-graph checks, and CSV/JSON emission.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fairspread_core::{Error, Result, SynthSpec};

use config::ExperimentConfig;

#[derive(Parser)]
#[command(name = "fairspread", version, about = "Fairness-aware influence maximization")]
struct Cli {
    /// Worker threads; FAIRSPREAD_THREADS is the fallback, default all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run selection methods over budgets; writes {output}.csv and {output}.json.
    Run(RunArgs),
    /// Generate a planted-partition graph; writes {out}.edges and {out}.groups.
    Synth(SynthArgs),
    /// Exact spread and minimum group utility of a seed set (small graphs only).
    Oracle(OracleArgs),
    /// Group connectivity: the fraction of edges joining different groups.
    Rho(RhoArgs),
    /// Monte Carlo evaluation of an explicit seed set; prints a JSON report.
    Eval(EvalArgs),
}

/// Flags mirror the flat JSON config keys; a flag wins over the file value.
#[derive(Args)]
struct RunArgs {
    /// Flat JSON configuration document.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Edge list: `source target [probability]` per line, `#` comments.
    #[arg(long)]
    edge_file: Option<PathBuf>,
    /// Group list: `node group` per line; omitted means one group.
    #[arg(long)]
    group_file: Option<PathBuf>,
    /// Whether the edge list is directed.
    #[arg(long)]
    directed: Option<bool>,
    /// Planted-partition block sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    synth_group_sizes: Option<Vec<usize>>,
    #[arg(long)]
    synth_p_in: Option<f64>,
    #[arg(long)]
    synth_p_out: Option<f64>,
    #[arg(long)]
    synth_seed: Option<u64>,
    /// Subset of: imm, myopic, greedy, agm-us, agm-gs (default: all).
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    /// Seed budgets to sweep, comma separated.
    #[arg(long, value_delimiter = ',')]
    budgets: Option<Vec<usize>>,
    /// Sampling accuracy target of the selection phase.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Confidence exponent of the selection phase.
    #[arg(long)]
    ell: Option<f64>,
    /// Simulations per evaluation.
    #[arg(long)]
    r_eval: Option<usize>,
    /// Simulations per myopic round.
    #[arg(long)]
    r_myopic: Option<usize>,
    /// Fixed reverse-sample count, skipping the sample-size estimation.
    #[arg(long)]
    theta_override: Option<usize>,
    /// Root seed for every random stage. Required; there is no clock default.
    #[arg(long)]
    master_seed: Option<u64>,
    /// Output stem for the .csv and .json reports.
    #[arg(long)]
    output: Option<PathBuf>,
}

impl RunArgs {
    fn overrides(self) -> ExperimentConfig {
        ExperimentConfig {
            edge_file: self.edge_file,
            group_file: self.group_file,
            directed: self.directed,
            synth_group_sizes: self.synth_group_sizes,
            synth_p_in: self.synth_p_in,
            synth_p_out: self.synth_p_out,
            synth_seed: self.synth_seed,
            methods: self.methods,
            budgets: self.budgets,
            epsilon: self.epsilon,
            ell: self.ell,
            r_eval: self.r_eval,
            r_myopic: self.r_myopic,
            theta_override: self.theta_override,
            master_seed: self.master_seed,
            output: self.output,
        }
    }
}

#[derive(Args)]
struct SynthArgs {
    /// Block sizes, comma separated (e.g. 90,10).
    #[arg(long, value_delimiter = ',')]
    group_sizes: Vec<usize>,
    /// Probability of each within-group directed edge.
    #[arg(long)]
    p_in: f64,
    /// Probability of each cross-group directed edge.
    #[arg(long)]
    p_out: f64,
    #[arg(long)]
    seed: u64,
    /// Output stem for the .edges and .groups files.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    edge_file: PathBuf,
    #[arg(long)]
    group_file: Option<PathBuf>,
    #[arg(long, default_value_t = true)]
    directed: bool,
    /// Seed node ids, comma separated.
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<String>,
}

#[derive(Args)]
struct RhoArgs {
    #[arg(long)]
    edge_file: PathBuf,
    #[arg(long)]
    group_file: PathBuf,
    #[arg(long, default_value_t = true)]
    directed: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    edge_file: PathBuf,
    #[arg(long)]
    group_file: Option<PathBuf>,
    #[arg(long, default_value_t = true)]
    directed: bool,
    /// Seed node ids, comma separated.
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<String>,
    /// Simulation count.
    #[arg(long, default_value_t = 10_000)]
    r: usize,
    #[arg(long)]
    master_seed: u64,
}

fn init_threads(flag: Option<usize>) -> Result<()> {
    let requested = match flag {
        Some(n) => Some(n),
        None => match std::env::var("FAIRSPREAD_THREADS") {
            Ok(text) => Some(text.parse().map_err(|_| {
                Error::InvalidParam(format!("FAIRSPREAD_THREADS must be an integer, got '{text}'"))
            })?),
            Err(_) => None,
        },
    };
    if let Some(n) = requested {
        if n == 0 {
            return Err(Error::InvalidParam("thread count must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidParam(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run(args) => {
            let base = match &args.config {
                Some(path) => ExperimentConfig::load(path)?,
                None => ExperimentConfig::default(),
            };
            let resolved = base.overlay(args.overrides()).resolve()?;
            commands::run(&resolved)
        }
        Command::Synth(args) => {
            let spec = SynthSpec {
                group_sizes: args.group_sizes,
                p_in: args.p_in,
                p_out: args.p_out,
                seed: args.seed,
            };
            commands::synth(&spec, &args.out)
        }
        Command::Oracle(args) => commands::oracle(
            &args.edge_file,
            args.group_file.as_deref(),
            args.directed,
            &args.seeds,
        ),
        Command::Rho(args) => commands::rho(&args.edge_file, &args.group_file, args.directed),
        Command::Eval(args) => commands::eval(
            &args.edge_file,
            args.group_file.as_deref(),
            args.directed,
            &args.seeds,
            args.r,
            args.master_seed,
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = init_threads(cli.threads) {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code());
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
