mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::RunConfig;
use crate::error::CliError;

/// Fixed-node continuous-time Markov chains and Metropolis-Hastings
/// baselines on the Haldane-Shastry ring.
#[derive(Debug, Parser)]
#[command(name = "fixnode", version)]
pub struct Cli {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Base seed; chain k uses seed + k.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for independent chains.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Directory for output files.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact spectral gaps of H and F on half filling.
    Gap(GapArgs),
    /// Run CTMC or Metropolis-Hastings chains and report estimates of M_d.
    Sample(SampleArgs),
    /// Exact invariant battery on a small ring.
    Validate(ValidateArgs),
    /// Autocorrelation of both MH chains on perturbed ground states.
    Corrupt(CorruptArgs),
    /// Four-qubit free-fermion residual.
    Wick(WickArgs),
    /// Estimate how often the truncated sampler gives up from a start state.
    VerifyStart(VerifyStartArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChainKind {
    Ctmc,
    MhH,
    MhF,
}

#[derive(Debug, Args)]
pub struct GapArgs {
    #[arg(long, default_value_t = 4)]
    pub min_l: usize,
    #[arg(long, default_value_t = 12)]
    pub max_l: usize,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long, value_enum)]
    pub chain: Option<ChainKind>,
    /// Ring length.
    #[arg(short = 'L', long = "sites")]
    pub sites: Option<usize>,
    /// Simulated time for the CTMC.
    #[arg(long)]
    pub t: Option<f64>,
    /// Steps for Metropolis-Hastings, after burn-in.
    #[arg(long)]
    pub steps: Option<u64>,
    /// Burn-in: time for the CTMC, steps for Metropolis-Hastings.
    #[arg(long)]
    pub tau0: Option<f64>,
    /// Grid spacing for the CTMC series.
    #[arg(long)]
    pub h: Option<f64>,
    /// Run the truncated sampler with this error budget.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Distances d of the observables M_d.
    #[arg(long = "d", value_delimiter = ',')]
    pub distances: Option<Vec<usize>>,
    #[arg(long)]
    pub chains: Option<u64>,
    /// Also write the path (CTMC, JSON lines) or series (MH, CSV) of chain 0.
    #[arg(long)]
    pub write_path: bool,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(short = 'L', long = "sites")]
    pub sites: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CorruptArgs {
    #[arg(short = 'L', long = "sites")]
    pub sites: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub kappa: Option<Vec<f64>>,
    /// Noise seeds; each also seeds the chains for that row.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long = "d", value_delimiter = ',')]
    pub distances: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
pub struct WickArgs {
    /// 16 amplitudes indexed by integer value; defaults to the four-site
    /// Haldane-Shastry ground state.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub amplitudes: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct VerifyStartArgs {
    #[arg(short = 'L', long = "sites")]
    pub sites: Option<usize>,
    /// Start state in hex (qubit 0 is the lowest bit); defaults to a
    /// uniform draw over half filling.
    #[arg(long)]
    pub state: Option<String>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub repetitions: Option<usize>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = RunConfig::load(cli.config.as_deref())?;
    std::fs::create_dir_all(&cli.out)?;
    let jobs = cli.jobs.unwrap_or(1);
    if jobs == 0 {
        return Err(CliError::Config("--jobs must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let ctx = commands::Context {
        cfg,
        seed: cli.seed,
        out: cli.out,
        pool,
    };
    match cli.command {
        Command::Gap(a) => commands::gap(&ctx, &a),
        Command::Sample(a) => commands::sample(&ctx, &a),
        Command::Validate(a) => commands::validate(&ctx, &a),
        Command::Corrupt(a) => commands::corrupt(&ctx, &a),
        Command::Wick(a) => commands::wick(&ctx, &a),
        Command::VerifyStart(a) => commands::verify_start(&ctx, &a),
    }
}

fn main() -> ExitCode {
    // usage errors are configuration errors, not clap's default exit code 2
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(4);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.reason());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
