use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tailgini::RunConfig;

mod commands;
mod exit;
mod report;

use exit::{CliError, CliResult};

/// Thread count for the replication and permutation loops.
const THREADS_ENV: &str = "TAILGINI_THREADS";

#[derive(Parser, Debug)]
#[command(name = "tailgini", version, about = "Tail Gini estimation at extreme levels under asymptotic independence")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand. Anything left unset falls back to the
/// `--config` file, then to the subcommand default.
#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// Intermediate tail fraction k/n.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Tail fraction for the Hill estimator.
    #[arg(long)]
    pub alpha1: Option<f64>,
    /// Tail fraction for the eta estimator.
    #[arg(long)]
    pub alpha2: Option<f64>,
    /// Extreme level; repeat for several.
    #[arg(long = "p")]
    pub p: Vec<f64>,
    /// Sample size.
    #[arg(long)]
    pub n: Option<usize>,
    /// Replications.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Base seed; replication i draws from stream (seed, i).
    #[arg(long)]
    pub seed: Option<u64>,
    /// model1a..model1d, model2, custom:a1,a2 or custom2:a1,a2.
    #[arg(long)]
    pub model: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Use the large Monte Carlo sizes.
    #[arg(long)]
    pub paper_scale: bool,
    /// key = value file; flags given here take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl Common {
    pub fn resolve(&self) -> CliResult<RunConfig> {
        let cli = RunConfig {
            alpha: self.alpha,
            alpha1: self.alpha1,
            alpha2: self.alpha2,
            p: self.p.clone(),
            n: self.n,
            reps: self.reps,
            seed: self.seed,
            model: self.model.clone(),
            out: self.out.clone(),
            paper_scale: self.paper_scale.then_some(true),
            ..Default::default()
        };
        let file = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        Ok(cli.merge(file))
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a sample from a simulation model.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo approximation of the true tail Gini value.
    Truevalue {
        #[command(flatten)]
        common: Common,
    },
    /// Fit the estimator to an `x,y` loss file.
    Estimate {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Replicated simulation study.
    Experiment {
        #[command(flatten)]
        common: Common,
        /// True values as written by `truevalue`.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Values for the one-at-a-time sMSE sweep, comma separated.
        #[arg(long, value_delimiter = ',')]
        sweep: Vec<f64>,
        /// Fixed value of the other two fractions along the sweep.
        #[arg(long, default_value_t = 0.05)]
        sweep_base: f64,
    },
    /// Permutation test of asymptotic independence on an `x,y` loss file.
    TestIndep {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Permutations in the null distribution.
        #[arg(long)]
        null_reps: Option<usize>,
        /// Rejection level for the p-value.
        #[arg(long)]
        level: Option<f64>,
    },
    /// Convert `date,close` price files to weekly losses.
    Ingest {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Screen and estimate every ticker in a directory of price files
    /// against a systemic index.
    Pipeline {
        /// Directory of `date,close` files, one per ticker.
        dir: PathBuf,
        /// Ticker of the systemic index; its file is `<INDEX>.csv`.
        #[arg(long)]
        index: Option<String>,
        #[command(flatten)]
        common: Common,
        /// Permutations in the null distribution.
        #[arg(long)]
        null_reps: Option<usize>,
        /// Rejection level for the p-value.
        #[arg(long)]
        level: Option<f64>,
    },
}

fn init_threads() -> CliResult<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .map_err(|_| CliError::usage(format!("{THREADS_ENV}={v} is not a thread count")))?;
    // a second initialization (e.g. in tests) is harmless
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    init_threads()?;
    match cli.command {
        Command::Simulate { common } => commands::simulate(&common.resolve()?),
        Command::Truevalue { common } => commands::truevalue(&common.resolve()?),
        Command::Estimate { file, common } => commands::estimate(&file, &common.resolve()?),
        Command::Experiment {
            common,
            truth,
            sweep,
            sweep_base,
        } => commands::experiment(&common.resolve()?, truth.as_deref(), &sweep, sweep_base),
        Command::TestIndep {
            file,
            common,
            null_reps,
            level,
        } => {
            let mut cfg = common.resolve()?;
            cfg.null_reps = null_reps.or(cfg.null_reps);
            cfg.level = level.or(cfg.level);
            commands::test_indep(&file, &cfg)
        }
        Command::Ingest { files, common } => commands::ingest(&files, &common.resolve()?),
        Command::Pipeline {
            dir,
            index,
            common,
            null_reps,
            level,
        } => {
            let mut cfg = common.resolve()?;
            cfg.index = index.or(cfg.index);
            cfg.null_reps = null_reps.or(cfg.null_reps);
            cfg.level = level.or(cfg.level);
            commands::pipeline(&dir, &cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
