use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use primewalk::primes::DEFAULT_SEGMENT_SIZE;
use primewalk::walk::{DEFAULT_CADENCE, DEFAULT_INTERVAL};

#[derive(Debug, Parser)]
#[command(name = "primewalk", version, about = "Prime Walk simulator and statistics")]
pub struct Cli {
    /// Sieve segment length in integers.
    #[arg(long, global = true, env = "PRIMEWALK_SEGMENT_SIZE", default_value_t = DEFAULT_SEGMENT_SIZE)]
    pub segment_size: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a walk (or resume one) and write snapshots, intervals, checkpoint and manifest.
    Run(RunArgs),
    /// Compute statistics as CSV.
    #[command(subcommand)]
    Stats(StatsCommand),
    /// Render a checkpointed grid as a PGM image.
    ExportRaster(RasterArgs),
    /// Print a JSON summary of a checkpoint.
    Inspect { checkpoint: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Pw,
    Prw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CountMode {
    Dwell,
    Arrival,
    Both,
}

/// Grid selection for commands that read one grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum GridKind {
    #[default]
    Dwell,
    Arrival,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, value_enum)]
    pub mode: Mode,
    /// Walk up to N = limit.
    #[arg(long)]
    pub limit: u64,
    /// Snapshot every `cadence` integers.
    #[arg(long, default_value_t = DEFAULT_CADENCE)]
    pub cadence: u64,
    /// PRNG seed (prw only).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Resume from this checkpoint.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = "PRIMEWALK_OUT", default_value = "primewalk-out")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "dwell")]
    pub count_mode: CountMode,
    /// Window length for intervals.csv. Taken from the checkpoint when resuming.
    #[arg(long)]
    pub interval: Option<u64>,
}

impl RunArgs {
    pub fn interval_or_default(&self) -> u64 {
        self.interval.unwrap_or(DEFAULT_INTERVAL)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum PopulationArg {
    #[default]
    All,
    /// Cells with y = 0.
    XAxis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum ScalingArg {
    #[default]
    Binary,
    Linear,
    Log,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Write here instead of stdout.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum StatsCommand {
    /// Leading-digit histogram of cell counts against Benford's law.
    Benford {
        checkpoint: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        population: PopulationArg,
        #[arg(long, value_enum, default_value = "dwell")]
        count_mode: GridKind,
        #[command(flatten)]
        out: Output,
    },
    /// Histogram of cell counts with a log-linear fit.
    Zhist {
        checkpoint: PathBuf,
        /// Fit range start (default: 10th percentile of counts).
        #[arg(long)]
        z_lo: Option<u64>,
        /// Fit range end (default: maximum count).
        #[arg(long)]
        z_hi: Option<u64>,
        #[arg(long, value_enum, default_value = "dwell")]
        count_mode: GridKind,
        #[command(flatten)]
        out: Output,
    },
    /// Box-counting dimension of the visited set.
    Boxdim {
        checkpoint: PathBuf,
        /// Box sizes, comma separated (default: powers of two up to a quarter of the bbox).
        #[arg(long, value_delimiter = ',')]
        eps: Vec<u64>,
        #[command(flatten)]
        out: Output,
    },
    /// Align a Prime Walk snapshot series with pseudo-random ones.
    Ratios {
        #[arg(long)]
        pw: PathBuf,
        #[arg(long, required = true, num_args = 1..)]
        prw: Vec<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Histogram of gaps between consecutive primes up to a limit.
    Gaps {
        #[arg(long)]
        limit: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Last-digit transition counts over the first M primes.
    Pairs {
        #[arg(long)]
        first: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Through-origin fit of area against n.
    Areafit {
        snapshots: PathBuf,
        #[arg(long)]
        n_lo: Option<u64>,
        #[arg(long)]
        n_hi: Option<u64>,
        #[command(flatten)]
        out: Output,
    },
    /// Exact π(N) next to N / ln N.
    Pi {
        #[arg(long)]
        limit: u64,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Debug, Args)]
pub struct RasterArgs {
    pub checkpoint: PathBuf,
    #[arg(long, value_enum, default_value = "binary")]
    pub scaling: ScalingArg,
    /// ASCII P2 instead of binary P5.
    #[arg(long)]
    pub plain: bool,
    #[arg(long, value_enum, default_value = "dwell")]
    pub count_mode: GridKind,
    #[command(flatten)]
    pub out: Output,
}
