use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "statewarp", version, about = "Elastic time-series distances and dynamic state warping experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Distance between two series files.
    Dist(PairArgs),
    /// Optimal alignment path between two series files.
    Align(AlignArgs),
    /// 1NN train/test evaluation, optionally over a UCR-format archive.
    Classify(ClassifyArgs),
    /// Error rates under additive Gaussian noise over a grid of noise levels.
    Robustness(RobustnessArgs),
    /// NARMA order-10 vs order-20 classification over a grid of window lengths.
    Lengthscale(LengthscaleArgs),
    /// DSW error and predictability while one reservoir parameter varies.
    Sweep(SweepArgs),
    /// Distance tables and average-linkage clustering of polygon profiles.
    Shapes(ShapesArgs),
    /// Write synthetic data in UCR format.
    Synth(SynthArgs),
    /// Train vs test accuracy-gain quadrants from result records.
    Sharpshooter(SharpshooterArgs),
    /// Mean ranks, Friedman statistic and Nemenyi critical difference.
    Ranks(RanksArgs),
}

/// Distance selection shared by every command that compares series.
#[derive(Debug, Clone, Args)]
pub struct MetricArgs {
    /// One of ed, dtw, ddtw, wdtw, wddtw, cid, dsw.
    #[arg(long, default_value = "dtw")]
    pub metric: String,
    /// JSON object overriding metric parameters: reservoir fields for dsw,
    /// `steepness`/`max_weight` for wdtw and wddtw, `band` for dtw.
    #[arg(long)]
    pub params: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Z-normalize every input series before comparing.
    #[arg(long)]
    pub znormalize: bool,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Field delimiter of UCR files; inferred from the extension if omitted
    /// (tab for .tsv, comma otherwise).
    #[arg(long)]
    pub delimiter: Option<String>,
}

#[derive(Debug, Args)]
pub struct PairArgs {
    /// First series: one time step per line, channels as columns, or a
    /// single line of values.
    pub a: PathBuf,
    pub b: PathBuf,
    #[command(flatten)]
    pub metric: MetricArgs,
    /// Read the given 0-based record of UCR-format files instead.
    #[arg(long)]
    pub row: Option<usize>,
    #[command(flatten)]
    pub data: DataArgs,
    /// Also write the value and parameters as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PathFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct AlignArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: PathFormat,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Comma-separated metric names.
    #[arg(long, default_value = "dtw")]
    pub metric: String,
    #[arg(long)]
    pub params: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
    /// Random networks compared by leave-one-out accuracy for dsw.
    #[arg(long, default_value_t = 20)]
    pub candidates: usize,
    /// Z-normalize every input series before comparing.
    #[arg(long)]
    pub znormalize: bool,
    /// JSON-lines result file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long, required_unless_present = "dir", requires = "test")]
    pub train: Option<PathBuf>,
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// Archive root holding `<Name>/<Name>_TRAIN` and `_TEST` files.
    #[arg(long, conflicts_with_all = ["train", "test"])]
    pub dir: Option<PathBuf>,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub data: DataArgs,
    /// Keep per-item predictions in the records.
    #[arg(long)]
    pub predictions: bool,
}

#[derive(Debug, Args)]
pub struct RobustnessArgs {
    /// Training file; the bundled bump dataset is used when omitted.
    #[arg(long, requires = "test")]
    pub train: Option<PathBuf>,
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// Noise levels as `start:step:end` or a comma list.
    #[arg(long, default_value = "0.1:0.2:1.1")]
    pub grid: String,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub data: DataArgs,
}

#[derive(Debug, Args)]
pub struct LengthscaleArgs {
    /// Window lengths as `start:step:end` or a comma list.
    #[arg(long, default_value = "100,200,400")]
    pub grid: String,
    /// Windows per order; half of each goes to training.
    #[arg(long, default_value_t = 50)]
    pub per_class: usize,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    /// Reservoir field to vary: scaling, input_weight, cycle_weight,
    /// jump_weight, reservoir_size, jump_length or input_window.
    #[arg(long, default_value = "scaling")]
    pub param: String,
    #[arg(long, default_value = "0.1:0.2:1.9")]
    pub grid: String,
    /// JSON object overriding the other reservoir parameters.
    #[arg(long)]
    pub params: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
    #[arg(long, default_value_t = 20)]
    pub candidates: usize,
    #[arg(long)]
    pub znormalize: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub data: DataArgs,
}

#[derive(Debug, Args)]
pub struct ShapesArgs {
    /// Comma-separated side counts.
    #[arg(long, default_value = "3,4,5,6,7,8")]
    pub sides: String,
    #[arg(long, default_value_t = 120)]
    pub samples: usize,
    /// Gaussian noise added to every profile.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Comma-separated metric names.
    #[arg(long, default_value = "ed,dtw,dsw")]
    pub metric: String,
    #[arg(long)]
    pub params: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON report path; printed to standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(subcommand)]
    pub kind: SynthKind,
}

#[derive(Debug, Subcommand)]
pub enum SynthKind {
    /// One NARMA sequence as a single UCR record labeled by its order.
    Narma {
        #[arg(long, default_value_t = 10)]
        order: usize,
        #[arg(long, default_value_t = 1000)]
        length: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// NARMA train/test split written as `<dir>/NARMA<len>/NARMA<len>_TRAIN|_TEST`.
    NarmaDataset {
        #[arg(long, default_value_t = 400)]
        subseq_len: usize,
        #[arg(long, default_value_t = 50)]
        per_class: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        znormalize: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Bundled two-class bump dataset written as `<dir>/Bumps/Bumps_TRAIN|_TEST`.
    Bumps {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Radial profiles of regular polygons, labeled by side count.
    Polygons {
        #[arg(long, default_value = "3,4,5,6,7,8")]
        sides: String,
        #[arg(long, default_value_t = 120)]
        samples: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Copy of a UCR file with Gaussian noise added to every value.
    Noise {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct SharpshooterArgs {
    /// Result files or directories of `.jsonl` files.
    #[arg(required = true)]
    pub results: Vec<PathBuf>,
    /// Method whose gain is measured.
    #[arg(long, default_value = "dsw")]
    pub a: String,
    /// Baseline method.
    #[arg(long, default_value = "dtw")]
    pub b: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RanksArgs {
    #[arg(required = true)]
    pub results: Vec<PathBuf>,
    /// Significance level, 0.05 or 0.10.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
