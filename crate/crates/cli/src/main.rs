//! `nor-score`: batch scoring of behavioral predictions for
//! novel-object-recognition trials.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 parse error, 3 validation
//! error, 4 partial failure (some videos failed; see `errors.csv` in the
//! output directory).

mod commands;
mod fsio;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nor_score::nor::LatencyConvention;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io { path: PathBuf, source: std::io::Error },
    Core(nor_score::Error),
}

impl CliError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 1,
            CliError::Core(err) => {
                if err.is_parse() {
                    2
                } else {
                    3
                }
            }
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Core(err) => write!(f, "{err}"),
        }
    }
}

impl From<nor_score::Error> for CliError {
    fn from(err: nor_score::Error) -> Self {
        CliError::Core(err)
    }
}

fn version_string() -> String {
    format!(
        "{} (segmental rules v{})",
        env!("CARGO_PKG_VERSION"),
        nor_score::segmental::RULES_VERSION
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LatencyArg {
    /// Latency to the start of the bout.
    Onset,
    /// Latency to the end of the bout.
    Offset,
}

impl From<LatencyArg> for LatencyConvention {
    fn from(arg: LatencyArg) -> Self {
        match arg {
            LatencyArg::Onset => LatencyConvention::Onset,
            LatencyArg::Offset => LatencyConvention::Offset,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "nor-score",
    version = version_string(),
    about = "Score continuous behavioral predictions against NOR trial annotations",
    long_about = "Score continuous behavioral predictions against ground-truth annotations \
                  for novel-object-recognition (NOR) trials: clip manifests, clip-level \
                  metrics, segmental error taxonomy, NOR behavioral metrics, cross-video \
                  agreement statistics, and a seeded synthetic trial generator.\n\n\
                  Outputs are written atomically and are byte-identical for identical \
                  inputs, flags, and seeds, regardless of --parallel."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract fixed-length training clips and optionally split train/val.
    Clips {
        /// Annotation JSON files or directories.
        #[arg(long = "in", required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        /// Output directory for clip_manifest.csv.
        #[arg(long)]
        out: PathBuf,
        /// Clip length in frames.
        #[arg(long, default_value_t = 60)]
        clip_len: u64,
        /// Training fraction in (0,1); omit to skip splitting.
        #[arg(long)]
        ratio: Option<f64>,
        /// Seed for the split shuffle.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads (0 = auto, 1 = sequential).
        #[arg(long, default_value_t = 0)]
        parallel: usize,
    },
    /// Evaluate clip-level predictions: accuracy, PR curve, average precision.
    ClipEval {
        /// Clip evaluation CSV files or directories
        /// (header: video_id,start_frame,true_label,pred_label,score).
        #[arg(long = "in", required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        /// Output directory for clip_eval_summary.csv and pr_curve.csv.
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (0 = auto, 1 = sequential).
        #[arg(long, default_value_t = 0)]
        parallel: usize,
    },
    /// Segmental error taxonomy over (ground truth, prediction) pairs.
    Segscore {
        /// Ground-truth annotation JSON files or directories.
        #[arg(long, required = true, num_args = 1..)]
        gt: Vec<PathBuf>,
        /// Prediction files (interval JSON or window CSV) or directories.
        #[arg(long, required = true, num_args = 1..)]
        pred: Vec<PathBuf>,
        /// Output directory for segmental_report.csv.
        #[arg(long)]
        out: PathBuf,
        /// Score left/right object tracks separately instead of the combined
        /// investigate track; rows are tagged video#left / video#right.
        #[arg(long)]
        per_side: bool,
        /// Worker threads (0 = auto, 1 = sequential).
        #[arg(long, default_value_t = 0)]
        parallel: usize,
    },
    /// Per-video NOR behavioral metrics from annotations.
    Nor {
        /// Annotation JSON files or directories.
        #[arg(long = "in", required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        /// Output directory for nor_metrics.csv.
        #[arg(long)]
        out: PathBuf,
        /// Override the fps stated in the annotations.
        #[arg(long)]
        fps: Option<u32>,
        /// Latency convention for LF and LL.
        #[arg(long, value_enum, default_value_t = LatencyArg::Onset)]
        latency: LatencyArg,
        /// Worker threads (0 = auto, 1 = sequential).
        #[arg(long, default_value_t = 0)]
        parallel: usize,
    },
    /// Compare predicted NOR metrics against ground truth across a corpus.
    Compare {
        /// Ground-truth annotation JSON files or directories.
        #[arg(long, required = true, num_args = 1..)]
        gt: Vec<PathBuf>,
        /// Prediction files (interval JSON or window CSV) or directories.
        #[arg(long, required = true, num_args = 1..)]
        pred: Vec<PathBuf>,
        /// Output directory for nor_comparison.csv and per-side metric CSVs.
        #[arg(long)]
        out: PathBuf,
        /// Override the fps stated in the annotations.
        #[arg(long)]
        fps: Option<u32>,
        /// Latency convention for LF and LL.
        #[arg(long, value_enum, default_value_t = LatencyArg::Onset)]
        latency: LatencyArg,
        /// Worker threads (0 = auto, 1 = sequential).
        #[arg(long, default_value_t = 0)]
        parallel: usize,
    },
    /// Generate synthetic trials with perturbed predictions and exact
    /// expected-error ledgers.
    #[command(after_help = "Config file keys (flat `key = value`, `#` comments): \
                            investigate_min_s, investigate_max_s, gap_min_s, gap_max_s, \
                            novel_prob, trial_s, fps. Flags override config values.")]
    Synth {
        /// Number of trials to generate.
        #[arg(long, default_value_t = 5)]
        trials: u64,
        /// Master seed; pins every generated byte.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory (annotations/, predictions/, ledgers/).
        #[arg(long)]
        out: PathBuf,
        /// Bout model config file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Perturbation operations attempted per trial.
        #[arg(long, default_value_t = 8)]
        ops: usize,
        /// Frames per second.
        #[arg(long)]
        fps: Option<u32>,
        /// Trial length in seconds.
        #[arg(long)]
        trial_s: Option<f64>,
        /// Minimum investigation bout duration, seconds.
        #[arg(long)]
        investigate_min_s: Option<f64>,
        /// Maximum investigation bout duration, seconds.
        #[arg(long)]
        investigate_max_s: Option<f64>,
        /// Minimum exploration gap duration, seconds.
        #[arg(long)]
        gap_min_s: Option<f64>,
        /// Maximum exploration gap duration, seconds.
        #[arg(long)]
        gap_max_s: Option<f64>,
        /// Probability a bout targets the novel object.
        #[arg(long)]
        novel_prob: Option<f64>,
    },
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Clips {
            inputs,
            out,
            clip_len,
            ratio,
            seed,
            parallel,
        } => commands::clips(&inputs, &out, clip_len, ratio, seed, parallel),
        Command::ClipEval {
            inputs,
            out,
            parallel,
        } => commands::clip_eval(&inputs, &out, parallel),
        Command::Segscore {
            gt,
            pred,
            out,
            per_side,
            parallel,
        } => commands::segscore(&gt, &pred, &out, per_side, parallel),
        Command::Nor {
            inputs,
            out,
            fps,
            latency,
            parallel,
        } => commands::nor_cmd(&inputs, &out, fps, latency.into(), parallel),
        Command::Compare {
            gt,
            pred,
            out,
            fps,
            latency,
            parallel,
        } => commands::compare(&gt, &pred, &out, fps, latency.into(), parallel),
        Command::Synth {
            trials,
            seed,
            out,
            config,
            ops,
            fps,
            trial_s,
            investigate_min_s,
            investigate_max_s,
            gap_min_s,
            gap_max_s,
            novel_prob,
        } => commands::synth_cmd(
            trials,
            seed,
            &out,
            config.as_deref(),
            ops,
            &commands::SynthOverrides {
                fps,
                trial_s,
                investigate_min_s,
                investigate_max_s,
                gap_min_s,
                gap_max_s,
                novel_prob,
            },
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // --help and --version are successful outcomes
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
