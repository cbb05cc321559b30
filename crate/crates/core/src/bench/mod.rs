//! Experiment harness: replays a stream through a registered algorithm,
//! checkpoints it against exact ground truth and summarizes accuracy and
//! throughput.

mod csv;
mod experiment;
mod metrics;
mod truth;

pub use csv::{emit_csv, parse_csv, read_csv, write_csv, ParsedCsv, TrialRow, CSV_HEADER};
pub use experiment::{
    checkpoints, load_stream, run_experiment, thread_count, ExperimentReport, TrialSummary,
};
pub use metrics::{butterfly_density, mape, MetricsRow, REPORT_ZERO_SNAP};
pub use truth::{compute_truth, read_truth_file, write_truth_file, TruthSeries};

use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::estimators::EstimatorError;
use crate::ingest::{IngestError, SynthSpec};
use crate::registry::{AlgorithmParams, ConfigError};

#[derive(Debug, Clone, PartialEq)]
pub enum InputSource {
    /// Edge-list text (optionally gzipped) or a binary stream cache.
    File {
        path: PathBuf,
        /// Use the fourth column as the timestamp.
        timestamps: bool,
    },
    Synth {
        spec: SynthSpec,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroundTruth {
    Inline,
    File(PathBuf),
    None,
}

impl std::str::FromStr for GroundTruth {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inline" => Ok(GroundTruth::Inline),
            "none" => Ok(GroundTruth::None),
            _ => match s.strip_prefix("file:") {
                Some(path) if !path.is_empty() => Ok(GroundTruth::File(path.into())),
                _ => Err(format!("expected inline, none or file:PATH, got {s:?}")),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub algorithm: String,
    pub input: InputSource,
    /// Shuffle the loaded stream with this seed before replay.
    pub permute: Option<u64>,
    /// Algorithm knobs; `params.seed` is ignored in favour of `seed`.
    pub params: AlgorithmParams,
    /// Trial `i` runs with seed `seed + i`.
    pub seed: u64,
    pub trials: usize,
    /// Defaults to `max(1, len / 100)`.
    pub checkpoint_every: Option<u64>,
    pub truth: GroundTruth,
    /// When off, elapsed times are written as 0 and throughput is omitted,
    /// which makes the results file a pure function of the config.
    pub record_timing: bool,
    /// Also report the largest per-edge butterfly count of the full graph.
    pub report_max_per_edge: bool,
}

impl ExperimentConfig {
    pub fn new(algorithm: impl Into<String>, input: InputSource) -> Self {
        ExperimentConfig {
            algorithm: algorithm.into(),
            input,
            permute: None,
            params: AlgorithmParams::default(),
            seed: 0,
            trials: 1,
            checkpoint_every: None,
            truth: GroundTruth::Inline,
            record_timing: true,
            report_max_per_edge: false,
        }
    }
}

/// Run-level aggregates written as the results file footer.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub algorithm: String,
    pub reservoir: Option<usize>,
    pub gamma: Option<f64>,
    pub window: Option<u64>,
    pub seed: u64,
    pub trials: usize,
    pub stream_edges: usize,
    /// Mean over trials of each trial's MAPE.
    pub mape_pct: Option<f64>,
    /// Mean over trials of the relative error at the last checkpoint.
    pub final_error_pct: Option<f64>,
    pub throughput_eps: Option<f64>,
    pub butterfly_density: Option<f64>,
    pub final_exact: Option<u64>,
    pub mean_final_estimate: f64,
    pub max_per_edge: Option<u64>,
}

impl Summary {
    /// Footer entries in output order; absent values print as `NA`.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        fn opt<T: ToString>(v: Option<T>) -> String {
            v.map(|x| x.to_string()).unwrap_or_else(|| "NA".into())
        }
        vec![
            ("mape_pct", opt(self.mape_pct)),
            ("final_error_pct", opt(self.final_error_pct)),
            ("throughput_eps", opt(self.throughput_eps)),
            ("butterfly_density", opt(self.butterfly_density)),
            ("algorithm", self.algorithm.clone()),
            ("M", opt(self.reservoir)),
            ("gamma", opt(self.gamma)),
            ("seed", self.seed.to_string()),
            ("trials", self.trials.to_string()),
            ("window", opt(self.window)),
            ("stream_edges", self.stream_edges.to_string()),
            ("final_exact", opt(self.final_exact)),
            ("mean_final_estimate", self.mean_final_estimate.to_string()),
            ("max_per_edge", opt(self.max_per_edge)),
        ]
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("stream rejected at edge {position}: {source}")]
    Stream {
        position: usize,
        #[source]
        source: EstimatorError,
    },
    #[error("ground truth: {0}")]
    Truth(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("no checkpoint has a positive exact count")]
    EmptyMetrics,
}

impl BenchError {
    /// Process exit status: 1 for configuration problems, 2 for data problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) | BenchError::InvalidConfig(_) => 1,
            _ => 2,
        }
    }
}
