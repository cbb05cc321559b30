use std::fs::File;
use std::io::Read;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::exact::max_per_edge;
use crate::graph::BipartiteAdjacency;
use crate::ingest::{
    parse_konect, permute, preprocess, read_cache, synth_stream, EdgeStream, IngestError,
    PreprocessOptions, CACHE_MAGIC,
};
use crate::registry::{Registry, StrategyEntry, WindowModel};

use super::csv::TrialRow;
use super::metrics::{butterfly_density, mape, snap_for_report, MetricsRow};
use super::truth::{compute_truth, read_truth_file, TruthSeries};
use super::{BenchError, ExperimentConfig, GroundTruth, InputSource, Summary};

#[derive(Debug, Clone, PartialEq)]
pub struct TrialSummary {
    pub trial: usize,
    pub seed: u64,
    pub mape_pct: Option<f64>,
    pub final_error: Option<f64>,
    pub final_estimate: f64,
    pub processing: Duration,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub rows: Vec<TrialRow>,
    pub trials: Vec<TrialSummary>,
    pub summary: Summary,
    pub warnings: Vec<String>,
}

/// Worker count for trial-level parallelism: `BFLY_THREADS` if set to a
/// positive integer, otherwise all available cores.
pub fn thread_count() -> usize {
    std::env::var("BFLY_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Checkpoint positions: every `every` edges, plus the final edge.
pub fn checkpoints(len: usize, every: u64) -> Vec<u64> {
    let len = len as u64;
    let every = every.max(1);
    let mut out: Vec<u64> = (1..=len / every).map(|k| k * every).collect();
    if len > 0 && out.last() != Some(&len) {
        out.push(len);
    }
    out
}

pub fn load_stream(
    input: &InputSource,
    permute_seed: Option<u64>,
) -> Result<EdgeStream, BenchError> {
    let stream = match input {
        InputSource::Synth { spec, seed } => synth_stream(*spec, *seed)?,
        InputSource::File { path, timestamps } => {
            if has_cache_magic(path)? {
                read_cache(path)?
            } else {
                let records = parse_konect(path)?;
                let opts = PreprocessOptions {
                    timestamp_field: timestamps.then_some(1),
                };
                let mut s = preprocess(&records, opts)?;
                s.meta.source = Some(path.clone());
                if s.meta.duplicates_removed > 0 {
                    log::info!(
                        "dropped {} repeated edges from {}",
                        s.meta.duplicates_removed,
                        path.display()
                    );
                }
                if s.meta.reordered {
                    log::info!("{} was re-sorted by timestamp", path.display());
                }
                s
            }
        }
    };
    Ok(match permute_seed {
        Some(seed) => permute(&stream, seed),
        None => stream,
    })
}

fn has_cache_magic(path: &std::path::Path) -> Result<bool, BenchError> {
    let mut head = [0u8; 8];
    let mut f = File::open(path).map_err(|e| IngestError::io(path, e))?;
    let mut filled = 0;
    while filled < head.len() {
        match f
            .read(&mut head[filled..])
            .map_err(|e| IngestError::io(path, e))?
        {
            0 => break,
            n => filled += n,
        }
    }
    Ok(filled == 8 && &head == CACHE_MAGIC)
}

fn validate(cfg: &ExperimentConfig, entry: &StrategyEntry) -> Result<(), BenchError> {
    if cfg.trials == 0 {
        return Err(BenchError::InvalidConfig("trials must be positive".into()));
    }
    if cfg.checkpoint_every == Some(0) {
        return Err(BenchError::InvalidConfig(
            "checkpoint interval must be positive".into(),
        ));
    }
    let mut params = cfg.params.clone();
    params.seed = cfg.seed;
    entry.validate(&params)?;
    Ok(())
}

fn resolve_truth(
    cfg: &ExperimentConfig,
    stream: &EdgeStream,
    model: WindowModel,
    at: &[u64],
) -> Result<Option<TruthSeries>, BenchError> {
    let window = match model {
        WindowModel::Infinite => None,
        _ => cfg.params.window,
    };
    match &cfg.truth {
        GroundTruth::None => Ok(None),
        GroundTruth::Inline => compute_truth(stream, model, window, at).map(Some),
        GroundTruth::File(path) => {
            let series = read_truth_file(path)?;
            if series.model != model || series.window != window {
                return Err(BenchError::InvalidConfig(format!(
                    "truth file {} was computed for a different window configuration",
                    path.display()
                )));
            }
            if series.stream_edges != stream.len() {
                return Err(BenchError::InvalidConfig(format!(
                    "truth file {} covers {} edges but the stream has {}",
                    path.display(),
                    series.stream_edges,
                    stream.len()
                )));
            }
            if let Some(t) = at.iter().find(|&&t| series.at(t).is_none()) {
                return Err(BenchError::Truth(format!(
                    "{} has no value for checkpoint t = {t}",
                    path.display()
                )));
            }
            Ok(Some(series))
        }
    }
}

/// Replays the configured stream once per trial and gathers metrics.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    registry: &Registry,
) -> Result<ExperimentReport, BenchError> {
    let entry = registry.lookup(&cfg.algorithm)?;
    validate(cfg, entry)?;
    let stream = load_stream(&cfg.input, cfg.permute)?;
    let every = cfg
        .checkpoint_every
        .unwrap_or_else(|| (stream.len() as u64 / 100).max(1));
    let at = checkpoints(stream.len(), every);
    let truth = resolve_truth(cfg, &stream, entry.window, &at)?;
    let exact_at: Vec<Option<u64>> = at
        .iter()
        .map(|&t| truth.as_ref().and_then(|s| s.at(t)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count())
        .build()
        .map_err(|e| BenchError::InvalidConfig(format!("thread pool: {e}")))?;
    let outcomes: Vec<(Vec<TrialRow>, TrialSummary, Vec<String>)> = pool.install(|| {
        (0..cfg.trials)
            .into_par_iter()
            .map(|trial| run_trial(cfg, registry, &stream, &at, &exact_at, trial))
            .collect::<Result<_, _>>()
    })?;

    let mut rows = Vec::new();
    let mut trials = Vec::new();
    let mut warnings = Vec::new();
    for (trial_rows, summary, notes) in outcomes {
        rows.extend(trial_rows);
        warnings.extend(
            notes
                .into_iter()
                .map(|n| format!("trial {}: {n}", summary.trial)),
        );
        trials.push(summary);
    }
    for w in &warnings {
        log::warn!("{w}");
    }

    let final_exact = exact_at.last().copied().flatten();
    let max_edge = if cfg.report_max_per_edge && entry.window == WindowModel::Infinite {
        let g: BipartiteAdjacency = stream.plain_edges().collect();
        Some(max_per_edge(&g).get())
    } else {
        None
    };
    let mean_of = |xs: Vec<f64>| (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64);
    let processing: Duration = trials.iter().map(|t| t.processing).sum();
    let summary = Summary {
        algorithm: entry.name.to_string(),
        reservoir: cfg.params.reservoir,
        gamma: entry
            .optional
            .contains(&crate::registry::Param::Gamma)
            .then(|| cfg.params.gamma.unwrap_or(crate::estimators::DEFAULT_GAMMA)),
        window: cfg.params.window,
        seed: cfg.seed,
        trials: cfg.trials,
        stream_edges: stream.len(),
        mape_pct: mean_of(trials.iter().filter_map(|t| t.mape_pct).collect()),
        final_error_pct: mean_of(trials.iter().filter_map(|t| t.final_error).collect())
            .map(|x| 100.0 * x),
        throughput_eps: (cfg.record_timing && !processing.is_zero())
            .then(|| (stream.len() * trials.len()) as f64 / processing.as_secs_f64()),
        butterfly_density: match entry.window {
            WindowModel::Infinite => final_exact.and_then(|x| butterfly_density(x, stream.len())),
            _ => None,
        },
        final_exact,
        mean_final_estimate: trials.iter().map(|t| t.final_estimate).sum::<f64>()
            / trials.len() as f64,
        max_per_edge: max_edge,
    };
    Ok(ExperimentReport {
        rows,
        trials,
        summary,
        warnings,
    })
}

fn run_trial(
    cfg: &ExperimentConfig,
    registry: &Registry,
    stream: &EdgeStream,
    at: &[u64],
    exact_at: &[Option<u64>],
    trial: usize,
) -> Result<(Vec<TrialRow>, TrialSummary, Vec<String>), BenchError> {
    let seed = cfg.seed.wrapping_add(trial as u64);
    let mut params = cfg.params.clone();
    params.seed = seed;
    let mut estimator = registry.build(&cfg.algorithm, &params)?;

    let mut rows = Vec::with_capacity(at.len());
    let mut processing = Duration::ZERO;
    let mut from = 0usize;
    for (&t, &exact) in at.iter().zip(exact_at) {
        let to = t as usize;
        let started = Instant::now();
        for (offset, te) in stream.edges[from..to].iter().enumerate() {
            estimator
                .process(*te)
                .map_err(|source| BenchError::Stream {
                    position: from + offset,
                    source,
                })?;
        }
        processing += started.elapsed();
        from = to;
        let estimate = estimator.estimate().map_err(|source| BenchError::Stream {
            position: to - 1,
            source,
        })?;
        let elapsed_ns = if cfg.record_timing {
            processing.as_nanos() as u64
        } else {
            0
        };
        rows.push(TrialRow {
            trial,
            metrics: MetricsRow::new(t, snap_for_report(estimate), exact, elapsed_ns),
        });
    }

    let metrics: Vec<MetricsRow> = rows.iter().map(|r| r.metrics).collect();
    let summary = TrialSummary {
        trial,
        seed,
        mape_pct: mape(&metrics).ok(),
        final_error: metrics.last().and_then(|m| m.relative_error),
        final_estimate: metrics.last().map_or(0.0, |m| m.estimate),
        processing,
    };
    Ok((rows, summary, estimator.warnings()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::SynthSpec;

    #[test]
    fn checkpoint_positions() {
        assert_eq!(checkpoints(10, 3), vec![3, 6, 9, 10]);
        assert_eq!(checkpoints(9, 3), vec![3, 6, 9]);
        assert_eq!(checkpoints(0, 3), Vec::<u64>::new());
        assert_eq!(checkpoints(2, 5), vec![2]);
    }

    #[test]
    fn exact_run_has_zero_error() {
        let mut cfg = ExperimentConfig::new(
            "Exact",
            InputSource::Synth {
                spec: SynthSpec::CompleteBiclique { a: 3, b: 3 },
                seed: 0,
            },
        );
        cfg.checkpoint_every = Some(1);
        let report = run_experiment(&cfg, &Registry::with_builtins()).unwrap();
        let last = report.rows.last().unwrap().metrics;
        assert_eq!(
            (last.estimate, last.exact, last.relative_error),
            (9.0, Some(9), Some(0.0))
        );
        assert_eq!(report.rows.len(), 9);
        assert_eq!(report.summary.final_error_pct, Some(0.0));
        assert_eq!(report.summary.butterfly_density, Some(9.0 / 9f64.powi(4)));
    }

    #[test]
    fn parameter_mismatch_is_a_config_error() {
        let mut cfg = ExperimentConfig::new(
            "Fleet1",
            InputSource::Synth {
                spec: SynthSpec::CompleteBiclique { a: 3, b: 3 },
                seed: 0,
            },
        );
        let err = run_experiment(&cfg, &Registry::with_builtins()).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        cfg.params.reservoir = Some(10);
        cfg.trials = 0;
        assert_eq!(
            run_experiment(&cfg, &Registry::with_builtins())
                .unwrap_err()
                .exit_code(),
            1
        );
    }
}
