use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::exact::{count_butterflies_exact, ExactCounter};
use crate::graph::{BipartiteAdjacency, TimedEdge};
use crate::ingest::EdgeStream;
use crate::registry::WindowModel;
use crate::window::ExactWindowCounter;

use super::BenchError;

/// Exact counts at a set of checkpoints for one window configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthSeries {
    pub model: WindowModel,
    pub window: Option<u64>,
    pub stream_edges: usize,
    /// `(t, exact)` pairs in increasing `t`.
    pub points: Vec<(u64, u64)>,
}

impl TruthSeries {
    pub fn at(&self, t: u64) -> Option<u64> {
        self.points
            .binary_search_by_key(&t, |&(pt, _)| pt)
            .ok()
            .map(|i| self.points[i].1)
    }
}

fn model_name(model: WindowModel) -> &'static str {
    match model {
        WindowModel::Infinite => "infinite",
        WindowModel::Sequence => "sequence",
        WindowModel::Time => "time",
    }
}

/// Replays `stream` through the matching exact counter and records its
/// value at each checkpoint `t` (1-based edge index). The last checkpoint
/// is cross-checked against a from-scratch recount.
pub fn compute_truth(
    stream: &EdgeStream,
    model: WindowModel,
    window: Option<u64>,
    at: &[u64],
) -> Result<TruthSeries, BenchError> {
    let need_window = || {
        window.ok_or_else(|| BenchError::InvalidConfig("window ground truth needs --window".into()))
    };
    let mut points = Vec::with_capacity(at.len());
    let mut wanted = at.iter().copied().peekable();
    let stream_err = |position, source| BenchError::Stream { position, source };

    match model {
        WindowModel::Infinite => {
            let mut counter = ExactCounter::new();
            for (i, te) in stream.edges.iter().enumerate() {
                counter.insert(te.edge).map_err(|e| {
                    stream_err(i, crate::estimators::EstimatorError::DuplicateEdge(e))
                })?;
                if wanted.next_if_eq(&(i as u64 + 1)).is_some() {
                    points.push((i as u64 + 1, counter.count().get()));
                }
            }
            if let Some(&(_, last)) = points.last() {
                let t = points.last().unwrap().0 as usize;
                let fresh: BipartiteAdjacency =
                    stream.edges[..t].iter().map(|te| te.edge).collect();
                verify(last, count_butterflies_exact(&fresh).get(), t)?;
            }
        }
        WindowModel::Sequence | WindowModel::Time => {
            let w = need_window()?;
            let mut counter =
                ExactWindowCounter::new(w).map_err(|e| BenchError::InvalidConfig(e.to_string()))?;
            let stamp = |i: usize, te: &TimedEdge| match model {
                WindowModel::Sequence => TimedEdge::new(te.edge, i as u64 + 1),
                _ => *te,
            };
            for (i, te) in stream.edges.iter().enumerate() {
                counter
                    .process(stamp(i, te))
                    .map_err(|e| stream_err(i, e))?;
                if wanted.next_if_eq(&(i as u64 + 1)).is_some() {
                    points.push((i as u64 + 1, counter.count().get()));
                }
            }
            if let Some(&(t, last)) = points.last() {
                let t = t as usize;
                let now = stamp(t - 1, &stream.edges[t - 1]).timestamp as i128;
                let fresh: BipartiteAdjacency = stream.edges[..t]
                    .iter()
                    .enumerate()
                    .filter(|(i, te)| stamp(*i, te).timestamp as i128 > now - w as i128)
                    .map(|(_, te)| te.edge)
                    .collect();
                verify(last, count_butterflies_exact(&fresh).get(), t)?;
            }
        }
    }
    if wanted.peek().is_some() {
        return Err(BenchError::Truth("checkpoint beyond end of stream".into()));
    }
    Ok(TruthSeries {
        model,
        window,
        stream_edges: stream.len(),
        points,
    })
}

fn verify(incremental: u64, recount: u64, t: usize) -> Result<(), BenchError> {
    if incremental == recount {
        Ok(())
    } else {
        Err(BenchError::Truth(format!(
            "incremental count {incremental} disagrees with recount {recount} at t = {t}"
        )))
    }
}

pub fn write_truth_file(series: &TruthSeries, path: &Path) -> Result<(), BenchError> {
    let io_err = |source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
    let window = series
        .window
        .map(|w| w.to_string())
        .unwrap_or_else(|| "NA".into());
    write!(
        out,
        "# model={}\n# window={window}\n# stream_edges={}\nt,exact\n",
        model_name(series.model),
        series.stream_edges
    )
    .map_err(io_err)?;
    for (t, exact) in &series.points {
        writeln!(out, "{t},{exact}").map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

pub fn read_truth_file(path: &Path) -> Result<TruthSeries, BenchError> {
    let io_err = |source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    };
    let bad = |msg: String| BenchError::Truth(format!("{}: {msg}", path.display()));
    let reader = BufReader::new(File::open(path).map_err(io_err)?);
    let (mut model, mut window, mut edges) = (None, None, None);
    let mut points = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err)?;
        if let Some(meta) = line.strip_prefix("# ") {
            match meta.split_once('=') {
                Some(("model", v)) => {
                    model = Some(match v {
                        "infinite" => WindowModel::Infinite,
                        "sequence" => WindowModel::Sequence,
                        "time" => WindowModel::Time,
                        other => return Err(bad(format!("unknown model {other:?}"))),
                    })
                }
                Some(("window", "NA")) => {}
                Some(("window", v)) => {
                    window = Some(v.parse().map_err(|_| bad("bad window".into()))?)
                }
                Some(("stream_edges", v)) => {
                    edges = Some(v.parse().map_err(|_| bad("bad stream_edges".into()))?)
                }
                _ => {}
            }
            continue;
        }
        if line == "t,exact" || line.is_empty() {
            continue;
        }
        let (t, x) = line
            .split_once(',')
            .ok_or_else(|| bad(format!("line {}: expected t,exact", i + 1)))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<u64>()
                .map_err(|_| bad(format!("line {}: not an integer", i + 1)))
        };
        points.push((parse(t)?, parse(x)?));
    }
    if points.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(bad("checkpoints must be strictly increasing".into()));
    }
    Ok(TruthSeries {
        model: model.ok_or_else(|| bad("missing model line".into()))?,
        window,
        stream_edges: edges.ok_or_else(|| bad("missing stream_edges line".into()))?,
        points,
    })
}
