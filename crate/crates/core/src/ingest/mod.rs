//! Turning edge-list files and synthetic generators into de-duplicated,
//! time-ordered edge streams.

mod cache;
mod konect;
mod synth;

pub use cache::{read_cache, write_cache, CACHE_MAGIC};
pub use konect::{parse_konect, read_konect, RawRecord};
pub use synth::{synth_stream, SynthSpec};

use std::io;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rustc_hash::{FxHashMap, FxHashSet};
use thiserror::Error;

use crate::estimators::seeded_rng;
use crate::graph::{Edge, TimedEdge};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("record {index}: timestamp field {value:?} is not a non-negative integer")]
    BadTimestamp { index: usize, value: String },
    #[error("invalid synthetic stream parameters: {0}")]
    BadSynth(String),
    #[error("{path}: not a stream cache ({reason})")]
    BadCache { path: PathBuf, reason: String },
}

impl IngestError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        IngestError::Io {
            path: path.into(),
            source,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StreamMetadata {
    pub source: Option<PathBuf>,
    /// Records dropped because their edge had already appeared.
    pub duplicates_removed: usize,
    pub left_vertices: usize,
    pub right_vertices: usize,
    /// Whether sorting by file-borne timestamps changed the record order.
    pub reordered: bool,
}

/// A de-duplicated edge stream with non-decreasing timestamps.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EdgeStream {
    pub edges: Vec<TimedEdge>,
    pub meta: StreamMetadata,
}

impl EdgeStream {
    /// Wraps already-distinct edges, stamping them with 1-based arrival indices.
    pub fn from_edges(edges: impl IntoIterator<Item = Edge>) -> Self {
        let edges: Vec<TimedEdge> = edges
            .into_iter()
            .enumerate()
            .map(|(i, e)| TimedEdge::new(e, i as u64 + 1))
            .collect();
        let mut stream = EdgeStream {
            edges,
            meta: StreamMetadata::default(),
        };
        stream.refresh_vertex_counts();
        stream
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn plain_edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().map(|te| te.edge)
    }

    fn refresh_vertex_counts(&mut self) {
        let lefts: FxHashSet<u64> = self.edges.iter().map(|te| te.edge.left()).collect();
        let rights: FxHashSet<u64> = self.edges.iter().map(|te| te.edge.right()).collect();
        self.meta.left_vertices = lefts.len();
        self.meta.right_vertices = rights.len();
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PreprocessOptions {
    /// Take timestamps from this extra field (0 = third column) instead of
    /// arrival order. KONECT puts them in the fourth column: `Some(1)`.
    pub timestamp_field: Option<usize>,
}

/// Maps records to edges, keeps the first occurrence of every edge and
/// assigns timestamps.
///
/// With file-borne timestamps a surviving edge takes the earliest timestamp
/// seen across its occurrences, and the result is stable-sorted by time.
pub fn preprocess(
    records: &[RawRecord],
    opts: PreprocessOptions,
) -> Result<EdgeStream, IngestError> {
    let mut first_seen: FxHashMap<Edge, usize> = FxHashMap::default();
    let mut edges: Vec<TimedEdge> = Vec::with_capacity(records.len());
    let mut duplicates = 0;
    for (index, rec) in records.iter().enumerate() {
        let edge = Edge::new(rec.left_id, rec.right_id);
        let timestamp = match opts.timestamp_field {
            None => 0,
            Some(field) => {
                let raw = rec.extras.get(field).map(String::as_str).unwrap_or("");
                parse_timestamp(raw).ok_or_else(|| IngestError::BadTimestamp {
                    index,
                    value: raw.to_string(),
                })?
            }
        };
        match first_seen.get(&edge) {
            Some(&slot) => {
                duplicates += 1;
                let kept = &mut edges[slot];
                kept.timestamp = kept.timestamp.min(timestamp);
            }
            None => {
                first_seen.insert(edge, edges.len());
                edges.push(TimedEdge::new(edge, timestamp));
            }
        }
    }
    let mut reordered = false;
    match opts.timestamp_field {
        None => {
            for (i, te) in edges.iter_mut().enumerate() {
                te.timestamp = i as u64 + 1;
            }
        }
        Some(_) => {
            if edges.windows(2).any(|w| w[1].timestamp < w[0].timestamp) {
                edges.sort_by_key(|te| te.timestamp);
                reordered = true;
            }
        }
    }
    let mut stream = EdgeStream {
        edges,
        meta: StreamMetadata {
            duplicates_removed: duplicates,
            reordered,
            ..StreamMetadata::default()
        },
    };
    stream.refresh_vertex_counts();
    Ok(stream)
}

/// Integers, or reals with an integral value such as `1.2e9`.
fn parse_timestamp(raw: &str) -> Option<u64> {
    if let Ok(v) = raw.parse::<u64>() {
        return Some(v);
    }
    let v: f64 = raw.parse().ok()?;
    (v >= 0.0 && v.fract() == 0.0 && v < u64::MAX as f64).then_some(v as u64)
}

/// Seeded uniform shuffle; timestamps become the new arrival indices.
pub fn permute(stream: &EdgeStream, seed: u64) -> EdgeStream {
    let mut rng = seeded_rng(seed);
    let mut edges: Vec<Edge> = stream.plain_edges().collect();
    edges.shuffle(&mut rng);
    let mut out = EdgeStream::from_edges(edges);
    out.meta = StreamMetadata {
        reordered: false,
        ..stream.meta.clone()
    };
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use std::collections::HashSet;

    fn rec(l: u64, r: u64) -> RawRecord {
        RawRecord {
            left_id: l,
            right_id: r,
            extras: vec![],
        }
    }

    fn rec_ts(l: u64, r: u64, ts: &str) -> RawRecord {
        RawRecord {
            left_id: l,
            right_id: r,
            extras: vec!["1".into(), ts.into()],
        }
    }

    #[test]
    fn drops_repeated_edges() {
        let s = preprocess(
            &[rec(1, 2), rec(1, 2), rec(1, 3)],
            PreprocessOptions::default(),
        )
        .unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.meta.duplicates_removed, 1);
        assert_eq!(s.edges[1], TimedEdge::new(Edge::new(1, 3), 2));
        assert_eq!((s.meta.left_vertices, s.meta.right_vertices), (1, 2));
    }

    #[test]
    fn keeps_file_timestamps() {
        let opts = PreprocessOptions {
            timestamp_field: Some(1),
        };
        let s = preprocess(
            &[rec_ts(1, 1, "5"), rec_ts(1, 2, "5"), rec_ts(2, 1, "9")],
            opts,
        )
        .unwrap();
        let ts: Vec<u64> = s.edges.iter().map(|te| te.timestamp).collect();
        assert_eq!(ts, vec![5, 5, 9]);
        assert!(!s.meta.reordered);
    }

    #[test]
    fn out_of_order_timestamps_are_sorted_and_duplicates_keep_earliest() {
        let opts = PreprocessOptions {
            timestamp_field: Some(1),
        };
        let records = [
            rec_ts(1, 1, "7"),
            rec_ts(2, 2, "3"),
            rec_ts(1, 1, "5"),
            rec_ts(3, 3, "1.2e1"),
        ];
        let s = preprocess(&records, opts).unwrap();
        let got: Vec<(u64, u64)> = s
            .edges
            .iter()
            .map(|te| (te.edge.left(), te.timestamp))
            .collect();
        assert_eq!(got, vec![(2, 3), (1, 5), (3, 12)]);
        assert!(s.meta.reordered);
    }

    #[test]
    fn bad_timestamp_is_reported() {
        let opts = PreprocessOptions {
            timestamp_field: Some(1),
        };
        let err = preprocess(&[rec_ts(1, 1, "soon")], opts).unwrap_err();
        assert!(matches!(err, IngestError::BadTimestamp { index: 0, .. }));
    }

    #[test]
    fn dedup_matches_set_oracle() {
        let mut rng = seeded_rng(12);
        let records: Vec<RawRecord> = (0..100_000)
            .map(|_| rec(rng.random_range(1..=400), rng.random_range(1..=600)))
            .collect();
        let distinct: HashSet<(u64, u64)> =
            records.iter().map(|r| (r.left_id, r.right_id)).collect();
        let s = preprocess(&records, PreprocessOptions::default()).unwrap();
        assert_eq!(s.len(), distinct.len());
        assert_eq!(s.meta.duplicates_removed, records.len() - distinct.len());
        let once: HashSet<Edge> = s.plain_edges().collect();
        assert_eq!(once.len(), s.len());
    }

    #[test]
    fn preprocess_is_idempotent() {
        let mut rng = seeded_rng(4);
        let records: Vec<RawRecord> = (0..2000)
            .map(|_| rec(rng.random_range(1..=30), rng.random_range(1..=30)))
            .collect();
        let once = preprocess(&records, PreprocessOptions::default()).unwrap();
        let again_records: Vec<RawRecord> = once
            .edges
            .iter()
            .map(|te| rec(te.edge.left(), te.edge.right()))
            .collect();
        let twice = preprocess(&again_records, PreprocessOptions::default()).unwrap();
        assert_eq!(once.edges, twice.edges);
        assert_eq!(twice.meta.duplicates_removed, 0);
    }

    #[test]
    fn permute_single_and_determinism() {
        let one = EdgeStream::from_edges([Edge::new(1, 1)]);
        assert_eq!(permute(&one, 5).edges, one.edges);
        let many = EdgeStream::from_edges((1..200).map(|i| Edge::new(i, i % 7 + 1)));
        assert_eq!(permute(&many, 8), permute(&many, 8));
        assert_ne!(permute(&many, 8).edges, many.edges);
        let ts: Vec<u64> = permute(&many, 3)
            .edges
            .iter()
            .map(|te| te.timestamp)
            .collect();
        assert_eq!(ts, (1..200).collect::<Vec<_>>());
    }

    #[test]
    fn permutation_first_position_is_uniform() {
        use rayon::prelude::*;
        let n = 10_000u64;
        let seeds = 1000u64;
        let stream = EdgeStream::from_edges((0..n).map(|i| Edge::new(i, i)));
        let firsts: Vec<u64> = (0..seeds)
            .into_par_iter()
            .map(|seed| permute(&stream, seed).edges[0].edge.left())
            .collect();
        // Bucket the 10^4 edges into 10 groups: each bucket count is
        // binomial(1000, 0.1).
        let mut buckets = [0u64; 10];
        for f in firsts {
            buckets[(f / 1000) as usize] += 1;
        }
        let mean = seeds as f64 / 10.0;
        let sigma = (seeds as f64 * 0.1 * 0.9).sqrt();
        for b in buckets {
            assert!((b as f64 - mean).abs() <= 4.0 * sigma, "bucket {b}");
        }
    }
}
