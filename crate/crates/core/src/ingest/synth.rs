use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rustc_hash::FxHashSet;

use crate::estimators::seeded_rng;
use crate::graph::Edge;

use super::{EdgeStream, IngestError};

/// Desk-scale synthetic stream families.
///
/// Textual form (as accepted by `--synth`): `biclique:A,B`,
/// `blocks:COUNT,A,B,NOISE` or `random:NL,NR,M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthSpec {
    /// All `a * b` edges of `K_{a,b}` in shuffled order.
    CompleteBiclique { a: u64, b: u64 },
    /// `count` vertex-disjoint copies of `K_{a,b}`, each emitted as a
    /// contiguous shuffled run and followed by `noise` sparse random edges
    /// on a separate vertex pool.
    PlantedBlocks {
        count: u64,
        a: u64,
        b: u64,
        noise: u64,
    },
    /// `m` distinct uniformly random edges of `K_{n_left,n_right}`.
    Random { n_left: u64, n_right: u64, m: u64 },
}

impl fmt::Display for SynthSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SynthSpec::CompleteBiclique { a, b } => write!(f, "biclique:{a},{b}"),
            SynthSpec::PlantedBlocks { count, a, b, noise } => {
                write!(f, "blocks:{count},{a},{b},{noise}")
            }
            SynthSpec::Random { n_left, n_right, m } => write!(f, "random:{n_left},{n_right},{m}"),
        }
    }
}

impl FromStr for SynthSpec {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || IngestError::BadSynth(format!("cannot parse {s:?}"));
        let (kind, args) = s.split_once(':').ok_or_else(bad)?;
        let nums: Vec<u64> = args
            .split(',')
            .map(|x| x.trim().parse::<u64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?;
        match (kind.trim().to_ascii_lowercase().as_str(), nums.as_slice()) {
            ("biclique", &[a, b]) => Ok(SynthSpec::CompleteBiclique { a, b }),
            ("blocks", &[count, a, b, noise]) => {
                Ok(SynthSpec::PlantedBlocks { count, a, b, noise })
            }
            ("random", &[n_left, n_right, m]) => Ok(SynthSpec::Random { n_left, n_right, m }),
            _ => Err(bad()),
        }
    }
}

fn positive(values: &[(&str, u64)]) -> Result<(), IngestError> {
    match values.iter().find(|(_, v)| *v == 0) {
        Some((name, _)) => Err(IngestError::BadSynth(format!("{name} must be positive"))),
        None => Ok(()),
    }
}

/// Generates the stream described by `spec`; identical seeds give identical
/// streams. Vertex ids start at 1 on both sides.
pub fn synth_stream(spec: SynthSpec, seed: u64) -> Result<EdgeStream, IngestError> {
    let mut rng = seeded_rng(seed);
    let edges = match spec {
        SynthSpec::CompleteBiclique { a, b } => {
            positive(&[("a", a), ("b", b)])?;
            let mut edges = biclique(1, 1, a, b);
            edges.shuffle(&mut rng);
            edges
        }
        SynthSpec::PlantedBlocks { count, a, b, noise } => {
            positive(&[("count", count), ("a", a), ("b", b)])?;
            let pool = (noise * count).max(4);
            let noise_left = count * a + 1;
            let noise_right = count * b + 1;
            let mut taken = FxHashSet::default();
            let mut edges = Vec::with_capacity((count * (a * b + noise)) as usize);
            for block in 0..count {
                let mut run = biclique(block * a + 1, block * b + 1, a, b);
                run.shuffle(&mut rng);
                edges.extend(run);
                let mut added = 0;
                while added < noise {
                    let e = Edge::new(
                        noise_left + rng.random_range(0..pool),
                        noise_right + rng.random_range(0..pool),
                    );
                    if taken.insert(e) {
                        edges.push(e);
                        added += 1;
                    }
                }
            }
            edges
        }
        SynthSpec::Random { n_left, n_right, m } => {
            positive(&[("n_left", n_left), ("n_right", n_right), ("m", m)])?;
            let total = n_left
                .checked_mul(n_right)
                .ok_or_else(|| IngestError::BadSynth("n_left * n_right overflows".into()))?;
            if m > total {
                return Err(IngestError::BadSynth(format!(
                    "m = {m} exceeds the {total} possible edges"
                )));
            }
            if 2 * m > total {
                let mut all = biclique(1, 1, n_left, n_right);
                all.shuffle(&mut rng);
                all.truncate(m as usize);
                all
            } else {
                let mut taken = FxHashSet::default();
                let mut edges = Vec::with_capacity(m as usize);
                while edges.len() < m as usize {
                    let e = Edge::new(
                        1 + rng.random_range(0..n_left),
                        1 + rng.random_range(0..n_right),
                    );
                    if taken.insert(e) {
                        edges.push(e);
                    }
                }
                edges
            }
        }
    };
    Ok(EdgeStream::from_edges(edges))
}

fn biclique(first_left: u64, first_right: u64, a: u64, b: u64) -> Vec<Edge> {
    (first_left..first_left + a)
        .flat_map(|l| (first_right..first_right + b).map(move |r| Edge::new(l, r)))
        .collect()
}
