//! Exact butterfly counting: global counts, per-edge counts, and the
//! incremental running count used as ground truth.

use std::fmt;
use std::ops::{Add, AddAssign};

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::graph::{BipartiteAdjacency, Edge, NeighborSet, Side, VertexId};

/// An exact butterfly tally.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ButterflyCount(pub u64);

impl ButterflyCount {
    pub const ZERO: ButterflyCount = ButterflyCount(0);

    pub fn get(self) -> u64 {
        self.0
    }

    /// Lossless conversion to `f64`; counts above 2^53 are rejected.
    pub fn as_f64(self) -> f64 {
        assert!(
            self.0 <= 1 << 53,
            "butterfly count {} is not exactly representable as f64",
            self.0
        );
        self.0 as f64
    }

    pub fn checked_sub(self, rhs: ButterflyCount) -> Option<ButterflyCount> {
        self.0.checked_sub(rhs.0).map(ButterflyCount)
    }
}

impl Add for ButterflyCount {
    type Output = ButterflyCount;

    fn add(self, rhs: Self) -> Self {
        ButterflyCount(self.0.checked_add(rhs.0).expect("butterfly count overflow"))
    }
}

impl AddAssign for ButterflyCount {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl From<u64> for ButterflyCount {
    fn from(v: u64) -> Self {
        ButterflyCount(v)
    }
}

impl fmt::Display for ButterflyCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CountError {
    #[error("brute-force enumeration over {left}x{right} vertices exceeds the 1e8 work guard")]
    InstanceTooLarge { left: usize, right: usize },
    #[error("edge {0} is not in the graph")]
    MissingEdge(Edge),
    #[error("edge {edge} repeated at stream position {position}")]
    DuplicateEdge { edge: Edge, position: usize },
}

/// Upper bound on `|L|^2 * |R|^2` accepted by [`count_butterflies_brute`].
pub const BRUTE_FORCE_GUARD: u128 = 100_000_000;

fn choose2(m: u64) -> u64 {
    m * m.saturating_sub(1) / 2
}

/// Exact number of butterflies in `adj`.
///
/// Wedges are enumerated from the side whose opposite partition has the
/// smaller `sum(deg^2)`, since that sum bounds the wedge walk. For every
/// start vertex `v` the co-neighbor multiplicities `m(v, w)` with `w > v`
/// are tallied and `C(m, 2)` summed.
pub fn count_butterflies_exact(adj: &BipartiteAdjacency) -> ButterflyCount {
    let wedge_cost = |side: Side| -> u128 {
        adj.vertices(side)
            .map(|(_, set)| (set.len() as u128).pow(2))
            .sum()
    };
    // Starting from Left walks wedges centred on Right vertices.
    let start = if wedge_cost(Side::Right) <= wedge_cost(Side::Left) {
        Side::Left
    } else {
        Side::Right
    };
    let middle = start.opposite();

    let mut multiplicity: FxHashMap<u64, u64> = FxHashMap::default();
    let mut total = ButterflyCount::ZERO;
    for (v, mids) in adj.vertices(start) {
        multiplicity.clear();
        for &m in mids {
            let ends = adj
                .neighbor_set(VertexId {
                    side: middle,
                    id: m,
                })
                .expect("neighbor without back edge");
            for &w in ends {
                if w > v {
                    *multiplicity.entry(w).or_insert(0) += 1;
                }
            }
        }
        for &m in multiplicity.values() {
            total += ButterflyCount(choose2(m));
        }
    }
    total
}

/// Quartic enumeration over all left pairs and right pairs. Test oracle only.
pub fn count_butterflies_brute(adj: &BipartiteAdjacency) -> Result<ButterflyCount, CountError> {
    let mut lefts: Vec<u64> = adj.vertices(Side::Left).map(|(id, _)| id).collect();
    let mut rights: Vec<u64> = adj.vertices(Side::Right).map(|(id, _)| id).collect();
    let work = (lefts.len() as u128).pow(2) * (rights.len() as u128).pow(2);
    if work > BRUTE_FORCE_GUARD {
        return Err(CountError::InstanceTooLarge {
            left: lefts.len(),
            right: rights.len(),
        });
    }
    lefts.sort_unstable();
    rights.sort_unstable();
    let mut total = 0u64;
    for (i, &a) in lefts.iter().enumerate() {
        for &b in &lefts[i + 1..] {
            for (j, &x) in rights.iter().enumerate() {
                for &y in &rights[j + 1..] {
                    let all = [(a, x), (a, y), (b, x), (b, y)]
                        .into_iter()
                        .all(|(l, r)| adj.contains(Edge::new(l, r)));
                    if all {
                        total += 1;
                    }
                }
            }
        }
    }
    Ok(ButterflyCount(total))
}

/// Size of `a ∩ b` with `skip` excluded, probing the larger set.
fn intersection_without(a: &NeighborSet, b: &NeighborSet, skip: u64) -> u64 {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    small
        .iter()
        .filter(|&&x| x != skip && large.contains(&x))
        .count() as u64
}

/// Butterflies that `e` forms with edges of `adj`, whether or not `e`
/// itself is stored there. Both endpoints of `e` are excluded explicitly,
/// so the result is the same in either case.
pub(crate) fn butterflies_through(e: Edge, adj: &BipartiteAdjacency) -> ButterflyCount {
    let (u, v) = (e.left(), e.right());
    let (Some(u_rights), Some(v_lefts)) = (
        adj.neighbor_set(VertexId::left(u)),
        adj.neighbor_set(VertexId::right(v)),
    ) else {
        return ButterflyCount::ZERO;
    };
    let mut total = 0u64;
    for &other in v_lefts {
        if other == u {
            continue;
        }
        let other_rights = adj
            .neighbor_set(VertexId::left(other))
            .expect("neighbor without back edge");
        total += intersection_without(other_rights, u_rights, v);
    }
    ButterflyCount(total)
}

/// Number of butterflies of `adj` that contain `e`. The edge must be present.
pub fn count_per_edge(e: Edge, adj: &BipartiteAdjacency) -> Result<ButterflyCount, CountError> {
    if !adj.contains(e) {
        return Err(CountError::MissingEdge(e));
    }
    Ok(butterflies_through(e, adj))
}

/// Largest per-edge butterfly count in `adj`; zero for an empty graph.
pub fn max_per_edge(adj: &BipartiteAdjacency) -> ButterflyCount {
    adj.edges()
        .map(|e| butterflies_through(e, adj))
        .max()
        .unwrap_or(ButterflyCount::ZERO)
}

/// Incrementally maintained exact count over a growing simple graph.
#[derive(Debug, Clone, Default)]
pub struct ExactCounter {
    graph: BipartiteAdjacency,
    count: ButterflyCount,
}

impl ExactCounter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `e` and returns the butterflies it completed.
    pub fn insert(&mut self, e: Edge) -> Result<ButterflyCount, Edge> {
        if !self.graph.insert(e) {
            return Err(e);
        }
        let gained = butterflies_through(e, &self.graph);
        self.count += gained;
        Ok(gained)
    }

    pub fn count(&self) -> ButterflyCount {
        self.count
    }

    pub fn graph(&self) -> &BipartiteAdjacency {
        &self.graph
    }
}

/// Exact count after every prefix of a duplicate-free stream.
pub fn exact_running_count<I>(stream: I) -> Result<Vec<ButterflyCount>, CountError>
where
    I: IntoIterator<Item = Edge>,
{
    let mut counter = ExactCounter::new();
    stream
        .into_iter()
        .enumerate()
        .map(|(position, e)| {
            counter
                .insert(e)
                .map(|_| counter.count())
                .map_err(|edge| CountError::DuplicateEdge { edge, position })
        })
        .collect()
}
