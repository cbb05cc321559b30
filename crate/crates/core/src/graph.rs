//! Vertex and edge types plus the dynamic bipartite adjacency index that
//! every counter, estimator and reservoir is built on.

use std::fmt;

use rustc_hash::{FxHashMap, FxHashSet};
use thiserror::Error;

/// Neighbor set of one vertex. Members are raw ids on the opposite side.
pub type NeighborSet = FxHashSet<u64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// A vertex is identified by its partition plus a raw id, so the same
/// integer on both sides names two different vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId {
    pub side: Side,
    pub id: u64,
}

impl VertexId {
    pub fn left(id: u64) -> Self {
        VertexId {
            side: Side::Left,
            id,
        }
    }

    pub fn right(id: u64) -> Self {
        VertexId {
            side: Side::Right,
            id,
        }
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.side {
            Side::Left => write!(f, "L{}", self.id),
            Side::Right => write!(f, "R{}", self.id),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("edge endpoints {0} and {1} lie in the same partition")]
    SamePartition(VertexId, VertexId),
}

/// An undirected edge between a left and a right vertex.
///
/// Ordering is lexicographic on `(left, right)`, which is the canonical
/// order used wherever reservoir contents have to be walked reproducibly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    left: u64,
    right: u64,
}

impl Edge {
    pub fn new(left: u64, right: u64) -> Self {
        Edge { left, right }
    }

    /// Builds an edge from two tagged vertices given in either order.
    pub fn from_vertices(a: VertexId, b: VertexId) -> Result<Self, GraphError> {
        match (a.side, b.side) {
            (Side::Left, Side::Right) => Ok(Edge::new(a.id, b.id)),
            (Side::Right, Side::Left) => Ok(Edge::new(b.id, a.id)),
            _ => Err(GraphError::SamePartition(a, b)),
        }
    }

    pub fn left(&self) -> u64 {
        self.left
    }

    pub fn right(&self) -> u64 {
        self.right
    }

    pub fn left_vertex(&self) -> VertexId {
        VertexId::left(self.left)
    }

    pub fn right_vertex(&self) -> VertexId {
        VertexId::right(self.right)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(L{},R{})", self.left, self.right)
    }
}

/// An edge stamped with its arrival time in abstract units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TimedEdge {
    pub edge: Edge,
    pub timestamp: u64,
}

impl TimedEdge {
    pub fn new(edge: Edge, timestamp: u64) -> Self {
        TimedEdge { edge, timestamp }
    }
}

/// Dynamic adjacency over a simple bipartite edge set.
///
/// Both directions are indexed so neighbor lookups from either partition
/// are O(1). Vertices whose degree drops to zero are dropped from the index.
#[derive(Debug, Clone, Default)]
pub struct BipartiteAdjacency {
    left: FxHashMap<u64, NeighborSet>,
    right: FxHashMap<u64, NeighborSet>,
    edges: usize,
}

impl BipartiteAdjacency {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts `e`; returns `false` and leaves the index untouched when the
    /// edge is already present.
    pub fn insert(&mut self, e: Edge) -> bool {
        let fresh = self.left.entry(e.left).or_default().insert(e.right);
        if fresh {
            self.right.entry(e.right).or_default().insert(e.left);
            self.edges += 1;
        }
        self.debug_check_edge(e, true);
        fresh
    }

    /// Removes `e`; returns `false` when it was not present.
    pub fn remove(&mut self, e: Edge) -> bool {
        let Some(rights) = self.left.get_mut(&e.left) else {
            return false;
        };
        if !rights.remove(&e.right) {
            return false;
        }
        if rights.is_empty() {
            self.left.remove(&e.left);
        }
        let lefts = self
            .right
            .get_mut(&e.right)
            .expect("adjacency lost symmetry");
        lefts.remove(&e.left);
        if lefts.is_empty() {
            self.right.remove(&e.right);
        }
        self.edges -= 1;
        self.debug_check_edge(e, false);
        true
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.left
            .get(&e.left)
            .is_some_and(|rights| rights.contains(&e.right))
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.edges
    }

    pub fn is_empty(&self) -> bool {
        self.edges == 0
    }

    pub fn clear(&mut self) {
        self.left.clear();
        self.right.clear();
        self.edges = 0;
    }

    pub fn left_count(&self) -> usize {
        self.left.len()
    }

    pub fn right_count(&self) -> usize {
        self.right.len()
    }

    /// Raw neighbor set of a vertex, if it has any edges.
    pub fn neighbor_set(&self, v: VertexId) -> Option<&NeighborSet> {
        self.side_map(v.side).get(&v.id)
    }

    /// Neighbors of `v` as tagged vertices; empty when `v` is absent.
    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        let side = v.side.opposite();
        self.neighbor_set(v)
            .into_iter()
            .flat_map(move |set| set.iter().map(move |&id| VertexId { side, id }))
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.neighbor_set(v).map_or(0, |s| s.len())
    }

    /// Vertices with at least one edge on the given side, with their neighbor sets.
    pub fn vertices(&self, side: Side) -> impl Iterator<Item = (u64, &NeighborSet)> + '_ {
        self.side_map(side).iter().map(|(&id, set)| (id, set))
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.left
            .iter()
            .flat_map(|(&l, rights)| rights.iter().map(move |&r| Edge::new(l, r)))
    }

    /// All edges in canonical `(left, right)` order.
    pub fn sorted_edges(&self) -> Vec<Edge> {
        let mut out: Vec<Edge> = self.edges().collect();
        out.sort_unstable();
        out
    }

    /// Full structural check: symmetry, no empty sets, and edge count.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut half_degree_sum = 0usize;
        for (side, map) in [(Side::Left, &self.left), (Side::Right, &self.right)] {
            let other = self.side_map(side.opposite());
            for (&id, set) in map {
                if set.is_empty() {
                    return Err(format!(
                        "{} kept with empty neighbor set",
                        VertexId { side, id }
                    ));
                }
                for n in set {
                    if !other.get(n).is_some_and(|back| back.contains(&id)) {
                        return Err(format!(
                            "asymmetric adjacency at {} -> {}",
                            VertexId { side, id },
                            VertexId {
                                side: side.opposite(),
                                id: *n
                            }
                        ));
                    }
                }
                half_degree_sum += set.len();
            }
        }
        if half_degree_sum != 2 * self.edges {
            return Err(format!(
                "edge count {} disagrees with degree sum {}",
                self.edges, half_degree_sum
            ));
        }
        Ok(())
    }

    fn side_map(&self, side: Side) -> &FxHashMap<u64, NeighborSet> {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    #[inline]
    fn debug_check_edge(&self, e: Edge, present: bool) {
        debug_assert_eq!(self.contains(e), present);
        debug_assert_eq!(
            self.right
                .get(&e.right)
                .is_some_and(|lefts| lefts.contains(&e.left)),
            present,
            "adjacency lost symmetry at {e}"
        );
    }
}

impl FromIterator<Edge> for BipartiteAdjacency {
    fn from_iter<I: IntoIterator<Item = Edge>>(iter: I) -> Self {
        let mut adj = BipartiteAdjacency::new();
        for e in iter {
            adj.insert(e);
        }
        adj
    }
}

impl PartialEq for BipartiteAdjacency {
    fn eq(&self, other: &Self) -> bool {
        self.edges == other.edges && self.left == other.left
    }
}

impl Eq for BipartiteAdjacency {}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn four_cycle() -> BipartiteAdjacency {
        [(0, 0), (0, 1), (1, 0), (1, 1)]
            .into_iter()
            .map(|(l, r)| Edge::new(l, r))
            .collect()
    }

    #[test]
    fn insert_reports_novelty() {
        let mut adj = BipartiteAdjacency::new();
        assert!(adj.insert(Edge::new(0, 0)));
        assert_eq!(adj.len(), 1);
        assert!(!adj.insert(Edge::new(0, 0)));
        assert_eq!(adj.len(), 1);
        assert!(adj.insert(Edge::new(0, 1)));
        let n: BTreeSet<_> = adj.neighbors(VertexId::left(0)).collect();
        assert_eq!(n, BTreeSet::from([VertexId::right(0), VertexId::right(1)]));
    }

    #[test]
    fn remove_present_and_absent() {
        let mut adj: BipartiteAdjacency = [Edge::new(0, 0)].into_iter().collect();
        assert!(!adj.remove(Edge::new(1, 0)));
        assert_eq!(adj.len(), 1);
        assert!(adj.remove(Edge::new(0, 0)));
        assert!(adj.is_empty());
        assert_eq!(adj.left_count(), 0);
        assert_eq!(adj.right_count(), 0);
        adj.check_invariants().unwrap();
    }

    #[test]
    fn neighbors_of_missing_vertex_is_empty() {
        let adj = four_cycle();
        assert_eq!(adj.neighbors(VertexId::left(7)).count(), 0);
        let n: BTreeSet<_> = adj.neighbors(VertexId::left(0)).collect();
        assert_eq!(n, BTreeSet::from([VertexId::right(0), VertexId::right(1)]));
    }

    #[test]
    fn colliding_raw_ids_stay_distinct() {
        let adj: BipartiteAdjacency = [Edge::new(1, 1)].into_iter().collect();
        assert_eq!(adj.degree(VertexId::left(1)), 1);
        assert_eq!(adj.degree(VertexId::right(1)), 1);
        assert!(!adj
            .neighbors(VertexId::left(1))
            .any(|v| v == VertexId::left(1)));
    }

    #[test]
    fn same_partition_rejected() {
        assert!(Edge::from_vertices(VertexId::left(1), VertexId::left(2)).is_err());
        assert_eq!(
            Edge::from_vertices(VertexId::right(4), VertexId::left(2)).unwrap(),
            Edge::new(2, 4)
        );
    }

    #[test]
    fn random_insert_remove_matches_edge_set() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let edges: Vec<Edge> = (0..1000)
            .map(|_| Edge::new(rng.random_range(0..40), rng.random_range(0..40)))
            .collect();
        let mut adj = BipartiteAdjacency::new();
        let mut oracle = BTreeSet::new();
        for &e in &edges {
            assert_eq!(adj.insert(e), oracle.insert(e));
        }
        let mut order = edges.clone();
        for i in (1..order.len()).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        for &e in order.iter().take(600) {
            assert_eq!(adj.remove(e), oracle.remove(&e));
        }
        adj.check_invariants().unwrap();
        assert_eq!(adj.sorted_edges(), oracle.into_iter().collect::<Vec<_>>());
    }

    #[test]
    fn neighbors_match_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let edges: Vec<Edge> = (0..300)
            .map(|_| Edge::new(rng.random_range(0..25), rng.random_range(0..25)))
            .collect();
        let adj: BipartiteAdjacency = edges.iter().copied().collect();
        for id in 0..25 {
            let scan: BTreeSet<_> = edges
                .iter()
                .filter(|e| e.left() == id)
                .map(|e| e.right_vertex())
                .collect();
            let got: BTreeSet<_> = adj.neighbors(VertexId::left(id)).collect();
            assert_eq!(got, scan);
        }
    }

    proptest! {
        #[test]
        fn invariants_hold_under_any_interleaving(
            ops in prop::collection::vec((any::<bool>(), 0u64..8, 0u64..8), 0..200)
        ) {
            let mut adj = BipartiteAdjacency::new();
            for (insert, l, r) in ops {
                let e = Edge::new(l, r);
                if insert { adj.insert(e); } else { adj.remove(e); }
                prop_assert!(adj.check_invariants().is_ok());
            }
        }

        #[test]
        fn insertion_order_is_irrelevant(
            mut edges in prop::collection::vec((0u64..10, 0u64..10), 0..60),
        ) {
            let a: BipartiteAdjacency = edges.iter().map(|&(l, r)| Edge::new(l, r)).collect();
            edges.reverse();
            let b: BipartiteAdjacency = edges.iter().map(|&(l, r)| Edge::new(l, r)).collect();
            prop_assert_eq!(a, b);
        }
    }
}
