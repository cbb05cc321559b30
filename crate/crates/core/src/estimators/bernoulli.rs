use crate::exact::butterflies_through;
use crate::graph::{BipartiteAdjacency, Edge};

use super::{flip, scaled, seeded_rng, EstimatorError, StreamRng};

/// Fixed-probability sampling with no memory bound. Reference estimator:
/// every edge is kept with probability `p` and each newly completed sampled
/// butterfly is weighted by `p^-4`.
#[derive(Debug, Clone)]
pub struct Bernoulli {
    reservoir: BipartiteAdjacency,
    p: f64,
    beta: f64,
    t: u64,
    rng: StreamRng,
}

impl Bernoulli {
    pub fn new(p: f64, seed: u64) -> Result<Self, EstimatorError> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(EstimatorError::BadProbability(p));
        }
        Ok(Bernoulli {
            reservoir: BipartiteAdjacency::new(),
            p,
            beta: 0.0,
            t: 0,
            rng: seeded_rng(seed),
        })
    }

    pub fn process(&mut self, e: Edge) -> Result<(), EstimatorError> {
        if self.reservoir.contains(e) {
            return Err(EstimatorError::DuplicateEdge(e));
        }
        self.t += 1;
        if flip(&mut self.rng, self.p) {
            self.reservoir.insert(e);
            self.beta += scaled(butterflies_through(e, &self.reservoir), self.p, 4);
        }
        Ok(())
    }

    pub fn estimate(&self) -> f64 {
        self.beta
    }

    pub fn probability(&self) -> f64 {
        self.p
    }

    pub fn edges_seen(&self) -> u64 {
        self.t
    }

    pub fn reservoir(&self) -> &BipartiteAdjacency {
        &self.reservoir
    }
}
