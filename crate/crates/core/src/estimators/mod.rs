//! Infinite-window estimators built on Bernoulli edge sampling.
//!
//! All adaptive variants share [`EstimatorState`]: a reservoir of sampled
//! edges, the current sampling probability `p = gamma^k`, the running
//! estimate and a private PRNG. They differ only in when the estimate is
//! refreshed relative to sampling and sub-sampling.

mod bernoulli;
mod fleet;

pub use bernoulli::Bernoulli;
pub use fleet::{Fleet1, Fleet2, Fleet3};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::exact::ButterflyCount;
use crate::graph::{BipartiteAdjacency, Edge};

/// Generator used by every randomized component: ChaCha with 8 rounds,
/// seeded through `SeedableRng::seed_from_u64`.
pub type StreamRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> StreamRng {
    StreamRng::seed_from_u64(seed)
}

pub const DEFAULT_GAMMA: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimatorError {
    #[error("reservoir capacity must be at least 1")]
    ZeroCapacity,
    #[error("gamma must lie strictly between 0 and 1, got {0}")]
    BadGamma(f64),
    #[error("sampling probability must lie in (0, 1], got {0}")]
    BadProbability(f64),
    #[error("window size must be at least 1")]
    ZeroWindow,
    #[error("max edges per window must be at least 1")]
    ZeroMaxWindowEdges,
    #[error("edge {0} arrived twice; the stream was not de-duplicated")]
    DuplicateEdge(Edge),
    #[error("timestamp {got} arrived after {latest}")]
    TimestampRegression { latest: u64, got: u64 },
    #[error("query time {query} precedes latest processed timestamp {latest}")]
    QueryInPast { latest: u64, query: u64 },
    #[error("no level retains the full window of size {window} at time {at}")]
    NoValidLevel { window: u64, at: u64 },
}

/// Capacity, resampling factor and seed shared by the adaptive estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorParams {
    pub capacity: usize,
    pub gamma: f64,
    pub seed: u64,
}

impl EstimatorParams {
    pub fn new(capacity: usize, gamma: f64, seed: u64) -> Result<Self, EstimatorError> {
        let params = EstimatorParams {
            capacity,
            gamma,
            seed,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), EstimatorError> {
        if self.capacity == 0 {
            return Err(EstimatorError::ZeroCapacity);
        }
        check_gamma(self.gamma)
    }
}

pub(crate) fn check_gamma(gamma: f64) -> Result<(), EstimatorError> {
    if gamma > 0.0 && gamma < 1.0 {
        Ok(())
    } else {
        Err(EstimatorError::BadGamma(gamma))
    }
}

/// One Bernoulli trial: a uniform draw in `[0, 1)` compared against `p`.
#[inline]
pub(crate) fn flip(rng: &mut StreamRng, p: f64) -> bool {
    rng.random::<f64>() < p
}

/// Keeps each reservoir edge with probability `retain`, drawing once per
/// edge in canonical `(left, right)` order. Returns the discarded edges.
pub(crate) fn thin(
    reservoir: &mut BipartiteAdjacency,
    retain: f64,
    rng: &mut StreamRng,
) -> Vec<Edge> {
    let mut dropped = Vec::new();
    for e in reservoir.sorted_edges() {
        if !flip(rng, retain) {
            reservoir.remove(e);
            dropped.push(e);
        }
    }
    dropped
}

/// Reservoir, sampling probability and running estimate of an adaptive
/// estimator.
#[derive(Debug, Clone)]
pub struct EstimatorState {
    reservoir: BipartiteAdjacency,
    p: f64,
    beta: f64,
    t: u64,
    params: EstimatorParams,
    rng: StreamRng,
}

impl EstimatorState {
    pub fn new(params: EstimatorParams) -> Result<Self, EstimatorError> {
        params.validate()?;
        Ok(EstimatorState {
            reservoir: BipartiteAdjacency::new(),
            p: 1.0,
            beta: 0.0,
            t: 0,
            params,
            rng: seeded_rng(params.seed),
        })
    }

    /// Lowers `p` by a factor of gamma and keeps each stored edge with
    /// probability gamma. The estimate is left alone.
    pub fn subsample(&mut self) {
        self.p *= self.params.gamma;
        thin(&mut self.reservoir, self.params.gamma, &mut self.rng);
    }

    pub fn reservoir(&self) -> &BipartiteAdjacency {
        &self.reservoir
    }

    pub fn probability(&self) -> f64 {
        self.p
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn edges_seen(&self) -> u64 {
        self.t
    }

    pub fn params(&self) -> &EstimatorParams {
        &self.params
    }

    fn reject_duplicate(&self, e: Edge) -> Result<(), EstimatorError> {
        if self.reservoir.contains(e) {
            Err(EstimatorError::DuplicateEdge(e))
        } else {
            Ok(())
        }
    }

    fn at_capacity(&self) -> bool {
        self.reservoir.len() >= self.params.capacity
    }
}

pub(crate) fn scaled(count: ButterflyCount, p: f64, power: i32) -> f64 {
    count.as_f64() * p.powi(-power)
}
