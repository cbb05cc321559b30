use std::collections::BTreeMap;

use rustc_hash::FxHashMap;

use crate::estimators::{check_gamma, flip, seeded_rng, thin, EstimatorError, StreamRng};
use crate::exact::{butterflies_through, count_butterflies_exact, ButterflyCount};
use crate::graph::{BipartiteAdjacency, Edge};

use super::window_floor;

/// Counters for conditions the estimator tolerates but a caller may want
/// to hear about.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SeqWinTelemetry {
    /// Expirations that happened while `p` was still above its floor.
    pub transition_expiries: u64,
    /// Steps that ended with at least `2M` stored edges.
    pub oversize_steps: u64,
}

/// Sequence-based sliding window over the last `W` arrivals.
///
/// Until `p` reaches its floor `M/W` this runs adaptive sampling with
/// recomputation on every sub-sample; afterwards `p` stays at the floor
/// and the reservoir is allowed to float around `M`. Each stored edge
/// carries its arrival index and is dropped (with its butterflies debited)
/// once it leaves the window.
#[derive(Debug, Clone)]
pub struct SeqWin {
    reservoir: BipartiteAdjacency,
    by_arrival: BTreeMap<u64, Edge>,
    arrival: FxHashMap<Edge, u64>,
    p: f64,
    floor_p: f64,
    beta: f64,
    t: u64,
    capacity: usize,
    window: u64,
    gamma: f64,
    rng: StreamRng,
    telemetry: SeqWinTelemetry,
}

impl SeqWin {
    pub fn new(
        capacity: usize,
        window: u64,
        gamma: f64,
        seed: u64,
    ) -> Result<Self, EstimatorError> {
        if capacity == 0 {
            return Err(EstimatorError::ZeroCapacity);
        }
        if window == 0 {
            return Err(EstimatorError::ZeroWindow);
        }
        check_gamma(gamma)?;
        Ok(SeqWin {
            reservoir: BipartiteAdjacency::new(),
            by_arrival: BTreeMap::new(),
            arrival: FxHashMap::default(),
            p: 1.0,
            floor_p: (capacity as f64 / window as f64).min(1.0),
            beta: 0.0,
            t: 0,
            capacity,
            window,
            gamma,
            rng: seeded_rng(seed),
            telemetry: SeqWinTelemetry::default(),
        })
    }

    pub fn process(&mut self, e: Edge) -> Result<(), EstimatorError> {
        if self.reservoir.contains(e) {
            return Err(EstimatorError::DuplicateEdge(e));
        }
        self.t += 1;

        while self.p > self.floor_p && self.reservoir.len() >= self.capacity {
            // A step that would undershoot the floor lands on it exactly.
            let (next, retain) = if self.p * self.gamma < self.floor_p {
                (self.floor_p, self.floor_p / self.p)
            } else {
                (self.p * self.gamma, self.gamma)
            };
            for gone in thin(&mut self.reservoir, retain, &mut self.rng) {
                let t = self
                    .arrival
                    .remove(&gone)
                    .expect("stored edge without arrival");
                self.by_arrival.remove(&t);
            }
            self.p = next;
            self.beta = self.weight(count_butterflies_exact(&self.reservoir));
        }

        if flip(&mut self.rng, self.p) {
            self.reservoir.insert(e);
            self.by_arrival.insert(self.t, e);
            self.arrival.insert(e, self.t);
            self.beta += self.weight(butterflies_through(e, &self.reservoir));
        }

        let floor = window_floor(self.t, self.window);
        while let Some((&t_old, &old)) = self.by_arrival.first_key_value() {
            if t_old as i128 > floor {
                break;
            }
            self.beta -= self.weight(butterflies_through(old, &self.reservoir));
            self.reservoir.remove(old);
            self.by_arrival.remove(&t_old);
            self.arrival.remove(&old);
            if self.p > self.floor_p {
                self.telemetry.transition_expiries += 1;
            }
        }

        if self.reservoir.len() >= 2 * self.capacity {
            if self.telemetry.oversize_steps == 0 {
                log::warn!(
                    "sliding-window reservoir reached {} edges (2M = {}) at t = {}",
                    self.reservoir.len(),
                    2 * self.capacity,
                    self.t
                );
            }
            self.telemetry.oversize_steps += 1;
        }
        Ok(())
    }

    fn weight(&self, count: ButterflyCount) -> f64 {
        count.as_f64() * self.p.powi(-4)
    }

    pub fn estimate(&self) -> f64 {
        self.beta
    }

    pub fn probability(&self) -> f64 {
        self.p
    }

    pub fn floor_probability(&self) -> f64 {
        self.floor_p
    }

    pub fn edges_seen(&self) -> u64 {
        self.t
    }

    pub fn reservoir(&self) -> &BipartiteAdjacency {
        &self.reservoir
    }

    /// Stored edges with their arrival indices, oldest first.
    pub fn stored(&self) -> impl Iterator<Item = (u64, Edge)> + '_ {
        self.by_arrival.iter().map(|(&t, &e)| (t, e))
    }

    pub fn telemetry(&self) -> SeqWinTelemetry {
        self.telemetry
    }
}
