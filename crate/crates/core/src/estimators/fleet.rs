use crate::exact::{butterflies_through, count_butterflies_exact};
use crate::graph::Edge;

use super::{flip, scaled, EstimatorError, EstimatorParams, EstimatorState};

/// Adaptive sampling that recomputes the sampled count from scratch after
/// every sub-sampling step.
#[derive(Debug, Clone)]
pub struct Fleet1 {
    state: EstimatorState,
}

/// Like [`Fleet1`], but butterflies credited at earlier levels survive
/// sub-sampling: the estimate is never recomputed, only accumulated.
#[derive(Debug, Clone)]
pub struct Fleet2 {
    state: EstimatorState,
}

/// Counts the butterflies an arriving edge closes against the reservoir,
/// weighted by `p^-3`, before deciding whether to sample that edge.
#[derive(Debug, Clone)]
pub struct Fleet3 {
    state: EstimatorState,
}

macro_rules! state_accessors {
    ($ty:ident) => {
        impl $ty {
            pub fn new(params: EstimatorParams) -> Result<Self, EstimatorError> {
                Ok($ty {
                    state: EstimatorState::new(params)?,
                })
            }

            pub fn estimate(&self) -> f64 {
                self.state.beta
            }

            pub fn state(&self) -> &EstimatorState {
                &self.state
            }
        }
    };
}

state_accessors!(Fleet1);
state_accessors!(Fleet2);
state_accessors!(Fleet3);

impl Fleet1 {
    pub fn process(&mut self, e: Edge) -> Result<(), EstimatorError> {
        let s = &mut self.state;
        s.reject_duplicate(e)?;
        s.t += 1;
        while s.at_capacity() {
            s.subsample();
            s.beta = scaled(count_butterflies_exact(&s.reservoir), s.p, 4);
        }
        if flip(&mut s.rng, s.p) {
            s.reservoir.insert(e);
            s.beta += scaled(butterflies_through(e, &s.reservoir), s.p, 4);
        }
        Ok(())
    }
}

impl Fleet2 {
    pub fn process(&mut self, e: Edge) -> Result<(), EstimatorError> {
        let s = &mut self.state;
        s.reject_duplicate(e)?;
        s.t += 1;
        while s.at_capacity() {
            s.subsample();
        }
        if flip(&mut s.rng, s.p) {
            s.reservoir.insert(e);
            s.beta += scaled(butterflies_through(e, &s.reservoir), s.p, 4);
        }
        Ok(())
    }
}

impl Fleet3 {
    pub fn process(&mut self, e: Edge) -> Result<(), EstimatorError> {
        let s = &mut self.state;
        s.reject_duplicate(e)?;
        s.t += 1;
        // p before the capacity check weights the closed butterflies.
        s.beta += scaled(butterflies_through(e, &s.reservoir), s.p, 3);
        while s.at_capacity() {
            s.subsample();
        }
        if flip(&mut s.rng, s.p) {
            s.reservoir.insert(e);
        }
        Ok(())
    }
}
