use std::collections::VecDeque;

use crate::estimators::EstimatorError;
use crate::exact::{butterflies_through, ButterflyCount};
use crate::graph::{BipartiteAdjacency, TimedEdge};

use super::window_floor;

/// Exact butterfly count over the edges with timestamp in `(c - W, c]`,
/// where `c` is the latest processed timestamp. With arrival indices as
/// timestamps this is the sequence-based window of the last `W` edges.
#[derive(Debug, Clone)]
pub struct ExactWindowCounter {
    window: u64,
    graph: BipartiteAdjacency,
    live: VecDeque<TimedEdge>,
    count: ButterflyCount,
    latest: Option<u64>,
}

impl ExactWindowCounter {
    pub fn new(window: u64) -> Result<Self, EstimatorError> {
        if window == 0 {
            return Err(EstimatorError::ZeroWindow);
        }
        Ok(ExactWindowCounter {
            window,
            graph: BipartiteAdjacency::new(),
            live: VecDeque::new(),
            count: ButterflyCount::ZERO,
            latest: None,
        })
    }

    pub fn process(&mut self, te: TimedEdge) -> Result<(), EstimatorError> {
        if let Some(latest) = self.latest {
            if te.timestamp < latest {
                return Err(EstimatorError::TimestampRegression {
                    latest,
                    got: te.timestamp,
                });
            }
        }
        if !self.graph.insert(te.edge) {
            return Err(EstimatorError::DuplicateEdge(te.edge));
        }
        self.latest = Some(te.timestamp);
        self.count += butterflies_through(te.edge, &self.graph);
        self.live.push_back(te);

        let floor = window_floor(te.timestamp, self.window);
        while let Some(old) = self.live.front().copied() {
            if old.timestamp as i128 > floor {
                break;
            }
            let lost = butterflies_through(old.edge, &self.graph);
            self.count = self
                .count
                .checked_sub(lost)
                .expect("window count underflow");
            self.graph.remove(old.edge);
            self.live.pop_front();
        }
        Ok(())
    }

    pub fn count(&self) -> ButterflyCount {
        self.count
    }

    pub fn graph(&self) -> &BipartiteAdjacency {
        &self.graph
    }

    pub fn len(&self) -> usize {
        self.live.len()
    }

    pub fn is_empty(&self) -> bool {
        self.live.is_empty()
    }
}
