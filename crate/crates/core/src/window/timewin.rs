use std::collections::VecDeque;

use crate::estimators::{check_gamma, flip, seeded_rng, EstimatorError, StreamRng};
use crate::exact::count_butterflies_exact;
use crate::graph::{BipartiteAdjacency, TimedEdge};

use super::window_floor;

/// Time-based sliding window answered at query time.
///
/// Level `l` holds the most recent `M' = floor(M / T)` edges of a sample
/// in which every edge survives with probability `gamma^l`; inserts cascade
/// one level deeper on each heads. A query picks the shallowest level whose
/// evictions all predate the window and scales its count by `gamma^(-4l)`.
#[derive(Debug, Clone)]
pub struct TimeWin {
    levels: Vec<VecDeque<TimedEdge>>,
    last_discard: Vec<Option<u64>>,
    level_capacity: usize,
    gamma: f64,
    max_window_edges: u64,
    latest: Option<u64>,
    rng: StreamRng,
}

/// Number of levels for budget `M` and at most `n_max` edges per window:
/// `ceil(1 + log_gamma(M / n_max))`, at least one.
pub fn level_count(capacity: usize, gamma: f64, max_window_edges: u64) -> usize {
    let ratio = capacity as f64 / max_window_edges as f64;
    let raw = 1.0 + ratio.ln() / gamma.ln();
    // Exact powers of gamma must not round up to an extra level.
    let levels = (raw - 1e-9).ceil();
    if levels < 1.0 {
        1
    } else {
        levels as usize
    }
}

impl TimeWin {
    pub fn new(
        capacity: usize,
        gamma: f64,
        max_window_edges: u64,
        seed: u64,
    ) -> Result<Self, EstimatorError> {
        if capacity == 0 {
            return Err(EstimatorError::ZeroCapacity);
        }
        if max_window_edges == 0 {
            return Err(EstimatorError::ZeroMaxWindowEdges);
        }
        check_gamma(gamma)?;
        let levels = level_count(capacity, gamma, max_window_edges);
        Ok(TimeWin {
            levels: vec![VecDeque::new(); levels],
            last_discard: vec![None; levels],
            level_capacity: (capacity / levels).max(1),
            gamma,
            max_window_edges,
            latest: None,
            rng: seeded_rng(seed),
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
        self.latest = Some(te.timestamp);
        let depth = self.levels.len();
        let mut level = 0;
        loop {
            let queue = &mut self.levels[level];
            queue.push_back(te);
            if queue.len() > self.level_capacity {
                let evicted = queue.pop_front().expect("queue over capacity is non-empty");
                self.last_discard[level] = Some(evicted.timestamp);
            }
            level += 1;
            if level >= depth || !flip(&mut self.rng, self.gamma) {
                break;
            }
        }
        Ok(())
    }

    /// Level that would answer a query for window `window` at time `at`.
    pub fn query_level(&self, window: u64, at: u64) -> Result<usize, EstimatorError> {
        if window == 0 {
            return Err(EstimatorError::ZeroWindow);
        }
        if let Some(latest) = self.latest {
            if at < latest {
                return Err(EstimatorError::QueryInPast { latest, query: at });
            }
        }
        let floor = window_floor(at, window);
        self.last_discard
            .iter()
            .position(|d| d.is_none_or(|d| d as i128 <= floor))
            .ok_or(EstimatorError::NoValidLevel { window, at })
    }

    /// Estimated butterflies among edges with timestamp in `(at - window, at]`.
    pub fn query(&self, window: u64, at: u64) -> Result<f64, EstimatorError> {
        let level = self.query_level(window, at)?;
        let floor = window_floor(at, window);
        let sample: BipartiteAdjacency = self.levels[level]
            .iter()
            .filter(|te| te.timestamp as i128 > floor)
            .map(|te| te.edge)
            .collect();
        let count = count_butterflies_exact(&sample).as_f64();
        Ok(count * self.gamma.powi(-4 * level as i32))
    }

    pub fn levels(&self) -> usize {
        self.levels.len()
    }

    pub fn level_capacity(&self) -> usize {
        self.level_capacity
    }

    pub fn level(&self, level: usize) -> &VecDeque<TimedEdge> {
        &self.levels[level]
    }

    /// Timestamp of the latest eviction from `level`, 0 if none yet.
    pub fn discard_time(&self, level: usize) -> u64 {
        self.last_discard[level].unwrap_or(0)
    }

    pub fn latest_timestamp(&self) -> Option<u64> {
        self.latest
    }

    pub fn max_window_edges(&self) -> u64 {
        self.max_window_edges
    }

    pub fn stored_edges(&self) -> usize {
        self.levels.iter().map(VecDeque::len).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;

    fn te(l: u64, r: u64, t: u64) -> TimedEdge {
        TimedEdge::new(Edge::new(l, r), t)
    }

    #[test]
    fn level_count_formula() {
        assert_eq!(level_count(10_000, 0.5, 100_000), 5);
        assert_eq!(level_count(25, 0.5, 100), 3);
        assert_eq!(level_count(100, 0.5, 100), 1);
        assert_eq!(level_count(500, 0.5, 100), 1);
    }

    #[test]
    fn fifo_eviction_on_level_zero() {
        // T = 1, M' = 3.
        let mut tw = TimeWin::new(3, 0.5, 3, 1).unwrap();
        assert_eq!((tw.levels(), tw.level_capacity()), (1, 3));
        for t in 1..=4 {
            tw.process(te(t, t, t)).unwrap();
        }
        let times: Vec<u64> = tw.level(0).iter().map(|x| x.timestamp).collect();
        assert_eq!(times, vec![2, 3, 4]);
        assert_eq!(tw.discard_time(0), 1);
    }

    #[test]
    fn timestamps_must_not_regress() {
        let mut tw = TimeWin::new(8, 0.5, 16, 1).unwrap();
        tw.process(te(0, 0, 5)).unwrap();
        tw.process(te(0, 1, 5)).unwrap();
        assert_eq!(
            tw.process(te(0, 2, 4)),
            Err(EstimatorError::TimestampRegression { latest: 5, got: 4 })
        );
        assert!(matches!(
            tw.query(3, 4),
            Err(EstimatorError::QueryInPast { .. })
        ));
    }

    #[test]
    fn cascade_reaches_level_two_a_quarter_of_the_time() {
        // T = 3 and M' = 10_000: nothing is ever evicted.
        let mut tw = TimeWin::new(30_000, 0.5, 120_000, 99).unwrap();
        assert_eq!((tw.levels(), tw.level_capacity()), (3, 10_000));
        let n = 10_000u64;
        for i in 0..n {
            tw.process(te(i, i, i + 1)).unwrap();
        }
        assert_eq!(tw.level(0).len(), n as usize);
        let frac = tw.level(2).len() as f64 / n as f64;
        let sigma = (0.25 * 0.75 / n as f64).sqrt();
        assert!(
            (frac - 0.25).abs() <= 4.0 * sigma,
            "level-2 fraction {frac}"
        );
    }

    #[test]
    fn replay_is_deterministic() {
        let run = || {
            let mut tw = TimeWin::new(12, 0.5, 48, 7).unwrap();
            for i in 0..10 {
                tw.process(te(i % 3, i, i)).unwrap();
            }
            (0..tw.levels())
                .map(|l| tw.level(l).iter().copied().collect::<Vec<_>>())
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn small_window_is_answered_exactly_from_level_zero() {
        let mut tw = TimeWin::new(40, 0.5, 160, 3).unwrap();
        let k33: Vec<(u64, u64)> = (0..3).flat_map(|l| (0..3).map(move |r| (l, r))).collect();
        let mut t = 0;
        for i in 0..30u64 {
            t += 1;
            tw.process(te(100 + i, 100 + i, t)).unwrap();
        }
        for &(l, r) in &k33 {
            t += 1;
            tw.process(te(l, r, t)).unwrap();
        }
        assert_eq!(tw.query_level(9, t).unwrap(), 0);
        assert_eq!(tw.query(9, t).unwrap(), 9.0);
        assert_eq!(tw.query(9, t).unwrap(), 9.0);
    }

    #[test]
    fn window_beyond_history_has_no_level() {
        let mut tw = TimeWin::new(4, 0.5, 8, 3).unwrap();
        for t in 1..=200 {
            tw.process(te(t, t, t)).unwrap();
        }
        assert_eq!(
            tw.query(150, 200),
            Err(EstimatorError::NoValidLevel {
                window: 150,
                at: 200
            })
        );
    }

    #[test]
    fn storage_never_exceeds_budget() {
        let mut tw = TimeWin::new(50, 0.5, 400, 5).unwrap();
        for t in 1..=2000 {
            tw.process(te(t % 37, t, t / 3)).unwrap();
            assert!(tw.stored_edges() <= 50);
        }
    }
}
