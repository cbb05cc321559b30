//! Runtime selection of counting strategies by name.
//!
//! Every algorithm is driven through [`StreamEstimator`]. A
//! [`StrategyEntry`] records which parameters the algorithm needs and how
//! to build it; [`Registry::with_builtins`] registers the shipped ones.

use std::fmt;

use thiserror::Error;

use crate::estimators::{
    Bernoulli, EstimatorError, EstimatorParams, Fleet1, Fleet2, Fleet3, DEFAULT_GAMMA,
};
use crate::exact::ExactCounter;
use crate::graph::TimedEdge;
use crate::window::{SeqWin, TimeWin};

/// Incremental interface shared by every counter and estimator.
pub trait StreamEstimator: Send {
    fn name(&self) -> &'static str;

    fn process(&mut self, edge: TimedEdge) -> Result<(), EstimatorError>;

    /// Current estimate. Only the time-based window can fail here.
    fn estimate(&self) -> Result<f64, EstimatorError>;

    /// Edges currently held in memory.
    fn stored_edges(&self) -> usize;

    /// Human-readable notes about tolerated anomalies seen so far.
    fn warnings(&self) -> Vec<String> {
        Vec::new()
    }
}

/// Which ground truth an algorithm's estimate should be compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowModel {
    Infinite,
    Sequence,
    Time,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Param {
    Reservoir,
    Gamma,
    Window,
    MaxWindowEdges,
    Probability,
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Param::Reservoir => "--reservoir",
            Param::Gamma => "--gamma",
            Param::Window => "--window",
            Param::MaxWindowEdges => "--nmax",
            Param::Probability => "--p",
        })
    }
}

/// User-supplied knobs; which ones are legal depends on the algorithm.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AlgorithmParams {
    pub reservoir: Option<usize>,
    pub gamma: Option<f64>,
    pub window: Option<u64>,
    pub max_window_edges: Option<u64>,
    pub probability: Option<f64>,
    pub seed: u64,
}

impl AlgorithmParams {
    fn has(&self, p: Param) -> bool {
        match p {
            Param::Reservoir => self.reservoir.is_some(),
            Param::Gamma => self.gamma.is_some(),
            Param::Window => self.window.is_some(),
            Param::MaxWindowEdges => self.max_window_edges.is_some(),
            Param::Probability => self.probability.is_some(),
        }
    }

    fn gamma_or_default(&self) -> f64 {
        self.gamma.unwrap_or(DEFAULT_GAMMA)
    }

    // Presence is checked by the registry before any builder runs.
    fn reservoir(&self) -> usize {
        self.reservoir.expect("reservoir checked by registry")
    }

    fn window(&self) -> u64 {
        self.window.expect("window checked by registry")
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("unknown algorithm {0:?} (known: {1})")]
    UnknownAlgorithm(String, String),
    #[error("algorithm {algorithm} requires {param}")]
    MissingParam {
        algorithm: &'static str,
        param: Param,
    },
    #[error("algorithm {algorithm} does not take {param}")]
    UnexpectedParam {
        algorithm: &'static str,
        param: Param,
    },
    #[error("algorithm {0} is already registered")]
    DuplicateName(String),
    #[error(transparent)]
    Invalid(#[from] EstimatorError),
}

pub type BuildFn = fn(&AlgorithmParams) -> Result<Box<dyn StreamEstimator>, EstimatorError>;

pub struct StrategyEntry {
    pub name: &'static str,
    pub aliases: &'static [&'static str],
    pub summary: &'static str,
    pub required: &'static [Param],
    pub optional: &'static [Param],
    pub window: WindowModel,
    pub build: BuildFn,
}

impl StrategyEntry {
    fn answers_to(&self, name: &str) -> bool {
        self.name.eq_ignore_ascii_case(name)
            || self.aliases.iter().any(|a| a.eq_ignore_ascii_case(name))
    }

    pub fn validate(&self, params: &AlgorithmParams) -> Result<(), ConfigError> {
        for &p in self.required {
            if !params.has(p) {
                return Err(ConfigError::MissingParam {
                    algorithm: self.name,
                    param: p,
                });
            }
        }
        const ALL: [Param; 5] = [
            Param::Reservoir,
            Param::Gamma,
            Param::Window,
            Param::MaxWindowEdges,
            Param::Probability,
        ];
        for p in ALL {
            if params.has(p) && !self.required.contains(&p) && !self.optional.contains(&p) {
                return Err(ConfigError::UnexpectedParam {
                    algorithm: self.name,
                    param: p,
                });
            }
        }
        Ok(())
    }
}

impl fmt::Debug for StrategyEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StrategyEntry")
            .field("name", &self.name)
            .field("window", &self.window)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Default)]
pub struct Registry {
    entries: Vec<StrategyEntry>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_builtins() -> Self {
        let mut reg = Registry::new();
        for entry in builtin_entries() {
            reg.register(entry).expect("builtin names are unique");
        }
        reg
    }

    pub fn register(&mut self, entry: StrategyEntry) -> Result<(), ConfigError> {
        let clash = std::iter::once(entry.name)
            .chain(entry.aliases.iter().copied())
            .find(|n| self.get(n).is_some());
        if let Some(name) = clash {
            return Err(ConfigError::DuplicateName(name.to_string()));
        }
        self.entries.push(entry);
        Ok(())
    }

    /// Case-insensitive lookup by name or alias.
    pub fn get(&self, name: &str) -> Option<&StrategyEntry> {
        self.entries.iter().find(|e| e.answers_to(name))
    }

    pub fn lookup(&self, name: &str) -> Result<&StrategyEntry, ConfigError> {
        self.get(name)
            .ok_or_else(|| ConfigError::UnknownAlgorithm(name.to_string(), self.names().join(", ")))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.name).collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = &StrategyEntry> {
        self.entries.iter()
    }

    pub fn build(
        &self,
        name: &str,
        params: &AlgorithmParams,
    ) -> Result<Box<dyn StreamEstimator>, ConfigError> {
        let entry = self.lookup(name)?;
        entry.validate(params)?;
        Ok((entry.build)(params)?)
    }
}

fn builtin_entries() -> Vec<StrategyEntry> {
    vec![
        StrategyEntry {
            name: "Exact",
            aliases: &[],
            summary: "exact incremental count over the whole stream",
            required: &[],
            optional: &[],
            window: WindowModel::Infinite,
            build: |_| Ok(Box::new(ExactCounter::new())),
        },
        StrategyEntry {
            name: "Bern",
            aliases: &["Bernoulli"],
            summary: "fixed-probability sampling, unbounded memory",
            required: &[Param::Probability],
            optional: &[],
            window: WindowModel::Infinite,
            build: |p| {
                Ok(Box::new(Bernoulli::new(
                    p.probability.expect("checked"),
                    p.seed,
                )?))
            },
        },
        StrategyEntry {
            name: "Fleet1",
            aliases: &["Ada"],
            summary: "adaptive sampling, recount after each sub-sample",
            required: &[Param::Reservoir],
            optional: &[Param::Gamma],
            window: WindowModel::Infinite,
            build: |p| Ok(Box::new(Fleet1::new(fleet_params(p)?)?)),
        },
        StrategyEntry {
            name: "Fleet2",
            aliases: &["AdaSum"],
            summary: "adaptive sampling, estimate kept across sub-samples",
            required: &[Param::Reservoir],
            optional: &[Param::Gamma],
            window: WindowModel::Infinite,
            build: |p| Ok(Box::new(Fleet2::new(fleet_params(p)?)?)),
        },
        StrategyEntry {
            name: "Fleet3",
            aliases: &["iAda"],
            summary: "adaptive sampling, count before sampling (p^-3)",
            required: &[Param::Reservoir],
            optional: &[Param::Gamma],
            window: WindowModel::Infinite,
            build: |p| Ok(Box::new(Fleet3::new(fleet_params(p)?)?)),
        },
        StrategyEntry {
            name: "SeqWin",
            aliases: &[],
            summary: "sequence-based sliding window of the last W edges",
            required: &[Param::Reservoir, Param::Window],
            optional: &[Param::Gamma],
            window: WindowModel::Sequence,
            build: |p| {
                Ok(Box::new(SeqWin::new(
                    p.reservoir(),
                    p.window(),
                    p.gamma_or_default(),
                    p.seed,
                )?))
            },
        },
        StrategyEntry {
            name: "TimeWin",
            aliases: &[],
            summary: "time-based sliding window queried with size W",
            required: &[Param::Reservoir, Param::Window, Param::MaxWindowEdges],
            optional: &[Param::Gamma],
            window: WindowModel::Time,
            build: |p| {
                let inner = TimeWin::new(
                    p.reservoir(),
                    p.gamma_or_default(),
                    p.max_window_edges.expect("checked"),
                    p.seed,
                )?;
                if p.window() == 0 {
                    return Err(EstimatorError::ZeroWindow);
                }
                Ok(Box::new(TimeWinQuery {
                    inner,
                    window: p.window(),
                }))
            },
        },
    ]
}

fn fleet_params(p: &AlgorithmParams) -> Result<EstimatorParams, EstimatorError> {
    EstimatorParams::new(p.reservoir(), p.gamma_or_default(), p.seed)
}

impl StreamEstimator for ExactCounter {
    fn name(&self) -> &'static str {
        "Exact"
    }

    fn process(&mut self, edge: TimedEdge) -> Result<(), EstimatorError> {
        self.insert(edge.edge)
            .map(|_| ())
            .map_err(EstimatorError::DuplicateEdge)
    }

    fn estimate(&self) -> Result<f64, EstimatorError> {
        Ok(self.count().as_f64())
    }

    fn stored_edges(&self) -> usize {
        self.graph().len()
    }
}

impl StreamEstimator for Bernoulli {
    fn name(&self) -> &'static str {
        "Bern"
    }

    fn process(&mut self, edge: TimedEdge) -> Result<(), EstimatorError> {
        Bernoulli::process(self, edge.edge)
    }

    fn estimate(&self) -> Result<f64, EstimatorError> {
        Ok(Bernoulli::estimate(self))
    }

    fn stored_edges(&self) -> usize {
        self.reservoir().len()
    }
}

macro_rules! fleet_estimator {
    ($ty:ident) => {
        impl StreamEstimator for $ty {
            fn name(&self) -> &'static str {
                stringify!($ty)
            }

            fn process(&mut self, edge: TimedEdge) -> Result<(), EstimatorError> {
                $ty::process(self, edge.edge)
            }

            fn estimate(&self) -> Result<f64, EstimatorError> {
                Ok($ty::estimate(self))
            }

            fn stored_edges(&self) -> usize {
                self.state().reservoir().len()
            }
        }
    };
}

fleet_estimator!(Fleet1);
fleet_estimator!(Fleet2);
fleet_estimator!(Fleet3);

impl StreamEstimator for SeqWin {
    fn name(&self) -> &'static str {
        "SeqWin"
    }

    fn process(&mut self, edge: TimedEdge) -> Result<(), EstimatorError> {
        SeqWin::process(self, edge.edge)
    }

    fn estimate(&self) -> Result<f64, EstimatorError> {
        Ok(SeqWin::estimate(self))
    }

    fn stored_edges(&self) -> usize {
        self.reservoir().len()
    }

    fn warnings(&self) -> Vec<String> {
        let tel = self.telemetry();
        let mut out = Vec::new();
        if tel.transition_expiries > 0 {
            out.push(format!(
                "{} edges expired before p reached its floor; window estimate may be off during warm-up",
                tel.transition_expiries
            ));
        }
        if tel.oversize_steps > 0 {
            out.push(format!(
                "reservoir held at least 2M edges on {} steps",
                tel.oversize_steps
            ));
        }
        out
    }
}

/// [`TimeWin`] bound to one query window; the estimate is answered at the
/// latest processed timestamp.
#[derive(Debug, Clone)]
pub struct TimeWinQuery {
    pub inner: TimeWin,
    pub window: u64,
}

impl StreamEstimator for TimeWinQuery {
    fn name(&self) -> &'static str {
        "TimeWin"
    }

    fn process(&mut self, edge: TimedEdge) -> Result<(), EstimatorError> {
        self.inner.process(edge)
    }

    fn estimate(&self) -> Result<f64, EstimatorError> {
        match self.inner.latest_timestamp() {
            Some(at) => self.inner.query(self.window, at),
            None => Ok(0.0),
        }
    }

    fn stored_edges(&self) -> usize {
        self.inner.stored_edges()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;

    fn params() -> AlgorithmParams {
        AlgorithmParams {
            seed: 1,
            ..Default::default()
        }
    }

    #[test]
    fn lookup_is_case_insensitive_with_aliases() {
        let reg = Registry::with_builtins();
        assert_eq!(reg.get("fleet1").unwrap().name, "Fleet1");
        assert_eq!(reg.get("IADA").unwrap().name, "Fleet3");
        assert_eq!(reg.get("Bernoulli").unwrap().name, "Bern");
        assert!(matches!(
            reg.lookup("Fleet9"),
            Err(ConfigError::UnknownAlgorithm(..))
        ));
    }

    #[test]
    fn parameters_present_exactly_when_required() {
        let reg = Registry::with_builtins();
        assert_eq!(
            reg.build("Fleet2", &params()).err(),
            Some(ConfigError::MissingParam {
                algorithm: "Fleet2",
                param: Param::Reservoir
            })
        );
        let with_p = AlgorithmParams {
            reservoir: Some(5),
            probability: Some(0.5),
            ..params()
        };
        assert_eq!(
            reg.build("Fleet2", &with_p).err(),
            Some(ConfigError::UnexpectedParam {
                algorithm: "Fleet2",
                param: Param::Probability
            })
        );
        let exact_with_gamma = AlgorithmParams {
            gamma: Some(0.5),
            ..params()
        };
        assert!(reg.build("Exact", &exact_with_gamma).is_err());
        let timewin = AlgorithmParams {
            reservoir: Some(10),
            window: Some(5),
            ..params()
        };
        assert_eq!(
            reg.build("TimeWin", &timewin).err(),
            Some(ConfigError::MissingParam {
                algorithm: "TimeWin",
                param: Param::MaxWindowEdges
            })
        );
        let bad_gamma = AlgorithmParams {
            reservoir: Some(5),
            gamma: Some(2.0),
            ..params()
        };
        assert!(matches!(
            reg.build("Fleet1", &bad_gamma),
            Err(ConfigError::Invalid(_))
        ));
    }

    #[test]
    fn duplicate_registration_is_refused() {
        let mut reg = Registry::with_builtins();
        let clash = StrategyEntry {
            name: "Mine",
            aliases: &["ada"],
            summary: "",
            required: &[],
            optional: &[],
            window: WindowModel::Infinite,
            build: |_| Ok(Box::new(ExactCounter::new())),
        };
        assert_eq!(
            reg.register(clash),
            Err(ConfigError::DuplicateName("ada".into()))
        );
    }

    #[test]
    fn every_builtin_runs_through_the_trait() {
        let reg = Registry::with_builtins();
        let full = AlgorithmParams {
            reservoir: Some(1000),
            window: Some(1000),
            max_window_edges: Some(1000),
            probability: Some(1.0),
            ..params()
        };
        let stream: Vec<TimedEdge> = (0..3u64)
            .flat_map(|l| (0..3u64).map(move |r| Edge::new(l, r)))
            .enumerate()
            .map(|(i, e)| TimedEdge::new(e, i as u64 + 1))
            .collect();
        for entry in reg.entries() {
            let mut chosen = AlgorithmParams {
                seed: 3,
                ..Default::default()
            };
            for &p in entry.required.iter().chain(entry.optional) {
                match p {
                    Param::Reservoir => chosen.reservoir = full.reservoir,
                    Param::Gamma => {}
                    Param::Window => chosen.window = full.window,
                    Param::MaxWindowEdges => chosen.max_window_edges = full.max_window_edges,
                    Param::Probability => chosen.probability = full.probability,
                }
            }
            let mut est = reg.build(entry.name, &chosen).unwrap();
            assert_eq!(est.name(), entry.name);
            for te in &stream {
                est.process(*te).unwrap();
            }
            assert_eq!(est.estimate().unwrap(), 9.0, "{}", entry.name);
        }
    }
}
