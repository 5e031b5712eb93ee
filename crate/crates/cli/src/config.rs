//! Experiment configuration files.

use std::path::{Path, PathBuf};

use rwrs_core::graph::Graph;
use rwrs_core::scenery::SceneryDistribution;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Clt,
    Tail,
    Bounds,
    Regeneration,
    Green,
    Confinement,
    OracleCrosscheck,
}

/// The result an experiment probes. Each one carries moment conditions on
/// the scenery.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    /// Tree upper bound.
    Theorem1Upper,
    /// Tree lower bound.
    Theorem1Lower,
    /// Lattice upper bound.
    Theorem2,
}

impl Theorem {
    /// Order `m` of the required finite moment `E|xi|^m`.
    pub fn required_moment(self) -> u32 {
        match self {
            Theorem::Theorem1Upper | Theorem::Theorem2 => 4,
            Theorem::Theorem1Lower => 6,
        }
    }
}

/// One bound checker and its parameter points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "lemma", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundSpec {
    Levelset { points: Vec<(f64, f64)>, beta: f64 },
    HeavyMass { us: Vec<f64> },
    Max { xs: Vec<f64> },
    Silt { ns: Vec<usize>, q: u32, b: f64 },
    LatticeHeavyMass { ys: Vec<f64> },
    SceneryCount { y: f64, m: u32, xs: Vec<f64> },
}

fn default_replicas() -> u64 {
    1000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theorem: Option<Theorem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<Graph>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<SceneryDistribution>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Tail levels `y`; the oracle cross-check reads them as levels of `T_n`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ys: Vec<f64>,
    #[serde(default = "default_replicas")]
    pub replicas: u64,
    #[serde(default)]
    pub seed: u64,
    pub output: PathBuf,
    /// Worker threads; all available cores when absent. Results do not
    /// depend on it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub short_horizon: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub radii: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bounds: Vec<BoundSpec>,
    /// Regeneration epochs to collect.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    /// Oracle cross-check instances.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instances: Option<usize>,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| invalid(format!("malformed config {}: {e}", path.display())))
    }

    pub fn graph(&self) -> Result<Graph, CliError> {
        self.graph
            .ok_or_else(|| invalid(format!("{:?} experiment needs a graph", self.experiment)))
    }

    pub fn distribution(&self) -> Result<&SceneryDistribution, CliError> {
        self.distribution.as_ref().ok_or_else(|| {
            invalid(format!(
                "{:?} experiment needs a distribution",
                self.experiment
            ))
        })
    }

    pub fn n(&self) -> Result<usize, CliError> {
        match self.n {
            Some(n) if n >= 1 => Ok(n),
            Some(_) => Err(invalid("n must be at least 1")),
            None => Err(invalid(format!("{:?} experiment needs n", self.experiment))),
        }
    }

    /// Checks everything that can be checked before any simulation runs.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.replicas == 0 {
            return Err(invalid("replicas must be positive"));
        }
        if self.threads == Some(0) {
            return Err(invalid("threads must be positive"));
        }
        if let Some(g) = self.graph {
            g.validate().map_err(|e| invalid(e.to_string()))?;
        }
        if let Some(dist) = &self.distribution {
            dist.validate().map_err(|e| invalid(e.to_string()))?;
        }
        if let Some(th) = self.theorem {
            let dist = self.distribution()?;
            let m = th.required_moment();
            if !dist.has_finite_abs_moment(m as f64) {
                let sup = match m {
                    4 => "\u{2074}",
                    _ => "\u{2076}",
                };
                return Err(invalid(format!(
                    "{th:?} requires E\u{3be}{sup} < \u{221e}, which fails for {dist}"
                )));
            }
            let graph = self.graph()?;
            let lattice_theorem = th == Theorem::Theorem2;
            if lattice_theorem == graph.is_tree() {
                return Err(invalid(format!("{th:?} does not apply to {graph}")));
            }
        }
        match self.experiment {
            ExperimentKind::Clt => {
                self.graph()?;
                self.distribution()?;
                self.n()?;
            }
            ExperimentKind::Tail => {
                self.graph()?;
                self.distribution()?;
                self.n()?;
                if self.ys.is_empty() {
                    return Err(invalid("tail experiment needs at least one y"));
                }
                if self.replicas < rwrs_core::estimators::tail::MIN_TAIL_REPLICAS {
                    return Err(invalid(format!(
                        "tail experiment needs at least {} replicas",
                        rwrs_core::estimators::tail::MIN_TAIL_REPLICAS
                    )));
                }
            }
            ExperimentKind::Bounds => {
                if self.bounds.is_empty() {
                    return Err(invalid("bounds experiment needs at least one bound"));
                }
                for b in &self.bounds {
                    match b {
                        BoundSpec::Silt { ns, .. } if ns.is_empty() => {
                            return Err(invalid("silt bound needs ns"))
                        }
                        BoundSpec::Silt { .. } => {
                            self.graph()?;
                        }
                        BoundSpec::Levelset { .. }
                        | BoundSpec::HeavyMass { .. }
                        | BoundSpec::LatticeHeavyMass { .. } => {
                            self.graph()?;
                            self.n()?;
                        }
                        BoundSpec::Max { .. } => {
                            self.graph()?;
                            self.n()?;
                        }
                        BoundSpec::SceneryCount { m, .. } => {
                            self.graph()?;
                            self.n()?;
                            let dist = self.distribution()?;
                            if !dist.has_finite_abs_moment(*m as f64) {
                                return Err(invalid(format!(
                                    "scenery_count needs E|\u{3be}|^{m} < \u{221e} for {dist}"
                                )));
                            }
                        }
                    }
                }
            }
            ExperimentKind::Regeneration => {
                if !self.graph()?.is_tree() {
                    return Err(invalid("regeneration experiment needs a tree"));
                }
            }
            ExperimentKind::Green => {
                match self.graph()? {
                    Graph::Lattice { d } if d >= 3 => {}
                    g => {
                        return Err(invalid(format!(
                            "Green's function needs a transient lattice, got {g}"
                        )))
                    }
                }
                if self.horizon.is_none() {
                    return Err(invalid("green experiment needs a horizon"));
                }
            }
            ExperimentKind::Confinement => {
                if self.radii.is_empty() {
                    return Err(invalid("confinement experiment needs radii"));
                }
                if let Some(&r) = self
                    .radii
                    .iter()
                    .find(|&&r| r > rwrs_core::estimators::confinement::MAX_RADIUS)
                {
                    return Err(invalid(format!(
                        "radius {r} exceeds the limit {}",
                        rwrs_core::estimators::confinement::MAX_RADIUS
                    )));
                }
            }
            ExperimentKind::OracleCrosscheck => {
                self.graph()?;
                self.n()?;
                if self.distribution()?.finite_support().is_none() {
                    return Err(invalid(
                        "oracle cross-check needs a finitely supported distribution",
                    ));
                }
                if self.ys.is_empty() {
                    return Err(invalid("oracle cross-check needs at least one level in ys"));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(kind: &str) -> serde_json::Value {
        serde_json::json!({
            "experiment": kind,
            "graph": {"graph": "tree", "d": 2},
            "distribution": {"kind": "gaussian", "params": {"sigma": 1.0}},
            "n": 100,
            "ys": [1.0],
            "replicas": 1000,
            "output": "out"
        })
    }

    fn parse(v: serde_json::Value) -> ExperimentConfig {
        serde_json::from_value(v).unwrap()
    }

    #[test]
    fn guard_names_the_moment() {
        let mut v = base("tail");
        v["theorem"] = "theorem1-upper".into();
        v["distribution"] =
            serde_json::json!({"kind": "symmetric_pareto", "params": {"alpha": 3.0}});
        let err = parse(v).validate().unwrap_err().to_string();
        assert!(err.contains("E\u{3be}\u{2074} < \u{221e}"), "{err}");
    }

    #[test]
    fn lower_bound_needs_sixth_moment() {
        let mut v = base("tail");
        v["theorem"] = "theorem1-lower".into();
        v["distribution"] =
            serde_json::json!({"kind": "symmetric_pareto", "params": {"alpha": 5.0}});
        assert!(parse(v.clone())
            .validate()
            .unwrap_err()
            .to_string()
            .contains("\u{2076}"));
        v["distribution"] =
            serde_json::json!({"kind": "symmetric_pareto", "params": {"alpha": 7.0}});
        parse(v).validate().unwrap();
    }

    #[test]
    fn theorem_must_match_graph() {
        let mut v = base("tail");
        v["theorem"] = "theorem2".into();
        assert!(parse(v).validate().is_err());
    }

    #[test]
    fn unknown_fields_rejected() {
        let mut v = base("clt");
        v["replica"] = 5.into();
        assert!(serde_json::from_value::<ExperimentConfig>(v).is_err());
    }

    #[test]
    fn kind_specific_requirements() {
        let mut v = base("green");
        assert!(parse(v.clone()).validate().is_err());
        v["graph"] = serde_json::json!({"graph": "lattice", "d": 3});
        v["horizon"] = 100.into();
        parse(v).validate().unwrap();
        let mut v = base("oracle-crosscheck");
        assert!(parse(v.clone()).validate().is_err());
        v["distribution"] = serde_json::json!({"kind": "rademacher"});
        parse(v).validate().unwrap();
    }
}
