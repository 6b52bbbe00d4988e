//! Experiment configuration: a single JSON document, schema-validated
//! before any computation runs. Unknown keys are rejected everywhere,
//! and every cross-field requirement is checked by `validate`, so a
//! parsed-and-validated config can be executed without further guards.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::barriers::DensitySpec;
use crate::error::{Error, Result};
use crate::exhaustion::{InitialBump, SolverChoice};
use crate::graph::{AntitreeConvention, Metric, ShellRule, WeightedGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Identities,
    Spectrum,
    Solve,
    Certify,
    Exhaust,
    Nonuniqueness,
    Table1,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDescriptor {
    pub family: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branching: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sphere: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convention: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
    /// fault-injection switch for the identity self-test
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corrupt: Option<String>,
}

impl GraphDescriptor {
    pub fn build(&self) -> Result<Arc<WeightedGraph>> {
        let graph = match self.family.as_str() {
            "lattice" => {
                let n = self
                    .n
                    .ok_or_else(|| Error::Config("lattice graph requires \"n\"".into()))?;
                WeightedGraph::lattice(n)?
            }
            "tree" => {
                let rule = ShellRule::parse(
                    self.branching
                        .as_deref()
                        .ok_or_else(|| Error::Config("tree graph requires \"branching\"".into()))?,
                )?;
                let depth = self.depth.unwrap_or(200);
                WeightedGraph::tree(rule, depth)?
            }
            "antitree" => {
                let rule = ShellRule::parse(
                    self.sphere
                        .as_deref()
                        .ok_or_else(|| Error::Config("anti-tree requires \"sphere\"".into()))?,
                )?;
                let convention = match self.convention.as_deref() {
                    Some("A") => AntitreeConvention::A,
                    Some("B") => AntitreeConvention::B,
                    Some(other) => {
                        return Err(Error::Config(format!(
                            "anti-tree convention must be \"A\" or \"B\", got {other:?}"
                        )))
                    }
                    None => {
                        return Err(Error::Config(
                            "anti-tree requires an explicit \"convention\" (A or B)".into(),
                        ))
                    }
                };
                let depth = self.depth.unwrap_or(200);
                WeightedGraph::antitree(rule, convention, depth)?
            }
            other => return Err(Error::Config(format!("unknown graph family {other:?}"))),
        };
        Ok(Arc::new(graph))
    }

    pub fn validate(&self) -> Result<()> {
        self.build().map(|_| ())?;
        if let Some(c) = &self.corrupt {
            if c != "edge-symmetry" {
                return Err(Error::Config(format!(
                    "unknown corruption mode {c:?}; supported: \"edge-symmetry\""
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityDescriptor {
    pub family: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coeff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metric: Option<String>,
}

fn parse_metric(s: Option<&str>, default: Metric) -> Result<Metric> {
    match s {
        None => Ok(default),
        Some("combinatorial") => Ok(Metric::Combinatorial),
        Some("euclidean") => Ok(Metric::Euclidean),
        Some(other) => Err(Error::Config(format!(
            "metric must be \"combinatorial\" or \"euclidean\", got {other:?}"
        ))),
    }
}

fn require_positive(value: Option<f64>, name: &str) -> Result<f64> {
    match value {
        Some(v) if v > 0.0 && v.is_finite() => Ok(v),
        Some(v) => Err(Error::Config(format!("{name} must be positive and finite, got {v}"))),
        None => Err(Error::Config(format!("missing required field {name:?}"))),
    }
}

impl DensityDescriptor {
    pub fn build(&self, default_metric: Metric) -> Result<DensitySpec> {
        match self.family.as_str() {
            "power_decay" => {
                let coeff = require_positive(self.coeff, "coeff")?;
                let alpha = match self.alpha {
                    Some(a) if a.is_finite() && a >= 0.0 => a,
                    Some(a) => {
                        return Err(Error::Config(format!("alpha must be >= 0, got {a}")))
                    }
                    None => return Err(Error::Config("missing required field \"alpha\"".into())),
                };
                let metric = parse_metric(self.metric.as_deref(), default_metric)?;
                Ok(DensitySpec::PowerDecay { coeff, alpha, metric })
            }
            "outer_degree_scaled" => {
                Ok(DensitySpec::OuterDegreeScaled { rho0: require_positive(self.rho0, "rho0")? })
            }
            "log_power" => {
                let rho0 = require_positive(self.rho0, "rho0")?;
                let beta = require_positive(self.beta, "beta")?;
                if beta > 1.0 {
                    return Err(Error::Config(format!("beta must be in (0, 1], got {beta}")));
                }
                Ok(DensitySpec::LogPower { rho0, beta })
            }
            "constant" => Ok(DensitySpec::Constant { value: require_positive(self.value, "value")? }),
            other => Err(Error::Config(format!("unknown density family {other:?}"))),
        }
    }
}

/// Number, or one of the search modes "auto" / "search".
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamOrMode {
    Value(f64),
    Mode(String),
}

impl ParamOrMode {
    pub fn value(&self) -> Option<f64> {
        match self {
            ParamOrMode::Value(v) => Some(*v),
            ParamOrMode::Mode(_) => None,
        }
    }

    pub fn validate_mode(&self, allowed: &[&str]) -> Result<()> {
        if let ParamOrMode::Mode(m) = self {
            if !allowed.contains(&m.as_str()) {
                return Err(Error::Config(format!(
                    "mode {m:?} not recognized; allowed: {allowed:?}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarrierDescriptor {
    pub family: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<ParamOrMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<ParamOrMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lift_gamma: Option<ParamOrMode>,
}

impl BarrierDescriptor {
    pub fn validate(&self) -> Result<()> {
        match self.family.as_str() {
            "thm34" | "thm35" | "lattice" | "z2_loglog" | "antitree_linear" => {}
            other => return Err(Error::Config(format!("unknown barrier family {other:?}"))),
        }
        if let Some(q) = &self.q {
            q.validate_mode(&["auto", "search"])?;
        }
        if let Some(k) = &self.k {
            k.validate_mode(&["auto"])?;
        }
        if let Some(g) = &self.lift_gamma {
            g.validate_mode(&["auto"])?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialDataDescriptor {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<u32>,
}

impl InitialDataDescriptor {
    pub fn build(&self) -> Result<InitialBump> {
        match self.kind.as_str() {
            "spike" => Ok(InitialBump::Spike {
                amplitude: require_positive(self.amplitude, "amplitude")?,
            }),
            "ball" => {
                let radius = self
                    .radius
                    .ok_or_else(|| Error::Config("ball bump requires \"radius\"".into()))?;
                if radius == 0 {
                    return Err(Error::Config("bump radius must be >= 1".into()));
                }
                Ok(InitialBump::Ball {
                    radius,
                    amplitude: require_positive(self.amplitude, "amplitude")?,
                })
            }
            other => Err(Error::Config(format!("unknown initial data kind {other:?}"))),
        }
    }
}

fn parse_solver(s: &str) -> Result<SolverChoice> {
    match s {
        "radial" => Ok(SolverChoice::Radial),
        "spectral" => Ok(SolverChoice::Spectral),
        "euler" => Ok(SolverChoice::Euler),
        other => Err(Error::Config(format!(
            "solver must be \"radial\", \"spectral\" or \"euler\", got {other:?}"
        ))),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentitiesParams {
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default = "default_trials")]
    pub trials: u32,
}

fn default_radius() -> f64 {
    6.0
}

fn default_trials() -> u32 {
    100
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumParams {
    pub radius: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metric: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveParams {
    pub radius: f64,
    pub t_end: f64,
    pub dt: f64,
    pub solver: String,
    pub u0: InitialDataDescriptor,
    /// constant boundary data (0 gives the homogeneous problem)
    #[serde(default)]
    pub boundary: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metric: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyParams {
    pub barrier: BarrierDescriptor,
    /// radial certification domain (trees / anti-trees)
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_shell: Option<u32>,
    /// region certification domain (lattices)
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default = "default_time_nodes")]
    pub time_nodes: usize,
}

fn default_time_nodes() -> usize {
    5
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExhaustParams {
    #[serde(default)]
    pub gamma: f64,
    pub u0: InitialDataDescriptor,
    pub j_list: Vec<u32>,
    pub t_end: f64,
    pub dt: f64,
    pub solver: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonuniquenessParams {
    #[serde(default)]
    pub gamma: f64,
    pub u0: InitialDataDescriptor,
    pub c: f64,
    #[serde(default = "default_t0")]
    pub t0: f64,
    #[serde(default = "default_eps")]
    pub epsilon: f64,
    pub j_list: Vec<u32>,
    pub t_end: f64,
    pub dt: f64,
    pub solver: String,
}

fn default_t0() -> f64 {
    1.0
}

fn default_eps() -> f64 {
    0.5
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table1Params {
    /// tree rows: certification shells and exhaustion radii
    #[serde(default = "default_tree_shell")]
    pub tree_max_shell: u32,
    #[serde(default = "default_tree_j")]
    pub tree_j_list: Vec<u32>,
    /// lattice rows: certification ball radius and exhaustion radii
    #[serde(default = "default_lattice_radius")]
    pub lattice_radius: f64,
    #[serde(default = "default_lattice_j")]
    pub lattice_j_list: Vec<u32>,
    #[serde(default = "default_lattice_dt")]
    pub lattice_dt: f64,
    #[serde(default = "default_time_nodes")]
    pub time_nodes: usize,
}

fn default_tree_shell() -> u32 {
    60
}

fn default_tree_j() -> Vec<u32> {
    vec![30, 60]
}

fn default_lattice_radius() -> f64 {
    30.0
}

fn default_lattice_j() -> Vec<u32> {
    vec![8, 12]
}

fn default_lattice_dt() -> f64 {
    0.0125
}

impl Default for Table1Params {
    fn default() -> Self {
        Table1Params {
            tree_max_shell: default_tree_shell(),
            tree_j_list: default_tree_j(),
            lattice_radius: default_lattice_radius(),
            lattice_j_list: default_lattice_j(),
            lattice_dt: default_lattice_dt(),
            time_nodes: default_time_nodes(),
        }
    }
}

/// The experiment document. Exactly one kind-specific section must be
/// present, matching `experiment`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphDescriptor>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<DensityDescriptor>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identities: Option<IdentitiesParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certify: Option<CertifyParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exhaust: Option<ExhaustParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nonuniqueness: Option<NonuniquenessParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table1: Option<Table1Params>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Cross-field validation: the section matching the experiment kind
    /// must be present and well-formed, graph/density descriptors must
    /// build, and numeric fields must be sane.
    pub fn validate(&self) -> Result<()> {
        let need_graph = !matches!(self.experiment, ExperimentKind::Table1);
        if need_graph {
            let g = self
                .graph
                .as_ref()
                .ok_or_else(|| Error::Config("experiment requires a \"graph\" section".into()))?;
            g.validate()?;
        }
        if let Some(d) = &self.density {
            d.build(Metric::Combinatorial)?;
        }
        let check_time = |t_end: f64, dt: f64| -> Result<()> {
            if !(t_end > 0.0 && t_end.is_finite() && dt > 0.0 && dt.is_finite() && dt <= t_end) {
                return Err(Error::Config(format!(
                    "time grid must satisfy 0 < dt <= t_end, got dt = {dt}, t_end = {t_end}"
                )));
            }
            if (t_end / dt) > 10_000_000.0 {
                return Err(Error::Config("time grid has more than 1e7 nodes".into()));
            }
            Ok(())
        };
        let check_jlist = |j: &[u32]| -> Result<()> {
            if j.is_empty() || j.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Config(
                    "j_list must be non-empty and strictly increasing".into(),
                ));
            }
            Ok(())
        };
        match self.experiment {
            ExperimentKind::Identities => {
                let p = self.section(&self.identities, "identities")?;
                if !(p.radius >= 1.0 && p.radius.is_finite()) {
                    return Err(Error::Config("radius must be >= 1".into()));
                }
            }
            ExperimentKind::Spectrum => {
                let p = self.section(&self.spectrum, "spectrum")?;
                if !(p.radius >= 1.0 && p.radius.is_finite()) {
                    return Err(Error::Config("radius must be >= 1".into()));
                }
                parse_metric(p.metric.as_deref(), Metric::Combinatorial)?;
                self.require_density()?;
            }
            ExperimentKind::Solve => {
                let p = self.section(&self.solve, "solve")?;
                check_time(p.t_end, p.dt)?;
                parse_solver(&p.solver)?;
                p.u0.build()?;
                parse_metric(p.metric.as_deref(), Metric::Combinatorial)?;
                self.require_density()?;
            }
            ExperimentKind::Certify => {
                let p = self.section(&self.certify, "certify")?;
                p.barrier.validate()?;
                if p.max_shell.is_none() && p.radius.is_none() {
                    return Err(Error::Config(
                        "certification needs \"max_shell\" (radial) or \"radius\" (region)".into(),
                    ));
                }
                if p.time_nodes < 2 {
                    return Err(Error::Config("time_nodes must be >= 2".into()));
                }
                self.require_density()?;
            }
            ExperimentKind::Exhaust => {
                let p = self.section(&self.exhaust, "exhaust")?;
                check_time(p.t_end, p.dt)?;
                check_jlist(&p.j_list)?;
                parse_solver(&p.solver)?;
                p.u0.build()?;
                self.require_density()?;
            }
            ExperimentKind::Nonuniqueness => {
                let p = self.section(&self.nonuniqueness, "nonuniqueness")?;
                check_time(p.t_end, p.dt)?;
                check_jlist(&p.j_list)?;
                parse_solver(&p.solver)?;
                let bump = p.u0.build()?;
                if !(p.t0 > p.epsilon && p.epsilon > 0.0) {
                    return Err(Error::Config("window must satisfy 0 < epsilon < t0".into()));
                }
                if p.t0 + p.epsilon > p.t_end + 1e-12 {
                    return Err(Error::Config("window must fit inside the solved interval".into()));
                }
                if p.c < p.gamma + bump.amplitude() {
                    return Err(Error::Config(
                        "boundary constant c must dominate the initial data".into(),
                    ));
                }
                self.require_density()?;
            }
            ExperimentKind::Table1 => {
                let p = self.table1.clone().unwrap_or_default();
                check_jlist(&p.tree_j_list)?;
                check_jlist(&p.lattice_j_list)?;
                if !(p.lattice_radius >= 2.0 && p.lattice_radius.is_finite()) {
                    return Err(Error::Config("lattice_radius must be >= 2".into()));
                }
            }
        }
        Ok(())
    }

    fn section<'a, T>(&self, field: &'a Option<T>, name: &str) -> Result<&'a T> {
        field.as_ref().ok_or_else(|| {
            Error::Config(format!("experiment kind requires the {name:?} section"))
        })
    }

    fn require_density(&self) -> Result<&DensityDescriptor> {
        self.density
            .as_ref()
            .ok_or_else(|| Error::Config("experiment requires a \"density\" section".into()))
    }

    /// Default metric used by balls and densities on this graph family.
    pub fn default_metric(&self) -> Metric {
        match self.graph.as_ref().map(|g| g.family.as_str()) {
            Some("lattice") => Metric::Euclidean,
            _ => Metric::Combinatorial,
        }
    }
}

pub fn solver_from_str(s: &str) -> Result<SolverChoice> {
    parse_solver(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_graph_descriptors() {
        for text in [
            r#"{"family":"lattice","n":3}"#,
            r#"{"family":"tree","branching":"const:2","depth":200}"#,
            r#"{"family":"antitree","sphere":"affine:1,1","convention":"A","depth":200}"#,
        ] {
            let d: GraphDescriptor = serde_json::from_str(text).unwrap();
            d.build().unwrap();
        }
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = r#"{"family":"lattice","n":3,"oops":1}"#;
        assert!(serde_json::from_str::<GraphDescriptor>(text).is_err());
        let config = r#"{"experiment":"identities","graph":{"family":"lattice","n":2},
                         "identities":{},"mystery":true}"#;
        assert!(ExperimentConfig::from_json(config).is_err());
    }

    #[test]
    fn rejects_missing_sections_and_bad_values() {
        let no_section = r#"{"experiment":"solve","graph":{"family":"lattice","n":2}}"#;
        assert!(ExperimentConfig::from_json(no_section).is_err());
        let bad_time = r#"{"experiment":"solve","graph":{"family":"lattice","n":1},
            "density":{"family":"constant","value":1.0},
            "solve":{"radius":4,"t_end":-1.0,"dt":0.1,"solver":"spectral",
                     "u0":{"kind":"spike","amplitude":1.0}}}"#;
        assert!(ExperimentConfig::from_json(bad_time).is_err());
        let bad_convention = r#"{"experiment":"identities",
            "graph":{"family":"antitree","sphere":"affine:1,1","convention":"C","depth":10},
            "identities":{}}"#;
        assert!(ExperimentConfig::from_json(bad_convention).is_err());
    }

    #[test]
    fn anti_tree_requires_explicit_convention() {
        let text = r#"{"experiment":"identities",
            "graph":{"family":"antitree","sphere":"affine:1,1","depth":10},
            "identities":{}}"#;
        let err = ExperimentConfig::from_json(text).unwrap_err();
        assert!(err.to_string().contains("convention"));
    }

    #[test]
    fn density_descriptors_build() {
        let d: DensityDescriptor = serde_json::from_str(
            r#"{"family":"power_decay","coeff":1.0,"alpha":3.0,"metric":"euclidean"}"#,
        )
        .unwrap();
        assert!(matches!(
            d.build(Metric::Combinatorial).unwrap(),
            DensitySpec::PowerDecay { metric: Metric::Euclidean, .. }
        ));
        let d: DensityDescriptor =
            serde_json::from_str(r#"{"family":"log_power","rho0":1.0,"beta":0.5}"#).unwrap();
        assert!(matches!(d.build(Metric::Combinatorial).unwrap(), DensitySpec::LogPower { .. }));
        let bad: DensityDescriptor =
            serde_json::from_str(r#"{"family":"power_decay","coeff":-1.0,"alpha":1.0}"#).unwrap();
        assert!(bad.build(Metric::Combinatorial).is_err());
    }

    #[test]
    fn barrier_modes_validate() {
        let b: BarrierDescriptor =
            serde_json::from_str(r#"{"family":"thm34","a":1.0,"q":"auto","rho0":1.0}"#).unwrap();
        b.validate().unwrap();
        let b: BarrierDescriptor =
            serde_json::from_str(r#"{"family":"thm34","a":1.0,"q":"sideways"}"#).unwrap();
        assert!(b.validate().is_err());
        let b: BarrierDescriptor =
            serde_json::from_str(r#"{"family":"warp"}"#).unwrap();
        assert!(b.validate().is_err());
    }

    #[test]
    fn full_document_round_trip() {
        let text = r#"{
            "experiment": "nonuniqueness",
            "seed": 7,
            "graph": {"family":"tree","branching":"const:2","depth":80},
            "density": {"family":"power_decay","coeff":1.0,"alpha":2.0,"metric":"combinatorial"},
            "nonuniqueness": {
                "gamma": 0.0,
                "u0": {"kind":"spike","amplitude":1.0},
                "c": 1.0,
                "t0": 1.0,
                "epsilon": 0.5,
                "j_list": [30, 60],
                "t_end": 1.5,
                "dt": 0.015625,
                "solver": "radial"
            }
        }"#;
        let config = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(config.experiment, ExperimentKind::Nonuniqueness);
        let json = serde_json::to_string(&config).unwrap();
        let back = ExperimentConfig::from_json(&json).unwrap();
        assert_eq!(back.seed, 7);
    }

    #[test]
    fn malformed_json_is_a_config_error() {
        for text in ["", "{", "[1,2,3]", "{\"experiment\":\"unknown\"}", "null"] {
            match ExperimentConfig::from_json(text) {
                Err(Error::Config(_)) => {}
                other => panic!("expected config error for {text:?}, got {other:?}"),
            }
        }
    }
}
