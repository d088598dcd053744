use std::collections::BTreeMap;

use conelab_core::cone::{ConeSpace, CrossSectionSpectrum, Eigenspace};
use conelab_core::profiles::{
    derive_ni_parameters, DoublyWarpedMetric, NiParameters, SingleWarpMetric, WarpProfile,
};
use serde::Deserialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::CliError;

/// One scenario: a model, an optional cone, operation parameters and an
/// output directory.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub metric: MetricConfig,
    #[serde(default)]
    pub cone: Option<ConeConfig>,
    pub operation: OperationConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    Euclidean,
    ExactCone,
    AsymConical,
    Ding,
    Ni,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricConfig {
    pub kind: MetricKind,
    #[serde(default)]
    pub dimension: Option<usize>,
    /// Asymptotic slope for `exact-cone` and `asym-conical`.
    #[serde(default)]
    pub slope: Option<f64>,
    #[serde(default)]
    pub ni: Option<NiSpec>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum NiSpec {
    Full(NiParameters),
    Free { c2: f64, c3: f64, c6: f64 },
    Named(String),
}

/// Either a round-sphere cone (`dimension`, `radius`, `modes`) or an
/// abstract one (`kappa`, `mass`, `eigenspaces`).
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeConfig {
    #[serde(default)]
    pub dimension: Option<usize>,
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default)]
    pub modes: Option<usize>,
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub mass: Option<f64>,
    #[serde(default)]
    pub eigenspaces: Option<Vec<Eigenspace>>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperationConfig {
    pub k: Option<usize>,
    pub k_max: Option<usize>,
    pub alpha: Option<f64>,
    pub d: Option<f64>,
    pub k0: Option<f64>,
    pub levels: Option<usize>,
    pub gamma: Option<f64>,
    pub modes: Option<usize>,
    /// `(coefficient, eigenspace)` pairs of a cone harmonic.
    pub terms: Option<Vec<(f64, usize)>>,
    /// Seeded random cases for the property suites.
    pub cases: Option<usize>,
    pub grid: Option<GridConfig>,
    pub growth_window: Option<(f64, f64)>,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub lo: f64,
    pub hi: f64,
    #[serde(default)]
    pub points: Option<usize>,
    #[serde(default)]
    pub per_decade: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
}

pub enum Model {
    Single(SingleWarpMetric),
    Doubly(DoublyWarpedMetric, NiParameters),
}

const REQUIRED: [&str; 3] = ["metric", "operation", "output"];

fn missing_keys(value: &Value) -> Vec<String> {
    let Some(map) = value.as_object() else {
        return REQUIRED.iter().map(|k| k.to_string()).collect();
    };
    let mut missing: Vec<String> = REQUIRED
        .iter()
        .filter(|k| !map.contains_key(**k))
        .map(|k| k.to_string())
        .collect();
    if let Some(m) = map.get("metric").and_then(Value::as_object) {
        if !m.contains_key("kind") {
            missing.push("metric.kind".into());
        }
    }
    if let Some(o) = map.get("output").and_then(Value::as_object) {
        if !o.contains_key("dir") {
            missing.push("output.dir".into());
        }
    }
    missing
}

/// Recursively sorted, compact JSON.
pub fn canonical_json(value: &Value) -> String {
    fn sort(v: &Value) -> Value {
        match v {
            Value::Object(map) => {
                let sorted: BTreeMap<&String, Value> =
                    map.iter().map(|(k, v)| (k, sort(v))).collect();
                Value::Object(sorted.into_iter().map(|(k, v)| (k.clone(), v)).collect())
            }
            Value::Array(items) => Value::Array(items.iter().map(sort).collect()),
            other => other.clone(),
        }
    }
    sort(value).to_string()
}

/// SHA-256 of the canonical form; independent of key order and whitespace.
pub fn config_digest(value: &Value) -> String {
    hex::encode(Sha256::digest(canonical_json(value).as_bytes()))
}

impl ScenarioConfig {
    /// Parses and validates a JSON document, returning the raw value too
    /// so the caller can digest it.
    pub fn parse(text: &str) -> Result<(Self, Value), CliError> {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("invalid JSON: {e}")))?;
        let missing = missing_keys(&value);
        if !missing.is_empty() {
            return Err(CliError::MissingKeys(missing));
        }
        let config: ScenarioConfig =
            serde_json::from_value(value.clone()).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok((config, value))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        let m = &self.metric;
        if let Some(n) = m.dimension {
            if n < 2 {
                return bad(format!("metric.dimension must be at least 2, got {n}"));
            }
        }
        match m.kind {
            MetricKind::ExactCone | MetricKind::AsymConical => match m.slope {
                Some(s) if s > 0.0 && s <= 1.0 => {}
                Some(s) => return bad(format!("metric.slope must lie in (0, 1], got {s}")),
                None => return bad("metric.slope is required for cone-like profiles".into()),
            },
            _ if m.slope.is_some() => {
                return bad("metric.slope only applies to exact-cone and asym-conical".into())
            }
            _ => {}
        }
        if m.ni.is_some() && m.kind != MetricKind::Ni {
            return bad("metric.ni only applies to kind ni".into());
        }
        if m.kind == MetricKind::Ni && m.dimension.is_some_and(|n| n != 8) {
            return bad("the Ni metric is 8-dimensional".into());
        }
        let op = &self.operation;
        for (name, v) in [
            ("tolerance", op.tolerance),
            ("k0", op.k0),
            ("gamma", op.gamma),
            ("d", op.d),
            ("alpha", op.alpha),
        ] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return bad(format!("operation.{name} must be positive, got {v}"));
                }
            }
        }
        if let Some(g) = op.grid {
            if !(g.lo > 0.0 && g.lo < g.hi && g.hi.is_finite()) {
                return bad(format!(
                    "operation.grid bounds must satisfy 0 < lo < hi, got [{}, {}]",
                    g.lo, g.hi
                ));
            }
            if g.points.is_some_and(|p| p < 2) || g.per_decade == Some(0) {
                return bad("operation.grid needs at least two points".into());
            }
        }
        if let Some((lo, hi)) = op.growth_window {
            if !(lo > 0.0 && lo < hi) {
                return bad(format!(
                    "operation.growth_window must satisfy 0 < lo < hi, got [{lo}, {hi}]"
                ));
            }
        }
        if op.levels.is_some_and(|l| l < 2) {
            return bad("operation.levels must be at least 2".into());
        }
        if self.output.dir.is_empty() {
            return bad("output.dir must not be empty".into());
        }
        Ok(())
    }

    pub fn model(&self) -> Result<Model, CliError> {
        let m = &self.metric;
        let n = m.dimension.unwrap_or(3);
        let single = |p: WarpProfile| Ok(Model::Single(SingleWarpMetric::new(n, p)?));
        match m.kind {
            MetricKind::Euclidean => single(WarpProfile::euclidean()),
            MetricKind::ExactCone => single(WarpProfile::exact_cone(m.slope.expect("validated"))?),
            MetricKind::AsymConical => {
                single(WarpProfile::asym_conical(m.slope.expect("validated"))?)
            }
            MetricKind::Ding => single(WarpProfile::ding()),
            MetricKind::Ni => {
                let p = match &m.ni {
                    None => NiParameters::reference(),
                    Some(NiSpec::Named(name)) if name == "reference" => NiParameters::reference(),
                    Some(NiSpec::Named(name)) => {
                        return Err(CliError::Config(format!(
                            "unknown Ni parameter set {name:?}"
                        )))
                    }
                    Some(NiSpec::Free { c2, c3, c6 }) => derive_ni_parameters(*c2, *c3, *c6)?.0,
                    Some(NiSpec::Full(p)) => *p,
                };
                Ok(Model::Doubly(DoublyWarpedMetric::from_ni(&p), p))
            }
        }
    }

    pub fn single_metric(&self, command: &str) -> Result<SingleWarpMetric, CliError> {
        match self.model()? {
            Model::Single(m) => Ok(m),
            Model::Doubly(..) => Err(CliError::Config(format!(
                "{command} needs a single-warp metric"
            ))),
        }
    }

    pub fn cone(&self) -> Result<Option<ConeSpace>, CliError> {
        let Some(c) = &self.cone else { return Ok(None) };
        let cone = match (&c.eigenspaces, c.dimension) {
            (Some(spaces), None) => {
                let (Some(kappa), Some(mass)) = (c.kappa, c.mass) else {
                    return Err(CliError::Config(
                        "abstract cones need cone.kappa and cone.mass".into(),
                    ));
                };
                ConeSpace::new(kappa, CrossSectionSpectrum::new(spaces.clone(), mass)?)?
            }
            (None, Some(n)) => {
                if c.kappa.is_some() || c.mass.is_some() {
                    return Err(CliError::Config(
                        "sphere cones take cone.dimension and cone.radius only".into(),
                    ));
                }
                ConeSpace::over_sphere(n, c.radius.unwrap_or(1.0), c.modes.unwrap_or(8))?
            }
            _ => {
                return Err(CliError::Config(
                    "cone needs either dimension or eigenspaces".into(),
                ))
            }
        };
        Ok(Some(cone))
    }
}
