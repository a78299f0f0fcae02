//! Problem configuration files.
//!
//! Every number may be given as a JSON number or as a string holding an
//! integer, a decimal (`"0.1"` is exactly one tenth) or a fraction `"p/q"`.
//! The growth parameter additionally accepts `"<rational>/e"`.

use std::collections::BTreeMap;
use std::fmt;

use rug::Rational;
use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::convergence::{GridSpec, DEFAULT_POINTS_PER_AXIS};
use crate::error::{Error, Result};
use crate::growth_space::GrowthRate;
use crate::nodes::NodeScheme;
use crate::precision::PrecisionPolicy;
use crate::scalar::{format_rational, parse_rational, QComplex};
use crate::series::{Builtin, PowerSeries, Radius};
use crate::superosc::{Mode, MultivarProblem, NodeSpec, ProblemFamily, DEFAULT_TAIL_TOL};

/// An exact rational read from a number or a string.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Num(pub Rational);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(&self.0))
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        let text = match &v {
            serde_json::Value::String(s) => s.clone(),
            serde_json::Value::Number(n) => n.to_string(),
            other => return Err(de::Error::custom(format!("expected a number, got {other}"))),
        };
        parse_rational(&text).map(Num).map_err(de::Error::custom)
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(&self.0))
    }
}

/// `B` as written in a config.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RateNum(pub GrowthRate);

impl Serialize for RateNum {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let text = match &self.0 {
            GrowthRate::Value(q) => format_rational(q),
            GrowthRate::OverE(q) => format!("{}/e", format_rational(q)),
        };
        s.serialize_str(&text)
    }
}

impl<'de> Deserialize<'de> for RateNum {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        let text = match &v {
            serde_json::Value::String(s) => s.clone(),
            serde_json::Value::Number(n) => n.to_string(),
            other => return Err(de::Error::custom(format!("expected a growth rate, got {other}"))),
        };
        GrowthRate::parse(&text).map(RateNum).map_err(de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodesConfig {
    pub scheme: NodeScheme,
    /// Order; required for named schemes, implied by `custom_points` otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom_points: Option<Vec<Num>>,
}

/// A complex coefficient: a number, or `{"re": .., "im": ..}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoeffNum {
    Real(Num),
    Complex { re: Num, im: Num },
}

impl CoeffNum {
    fn to_q(&self) -> QComplex {
        match self {
            CoeffNum::Real(r) => QComplex::real(r.0.clone()),
            CoeffNum::Complex { re, im } => QComplex::new(re.0.clone(), im.0.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RadiusSpec {
    Finite(Num),
    /// `"inf"`
    Named(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeriesSpec {
    Builtin {
        builtin: String,
        #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
        params: BTreeMap<String, Num>,
    },
    Coeffs {
        coeffs: Vec<CoeffNum>,
        radius: RadiusSpec,
    },
}

impl SeriesSpec {
    pub fn build(&self) -> Result<PowerSeries> {
        match self {
            SeriesSpec::Builtin { builtin, params } => {
                let param = |name: &str| -> Result<Rational> {
                    params
                        .get(name)
                        .map(|n| n.0.clone())
                        .ok_or_else(|| Error::InvalidConfig(format!("builtin '{builtin}' needs parameter '{name}'")))
                };
                let allowed: &[&str] = match builtin.as_str() {
                    "monomial" => &["p"],
                    "geometric" => &["pole"],
                    _ => &[],
                };
                if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
                    return Err(Error::InvalidConfig(format!("unknown parameter '{k}' for builtin '{builtin}'")));
                }
                let b = match builtin.as_str() {
                    "identity" => Builtin::Identity,
                    "exp" => Builtin::Exp,
                    "cis" => Builtin::Cis,
                    "sin" => Builtin::Sin,
                    "cos" => Builtin::Cos,
                    "monomial" => {
                        let p = param("p")?;
                        let p = p
                            .is_integer()
                            .then(|| p.numer().to_u32())
                            .flatten()
                            .ok_or_else(|| Error::InvalidConfig(format!("monomial degree {p} is not a small nonnegative integer")))?;
                        Builtin::Monomial(p)
                    }
                    "geometric" => {
                        let pole = param("pole")?;
                        if pole.is_zero() {
                            return Err(Error::InvalidConfig("geometric pole must be nonzero".into()));
                        }
                        Builtin::Geometric(pole)
                    }
                    other => return Err(Error::InvalidConfig(format!("unknown builtin series '{other}'"))),
                };
                Ok(PowerSeries::builtin(b))
            }
            SeriesSpec::Coeffs { coeffs, radius } => {
                let radius = match radius {
                    RadiusSpec::Finite(r) => Radius::Finite(r.0.clone()),
                    RadiusSpec::Named(s) if s == "inf" || s == "infinity" => Radius::Infinite,
                    RadiusSpec::Named(s) => {
                        Radius::Finite(parse_rational(s).map_err(|e| Error::InvalidConfig(e.to_string()))?)
                    }
                };
                PowerSeries::from_coeffs(coeffs.iter().map(CoeffNum::to_q).collect(), radius)
                    .map_err(|e| Error::InvalidConfig(e.to_string()))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// One `[lo, hi]` pair per variable; default `[−1, 1]^d`.
    #[serde(default, rename = "box", skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Vec<(Num, Num)>>,
    #[serde(default = "default_points")]
    pub points_per_axis: usize,
}

fn default_points() -> usize {
    DEFAULT_POINTS_PER_AXIS
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { bounds: None, points_per_axis: DEFAULT_POINTS_PER_AXIS }
    }
}

fn default_tail_tol() -> f64 {
    DEFAULT_TAIL_TOL
}

fn default_mode() -> Mode {
    Mode::Superoscillation
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub nodes: NodesConfig,
    pub a: Num,
    #[serde(rename = "G")]
    pub g: Vec<SeriesSpec>,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    #[serde(default, rename = "B", skip_serializing_if = "Option::is_none")]
    pub b: Option<RateNum>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub precision: PrecisionPolicy,
    #[serde(default = "default_tail_tol")]
    pub tail_tol: f64,
    /// Orders for `sweep`; defaults to 4, 8, .., 24.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,
}

impl ProblemConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable config")
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("serializable config");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    pub fn series(&self) -> Result<Vec<PowerSeries>> {
        self.g.iter().map(SeriesSpec::build).collect()
    }

    /// Order of the configured node set.
    pub fn order(&self) -> Result<usize> {
        match (&self.nodes.custom_points, self.nodes.n, self.nodes.scheme) {
            (Some(p), _, NodeScheme::Custom) => Ok(p.len().saturating_sub(1)),
            (None, _, NodeScheme::Custom) => Err(Error::InvalidConfig("custom scheme needs custom_points".into())),
            (Some(_), _, _) => Err(Error::InvalidConfig("custom_points given for a named scheme".into())),
            (None, Some(n), _) => Ok(n),
            (None, None, s) => Err(Error::InvalidConfig(format!("scheme '{s}' needs nodes.n"))),
        }
    }

    pub fn family(&self) -> Result<ProblemFamily> {
        let nodes = match self.nodes.scheme {
            NodeScheme::Custom => NodeSpec::Custom(
                self.nodes
                    .custom_points
                    .as_ref()
                    .ok_or_else(|| Error::InvalidConfig("custom scheme needs custom_points".into()))?
                    .iter()
                    .map(|n| n.0.clone())
                    .collect(),
            ),
            s => NodeSpec::Scheme(s),
        };
        if self.g.is_empty() {
            return Err(Error::InvalidConfig("G must list at least one series".into()));
        }
        Ok(ProblemFamily {
            nodes,
            a: self.a.0.clone(),
            g: self.series()?,
            mode: self.mode,
            b: self.b.as_ref().map(|r| r.0.clone()),
            tail_tol: self.tail_tol,
        })
    }

    /// The problem at order `n` (default: the configured order), with
    /// configuration errors mapped to [`Error::InvalidConfig`].
    pub fn problem(&self, n: Option<usize>) -> Result<MultivarProblem> {
        let family = self.family()?;
        let n = match n {
            Some(n) => n,
            None => self.order()?,
        };
        let radius = Radius::min_of(family.g.iter().map(PowerSeries::radius));
        if self.mode == Mode::Superoscillation && !radius.contains(&family.a) {
            return Err(Error::InvalidConfig(format!(
                "|a| = |{}| must be below R = {radius}, the smallest radius of convergence of G (superoscillation mode requires |a| < R)",
                format_rational(&family.a)
            )));
        }
        family.instantiate(n).map_err(|e| match e {
            Error::InvalidInput(m) => Error::InvalidConfig(m),
            other => other,
        })
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        let d = self.dim();
        let spec = match &self.grid.bounds {
            None => GridSpec::new(GridSpec::default_for(d).axes, self.grid.points_per_axis),
            Some(b) => {
                if b.len() != d {
                    return Err(Error::InvalidConfig(format!("grid box has {} axes, G has {d}", b.len())));
                }
                GridSpec::new(b.iter().map(|(lo, hi)| (lo.0.clone(), hi.0.clone())).collect(), self.grid.points_per_axis)
            }
        };
        spec.map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn policy(&self) -> Result<PrecisionPolicy> {
        self.precision.validate()?;
        Ok(self.precision)
    }

    /// Validates everything that can be checked without evaluating.
    pub fn validate(&self) -> Result<MultivarProblem> {
        self.policy()?;
        let problem = self.problem(None)?;
        self.grid_spec()?.check_admissible(&problem)?;
        Ok(problem)
    }
}
