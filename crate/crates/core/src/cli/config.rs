use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;

use crate::action::{IntervalAction, ParamModel};
use crate::error::{Error, Result};
use crate::knitting::Homotopy;
use crate::models::{AdditiveModel, EulerModel, FlatConnection, RuleVariant, Signal, YoungModel};
use crate::path::LipPath;
use crate::sewing::FlowModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Sew,
    Knit,
    Holonomy,
    Certify,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Sew => "sew",
            Experiment::Knit => "knit",
            Experiment::Holonomy => "holonomy",
            Experiment::Certify => "certify",
        }
    }
}

fn default_alpha() -> f64 {
    1.0
}

fn default_r0() -> f64 {
    0.5
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// Either `matrix` (square) or scalar `lambda`.
    Euler {
        #[serde(default)]
        matrix: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        lambda: Option<f64>,
    },
    Additive {
        components: Vec<Signal>,
        #[serde(default = "default_alpha")]
        alpha: f64,
    },
    Young {
        driver: Signal,
        integrand: Signal,
        alpha: f64,
        beta: f64,
    },
    FlatConnection {
        variant: RuleVariant,
        #[serde(default = "default_r0")]
        r0: f64,
    },
}

pub enum Built {
    Interval(FlowModel),
    Param(ParamModel),
}

impl ModelSpec {
    pub fn build(&self) -> Result<Built> {
        Ok(match self {
            ModelSpec::Euler { matrix, lambda } => Built::Interval(Arc::new(match (matrix, lambda) {
                (Some(m), None) => EulerModel::linear(m.clone())?,
                (None, Some(l)) => EulerModel::scalar(*l)?,
                _ => {
                    return Err(Error::Config(
                        "model euler needs exactly one of `matrix` or `lambda`".into(),
                    ))
                }
            })),
            ModelSpec::Additive { components, alpha } => {
                Built::Interval(Arc::new(AdditiveModel::new(components.clone(), *alpha)?))
            }
            ModelSpec::Young {
                driver,
                integrand,
                alpha,
                beta,
            } => Built::Interval(Arc::new(YoungModel::new(*driver, *integrand, *alpha, *beta)?)),
            ModelSpec::FlatConnection { variant, r0 } => {
                Built::Param(Arc::new(FlatConnection::new(*variant, *r0)?))
            }
        })
    }

    pub fn interval(&self) -> Result<FlowModel> {
        match self.build()? {
            Built::Interval(m) => Ok(m),
            Built::Param(_) => Err(Error::Config(
                "this experiment needs an interval model (euler, additive, young)".into(),
            )),
        }
    }

    /// Parameter-space model; interval models are lifted to `P = R`.
    pub fn param(&self) -> Result<ParamModel> {
        Ok(match self.build()? {
            Built::Interval(m) => Arc::new(IntervalAction::new(m)),
            Built::Param(m) => m,
        })
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PathSpec {
    /// Vertices at arclength-proportional times.
    Polyline { points: Vec<Vec<f64>> },
    /// Inscribed polygon of a circular arc between two angles (radians).
    Arc {
        #[serde(default)]
        center: [f64; 2],
        radius: f64,
        from: f64,
        to: f64,
        segments: usize,
    },
}

impl PathSpec {
    pub fn build(&self) -> Result<LipPath> {
        match self {
            PathSpec::Polyline { points } => LipPath::polyline(points.clone()),
            PathSpec::Arc {
                center,
                radius,
                from,
                to,
                segments,
            } => LipPath::arc(*center, *radius, *from, *to, *segments),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HomotopySpec {
    Linear { path0: PathSpec, path1: PathSpec },
    SemicircleEllipse { b: f64 },
}

impl HomotopySpec {
    pub fn build(&self) -> Result<Homotopy> {
        match self {
            HomotopySpec::Linear { path0, path1 } => Homotopy::linear(path0.build()?, path1.build()?),
            HomotopySpec::SemicircleEllipse { b } => Homotopy::semicircle_ellipse(*b),
        }
    }
}

/// Two paths with common endpoints whose holonomy angles should differ by
/// `expect` (within `tol`).
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparationSpec {
    pub paths: [PathSpec; 2],
    pub expect: f64,
    pub tol: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    pub value: f64,
    pub tol: f64,
}

fn default_tol() -> f64 {
    1e-8
}

fn default_max_level() -> u32 {
    30
}

fn default_min_level() -> u32 {
    4
}

fn default_samples() -> usize {
    60
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub experiment: Experiment,
    pub model: ModelSpec,
    #[serde(default)]
    pub interval: Option<[f64; 2]>,
    #[serde(default)]
    pub path: Option<PathSpec>,
    #[serde(default)]
    pub paths: Vec<PathSpec>,
    #[serde(default)]
    pub homotopy: Option<HomotopySpec>,
    #[serde(default)]
    pub ks: Vec<usize>,
    #[serde(default)]
    pub separation: Option<SeparationSpec>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_level")]
    pub max_level: u32,
    #[serde(default = "default_min_level")]
    pub min_level: u32,
    /// Point whose image is reported as `value`.
    #[serde(default)]
    pub track: Option<Vec<f64>>,
    /// Expected final value (sew) or angle (holonomy).
    #[serde(default)]
    pub expect: Option<Expectation>,
    /// Number of certify samples.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl Config {
    pub fn from_str(text: &str) -> Result<Self> {
        let cfg: Config = serde_json::from_str(text).map_err(|e| {
            Error::Config(format!("line {} column {}: {e}", e.line(), e.column()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Config::from_str(&text)
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("field `tol` must be > 0, got {}", self.tol)));
        }
        if self.min_level > self.max_level {
            return Err(Error::Config("field `min_level` exceeds `max_level`".into()));
        }
        let missing = |field: &str| {
            Err(Error::Config(format!(
                "experiment {} needs field `{field}`",
                self.experiment.name()
            )))
        };
        match self.experiment {
            Experiment::Sew if self.interval.is_none() => missing("interval"),
            Experiment::Holonomy if self.path.is_none() && self.paths.is_empty() => missing("path"),
            Experiment::Knit if self.homotopy.is_none() => missing("homotopy"),
            Experiment::Knit if self.ks.is_empty() => missing("ks"),
            _ => Ok(()),
        }
    }

    pub fn all_paths(&self) -> Vec<&PathSpec> {
        self.path.iter().chain(&self.paths).collect()
    }
}
