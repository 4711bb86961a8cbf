//! JSON experiment configs.

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::Operator;
use crate::sets::{FeasibleSet, TieRule};
use crate::solver::StepSchedule;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSpec {
    Simplex { n: usize },
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Product { factors: Vec<SetSpec> },
    Vertices { points: Vec<Vec<f64>> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorSpec {
    FictitiousPlay {
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
    },
    Affine {
        #[serde(rename = "M")]
        m: Vec<Vec<f64>>,
        q: Vec<f64>,
        /// Declared modulus; estimated from `M` when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mu: Option<f64>,
    },
    LpSaddle {
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
        c: Vec<f64>,
    },
    SaddleQuadratic {
        #[serde(rename = "Qx")]
        qx: Vec<Vec<f64>>,
        #[serde(rename = "Qy")]
        qy: Vec<Vec<f64>>,
        #[serde(rename = "B")]
        b: Vec<Vec<f64>>,
        q: Vec<f64>,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleSpec {
    #[default]
    Harmonic,
    PowerLaw {
        a: f64,
        c: f64,
    },
    Explicit {
        steps: Vec<f64>,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieRuleSpec {
    #[default]
    LexicographicMin,
    FirstVertex,
}

impl From<TieRuleSpec> for TieRule {
    fn from(t: TieRuleSpec) -> Self {
        match t {
            TieRuleSpec::LexicographicMin => TieRule::LexicographicMin,
            TieRuleSpec::FirstVertex => TieRule::FirstVertex,
        }
    }
}

/// `"centroid"`, `"vertex:<i>"` or an explicit point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StartSpec {
    Named(String),
    Point(Vec<f64>),
}

impl Default for StartSpec {
    fn default() -> Self {
        Self::Named("centroid".into())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Solve,
    Dynamics,
    Oracle,
    Compare,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default)]
    pub trace_path: Option<PathBuf>,
    #[serde(default)]
    pub summary_path: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsSpec {
    pub h: f64,
    pub t_end: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    #[serde(default = "default_oracle_tol")]
    pub tol: f64,
    #[serde(default = "default_oracle_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub eta: Option<f64>,
}

fn default_oracle_tol() -> f64 {
    1e-10
}

fn default_oracle_max_iter() -> usize {
    1_000_000
}

impl Default for OracleSpec {
    fn default() -> Self {
        Self { tol: default_oracle_tol(), max_iter: default_oracle_max_iter(), eta: None }
    }
}

fn default_max_iter() -> usize {
    1000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub set: SetSpec,
    pub operator: OperatorSpec,
    #[serde(default)]
    pub schedule: ScheduleSpec,
    #[serde(default)]
    pub tie_rule: TieRuleSpec,
    #[serde(default)]
    pub x0: StartSpec,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub gap_tol: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub mode: Mode,
    /// Schedules run side by side in compare mode.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub schedules: Vec<ScheduleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dynamics: Option<DynamicsSpec>,
    #[serde(default)]
    pub oracle: OracleSpec,
    /// Block-sequential updates over product sets.
    #[serde(default)]
    pub gauss_seidel: bool,
}

fn matrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 {
        return Err(Error::InvalidArgument(format!("{what} is empty")));
    }
    if rows.iter().any(|row| row.len() != c) {
        return Err(Error::InvalidArgument(format!("{what} has ragged rows")));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

fn vector(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

impl SetSpec {
    pub fn build(&self) -> Result<FeasibleSet> {
        match self {
            Self::Simplex { n } => FeasibleSet::simplex(*n),
            Self::Box { lower, upper } => FeasibleSet::box_set(vector(lower), vector(upper)),
            Self::Product { factors } => {
                FeasibleSet::product(factors.iter().map(SetSpec::build).collect::<Result<_>>()?)
            }
            Self::Vertices { points } => {
                FeasibleSet::vertex_polytope(points.iter().map(|p| vector(p)).collect())
            }
        }
    }
}

impl OperatorSpec {
    pub fn build(&self) -> Result<Operator> {
        match self {
            Self::FictitiousPlay { a } => Operator::fictitious_play(matrix(a, "A")?),
            Self::Affine { m, q, mu: Some(mu) } => Operator::affine(matrix(m, "M")?, vector(q), *mu),
            Self::Affine { m, q, mu: None } => Operator::affine_auto(matrix(m, "M")?, vector(q)),
            Self::LpSaddle { a, b, c } => Operator::lp_saddle(matrix(a, "A")?, vector(b), vector(c)),
            Self::SaddleQuadratic { qx, qy, b, q } => {
                Operator::saddle_quadratic(matrix(qx, "Qx")?, matrix(qy, "Qy")?, matrix(b, "B")?, vector(q))
            }
        }
    }
}

impl ScheduleSpec {
    pub fn build(&self) -> Result<StepSchedule> {
        match self {
            Self::Harmonic => Ok(StepSchedule::Harmonic),
            Self::PowerLaw { a, c } => StepSchedule::power_law(*a, *c),
            Self::Explicit { steps } => StepSchedule::explicit(steps.clone()),
        }
    }
}

impl StartSpec {
    pub fn build(&self, set: &FeasibleSet) -> Result<DVector<f64>> {
        match self {
            Self::Point(p) => Ok(vector(p)),
            Self::Named(name) if name == "centroid" => Ok(set.centroid()),
            Self::Named(name) => {
                let idx = name
                    .strip_prefix("vertex:")
                    .and_then(|i| i.trim().parse::<usize>().ok())
                    .ok_or_else(|| {
                        Error::InvalidArgument(format!(
                            "x0 must be \"centroid\", \"vertex:<i>\" or an array, got {name:?}"
                        ))
                    })?;
                set.vertex(idx)
            }
        }
    }
}

impl ExperimentConfig {
    /// Parses a config, reporting schema violations with their field path.
    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Config {
                path: if path == "." { origin.to_string() } else { format!("{origin}: {path}") },
                message: e.into_inner().to_string(),
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text, &path.display().to_string())
    }

    /// Canonical description of the problem instance, used as the cache key.
    pub fn instance(&self) -> serde_json::Value {
        serde_json::json!({ "set": self.set, "operator": self.operator })
    }
}
