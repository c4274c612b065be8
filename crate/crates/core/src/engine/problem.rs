use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::InterpolationProblem;
use crate::disk_algebra::NodeSet;
use crate::error::{Error, Result};
use crate::numeric::{Vector, C64};
use crate::star_body::{BodyRegistry, ModulusSampling};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub radial: usize,
    pub angular: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            radial: 256,
            angular: 512,
        }
    }
}

/// Pass thresholds of the audit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Interpolation residual, relative to `1 + max ||f||`.
    pub interpolation: f64,
    /// Allowed negative slack in the chain and step inequalities.
    pub slack: f64,
    /// Interior maxima may exceed boundary maxima by this much.
    pub maximum_principle: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            interpolation: 1e-8,
            slack: 1e-9,
            maximum_principle: 1e-6,
        }
    }
}

/// JSON problem file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub nodes: Vec<f64>,
    /// One vector per node, complex entries as `[re, im]`.
    pub values: Vec<Vec<C64>>,
    pub body: Value,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_collar")]
    pub collar: f64,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default = "default_conformal_n")]
    pub conformal_n: usize,
    #[serde(default = "default_shrink")]
    pub shrink: f64,
    #[serde(default = "default_psi_grid")]
    pub psi_grid: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_delta() -> f64 {
    0.2
}
fn default_collar() -> f64 {
    0.01
}
fn default_k_max() -> usize {
    crate::schedule::DEFAULT_DEPTH
}
fn default_conformal_n() -> usize {
    512
}
fn default_shrink() -> f64 {
    crate::conformal::DEFAULT_SHRINK
}
fn default_psi_grid() -> usize {
    crate::schedule::DEFAULT_PSI_GRID
}

impl ProblemSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Problem(e.to_string()))
    }

    pub fn build(&self, registry: &BodyRegistry) -> Result<InterpolationProblem> {
        let nodes = NodeSet::new(&self.nodes)?;
        let body = registry.build(&self.body)?;
        let values = self.values.iter().cloned().map(Vector).collect();
        let mut p = InterpolationProblem::new(nodes, values, body)?;
        p.delta = self.delta;
        p.collar = self.collar;
        p.k_max = self.k_max;
        p.grid = self.grid;
        p.conformal_n = self.conformal_n;
        p.shrink = self.shrink;
        p.psi_grid = self.psi_grid;
        p.modulus = ModulusSampling {
            seed: self.seed,
            ..ModulusSampling::default()
        };
        p.tolerances = self.tolerances;
        p.validate()?;
        Ok(p)
    }
}
