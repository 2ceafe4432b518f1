//! Run configuration: a TOML file whose keys can be overridden by flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::holder_space::HolderParams;
use crate::map_model::{build_map, build_weight, MapSpec, PiecewiseMap, Weight, WeightSpec};

/// Everything one analysis run depends on.
///
/// ```toml
/// alpha = 0.5
/// n = 256
/// seed = 7
///
/// [map]
/// name = "cusp(0.75)"
///
/// [weight]
/// kind = "pf"
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub map: MapSpec,
    pub weight: WeightSpec,
    pub alpha: f64,
    /// Overrides the weight's declared Hölder exponent in the admissibility check.
    pub beta: Option<f64>,
    pub gamma: f64,
    /// Overrides the map's declared integrability exponent.
    pub r: Option<f64>,
    /// Ulam grid size.
    pub n: usize,
    /// Branches scanned for countable partitions.
    pub truncation: usize,
    pub quad_order: usize,
    /// Random densities in the Lasota-Yorke check.
    pub samples: usize,
    pub seed: u64,
    /// Longest orbit in the iterated essential-radius bound.
    pub k_max: usize,
    /// Eigenvalues listed in the spectrum report.
    pub eigen_count: usize,
    /// Correlation steps, observable and test function of the decay run.
    pub decay_steps: usize,
    pub decay_h: String,
    pub decay_phi: String,
    /// Repeat the Lasota-Yorke samples on grid `2n`.
    pub refine: bool,
    /// Diagonalize on grid `2n` to label stable eigenvalues.
    pub stability: bool,
    pub output: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            map: MapSpec::catalog("doubling"),
            weight: WeightSpec::default(),
            alpha: 0.5,
            beta: None,
            gamma: 0.0,
            r: None,
            n: 256,
            truncation: 500,
            quad_order: 8,
            samples: 100,
            seed: 1,
            k_max: 20,
            eigen_count: 20,
            decay_steps: 10,
            decay_h: "x - 1/2".into(),
            decay_phi: "x".into(),
            refine: true,
            stability: true,
            output: PathBuf::from("fracbv-out"),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config `{}`: {e}", path.display()))
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Range checks on the plain numeric fields; the map, weight and
    /// exponents are checked by the modules that own them.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n < 2 {
            return bad(format!("n = {} must be at least 2", self.n));
        }
        if self.quad_order < 2 {
            return bad(format!("quad_order = {} must be at least 2", self.quad_order));
        }
        if self.truncation == 0 {
            return bad("truncation must be positive".into());
        }
        if self.k_max < 2 {
            return bad(format!("k_max = {} must be at least 2", self.k_max));
        }
        if self.decay_steps == 0 {
            return bad("decay_steps must be positive".into());
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> Result<String> {
        Ok(hex(&Sha256::digest(serde_json::to_vec(self)?)))
    }

    pub fn build_map(&self) -> Result<PiecewiseMap> {
        build_map(&self.map)
    }

    pub fn build_weight(&self, map: &PiecewiseMap) -> Result<Weight> {
        build_weight(&self.weight, map)
    }

    /// `(α, β, γ, r)` with the overrides applied.
    pub fn params(&self, map: &PiecewiseMap, weight: &Weight) -> Result<HolderParams> {
        HolderParams::new(
            self.alpha,
            self.beta.unwrap_or(weight.holder_beta()),
            self.gamma,
            self.r.unwrap_or(map.deriv_integrability_r()),
        )
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
