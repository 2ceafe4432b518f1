//! Hölder test norms, the dual norm `‖h‖_α`, and grid densities.
//!
//! Densities are piecewise constant on a uniform grid. The dual norm is
//! computed exactly for such densities over piecewise-linear test functions
//! with nodes at the cell boundaries; see [`dual_norm_detailed`].

mod dual;
mod flow;
mod grid;
mod test_function;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use dual::{
    compactness_probe, dual_norm, dual_norm_complex, dual_norm_detailed, embedding_check,
    unit_ball_samples, CompactnessReport, DualNorm, EmbeddingCheck, DEFAULT_PHASES, DEFAULT_TOL,
};
pub use grid::{GridFunction, Value};
pub use test_function::{test_norm, TestFunction};

/// The exponents `α, β, γ, r` that parameterize the spectral theorems.
///
/// Admissibility of a combination is computed separately
/// (`ly_lab::admissible_alpha`); construction only checks each domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    #[serde(with = "crate::serde_f64")]
    pub r: f64,
}

impl HolderParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, r: f64) -> Result<Self> {
        let p = HolderParams {
            alpha,
            beta,
            gamma,
            r,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha = {} must lie in (0, 1]",
                self.alpha
            )));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "beta = {} must lie in (0, 1]",
                self.beta
            )));
        }
        if !(self.gamma >= 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "gamma = {} must lie in [0, 1)",
                self.gamma
            )));
        }
        if !(self.r >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "r = {} must be nonnegative",
                self.r
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_domains() {
        assert!(HolderParams::new(0.5, 1.0, 0.0, f64::INFINITY).is_ok());
        assert!(HolderParams::new(0.0, 1.0, 0.0, 1.0).is_err());
        assert!(HolderParams::new(0.5, 0.0, 0.0, 1.0).is_err());
        assert!(HolderParams::new(0.5, 1.0, 1.0, 1.0).is_err());
        assert!(HolderParams::new(0.5, 1.0, 0.0, -1.0).is_err());
    }
}
