//! Hypothesis and conclusion checks for the spectral theorems: admissible
//! exponents, summability over countable partitions, the two Lasota-Yorke
//! inequalities, and the uniform Hölder condition on potentials.

mod verify;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::holder_space::HolderParams;
use crate::map_model::{closure_samples, PiecewiseMap, Weight};
use crate::stats::fit_line;

pub use verify::{ly_verify, LyOptions, LyRefinement, LyReport, LySample, LyTolerances};

/// Admissible range of `α` for given `β, γ, r`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub params: HolderParams,
    /// `β > 1/(r + 1)`.
    pub beta_ok: bool,
    /// `max{γ, 1 - β, (1 - β)/(1 - β(1 - r))}`.
    pub alpha_lower: f64,
    /// Open interval `(alpha_lower, 1)`; `None` when empty.
    pub alpha_range: Option<[f64; 2]>,
    /// `max{γ, 1 - β}`: the lower bound without the integrability term.
    pub theorem2_alpha_lower: f64,
    /// Whether `params.alpha` lies in `alpha_range`.
    pub alpha_ok: bool,
    /// Human-readable names of the violated inequalities.
    pub violated: Vec<String>,
}

impl AdmissibilityReport {
    /// Converts a failed check into [`Error::NotAdmissible`].
    pub fn require(&self) -> Result<()> {
        if self.alpha_ok {
            Ok(())
        } else {
            Err(Error::NotAdmissible {
                alpha: self.params.alpha,
                violated: self.violated.join("; "),
            })
        }
    }
}

/// Name of the inequality relating `β` and `r`.
pub const BETA_CONDITION: &str = "β > 1/(r+1)";

/// Evaluates the admissibility inequalities. Never fails: violations are
/// listed in the report.
pub fn admissible_alpha(params: &HolderParams) -> AdmissibilityReport {
    let HolderParams {
        alpha,
        beta,
        gamma,
        r,
    } = *params;
    let beta_ok = if r.is_infinite() {
        beta > 0.0
    } else {
        beta > 1.0 / (r + 1.0)
    };
    let integrability_term = if r.is_infinite() {
        0.0
    } else {
        let denom = 1.0 - beta * (1.0 - r);
        if denom > 0.0 {
            (1.0 - beta) / denom
        } else {
            f64::INFINITY
        }
    };
    let theorem2_alpha_lower = gamma.max(1.0 - beta);
    let alpha_lower = theorem2_alpha_lower.max(integrability_term);
    let alpha_range = (beta_ok && alpha_lower < 1.0).then_some([alpha_lower, 1.0]);
    let mut violated = Vec::new();
    if !beta_ok {
        violated.push(BETA_CONDITION.to_string());
    }
    if !(alpha > alpha_lower) {
        violated.push(format!(
            "α > max{{γ, 1−β, (1−β)/(1−β(1−r))}} = {alpha_lower}"
        ));
    }
    if !(alpha < 1.0) {
        violated.push("α < 1".to_string());
    }
    AdmissibilityReport {
        params: *params,
        beta_ok,
        alpha_lower,
        alpha_range,
        theorem2_alpha_lower,
        alpha_ok: violated.is_empty(),
        violated,
    }
}

/// Samples per branch for the suprema in the summability series.
const SUMMABILITY_SAMPLES: usize = 65;

/// Partial sum and tail estimate of `Σ_p sup_p |ξ (f')^γ|^{1/(1-γ)}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummabilityReport {
    pub gamma: f64,
    pub branches: usize,
    pub partial_sum: f64,
    /// Estimated remainder beyond the scanned branches (0 for finite maps).
    #[serde(with = "crate::serde_f64")]
    pub tail: f64,
    /// Fitted power-law decay exponent `p` of the terms (`term ~ k^{-p}`).
    pub decay_exponent: Option<f64>,
    pub tail_reliable: bool,
    pub terms: Vec<f64>,
}

impl SummabilityReport {
    pub fn estimate(&self) -> f64 {
        self.partial_sum + self.tail
    }
}

/// Evaluates the summability series over the first `truncation` branches
/// (all branches of a finite map).
///
/// The tail is extrapolated from a power-law fit over the last decade of
/// terms, `k ∈ [N/10, N]`. It is marked unreliable when those terms are not
/// nonincreasing or the fitted exponent is at most 1.
pub fn summability(
    map: &PiecewiseMap,
    weight: &Weight,
    gamma: f64,
    truncation: usize,
) -> Result<SummabilityReport> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::InvalidArgument(format!(
            "gamma = {gamma} must lie in [0, 1)"
        )));
    }
    let count = map.branch_count(truncation);
    let power = 1.0 / (1.0 - gamma);
    let terms: Vec<f64> = (0..count)
        .map(|i| {
            let b = map.branch(i);
            closure_samples(b.domain(), SUMMABILITY_SAMPLES)
                .map(|y| weight.modulus_times_derivative_pow(i, &b, y, gamma))
                .fold(0.0, f64::max)
                .powf(power)
        })
        .collect();
    let partial_sum = terms.iter().sum();
    if !map.is_infinite() {
        return Ok(SummabilityReport {
            gamma,
            branches: count,
            partial_sum,
            tail: 0.0,
            decay_exponent: None,
            tail_reliable: true,
            terms,
        });
    }
    let start = (count / 10).max(1);
    let window = &terms[start - 1..];
    let nonincreasing = window.windows(2).all(|w| w[1] <= w[0]);
    let (xs, ys): (Vec<f64>, Vec<f64>) = window
        .iter()
        .enumerate()
        .filter(|(_, &t)| t > 0.0)
        .map(|(k, &t)| (((start + k) as f64).ln(), t.ln()))
        .unzip();
    let fit = fit_line(&xs, &ys);
    let (tail, decay_exponent, reliable) = match fit {
        Some((slope, intercept)) => {
            let p = -slope;
            if p > 1.0 {
                // Σ_{k > N} C k^{-p} ≈ ∫_{N + 1/2}^∞ C x^{-p} dx.
                let c = intercept.exp();
                let edge = count as f64 + 0.5;
                (c * edge.powf(1.0 - p) / (p - 1.0), Some(p), nonincreasing)
            } else {
                (f64::INFINITY, Some(p), false)
            }
        }
        None => {
            let zero = window.iter().all(|&t| t == 0.0);
            (if zero { 0.0 } else { f64::INFINITY }, None, zero)
        }
    };
    Ok(SummabilityReport {
        gamma,
        branches: count,
        partial_sum,
        tail,
        decay_exponent,
        tail_reliable: reliable,
        terms,
    })
}

/// Samples per branch for the empirical Hölder constants of a potential.
const THEOREM2_SAMPLES: usize = 200;

/// Uniform Hölder check of a potential across branches.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Theorem2Report {
    pub beta: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub declared_constant: f64,
    /// Empirical `β`-Hölder constant of the potential on each scanned branch.
    pub branch_constants: Vec<f64>,
    pub max_constant: f64,
    /// Fitted growth exponent `q` of the constants (`C_k ~ k^q`) over the last
    /// decade of branches; `None` for short or finite families.
    pub growth_exponent: Option<f64>,
    pub applicable: bool,
    pub reason: Option<String>,
    /// `(max{γ, 1 - β}, 1)`.
    pub alpha_range: [f64; 2],
    pub alpha_in_range: bool,
}

/// Largest growth exponent of per-branch constants still read as bounded.
pub const THEOREM2_GROWTH_LIMIT: f64 = 0.1;

/// Checks that the potential of `weight` is `β`-Hölder on every scanned
/// branch with the declared constant, and reports the relaxed `α` range.
pub fn theorem2_check(
    map: &PiecewiseMap,
    weight: &Weight,
    alpha: f64,
    gamma: f64,
    truncation: usize,
) -> Result<Theorem2Report> {
    if !weight.as_potential() {
        return Err(Error::InvalidArgument(
            "the relaxed range needs a weight given in potential form".into(),
        ));
    }
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::InvalidArgument(format!(
            "gamma = {gamma} must lie in [0, 1)"
        )));
    }
    let beta = weight.holder_beta();
    let declared = weight.holder_constant();
    let count = map.branch_count(truncation);
    let branch_constants: Vec<f64> = (0..count)
        .map(|i| {
            let b = map.branch(i);
            let xs: Vec<f64> = closure_samples(b.domain(), THEOREM2_SAMPLES).collect();
            let vals: Vec<f64> = xs
                .iter()
                .map(|&x| weight.potential_value(i, x).unwrap_or(0.0))
                .collect();
            let mut q: f64 = 0.0;
            for j in 0..xs.len() {
                for k in j + 1..xs.len() {
                    let d = xs[k] - xs[j];
                    if d > 0.0 {
                        q = q.max((vals[k] - vals[j]).abs() / d.powf(beta));
                    }
                }
            }
            q
        })
        .collect();
    let max_constant = branch_constants.iter().copied().fold(0.0, f64::max);
    let growth_exponent = if count >= 10 {
        let start = (count / 10).max(1);
        let (xs, ys): (Vec<f64>, Vec<f64>) = branch_constants[start - 1..]
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0.0)
            .map(|(k, &c)| (((start + k) as f64).ln(), c.ln()))
            .unzip();
        fit_line(&xs, &ys).map(|(s, _)| s)
    } else {
        None
    };
    let mut reason = None;
    if max_constant > declared * (1.0 + 1e-9) + 1e-12 {
        let worst = branch_constants
            .iter()
            .position(|&c| c == max_constant)
            .unwrap_or(0);
        reason = Some(format!(
            "empirical Hölder constant {max_constant:.6} on branch {worst} exceeds the declared {declared}"
        ));
    } else if let Some(q) = growth_exponent.filter(|&q| q > THEOREM2_GROWTH_LIMIT) {
        reason = Some(format!(
            "per-branch Hölder constants grow like k^{q:.3}: not uniformly Hölder"
        ));
    }
    let lower = gamma.max(1.0 - beta);
    Ok(Theorem2Report {
        beta,
        gamma,
        alpha,
        declared_constant: declared,
        branch_constants,
        max_constant,
        growth_exponent,
        applicable: reason.is_none(),
        reason,
        alpha_range: [lower, 1.0],
        alpha_in_range: alpha > lower && alpha < 1.0,
    })
}
