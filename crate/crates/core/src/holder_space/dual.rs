//! The dual norm `‖h‖_α` and checks built on it.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::flow;
use super::grid::GridFunction;
use super::test_function::{check_alpha, TestFunction};
use crate::error::{Error, Result};

/// Default optimality gap.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Default number of phases for complex densities.
pub const DEFAULT_PHASES: usize = 16;
const MAX_OUTER: usize = 200;

/// Solution of the nodal program, with the certificate pair.
#[derive(Clone, Debug, Serialize)]
pub struct DualNorm {
    /// Certified lower bound, attained by `phi`; reported as the norm.
    pub value: f64,
    /// Upper bound from a feasible flow.
    pub upper: f64,
    /// Sup-norm share `t` of the test-norm budget at the optimum.
    pub t: f64,
    /// Maximizing test function, normalized to `|φ|_α ≤ 1`.
    pub phi: TestFunction,
    pub outer_iterations: usize,
    pub pivots: usize,
}

/// `‖h‖_α` to optimality gap `tol`.
pub fn dual_norm(h: &GridFunction<f64>, alpha: f64, tol: f64) -> Result<f64> {
    Ok(dual_norm_detailed(h, alpha, tol)?.value)
}

/// `‖h‖_α` with the maximizing test function and the bound pair.
///
/// The program runs over test functions given by their values at the `n + 1`
/// cell boundaries of `h`: `maximize Σ_i h_i (φ_{i+1} - φ_i)` subject to
/// `|φ_j| ≤ t`, `|φ_j - φ_k| ≤ s |x_j - x_k|^α`, `t + s ≤ 1`.
pub fn dual_norm_detailed(h: &GridFunction<f64>, alpha: f64, tol: f64) -> Result<DualNorm> {
    check_alpha(alpha)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} must be positive")));
    }
    let n = h.n();
    let g = h.node_weights();
    let out = flow::maximize(&g, n, alpha, tol, MAX_OUTER)?;
    let phi = TestFunction::new(out.phi)?;
    // Re-certify the bound from the returned test function itself.
    let norm = phi.test_norm(alpha)?;
    let objective: f64 = g.iter().zip(phi.values()).map(|(a, b)| a * b).sum();
    let (value, phi) = if norm > 0.0 {
        let phi = TestFunction::new(phi.values().iter().map(|v| v / norm).collect())?;
        ((objective / norm).max(0.0), phi)
    } else {
        (0.0, phi)
    };
    debug_assert!(value >= out.lower - 1e-9 * out.lower.abs().max(1.0));
    let upper = out.upper.max(value);
    if upper - value > tol * upper.max(1.0) {
        return Err(Error::LpNonConvergence {
            lower: value,
            upper,
        });
    }
    Ok(DualNorm {
        value,
        upper,
        t: out.t,
        phi,
        outer_iterations: out.outer_iterations,
        pivots: out.pivots,
    })
}

/// `‖h‖_α` for complex `h`: the largest real norm of `Re(e^{iθ} h)`.
///
/// Evaluated on `phases` equally spaced angles in `[0, π)` (the real norm is
/// even in `h`, so `[π, 2π)` repeats them), followed by one finer sweep
/// around the best angle.
pub fn dual_norm_complex(
    h: &GridFunction<Complex64>,
    alpha: f64,
    tol: f64,
    phases: usize,
) -> Result<f64> {
    if h.is_real() {
        return dual_norm(&h.real_part(), alpha, tol);
    }
    if phases == 0 {
        return Err(Error::InvalidArgument("phase count must be positive".into()));
    }
    let step = PI / phases as f64;
    let mut best = (0.0, f64::NEG_INFINITY);
    for k in 0..phases {
        let theta = step * k as f64;
        let v = dual_norm(&h.rotated_real_part(theta), alpha, tol)?;
        if v > best.1 {
            best = (theta, v);
        }
    }
    let sub = phases.max(2);
    for k in 1..sub {
        let theta = best.0 - step + 2.0 * step * k as f64 / sub as f64;
        let v = dual_norm(&h.rotated_real_part(theta), alpha, tol)?;
        if v > best.1 {
            best = (theta, v);
        }
    }
    Ok(best.1)
}

/// Outcome of `|h|_{L^{1/α}} ≤ 2 ‖h‖_α`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmbeddingCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

pub fn embedding_check(h: &GridFunction<f64>, alpha: f64, tol: f64) -> Result<EmbeddingCheck> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "embedding check needs alpha in (0, 1), got {alpha}"
        )));
    }
    let lhs = h.lp_norm(1.0 / alpha)?;
    let rhs = 2.0 * dual_norm(h, alpha, tol)?;
    Ok(EmbeddingCheck {
        lhs,
        rhs,
        pass: lhs <= rhs + tol,
    })
}

/// Greedy L¹ ε-net over a sample set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompactnessReport {
    pub samples: usize,
    pub eps: f64,
    pub net_size: usize,
    /// Net size over the first half of the samples.
    pub half_net_size: usize,
    /// `net_size / half_net_size - 1`.
    pub growth: f64,
}

/// Builds a greedy ε-net in L¹: a sample becomes a center when it is farther
/// than `eps` from all existing centers.
///
/// Samples are expected to lie in the unit ball of the dual norm (see
/// [`unit_ball_samples`]); the probe itself only measures distances.
pub fn compactness_probe(samples: &[GridFunction<f64>], eps: f64) -> Result<CompactnessReport> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps = {eps} must be positive")));
    }
    let half = samples.len() / 2;
    let mut centers: Vec<&GridFunction<f64>> = Vec::new();
    let mut half_net_size = 0;
    for (i, s) in samples.iter().enumerate() {
        if i == half {
            half_net_size = centers.len();
        }
        let mut covered = false;
        for c in &centers {
            if c.l1_distance(s)? <= eps {
                covered = true;
                break;
            }
        }
        if !covered {
            centers.push(s);
        }
    }
    if samples.len() == 1 {
        half_net_size = centers.len();
    }
    let net_size = centers.len();
    let growth = if half_net_size == 0 {
        0.0
    } else {
        net_size as f64 / half_net_size as f64 - 1.0
    };
    Ok(CompactnessReport {
        samples: samples.len(),
        eps,
        net_size,
        half_net_size,
        growth,
    })
}

/// Random step functions with at most `max_jumps` interior jumps and values
/// uniform in `[-1, 1]`, scaled by their total variation.
///
/// Since `‖h‖_α ≤ Σ_j |g_j| = TV(h)` for every `α`, the samples lie in the
/// unit ball of every dual norm without solving any program.
pub fn unit_ball_samples(
    n: usize,
    count: usize,
    max_jumps: usize,
    seed: u64,
) -> Result<Vec<GridFunction<f64>>> {
    if n == 0 || max_jumps == 0 {
        return Err(Error::InvalidArgument(
            "unit-ball samples need n ≥ 1 and at least one jump".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let jumps = rng.random_range(1..=max_jumps);
        let mut cuts: Vec<usize> = (0..jumps).map(|_| rng.random_range(1..n.max(2))).collect();
        cuts.push(n);
        cuts.sort_unstable();
        let mut values = vec![0.0; n];
        let mut start = 0;
        for &end in &cuts {
            let v: f64 = rng.random_range(-1.0..1.0);
            values[start..end.min(n)].iter_mut().for_each(|x| *x = v);
            start = end.min(n);
        }
        let h = GridFunction::new(values)?;
        let tv = h.total_variation();
        if tv > 0.0 {
            out.push(h.scale(1.0 / tv));
        }
    }
    Ok(out)
}
