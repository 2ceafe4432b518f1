//! Eigen-analysis of Ulam matrices: spectra, invariant densities, the
//! spectral-radius bounds, and decay of correlations.

mod dense;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::holder_space::{GridFunction, HolderParams, TestFunction};
use crate::ly_lab::admissible_alpha;
use crate::map_model::{default_sup_samples, weighted_derivative_sup, PiecewiseMap, Weight};
use crate::stats::fit_line;
use crate::transfer::{apply_matrix, ulam_matrix, UlamMatrix, UlamOptions};

pub use dense::eigenvalues;

/// Largest matrix handed to the dense eigen solver by default.
pub const DENSE_LIMIT: usize = 4096;
/// Agreement required between the QR and power-iteration leading eigenvalues.
pub const POWER_AGREEMENT_TOL: f64 = 1e-8;
/// Iteration cap of the power-method cross-check.
const POWER_MAX_ITER: usize = 20_000;
/// Most negative cell value tolerated in an invariant density.
pub const DENSITY_NEGATIVITY_TOL: f64 = -1e-10;
/// Eigenvalues this far above `ess_rate_power` are candidates for point spectrum.
pub const STABILITY_MARGIN: f64 = 0.1;
/// Largest move under grid doubling for a candidate to count as stable.
pub const STABILITY_MOVE_TOL: f64 = 1e-2;

/// Power-method estimate of the leading eigenvalue.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerCheck {
    pub estimate: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `|estimate - λ₁| ≤ 1e-8 max(1, |λ₁|)` for the QR value `λ₁`.
    pub agrees: bool,
}

/// Spectrum of one matrix.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Spectrum {
    pub n: usize,
    /// Every eigenvalue, sorted by decreasing modulus.
    pub eigenvalues: Vec<Complex64>,
    pub power_check: PowerCheck,
    /// Eigenvector of a real leading eigenvalue, scaled to unit integral
    /// (or unit max norm when its integral vanishes).
    pub leading_eigenvector: Option<GridFunction<f64>>,
}

impl Spectrum {
    pub fn leading(&self) -> Complex64 {
        self.eigenvalues[0]
    }

    /// Modulus of the second eigenvalue, 0 for a 1 × 1 matrix.
    pub fn second_modulus(&self) -> f64 {
        self.eigenvalues.get(1).map_or(0.0, |z| z.norm())
    }

    pub fn eigenvalues_csv(&self) -> String {
        let mut out = String::from("index,re,im,modulus\n");
        for (i, z) in self.eigenvalues.iter().enumerate() {
            out.push_str(&format!("{i},{:e},{:e},{:e}\n", z.re, z.im, z.norm()));
        }
        out
    }
}

fn scale_to_unit_integral(v: Vec<f64>) -> Result<GridFunction<f64>> {
    let n = v.len() as f64;
    let integral: f64 = v.iter().sum::<f64>() / n;
    if integral.abs() > 1e-300 {
        GridFunction::new(v.into_iter().map(|a| a / integral).collect())
    } else {
        GridFunction::new(v)
    }
}

/// Full dense eigendecomposition of `m` with a power-method cross-check of
/// the leading pair.
pub fn eigen(m: &UlamMatrix, dense_limit: usize) -> Result<Spectrum> {
    let n = m.n();
    if n > dense_limit {
        return Err(Error::DenseLimit { n, limit: dense_limit });
    }
    let eigenvalues = dense::eigenvalues(m.entries(), n)?;
    let lead = eigenvalues[0];
    let power = dense::power_iteration(m.entries(), n, POWER_MAX_ITER);
    let agrees = power.converged
        && (power.value - lead.re).abs() <= POWER_AGREEMENT_TOL * lead.norm().max(1.0)
        && lead.im == 0.0;
    let leading_eigenvector = if lead.im == 0.0 && lead.re != 0.0 {
        Some(scale_to_unit_integral(dense::inverse_iteration(
            m.entries(),
            n,
            lead.re,
        ))?)
    } else {
        None
    };
    Ok(Spectrum {
        n,
        eigenvalues,
        power_check: PowerCheck {
            estimate: power.value,
            iterations: power.iterations,
            converged: power.converged,
            agrees,
        },
        leading_eigenvector,
    })
}

/// Normalized leading eigenvector of `m`.
///
/// The leading eigenvalue is located by the power method when it converges
/// (the usual case for nonnegative matrices) and by the dense QR solver
/// otherwise; the vector itself comes from inverse iteration at that value.
pub fn leading_density(m: &UlamMatrix) -> Result<GridFunction<f64>> {
    let n = m.n();
    let power = dense::power_iteration(m.entries(), n, POWER_MAX_ITER);
    let lead = if power.converged {
        Complex64::new(power.value, 0.0)
    } else {
        if n > DENSE_LIMIT {
            return Err(Error::DenseLimit { n, limit: DENSE_LIMIT });
        }
        dense::eigenvalues(m.entries(), n)?[0]
    };
    if !(lead.re > 0.0) || lead.im.abs() > 1e-12 * lead.norm() {
        return Err(Error::LeadingEigenvalueNotPositive {
            re: lead.re,
            im: lead.im,
        });
    }
    let h = scale_to_unit_integral(dense::inverse_iteration(m.entries(), n, lead.re))?;
    let min = h.values().iter().cloned().fold(f64::INFINITY, f64::min);
    if min < DENSITY_NEGATIVITY_TOL {
        return Err(Error::NegativeDensity(min));
    }
    Ok(h)
}

/// Leading eigenvector of the Ulam matrix on `n` cells with `truncation`
/// branches, normalized to unit integral.
pub fn invariant_density(
    map: &PiecewiseMap,
    weight: &Weight,
    n: usize,
    truncation: usize,
) -> Result<GridFunction<f64>> {
    let m = ulam_matrix(
        map,
        weight,
        n,
        &UlamOptions {
            truncation,
            ..Default::default()
        },
    )?;
    leading_density(&m)
}

/// Options of [`theorem_bounds`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundsOptions {
    /// Longest inverse orbit composed.
    pub k_max: usize,
    pub gamma: f64,
    pub truncation: usize,
    /// Cells of the grid carrying the orbit recursion.
    pub cells: usize,
}

impl Default for BoundsOptions {
    fn default() -> Self {
        BoundsOptions {
            k_max: 20,
            gamma: 0.0,
            truncation: 500,
            cells: 2048,
        }
    }
}

/// The spectral-radius bound and the two essential-radius bounds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoremBounds {
    pub alpha: f64,
    /// `sup |ξ f'|`.
    pub rho_bound: f64,
    /// `min(rho_bound, 8 sup |ξ (f')^α|)`.
    pub ess_bound_single: f64,
    /// Limit estimate of `(8 sup |ξ_k (f_k')^α|)^{1/k}`.
    pub ess_rate_power: f64,
    /// `(8 S_k)^{1/k}` for `k = 1..=k_max`.
    pub rate_sequence: Vec<f64>,
    /// True when the suprema rest on sampling only (no closed-form map).
    pub heuristic: bool,
}

/// `S_k = sup |ξ_k (f_k')^α|` for `k = 1..=k_max`, where `ξ_k` and `f_k'`
/// multiply `ξ` and `f'` along orbits of length `k`.
///
/// The supremum runs through a max-times recursion on a uniform grid:
/// `V_k(c) = max_{y ∈ c} w(y) V_{k-1}(cell of f(y))`, `w = |ξ| |f'|^α`,
/// over closure samples of every branch. Taking the maximum over a whole
/// target cell errs upward and vanishes as the grid is refined.
fn orbit_suprema(
    map: &PiecewiseMap,
    weight: &Weight,
    alpha: f64,
    options: &BoundsOptions,
) -> Vec<f64> {
    let cells = options.cells.max(1);
    let cf = cells as f64;
    let cell_of = |x: f64| ((x * cf).floor().max(0.0) as usize).min(cells - 1);
    // (source cell, weight, target cell) for every sample point.
    let mut points: Vec<(usize, f64, usize)> = Vec::new();
    let base = if map.is_infinite() { 64 } else { 2 };
    for i in 0..map.branch_count(options.truncation) {
        let b = map.branch(i);
        let dom = b.domain();
        let count = base + (4.0 * cf * dom.len()).ceil() as usize;
        for y in crate::map_model::closure_samples(dom, count) {
            let fy = b.forward(y);
            let w = weight.modulus_times_derivative_pow(i, &b, y, alpha);
            if fy.is_finite() && w.is_finite() {
                points.push((cell_of(y), w, cell_of(fy)));
            }
        }
    }
    let mut v = vec![1.0; cells];
    let mut sups = Vec::with_capacity(options.k_max);
    for _ in 0..options.k_max {
        let mut next = vec![0.0f64; cells];
        for &(c, w, t) in &points {
            next[c] = next[c].max(w * v[t]);
        }
        sups.push(next.iter().cloned().fold(0.0, f64::max));
        v = next;
    }
    sups
}

/// Evaluates the spectral-radius bound `sup|ξf'|`, the single-step essential
/// bound `min(sup|ξf'|, 8 sup|ξ(f')^α|)`, and its iterate-sharpened form.
///
/// The sharpened rate is the exponential of the slope of `log(8 S_k)` over
/// the second half of `k = 1..=k_max`, which removes the `8^{1/k}` factor the
/// raw k-th roots still carry at moderate `k`. It is capped by the
/// single-step bound, which dominates it in the limit.
pub fn theorem_bounds(
    map: &PiecewiseMap,
    weight: &Weight,
    alpha: f64,
    options: &BoundsOptions,
) -> Result<TheoremBounds> {
    if options.k_max < 2 {
        return Err(Error::InvalidArgument(format!(
            "k_max = {} must be at least 2",
            options.k_max
        )));
    }
    let params = HolderParams::new(
        alpha,
        weight.holder_beta(),
        options.gamma,
        map.deriv_integrability_r(),
    )?;
    admissible_alpha(&params).require()?;
    let samples = default_sup_samples(map);
    let rho_bound = weighted_derivative_sup(map, weight, 1.0, options.truncation, samples);
    let single = weighted_derivative_sup(map, weight, alpha, options.truncation, samples);
    let ess_bound_single = rho_bound.min(8.0 * single);
    let sups = orbit_suprema(map, weight, alpha, options);
    let rate_sequence: Vec<f64> = sups
        .iter()
        .enumerate()
        .map(|(k, s)| (8.0 * s).powf(1.0 / (k + 1) as f64))
        .collect();
    let ess_rate_power = if sups.iter().any(|&s| s <= 0.0) {
        0.0
    } else {
        let start = options.k_max / 2;
        let xs: Vec<f64> = (start..options.k_max).map(|k| (k + 1) as f64).collect();
        let ys: Vec<f64> = sups[start..].iter().map(|s| (8.0 * s).ln()).collect();
        let (slope, _) = fit_line(&xs, &ys).unwrap_or((f64::NEG_INFINITY, 0.0));
        slope.exp().min(ess_bound_single)
    };
    Ok(TheoremBounds {
        alpha,
        rho_bound,
        ess_bound_single,
        ess_rate_power,
        rate_sequence,
        heuristic: !map.is_closed_form(),
    })
}

/// One reported eigenvalue with its reliability labels.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenEntry {
    pub re: f64,
    pub im: f64,
    pub modulus: f64,
    /// Modulus above `ess_rate_power + 0.1`: outside the essential-spectrum
    /// bound, so a candidate for genuine point spectrum.
    pub candidate: bool,
    /// Distance to the nearest eigenvalue on the doubled grid.
    pub moved: Option<f64>,
    /// Candidate that moved by at most `1e-2` under grid doubling.
    pub stable: Option<bool>,
}

/// Labels `coarse` against the eigenvalues of the matrix on the doubled grid.
pub fn stability_filter(
    coarse: &[Complex64],
    fine: Option<&[Complex64]>,
    ess_rate_power: f64,
) -> Vec<EigenEntry> {
    coarse
        .iter()
        .map(|z| {
            let candidate = z.norm() > ess_rate_power + STABILITY_MARGIN;
            let moved = fine.map(|f| f.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min));
            EigenEntry {
                re: z.re,
                im: z.im,
                modulus: z.norm(),
                candidate,
                moved,
                stable: moved.map(|d| candidate && d <= STABILITY_MOVE_TOL),
            }
        })
        .collect()
}

/// Options of [`spectrum_report`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumOptions {
    pub n: usize,
    /// Eigenvalues listed in the report (all are computed).
    pub count: usize,
    pub quad_order: usize,
    pub bounds: BoundsOptions,
    /// Also diagonalize the matrix on `2n` cells for the stability filter.
    pub stability: bool,
    pub dense_limit: usize,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            n: 256,
            count: 20,
            quad_order: 8,
            bounds: BoundsOptions::default(),
            stability: true,
            dense_limit: DENSE_LIMIT,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub map: String,
    pub weight: String,
    pub n: usize,
    pub truncation: usize,
    pub coverage_defect: f64,
    #[serde(with = "crate::serde_f64")]
    pub summability_tail: f64,
    pub leading_eigenvalue: Complex64,
    pub second_modulus: f64,
    pub power_check: PowerCheck,
    pub eigenvalues: Vec<EigenEntry>,
    pub leading_eigenvector: Option<GridFunction<f64>>,
    pub bounds: TheoremBounds,
}

/// Matrix, spectrum, bounds and stability labels in one report. The full
/// spectrum is returned alongside for CSV export.
pub fn spectrum_report(
    map: &PiecewiseMap,
    weight: &Weight,
    alpha: f64,
    options: &SpectrumOptions,
) -> Result<(SpectrumReport, Spectrum)> {
    let bounds = theorem_bounds(map, weight, alpha, &options.bounds)?;
    let ulam = UlamOptions {
        quad_order: options.quad_order,
        truncation: options.bounds.truncation,
        ..Default::default()
    };
    let m = ulam_matrix(map, weight, options.n, &ulam)?;
    let spectrum = eigen(&m, options.dense_limit)?;
    let fine = if options.stability && 2 * options.n <= options.dense_limit {
        let m2 = ulam_matrix(map, weight, 2 * options.n, &ulam)?;
        Some(dense::eigenvalues(m2.entries(), m2.n())?)
    } else {
        None
    };
    let shown = options.count.min(spectrum.eigenvalues.len());
    let eigenvalues = stability_filter(
        &spectrum.eigenvalues[..shown],
        fine.as_deref(),
        bounds.ess_rate_power,
    );
    let report = SpectrumReport {
        map: map.name().to_string(),
        weight: weight.name().to_string(),
        n: options.n,
        truncation: m.meta().truncation,
        coverage_defect: m.meta().coverage_defect,
        summability_tail: m.meta().summability_tail,
        leading_eigenvalue: spectrum.leading(),
        second_modulus: spectrum.second_modulus(),
        power_check: spectrum.power_check.clone(),
        eigenvalues,
        leading_eigenvector: spectrum.leading_eigenvector.clone(),
        bounds,
    };
    Ok((report, spectrum))
}

/// Correlation sequence and its geometric fit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayReport {
    pub n: usize,
    /// `C_k` for `k = 1..=n_max`.
    pub correlations: Vec<f64>,
    /// `C_k` on the halved grid, used to detect unresolved terms.
    pub coarse_correlations: Vec<f64>,
    /// `k` values entering the fit.
    pub fit_window: Vec<usize>,
    /// Fitted `|C_k| ≈ c q^k`; `None` without two usable terms.
    pub rate: Option<f64>,
}

impl DecayReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,c_k,c_k_coarse,in_fit\n");
        for (i, (c, cc)) in self.correlations.iter().zip(&self.coarse_correlations).enumerate() {
            let k = i + 1;
            out.push_str(&format!(
                "{k},{c:e},{cc:e},{}\n",
                u8::from(self.fit_window.contains(&k))
            ));
        }
        out
    }
}

/// Relative disagreement between grids `n` and `n/2` above which a term is
/// treated as unresolved by the discretization.
pub const DECAY_RESOLUTION_TOL: f64 = 0.05;

fn correlations(
    m: &UlamMatrix,
    h: &GridFunction<f64>,
    phi: &TestFunction,
    n_max: usize,
) -> Result<Vec<f64>> {
    let n = m.n();
    let density = leading_density(m)?;
    let weights = phi.cell_integrals(n);
    let pair = |g: &GridFunction<f64>| g.values().iter().zip(&weights).map(|(a, b)| a * b).sum::<f64>();
    let baseline = h.integral() * pair(&density);
    let mut g = h.clone();
    let mut out = Vec::with_capacity(n_max);
    for _ in 0..n_max {
        g = apply_matrix(m, &g)?;
        out.push(pair(&g) - baseline);
    }
    Ok(out)
}

fn coarsen(h: &GridFunction<f64>) -> Result<GridFunction<f64>> {
    GridFunction::new(h.values().chunks(2).map(|c| 0.5 * (c[0] + c[1])).collect())
}

/// `C_k = ∫ (M^k h) φ - (∫ h)(∫ φ dμ)` for `k = 1..=n_max`, with `μ` the
/// invariant density of the same matrix, and a geometric rate fitted on the
/// second half of the sequence.
///
/// The whole sequence is recomputed on `n/2` cells; terms where the two
/// grids disagree by more than 5% (or that sit at rounding level) are left out of the fit,
/// since they reflect the grid rather than the operator.
pub fn correlation_decay(
    map: &PiecewiseMap,
    weight: &Weight,
    h: &GridFunction<f64>,
    phi: &TestFunction,
    n_max: usize,
    n: usize,
    ulam: &UlamOptions,
) -> Result<DecayReport> {
    if n < 4 || n % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "decay grid n = {n} must be even and at least 4"
        )));
    }
    let h = if h.n() == n {
        h.clone()
    } else if n % h.n() == 0 {
        h.refine(n / h.n())?
    } else {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: h.n(),
        });
    };
    let m = ulam_matrix(map, weight, n, ulam)?;
    let fine = correlations(&m, &h, phi, n_max)?;
    let m_half = ulam_matrix(map, weight, n / 2, ulam)?;
    let coarse = correlations(&m_half, &coarsen(&h)?, phi, n_max)?;
    // Terms at rounding level carry no rate information.
    let phi_max = phi.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = 1e-12 * h.l1_norm() * phi_max;
    let resolved = |k: usize| {
        let (c, cc) = (fine[k - 1], coarse[k - 1]);
        c.abs() > floor && (c - cc).abs() <= DECAY_RESOLUTION_TOL * c.abs()
    };
    let mut fit_window: Vec<usize> = (n_max / 2 + 1..=n_max).filter(|&k| resolved(k)).collect();
    if fit_window.len() < 2 {
        // Fall back to the last two resolved terms of the whole sequence.
        let all: Vec<usize> = (1..=n_max).filter(|&k| resolved(k)).collect();
        fit_window = all[all.len().saturating_sub(2)..].to_vec();
    }
    let rate = if fit_window.len() >= 2 {
        let xs: Vec<f64> = fit_window.iter().map(|&k| k as f64).collect();
        let ys: Vec<f64> = fit_window.iter().map(|&k| fine[k - 1].abs().ln()).collect();
        fit_line(&xs, &ys).map(|(s, _)| s.exp())
    } else {
        None
    };
    Ok(DecayReport {
        n,
        correlations: fine,
        coarse_correlations: coarse,
        fit_window,
        rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map_model::{cusp, doubling, gauss, tent};

    #[test]
    fn two_by_two_spectrum() {
        let meta = ulam_matrix(&doubling(), &Weight::constant(0.5), 2, &UlamOptions::default())
            .unwrap()
            .meta()
            .clone();
        let m = UlamMatrix::from_entries(2, vec![0.5; 4], meta).unwrap();
        let s = eigen(&m, DENSE_LIMIT).unwrap();
        assert!((s.leading().re - 1.0).abs() < 1e-14);
        assert!(s.second_modulus() < 1e-14);
        assert!(s.power_check.agrees);
        let v = s.leading_eigenvector.unwrap();
        assert!(v.values().iter().all(|x| (x - 1.0).abs() < 1e-12));
        assert!(matches!(eigen(&m, 1), Err(Error::DenseLimit { .. })));
    }

    #[test]
    fn doubling_leading_eigenvalue() {
        let m = ulam_matrix(&doubling(), &Weight::constant(0.5), 64, &UlamOptions::default())
            .unwrap();
        let s = eigen(&m, DENSE_LIMIT).unwrap();
        assert!((s.leading().re - 1.0).abs() < 1e-10);
        assert!(s.power_check.agrees);
        assert!(s.eigenvalues_csv().lines().count() == 65);
    }

    #[test]
    fn finite_densities() {
        for map in [doubling(), tent()] {
            let pf = Weight::perron_frobenius_for(&map).unwrap();
            let h = invariant_density(&map, &pf, 64, 0).unwrap();
            assert!(h.values().iter().all(|v| (v - 1.0).abs() < 1e-10), "{}", map.name());
        }
        let c = cusp(0.75).unwrap();
        let pf = Weight::perron_frobenius_for(&c).unwrap();
        let h = invariant_density(&c, &pf, 128, 0).unwrap();
        assert!((h.integral() - 1.0).abs() < 1e-12);
        let m = ulam_matrix(&c, &pf, 128, &UlamOptions::default()).unwrap();
        let mh = apply_matrix(&m, &h).unwrap();
        assert!(mh.l1_distance(&h).unwrap() < 1e-8);
    }

    #[test]
    fn gauss_density_small_grid() {
        let g = gauss();
        let pf = Weight::perron_frobenius_for(&g).unwrap();
        let h = invariant_density(&g, &pf, 128, 500).unwrap();
        let exact = GridFunction::sample_midpoints(128, |x| 1.0 / ((1.0 + x) * 2f64.ln())).unwrap();
        assert!(h.l1_distance(&exact).unwrap() < 1e-2);
    }

    #[test]
    fn bounds_examples() {
        let b = theorem_bounds(&doubling(), &Weight::constant(0.5), 0.5, &BoundsOptions::default())
            .unwrap();
        assert_eq!(b.rho_bound, 1.0);
        assert_eq!(b.ess_bound_single, 1.0);
        assert!((b.ess_rate_power - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(!b.heuristic);

        let c = cusp(0.75).unwrap();
        let pf = Weight::perron_frobenius_for(&c).unwrap();
        let b = theorem_bounds(&c, &pf, 0.8, &BoundsOptions::default()).unwrap();
        assert!((b.ess_rate_power - 1.5f64.powf(-0.2)).abs() < 1e-6, "{b:?}");
        assert!(b.ess_rate_power <= b.ess_bound_single && b.ess_bound_single <= b.rho_bound);

        let zero = theorem_bounds(&doubling(), &Weight::constant(0.0), 0.5, &BoundsOptions::default())
            .unwrap();
        assert_eq!((zero.rho_bound, zero.ess_bound_single, zero.ess_rate_power), (0.0, 0.0, 0.0));

        assert!(matches!(
            theorem_bounds(&c, &pf, 0.5, &BoundsOptions::default()),
            Err(Error::NotAdmissible { .. })
        ));
    }

    #[test]
    fn stability_labels() {
        let coarse = [Complex64::new(1.0, 0.0), Complex64::new(0.3, 0.0)];
        let fine = [Complex64::new(1.0, 0.0), Complex64::new(0.2, 0.0)];
        let e = stability_filter(&coarse, Some(&fine), 0.5);
        assert!(e[0].candidate && e[0].stable == Some(true));
        assert!(!e[1].candidate && e[1].stable == Some(false));
        assert!(stability_filter(&coarse, None, 0.5)[0].stable.is_none());
    }

    #[test]
    fn doubling_decay() {
        let d = doubling();
        let w = Weight::constant(0.5);
        let h = GridFunction::sample_midpoints(256, |x| x - 0.5).unwrap();
        let phi = TestFunction::from_fn(2, |x| x).unwrap();
        let r = correlation_decay(&d, &w, &h, &phi, 6, 256, &UlamOptions::default()).unwrap();
        for (k, c) in r.correlations.iter().enumerate() {
            let want = 0.5f64.powi(k as i32 + 1) / 12.0;
            assert!((c - want).abs() < 1e-4, "{k}: {c}");
        }
        assert!((r.rate.unwrap() - 0.5).abs() < 0.01, "{r:?}");
        let one = GridFunction::constant(256, 1.0).unwrap();
        let r = correlation_decay(&d, &w, &one, &phi, 4, 256, &UlamOptions::default()).unwrap();
        assert!(r.correlations.iter().all(|c| c.abs() < 1e-12));
        assert!(r.rate.is_none());
        assert!(r.to_csv().lines().count() == 5);
    }
}
