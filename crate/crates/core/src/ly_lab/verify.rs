//! Empirical check of the two Lasota-Yorke inequalities on Ulam matrices.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::admissible_alpha;
use crate::error::{Error, Result};
use crate::holder_space::{dual_norm, GridFunction, HolderParams};
use crate::map_model::{default_sup_samples, weighted_derivative_sup, PiecewiseMap, Weight};
use crate::par;
use crate::transfer::{apply_matrix, ulam_matrix, UlamMatrix, UlamOptions};

/// Parameters of one verification run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyOptions {
    /// Grid size; the refinement step uses `2n`.
    pub n: usize,
    /// Number of random samples (deterministic ones are always added).
    pub samples: usize,
    pub seed: u64,
    /// `γ` for the admissibility check.
    pub gamma: f64,
    pub quad_order: usize,
    pub truncation: usize,
    pub dual_norm_tol: f64,
    pub slack_tol: f64,
    /// Also run the samples at grid `2n` and compare fitted constants.
    pub refine: bool,
}

impl Default for LyOptions {
    fn default() -> Self {
        LyOptions {
            n: 256,
            samples: 100,
            seed: 1,
            gamma: 0.0,
            quad_order: 8,
            truncation: 500,
            dual_norm_tol: 1e-8,
            slack_tol: 1e-6,
            refine: true,
        }
    }
}

/// One density and its norms before and after one step of the operator.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LySample {
    pub id: usize,
    pub label: String,
    pub norm_h: f64,
    pub norm_mh: f64,
    pub l1_h: f64,
    pub l1_mh: f64,
    /// `A ‖h‖ + B |h|_{L¹} - ‖Mh‖` with the fitted `B`.
    pub slack: f64,
    /// Set when a dual norm failed to converge; the sample is then skipped.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LyTolerances {
    pub dual_norm_tol: f64,
    pub slack_tol: f64,
    pub l1_tol: f64,
}

/// Fitted constants on the refined grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LyRefinement {
    pub n: usize,
    pub fitted_b: f64,
    pub fitted_b_sharp: f64,
    /// `fitted_B(2n) / fitted_B(n)`, with `0/0 = 1`.
    #[serde(with = "crate::serde_f64")]
    pub ratio: f64,
    #[serde(with = "crate::serde_f64")]
    pub sharp_ratio: f64,
    pub min_slack: f64,
    pub l1_contraction_max_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LyReport {
    pub map: String,
    pub weight: String,
    pub alpha: f64,
    pub n: usize,
    pub seed: u64,
    /// `A = 8 sup |ξ (f')^α|`.
    pub a_const: f64,
    /// `sup |ξ (f')^α|`, the constant without the factor 8.
    pub a_sharp: f64,
    /// `sup |ξ f'|`.
    pub rho_bound: f64,
    /// Smallest `B ≥ 0` with `‖Mh‖ ≤ A ‖h‖ + B |h|_{L¹}` on every sample.
    pub fitted_b: f64,
    /// The same with `a_sharp` in place of `A`.
    pub fitted_b_sharp: f64,
    /// `max |Mh|_{L¹} / (sup|ξ f'| |h|_{L¹})`.
    pub l1_contraction_max_ratio: f64,
    pub min_slack: f64,
    pub slacks_ok: bool,
    pub l1_ok: bool,
    pub skipped: usize,
    pub refinement: Option<LyRefinement>,
    pub tolerances: LyTolerances,
    pub samples: Vec<LySample>,
}

impl LyReport {
    /// Per-sample table as CSV.
    pub fn samples_csv(&self) -> String {
        let mut out = String::from("id,label,norm_h,norm_mh,l1_h,l1_mh,slack,error\n");
        for s in &self.samples {
            out.push_str(&format!(
                "{},{},{:e},{:e},{:e},{:e},{:e},{}\n",
                s.id,
                s.label,
                s.norm_h,
                s.norm_mh,
                s.l1_h,
                s.l1_mh,
                s.slack,
                s.error.as_deref().unwrap_or("")
            ));
        }
        out
    }
}

/// `L¹` tolerance of the first inequality.
const L1_TOL: f64 = 1e-8;
/// Branches whose endpoints get adversarial indicators.
const ADVERSARIAL_BRANCHES: usize = 8;

fn indicator(n: usize, start: usize, end: usize) -> Result<GridFunction<f64>> {
    GridFunction::new((0..n).map(|i| if i >= start && i < end { 1.0 } else { 0.0 }).collect())
}

/// Random, deterministic and adversarial densities, in a fixed order.
fn draw_samples(
    map: &PiecewiseMap,
    options: &LyOptions,
) -> Result<Vec<(String, GridFunction<f64>)>> {
    let n = options.n;
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    for k in 0..options.samples {
        let values = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        out.push((format!("random-{k}"), GridFunction::new(values)?));
    }
    out.push(("one".into(), GridFunction::constant(n, 1.0)?));
    out.push(("indicator[0,1/2)".into(), indicator(n, 0, n / 2)?));
    out.push((
        "x-1/2".into(),
        GridFunction::sample_midpoints(n, |x| x - 0.5)?,
    ));
    // Indicators hugging interior branch endpoints, one cell and n/16 cells wide.
    let mut seen: Vec<(usize, usize)> = Vec::new();
    let count = map.branch_count(options.truncation).min(ADVERSARIAL_BRANCHES);
    for i in 0..count {
        let dom = map.branch(i).domain();
        for e in [dom.lo, dom.hi] {
            if e <= 0.0 || e >= 1.0 {
                continue;
            }
            let cell = ((e * n as f64).round() as usize).min(n);
            for width in [1, (n / 16).max(1)] {
                for (a, b) in [(cell.saturating_sub(width), cell), (cell, (cell + width).min(n))] {
                    if b > a && !seen.contains(&(a, b)) {
                        seen.push((a, b));
                        out.push((format!("edge[{a},{b})"), indicator(n, a, b)?));
                    }
                }
            }
        }
    }
    Ok(out)
}

struct Evaluated {
    norm_h: Option<f64>,
    norm_mh: Option<f64>,
    l1_h: f64,
    l1_mh: f64,
    error: Option<String>,
}

fn evaluate(
    m: &UlamMatrix,
    samples: &[(String, GridFunction<f64>)],
    known_norms: Option<&[Option<f64>]>,
    alpha: f64,
    tol: f64,
) -> Result<Vec<Evaluated>> {
    let ids: Vec<usize> = (0..samples.len()).collect();
    par::map_slice(&ids, |&k| -> Result<Evaluated> {
        let h = &samples[k].1;
        let mh = apply_matrix(m, h)?;
        let mut error = None;
        let mut norm = |g: &GridFunction<f64>| match dual_norm(g, alpha, tol) {
            Ok(v) => Some(v),
            Err(e @ Error::LpNonConvergence { .. }) => {
                error = Some(e.to_string());
                None
            }
            Err(_) => None,
        };
        let norm_h = match known_norms {
            Some(known) => known[k],
            None => norm(h),
        };
        let norm_mh = norm(&mh);
        Ok(Evaluated {
            norm_h,
            norm_mh,
            l1_h: h.l1_norm(),
            l1_mh: mh.l1_norm(),
            error,
        })
    })
    .into_iter()
    .collect()
}

/// Smallest `B ≥ 0` covering every evaluated sample for a given `A`.
fn fit_b(evals: &[Evaluated], a: f64) -> f64 {
    evals
        .iter()
        .filter_map(|e| match (e.norm_h, e.norm_mh) {
            (Some(nh), Some(nm)) if e.l1_h > 0.0 => Some((nm - a * nh).max(0.0) / e.l1_h),
            _ => None,
        })
        .fold(0.0, f64::max)
}

fn l1_ratio(evals: &[Evaluated], rho: f64) -> f64 {
    evals
        .iter()
        .filter(|e| e.l1_h > 0.0)
        .map(|e| e.l1_mh / (rho * e.l1_h))
        .fold(0.0, f64::max)
}

fn slack_of(e: &Evaluated, a: f64, b: f64) -> Option<f64> {
    Some(a * e.norm_h? + b * e.l1_h - e.norm_mh?)
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        if num == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

/// Draws densities, applies the Ulam matrix, and fits the constant `B` of
/// `‖Mh‖_α ≤ A ‖h‖_α + B |h|_{L¹}` with `A = 8 sup|ξ (f')^α|`.
///
/// With `refine`, the same densities (refined to grid `2n`) are pushed
/// through the matrix at `2n`. Their own norms are reused, since refinement
/// adds nodes that do not change the value of the nodal program.
pub fn ly_verify(
    map: &PiecewiseMap,
    weight: &Weight,
    alpha: f64,
    options: &LyOptions,
) -> Result<LyReport> {
    if options.n < 64 {
        return Err(Error::InvalidArgument(format!(
            "Lasota-Yorke verification needs n ≥ 64, got {}",
            options.n
        )));
    }
    let params = HolderParams::new(
        alpha,
        weight.holder_beta(),
        options.gamma,
        map.deriv_integrability_r(),
    )?;
    admissible_alpha(&params).require()?;

    let sup_samples = default_sup_samples(map);
    let a_sharp = weighted_derivative_sup(map, weight, alpha, options.truncation, sup_samples);
    let a_const = 8.0 * a_sharp;
    let rho = weighted_derivative_sup(map, weight, 1.0, options.truncation, sup_samples);

    let ulam = UlamOptions {
        quad_order: options.quad_order,
        truncation: options.truncation,
        ..Default::default()
    };
    let samples = draw_samples(map, options)?;
    let m = ulam_matrix(map, weight, options.n, &ulam)?;
    let evals = evaluate(&m, &samples, None, alpha, options.dual_norm_tol)?;
    let fitted_b = fit_b(&evals, a_const);
    let fitted_b_sharp = fit_b(&evals, a_sharp);
    let l1_contraction_max_ratio = l1_ratio(&evals, rho);

    let mut min_slack = f64::INFINITY;
    let mut skipped = 0;
    let records: Vec<LySample> = samples
        .iter()
        .zip(&evals)
        .enumerate()
        .map(|(id, ((label, _), e))| {
            let slack = slack_of(e, a_const, fitted_b);
            match slack {
                Some(s) => min_slack = min_slack.min(s),
                None => skipped += 1,
            }
            LySample {
                id,
                label: label.clone(),
                norm_h: e.norm_h.unwrap_or(f64::NAN),
                norm_mh: e.norm_mh.unwrap_or(f64::NAN),
                l1_h: e.l1_h,
                l1_mh: e.l1_mh,
                slack: slack.unwrap_or(f64::NAN),
                error: e.error.clone(),
            }
        })
        .collect();

    let refinement = if options.refine {
        let n2 = 2 * options.n;
        let m2 = ulam_matrix(map, weight, n2, &ulam)?;
        let refined: Vec<(String, GridFunction<f64>)> = samples
            .iter()
            .map(|(l, h)| Ok((l.clone(), h.refine(2)?)))
            .collect::<Result<_>>()?;
        let known: Vec<Option<f64>> = evals.iter().map(|e| e.norm_h).collect();
        let evals2 = evaluate(&m2, &refined, Some(&known), alpha, options.dual_norm_tol)?;
        let b2 = fit_b(&evals2, a_const);
        let b2_sharp = fit_b(&evals2, a_sharp);
        let min2 = evals2
            .iter()
            .filter_map(|e| slack_of(e, a_const, b2))
            .fold(f64::INFINITY, f64::min);
        Some(LyRefinement {
            n: n2,
            fitted_b: b2,
            fitted_b_sharp: b2_sharp,
            ratio: ratio(b2, fitted_b),
            sharp_ratio: ratio(b2_sharp, fitted_b_sharp),
            min_slack: min2,
            l1_contraction_max_ratio: l1_ratio(&evals2, rho),
        })
    } else {
        None
    };

    Ok(LyReport {
        map: map.name().to_string(),
        weight: weight.name().to_string(),
        alpha,
        n: options.n,
        seed: options.seed,
        a_const,
        a_sharp,
        rho_bound: rho,
        fitted_b,
        fitted_b_sharp,
        l1_contraction_max_ratio,
        min_slack,
        slacks_ok: min_slack >= -options.slack_tol,
        l1_ok: l1_contraction_max_ratio <= 1.0 + L1_TOL,
        skipped,
        refinement,
        tolerances: LyTolerances {
            dual_norm_tol: options.dual_norm_tol,
            slack_tol: options.slack_tol,
            l1_tol: L1_TOL,
        },
        samples: records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map_model::{doubling, tent};

    #[test]
    fn doubling_constant_density() {
        let opts = LyOptions {
            n: 64,
            samples: 4,
            refine: false,
            ..Default::default()
        };
        let r = ly_verify(&doubling(), &Weight::constant(0.5), 0.5, &opts).unwrap();
        assert!((r.a_const - 4.0 * 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(r.rho_bound, 1.0);
        let one = r.samples.iter().find(|s| s.label == "one").unwrap();
        assert!((one.norm_mh - 2.0 / 3.0).abs() < 1e-8);
        assert!(one.slack > 0.0);
        assert!(r.slacks_ok && r.l1_ok);
        assert!(r.l1_contraction_max_ratio <= 1.0 + 1e-12);
        assert_eq!(r.skipped, 0);
        assert!(r.samples_csv().lines().count() == r.samples.len() + 1);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let opts = LyOptions {
            n: 64,
            samples: 3,
            refine: true,
            ..Default::default()
        };
        let pf = Weight::perron_frobenius_for(&tent()).unwrap();
        let a = ly_verify(&tent(), &pf, 0.5, &opts).unwrap();
        let b = ly_verify(&tent(), &pf, 0.5, &opts).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.refinement.as_ref().unwrap().ratio, 1.0);
    }

    #[test]
    fn rejects_inadmissible_alpha() {
        let c = crate::map_model::cusp(0.75).unwrap();
        let pf = Weight::perron_frobenius_for(&c).unwrap();
        let opts = LyOptions {
            n: 64,
            samples: 1,
            ..Default::default()
        };
        assert!(matches!(
            ly_verify(&c, &pf, 0.7, &opts),
            Err(Error::NotAdmissible { .. })
        ));
    }
}
