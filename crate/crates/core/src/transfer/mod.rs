//! The weighted transfer operator `L_ξ h(x) = Σ_{f(y) = x} ξ(y) h(y)`.
//!
//! Three views of the same operator: pointwise evaluation through inverse
//! branches, the weak form `∫ (L_ξ h) φ = Σ_p ∫_p h ξ |f'| φ∘f`, and the Ulam
//! matrix acting on cell averages.
//!
//! The change of variables uses `|f'|`, so the Perron-Frobenius weight is
//! `ξ = 1/|f'|` on every branch regardless of orientation.

mod ulam;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::holder_space::{GridFunction, TestFunction};
use crate::map_model::{PiecewiseMap, Weight};
use crate::quadrature::GaussLegendre;

pub use ulam::{apply_matrix, ulam_matrix, UlamMatrix, UlamMeta, UlamOptions};

/// `L_ξ h(x)`: the sum of `ξ(y) h(y)` over the preimages `y` of `x` among the
/// first `truncation` branches (all branches of a finite map).
pub fn apply_pointwise<H: Fn(f64) -> f64>(
    map: &PiecewiseMap,
    weight: &Weight,
    h: H,
    x: f64,
    truncation: usize,
) -> Complex64 {
    map.inverse_images(x, truncation)
        .into_iter()
        .map(|p| weight.value(p.branch, &map.branch(p.branch), p.y) * h(p.y))
        .sum()
}

/// `∫ (L_ξ h) φ` through the change of variables on each branch.
///
/// Every branch domain is split at the cell boundaries of `h` and at the
/// preimages of the nodes of `φ`, so the integrand is smooth on each piece
/// and Gauss-Legendre quadrature of order `quad_order` applies.
pub fn weak_pairing(
    map: &PiecewiseMap,
    weight: &Weight,
    h: &GridFunction<f64>,
    phi: &TestFunction,
    quad_order: usize,
    truncation: usize,
) -> Result<Complex64> {
    if quad_order < 2 {
        return Err(Error::InvalidArgument(format!(
            "weak pairing needs quadrature order ≥ 2, got {quad_order}"
        )));
    }
    let rule = GaussLegendre::new(quad_order)?;
    let n = h.n();
    let m = phi.m();
    let mut total = Complex64::new(0.0, 0.0);
    for bi in 0..map.branch_count(truncation) {
        let b = map.branch(bi);
        let dom = b.domain();
        let mut cuts: Vec<f64> = vec![dom.lo, dom.hi];
        let first = (dom.lo * n as f64).ceil() as usize;
        let last = (dom.hi * n as f64).floor() as usize;
        for k in first..=last.min(n) {
            cuts.push(k as f64 / n as f64);
        }
        let (ilo, ihi) = b.image();
        let first = (ilo * m as f64).ceil() as usize;
        let last = (ihi * m as f64).floor() as usize;
        for k in first..=last.min(m) {
            cuts.push(b.inverse(k as f64 / m as f64).clamp(dom.lo, dom.hi));
        }
        cuts.retain(|&c| c >= dom.lo && c <= dom.hi);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        for w in cuts.windows(2) {
            let (a, c) = (w[0], w[1]);
            if c <= a {
                continue;
            }
            let hv = h.value_at(0.5 * (a + c));
            if hv == 0.0 {
                continue;
            }
            let mut piece = Complex64::new(0.0, 0.0);
            for (y, wq) in rule.mapped(a, c) {
                if !(y >= dom.lo && y <= dom.hi) {
                    return Err(Error::QuadratureOutsideDomain {
                        x: y,
                        lo: dom.lo,
                        hi: dom.hi,
                    });
                }
                piece += weight.times_abs_derivative(bi, &b, y) * (wq * phi.eval(b.forward(y)));
            }
            total += piece * hv;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map_model::{cusp, doubling, gauss, tent};

    #[test]
    fn pointwise_examples() {
        let d = doubling();
        let half = Weight::constant(0.5);
        for &x in &[0.0, 0.3, 0.99] {
            assert!((apply_pointwise(&d, &half, |_| 1.0, x, 0).re - 1.0).abs() < 1e-15);
            let v = apply_pointwise(&d, &half, |y| y, x, 0).re;
            assert!((v - (x / 2.0 + 0.25)).abs() < 1e-15);
        }
        let g = gauss();
        let sq = Weight::function("x^2", |_, y| y * y, 1.0, 2.0).unwrap();
        assert!((apply_pointwise(&g, &sq, |_| 1.0, 0.0, 2).re - 1.25).abs() < 1e-15);
    }

    #[test]
    fn pf_operator_fixes_lebesgue_on_full_linear_maps() {
        for map in [doubling(), tent()] {
            let pf = Weight::perron_frobenius_for(&map).unwrap();
            for k in 1..20 {
                let x = k as f64 / 20.0;
                let v = apply_pointwise(&map, &pf, |_| 1.0, x, 0).re;
                assert!((v - 1.0).abs() < 1e-12, "{}: {x} -> {v}", map.name());
            }
        }
    }

    #[test]
    fn weak_pairing_examples() {
        let d = doubling();
        let half = Weight::constant(0.5);
        let one = GridFunction::constant(16, 1.0).unwrap();
        let x = TestFunction::from_fn(16, |x| x).unwrap();
        let c = TestFunction::new(vec![1.0; 5]).unwrap();
        assert!((weak_pairing(&d, &half, &one, &x, 8, 0).unwrap().re - 0.5).abs() < 1e-14);
        assert!((weak_pairing(&d, &half, &one, &c, 8, 0).unwrap().re - 1.0).abs() < 1e-14);
        let zero = GridFunction::zeros(16).unwrap();
        assert_eq!(weak_pairing(&d, &half, &zero, &x, 8, 0).unwrap().re, 0.0);
        assert!(weak_pairing(&d, &half, &one, &x, 1, 0).is_err());
    }

    #[test]
    fn weak_pairing_preserves_cusp_mass() {
        let c = cusp(0.75).unwrap();
        let pf = Weight::perron_frobenius_for(&c).unwrap();
        let h = GridFunction::sample_midpoints(32, |x| 1.0 + x).unwrap();
        let one = TestFunction::new(vec![1.0; 2]).unwrap();
        let v = weak_pairing(&c, &pf, &h, &one, 8, 0).unwrap().re;
        assert!((v - h.integral()).abs() < 1e-12, "{v}");
    }

    #[test]
    fn weak_pairing_preserves_gauss_mass() {
        // With ξ = x², ξ|f'| = 1: ∫ L h = ∫ h over the scanned branches.
        let g = gauss();
        let pf = Weight::perron_frobenius_for(&g).unwrap();
        let one = GridFunction::constant(32, 1.0).unwrap();
        let c = TestFunction::new(vec![1.0; 3]).unwrap();
        let v = weak_pairing(&g, &pf, &one, &c, 8, 50).unwrap().re;
        assert!((v - (1.0 - g.coverage_defect(50))).abs() < 1e-13);
    }
}
