//! Property tests for the invariants of the norm, the operator and the
//! hypothesis checks.

use fracbv::holder_space::{
    dual_norm, dual_norm_complex, embedding_check, GridFunction, HolderParams, TestFunction,
};
use fracbv::ly_lab::{admissible_alpha, summability};
use fracbv::map_model::{cusp, doubling, gauss, tent, PiecewiseMap, Weight};
use fracbv::spectral::{theorem_bounds, BoundsOptions};
use fracbv::transfer::{apply_matrix, ulam_matrix, weak_pairing, UlamMatrix, UlamOptions};
use proptest::prelude::*;
use std::sync::OnceLock;

const TOL: f64 = 1e-9;

fn density(max_n: usize) -> impl Strategy<Value = GridFunction<f64>> {
    (2..=max_n)
        .prop_flat_map(|n| prop::collection::vec(-1.0f64..1.0, n))
        .prop_map(|v| GridFunction::new(v).unwrap())
}

fn alpha() -> impl Strategy<Value = f64> {
    0.05f64..0.95
}

fn finite_maps() -> &'static [(PiecewiseMap, UlamMatrix, f64)] {
    static CELL: OnceLock<Vec<(PiecewiseMap, UlamMatrix, f64)>> = OnceLock::new();
    CELL.get_or_init(|| {
        [doubling(), tent(), cusp(0.75).unwrap()]
            .into_iter()
            .map(|map| {
                let pf = Weight::perron_frobenius_for(&map).unwrap();
                let m = ulam_matrix(&map, &pf, 32, &UlamOptions::default()).unwrap();
                (map, m, 1.0)
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn norm_is_homogeneous(h in density(24), c in -3.0f64..3.0, a in alpha()) {
        let base = dual_norm(&h, a, TOL).unwrap();
        let scaled = dual_norm(&h.scale(c), a, TOL).unwrap();
        prop_assert!((scaled - c.abs() * base).abs() <= 1e-7 * (1.0 + scaled));
    }

    #[test]
    fn norm_is_subadditive(h in density(16), a in alpha(), seed in 0u64..1000) {
        let other = GridFunction::new(
            h.values().iter().enumerate().map(|(i, v)| ((i as f64 + seed as f64).sin() - v) * 0.7).collect()
        ).unwrap();
        let sum = dual_norm(&h.add(&other).unwrap(), a, TOL).unwrap();
        let bound = dual_norm(&h, a, TOL).unwrap() + dual_norm(&other, a, TOL).unwrap();
        prop_assert!(sum <= bound + 1e-7);
    }

    #[test]
    fn norm_bounded_by_total_variation(h in density(24), a in alpha()) {
        prop_assert!(dual_norm(&h, a, TOL).unwrap() <= h.total_variation() + 1e-9);
    }

    #[test]
    fn norm_decreases_in_alpha(h in density(16), a in 0.05f64..0.5, gap in 0.05f64..0.45) {
        let low = dual_norm(&h, a, TOL).unwrap();
        let high = dual_norm(&h, a + gap, TOL).unwrap();
        prop_assert!(low >= high - 1e-7);
    }

    #[test]
    fn norm_unchanged_by_refinement(h in density(12), a in alpha(), k in 2usize..4) {
        let coarse = dual_norm(&h, a, TOL).unwrap();
        let fine = dual_norm(&h.refine(k).unwrap(), a, TOL).unwrap();
        prop_assert!((coarse - fine).abs() <= 1e-7 * (1.0 + coarse));
    }

    #[test]
    fn embedding_holds(h in density(24), a in alpha()) {
        let e = embedding_check(&h, a, TOL).unwrap();
        prop_assert!(e.pass, "{e:?}");
    }

    #[test]
    fn pairing_bounded_by_norms(h in density(16), a in alpha(), m in 2usize..12) {
        // |∫ h φ'| ≤ ‖h‖_α |φ|_α for any test function.
        let phi = TestFunction::from_fn(m, |x| (5.0 * x).sin() + x * x).unwrap();
        let lhs = phi.pairing(&h).abs();
        let rhs = dual_norm(&h, a, TOL).unwrap() * phi.test_norm(a).unwrap();
        prop_assert!(lhs <= rhs + 1e-7);
    }

    #[test]
    fn complex_norm_of_real_density(h in density(12), a in alpha()) {
        let real = dual_norm(&h, a, TOL).unwrap();
        let complex = dual_norm_complex(&h.to_complex(), a, TOL, 8).unwrap();
        prop_assert!((real - complex).abs() <= 1e-9 * (1.0 + real));
    }

    #[test]
    fn first_ly_inequality(v in prop::collection::vec(-1.0f64..1.0, 32), which in 0usize..3) {
        let (_, m, rho) = &finite_maps()[which];
        let h = GridFunction::new(v).unwrap();
        let mh = apply_matrix(m, &h).unwrap();
        prop_assert!(mh.l1_norm() <= rho * h.l1_norm() + 1e-12);
    }

    #[test]
    fn pf_matrices_preserve_mass(v in prop::collection::vec(-1.0f64..1.0, 32), which in 0usize..3) {
        let (_, m, _) = &finite_maps()[which];
        let h = GridFunction::new(v).unwrap();
        let mh = apply_matrix(m, &h).unwrap();
        prop_assert!((mh.integral() - h.integral()).abs() < 1e-12);
        prop_assert!(m.entries().iter().all(|&e| e >= 0.0));
    }

    #[test]
    fn ulam_agrees_with_weak_form(v in prop::collection::vec(-1.0f64..1.0, 32), which in 0usize..2) {
        // Full linear branches map step functions on the grid to step
        // functions on the grid, so the Ulam image is exact and pairs with
        // φ(x) = x like the weak form.
        let (map, m, _) = &finite_maps()[which];
        let pf = Weight::perron_frobenius_for(map).unwrap();
        let h = GridFunction::new(v).unwrap();
        let mh = apply_matrix(m, &h).unwrap();
        let phi = TestFunction::from_fn(2, |x| x).unwrap();
        let weak = weak_pairing(map, &pf, &h, &phi, 8, 0).unwrap().re;
        let ulam: f64 = mh.values().iter().enumerate()
            .map(|(i, v)| v * (i as f64 + 0.5) / 32.0 / 32.0)
            .sum();
        prop_assert!((weak - ulam).abs() < 1e-10, "{weak} vs {ulam}");
    }

    #[test]
    fn admissibility_orders_bounds(
        a in 0.01f64..1.0, beta in 0.01f64..=1.0, gamma in 0.0f64..0.99, r in 0.0f64..10.0
    ) {
        let rep = admissible_alpha(&HolderParams::new(a, beta, gamma, r).unwrap());
        prop_assert!(rep.alpha_lower >= rep.theorem2_alpha_lower);
        if rep.beta_ok {
            prop_assert!(rep.alpha_lower < 1.0);
        } else {
            prop_assert!(rep.alpha_range.is_none() && !rep.alpha_ok);
        }
        if rep.alpha_ok {
            prop_assert!(a > rep.alpha_lower && a < 1.0);
        }
    }

    #[test]
    fn bounds_are_ordered(a in 0.05f64..0.95, c in 0.0f64..1.0) {
        let b = theorem_bounds(
            &doubling(),
            &Weight::constant(c),
            a,
            &BoundsOptions { cells: 256, ..Default::default() },
        ).unwrap();
        prop_assert!(b.ess_rate_power <= b.ess_bound_single + 1e-15);
        prop_assert!(b.ess_bound_single <= b.rho_bound + 1e-15);
    }
}

#[test]
fn summability_partial_sums_are_monotone() {
    let g = gauss();
    let pf = Weight::perron_frobenius_for(&g).unwrap();
    let mut last = 0.0;
    for n in [10, 50, 100, 200, 400] {
        let s = summability(&g, &pf, 0.0, n).unwrap().partial_sum;
        assert!(s >= last);
        last = s;
    }
}

#[test]
fn grid_function_serialization_round_trips() {
    let h = GridFunction::new(vec![0.1, -2.5e-7, 3.0, 1.0 / 3.0]).unwrap();
    assert_eq!(GridFunction::<f64>::from_csv(&h.to_csv()).unwrap(), h);
    assert_eq!(GridFunction::<f64>::from_json(&h.to_json().unwrap()).unwrap(), h);
    let dir = tempfile::tempdir().unwrap();
    for name in ["h.csv", "h.json"] {
        let path = dir.path().join(name);
        h.write(&path).unwrap();
        assert_eq!(GridFunction::<f64>::read(&path).unwrap(), h);
    }
}
