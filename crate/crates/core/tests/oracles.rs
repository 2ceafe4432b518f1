//! Cross-checks against independent solvers and closed forms.

use fracbv::holder_space::{dual_norm_detailed, GridFunction};
use fracbv::map_model::{cusp, doubling, gauss, tent, Weight};
use fracbv::spectral::{eigenvalues, invariant_density};
use fracbv::transfer::{ulam_matrix, UlamOptions};
use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The nodal program written out densely: maximize `Σ g_j φ_j` over
/// `|φ_j| ≤ t`, `φ_j - φ_k ≤ s (|j-k|/n)^α`, `t + s ≤ 1`, `t, s ≥ 0`.
fn lp_dual_norm(h: &GridFunction<f64>, alpha: f64) -> f64 {
    let n = h.n();
    let g = h.node_weights();
    let mut p = Problem::new(OptimizationDirection::Maximize);
    let phi: Vec<_> = g
        .iter()
        .map(|&gj| p.add_var(gj, (f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    let t = p.add_var(0.0, (0.0, f64::INFINITY));
    let s = p.add_var(0.0, (0.0, f64::INFINITY));
    p.add_constraint([(t, 1.0), (s, 1.0)], ComparisonOp::Le, 1.0);
    for &v in &phi {
        p.add_constraint([(v, 1.0), (t, -1.0)], ComparisonOp::Le, 0.0);
        p.add_constraint([(v, -1.0), (t, -1.0)], ComparisonOp::Le, 0.0);
    }
    for j in 0..=n {
        for k in 0..=n {
            if j != k {
                let c = ((j as f64 - k as f64).abs() / n as f64).powf(alpha);
                p.add_constraint([(phi[j], 1.0), (phi[k], -1.0), (s, -c)], ComparisonOp::Le, 0.0);
            }
        }
    }
    p.solve().expect("LP solvable").objective()
}

#[test]
fn dual_norm_matches_dense_lp() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..24 {
        let n = 4 + trial % 9;
        let alpha = [0.3, 0.5, 0.8][trial % 3];
        let h = GridFunction::new((0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let ours = dual_norm_detailed(&h, alpha, 1e-10).unwrap();
        let lp = lp_dual_norm(&h, alpha);
        assert!(
            (ours.value - lp).abs() <= 1e-7 * lp.max(1.0),
            "n = {n}, alpha = {alpha}: {} vs {lp}",
            ours.value
        );
    }
}

#[test]
fn eigenvalues_match_nalgebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in [3, 7, 16, 40] {
        let entries: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ours = eigenvalues(&entries, n).unwrap();
        let theirs = DMatrix::from_row_slice(n, n, &entries).complex_eigenvalues();
        // Match every oracle eigenvalue to a distinct one of ours.
        let mut used = vec![false; n];
        for z in theirs.iter() {
            let (best, dist) = ours
                .iter()
                .enumerate()
                .filter(|(i, _)| !used[*i])
                .map(|(i, w)| (i, (w - z).norm()))
                .fold((usize::MAX, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
            assert!(dist < 1e-9, "n = {n}: {z} unmatched (closest {dist})");
            used[best] = true;
        }
    }
}

#[test]
fn ulam_spectra_match_nalgebra() {
    for map in [doubling(), tent(), cusp(0.75).unwrap()] {
        let pf = Weight::perron_frobenius_for(&map).unwrap();
        let m = ulam_matrix(&map, &pf, 48, &UlamOptions::default()).unwrap();
        let ours = eigenvalues(m.entries(), 48).unwrap();
        let theirs = DMatrix::from_row_slice(48, 48, m.entries()).complex_eigenvalues();
        let top = theirs.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!((ours[0].norm() - top).abs() < 1e-10, "{}", map.name());
        assert!((ours[0].re - 1.0).abs() < 1e-10);
    }
}

/// `ρ(x) = 1/((1+x) ln 2)`.
fn gauss_rho(x: f64) -> f64 {
    1.0 / ((1.0 + x) * std::f64::consts::LN_2)
}

#[test]
fn gauss_closed_form_is_invariant() {
    // Σ_k ρ(1/(k+x)) / (k+x)² = ρ(x): the sum telescopes, checked here by
    // summing directly with an integral tail.
    for &x in &[0.0, 0.1, 0.37, 0.5, 0.9, 1.0] {
        let terms = 200_000;
        let partial: f64 = (1..=terms)
            .map(|k| {
                let y = k as f64 + x;
                gauss_rho(1.0 / y) / (y * y)
            })
            .sum();
        // The summand is ~ 1/(y² ln 2) for large y.
        let tail = 1.0 / ((terms as f64 + x + 0.5) * std::f64::consts::LN_2);
        assert!((partial + tail - gauss_rho(x)).abs() < 1e-9, "{x}");
    }
}

#[test]
fn gauss_ulam_density_near_closed_form() {
    let g = gauss();
    let pf = Weight::perron_frobenius_for(&g).unwrap();
    let h = invariant_density(&g, &pf, 256, 500).unwrap();
    // Exact cell averages of ρ: n ∫_{I_i} ρ = n (ln(1+b) - ln(1+a)) / ln 2.
    let exact = GridFunction::new(
        (0..256)
            .map(|i| {
                let (a, b) = (i as f64 / 256.0, (i + 1) as f64 / 256.0);
                256.0 * ((1.0 + b).ln() - (1.0 + a).ln()) / std::f64::consts::LN_2
            })
            .collect(),
    )
    .unwrap();
    let err = h.l1_distance(&exact).unwrap();
    assert!(err < 2e-3, "{err}");
}
