use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use super::{closure_samples, Branch, PiecewiseMap};
use crate::error::{Error, Result};

type ComplexFn = Arc<dyn Fn(usize, f64) -> Complex64 + Send + Sync>;
type PotentialFn = Arc<dyn Fn(usize, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    /// `ξ = 1/|f'|` on every branch, so `ξ |f'| ≡ 1`.
    PerronFrobenius,
    Constant(Complex64),
    Function { eval: ComplexFn, real: bool },
    /// `ξ = exp(φ)`.
    Potential(PotentialFn),
}

/// Per-branch weight `ξ` of the transfer operator.
///
/// The declared Hölder data refers to `ξ` itself, or to the potential `φ`
/// when the weight is given in potential form.
#[derive(Clone)]
pub struct Weight {
    name: String,
    kind: Kind,
    holder_beta: f64,
    holder_constant: f64,
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Weight")
            .field("name", &self.name)
            .field("holder_beta", &self.holder_beta)
            .field("holder_constant", &self.holder_constant)
            .field("as_potential", &self.as_potential())
            .finish_non_exhaustive()
    }
}

impl Weight {
    fn build(name: String, kind: Kind, beta: f64, constant: f64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "Hölder exponent beta = {beta} must lie in (0, 1]"
            )));
        }
        if constant.is_nan() || constant < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "Hölder constant {constant} must be nonnegative"
            )));
        }
        Ok(Weight {
            name,
            kind,
            holder_beta: beta,
            holder_constant: constant,
        })
    }

    /// The Perron-Frobenius weight `1/|f'|` with its Hölder data.
    pub fn perron_frobenius(beta: f64, constant: f64) -> Result<Self> {
        Self::build("pf".into(), Kind::PerronFrobenius, beta, constant)
    }

    /// Perron-Frobenius weight using the Hölder data recorded on a catalog map.
    pub fn perron_frobenius_for(map: &PiecewiseMap) -> Result<Self> {
        let (beta, constant) = map.pf_holder().ok_or_else(|| {
            Error::InvalidArgument(format!(
                "map `{}` has no recorded Hölder data for 1/|f'|; give beta and holder_constant",
                map.name()
            ))
        })?;
        Self::perron_frobenius(beta, constant)
    }

    pub fn constant(value: f64) -> Self {
        Weight {
            name: format!("const({value})"),
            kind: Kind::Constant(Complex64::new(value, 0.0)),
            holder_beta: 1.0,
            holder_constant: 0.0,
        }
    }

    pub fn constant_complex(value: Complex64) -> Self {
        Weight {
            name: format!("const({value})"),
            kind: Kind::Constant(value),
            holder_beta: 1.0,
            holder_constant: 0.0,
        }
    }

    /// Real weight given by a per-branch evaluator `(branch, y) -> ξ(y)`.
    pub fn function<F>(name: impl Into<String>, f: F, beta: f64, constant: f64) -> Result<Self>
    where
        F: Fn(usize, f64) -> f64 + Send + Sync + 'static,
    {
        let eval: ComplexFn = Arc::new(move |i, y| Complex64::new(f(i, y), 0.0));
        Self::build(name.into(), Kind::Function { eval, real: true }, beta, constant)
    }

    pub fn complex_function<F>(
        name: impl Into<String>,
        f: F,
        beta: f64,
        constant: f64,
    ) -> Result<Self>
    where
        F: Fn(usize, f64) -> Complex64 + Send + Sync + 'static,
    {
        let eval: ComplexFn = Arc::new(f);
        Self::build(name.into(), Kind::Function { eval, real: false }, beta, constant)
    }

    /// `ξ = exp(φ)`; `beta` and `constant` describe the potential `φ`.
    pub fn potential<F>(name: impl Into<String>, phi: F, beta: f64, constant: f64) -> Result<Self>
    where
        F: Fn(usize, f64) -> f64 + Send + Sync + 'static,
    {
        Self::build(name.into(), Kind::Potential(Arc::new(phi)), beta, constant)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn holder_beta(&self) -> f64 {
        self.holder_beta
    }

    pub fn holder_constant(&self) -> f64 {
        self.holder_constant
    }

    pub fn as_potential(&self) -> bool {
        matches!(self.kind, Kind::Potential(_))
    }

    pub fn is_perron_frobenius(&self) -> bool {
        matches!(self.kind, Kind::PerronFrobenius)
    }

    pub fn is_real(&self) -> bool {
        match &self.kind {
            Kind::PerronFrobenius | Kind::Potential(_) => true,
            Kind::Constant(c) => c.im == 0.0,
            Kind::Function { real, .. } => *real,
        }
    }

    /// `ξ(y)` on branch `index`.
    pub fn value(&self, index: usize, branch: &Branch, y: f64) -> Complex64 {
        match &self.kind {
            Kind::PerronFrobenius => {
                let d = branch.derivative(y).abs();
                Complex64::new(if d.is_infinite() { 0.0 } else { 1.0 / d }, 0.0)
            }
            Kind::Constant(c) => *c,
            Kind::Function { eval, .. } => eval(index, y),
            Kind::Potential(phi) => Complex64::new(phi(index, y).exp(), 0.0),
        }
    }

    /// The potential `φ(y)` when the weight is in potential form.
    pub fn potential_value(&self, index: usize, y: f64) -> Option<f64> {
        match &self.kind {
            Kind::Potential(phi) => Some(phi(index, y)),
            _ => None,
        }
    }

    /// `ξ(y) |f'(y)|`, the density of the change of variables.
    ///
    /// Exactly 1 for the Perron-Frobenius weight; a vanishing weight kills an
    /// infinite derivative instead of producing NaN.
    pub fn times_abs_derivative(&self, index: usize, branch: &Branch, y: f64) -> Complex64 {
        if let Kind::PerronFrobenius = self.kind {
            return Complex64::new(1.0, 0.0);
        }
        let xi = self.value(index, branch, y);
        if xi == Complex64::new(0.0, 0.0) {
            return xi;
        }
        xi * branch.derivative(y).abs()
    }

    /// `|ξ(y)| |f'(y)|^a`.
    pub fn modulus_times_derivative_pow(
        &self,
        index: usize,
        branch: &Branch,
        y: f64,
        a: f64,
    ) -> f64 {
        let d = branch.derivative(y).abs();
        if let Kind::PerronFrobenius = self.kind {
            if d.is_infinite() {
                return if a < 1.0 { 0.0 } else { 1.0 };
            }
            return d.powf(a - 1.0);
        }
        let m = self.value(index, branch, y).norm();
        if m == 0.0 {
            return 0.0;
        }
        m * d.powf(a)
    }
}

/// Samples per branch for suprema over finite partitions.
pub const SUP_SAMPLES: usize = 10_000;
/// Samples per branch for suprema over countable partitions, where the
/// number of scanned branches is already large.
pub const SUP_SAMPLES_COUNTABLE: usize = 200;

/// Default samples per branch for suprema over `map`.
pub fn default_sup_samples(map: &PiecewiseMap) -> usize {
    if map.is_infinite() {
        SUP_SAMPLES_COUNTABLE
    } else {
        SUP_SAMPLES
    }
}

/// `sup |ξ| |f'|^a` over closed-grid samples of every scanned branch.
///
/// Closure samples include the branch endpoints, where the catalog
/// evaluators return their one-sided limits (for example a vanishing
/// Perron-Frobenius weight at an infinite derivative).
pub fn weighted_derivative_sup(
    map: &PiecewiseMap,
    weight: &Weight,
    a: f64,
    truncation: usize,
    samples: usize,
) -> f64 {
    let mut sup: f64 = 0.0;
    for i in 0..map.branch_count(truncation) {
        let b = map.branch(i);
        for x in closure_samples(b.domain(), samples) {
            sup = sup.max(weight.modulus_times_derivative_pow(i, &b, x, a));
        }
    }
    sup
}

/// Empirical check of a weight's declared contracts.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightReport {
    /// Largest sampled Hölder quotient of `ξ` (or `φ` in potential form) per branch.
    pub holder_quotients: Vec<f64>,
    pub max_holder_quotient: f64,
    pub holder_ok: bool,
    pub sup_xi_fprime: f64,
    pub bounded: bool,
}

/// Samples `samples` points per branch and compares against the declared data.
pub fn validate_weight(
    map: &PiecewiseMap,
    weight: &Weight,
    samples: usize,
    truncation: usize,
) -> Result<WeightReport> {
    if samples < 2 {
        return Err(Error::InvalidArgument(
            "weight validation needs at least 2 samples per branch".into(),
        ));
    }
    let beta = weight.holder_beta();
    let mut quotients = Vec::new();
    let mut sup_xi_fprime: f64 = 0.0;
    for i in 0..map.branch_count(truncation) {
        let b = map.branch(i);
        let xs: Vec<f64> = closure_samples(b.domain(), samples).collect();
        let vals: Vec<Complex64> = xs
            .iter()
            .map(|&x| match weight.potential_value(i, x) {
                Some(p) => Complex64::new(p, 0.0),
                None => weight.value(i, &b, x),
            })
            .collect();
        let mut q: f64 = 0.0;
        for j in 0..xs.len() {
            for k in j + 1..xs.len() {
                let dx = (xs[k] - xs[j]).abs();
                if dx > 0.0 {
                    q = q.max((vals[k] - vals[j]).norm() / dx.powf(beta));
                }
            }
        }
        quotients.push(q);
        for &x in &xs {
            sup_xi_fprime = sup_xi_fprime.max(weight.times_abs_derivative(i, &b, x).norm());
        }
    }
    let max_q = quotients.iter().copied().fold(0.0, f64::max);
    Ok(WeightReport {
        max_holder_quotient: max_q,
        holder_ok: max_q <= weight.holder_constant() * (1.0 + 1e-9) + 1e-12,
        holder_quotients: quotients,
        sup_xi_fprime,
        bounded: sup_xi_fprime.is_finite(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map_model::{cusp, doubling, gauss, tent};

    #[test]
    fn pf_weight_cancels_derivative() {
        let map = tent();
        let w = Weight::perron_frobenius_for(&map).unwrap();
        for i in 0..2 {
            let b = map.branch(i);
            assert_eq!(w.times_abs_derivative(i, &b, 0.3 + 0.5 * i as f64).re, 1.0);
            assert_eq!(w.value(i, &b, 0.1 + 0.5 * i as f64).re, 0.5);
        }
    }

    #[test]
    fn pf_weight_vanishes_at_cusp() {
        let map = cusp(0.75).unwrap();
        let w = Weight::perron_frobenius_for(&map).unwrap();
        let b = map.branch(0);
        assert_eq!(w.value(0, &b, 0.5).re, 0.0);
        assert_eq!(w.modulus_times_derivative_pow(0, &b, 0.5, 0.8), 0.0);
        let g0 = w.modulus_times_derivative_pow(0, &b, 0.0, 0.8);
        assert!((g0 - 1.5f64.powf(-0.2)).abs() < 1e-15);
    }

    #[test]
    fn catalog_pf_weights_meet_declared_holder_data() {
        for (map, n) in [
            (doubling(), 0),
            (tent(), 0),
            (cusp(0.75).unwrap(), 0),
            (gauss(), 30),
        ] {
            let w = Weight::perron_frobenius_for(&map).unwrap();
            let r = validate_weight(&map, &w, 200, n).unwrap();
            assert!(r.holder_ok, "{}: {:?}", map.name(), r.max_holder_quotient);
            assert!(r.bounded);
            assert!((r.sup_xi_fprime - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn understated_holder_constant_detected() {
        let map = gauss();
        let w = Weight::function("x^2", |_, x| x * x, 1.0, 0.5).unwrap();
        let r = validate_weight(&map, &w, 50, 5).unwrap();
        assert!(!r.holder_ok);
    }

    #[test]
    fn rejects_bad_exponent() {
        assert!(Weight::perron_frobenius(0.0, 1.0).is_err());
        assert!(Weight::perron_frobenius(1.5, 1.0).is_err());
        assert!(Weight::perron_frobenius(0.5, -1.0).is_err());
    }

    #[test]
    fn derivative_sups() {
        let d = doubling();
        let half = Weight::constant(0.5);
        assert_eq!(weighted_derivative_sup(&d, &half, 1.0, 0, 100), 1.0);
        let s = weighted_derivative_sup(&d, &half, 0.5, 0, 100);
        assert!((s - 0.5 * 2f64.sqrt()).abs() < 1e-15);
        let c = cusp(0.75).unwrap();
        let pf = Weight::perron_frobenius_for(&c).unwrap();
        let s = weighted_derivative_sup(&c, &pf, 0.8, 0, 101);
        assert!((s - 1.5f64.powf(-0.2)).abs() < 1e-15);
    }

    #[test]
    fn potential_form_exponentiates() {
        let map = gauss();
        let w = Weight::potential("2 log x", |_, x| 2.0 * x.ln(), 0.5, 2.0).unwrap();
        let b = map.branch(1);
        assert!((w.value(1, &b, 0.4).re - 0.16).abs() < 1e-15);
        assert!(w.as_potential());
        assert_eq!(w.potential_value(1, 0.4), Some(2.0 * 0.4f64.ln()));
    }
}
