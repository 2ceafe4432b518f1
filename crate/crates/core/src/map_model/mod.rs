//! Piecewise expanding interval maps, their weights, and the built-in catalog.
//!
//! A map is an ordered family of monotone branches. Each branch carries
//! closed-form evaluators for `f`, `f'` and the inverse branch, so preimages
//! are computed exactly rather than by root finding. Countable families
//! (the Gauss map) are generated lazily and always consumed with an explicit
//! truncation count.

mod catalog;
mod spec;
mod weight;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use catalog::{catalog, cusp, doubling, gauss, tent, CatalogEntry};
pub use spec::{build_map, build_weight, BranchSpec, MapSpec, WeightSpec};
pub use weight::{
    default_sup_samples, validate_weight, weighted_derivative_sup, Weight, WeightReport,
    SUP_SAMPLES, SUP_SAMPLES_COUNTABLE,
};

/// Real evaluator shared between threads.
pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Sub-interval of [0, 1] with `lo < hi`.
///
/// Branch domains are treated as half-open `[lo, hi)`; preimage computations
/// use the closure so that boundary points still have a well-defined image.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || hi > 1.0 || lo >= hi {
            return Err(Error::InvalidArgument(format!(
                "interval [{lo}, {hi}] must satisfy 0 <= lo < hi <= 1"
            )));
        }
        Ok(Interval { lo, hi })
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    /// Half-open membership.
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x < self.hi
    }

    pub fn closure_contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo < other.hi && other.lo < self.hi
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    Increasing,
    Decreasing,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Increasing => 1.0,
            Orientation::Decreasing => -1.0,
        }
    }
}

/// One monotone branch `f|_p` with its derivative and inverse.
#[derive(Clone)]
pub struct Branch {
    domain: Interval,
    orientation: Orientation,
    forward: RealFn,
    derivative: RealFn,
    inverse: RealFn,
}

impl fmt::Debug for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Branch")
            .field("domain", &self.domain)
            .field("orientation", &self.orientation)
            .finish_non_exhaustive()
    }
}

impl Branch {
    /// Orientation is read off the endpoint values of `forward`.
    pub fn new(domain: Interval, forward: RealFn, derivative: RealFn, inverse: RealFn) -> Self {
        let orientation = if forward(domain.hi) >= forward(domain.lo) {
            Orientation::Increasing
        } else {
            Orientation::Decreasing
        };
        Branch {
            domain,
            orientation,
            forward,
            derivative,
            inverse,
        }
    }

    pub fn from_fns<F, D, I>(domain: Interval, forward: F, derivative: D, inverse: I) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
        I: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Branch::new(
            domain,
            Arc::new(forward),
            Arc::new(derivative),
            Arc::new(inverse),
        )
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    #[inline]
    pub fn forward(&self, x: f64) -> f64 {
        (self.forward)(x)
    }

    #[inline]
    pub fn derivative(&self, x: f64) -> f64 {
        (self.derivative)(x)
    }

    #[inline]
    pub fn inverse(&self, y: f64) -> f64 {
        (self.inverse)(y)
    }

    /// Closed image `f(p̄)` as `(min, max)`, clamped to [0, 1].
    pub fn image(&self) -> (f64, f64) {
        let a = self.forward(self.domain.lo);
        let b = self.forward(self.domain.hi);
        (a.min(b).max(0.0), a.max(b).min(1.0))
    }

    /// Preimage of `[a, b]` inside this branch's closed domain, sorted.
    ///
    /// Returns `None` when `[a, b]` misses the image or the intersection
    /// degenerates to a point.
    pub fn preimage_of(&self, a: f64, b: f64) -> Option<(f64, f64)> {
        let (lo, hi) = self.image();
        let a = a.max(lo);
        let b = b.min(hi);
        if a >= b {
            return None;
        }
        let ya = self.clamp_to_domain(self.inverse(a));
        let yb = self.clamp_to_domain(self.inverse(b));
        let (y0, y1) = if ya <= yb { (ya, yb) } else { (yb, ya) };
        if y1 > y0 {
            Some((y0, y1))
        } else {
            None
        }
    }

    fn clamp_to_domain(&self, y: f64) -> f64 {
        y.max(self.domain.lo).min(self.domain.hi)
    }
}

#[derive(Clone)]
enum Branches {
    Finite(Vec<Branch>),
    Countable(Arc<dyn Fn(usize) -> Branch + Send + Sync>),
}

/// A piecewise expanding map of [0, 1].
#[derive(Clone)]
pub struct PiecewiseMap {
    name: String,
    branches: Branches,
    expansion_lambda: f64,
    deriv_integrability_r: f64,
    r_limit: Option<f64>,
    closed_form: bool,
    pf_holder: Option<(f64, f64)>,
}

impl fmt::Debug for PiecewiseMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PiecewiseMap")
            .field("name", &self.name)
            .field("infinite", &self.is_infinite())
            .field("expansion_lambda", &self.expansion_lambda)
            .field("deriv_integrability_r", &self.deriv_integrability_r)
            .finish_non_exhaustive()
    }
}

/// A preimage `y` of a point, tagged with the branch it came from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Preimage {
    pub branch: usize,
    pub y: f64,
}

impl PiecewiseMap {
    /// Finite partition. Domains must be pairwise disjoint.
    pub fn finite(
        name: impl Into<String>,
        branches: Vec<Branch>,
        expansion_lambda: f64,
        deriv_integrability_r: f64,
    ) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::InvalidMap("a map needs at least one branch".into()));
        }
        for i in 0..branches.len() {
            for j in i + 1..branches.len() {
                if branches[i].domain.overlaps(&branches[j].domain) {
                    return Err(Error::OverlappingDomains(i, j));
                }
            }
        }
        Self::check_header(expansion_lambda, deriv_integrability_r)?;
        Ok(PiecewiseMap {
            name: name.into(),
            branches: Branches::Finite(branches),
            expansion_lambda,
            deriv_integrability_r,
            r_limit: None,
            closed_form: false,
            pf_holder: None,
        })
    }

    /// Countable partition given by a branch generator `index -> Branch`.
    pub fn countable<G>(
        name: impl Into<String>,
        generator: G,
        expansion_lambda: f64,
        deriv_integrability_r: f64,
    ) -> Result<Self>
    where
        G: Fn(usize) -> Branch + Send + Sync + 'static,
    {
        Self::check_header(expansion_lambda, deriv_integrability_r)?;
        Ok(PiecewiseMap {
            name: name.into(),
            branches: Branches::Countable(Arc::new(generator)),
            expansion_lambda,
            deriv_integrability_r,
            r_limit: None,
            closed_form: false,
            pf_holder: None,
        })
    }

    fn check_header(lambda: f64, r: f64) -> Result<()> {
        if lambda.is_nan() || lambda < 1.0 {
            return Err(Error::InvalidMap(format!(
                "expansion constant {lambda} must be at least 1"
            )));
        }
        if r.is_nan() || r < 0.0 {
            return Err(Error::InvalidMap(format!(
                "integrability exponent r = {r} must be nonnegative"
            )));
        }
        Ok(())
    }

    /// Marks the evaluators as exact closed forms, valid on branch closures.
    pub(crate) fn with_closed_form(mut self, r_limit: Option<f64>, pf_holder: (f64, f64)) -> Self {
        self.closed_form = true;
        self.r_limit = r_limit;
        self.pf_holder = Some(pf_holder);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self.branches, Branches::Countable(_))
    }

    pub fn expansion_lambda(&self) -> f64 {
        self.expansion_lambda
    }

    pub fn deriv_integrability_r(&self) -> f64 {
        self.deriv_integrability_r
    }

    /// Supremum of admissible `r` (exclusive), when known in closed form.
    pub fn r_limit(&self) -> Option<f64> {
        self.r_limit
    }

    /// Whether evaluators are exact on branch closures (catalog maps).
    pub fn is_closed_form(&self) -> bool {
        self.closed_form
    }

    /// Hölder data `(beta, constant)` of the Perron-Frobenius weight `1/|f'|`.
    pub fn pf_holder(&self) -> Option<(f64, f64)> {
        self.pf_holder
    }

    /// Number of branches actually scanned under truncation `truncation`.
    pub fn branch_count(&self, truncation: usize) -> usize {
        match &self.branches {
            Branches::Finite(b) => b.len(),
            Branches::Countable(_) => truncation,
        }
    }

    pub fn branch(&self, index: usize) -> Branch {
        match &self.branches {
            Branches::Finite(b) => b[index].clone(),
            Branches::Countable(g) => g(index),
        }
    }

    pub fn branches(&self, truncation: usize) -> Vec<Branch> {
        (0..self.branch_count(truncation))
            .map(|i| self.branch(i))
            .collect()
    }

    /// Total length of the scanned branch domains.
    pub fn coverage(&self, truncation: usize) -> f64 {
        (0..self.branch_count(truncation))
            .map(|i| self.branch(i).domain().len())
            .sum()
    }

    pub fn coverage_defect(&self, truncation: usize) -> f64 {
        (1.0 - self.coverage(truncation)).max(0.0)
    }

    /// `f(x)`, or `None` if `x` lies outside the scanned branches.
    pub fn eval(&self, x: f64, truncation: usize) -> Option<f64> {
        (0..self.branch_count(truncation))
            .map(|i| self.branch(i))
            .find(|b| b.domain().contains(x))
            .map(|b| b.forward(x))
    }

    /// One preimage per scanned branch whose closed image contains `x`.
    ///
    /// Preimages that coincide (shared endpoint of adjacent branches) are
    /// reported once.
    pub fn inverse_images(&self, x: f64, truncation: usize) -> Vec<Preimage> {
        let mut out: Vec<Preimage> = Vec::new();
        for i in 0..self.branch_count(truncation) {
            let b = self.branch(i);
            let (lo, hi) = b.image();
            if x < lo || x > hi {
                continue;
            }
            let y = b.clamp_to_domain(b.inverse(x));
            if out.iter().any(|p| (p.y - y).abs() <= 1e-15) {
                continue;
            }
            out.push(Preimage { branch: i, y });
        }
        out
    }
}

/// Outcome of sampling a map's branch contracts.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub samples_per_branch: usize,
    pub branches_scanned: usize,
    pub min_abs_derivative: f64,
    pub expansion_lambda: f64,
    pub expansion_ok: bool,
    pub max_inverse_residual: f64,
    pub monotone_ok: bool,
    pub orientation_ok: bool,
    pub coverage_defect: f64,
    pub failures: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Tolerance on `inverse(forward(x)) - x`.
pub const INVERSE_TOL: f64 = 1e-12;

/// Closed-grid sample points `lo + (hi - lo) k / (s - 1)` of a domain.
pub(crate) fn closure_samples(domain: Interval, samples: usize) -> impl Iterator<Item = f64> {
    let s = samples.max(2);
    (0..s).map(move |k| {
        if k == s - 1 {
            domain.hi
        } else {
            domain.lo + domain.len() * k as f64 / (s - 1) as f64
        }
    })
}

/// Samples every scanned branch and checks monotonicity, orientation,
/// inverse consistency, and expansion. Never aborts; problems are listed
/// in `failures`.
pub fn validate_map(
    map: &PiecewiseMap,
    samples_per_branch: usize,
    truncation: usize,
) -> Result<ValidationReport> {
    if samples_per_branch < 2 {
        return Err(Error::InvalidArgument(
            "validation needs at least 2 samples per branch".into(),
        ));
    }
    let count = map.branch_count(truncation);
    let mut failures = Vec::new();
    let mut min_abs_derivative = f64::INFINITY;
    let mut max_inverse_residual: f64 = 0.0;
    let mut monotone_ok = true;
    let mut orientation_ok = true;

    for i in 0..count {
        let b = map.branch(i);
        let sign = b.orientation().sign();
        let dom = b.domain();
        if sign * (b.forward(dom.hi) - b.forward(dom.lo)) <= 0.0 {
            monotone_ok = false;
            failures.push(format!("branch {i}: endpoint values do not follow orientation"));
        }
        let xs: Vec<f64> = closure_samples(dom, samples_per_branch).collect();
        let mut prev: Option<f64> = None;
        for (k, &x) in xs.iter().enumerate() {
            let fx = b.forward(x);
            let d = b.derivative(x);
            let interior = k != 0 && k != xs.len() - 1;
            if !(-1e-12..=1.0 + 1e-12).contains(&fx) {
                failures.push(format!("branch {i}: f({x}) = {fx} leaves [0, 1]"));
            }
            if let Some(p) = prev {
                if sign * (fx - p) <= 0.0 {
                    if monotone_ok {
                        failures.push(format!("branch {i}: not strictly monotone near x = {x}"));
                    }
                    monotone_ok = false;
                }
            }
            prev = Some(fx);
            if d.is_nan() || (d != 0.0 && d.signum() != sign) || d == 0.0 {
                if orientation_ok {
                    failures.push(format!("branch {i}: derivative sign disagrees at x = {x}"));
                }
                orientation_ok = false;
            }
            let ad = d.abs();
            if ad < min_abs_derivative {
                min_abs_derivative = ad;
            }
            // Interior points need |f'| > 1; closure endpoints may touch 1.
            if (interior && ad <= 1.0) || ad < 1.0 {
                failures.push(format!("branch {i}: |f'({x})| = {ad} is not expanding"));
            }
            let r = (b.inverse(fx) - x).abs();
            if r > max_inverse_residual {
                max_inverse_residual = r;
            }
        }
    }
    if max_inverse_residual > INVERSE_TOL {
        failures.push(format!(
            "inverse residual {max_inverse_residual:e} exceeds {INVERSE_TOL:e}"
        ));
    }
    let expansion_ok = min_abs_derivative >= map.expansion_lambda() * (1.0 - 1e-12);
    if !expansion_ok {
        failures.push(format!(
            "min |f'| = {min_abs_derivative} below declared expansion {}",
            map.expansion_lambda()
        ));
    }
    Ok(ValidationReport {
        samples_per_branch,
        branches_scanned: count,
        min_abs_derivative,
        expansion_lambda: map.expansion_lambda(),
        expansion_ok,
        max_inverse_residual,
        monotone_ok,
        orientation_ok,
        coverage_defect: map.coverage_defect(truncation),
        failures,
    })
}

/// Turns the first failure of a validation run into a construction error.
pub(crate) fn validation_error(map: &PiecewiseMap, report: &ValidationReport) -> Option<Error> {
    if report.passed() {
        return None;
    }
    let count = report.branches_scanned;
    for i in 0..count {
        let b = map.branch(i);
        let sign = b.orientation().sign();
        let xs: Vec<f64> = closure_samples(b.domain(), report.samples_per_branch).collect();
        let n = xs.len();
        for w in xs.windows(2) {
            if sign * (b.forward(w[1]) - b.forward(w[0])) <= 0.0 {
                return Some(Error::NonMonotone { branch: i, x: w[0] });
            }
        }
        for (k, &x) in xs.iter().enumerate() {
            let d = b.derivative(x).abs();
            let interior = k != 0 && k != n - 1;
            if (interior && d <= 1.0) || d < 1.0 {
                return Some(Error::NotExpanding {
                    branch: i,
                    x,
                    derivative: d,
                });
            }
        }
    }
    Some(Error::InvalidMap(report.failures.join("; ")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_contract() {
        assert!(Interval::new(0.0, 1.0).is_ok());
        assert!(Interval::new(0.5, 0.5).is_err());
        assert!(Interval::new(-0.1, 0.5).is_err());
        assert!(Interval::new(0.2, 1.1).is_err());
        let i = Interval::new(0.25, 0.5).unwrap();
        assert!(i.contains(0.25) && !i.contains(0.5) && i.closure_contains(0.5));
    }

    #[test]
    fn doubling_preimages() {
        let map = doubling();
        let pre = map.inverse_images(0.3, 0);
        let ys: Vec<f64> = pre.iter().map(|p| p.y).collect();
        assert_eq!(ys.len(), 2);
        assert!((ys[0] - 0.15).abs() < 1e-15);
        assert!((ys[1] - 0.65).abs() < 1e-15);
    }

    #[test]
    fn gauss_preimages_truncated() {
        let map = gauss();
        let pre = map.inverse_images(0.5, 3);
        let want = [1.0 / 1.5, 1.0 / 2.5, 1.0 / 3.5];
        assert_eq!(pre.len(), 3);
        for (p, w) in pre.iter().zip(want) {
            assert!((p.y - w).abs() < 1e-15);
            let b = map.branch(p.branch);
            assert!((b.forward(p.y) - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn cusp_top_point_has_single_preimage() {
        let map = cusp(0.75).unwrap();
        let pre = map.inverse_images(1.0, 0);
        assert_eq!(pre.len(), 1);
        assert!((pre[0].y - 0.5).abs() < 1e-15);
    }

    #[test]
    fn validate_doubling() {
        let r = validate_map(&doubling(), 100, 0).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
        assert_eq!(r.min_abs_derivative, 2.0);
        assert!(r.max_inverse_residual <= 1e-15);
        assert_eq!(r.coverage_defect, 0.0);
    }

    #[test]
    fn validate_gauss_coverage_defect() {
        let r = validate_map(&gauss(), 20, 100).unwrap();
        assert!((r.coverage_defect - 1.0 / 101.0).abs() < 1e-14);
        assert!(r.passed(), "{:?}", r.failures);
    }

    #[test]
    fn validate_cusp_min_derivative() {
        let r = validate_map(&cusp(0.75).unwrap(), 101, 0).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
        assert!((r.min_abs_derivative - 1.5).abs() < 1e-12);
    }

    #[test]
    fn overlapping_domains_rejected() {
        let b = |lo: f64, hi: f64| {
            Branch::from_fns(
                Interval::new(lo, hi).unwrap(),
                move |x| (x - lo) / (hi - lo),
                move |_| 1.0 / (hi - lo),
                move |y| lo + y * (hi - lo),
            )
        };
        let err = PiecewiseMap::finite("bad", vec![b(0.0, 0.6), b(0.5, 1.0)], 1.5, 1.0);
        assert!(matches!(err, Err(Error::OverlappingDomains(0, 1))));
    }

    #[test]
    fn preimage_of_interval_is_sorted_and_clamped() {
        let map = tent();
        let b = map.branch(1);
        let (a, c) = b.preimage_of(0.0, 0.5).unwrap();
        assert!((a - 0.75).abs() < 1e-15 && (c - 1.0).abs() < 1e-15);
        assert!(b.preimage_of(1.5, 2.0).is_none());
    }
}
