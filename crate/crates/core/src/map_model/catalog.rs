//! Built-in maps with exact branch formulas and their recorded constants.

use serde::Serialize;

use super::{Branch, Interval, PiecewiseMap};
use crate::error::{Error, Result};

/// `f(x) = 2x mod 1`.
pub fn doubling() -> PiecewiseMap {
    let branches = (0..2)
        .map(|k| {
            let k = k as f64;
            Branch::from_fns(
                Interval::new(0.5 * k, 0.5 * (k + 1.0)).expect("static domain"),
                move |x| 2.0 * x - k,
                |_| 2.0,
                move |y| 0.5 * (y + k),
            )
        })
        .collect();
    PiecewiseMap::finite("doubling", branches, 2.0, f64::INFINITY)
        .expect("static catalog map")
        .with_closed_form(None, (1.0, 0.0))
}

/// Full tent map `f(x) = 1 - |1 - 2x|`.
pub fn tent() -> PiecewiseMap {
    let branches = vec![
        Branch::from_fns(
            Interval::new(0.0, 0.5).expect("static domain"),
            |x| 2.0 * x,
            |_| 2.0,
            |y| 0.5 * y,
        ),
        Branch::from_fns(
            Interval::new(0.5, 1.0).expect("static domain"),
            |x| 2.0 - 2.0 * x,
            |_| -2.0,
            |y| 1.0 - 0.5 * y,
        ),
    ];
    PiecewiseMap::finite("tent", branches, 2.0, f64::INFINITY)
        .expect("static catalog map")
        .with_closed_form(None, (1.0, 0.0))
}

/// Declared integrability exponent of the Gauss map; `|f'|^r = x^{-2r}` is
/// integrable exactly for `r < 1/2`.
pub const GAUSS_R: f64 = 0.45;

/// Gauss map `f(x) = 1/x - n` on `[1/(n+1), 1/n)`; branch index `i` is `n = i + 1`.
///
/// `|f'| = 1/x^2` reaches 1 only at the endpoint `x = 1`, so the declared
/// expansion constant is 1.
pub fn gauss() -> PiecewiseMap {
    let generator = |i: usize| {
        let n = (i + 1) as f64;
        Branch::from_fns(
            Interval::new(1.0 / (n + 1.0), 1.0 / n).expect("gauss domain"),
            move |x| 1.0 / x - n,
            |x| -1.0 / (x * x),
            move |y| 1.0 / (y + n),
        )
    };
    // ξ = x²: Lipschitz with constant 2 on [0, 1].
    PiecewiseMap::countable("gauss", generator, 1.0, GAUSS_R)
        .expect("static catalog map")
        .with_closed_form(Some(0.5), (1.0, 2.0))
}

/// Cusp map `f(x) = 1 - |1 - 2x|^κ` for `κ ∈ (1/2, 1)`.
///
/// `|f'| = 2κ|1 - 2x|^{κ-1}` is minimal (`2κ`) at the outer endpoints and
/// blows up at `x = 1/2`; `|f'|^r` is integrable for `r < 1/(1 - κ)`.
pub fn cusp(kappa: f64) -> Result<PiecewiseMap> {
    if !(kappa > 0.5 && kappa < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "cusp exponent κ = {kappa} must lie in (1/2, 1)"
        )));
    }
    let inv = 1.0 / kappa;
    let branches = vec![
        Branch::from_fns(
            Interval::new(0.0, 0.5)?,
            move |x| 1.0 - (1.0 - 2.0 * x).max(0.0).powf(kappa),
            move |x| 2.0 * kappa * (1.0 - 2.0 * x).max(0.0).powf(kappa - 1.0),
            move |y| 0.5 * (1.0 - (1.0 - y).max(0.0).powf(inv)),
        ),
        Branch::from_fns(
            Interval::new(0.5, 1.0)?,
            move |x| 1.0 - (2.0 * x - 1.0).max(0.0).powf(kappa),
            move |x| -2.0 * kappa * (2.0 * x - 1.0).max(0.0).powf(kappa - 1.0),
            move |y| 0.5 * (1.0 + (1.0 - y).max(0.0).powf(inv)),
        ),
    ];
    let r_limit = 1.0 / (1.0 - kappa);
    // A declared r strictly inside (0, r_limit), halfway between 3/4 and 1 of it.
    let r = 0.875 * r_limit;
    // 1/|f'| = |1-2x|^{1-κ}/(2κ) is (1-κ)-Hölder with constant 2^{1-κ}/(2κ).
    let pf = (1.0 - kappa, 2f64.powf(1.0 - kappa) / (2.0 * kappa));
    Ok(
        PiecewiseMap::finite(format!("cusp({kappa})"), branches, 2.0 * kappa, r)?
            .with_closed_form(Some(r_limit), pf),
    )
}

/// One row of the catalog listing.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CatalogEntry {
    pub name: String,
    pub formula: String,
    pub expansion_lambda: f64,
    #[serde(with = "crate::serde_f64")]
    pub r: f64,
    #[serde(with = "crate::serde_f64")]
    pub r_limit: f64,
    /// Hölder exponent of the Perron-Frobenius weight.
    pub beta: f64,
    pub holder_constant: f64,
    /// Smallest γ for which the summability condition holds with the PF weight.
    pub gamma: f64,
    pub infinite_partition: bool,
}

fn entry(map: &PiecewiseMap, formula: &str) -> CatalogEntry {
    let (beta, holder_constant) = map.pf_holder().expect("catalog maps carry PF data");
    CatalogEntry {
        name: map.name().to_string(),
        formula: formula.to_string(),
        expansion_lambda: map.expansion_lambda(),
        r: map.deriv_integrability_r(),
        r_limit: map.r_limit().unwrap_or(f64::INFINITY),
        beta,
        holder_constant,
        gamma: 0.0,
        infinite_partition: map.is_infinite(),
    }
}

/// The four built-in maps, with cusp at its default exponent 3/4.
pub fn catalog() -> Vec<CatalogEntry> {
    vec![
        entry(&doubling(), "2x mod 1"),
        entry(&tent(), "1 - |1 - 2x|"),
        entry(&gauss(), "1/x mod 1"),
        entry(
            &cusp(0.75).expect("default cusp exponent is valid"),
            "1 - |1 - 2x|^0.75",
        ),
    ]
}
