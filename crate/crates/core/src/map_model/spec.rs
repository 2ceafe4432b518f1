//! Serializable map and weight specifications, as read from run configs.

use serde::{Deserialize, Serialize};

use super::{
    cusp, doubling, gauss, tent, validate_map, validation_error, Branch, Interval, PiecewiseMap,
    Weight,
};
use crate::error::{Error, Result};
use crate::expr::Expr;

/// Samples per branch used when validating a user-supplied map.
const BUILD_SAMPLES: usize = 1000;
/// Branches scanned when validating a countable catalog family.
const BUILD_TRUNCATION: usize = 100;

/// One explicit branch: domain endpoints and expressions in `x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchSpec {
    pub lo: f64,
    pub hi: f64,
    pub f: String,
    pub df: String,
    pub finv: String,
}

/// Either a catalog name (`doubling`, `tent`, `gauss`, `cusp` / `cusp(0.75)`)
/// or an explicit list of branches.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub branches: Vec<BranchSpec>,
    #[serde(default)]
    pub expansion_lambda: Option<f64>,
    #[serde(default)]
    pub r: Option<f64>,
}

impl MapSpec {
    pub fn catalog(name: &str) -> Self {
        MapSpec {
            name: Some(name.to_string()),
            ..Default::default()
        }
    }
}

fn parse_catalog_name(name: &str) -> Result<(String, Option<f64>)> {
    let name = name.trim();
    if let Some(rest) = name.strip_prefix("cusp(") {
        let inner = rest
            .strip_suffix(')')
            .ok_or_else(|| Error::InvalidMap(format!("malformed map name `{name}`")))?;
        let kappa = inner
            .trim()
            .parse::<f64>()
            .map_err(|_| Error::InvalidMap(format!("bad cusp exponent in `{name}`")))?;
        return Ok(("cusp".into(), Some(kappa)));
    }
    Ok((name.to_string(), None))
}

/// Builds and validates a map. Validation failures become errors.
pub fn build_map(spec: &MapSpec) -> Result<PiecewiseMap> {
    let (map, truncation) = match (&spec.name, spec.branches.is_empty()) {
        (Some(name), true) => {
            let (base, kappa) = parse_catalog_name(name)?;
            match base.as_str() {
                "doubling" => (doubling(), 0),
                "tent" => (tent(), 0),
                "gauss" => (gauss(), BUILD_TRUNCATION),
                "cusp" => (cusp(kappa.or(spec.kappa).unwrap_or(0.75))?, 0),
                other => {
                    return Err(Error::InvalidMap(format!(
                        "unknown catalog map `{other}` (expected doubling, tent, gauss or cusp(κ))"
                    )))
                }
            }
        }
        (_, false) => (explicit_map(spec)?, 0),
        (None, true) => {
            return Err(Error::InvalidMap(
                "map spec needs a catalog name or a branch list".into(),
            ))
        }
    };
    let report = validate_map(&map, BUILD_SAMPLES, truncation)?;
    match validation_error(&map, &report) {
        Some(e) => Err(e),
        None => Ok(map),
    }
}

fn explicit_map(spec: &MapSpec) -> Result<PiecewiseMap> {
    let lambda = spec.expansion_lambda.ok_or_else(|| {
        Error::InvalidMap("explicit maps must declare expansion_lambda".into())
    })?;
    let r = spec.r.unwrap_or(0.0);
    let mut branches = Vec::with_capacity(spec.branches.len());
    for b in &spec.branches {
        let f = Expr::parse(&b.f)?;
        let df = Expr::parse(&b.df)?;
        let finv = Expr::parse(&b.finv)?;
        branches.push(Branch::from_fns(
            Interval::new(b.lo, b.hi)?,
            move |x| f.eval(x),
            move |x| df.eval(x),
            move |y| finv.eval(y),
        ));
    }
    let name = spec.name.clone().unwrap_or_else(|| "custom".into());
    PiecewiseMap::finite(name, branches, lambda, r)
}

/// Weight specification. `kind` is one of `pf`, `const`, `expr`, `potential`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSpec {
    pub kind: String,
    /// Value of a constant weight.
    #[serde(default)]
    pub value: Option<f64>,
    /// Expression for `ξ(x)` (kind `expr`).
    #[serde(default)]
    pub xi: Option<String>,
    /// Expression for the potential `φ(x)`, with `ξ = exp(φ)` (kind `potential`).
    #[serde(default)]
    pub phi: Option<String>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub holder_constant: Option<f64>,
}

impl Default for WeightSpec {
    fn default() -> Self {
        WeightSpec {
            kind: "pf".into(),
            value: None,
            xi: None,
            phi: None,
            beta: None,
            holder_constant: None,
        }
    }
}

fn required<T: Copy>(v: Option<T>, what: &str, kind: &str) -> Result<T> {
    v.ok_or_else(|| Error::InvalidArgument(format!("weight kind `{kind}` needs `{what}`")))
}

/// Builds a weight for `map`. The Perron-Frobenius weight takes its Hölder
/// data from the map unless given explicitly.
pub fn build_weight(spec: &WeightSpec, map: &PiecewiseMap) -> Result<Weight> {
    let kind = spec.kind.as_str();
    match kind {
        "pf" => match (spec.beta, spec.holder_constant) {
            (Some(b), Some(c)) => Weight::perron_frobenius(b, c),
            _ => Weight::perron_frobenius_for(map),
        },
        "const" => Ok(Weight::constant(required(spec.value, "value", kind)?)),
        "expr" => {
            let src = spec.xi.as_deref().ok_or_else(|| {
                Error::InvalidArgument("weight kind `expr` needs `xi`".into())
            })?;
            let e = Expr::parse(src)?;
            Weight::function(
                src,
                move |_, x| e.eval(x),
                required(spec.beta, "beta", kind)?,
                required(spec.holder_constant, "holder_constant", kind)?,
            )
        }
        "potential" => {
            let src = spec.phi.as_deref().ok_or_else(|| {
                Error::InvalidArgument("weight kind `potential` needs `phi`".into())
            })?;
            let e = Expr::parse(src)?;
            Weight::potential(
                src,
                move |_, x| e.eval(x),
                required(spec.beta, "beta", kind)?,
                required(spec.holder_constant, "holder_constant", kind)?,
            )
        }
        other => Err(Error::InvalidArgument(format!(
            "unknown weight kind `{other}` (expected pf, const, expr or potential)"
        ))),
    }
}
