//! Ulam discretization of the transfer operator.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::holder_space::GridFunction;
use crate::map_model::{Branch, PiecewiseMap, Weight};
use crate::par;
use crate::quadrature::GaussLegendre;

/// Assembly parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UlamOptions {
    /// Gauss-Legendre order per intersection interval.
    pub quad_order: usize,
    /// Branches scanned for countable maps; ignored for finite ones.
    pub truncation: usize,
    /// Largest acceptable `1 - Σ_{p ≤ N} |p|`.
    pub max_coverage_defect: f64,
}

impl Default for UlamOptions {
    fn default() -> Self {
        UlamOptions {
            quad_order: 8,
            truncation: 500,
            max_coverage_defect: 0.05,
        }
    }
}

/// Provenance of a matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UlamMeta {
    pub map: String,
    pub weight: String,
    pub quad_order: usize,
    /// Branches actually scanned.
    pub truncation: usize,
    pub coverage_defect: f64,
    /// Estimated tail of the summability series (`γ = 0`) beyond the scanned
    /// branches; 0 for finite maps.
    #[serde(with = "crate::serde_f64")]
    pub summability_tail: f64,
}

/// `M[i][j] = n ∫_{I_j ∩ f⁻¹(I_i)} ξ |f'| dy`, stored row-major.
///
/// `M` maps the cell averages of `h` to the cell averages of `L_ξ h`.
#[derive(Clone, Debug, PartialEq)]
pub struct UlamMatrix {
    n: usize,
    entries: Vec<f64>,
    meta: UlamMeta,
}

#[derive(Serialize, Deserialize)]
struct UlamJson {
    n: usize,
    meta: UlamMeta,
    rows: Vec<Vec<f64>>,
}

impl UlamMatrix {
    pub fn from_entries(n: usize, entries: Vec<f64>, meta: UlamMeta) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("matrix size must be positive".into()));
        }
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: entries.len(),
            });
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("matrix entries must be finite".into()));
        }
        Ok(UlamMatrix { n, entries, meta })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn meta(&self) -> &UlamMeta {
        &self.meta
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// `Σ_i M[i][j]` is the fraction of the mass of cell `j` that reaches
    /// `[0, 1]`, so for the Perron-Frobenius weight each column sums to 1 (up
    /// to the truncation defect).
    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n];
        for i in 0..self.n {
            for (s, v) in sums.iter_mut().zip(self.row(i)) {
                *s += v;
            }
        }
        sums
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.n * self.n * 12);
        for i in 0..self.n {
            for (j, v) in self.row(i).iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{v:e}");
            }
            out.push('\n');
        }
        out
    }

    /// Dense CSV import; the metadata is marked as unknown.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        let mut rows = 0;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            for field in line.split(',') {
                entries.push(field.trim().parse::<f64>().map_err(|_| {
                    Error::InvalidArgument(format!("bad matrix entry `{field}`"))
                })?);
            }
            rows += 1;
        }
        let meta = UlamMeta {
            map: "unknown".into(),
            weight: "unknown".into(),
            quad_order: 0,
            truncation: 0,
            coverage_defect: 0.0,
            summability_tail: 0.0,
        };
        Self::from_entries(rows, entries, meta)
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = UlamJson {
            n: self.n,
            meta: self.meta.clone(),
            rows: (0..self.n).map(|i| self.row(i).to_vec()).collect(),
        };
        Ok(serde_json::to_string(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: UlamJson = serde_json::from_str(text)?;
        if doc.rows.len() != doc.n || doc.rows.iter().any(|r| r.len() != doc.n) {
            return Err(Error::DimensionMismatch {
                expected: doc.n,
                got: doc.rows.len(),
            });
        }
        Self::from_entries(doc.n, doc.rows.concat(), doc.meta)
    }
}

/// `(M h)_i = Σ_j M[i][j] h_j`.
pub fn apply_matrix(m: &UlamMatrix, h: &GridFunction<f64>) -> Result<GridFunction<f64>> {
    if h.n() != m.n {
        return Err(Error::DimensionMismatch {
            expected: m.n,
            got: h.n(),
        });
    }
    let hv = h.values();
    let out = (0..m.n)
        .map(|i| m.row(i).iter().zip(hv).map(|(a, b)| a * b).sum())
        .collect();
    GridFunction::new(out)
}

/// Assembles the Ulam matrix on `n` uniform cells.
///
/// For each target cell `I_i` and branch `p`, the set `p ∩ f⁻¹(I_i)` is one
/// interval (the branch is monotone) with endpoints given by the inverse
/// branch; it is split along the source cells and `ξ|f'|` is integrated on
/// each piece. For the Perron-Frobenius weight the integrand is identically 1
/// and the piece lengths are used directly. Rows are assembled in parallel.
pub fn ulam_matrix(
    map: &PiecewiseMap,
    weight: &Weight,
    n: usize,
    options: &UlamOptions,
) -> Result<UlamMatrix> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("grid size n = {n} must be at least 2")));
    }
    if !weight.is_real() {
        return Err(Error::ComplexWeight);
    }
    let truncation = map.branch_count(options.truncation);
    let defect = map.coverage_defect(options.truncation);
    if defect > options.max_coverage_defect {
        return Err(Error::InsufficientTruncation {
            truncation: options.truncation,
            defect,
            threshold: options.max_coverage_defect,
        });
    }
    let rule = GaussLegendre::new(options.quad_order)?;
    let branches: Vec<Branch> = map.branches(options.truncation);
    let pf = weight.is_perron_frobenius();
    let nf = n as f64;

    let rows: Vec<Vec<f64>> = par::map_range(n, |i| {
        let mut row = vec![0.0; n];
        let (lo, hi) = (i as f64 / nf, (i + 1) as f64 / nf);
        for (bi, b) in branches.iter().enumerate() {
            let Some((y0, y1)) = b.preimage_of(lo, hi) else {
                continue;
            };
            let j0 = ((y0 * nf).floor() as usize).min(n - 1);
            let j1 = ((y1 * nf).ceil() as usize).clamp(j0 + 1, n);
            for (j, slot) in row.iter_mut().enumerate().take(j1).skip(j0) {
                let a = y0.max(j as f64 / nf);
                let c = y1.min((j + 1) as f64 / nf);
                if c <= a {
                    continue;
                }
                let v = if pf {
                    c - a
                } else {
                    rule.integrate(a, c, |y| weight.times_abs_derivative(bi, b, y).re)
                };
                *slot += nf * v;
            }
        }
        row
    });

    let summability_tail = if map.is_infinite() {
        crate::ly_lab::summability(map, weight, 0.0, truncation)?.tail
    } else {
        0.0
    };
    UlamMatrix::from_entries(
        n,
        rows.concat(),
        UlamMeta {
            map: map.name().to_string(),
            weight: weight.name().to_string(),
            quad_order: options.quad_order,
            truncation,
            coverage_defect: defect,
            summability_tail,
        },
    )
}
