//! Piecewise-constant densities on uniform grids.

use std::fmt;
use std::fs;
use std::ops::{Add, Mul, Sub};
use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cell value type of a [`GridFunction`]: `f64` or `Complex64`.
pub trait Value:
    Copy
    + Send
    + Sync
    + PartialEq
    + Default
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<f64, Output = Self>
    + Serialize
    + DeserializeOwned
    + 'static
{
    fn modulus(self) -> f64;
    fn is_finite_value(self) -> bool;
    fn from_real(v: f64) -> Self;
    /// One CSV line (without newline).
    fn to_csv_field(self) -> String;
    fn from_csv_field(line: &str) -> Result<Self>;
}

fn parse_f64(text: &str) -> Result<f64> {
    text.trim()
        .parse::<f64>()
        .map_err(|_| Error::InvalidArgument(format!("cannot parse `{}` as a number", text.trim())))
}

impl Value for f64 {
    fn modulus(self) -> f64 {
        self.abs()
    }

    fn is_finite_value(self) -> bool {
        self.is_finite()
    }

    fn from_real(v: f64) -> Self {
        v
    }

    fn to_csv_field(self) -> String {
        format!("{self:e}")
    }

    fn from_csv_field(line: &str) -> Result<Self> {
        parse_f64(line)
    }
}

impl Value for Complex64 {
    fn modulus(self) -> f64 {
        self.norm()
    }

    fn is_finite_value(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    fn from_real(v: f64) -> Self {
        Complex64::new(v, 0.0)
    }

    fn to_csv_field(self) -> String {
        format!("{:e},{:e}", self.re, self.im)
    }

    fn from_csv_field(line: &str) -> Result<Self> {
        let mut parts = line.split(',');
        let re = parse_f64(parts.next().unwrap_or(""))?;
        let im = match parts.next() {
            Some(p) => parse_f64(p)?,
            None => 0.0,
        };
        if parts.next().is_some() {
            return Err(Error::InvalidArgument(format!(
                "expected `re,im`, got `{line}`"
            )));
        }
        Ok(Complex64::new(re, im))
    }
}

/// A density on `[0, 1]`, constant on the cells `I_i = [i/n, (i+1)/n)`.
///
/// `values[i]` is the cell average on `I_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Value"))]
pub struct GridFunction<T: Value = f64> {
    n: usize,
    values: Vec<T>,
}

impl<T: Value> GridFunction<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument(
                "a grid function needs at least one cell".into(),
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite_value()) {
            return Err(Error::InvalidArgument(format!(
                "cell {i} holds a non-finite value"
            )));
        }
        Ok(GridFunction {
            n: values.len(),
            values,
        })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(vec![T::default(); n])
    }

    pub fn constant(n: usize, value: T) -> Result<Self> {
        Self::new(vec![value; n])
    }

    /// Samples `f` at cell midpoints `(i + 1/2)/n`.
    pub fn sample_midpoints<F: Fn(f64) -> T>(n: usize, f: F) -> Result<Self> {
        Self::new((0..n).map(|i| f((i as f64 + 0.5) / n as f64)).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cell_width(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    /// Value of the cell containing `x`; `x = 1` belongs to the last cell.
    pub fn value_at(&self, x: f64) -> T {
        let i = ((x * self.n as f64).floor().max(0.0) as usize).min(self.n - 1);
        self.values[i]
    }

    /// `∫ h`.
    pub fn integral(&self) -> T {
        self.values
            .iter()
            .fold(T::default(), |acc, &v| acc + v)
            * self.cell_width()
    }

    /// `(Σ |h_i|^p / n)^{1/p}`, or `max |h_i|` for `p = ∞`.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if p.is_infinite() && p > 0.0 {
            return Ok(self.values.iter().fold(0.0, |m, v| m.max(v.modulus())));
        }
        if !(p >= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "L^p norm needs p ≥ 1, got {p}"
            )));
        }
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.modulus()));
        if scale == 0.0 {
            return Ok(0.0);
        }
        // Scaling by the max keeps large p from overflowing.
        let sum: f64 = self
            .values
            .iter()
            .map(|v| (v.modulus() / scale).powf(p))
            .sum();
        Ok(scale * (sum / self.n as f64).powf(1.0 / p))
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.modulus()).sum::<f64>() / self.n as f64
    }

    pub fn l1_distance(&self, other: &Self) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| (a - b).modulus())
            .sum::<f64>()
            / self.n as f64)
    }

    pub fn scale(&self, c: f64) -> Self {
        GridFunction {
            n: self.n,
            values: self.values.iter().map(|&v| v * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(GridFunction {
            n: self.n,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(GridFunction {
            n: self.n,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| a - b)
                .collect(),
        })
    }

    /// The same function on a grid `factor` times finer.
    pub fn refine(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::InvalidArgument("refinement factor must be positive".into()));
        }
        Ok(GridFunction {
            n: self.n * factor,
            values: self
                .values
                .iter()
                .flat_map(|&v| std::iter::repeat_n(v, factor))
                .collect(),
        })
    }

    fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        Ok(())
    }

    /// One value per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.n * 24);
        for v in &self.values {
            out.push_str(&v.to_csv_field());
            out.push('\n');
        }
        out
    }

    /// Parses one value per line; blank lines and `#` comments are skipped.
    pub fn from_csv(text: &str) -> Result<Self> {
        let values = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(T::from_csv_field)
            .collect::<Result<Vec<T>>>()?;
        Self::new(values)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: GridFunction<T> = serde_json::from_str(text)?;
        if raw.n != raw.values.len() {
            return Err(Error::DimensionMismatch {
                expected: raw.n,
                got: raw.values.len(),
            });
        }
        Self::new(raw.values)
    }

    /// Reads CSV or JSON, chosen by file extension.
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_json(&text),
            _ => Self::from_csv(&text),
        }
    }

    /// Writes CSV or JSON, chosen by file extension.
    pub fn write(&self, path: &Path) -> Result<()> {
        let text = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => self.to_json()?,
            _ => self.to_csv(),
        };
        fs::write(path, text)?;
        Ok(())
    }
}

impl GridFunction<f64> {
    /// Coefficients `g_j` of `φ_j` in `∫ h φ' = Σ_i h_i (φ_{i+1} - φ_i)`:
    /// `g_j = h_{j-1} - h_j` with `h_{-1} = h_n = 0`.
    pub fn node_weights(&self) -> Vec<f64> {
        let n = self.n;
        (0..=n)
            .map(|j| {
                let left = if j > 0 { self.values[j - 1] } else { 0.0 };
                let right = if j < n { self.values[j] } else { 0.0 };
                left - right
            })
            .collect()
    }

    /// Total variation of `h` extended by zero outside `[0, 1]`.
    ///
    /// Bounds the dual norm from above: `|∫ h φ'| = |Σ g_j φ_j| ≤ sup|φ| Σ|g_j|`.
    pub fn total_variation(&self) -> f64 {
        self.node_weights().iter().map(|g| g.abs()).sum()
    }

    pub fn to_complex(&self) -> GridFunction<Complex64> {
        GridFunction {
            n: self.n,
            values: self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }
}

impl GridFunction<Complex64> {
    /// `Re(e^{iθ} h)`.
    pub fn rotated_real_part(&self, theta: f64) -> GridFunction<f64> {
        let w = Complex64::from_polar(1.0, theta);
        GridFunction {
            n: self.n,
            values: self.values.iter().map(|&v| (w * v).re).collect(),
        }
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    pub fn real_part(&self) -> GridFunction<f64> {
        GridFunction {
            n: self.n,
            values: self.values.iter().map(|v| v.re).collect(),
        }
    }
}
