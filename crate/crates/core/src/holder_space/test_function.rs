//! Continuous piecewise-linear test functions and the Hölder test norm.

use serde::{Deserialize, Serialize};

use super::grid::{GridFunction, Value};
use crate::error::{Error, Result};

/// Values `φ(j/m)` at `m + 1` uniform nodes; between nodes `φ` is linear.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    values: Vec<f64>,
}

impl TestFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidArgument(
                "a test function needs at least two nodes".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "test function values must be finite".into(),
            ));
        }
        Ok(TestFunction { values })
    }

    /// Interpolates `f` at the nodes `j/m`.
    pub fn from_fn<F: Fn(f64) -> f64>(m: usize, f: F) -> Result<Self> {
        Self::new((0..=m).map(|j| f(j as f64 / m as f64)).collect())
    }

    /// Number of linear pieces.
    pub fn m(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, x: f64) -> f64 {
        let m = self.m();
        let s = (x * m as f64).clamp(0.0, m as f64);
        let k = (s.floor() as usize).min(m - 1);
        let w = s - k as f64;
        self.values[k] * (1.0 - w) + self.values[k + 1] * w
    }

    /// `∫_0^x φ`, exact for the interpolant.
    fn antiderivative(&self, x: f64, prefix: &[f64]) -> f64 {
        let m = self.m();
        let h = 1.0 / m as f64;
        let s = (x * m as f64).clamp(0.0, m as f64);
        let k = (s.floor() as usize).min(m - 1);
        let xk = k as f64 * h;
        let dx = (x.clamp(0.0, 1.0) - xk).max(0.0);
        prefix[k] + dx * 0.5 * (self.values[k] + self.eval(x))
    }

    fn prefix_integrals(&self) -> Vec<f64> {
        let h = 1.0 / self.m() as f64;
        let mut prefix = Vec::with_capacity(self.values.len());
        let mut acc = 0.0;
        prefix.push(0.0);
        for w in self.values.windows(2) {
            acc += 0.5 * h * (w[0] + w[1]);
            prefix.push(acc);
        }
        prefix
    }

    /// `∫_{I_i} φ` for the `n` uniform cells, computed exactly.
    pub fn cell_integrals(&self, n: usize) -> Vec<f64> {
        let prefix = self.prefix_integrals();
        let bounds: Vec<f64> = (0..=n)
            .map(|i| self.antiderivative(i as f64 / n as f64, &prefix))
            .collect();
        bounds.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn integral(&self) -> f64 {
        *self.prefix_integrals().last().expect("at least two nodes")
    }

    /// `|φ|_α = max_j |φ_j| + max_{j<k} |φ_j - φ_k| / |x_j - x_k|^α` over nodes.
    pub fn test_norm(&self, alpha: f64) -> Result<f64> {
        check_alpha(alpha)?;
        let m = self.m();
        let sup = self.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let dist: Vec<f64> = (0..=m)
            .map(|d| (d as f64 / m as f64).powf(alpha))
            .collect();
        let mut quotient: f64 = 0.0;
        for j in 0..=m {
            let vj = self.values[j];
            for k in j + 1..=m {
                quotient = quotient.max((vj - self.values[k]).abs() / dist[k - j]);
            }
        }
        Ok(sup + quotient)
    }

    /// `∫ h φ' = Σ_i h_i (φ((i+1)/n) - φ(i/n))`.
    pub fn pairing<T: Value>(&self, h: &GridFunction<T>) -> T {
        let n = h.n();
        h.values()
            .iter()
            .enumerate()
            .fold(T::default(), |acc, (i, &v)| {
                let d = self.eval((i + 1) as f64 / n as f64) - self.eval(i as f64 / n as f64);
                acc + v * d
            })
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "Hölder exponent alpha = {alpha} must lie in (0, 1]"
        )));
    }
    Ok(())
}

/// Free-function form of [`TestFunction::test_norm`].
pub fn test_norm(phi: &TestFunction, alpha: f64) -> Result<f64> {
    phi.test_norm(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_norm_examples() {
        let x = TestFunction::from_fn(10, |x| x).unwrap();
        assert!((x.test_norm(1.0).unwrap() - 2.0).abs() < 1e-14);
        let x = TestFunction::from_fn(100, |x| x).unwrap();
        assert!((x.test_norm(0.5).unwrap() - 2.0).abs() < 1e-14);
        let c = TestFunction::new(vec![-0.7; 5]).unwrap();
        assert_eq!(c.test_norm(0.3).unwrap(), 0.7);
        assert!(TestFunction::new(vec![]).is_err());
        assert!(c.test_norm(0.0).is_err());
    }

    #[test]
    fn cell_integrals_are_exact() {
        let phi = TestFunction::from_fn(7, |x| x).unwrap();
        let cells = phi.cell_integrals(5);
        for (i, c) in cells.iter().enumerate() {
            let (a, b) = (i as f64 / 5.0, (i + 1) as f64 / 5.0);
            assert!((c - 0.5 * (b * b - a * a)).abs() < 1e-15);
        }
        let hat = TestFunction::new(vec![0.0, 1.0, 0.0]).unwrap();
        assert!((hat.integral() - 0.5).abs() < 1e-15);
        let q = hat.cell_integrals(4);
        assert!((q[0] - 1.0 / 16.0).abs() < 1e-15);
        assert!((q[1] - 3.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn pairing_integrates_by_parts() {
        // ∫ 1 · φ' = φ(1) - φ(0).
        let phi = TestFunction::from_fn(9, |x| x * x).unwrap();
        let one = GridFunction::constant(6, 1.0).unwrap();
        assert!((phi.pairing(&one) - 1.0).abs() < 1e-14);
    }
}
