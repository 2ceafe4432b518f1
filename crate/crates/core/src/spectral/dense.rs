//! Dense nonsymmetric eigenvalues and small linear-algebra helpers.
//!
//! Eigenvalues come from a Householder reduction to upper Hessenberg form
//! followed by the implicitly double-shifted Francis QR iteration with
//! exceptional shifts; eigenvectors, when needed, from inverse iteration.

use std::cmp::Ordering;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// QR sweeps allowed per eigenvalue before giving up.
const ITERATIONS_PER_EIGENVALUE: usize = 60;

/// Orders by modulus, then real part, then imaginary part, all descending.
pub(crate) fn by_modulus_desc(a: &Complex64, b: &Complex64) -> Ordering {
    b.norm()
        .total_cmp(&a.norm())
        .then(b.re.total_cmp(&a.re))
        .then(b.im.total_cmp(&a.im))
}

/// All eigenvalues of the row-major `n × n` matrix, sorted by
/// [`by_modulus_desc`].
pub fn eigenvalues(entries: &[f64], n: usize) -> Result<Vec<Complex64>> {
    if entries.len() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            got: entries.len(),
        });
    }
    if entries.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("matrix entries must be finite".into()));
    }
    let mut a = entries.to_vec();
    hessenberg(&mut a, n);
    let mut eig = hessenberg_qr(&mut a, n)?;
    eig.sort_by(by_modulus_desc);
    Ok(eig)
}

/// In-place Householder reduction to upper Hessenberg form.
fn hessenberg(a: &mut [f64], n: usize) {
    if n < 3 {
        return;
    }
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];
    for k in 0..n - 2 {
        let scale: f64 = (k + 1..n).map(|i| a[i * n + k].abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut norm2 = 0.0;
        for i in k + 1..n {
            v[i] = a[i * n + k] / scale;
            norm2 += v[i] * v[i];
        }
        let g = if v[k + 1] > 0.0 { -norm2.sqrt() } else { norm2.sqrt() };
        let h = norm2 - v[k + 1] * g;
        v[k + 1] -= g;
        // H = I - v vᵀ / h, applied from the left on rows k+1.. ...
        w[k..n].iter_mut().for_each(|x| *x = 0.0);
        for i in k + 1..n {
            let vi = v[i];
            let row = &a[i * n..(i + 1) * n];
            for j in k..n {
                w[j] += vi * row[j];
            }
        }
        for i in k + 1..n {
            let f = v[i] / h;
            let row = &mut a[i * n..(i + 1) * n];
            for j in k..n {
                row[j] -= f * w[j];
            }
        }
        // ... and from the right on columns k+1.. of every row.
        for i in 0..n {
            let row = &mut a[i * n..(i + 1) * n];
            let mut s = 0.0;
            for j in k + 1..n {
                s += row[j] * v[j];
            }
            let f = s / h;
            for j in k + 1..n {
                row[j] -= f * v[j];
            }
        }
        a[(k + 1) * n + k] = scale * g;
        for i in k + 2..n {
            a[i * n + k] = 0.0;
        }
    }
}

/// Eigenvalues of an upper Hessenberg matrix (destroyed).
fn hessenberg_qr(a: &mut [f64], n: usize) -> Result<Vec<Complex64>> {
    let at = |i: usize, j: usize| i * n + j;
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return Ok(out);
    }
    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[at(i, j)].abs();
        }
    }
    let mut nn = n as isize - 1;
    let mut t = 0.0;
    let mut its = 0usize;
    let mut total = 0usize;
    while nn >= 0 {
        let nu = nn as usize;
        // Look for a negligible subdiagonal element.
        let mut l = 0usize;
        for ll in (1..=nu).rev() {
            let mut s = a[at(ll - 1, ll - 1)].abs() + a[at(ll, ll)].abs();
            if s == 0.0 {
                s = anorm;
            }
            if a[at(ll, ll - 1)].abs() <= f64::EPSILON * s {
                a[at(ll, ll - 1)] = 0.0;
                l = ll;
                break;
            }
        }
        let mut x = a[at(nu, nu)];
        if l == nu {
            out.push(Complex64::new(x + t, 0.0));
            nn -= 1;
            its = 0;
            continue;
        }
        let mut y = a[at(nu - 1, nu - 1)];
        let mut w = a[at(nu, nu - 1)] * a[at(nu - 1, nu)];
        if l == nu - 1 {
            let pp = 0.5 * (y - x);
            let qq = pp * pp + w;
            let z = qq.abs().sqrt();
            x += t;
            if qq >= 0.0 {
                let z = pp + z.copysign(pp);
                let second = if z != 0.0 { x - w / z } else { x + z };
                out.push(Complex64::new(x + z, 0.0));
                out.push(Complex64::new(second, 0.0));
            } else {
                out.push(Complex64::new(x + pp, z));
                out.push(Complex64::new(x + pp, -z));
            }
            nn -= 2;
            its = 0;
            continue;
        }
        if its >= ITERATIONS_PER_EIGENVALUE {
            return Err(Error::EigenNonConvergence(total));
        }
        if its > 0 && its % 10 == 0 {
            // Exceptional shift.
            t += x;
            for i in 0..=nu {
                a[at(i, i)] -= x;
            }
            let s = a[at(nu, nu - 1)].abs() + a[at(nu - 1, nu - 2)].abs();
            x = 0.75 * s;
            y = x;
            w = -0.4375 * s * s;
        }
        its += 1;
        total += 1;
        // Look for two consecutive small subdiagonal elements.
        let (mut p, mut q, mut r): (f64, f64, f64);
        let mut m = nu - 2;
        loop {
            let z = a[at(m, m)];
            let rr = x - z;
            let ss = y - z;
            p = (rr * ss - w) / a[at(m + 1, m)] + a[at(m, m + 1)];
            q = a[at(m + 1, m + 1)] - z - rr - ss;
            r = a[at(m + 2, m + 1)];
            let s = p.abs() + q.abs() + r.abs();
            p /= s;
            q /= s;
            r /= s;
            if m == l {
                break;
            }
            let u = a[at(m, m - 1)].abs() * (q.abs() + r.abs());
            let v = p.abs() * (a[at(m - 1, m - 1)].abs() + z.abs() + a[at(m + 1, m + 1)].abs());
            if u <= f64::EPSILON * v {
                break;
            }
            m -= 1;
        }
        for i in m + 2..=nu {
            a[at(i, i - 2)] = 0.0;
            if i != m + 2 {
                a[at(i, i - 3)] = 0.0;
            }
        }
        // Double QR step on rows l..=nn and columns m..=nn.
        for k in m..nu {
            if k != m {
                p = a[at(k, k - 1)];
                q = a[at(k + 1, k - 1)];
                r = if k != nu - 1 { a[at(k + 2, k - 1)] } else { 0.0 };
                x = p.abs() + q.abs() + r.abs();
                if x != 0.0 {
                    p /= x;
                    q /= x;
                    r /= x;
                }
            }
            let s = (p * p + q * q + r * r).sqrt().copysign(p);
            if s == 0.0 {
                continue;
            }
            if k == m {
                if l != m {
                    a[at(k, k - 1)] = -a[at(k, k - 1)];
                }
            } else {
                a[at(k, k - 1)] = -s * x;
            }
            p += s;
            x = p / s;
            y = q / s;
            let z = r / s;
            q /= p;
            r /= p;
            for j in k..=nu {
                let mut pj = a[at(k, j)] + q * a[at(k + 1, j)];
                if k != nu - 1 {
                    pj += r * a[at(k + 2, j)];
                    a[at(k + 2, j)] -= pj * z;
                }
                a[at(k + 1, j)] -= pj * y;
                a[at(k, j)] -= pj * x;
            }
            let mmin = nu.min(k + 3);
            for i in l..=mmin {
                let mut pi = x * a[at(i, k)] + y * a[at(i, k + 1)];
                if k != nu - 1 {
                    pi += z * a[at(i, k + 2)];
                    a[at(i, k + 2)] -= pi * r;
                }
                a[at(i, k + 1)] -= pi * q;
                a[at(i, k)] -= pi;
            }
        }
    }
    Ok(out)
}

/// `y = M x` for a row-major square matrix.
pub(crate) fn mat_vec(entries: &[f64], n: usize, x: &[f64]) -> Vec<f64> {
    (0..n)
        .map(|i| entries[i * n..(i + 1) * n].iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

/// Result of the power method.
#[derive(Clone, Debug)]
pub(crate) struct PowerResult {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Power iteration from the constant vector, normalized in the max norm with
/// a positive sum. Only real dominant eigenvalues can converge.
pub(crate) fn power_iteration(entries: &[f64], n: usize, max_iter: usize) -> PowerResult {
    let mut v = vec![1.0; n];
    let mut value = 0.0;
    for it in 1..=max_iter {
        let w = mat_vec(entries, n, &v);
        let vv: f64 = v.iter().map(|a| a * a).sum();
        let next_value = v.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / vv;
        let scale = w.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        if scale == 0.0 {
            return PowerResult {
                value: 0.0,
                iterations: it,
                converged: true,
            };
        }
        let sign = if w.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
        let w: Vec<f64> = w.iter().map(|a| sign * a / scale).collect();
        let change = w.iter().zip(&v).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let settled = (next_value - value).abs() <= 1e-14 * next_value.abs().max(1.0);
        v = w;
        value = next_value;
        if settled && change <= 1e-12 {
            return PowerResult {
                value,
                iterations: it,
                converged: true,
            };
        }
    }
    PowerResult {
        value,
        iterations: max_iter,
        converged: false,
    }
}

/// LU factorization with partial pivoting; zero pivots are replaced by a
/// tiny multiple of the matrix norm, which is what inverse iteration wants.
struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl Lu {
    fn new(mut a: Vec<f64>, n: usize) -> Lu {
        let norm = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (piv, _) = (k..n).fold((k, -1.0), |(bi, bv), i| {
                let v = a[i * n + k].abs();
                if v > bv {
                    (i, v)
                } else {
                    (bi, bv)
                }
            });
            if piv != k {
                for j in 0..n {
                    a.swap(k * n + j, piv * n + j);
                }
                perm.swap(k, piv);
            }
            if a[k * n + k].abs() < f64::EPSILON * norm {
                a[k * n + k] = f64::EPSILON * norm;
            }
            let d = a[k * n + k];
            let (top, bottom) = a.split_at_mut((k + 1) * n);
            let pivot_row = &top[k * n..];
            for i in 0..n - k - 1 {
                let row = &mut bottom[i * n..(i + 1) * n];
                let f = row[k] / d;
                row[k] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        row[j] -= f * pivot_row[j];
                    }
                }
            }
        }
        Lu { n, lu: a, perm }
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.lu[i * n + j] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| self.lu[i * n + j] * x[j]).sum();
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
        x
    }
}

/// Eigenvector for the real eigenvalue `lambda` by inverse iteration,
/// normalized to unit max norm with a nonnegative sum.
pub(crate) fn inverse_iteration(entries: &[f64], n: usize, lambda: f64) -> Vec<f64> {
    let shift = lambda + 1e-10 * lambda.abs().max(1.0);
    let mut a = entries.to_vec();
    for i in 0..n {
        a[i * n + i] -= shift;
    }
    let lu = Lu::new(a, n);
    let mut v = vec![1.0; n];
    for _ in 0..3 {
        let w = lu.solve(&v);
        let scale = w.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        if !(scale > 0.0 && scale.is_finite()) {
            break;
        }
        let sign = if w.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
        v = w.iter().map(|a| sign * a / scale).collect();
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, re: f64, im: f64) -> bool {
        (a.re - re).abs() < 1e-12 && (a.im - im).abs() < 1e-12
    }

    #[test]
    fn two_by_two() {
        let e = eigenvalues(&[0.5, 0.5, 0.5, 0.5], 2).unwrap();
        assert!(close(e[0], 1.0, 0.0) && close(e[1], 0.0, 0.0));
        let v = inverse_iteration(&[0.5, 0.5, 0.5, 0.5], 2, 1.0);
        assert!((v[0] - 1.0).abs() < 1e-12 && (v[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identity_and_rotation() {
        let mut id = vec![0.0; 16];
        for i in 0..4 {
            id[i * 4 + i] = 1.0;
        }
        assert!(eigenvalues(&id, 4).unwrap().iter().all(|z| close(*z, 1.0, 0.0)));
        let e = eigenvalues(&[0.0, -1.0, 1.0, 0.0], 2).unwrap();
        assert!(close(e[0], 0.0, 1.0) && close(e[1], 0.0, -1.0));
    }

    #[test]
    fn companion_matrix_roots() {
        // x³ - 6x² + 11x - 6 = (x-1)(x-2)(x-3)
        let c = [6.0, -11.0, 6.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0];
        let e = eigenvalues(&c, 3).unwrap();
        for (z, want) in e.iter().zip([3.0, 2.0, 1.0]) {
            assert!((z.re - want).abs() < 1e-10 && z.im.abs() < 1e-10, "{e:?}");
        }
    }

    #[test]
    fn power_and_inverse_iteration_agree() {
        let m = [0.9, 0.2, 0.1, 0.1, 0.7, 0.3, 0.0, 0.1, 0.6];
        let e = eigenvalues(&m, 3).unwrap();
        let p = power_iteration(&m, 3, 10_000);
        assert!(p.converged);
        assert!((p.value - e[0].re).abs() < 1e-10);
        let v = inverse_iteration(&m, 3, e[0].re);
        let mv = mat_vec(&m, 3, &v);
        for (a, b) in mv.iter().zip(&v) {
            assert!((a - e[0].re * b).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(eigenvalues(&[1.0, 2.0], 2).is_err());
        assert!(eigenvalues(&[f64::NAN], 1).is_err());
    }
}
