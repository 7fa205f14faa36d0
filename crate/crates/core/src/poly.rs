//! Dense real polynomials in ascending-coefficient form.
//!
//! `coeffs[i]` multiplies `x^i`. Trailing zeros are allowed everywhere
//! except [`roots`], which strips them first.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

/// Horner evaluation at a real point.
pub fn eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Horner evaluation at a complex point.
pub fn eval_complex(coeffs: &[f64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

pub fn derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs.iter().enumerate().skip(1).map(|(i, &c)| i as f64 * c).collect()
}

pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| a.get(i).copied().unwrap_or(0.0) + b.get(i).copied().unwrap_or(0.0))
        .collect()
}

fn trimmed(coeffs: &[f64]) -> &[f64] {
    let end = coeffs.iter().rposition(|&c| c != 0.0).map_or(0, |i| i + 1);
    &coeffs[..end]
}

/// `p(x + c)`, ascending.
pub fn taylor_shift(coeffs: &[f64], c: f64) -> Vec<f64> {
    let mut out = coeffs.to_vec();
    let n = out.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            out[j] += c * out[j + 1];
        }
    }
    out
}

const SCHUR_ITERS: usize = 2000;

fn companion_eigenvalues(c: &[f64]) -> Option<Vec<Complex64>> {
    let n = c.len() - 1;
    let lead = c[n];
    let mut companion = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        companion[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        companion[(i, n - 1)] = -c[i] / lead;
    }
    Schur::try_new(companion, f64::EPSILON, SCHUR_ITERS).map(|s| s.complex_eigenvalues().iter().copied().collect())
}

/// All complex roots, with multiplicity, from the eigenvalues of the
/// companion matrix followed by a few Newton polishing steps on the
/// original coefficients.
///
/// Unshifted QR can stall on companion matrices that are permutations
/// (`x^n - 1` and friends); the variable is then shifted and the attempt repeated.
pub fn roots(coeffs: &[f64]) -> Vec<Complex64> {
    let c = trimmed(coeffs);
    if c.len() < 2 {
        return Vec::new();
    }
    let scale = c.iter().map(|v| v.abs()).fold(0.0, f64::max) / c[c.len() - 1].abs();
    let raw = std::iter::once(0.0)
        .chain([0.37, -0.61, 1.13].map(|s| s * (1.0 + scale.sqrt())))
        .find_map(|shift| {
            let shifted = if shift == 0.0 {
                c.to_vec()
            } else {
                taylor_shift(c, shift)
            };
            companion_eigenvalues(&shifted).map(|ev| ev.into_iter().map(|z| z + shift).collect::<Vec<_>>())
        })
        .unwrap_or_default();
    let dc = derivative(c);
    raw.into_iter().map(|z0| polish(c, &dc, z0)).collect()
}

fn polish(c: &[f64], dc: &[f64], mut z: Complex64) -> Complex64 {
    let mut best = (eval_complex(c, z).norm(), z);
    for _ in 0..8 {
        let d = eval_complex(dc, z);
        if d.norm() == 0.0 {
            break;
        }
        z -= eval_complex(c, z) / d;
        let r = eval_complex(c, z).norm();
        if !r.is_finite() {
            break;
        }
        if r < best.0 {
            best = (r, z);
        }
    }
    best.1
}

/// Real roots of a real polynomial: roots whose imaginary part is within
/// `imag_tol` of zero, returned ascending with the imaginary part dropped.
pub fn real_roots(coeffs: &[f64], imag_tol: f64) -> Vec<f64> {
    let mut out: Vec<f64> = roots(coeffs)
        .into_iter()
        .filter(|z| z.im.abs() < imag_tol)
        .map(|z| z.re)
        .collect();
    out.sort_by(f64::total_cmp);
    out
}
