//! One-dimensional Gauss rules: Legendre, Jacobi and Laguerre.
//!
//! Nodes are seeded by Golub–Welsch eigenvalues (Jacobi, Laguerre) or the
//! classical cosine guess (Legendre), then polished by Newton iteration on the
//! three-term recurrence. Weights come from the closed-form derivative
//! formulas, which keeps them accurate in relative terms even where they are
//! tiny (the outer Laguerre nodes).

use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

use crate::error::{LabError, Result};

/// Nodes and weights of a 1D rule, nodes ascending.
#[derive(Clone, Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

const MAX_NEWTON: usize = 100;

/// Gauss–Legendre on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Result<GaussRule> {
    if n == 0 {
        return Err(LabError::param("Gauss rule needs at least one node"));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..MAX_NEWTON {
            let (p, dpx) = legendre_with_derivative(n, x);
            dp = dpx;
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Ok(GaussRule { nodes, weights })
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    (p1, nf * (x * p1 - p0) / (x * x - 1.0))
}

/// `(P_n, P_{n-1})` for the Jacobi family with parameters `(a, b)`.
fn jacobi_pair(n: usize, a: f64, b: f64, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p1 = 0.5 * (a - b) + 0.5 * (a + b + 2.0) * x;
    for k in 2..=n {
        let k = k as f64;
        let s = 2.0 * k + a + b;
        let a1 = 2.0 * k * (k + a + b) * (s - 2.0);
        let a2 = (s - 1.0) * (a * a - b * b);
        let a3 = (s - 2.0) * (s - 1.0) * s;
        let a4 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * s;
        let p2 = ((a2 + a3 * x) * p1 - a4 * p0) / a1;
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

fn jacobi_derivative(n: usize, a: f64, b: f64, x: f64) -> (f64, f64) {
    let (p, pm) = jacobi_pair(n, a, b, x);
    let nf = n as f64;
    let s = 2.0 * nf + a + b;
    let num = nf * ((a - b) - s * x) * p + 2.0 * (nf + a) * (nf + b) * pm;
    (p, num / (s * (1.0 - x * x)))
}

fn symmetric_tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = diag[i];
        if i + 1 < n {
            m[(i, i + 1)] = off[i];
            m[(i + 1, i)] = off[i];
        }
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

/// Gauss–Jacobi on `[-1, 1]` for the weight `(1 − x)^a (1 + x)^b`.
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> Result<GaussRule> {
    if n == 0 {
        return Err(LabError::param("Gauss rule needs at least one node"));
    }
    if !(a > -1.0 && b > -1.0) {
        return Err(LabError::param(format!("Jacobi parameters ({a}, {b}) must exceed -1")));
    }
    if a == 0.0 && b == 0.0 {
        return gauss_legendre(n);
    }
    if (a + b + 1.0).abs() < 1e-12 {
        return Err(LabError::param("Jacobi parameters with a + b = -1 are not supported"));
    }
    let mut diag = Vec::with_capacity(n);
    let mut off = Vec::with_capacity(n.saturating_sub(1));
    for k in 0..n {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        diag.push(if k == 0 { (b - a) / (a + b + 2.0) } else { (b * b - a * a) / (s * (s + 2.0)) });
        if k >= 1 {
            let v = 4.0 * kf * (kf + a) * (kf + b) * (kf + a + b) / (s * s * (s + 1.0) * (s - 1.0));
            off.push(v.sqrt());
        }
    }
    let guesses = symmetric_tridiagonal_eigenvalues(&diag, &off);
    let log_c = ln_gamma(n as f64 + a + 1.0) + ln_gamma(n as f64 + b + 1.0)
        - ln_gamma(n as f64 + a + b + 1.0)
        - ln_gamma(n as f64 + 1.0)
        + (a + b + 1.0) * std::f64::consts::LN_2;
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for mut x in guesses {
        for _ in 0..MAX_NEWTON {
            let (p, dp) = jacobi_derivative(n, a, b, x);
            let dx = p / dp;
            if !dx.is_finite() {
                break;
            }
            x = (x - dx).clamp(-1.0 + 1e-300, 1.0 - 1e-16);
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = jacobi_derivative(n, a, b, x);
        nodes.push(x);
        weights.push((log_c - ((1.0 - x * x) * dp * dp).ln()).exp());
    }
    Ok(GaussRule { nodes, weights })
}

/// Largest supported Laguerre order (recurrence values stay inside f64 range).
pub const MAX_LAGUERRE_ORDER: usize = 170;

/// Gauss–Laguerre on `[0, ∞)` for the weight `e^{−x}`.
pub fn gauss_laguerre(n: usize) -> Result<GaussRule> {
    if n == 0 {
        return Err(LabError::param("Gauss rule needs at least one node"));
    }
    if n > MAX_LAGUERRE_ORDER {
        return Err(LabError::param(format!("Laguerre order {n} exceeds {MAX_LAGUERRE_ORDER}")));
    }
    let diag: Vec<f64> = (0..n).map(|k| 2.0 * k as f64 + 1.0).collect();
    let off: Vec<f64> = (1..n).map(|k| k as f64).collect();
    let guesses = symmetric_tridiagonal_eigenvalues(&diag, &off);
    let laguerre = |x: f64| -> (f64, f64) {
        let (mut l0, mut l1) = (1.0, 1.0 - x);
        if n == 1 {
            return (l1, -1.0);
        }
        for k in 2..=n {
            let k = k as f64;
            let l2 = ((2.0 * k - 1.0 - x) * l1 - (k - 1.0) * l0) / k;
            l0 = l1;
            l1 = l2;
        }
        (l1, n as f64 * (l1 - l0) / x)
    };
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for mut x in guesses {
        x = x.max(1e-300);
        for _ in 0..MAX_NEWTON {
            let (l, dl) = laguerre(x);
            let dx = l / dl;
            if !dx.is_finite() {
                break;
            }
            x -= dx;
            if dx.abs() < 1e-15 * x.max(1.0) {
                break;
            }
        }
        let (_, dl) = laguerre(x);
        nodes.push(x);
        weights.push(1.0 / (x * dl * dl));
    }
    Ok(GaussRule { nodes, weights })
}

/// Gauss–Legendre mapped to `[lo, hi]`.
pub fn gauss_legendre_interval(n: usize, lo: f64, hi: f64) -> Result<GaussRule> {
    let g = gauss_legendre(n)?;
    let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    Ok(GaussRule {
        nodes: g.nodes.iter().map(|x| mid + half * x).collect(),
        weights: g.weights.iter().map(|w| half * w).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use statrs::function::beta::beta;

    #[test]
    fn legendre_integrates_polynomials() {
        for n in [1, 2, 5, 40, 200] {
            let g = gauss_legendre(n).unwrap();
            for k in 0..(2 * n).min(60) {
                let s: f64 = g.nodes.iter().zip(&g.weights).map(|(x, w)| w * x.powi(k as i32)).sum();
                let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
                assert!((s - exact).abs() < 1e-13, "n={n} k={k} {s} vs {exact}");
            }
        }
    }

    #[test]
    fn jacobi_moments() {
        for (a, b) in [(0.5, 0.0), (-0.5, 0.0), (2.0, 0.0), (1.5, 0.7)] {
            for n in [3, 20, 90] {
                let g = gauss_jacobi(n, a, b).unwrap();
                let total: f64 = g.weights.iter().sum();
                let exact = 2f64.powf(a + b + 1.0) * beta(a + 1.0, b + 1.0);
                assert_relative_eq!(total, exact, max_relative = 1e-12);
                // ∫ (1+x)^k (1-x)^a (1+x)^b = 2^{a+b+k+1} B(a+1, b+k+1)
                for k in [1, 5, 2 * n - 1] {
                    let s: f64 =
                        g.nodes.iter().zip(&g.weights).map(|(x, w)| w * (1.0 + x).powi(k as i32)).sum();
                    let exact = 2f64.powf(a + b + k as f64 + 1.0) * beta(a + 1.0, b + k as f64 + 1.0);
                    assert_relative_eq!(s, exact, max_relative = 1e-10);
                }
            }
        }
    }

    #[test]
    fn laguerre_moments() {
        for n in [1, 4, 40, 120] {
            let g = gauss_laguerre(n).unwrap();
            let mut fact = 1.0;
            for k in 0..(2 * n).min(60) {
                if k > 0 {
                    fact *= k as f64;
                }
                let s: f64 = g.nodes.iter().zip(&g.weights).map(|(x, w)| w * x.powi(k as i32)).sum();
                assert_relative_eq!(s, fact, max_relative = 1e-11);
            }
        }
        assert!(gauss_laguerre(MAX_LAGUERRE_ORDER + 1).is_err());
    }
}
