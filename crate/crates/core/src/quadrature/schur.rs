use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::linalg;
use crate::space::C64;

/// Largest accepted `nx · ny · d²`.
pub const MAX_SAMPLE_ENTRIES: usize = 1 << 24;

/// A nonnegative matrix kernel sampled on two weighted node sets.
///
/// `entries[((x·ny + y)·d + i)·d + k] = ⟨M(x, y) e_k, e_i⟩`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixKernelSample {
    /// Weights of the output measure μ at the x-nodes.
    pub x_weights: Vec<f64>,
    /// Weights of the input measure ν at the y-nodes.
    pub y_weights: Vec<f64>,
    pub dim: usize,
    pub entries: Vec<f64>,
    /// Optional test function, indexed by x-node; reused on the y-nodes when
    /// both node sets coincide. Defaults to `h ≡ 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_x: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_y: Option<Vec<f64>>,
}

impl MatrixKernelSample {
    pub fn new(x_weights: Vec<f64>, y_weights: Vec<f64>, dim: usize, entries: Vec<f64>) -> Result<Self> {
        let s = MatrixKernelSample { x_weights, y_weights, dim, entries, h_x: None, h_y: None };
        s.validate()?;
        Ok(s)
    }

    /// Same node set and weights on both sides.
    pub fn square(weights: Vec<f64>, dim: usize, entries: Vec<f64>) -> Result<Self> {
        Self::new(weights.clone(), weights, dim, entries)
    }

    pub fn validate(&self) -> Result<()> {
        let (nx, ny, d) = (self.x_weights.len(), self.y_weights.len(), self.dim);
        if nx == 0 || ny == 0 || d == 0 {
            return Err(LabError::param("kernel sample needs at least one node per side and d >= 1"));
        }
        let expected = nx
            .checked_mul(ny)
            .and_then(|v| v.checked_mul(d))
            .and_then(|v| v.checked_mul(d))
            .filter(|&v| v <= MAX_SAMPLE_ENTRIES)
            .ok_or_else(|| LabError::param("kernel sample too large"))?;
        if self.entries.len() != expected {
            return Err(LabError::mismatch(format!("{} entries, expected {expected}", self.entries.len())));
        }
        for w in self.x_weights.iter().chain(&self.y_weights) {
            if !w.is_finite() || *w <= 0.0 {
                return Err(LabError::param(format!("node weight {w} is not positive")));
            }
        }
        if let Some(e) = self.entries.iter().find(|e| !e.is_finite() || **e < 0.0) {
            return Err(LabError::param(format!("kernel entry {e} is negative or not finite")));
        }
        for (h, n) in [(&self.h_x, nx), (&self.h_y, ny)] {
            if let Some(h) = h {
                if h.len() != n {
                    return Err(LabError::mismatch(format!("{} test-function values for {n} nodes", h.len())));
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn entry(&self, x: usize, y: usize, i: usize, k: usize) -> f64 {
        let (ny, d) = (self.y_weights.len(), self.dim);
        self.entries[((x * ny + y) * d + i) * d + k]
    }

    /// The integral operator `(Tf)(x) = Σ_y ν_y M(x, y) f(y)` from `L²(ν)` to
    /// `L²(μ)` as a matrix between the unweighted coordinate spaces:
    /// block `(x, y)` is `sqrt(μ_x) M(x, y) sqrt(ν_y)`.
    pub fn weighted_matrix(&self) -> DMatrix<f64> {
        let (nx, ny, d) = (self.x_weights.len(), self.y_weights.len(), self.dim);
        DMatrix::from_fn(nx * d, ny * d, |r, c| {
            let (x, i, y, k) = (r / d, r % d, c / d, c % d);
            (self.x_weights[x] * self.y_weights[y]).sqrt() * self.entry(x, y, i, k)
        })
    }

    /// Norm of the discretised operator on `L²(ν) → L²(μ)`.
    pub fn discretized_norm(&self) -> f64 {
        let m = self.weighted_matrix().map(|v| C64::new(v, 0.0));
        linalg::spectral_norm(&m)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchurBound {
    pub c1: f64,
    pub c2: f64,
    pub p: f64,
    pub bound: f64,
}

/// Matrix Schur test with test functions `h_x` on the x-nodes and `h_y` on the y-nodes.
///
/// `C1 = max_{x,i} Σ_y ν_y Σ_k h_y(y)^q M_ik(x,y) / h_x(x)^q`,
/// `C2 = max_{y,k} Σ_x μ_x Σ_i h_x(x)^p M_ik(x,y) / h_y(y)^p`,
/// and the operator norm on `L^p` is at most `C1^{1/q} C2^{1/p}`.
pub fn schur_test_with(sample: &MatrixKernelSample, h_x: &[f64], h_y: &[f64], p: f64) -> Result<SchurBound> {
    sample.validate()?;
    if !p.is_finite() || p <= 1.0 {
        return Err(LabError::param(format!("Schur exponent p = {p} must exceed 1")));
    }
    let (nx, ny, d) = (sample.x_weights.len(), sample.y_weights.len(), sample.dim);
    if h_x.len() != nx || h_y.len() != ny {
        return Err(LabError::mismatch("test function length differs from node count"));
    }
    if let Some(h) = h_x.iter().chain(h_y).find(|h| !h.is_finite() || **h <= 0.0) {
        return Err(LabError::param(format!("test function value {h} is not positive")));
    }
    let q = p / (p - 1.0);
    let hyq: Vec<f64> = h_y.iter().map(|h| h.powf(q)).collect();
    let hxp: Vec<f64> = h_x.iter().map(|h| h.powf(p)).collect();

    let mut c1: f64 = 0.0;
    for x in 0..nx {
        let hq = h_x[x].powf(q);
        for i in 0..d {
            let mut acc = 0.0;
            for y in 0..ny {
                let row: f64 = (0..d).map(|k| sample.entry(x, y, i, k)).sum();
                acc += sample.y_weights[y] * hyq[y] * row;
            }
            c1 = c1.max(acc / hq);
        }
    }
    let mut c2: f64 = 0.0;
    for y in 0..ny {
        let hp = h_y[y].powf(p);
        for k in 0..d {
            let mut acc = 0.0;
            for x in 0..nx {
                let col: f64 = (0..d).map(|i| sample.entry(x, y, i, k)).sum();
                acc += sample.x_weights[x] * hxp[x] * col;
            }
            c2 = c2.max(acc / hp);
        }
    }
    Ok(SchurBound { c1, c2, p, bound: c1.powf(1.0 / q) * c2.powf(1.0 / p) })
}

/// Schur test with the sample's own test functions, or `h ≡ 1`.
pub fn schur_test(sample: &MatrixKernelSample, p: f64) -> Result<SchurBound> {
    let ones_x = vec![1.0; sample.x_weights.len()];
    let h_x = sample.h_x.as_deref().unwrap_or(&ones_x);
    let h_y: Vec<f64> = match (&sample.h_y, &sample.h_x) {
        (Some(h), _) => h.clone(),
        (None, Some(h)) if sample.x_weights.len() == sample.y_weights.len() => h.clone(),
        _ => vec![1.0; sample.y_weights.len()],
    };
    schur_test_with(sample, h_x, &h_y, p)
}

/// Parses and validates a kernel file (JSON).
pub fn parse_kernel_file(text: &str) -> Result<MatrixKernelSample> {
    let s: MatrixKernelSample = serde_json::from_str(text)?;
    s.validate()?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn probability(n: usize) -> Vec<f64> {
        vec![1.0 / n as f64; n]
    }

    #[test]
    fn constant_kernel_is_sharp() {
        let c = 2.5;
        let s = MatrixKernelSample::square(probability(7), 1, vec![c; 49]).unwrap();
        let b = schur_test(&s, 2.0).unwrap();
        assert!((b.c1 - c).abs() < 1e-12 && (b.c2 - c).abs() < 1e-12);
        assert!((b.bound - c).abs() < 1e-12);
        assert!((s.discretized_norm() - c).abs() < 1e-10);
    }

    #[test]
    fn zero_kernel() {
        let s = MatrixKernelSample::square(probability(4), 2, vec![0.0; 64]).unwrap();
        assert_eq!(schur_test(&s, 3.0).unwrap().bound, 0.0);
    }

    #[test]
    fn bound_dominates_svd() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = rng.random_range(1..=50);
            let d = rng.random_range(1..=3);
            let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
            let e: Vec<f64> = (0..n * n * d * d).map(|_| rng.random_range(0.0..1.0)).collect();
            let s = MatrixKernelSample::square(w, d, e).unwrap();
            let b = schur_test(&s, 2.0).unwrap();
            assert!(s.discretized_norm() <= b.bound * (1.0 + 1e-12));
        }
    }

    #[test]
    fn test_function_scaling() {
        // with h ≡ c the bound is unchanged
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let e: Vec<f64> = (0..5 * 5 * 4).map(|_| rng.random_range(0.0..2.0)).collect();
        let s = MatrixKernelSample::square(probability(5), 2, e).unwrap();
        let a = schur_test(&s, 3.0).unwrap();
        let b = schur_test_with(&s, &[4.0; 5], &[4.0; 5], 3.0).unwrap();
        assert!((a.bound - b.bound).abs() < 1e-12 * a.bound);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(MatrixKernelSample::square(probability(2), 1, vec![1.0, -1.0, 0.0, 0.0]).is_err());
        assert!(MatrixKernelSample::square(probability(2), 1, vec![1.0; 3]).is_err());
        let s = MatrixKernelSample::square(probability(2), 1, vec![1.0; 4]).unwrap();
        assert!(schur_test_with(&s, &[1.0, 0.0], &[1.0, 1.0], 2.0).is_err());
        assert!(schur_test(&s, 1.0).is_err());
        assert!(parse_kernel_file("{\"x_weights\":[1],\"y_weights\":[1],\"dim\":1,\"entries\":[1,2]}").is_err());
        assert!(parse_kernel_file("{\"x_weights\":[1],\"y_weights\":[1],\"dim\":1,\"entries\":[2]}").is_ok());
    }
}
