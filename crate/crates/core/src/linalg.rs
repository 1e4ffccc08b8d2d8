//! Small dense helpers on complex matrices.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::space::C64;

/// Singular values in decreasing order.
pub fn singular_values(a: &DMatrix<C64>) -> Vec<f64> {
    if a.is_empty() {
        return vec![];
    }
    let mut s: Vec<f64> = a.singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Largest singular value.
pub fn spectral_norm(a: &DMatrix<C64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let (r, c) = a.shape();
    if r >= 2 * c {
        return gram_norm(&(a.adjoint() * a));
    }
    if c >= 2 * r {
        return gram_norm(&(a * a.adjoint()));
    }
    singular_values(a)[0]
}

/// `sqrt(λ_max(G))` for a Hermitian positive semidefinite Gram matrix `G`.
pub fn gram_norm(g: &DMatrix<C64>) -> f64 {
    if g.is_empty() {
        return 0.0;
    }
    let h = (g + g.adjoint()) * C64::new(0.5, 0.0);
    let e = SymmetricEigen::new(h);
    e.eigenvalues.iter().copied().fold(0.0, f64::max).sqrt()
}

/// Number of singular values above `rtol · σ_max`.
pub fn numerical_rank(a: &DMatrix<C64>, rtol: f64) -> usize {
    let s = singular_values(a);
    match s.first() {
        Some(&top) if top > 0.0 => s.iter().filter(|&&x| x > rtol * top).count(),
        _ => 0,
    }
}

pub fn identity(n: usize) -> DMatrix<C64> {
    DMatrix::identity(n, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn norms_agree() {
        let a = DMatrix::from_fn(9, 3, |i, j| C64::new((i * 3 + j) as f64 % 5.0 - 2.0, (i as f64 - j as f64) * 0.1));
        let s = singular_values(&a)[0];
        assert_abs_diff_eq!(spectral_norm(&a), s, epsilon = 1e-12);
        assert_abs_diff_eq!(spectral_norm(&a.adjoint()), s, epsilon = 1e-12);
        assert_eq!(numerical_rank(&DMatrix::<C64>::zeros(3, 3), 1e-12), 0);
        assert_eq!(numerical_rank(&identity(4), 1e-12), 4);
        assert_eq!(spectral_norm(&DMatrix::<C64>::zeros(0, 0)), 0.0);
    }
}
