use nalgebra::{DMatrix, DVector};

use super::{normalized_origin_delta, toeplitz_matrix, toeplitz_measure_matrix, OperatorMatrix};
use crate::coeff::{basis_normalizer, CoeffFunction};
use crate::error::{LabError, Result};
use crate::space::{SpaceSpec, C64};
use crate::symbol::{MatrixSymbol, ScalarSymbol, Term};

/// `f ⊗ g : h ↦ ⟨h, g⟩ f`.
pub fn rank_one(f: &CoeffFunction, g: &CoeffFunction) -> Result<OperatorMatrix> {
    f.space().ensure_compatible(g.space())?;
    let a = DVector::from_column_slice(f.coeffs());
    let b = DVector::from_column_slice(g.coeffs());
    OperatorMatrix::new(f.space(), &a * b.adjoint())
}

/// Component `k` of `f` as a polynomial symbol in `z`.
fn component_symbol(f: &CoeffFunction, k: usize) -> Result<ScalarSymbol> {
    let s = f.space();
    let n = s.truncation_order;
    let mut terms = Vec::new();
    for m in 0..s.n_modes() {
        let c = f.get(m, k);
        if c == C64::new(0.0, 0.0) {
            continue;
        }
        let z_pow = match s.n_vars() {
            1 => [m as u32, 0],
            _ => [(m / n) as u32, (m % n) as u32],
        };
        terms.push(Term { coeff: c * basis_normalizer(s, m)?, z_pow, zbar_pow: [0, 0], balls: vec![] });
    }
    Ok(ScalarSymbol::from_terms(terms))
}

fn unit_matrix(d: usize, i: usize, k: usize) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(d, d);
    m[(i, k)] = C64::new(1.0, 0.0);
    m
}

/// `Σ_{i,k} T_{f_i E_{ii}} T_{‖K_0‖^{-1}δ_0 E_{ii}} T_{conj(g_k) E_{ii}} T_{E_{ik}}`,
/// assembled from quadrature Toeplitz matrices and the point-mass Toeplitz matrix.
///
/// `f` and `g` must be polynomials of degree below `N/2`.
pub fn rank_one_toeplitz_sum(space: &SpaceSpec, f: &CoeffFunction, g: &CoeffFunction) -> Result<OperatorMatrix> {
    space.ensure_compatible(f.space())?;
    space.ensure_compatible(g.space())?;
    let n = space.truncation_order;
    for h in [f, g] {
        if let Some(deg) = h.degree() {
            if 2 * deg >= n {
                return Err(LabError::param(format!("degree {deg} leaves no headroom below N/2 = {}", n / 2)));
            }
        }
    }
    let d = space.component_dim;
    let f_syms: Vec<ScalarSymbol> = (0..d).map(|i| component_symbol(f, i)).collect::<Result<_>>()?;
    let g_conj: Vec<ScalarSymbol> = (0..d).map(|k| component_symbol(g, k).map(|s| s.conj())).collect::<Result<_>>()?;

    let mut total = OperatorMatrix::zeros(space);
    for i in 0..d {
        if f_syms[i].is_zero() {
            continue;
        }
        let tf = toeplitz_matrix(space, &MatrixSymbol::unit(space, i, i, f_syms[i].clone())?)?;
        let delta = toeplitz_measure_matrix(space, &[normalized_origin_delta(space, unit_matrix(d, i, i))?])?;
        let head = tf.mul(&delta)?;
        for (k, gk) in g_conj.iter().enumerate() {
            if gk.is_zero() {
                continue;
            }
            let tg = toeplitz_matrix(space, &MatrixSymbol::unit(space, i, i, gk.clone())?)?;
            let move_k = toeplitz_matrix(space, &MatrixSymbol::unit(space, i, k, ScalarSymbol::constant(C64::new(1.0, 0.0)))?)?;
            total = total.add(&head.mul(&tg)?.mul(&move_k)?)?;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_rank_one() {
        let s = SpaceSpec::bergman_disc(0.0, 8, 2).unwrap();
        let e = CoeffFunction::basis(&s, 0, 0).unwrap();
        let r = rank_one(&e, &e).unwrap();
        assert_eq!(r.matrix()[(0, 0)], C64::new(1.0, 0.0));
        assert_eq!(r.matrix().iter().filter(|z| z.norm() > 0.0).count(), 1);
        let sum = rank_one_toeplitz_sum(&s, &e, &e).unwrap();
        assert!(sum.sub(&r).unwrap().norm() < 1e-10);
    }

    #[test]
    fn zero_and_degree_guard() {
        let s = SpaceSpec::bergman_disc(0.0, 8, 2).unwrap();
        let f = CoeffFunction::basis(&s, 3, 1).unwrap();
        let z = CoeffFunction::zeros(&s);
        assert_eq!(rank_one_toeplitz_sum(&s, &f, &z).unwrap(), OperatorMatrix::zeros(&s));
        let high = CoeffFunction::basis(&s, 4, 0).unwrap();
        assert!(rank_one_toeplitz_sum(&s, &high, &f).is_err());
    }

    #[test]
    fn rank_one_action() {
        let s = SpaceSpec::fock(6, 2).unwrap();
        let mk = |seed: f64| {
            let c = (0..s.dim()).map(|j| C64::new((seed * j as f64).sin(), (seed + j as f64).cos())).collect();
            CoeffFunction::new(&s, c).unwrap()
        };
        let (f, g, h) = (mk(0.7), mk(1.3), mk(2.9));
        let r = rank_one(&f, &g).unwrap();
        let lhs = r.apply(&h).unwrap();
        let rhs = f.scale(h.inner(&g).unwrap());
        let diff: f64 = lhs.coeffs().iter().zip(rhs.coeffs()).map(|(a, b)| (a - b).norm()).sum();
        assert!(diff < 1e-12);
        assert!((r.norm() - f.norm() * g.norm()).abs() < 1e-10);
    }
}
