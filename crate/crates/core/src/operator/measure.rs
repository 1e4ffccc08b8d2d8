use nalgebra::DMatrix;

use super::OperatorMatrix;
use crate::coeff::basis_at;
use crate::error::{LabError, Result};
use crate::quadrature::QuadratureRule;
use crate::space::{kernel_norm, DomainPoint, SpaceSpec, C64};

/// Atom `weight · δ_location` acting through a `d × d` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct PointMass {
    pub location: DomainPoint,
    pub weight: C64,
    pub matrix: DMatrix<C64>,
}

/// `‖K_0‖^{-1} δ_0` with the given component matrix.
pub fn normalized_origin_delta(space: &SpaceSpec, matrix: DMatrix<C64>) -> Result<PointMass> {
    let origin = space.origin();
    let k0 = kernel_norm(space, &origin)?;
    Ok(PointMass { location: origin, weight: C64::new(1.0 / k0, 0.0), matrix })
}

/// σ sampled on the nodes of `rule`, each atom carrying `matrix`.
pub fn rule_measure(rule: &QuadratureRule, matrix: &DMatrix<C64>) -> Vec<PointMass> {
    rule.nodes()
        .iter()
        .zip(rule.sigma_weights())
        .map(|(z, w)| PointMass { location: *z, weight: C64::new(*w, 0.0), matrix: matrix.clone() })
        .collect()
}

/// `T_μ` for a finite sum of atoms: entry `((m', i), (m, k)) = Σ w ⟨A e_k, e_i⟩ e_m(a) conj(e_{m'}(a))`.
pub fn toeplitz_measure_matrix(space: &SpaceSpec, atoms: &[PointMass]) -> Result<OperatorMatrix> {
    let d = space.component_dim;
    let modes = space.n_modes();
    let mut out = DMatrix::zeros(space.dim(), space.dim());
    for a in atoms {
        space.check_point(&a.location)?;
        if a.matrix.shape() != (d, d) {
            return Err(LabError::mismatch(format!("atom matrix {:?} for d = {d}", a.matrix.shape())));
        }
        if !a.weight.re.is_finite() || !a.weight.im.is_finite() {
            return Err(LabError::param("atom weight is not finite"));
        }
        let e = basis_at(space, &a.location)?;
        for m in 0..modes {
            for mp in 0..modes {
                let s = a.weight * e[m] * e[mp].conj();
                if s == C64::new(0.0, 0.0) {
                    continue;
                }
                for i in 0..d {
                    for k in 0..d {
                        out[(mp * d + i, m * d + k)] += s * a.matrix[(i, k)];
                    }
                }
            }
        }
    }
    OperatorMatrix::new(space, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::toeplitz_matrix;
    use crate::quadrature::build_rule;
    use crate::symbol::MatrixSymbol;

    #[test]
    fn origin_delta_projects_onto_constants() {
        let s = SpaceSpec::bergman_disc(0.0, 6, 2).unwrap();
        let delta = normalized_origin_delta(&s, DMatrix::identity(2, 2)).unwrap();
        let t = toeplitz_measure_matrix(&s, &[delta]).unwrap();
        for r in 0..s.dim() {
            for c in 0..s.dim() {
                let expect = if r == c && r < 2 { 1.0 } else { 0.0 };
                assert!((t.matrix()[(r, c)] - expect).norm() < 1e-15);
            }
        }
        assert_eq!(toeplitz_measure_matrix(&s, &[]).unwrap(), OperatorMatrix::zeros(&s));
    }

    #[test]
    fn sigma_measure_is_constant_symbol() {
        let s = SpaceSpec::bergman_disc(0.0, 8, 2).unwrap();
        let rule = build_rule(&s, 40, 64).unwrap();
        let m = DMatrix::from_fn(2, 2, |i, k| C64::new(i as f64 + 1.0, k as f64));
        let t = toeplitz_measure_matrix(&s, &rule_measure(&rule, &m)).unwrap();
        let u = toeplitz_matrix(&s, &MatrixSymbol::constant(&s, &m).unwrap()).unwrap();
        assert!(t.sub(&u).unwrap().norm() < 1e-10);
    }

    #[test]
    fn atoms_validated() {
        let s = SpaceSpec::bergman_disc(0.0, 4, 1).unwrap();
        let bad = PointMass { location: DomainPoint::from(1.5), weight: C64::new(1.0, 0.0), matrix: DMatrix::identity(1, 1) };
        assert!(toeplitz_measure_matrix(&s, &[bad]).is_err());
        let wrong = PointMass { location: s.origin(), weight: C64::new(1.0, 0.0), matrix: DMatrix::identity(2, 2) };
        assert!(toeplitz_measure_matrix(&s, &[wrong]).is_err());
    }
}
