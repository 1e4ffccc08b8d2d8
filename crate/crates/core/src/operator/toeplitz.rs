use nalgebra::DMatrix;
use rayon::prelude::*;

use super::OperatorMatrix;
use crate::error::Result;
use crate::quadrature::QuadratureRule;
use crate::space::{DomainPoint, Factor, SpaceSpec, C64};
use crate::symbol::MatrixSymbol;

/// Panel edges in `|z|²` at the radii of origin-centred balls.
fn symbol_breakpoints(space: &SpaceSpec, u: &MatrixSymbol) -> Vec<f64> {
    let factors = space.factors();
    let mut out = Vec::new();
    if !u.compose_chain().is_empty() {
        return out;
    }
    for (_, s) in u.entries() {
        for b in s.terms().iter().flat_map(|t| &t.balls) {
            if b.center.coords().iter().any(|c| c.norm() > 0.0) {
                continue;
            }
            let r = match (b.metric, factors[0], factors.len()) {
                (true, f, _) => f.radius_at_distance(b.radius),
                (false, _, 1) => b.radius,
                // a Euclidean ball in ℂ² is not a product of discs
                (false, _, _) => continue,
            };
            let t = r * r;
            if let Factor::Disc { .. } = factors[0] {
                if t >= 1.0 {
                    continue;
                }
            }
            out.push(t);
        }
    }
    out
}

/// Rule that integrates `u · e_m · conj(e_{m'})` for the symbol's polynomial
/// part exactly; indicators and compositions get extra resolution.
pub fn toeplitz_rule(space: &SpaceSpec, u: &MatrixSymbol, scale: f64) -> Result<QuadratureRule> {
    let n = space.truncation_order;
    let p = u.max_power() as usize;
    let composed = !u.compose_chain().is_empty();
    let rough = u.has_indicators();
    let mut radial = (n + p).div_ceil(2) + 8;
    let mut angular = n + p + 1;
    if composed {
        radial += 24;
        angular += 96;
    }
    if rough {
        radial += 40;
        angular *= 2;
    }
    let scale = if scale.is_finite() && scale > 0.0 { scale } else { 1.0 };
    // tensor rules on the bidisc square the node count, so the floors are lower there
    let (min_radial, min_angular) = if space.n_vars() == 1 { (40, 64) } else { (8, 16) };
    let radial = ((radial.max(min_radial) as f64) * scale).ceil() as usize;
    let angular = (((angular.next_power_of_two().max(min_angular)) as f64) * scale).ceil() as usize;
    let radial = match space.factors()[0] {
        Factor::Fock => radial.min(crate::quadrature::gauss::MAX_LAGUERRE_ORDER),
        _ => radial,
    };
    QuadratureRule::new(space, radial, angular, &symbol_breakpoints(space, u))
}

/// `T_u` with the automatically chosen rule.
pub fn toeplitz_matrix(space: &SpaceSpec, u: &MatrixSymbol) -> Result<OperatorMatrix> {
    toeplitz_matrix_on(&toeplitz_rule(space, u, 1.0)?, u)
}

/// `T_u` by quadrature on `rule`: entry `((m', i), (m, k)) = ∫ u_{ik} e_m conj(e_{m'}) dσ`.
pub fn toeplitz_matrix_on(rule: &QuadratureRule, u: &MatrixSymbol) -> Result<OperatorMatrix> {
    let space = rule.space();
    u.check_space(space)?;
    let factors = space.factors();
    let n = space.truncation_order;
    let steps = space.step_table(n);
    let d = space.component_dim;
    let pulled: Vec<DomainPoint> = if u.compose_chain().is_empty() {
        rule.nodes().to_vec()
    } else {
        rule.nodes().par_iter().map(|w| u.pullback(&factors, w)).collect()
    };
    let entries: Vec<_> = u.entries().collect();
    let blocks: Vec<DMatrix<C64>> = entries
        .par_iter()
        .map(|(_, s)| {
            let samples: Vec<C64> = pulled.iter().map(|w| s.eval(&factors, w)).collect();
            rule.toeplitz_scalar(&samples, &steps, n)
        })
        .collect();
    let mut out = DMatrix::zeros(space.dim(), space.dim());
    for (((i, k), _), block) in entries.iter().zip(&blocks) {
        for m in 0..block.ncols() {
            for mp in 0..block.nrows() {
                out[(mp * d + i, m * d + k)] = block[(mp, m)];
            }
        }
    }
    OperatorMatrix::new(space, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::{parse_scalar, Ball, ScalarSymbol};
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_symbol() {
        for s in [SpaceSpec::bergman_disc(0.0, 16, 2).unwrap(), SpaceSpec::fock(12, 2).unwrap()] {
            let t = toeplitz_matrix(&s, &MatrixSymbol::identity(&s)).unwrap();
            assert!(t.sub(&OperatorMatrix::identity(&s)).unwrap().norm() < 1e-10);
        }
        let b = SpaceSpec::bidisc([0.0, 1.0], 4, 1).unwrap();
        let t = toeplitz_matrix(&b, &MatrixSymbol::identity(&b)).unwrap();
        assert!(t.sub(&OperatorMatrix::identity(&b)).unwrap().norm() < 1e-10);
    }

    #[test]
    fn shift_symbol_entries() {
        let s = SpaceSpec::bergman_disc(0.0, 12, 1).unwrap();
        let u = MatrixSymbol::scalar_identity(&s, parse_scalar("z", 1).unwrap());
        let t = toeplitz_matrix(&s, &u).unwrap();
        for mp in 0..12 {
            for m in 0..12 {
                let expect = if mp == m + 1 { ((m as f64 + 1.0) / (m as f64 + 2.0)).sqrt() } else { 0.0 };
                assert_abs_diff_eq!(t.matrix()[(mp, m)].norm(), expect, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn constant_unit_symbol_moves_components() {
        let s = SpaceSpec::bergman_disc(0.0, 5, 3).unwrap();
        let c = C64::new(0.5, -2.0);
        let u = MatrixSymbol::unit(&s, 1, 2, ScalarSymbol::constant(c)).unwrap();
        let t = toeplitz_matrix(&s, &u).unwrap();
        for m in 0..5 {
            let f = crate::coeff::CoeffFunction::basis(&s, m, 2).unwrap();
            let g = t.apply(&f).unwrap();
            let expect = crate::coeff::CoeffFunction::basis(&s, m, 1).unwrap().scale(c);
            let diff: f64 = g.coeffs().iter().zip(expect.coeffs()).map(|(a, b)| (a - b).norm()).sum();
            assert!(diff < 1e-12);
        }
    }

    #[test]
    fn centred_ball_is_diagonal() {
        // ⟨T e_m, e_m⟩ = σ-moment of 1_{|w|<1/2}|e_m|² = (1/4)^{m+1}
        let s = SpaceSpec::bergman_disc(0.0, 8, 1).unwrap();
        let b = Ball { center: s.origin(), radius: 0.5, metric: false };
        let t = toeplitz_matrix(&s, &MatrixSymbol::scalar_identity(&s, ScalarSymbol::indicator(b))).unwrap();
        for m in 0..8 {
            assert_abs_diff_eq!(t.matrix()[(m, m)].re, 0.25f64.powi(m as i32 + 1), epsilon = 1e-12);
        }
    }
}
