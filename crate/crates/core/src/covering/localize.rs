use nalgebra::DMatrix;
use rayon::prelude::*;

use super::Covering;
use crate::error::Result;
use crate::linalg;
use crate::operator::translation::with_components;
use crate::operator::OperatorMatrix;
use crate::space::C64;

/// Compression `P M_{1_E} P` of a node-level indicator, on the vector-valued space.
fn mask_toeplitz(cov: &Covering, nodes: &[usize], steps: &[Vec<f64>], n: usize, d: usize) -> DMatrix<C64> {
    let rule = cov.rule();
    let mut samples = vec![C64::new(0.0, 0.0); rule.len()];
    for i in nodes {
        samples[*i] = C64::new(1.0, 0.0);
    }
    with_components(&rule.toeplitz_scalar(&samples, steps, n), d)
}

/// `‖T − Σ_j M_{1_{F_j}} T P M_{1_{G_j}}‖` as a map from the truncated space
/// into `L²(σ)` sampled on the covering's rule.
///
/// The cells partition the nodes, so the difference is
/// `Σ_j M_{1_{F_j}} T (I − T_{1_{G_j}})` and its Gram matrix is
/// `Σ_j R_j* T_{1_{F_j}} R_j` with `R_j = T (I − T_{1_{G_j}})`.
pub fn localization_error(t: &OperatorMatrix, cov: &Covering) -> Result<f64> {
    let space = cov.space();
    space.ensure_compatible(t.space())?;
    let n = space.truncation_order;
    let d = space.component_dim;
    let steps = space.step_table(n);
    let id = DMatrix::<C64>::identity(space.dim(), space.dim());
    let zero = DMatrix::<C64>::zeros(space.dim(), space.dim());
    // fixed chunks summed in order, so the result does not depend on scheduling
    let parts: Vec<DMatrix<C64>> = cov
        .cells
        .par_chunks(16)
        .map(|chunk| {
            chunk.iter().fold(zero.clone(), |acc, cell| {
                let g = mask_toeplitz(cov, &cell.enlarged, &steps, n, d);
                let f = mask_toeplitz(cov, &cell.nodes, &steps, n, d);
                let r = t.matrix() * (&id - g);
                acc + r.adjoint() * f * r
            })
        })
        .collect();
    let gram = parts.into_iter().fold(zero, |a, b| a + b);
    Ok(linalg::gram_norm(&gram))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covering::{build_covering_on, covering_rule};
    use crate::operator::toeplitz_matrix;
    use crate::space::SpaceSpec;
    use crate::symbol::{parse_scalar, MatrixSymbol};

    #[test]
    fn degenerate_and_zero() {
        let s = SpaceSpec::bergman_disc(0.0, 12, 2).unwrap();
        let rule = covering_rule(&s, 1.0).unwrap();
        let single = Covering::single_cell(&rule);
        let u = MatrixSymbol::scalar_identity(&s, parse_scalar("1 + z*zb", 1).unwrap());
        let t = toeplitz_matrix(&s, &u).unwrap();
        assert!(localization_error(&t, &single).unwrap() < 1e-9);
        let cov = build_covering_on(&rule, 0.5).unwrap();
        assert_eq!(localization_error(&OperatorMatrix::zeros(&s), &cov).unwrap(), 0.0);
    }

    #[test]
    fn error_shrinks_with_scale() {
        let s = SpaceSpec::bergman_disc(0.0, 16, 1).unwrap();
        let rule = covering_rule(&s, 1.0).unwrap();
        let u = MatrixSymbol::scalar_identity(&s, parse_scalar("2 + z + zb", 1).unwrap());
        let t = toeplitz_matrix(&s, &u).unwrap();
        let e: Vec<f64> = [0.5, 1.0, 2.0, 4.0].iter().map(|r| localization_error(&t, &build_covering_on(&rule, *r).unwrap()).unwrap()).collect();
        assert!(e.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{e:?}");
        assert!(e[0] > e[3]);
    }
}
