use crate::coeff::{project_grid_function, CoeffFunction};
use crate::error::{LabError, Result};
use crate::quadrature::QuadratureRule;
use crate::space::C64;
use crate::symbol::MatrixSymbol;

/// `H_F f = (I − P)(F f)` sampled at the nodes of a rule.
#[derive(Clone, Debug)]
pub struct HankelResult {
    /// Node-major samples (`node·d + k`).
    pub residual: Vec<C64>,
    /// `L²(σ)` norm of the residual under the rule.
    pub norm: f64,
}

/// Samples `F·f`, subtracts the evaluation of its projection, and measures the rest.
pub fn hankel_apply(rule: &QuadratureRule, symbol: &MatrixSymbol, f: &CoeffFunction) -> Result<HankelResult> {
    let space = rule.space();
    space.ensure_compatible(f.space())?;
    symbol.check_space(space)?;
    let d = space.component_dim;
    let factors = space.factors();
    let fv = f.eval_on_rule(rule)?;
    let mut ff = vec![C64::new(0.0, 0.0); fv.len()];
    for (idx, w) in rule.nodes().iter().enumerate() {
        let m = symbol.eval(&factors, w);
        for i in 0..d {
            ff[idx * d + i] = (0..d).map(|k| m[(i, k)] * fv[idx * d + k]).sum();
        }
    }
    let projected = project_grid_function(rule, &ff)?.eval_on_rule(rule)?;
    let residual: Vec<C64> = ff.iter().zip(&projected).map(|(a, b)| a - b).collect();
    let sq: f64 = residual
        .chunks(d)
        .zip(rule.sigma_weights())
        .map(|(r, w)| w * r.iter().map(|x| x.norm_sqr()).sum::<f64>())
        .sum();
    if !sq.is_finite() {
        return Err(LabError::param("Hankel residual is not finite"));
    }
    Ok(HankelResult { residual, norm: sq.sqrt() })
}
