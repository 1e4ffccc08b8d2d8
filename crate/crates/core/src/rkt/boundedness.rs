use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeff::basis_at;
use crate::error::{LabError, Result};
use crate::io::{point_to_json, Cx};
use crate::operator::OperatorMatrix;
use crate::quadrature::gauss::MAX_LAGUERRE_ORDER;
use crate::quadrature::rule::basis_values;
use crate::quadrature::QuadratureRule;
use crate::space::{DomainPoint, Factor, SpaceSpec, C64};
use crate::symbol::MatrixSymbol;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RktValue {
    pub z: Vec<Cx>,
    pub index: usize,
    pub value: f64,
}

/// One boundedness functional evaluated over a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RktReport {
    pub quantity: String,
    pub p: f64,
    pub kappa: f64,
    /// `(4 − κ)/(2 − κ)`.
    pub exponent_threshold: f64,
    /// `p` exceeds the threshold, so a finite sup is sufficient for boundedness.
    pub admissible: bool,
    pub values: Vec<RktValue>,
    pub sup: f64,
}

/// A functional and its mirror (operator/adjoint, or `F`/`G` swapped).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RktPair {
    pub first: RktReport,
    pub second: RktReport,
}

impl RktPair {
    pub fn sup(&self) -> f64 {
        self.first.sup.max(self.second.sup)
    }
}

/// Rule used for the `L^p(σ)` integrals of translated functions.
pub fn rkt_rule(space: &SpaceSpec, scale: f64) -> Result<QuadratureRule> {
    let n = space.truncation_order;
    let scale = if scale.is_finite() && scale > 0.0 { scale } else { 1.0 };
    let (radial, angular) = match (space.n_vars(), space.factors()[0]) {
        (1, Factor::Fock) => (n + 64, 512),
        (1, _) => (n + 48, 512),
        _ => (n / 2 + 8, 32),
    };
    let mut radial = ((radial as f64) * scale).ceil() as usize;
    if let Factor::Fock = space.factors()[0] {
        radial = radial.min(MAX_LAGUERRE_ORDER);
    }
    let angular = ((angular as f64) * scale).ceil() as usize;
    QuadratureRule::new(space, radial, angular, &[])
}

fn check_exponent(p: f64) -> Result<()> {
    if !p.is_finite() || p <= 1.0 {
        return Err(LabError::param(format!("exponent p = {p} must exceed 1")));
    }
    Ok(())
}

fn check_grid(space: &SpaceSpec, z_grid: &[DomainPoint]) -> Result<()> {
    if z_grid.is_empty() {
        return Err(LabError::param("empty z grid"));
    }
    z_grid.iter().try_for_each(|z| space.check_admissible(z))
}

fn report(space: &SpaceSpec, quantity: &str, p: f64, values: Vec<RktValue>) -> RktReport {
    let threshold = space.rkt_exponent_threshold();
    let sup = values.iter().map(|v| v.value).fold(0.0, f64::max);
    RktReport {
        quantity: quantity.to_string(),
        p,
        kappa: space.kappa(),
        exponent_threshold: threshold,
        admissible: p > threshold,
        values,
        sup,
    }
}

/// `φ_z(u)` and `|k_z(u)|` at every node.
fn translated_nodes(rule: &QuadratureRule, z: &DomainPoint) -> (Vec<DomainPoint>, Vec<f64>) {
    let factors = rule.space().factors();
    rule.nodes()
        .iter()
        .map(|u| {
            let img = z.map2(u, |i, a, b| factors[i].involution(a, b));
            let k: f64 = factors.iter().zip(z.coords().iter().zip(u.coords())).map(|(f, (a, b))| f.normalized_kernel(*a, *b).norm()).product();
            (img, k)
        })
        .unzip()
}

/// `{∫ (Σ_k |h_k|)^p dσ}^{1/p}` for node-major rows `h`.
fn lp_of_sum(rule: &QuadratureRule, rows: impl Iterator<Item = f64>, p: f64) -> f64 {
    let s: f64 = rows.zip(rule.sigma_weights()).map(|(v, w)| w * v.powf(p)).sum();
    s.max(0.0).powf(1.0 / p)
}

/// `{∫ (Σ_k |(U_z g)_k|)^p dσ}^{1/p}` for several functions `g` at once.
///
/// `U_z g = (g ∘ φ_z) · k_z` is evaluated pointwise, which is the exact
/// translation of the truncated function `g`.
fn translated_lp(rule: &QuadratureRule, z: &DomainPoint, coeffs: &DMatrix<C64>, d: usize, p: f64) -> Vec<f64> {
    let space = rule.space();
    let n = space.truncation_order;
    let steps = space.step_table(n);
    let modes = space.n_modes();
    let (images, kz) = translated_nodes(rule, z);
    let mut basis = DMatrix::zeros(rule.len(), modes);
    let mut row = vec![C64::new(0.0, 0.0); modes];
    for (r, img) in images.iter().enumerate() {
        basis_values(img, &steps, n, &mut row);
        for (m, v) in row.iter().enumerate() {
            basis[(r, m)] = *v;
        }
    }
    // columns of `coeffs` are (function, component) pairs
    let vals = basis * coeffs;
    let funcs = coeffs.ncols() / d;
    (0..funcs)
        .map(|f| {
            let rows = (0..rule.len()).map(|r| kz[r] * (0..d).map(|k| vals[(r, f * d + k)].norm()).sum::<f64>());
            lp_of_sum(rule, rows, p)
        })
        .collect()
}

/// Coefficients of `T (k̂_z ⊗ e_i)` for every `i`, laid out as `modes × (i·d + k)`.
fn applied_kernels(t: &OperatorMatrix, z: &DomainPoint) -> Result<DMatrix<C64>> {
    let space = t.space();
    let d = space.component_dim;
    let modes = space.n_modes();
    let mut u: Vec<C64> = basis_at(space, z)?.into_iter().map(|e| e.conj()).collect();
    let norm = u.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    u.iter_mut().for_each(|c| *c /= norm);
    let mut kern = DMatrix::zeros(space.dim(), d);
    for (m, c) in u.iter().enumerate() {
        for i in 0..d {
            kern[(m * d + i, i)] = *c;
        }
    }
    let applied = t.matrix() * kern;
    Ok(DMatrix::from_fn(modes, d * d, |m, col| applied[(m * d + col % d, col / d)]))
}

fn operator_quantity(rule: &QuadratureRule, t: &OperatorMatrix, z_grid: &[DomainPoint], p: f64) -> Result<Vec<RktValue>> {
    let d = t.space().component_dim;
    let per_z: Vec<Vec<RktValue>> = z_grid
        .par_iter()
        .map(|z| {
            let c = applied_kernels(t, z)?;
            Ok(translated_lp(rule, z, &c, d, p)
                .into_iter()
                .enumerate()
                .map(|(i, value)| RktValue { z: point_to_json(z), index: i, value })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(per_z.into_iter().flatten().collect())
}

/// The two kernel-translation functionals: `U_z T*(k_z e_i)` and `U_z T(k_z e_i)`
/// in `L^p(σ)` with the inner `ℓ¹` sum over components.
pub fn rkt_boundedness_check(t: &OperatorMatrix, t_adjoint: &OperatorMatrix, p: f64, z_grid: &[DomainPoint], scale: f64) -> Result<RktPair> {
    check_exponent(p)?;
    let space = t.space();
    space.ensure_compatible(t_adjoint.space())?;
    check_grid(space, z_grid)?;
    let defect = (t_adjoint.matrix() - t.matrix().adjoint()).norm();
    if defect > 1e-8 * (1.0 + t.matrix().norm()) {
        return Err(LabError::mismatch(format!("supplied adjoint differs from the conjugate transpose by {defect:e}")));
    }
    let rule = rkt_rule(space, scale)?;
    Ok(RktPair {
        first: report(space, "adjoint_translates", p, operator_quantity(&rule, t_adjoint, z_grid, p)?),
        second: report(space, "operator_translates", p, operator_quantity(&rule, t, z_grid, p)?),
    })
}

/// Symbol samples at `φ_z(node)` for every node.
fn symbol_at_images(rule: &QuadratureRule, f: &MatrixSymbol, z: &DomainPoint) -> Vec<DMatrix<C64>> {
    let factors = rule.space().factors();
    translated_nodes(rule, z).0.iter().map(|w| f.eval(&factors, w)).collect()
}

fn scalar_lp(rule: &QuadratureRule, samples: impl Iterator<Item = C64>, p: f64) -> f64 {
    lp_of_sum(rule, samples.map(|c| c.norm()), p)
}

/// `Σ_k ‖⟨(F* ∘ φ_z) e_i, e_k⟩‖_{L^p}` per `(z, i)` and the transposed sum.
pub fn rkt_toeplitz_symbol_check(space: &SpaceSpec, f: &MatrixSymbol, p: f64, z_grid: &[DomainPoint], scale: f64) -> Result<RktPair> {
    check_exponent(p)?;
    f.check_space(space)?;
    check_grid(space, z_grid)?;
    let rule = rkt_rule(space, scale)?;
    let d = space.component_dim;
    let rows: Vec<(Vec<RktValue>, Vec<RktValue>)> = z_grid
        .par_iter()
        .map(|z| {
            let samples = symbol_at_images(&rule, f, z);
            let norms = DMatrix::from_fn(d, d, |i, k| scalar_lp(&rule, samples.iter().map(|m| m[(i, k)]), p));
            let zj = point_to_json(z);
            // ⟨F* e_i, e_k⟩ = conj(F_ik): row sums; the mirrored quantity uses column sums
            let a = (0..d).map(|i| RktValue { z: zj.clone(), index: i, value: norms.row(i).sum() }).collect();
            let b = (0..d).map(|i| RktValue { z: zj.clone(), index: i, value: norms.column(i).sum() }).collect();
            (a, b)
        })
        .collect();
    let (a, b): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    Ok(RktPair {
        first: report(space, "adjoint_symbol", p, a.into_iter().flatten().collect()),
        second: report(space, "symbol", p, b.into_iter().flatten().collect()),
    })
}

/// `Σ_i ‖⟨G*(z) e_k, (F* ∘ φ_z) e_i⟩‖_{L^p}` per `(z, k)`.
fn product_quantity(rule: &QuadratureRule, f: &MatrixSymbol, g: &MatrixSymbol, z_grid: &[DomainPoint], p: f64) -> Vec<RktValue> {
    let space = rule.space();
    let d = space.component_dim;
    let factors = space.factors();
    let per_z: Vec<Vec<RktValue>> = z_grid
        .par_iter()
        .map(|z| {
            let gz = g.eval(&factors, z);
            let samples = symbol_at_images(rule, f, z);
            (0..d)
                .map(|k| {
                    // ⟨G*(z) e_k, F*(w) e_i⟩ = Σ_j conj(G_kj(z)) F_ij(w)
                    let value = (0..d)
                        .map(|i| scalar_lp(rule, samples.iter().map(|m| (0..d).map(|j| gz[(k, j)].conj() * m[(i, j)]).sum()), p))
                        .sum();
                    RktValue { z: point_to_json(z), index: k, value }
                })
                .collect()
        })
        .collect();
    per_z.into_iter().flatten().collect()
}

/// Functionals for `T_F T_{G*}` with analytic polynomial `F`, `G`.
pub fn rkt_product_check(space: &SpaceSpec, f: &MatrixSymbol, g: &MatrixSymbol, p: f64, z_grid: &[DomainPoint], scale: f64) -> Result<RktPair> {
    check_exponent(p)?;
    f.check_space(space)?;
    g.check_space(space)?;
    if !f.is_analytic() || !g.is_analytic() {
        return Err(LabError::param("product check needs analytic polynomial symbols"));
    }
    check_grid(space, z_grid)?;
    let rule = rkt_rule(space, scale)?;
    Ok(RktPair {
        first: report(space, "product", p, product_quantity(&rule, f, g, z_grid, p)),
        second: report(space, "product_mirrored", p, product_quantity(&rule, g, f, z_grid, p)),
    })
}

/// `{∫ (Σ_k |⟨(F(z) − F(φ_z(u))) e_k, e_i⟩|)^p dσ(u)}^{1/p}` per `(z, i)`.
pub fn hankel_rkt_check(space: &SpaceSpec, f: &MatrixSymbol, p: f64, z_grid: &[DomainPoint], scale: f64) -> Result<RktReport> {
    check_exponent(p)?;
    f.check_space(space)?;
    check_grid(space, z_grid)?;
    let rule = rkt_rule(space, scale)?;
    let d = space.component_dim;
    let factors = space.factors();
    let per_z: Vec<Vec<RktValue>> = z_grid
        .par_iter()
        .map(|z| {
            let fz = f.eval(&factors, z);
            let samples = symbol_at_images(&rule, f, z);
            (0..d)
                .map(|i| {
                    let rows = samples.iter().map(|m| (0..d).map(|k| (fz[(i, k)] - m[(i, k)]).norm()).sum::<f64>());
                    RktValue { z: point_to_json(z), index: i, value: lp_of_sum(&rule, rows, p) }
                })
                .collect()
        })
        .collect();
    Ok(report(space, "hankel_oscillation", p, per_z.into_iter().flatten().collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::toeplitz_matrix;
    use crate::symbol::{parse_scalar, Ball, ScalarSymbol};
    use approx::assert_abs_diff_eq;

    fn disc(n: usize, d: usize) -> SpaceSpec {
        SpaceSpec::bergman_disc(0.0, n, d).unwrap()
    }

    #[test]
    fn zero_and_identity_operators() {
        let s = disc(16, 2);
        let grid = [s.origin(), DomainPoint::from(0.5)];
        let zero = OperatorMatrix::zeros(&s);
        assert_eq!(rkt_boundedness_check(&zero, &zero, 4.0, &grid, 1.0).unwrap().sup(), 0.0);
        let id = OperatorMatrix::identity(&s);
        let r = rkt_boundedness_check(&id, &id, 4.0, &grid, 1.0).unwrap();
        assert_abs_diff_eq!(r.first.values[0].value, 1.0, epsilon = 1e-12);
        assert!(r.first.admissible);
        assert!(rkt_boundedness_check(&id, &id, 1.0, &grid, 1.0).is_err());
        let off = OperatorMatrix::new(&s, DMatrix::from_fn(s.dim(), s.dim(), |r, c| C64::new(0.0, (r + 2 * c) as f64))).unwrap();
        assert!(rkt_boundedness_check(&off, &off, 4.0, &grid, 1.0).is_err());
    }

    #[test]
    fn symbol_moment_oracle() {
        // ‖u‖_{L⁴(σ)} = (∫|u|⁴ dσ)^{1/4} = (1/3)^{1/4}
        let s = disc(16, 2);
        let f = MatrixSymbol::unit(&s, 0, 0, parse_scalar("z", 1).unwrap()).unwrap();
        let r = rkt_toeplitz_symbol_check(&s, &f, 4.0, &[s.origin()], 1.0).unwrap();
        assert_abs_diff_eq!(r.first.values[0].value, (1.0f64 / 3.0).powf(0.25), epsilon = 1e-12);
        assert_eq!(r.first.values[1].value, 0.0);
        let c = MatrixSymbol::scalar_identity(&s, ScalarSymbol::constant(C64::new(0.0, 2.0)));
        let r = rkt_toeplitz_symbol_check(&s, &c, 4.0, &[DomainPoint::from(0.6)], 1.0).unwrap();
        assert!(r.first.values.iter().all(|v| (v.value - 2.0).abs() < 1e-12));
    }

    #[test]
    fn product_and_hankel_examples() {
        let s = disc(16, 2);
        let id = MatrixSymbol::identity(&s);
        let grid = [s.origin(), DomainPoint::from(0.6)];
        let r = rkt_product_check(&s, &id, &id, 4.0, &grid, 1.0).unwrap();
        assert!(r.first.values.iter().all(|v| (v.value - 1.0).abs() < 1e-12));
        let w = MatrixSymbol::unit(&s, 0, 0, parse_scalar("z", 1).unwrap()).unwrap();
        let r = rkt_product_check(&s, &w, &w, 4.0, &[s.origin()], 1.0).unwrap();
        assert_eq!(r.sup(), 0.0);
        let bar = MatrixSymbol::scalar_identity(&s, parse_scalar("zb", 1).unwrap());
        assert!(rkt_product_check(&s, &bar, &id, 4.0, &grid, 1.0).is_err());
        let h = hankel_rkt_check(&s, &bar, 4.0, &[s.origin()], 1.0).unwrap();
        assert_abs_diff_eq!(h.values[0].value, (1.0f64 / 3.0).powf(0.25), epsilon = 1e-12);
        let c = MatrixSymbol::scalar_identity(&s, ScalarSymbol::constant(C64::new(3.0, 0.0)));
        assert_eq!(hankel_rkt_check(&s, &c, 4.0, &grid, 1.0).unwrap().sup, 0.0);
    }

    #[test]
    fn operator_functional_bounded_by_symbol_functional() {
        let s = disc(24, 2);
        let ball = Ball { center: s.origin(), radius: 0.5, metric: false };
        let f = MatrixSymbol::unit(&s, 1, 1, ScalarSymbol::indicator(ball)).unwrap();
        let t = toeplitz_matrix(&s, &f).unwrap();
        let grid = [s.origin(), DomainPoint::from(C64::new(0.3, 0.4))];
        let op = rkt_boundedness_check(&t, &t.adjoint(), 4.0, &grid, 1.0).unwrap();
        let sym = rkt_toeplitz_symbol_check(&s, &f, 4.0, &grid, 1.0).unwrap();
        assert!(op.sup() > 0.0 && op.sup() <= 4.0 * sym.sup());
    }
}
