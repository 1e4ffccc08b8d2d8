//! d-finite ℓ²-valued analytic functions as coefficient arrays in the
//! orthonormal basis `e_m ⊗ e_k`.

use crate::error::{LabError, Result};
use crate::io::ComplexArray;
use crate::quadrature::rule::{basis_values, QuadratureRule};
use crate::space::{DomainPoint, SpaceSpec, C64};

/// `c_m` with `‖c_m z^m‖ = 1`. For the bidisc `m` is the flattened index `m₁·N + m₂`.
pub fn basis_normalizer(space: &SpaceSpec, m: usize) -> Result<f64> {
    if m >= space.n_modes() {
        return Err(LabError::param(format!("mode {m} outside 0..{}", space.n_modes())));
    }
    let n = space.truncation_order;
    let f = space.factors();
    Ok(match f.as_slice() {
        [a] => a.normalizers(m + 1)[m],
        [a, b] => a.normalizers(n)[m / n] * b.normalizers(n)[m % n],
        _ => unreachable!(),
    })
}

/// Values `e_m(z)` for every mode of the space.
pub fn basis_at(space: &SpaceSpec, z: &DomainPoint) -> Result<Vec<C64>> {
    space.check_point(z)?;
    let mut out = vec![C64::new(0.0, 0.0); space.n_modes()];
    basis_values(z, &space.step_table(space.truncation_order), space.truncation_order, &mut out);
    Ok(out)
}

/// `f = Σ c_{m,k} e_m ⊗ e_k`, stored with flat index `m·d + k`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffFunction {
    space: SpaceSpec,
    coeffs: Vec<C64>,
}

impl CoeffFunction {
    pub fn zeros(space: &SpaceSpec) -> Self {
        CoeffFunction { space: space.clone(), coeffs: vec![C64::new(0.0, 0.0); space.dim()] }
    }

    pub fn new(space: &SpaceSpec, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != space.dim() {
            return Err(LabError::mismatch(format!("{} coefficients for dimension {}", coeffs.len(), space.dim())));
        }
        Ok(CoeffFunction { space: space.clone(), coeffs })
    }

    /// `e_m ⊗ e_k`.
    pub fn basis(space: &SpaceSpec, m: usize, k: usize) -> Result<Self> {
        if m >= space.n_modes() || k >= space.component_dim {
            return Err(LabError::param(format!("basis index ({m}, {k}) out of range")));
        }
        let mut f = Self::zeros(space);
        f.coeffs[m * space.component_dim + k] = C64::new(1.0, 0.0);
        Ok(f)
    }

    pub fn space(&self) -> &SpaceSpec {
        &self.space
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    pub fn get(&self, m: usize, k: usize) -> C64 {
        self.coeffs[m * self.space.component_dim + k]
    }

    pub fn set(&mut self, m: usize, k: usize, v: C64) {
        let d = self.space.component_dim;
        self.coeffs[m * d + k] = v;
    }

    /// `⟨f(z), e_k⟩` for every component.
    pub fn eval(&self, z: &DomainPoint) -> Result<Vec<C64>> {
        let b = basis_at(&self.space, z)?;
        let d = self.space.component_dim;
        let mut out = vec![C64::new(0.0, 0.0); d];
        for (row, e) in self.coeffs.chunks(d).zip(&b) {
            for (o, c) in out.iter_mut().zip(row) {
                *o += c * e;
            }
        }
        Ok(out)
    }

    pub fn inner(&self, other: &CoeffFunction) -> Result<C64> {
        self.space.ensure_compatible(&other.space)?;
        Ok(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b.conj()).sum())
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: C64) -> Self {
        CoeffFunction { space: self.space.clone(), coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    pub fn add(&self, other: &CoeffFunction) -> Result<Self> {
        self.space.ensure_compatible(&other.space)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(CoeffFunction { space: self.space.clone(), coeffs })
    }

    /// Samples at every node of `rule`, node-major (`node·d + k`).
    pub fn eval_on_rule(&self, rule: &QuadratureRule) -> Result<Vec<C64>> {
        self.space.ensure_compatible(rule.space())?;
        let d = self.space.component_dim;
        let n = self.space.truncation_order;
        let table = self.space.step_table(n);
        let mut out = vec![C64::new(0.0, 0.0); rule.len() * d];
        for k in 0..d {
            let comp: Vec<C64> = (0..self.space.n_modes()).map(|m| self.get(m, k)).collect();
            let s = rule.synthesize_scalar(&comp, &table, n);
            for (i, v) in s.into_iter().enumerate() {
                out[i * d + k] = v;
            }
        }
        Ok(out)
    }

    /// Largest polynomial degree (per variable) carrying a nonzero coefficient.
    pub fn degree(&self) -> Option<usize> {
        let d = self.space.component_dim;
        let n = self.space.truncation_order;
        let vars = self.space.n_vars();
        self.coeffs
            .chunks(d)
            .enumerate()
            .filter(|(_, row)| row.iter().any(|c| *c != C64::new(0.0, 0.0)))
            .map(|(m, _)| if vars == 1 { m } else { (m / n).max(m % n) })
            .max()
    }

    pub fn to_json(&self) -> ComplexArray {
        ComplexArray::from_row_major(&self.space, [self.space.n_modes(), self.space.component_dim], &self.coeffs)
    }

    pub fn from_json(a: &ComplexArray) -> Result<Self> {
        a.space.validate()?;
        if a.shape != [a.space.n_modes(), a.space.component_dim] {
            return Err(LabError::mismatch(format!("coefficient shape {:?} does not match the space", a.shape)));
        }
        Self::new(&a.space, a.values()?)
    }
}

/// Truncated `K_z ⊗ e_k`: coefficients `conj(e_m(z))` in component `k`.
///
/// `z` must lie in the admissible region of the space.
pub fn kernel_as_coeffs(space: &SpaceSpec, z: &DomainPoint, k: usize) -> Result<CoeffFunction> {
    space.check_admissible(z)?;
    if k >= space.component_dim {
        return Err(LabError::param(format!("component {k} out of range")));
    }
    let b = basis_at(space, z)?;
    let mut f = CoeffFunction::zeros(space);
    for (m, e) in b.iter().enumerate() {
        f.set(m, k, e.conj());
    }
    Ok(f)
}

/// Truncated kernel rescaled to unit norm (the Berezin convention).
pub fn unit_kernel_coeffs(space: &SpaceSpec, z: &DomainPoint, k: usize) -> Result<CoeffFunction> {
    let f = kernel_as_coeffs(space, z, k)?;
    let n = f.norm();
    Ok(f.scale(C64::new(1.0 / n, 0.0)))
}

/// Componentwise projection of grid samples (`node·d + k`) onto the truncated space.
pub fn project_grid_function(rule: &QuadratureRule, samples: &[C64]) -> Result<CoeffFunction> {
    let space = rule.space();
    let d = space.component_dim;
    if samples.len() != rule.len() * d {
        return Err(LabError::mismatch(format!(
            "{} samples for {} nodes × {d} components",
            samples.len(),
            rule.len()
        )));
    }
    let n = space.truncation_order;
    let table = space.step_table(n);
    let mut f = CoeffFunction::zeros(space);
    for k in 0..d {
        let comp: Vec<C64> = samples.iter().skip(k).step_by(d).copied().collect();
        for (m, c) in rule.project_scalar(&comp, &table, n).into_iter().enumerate() {
            f.set(m, k, c);
        }
    }
    Ok(f)
}
