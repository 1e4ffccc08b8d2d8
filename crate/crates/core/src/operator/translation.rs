//! Translation operators `U_z f = (f ∘ φ_z) · k_z` and conjugation `T^z = U_z T U_z*`.
//!
//! `U_z` does not preserve the span of the first `N` modes, so identities such
//! as `U_z² = I` only hold on the truncated space when the intermediate sums
//! run over a larger *working order* `M`. Blocks are therefore assembled as
//! `M × M` scalar matrices, per factor, and sliced as needed.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{OperatorMatrix, OperatorSpec};
use crate::error::{LabError, Result};
use crate::quadrature::gauss::MAX_LAGUERRE_ORDER;
use crate::quadrature::QuadratureRule;
use crate::space::{DomainPoint, Factor, SpaceSpec, C64};

/// Number of modes carrying all but a negligible part of `U_z e_m`, `m < n`.
pub fn bandwidth(factor: Factor, r: f64, n: usize) -> usize {
    let n_f = n as f64;
    let b = match factor {
        Factor::Disc { .. } => {
            if r < 1e-12 {
                n_f
            } else {
                (n_f - 1.0).max(0.0) * (1.0 + r) / (1.0 - r) + 60.0 / (1.0 / r).ln()
            }
        }
        Factor::Fock => {
            let s = n_f.sqrt() + r;
            s * s + 10.0 * s + 40.0
        }
    };
    (b.ceil() as usize).max(n)
}

/// Working order for translation identities at `z`.
pub fn working_order(space: &SpaceSpec, z: &DomainPoint) -> Result<usize> {
    space.check_admissible(z)?;
    Ok(space
        .factors()
        .iter()
        .zip(z.coords())
        .map(|(f, c)| bandwidth(*f, c.norm(), space.truncation_order))
        .max()
        .unwrap_or(space.truncation_order))
}

/// `A[m', m] = ⟨U_z e_m, e_{m'}⟩` for `m' < n_out`, `m < n_in`, in one factor.
pub fn translation_block(factor: Factor, z: C64, n_out: usize, n_in: usize, scale: f64) -> Result<DMatrix<C64>> {
    let r = z.norm();
    let scale = if scale.is_finite() && scale >= 1.0 { scale } else { 1.0 };
    let radial = ((n_out.div_ceil(2) + 8) as f64 * scale).ceil() as usize;
    let angular = ((bandwidth(factor, r, n_in) + n_out + 16) as f64 * scale).ceil() as usize;
    let angular = angular.next_power_of_two();
    let spec = match factor {
        Factor::Disc { alpha } => SpaceSpec::bergman_disc(alpha, n_out.max(1), 1)?,
        Factor::Fock => {
            if radial > MAX_LAGUERRE_ORDER {
                return Err(LabError::Truncation(format!(
                    "translation at |z| = {r} needs {n_out} modes, beyond the Fock quadrature range"
                )));
            }
            SpaceSpec::fock(n_out.max(1), 1)?
        }
    };
    let rule = QuadratureRule::new(&spec, radial, angular, &[]).map_err(|e| match e {
        LabError::InvalidParameter(m) => LabError::Truncation(format!("translation at |z| = {r}: {m}")),
        other => other,
    })?;
    let steps_out = vec![factor.steps(n_out)];
    let steps_in = factor.steps(n_in);
    let nodes: Vec<C64> = rule.nodes().iter().map(|w| w.coords()[0]).collect();
    let phi: Vec<C64> = nodes.iter().map(|w| factor.involution(z, *w)).collect();
    let mut cur: Vec<C64> = nodes.iter().map(|w| factor.normalized_kernel(z, *w)).collect();
    let mut block = DMatrix::zeros(n_out, n_in);
    for m in 0..n_in {
        let col = rule.project_scalar(&cur, &steps_out, n_out);
        block.column_mut(m).iter_mut().zip(col).for_each(|(b, c)| *b = c);
        if m + 1 < n_in {
            let step = steps_in[m];
            cur.par_iter_mut().zip(&phi).for_each(|(v, p)| *v *= p * step);
        }
    }
    Ok(block)
}

/// `U_z` assembled to a working order, per factor.
#[derive(Clone, Debug)]
pub struct Translation {
    space: SpaceSpec,
    point: DomainPoint,
    order: usize,
    blocks: Vec<DMatrix<C64>>,
}

impl Translation {
    /// Blocks of size `N × N` only.
    pub fn new(space: &SpaceSpec, z: &DomainPoint) -> Result<Self> {
        Self::with_order(space, z, space.truncation_order, 1.0)
    }

    /// Blocks at the working order of `z`.
    pub fn working(space: &SpaceSpec, z: &DomainPoint, scale: f64) -> Result<Self> {
        let m = working_order(space, z)?;
        Self::with_order(space, z, m, scale)
    }

    pub fn with_order(space: &SpaceSpec, z: &DomainPoint, order: usize, scale: f64) -> Result<Self> {
        space.check_admissible(z)?;
        let order = order.max(space.truncation_order);
        if space.n_vars() == 2 && order * order * space.component_dim > 1 << 13 {
            return Err(LabError::Truncation(format!("bidisc working order {order} is too large")));
        }
        let blocks = space
            .factors()
            .iter()
            .zip(z.coords())
            .map(|(f, c)| translation_block(*f, *c, order, order, scale))
            .collect::<Result<Vec<_>>>()?;
        Ok(Translation { space: space.clone(), point: *z, order, blocks })
    }

    pub fn space(&self) -> &SpaceSpec {
        &self.space
    }

    pub fn point(&self) -> &DomainPoint {
        &self.point
    }

    /// Working order `M` of the stored blocks.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn factor_blocks(&self) -> &[DMatrix<C64>] {
        &self.blocks
    }

    /// Kronecker product of per-factor `rows × cols` slices (flattened bidisc indexing).
    fn scalar_slice(&self, rows: usize, cols: usize) -> DMatrix<C64> {
        let parts: Vec<DMatrix<C64>> = self.blocks.iter().map(|b| b.view((0, 0), (rows, cols)).into_owned()).collect();
        kron_all(&parts)
    }

    /// Scalar `N × N` matrix of `P_N U_z P_N`.
    pub fn scalar_matrix(&self) -> DMatrix<C64> {
        let n = self.space.truncation_order;
        self.scalar_slice(n, n)
    }

    /// `P_N U_z P_N` on the vector-valued truncated space.
    pub fn matrix(&self) -> OperatorMatrix {
        OperatorMatrix::from_parts(&self.space, with_components(&self.scalar_matrix(), self.space.component_dim))
    }

    /// `‖(U_z P_N)* (U_z P_N) − I_N‖` with the inner sum over the working order.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.space.truncation_order;
        let grams: Vec<DMatrix<C64>> = self
            .blocks
            .iter()
            .map(|b| {
                let a = b.view((0, 0), (self.order, n));
                a.adjoint() * a
            })
            .collect();
        identity_defect(&kron_all(&grams))
    }

    /// `‖P_N U_z U_z P_N − I_N‖` with the inner sum over the working order.
    pub fn involution_residual(&self) -> f64 {
        let n = self.space.truncation_order;
        let squares: Vec<DMatrix<C64>> = self
            .blocks
            .iter()
            .map(|b| b.view((0, 0), (n, self.order)) * b.view((0, 0), (self.order, n)))
            .collect();
        identity_defect(&kron_all(&squares))
    }

    /// `P_N U_z T U_z* P_N` for `T` given at any truncation `K ≤ M`.
    pub fn conjugate(&self, t: &OperatorMatrix) -> Result<OperatorMatrix> {
        let ts = t.space();
        if ts.kind != self.space.kind || ts.component_dim != self.space.component_dim {
            return Err(LabError::mismatch("operator and translation live on different spaces"));
        }
        let k = ts.truncation_order;
        if k > self.order {
            return Err(LabError::mismatch(format!("operator order {k} exceeds the working order {}", self.order)));
        }
        let n = self.space.truncation_order;
        let a = with_components(&self.scalar_slice(n, k), self.space.component_dim);
        Ok(OperatorMatrix::from_parts(&self.space, &a * t.matrix() * a.adjoint()))
    }

    /// `T^z` with `T` assembled at the working order, compressed to `N`.
    pub fn conjugate_spec(&self, spec: &OperatorSpec, scale: f64) -> Result<OperatorMatrix> {
        let t = spec.assemble(&self.space.with_order(self.order), scale)?;
        self.conjugate(&t)
    }
}

/// `P_N U_z P_N T P_N U_z* P_N`: the conjugation of a matrix known only at order `N`.
pub fn conjugate_operator(t: &OperatorMatrix, z: &DomainPoint) -> Result<OperatorMatrix> {
    Translation::new(t.space(), z)?.conjugate(t)
}

/// `P_N U_z P_N` on the vector-valued truncated space.
pub fn translation_matrix(space: &SpaceSpec, z: &DomainPoint) -> Result<OperatorMatrix> {
    Ok(Translation::new(space, z)?.matrix())
}

fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

fn kron_all(parts: &[DMatrix<C64>]) -> DMatrix<C64> {
    let mut it = parts.iter();
    let first = it.next().expect("at least one factor").clone();
    it.fold(first, |acc, b| kron(&acc, b))
}

/// `S ⊗ I_d` in the `mode·d + component` ordering.
pub(crate) fn with_components(s: &DMatrix<C64>, d: usize) -> DMatrix<C64> {
    if d == 1 {
        return s.clone();
    }
    let mut out = DMatrix::zeros(s.nrows() * d, s.ncols() * d);
    for c in 0..s.ncols() {
        for r in 0..s.nrows() {
            let v = s[(r, c)];
            for k in 0..d {
                out[(r * d + k, c * d + k)] = v;
            }
        }
    }
    out
}

fn identity_defect(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    crate::linalg::spectral_norm(&(m - DMatrix::<C64>::identity(n, n)))
}
