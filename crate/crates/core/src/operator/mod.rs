//! Operators on the truncated space as dense `(N·d) × (N·d)` matrices.

mod hankel;
mod measure;
mod rank_one;
mod toeplitz;
pub mod translation;

use nalgebra::DMatrix;

pub use hankel::{hankel_apply, HankelResult};
pub use measure::{normalized_origin_delta, rule_measure, toeplitz_measure_matrix, PointMass};
pub use rank_one::{rank_one, rank_one_toeplitz_sum};
pub use toeplitz::{toeplitz_matrix, toeplitz_matrix_on, toeplitz_rule};
pub use translation::{conjugate_operator, translation_matrix, working_order, Translation};

use crate::coeff::CoeffFunction;
use crate::error::{LabError, Result};
use crate::io::ComplexArray;
use crate::linalg;
use crate::space::{SpaceSpec, C64};
use crate::symbol::MatrixSymbol;

/// Matrix of an operator in the basis `e_m ⊗ e_k`, row/column index `m·d + k`.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    space: SpaceSpec,
    matrix: DMatrix<C64>,
}

impl OperatorMatrix {
    pub fn new(space: &SpaceSpec, matrix: DMatrix<C64>) -> Result<Self> {
        let n = space.dim();
        if matrix.shape() != (n, n) {
            return Err(LabError::mismatch(format!("{:?} matrix for dimension {n}", matrix.shape())));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LabError::param("operator matrix has non-finite entries"));
        }
        Ok(OperatorMatrix { space: space.clone(), matrix })
    }

    pub(crate) fn from_parts(space: &SpaceSpec, matrix: DMatrix<C64>) -> Self {
        debug_assert_eq!(matrix.shape(), (space.dim(), space.dim()));
        OperatorMatrix { space: space.clone(), matrix }
    }

    pub fn identity(space: &SpaceSpec) -> Self {
        Self::from_parts(space, DMatrix::identity(space.dim(), space.dim()))
    }

    pub fn zeros(space: &SpaceSpec) -> Self {
        Self::from_parts(space, DMatrix::zeros(space.dim(), space.dim()))
    }

    pub fn space(&self) -> &SpaceSpec {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self::from_parts(&self.space, self.matrix.adjoint())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.space.ensure_compatible(&other.space)?;
        Ok(Self::from_parts(&self.space, &self.matrix * &other.matrix))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.space.ensure_compatible(&other.space)?;
        Ok(Self::from_parts(&self.space, &self.matrix + &other.matrix))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.space.ensure_compatible(&other.space)?;
        Ok(Self::from_parts(&self.space, &self.matrix - &other.matrix))
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::from_parts(&self.space, &self.matrix * c)
    }

    /// Spectral norm.
    pub fn norm(&self) -> f64 {
        linalg::spectral_norm(&self.matrix)
    }

    pub fn apply(&self, f: &CoeffFunction) -> Result<CoeffFunction> {
        self.space.ensure_compatible(f.space())?;
        let v = &self.matrix * nalgebra::DVector::from_column_slice(f.coeffs());
        CoeffFunction::new(&self.space, v.iter().copied().collect())
    }

    /// Re-expresses the operator at another truncation order: compression
    /// when shrinking, zero padding when growing.
    pub fn resize(&self, target: &SpaceSpec) -> Result<Self> {
        if target.kind != self.space.kind || target.component_dim != self.space.component_dim {
            return Err(LabError::mismatch("resize only changes the truncation order"));
        }
        let map = mode_map(&self.space, target);
        let d = self.space.component_dim;
        let mut out = DMatrix::zeros(target.dim(), target.dim());
        for (src_r, dst_r) in map.iter().enumerate() {
            let Some(dst_r) = dst_r else { continue };
            for (src_c, dst_c) in map.iter().enumerate() {
                let Some(dst_c) = dst_c else { continue };
                for i in 0..d {
                    for k in 0..d {
                        out[(dst_r * d + i, dst_c * d + k)] = self.matrix[(src_r * d + i, src_c * d + k)];
                    }
                }
            }
        }
        Ok(Self::from_parts(target, out))
    }

    pub fn to_json(&self) -> ComplexArray {
        ComplexArray::from_matrix(&self.space, &self.matrix)
    }

    pub fn from_json(a: &ComplexArray) -> Result<Self> {
        a.space.validate()?;
        Self::new(&a.space, a.to_matrix()?)
    }
}

/// For each mode of `from`, its index in `to` if it survives.
pub(crate) fn mode_map(from: &SpaceSpec, to: &SpaceSpec) -> Vec<Option<usize>> {
    let (a, b) = (from.truncation_order, to.truncation_order);
    (0..from.n_modes())
        .map(|m| match from.n_vars() {
            1 => (m < b).then_some(m),
            _ => {
                let (m1, m2) = (m / a, m % a);
                (m1 < b && m2 < b).then_some(m1 * b + m2)
            }
        })
        .collect()
}

/// `M_{I^{(d')}}` (first `d'` components) and `M_{I_{(d')}}` (the rest).
pub fn truncation_operators(space: &SpaceSpec, d_prime: usize) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let d = space.component_dim;
    if d_prime > d {
        return Err(LabError::param(format!("d' = {d_prime} exceeds d = {d}")));
    }
    let n = space.dim();
    let head = DMatrix::from_fn(n, n, |r, c| if r == c && r % d < d_prime { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
    let tail = DMatrix::identity(n, n) - &head;
    Ok((OperatorMatrix::from_parts(space, head), OperatorMatrix::from_parts(space, tail)))
}

/// An operator described independently of the truncation order, so that it
/// can be assembled at the working order a computation needs.
#[derive(Clone, Debug)]
pub enum OperatorSpec {
    Identity,
    Toeplitz(MatrixSymbol),
    Measure(Vec<PointMass>),
    RankOne(CoeffFunction, CoeffFunction),
    /// Fixed matrix, compressed or zero-padded to the requested order.
    Matrix(OperatorMatrix),
    Scaled(C64, Box<OperatorSpec>),
    Sum(Vec<OperatorSpec>),
    /// Left-to-right product.
    Product(Vec<OperatorSpec>),
    Adjoint(Box<OperatorSpec>),
}

impl OperatorSpec {
    /// Assembles at the truncation of `space`; `scale` multiplies quadrature orders.
    pub fn assemble(&self, space: &SpaceSpec, scale: f64) -> Result<OperatorMatrix> {
        Ok(match self {
            OperatorSpec::Identity => OperatorMatrix::identity(space),
            OperatorSpec::Toeplitz(u) => toeplitz_matrix_on(&toeplitz_rule(space, u, scale)?, u)?,
            OperatorSpec::Measure(atoms) => toeplitz_measure_matrix(space, atoms)?,
            OperatorSpec::RankOne(f, g) => {
                let r = rank_one(f, g)?;
                r.resize(space)?
            }
            OperatorSpec::Matrix(m) => m.resize(space)?,
            OperatorSpec::Scaled(c, t) => t.assemble(space, scale)?.scale(*c),
            OperatorSpec::Sum(ts) => {
                let mut acc = OperatorMatrix::zeros(space);
                for t in ts {
                    acc = acc.add(&t.assemble(space, scale)?)?;
                }
                acc
            }
            OperatorSpec::Product(ts) => {
                let mut acc = OperatorMatrix::identity(space);
                for t in ts {
                    acc = acc.mul(&t.assemble(space, scale)?)?;
                }
                acc
            }
            OperatorSpec::Adjoint(t) => t.assemble(space, scale)?.adjoint(),
        })
    }

    /// True when every factor is finite rank or built from symbols supported in
    /// bounded sets, i.e. the operator is compact on the untruncated space.
    pub fn is_compact_class(&self) -> bool {
        match self {
            OperatorSpec::Identity => false,
            OperatorSpec::Toeplitz(u) => symbol_has_bounded_support(u),
            OperatorSpec::Measure(_) | OperatorSpec::RankOne(..) => true,
            OperatorSpec::Matrix(_) => false,
            OperatorSpec::Scaled(c, t) => *c == C64::new(0.0, 0.0) || t.is_compact_class(),
            OperatorSpec::Sum(ts) => ts.iter().all(Self::is_compact_class),
            OperatorSpec::Product(ts) => ts.iter().any(Self::is_compact_class),
            OperatorSpec::Adjoint(t) => t.is_compact_class(),
        }
    }
}

/// Every term of every entry carries a ball indicator.
fn symbol_has_bounded_support(u: &MatrixSymbol) -> bool {
    u.entries().all(|(_, s)| s.terms().iter().all(|t| !t.balls.is_empty()))
}
