//! Concrete model spaces: the weighted Bergman disc, the Fock space and the
//! bidisc, with their kernels, involutions, metrics and measures.
//!
//! Normalisations are chosen so that σ is a probability measure and
//! `K_0 ≡ 1` in every model:
//!
//! | space | `K_z(w)` | `φ_z(w)` | `𝔡(z, w)` | density of σ |
//! |-------|----------|----------|-----------|--------------|
//! | disc, weight α | `(1 − w z̄)^{−(2+α)}` | `(z − w)/(1 − z̄ w)` | `artanh |φ_z(w)|` | `((α+1)/π)(1 − |z|²)^α` |
//! | Fock | `exp(w z̄)` | `z − w` | `|z − w|` | `(1/π) e^{−|z|²}` |
//! | bidisc | product | factor-wise | max of factors | product |

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{LabError, Result};

pub type C64 = num_complex::Complex64;

fn default_fock_cutoff() -> f64 {
    6.0
}

fn default_disc_max_radius() -> f64 {
    0.9
}

/// Which model domain, with its weight parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceKind {
    BergmanDisc { alpha: f64 },
    Fock,
    Bidisc { alpha: [f64; 2] },
}

/// A concrete model space at a fixed truncation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceSpec {
    #[serde(flatten)]
    pub kind: SpaceKind,
    /// Modes `0..N` per complex variable.
    pub truncation_order: usize,
    /// Number of active ℓ² components `d`.
    pub component_dim: usize,
    /// Radius of the Fock region of interest (admissible translation points, coverings).
    #[serde(default = "default_fock_cutoff")]
    pub fock_cutoff_radius: f64,
    /// Largest admissible `|z|` per disc factor.
    #[serde(default = "default_disc_max_radius")]
    pub disc_max_radius: f64,
    /// Rudin–Forelli exponent κ; `None` selects the model default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
}

impl SpaceSpec {
    pub fn bergman_disc(alpha: f64, n: usize, d: usize) -> Result<Self> {
        Self::new(SpaceKind::BergmanDisc { alpha }, n, d)
    }

    pub fn fock(n: usize, d: usize) -> Result<Self> {
        Self::new(SpaceKind::Fock, n, d)
    }

    pub fn bidisc(alpha: [f64; 2], n: usize, d: usize) -> Result<Self> {
        Self::new(SpaceKind::Bidisc { alpha }, n, d)
    }

    pub fn new(kind: SpaceKind, n: usize, d: usize) -> Result<Self> {
        let s = SpaceSpec {
            kind,
            truncation_order: n,
            component_dim: d,
            fock_cutoff_radius: default_fock_cutoff(),
            disc_max_radius: default_disc_max_radius(),
            kappa: None,
        };
        s.validate()?;
        Ok(s)
    }

    /// Same space at a different truncation order.
    pub fn with_order(&self, n: usize) -> Self {
        SpaceSpec { truncation_order: n, ..self.clone() }
    }

    /// Same space with a different component dimension.
    pub fn with_components(&self, d: usize) -> Self {
        SpaceSpec { component_dim: d, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        let alpha_ok = |a: f64| a.is_finite() && a > -1.0;
        match self.kind {
            SpaceKind::BergmanDisc { alpha } if !alpha_ok(alpha) => {
                return Err(LabError::param(format!("weight alpha = {alpha} must exceed -1")))
            }
            SpaceKind::Bidisc { alpha } if !alpha.iter().all(|&a| alpha_ok(a)) => {
                return Err(LabError::param(format!("weights {alpha:?} must exceed -1")))
            }
            _ => {}
        }
        if self.truncation_order == 0 {
            return Err(LabError::param("truncation order must be at least 1"));
        }
        if self.truncation_order > 4096 {
            return Err(LabError::param("truncation order above 4096"));
        }
        if self.component_dim == 0 || self.component_dim > 256 {
            return Err(LabError::param("component dimension must be in 1..=256"));
        }
        if !(self.fock_cutoff_radius.is_finite() && self.fock_cutoff_radius > 0.0) {
            return Err(LabError::param("Fock cutoff radius must be positive"));
        }
        if !(self.disc_max_radius > 0.0 && self.disc_max_radius < 1.0) {
            return Err(LabError::param("disc admissible radius must lie in (0, 1)"));
        }
        if let Some(k) = self.kappa {
            if !(k.is_finite() && (0.0..2.0).contains(&k)) {
                return Err(LabError::param("kappa must lie in [0, 2)"));
            }
        }
        let modes = self.n_modes().saturating_mul(self.component_dim);
        if modes > 1 << 16 {
            return Err(LabError::param("truncated dimension N·d exceeds 65536"));
        }
        Ok(())
    }

    pub fn factors(&self) -> Vec<Factor> {
        match self.kind {
            SpaceKind::BergmanDisc { alpha } => vec![Factor::Disc { alpha }],
            SpaceKind::Fock => vec![Factor::Fock],
            SpaceKind::Bidisc { alpha } => {
                vec![Factor::Disc { alpha: alpha[0] }, Factor::Disc { alpha: alpha[1] }]
            }
        }
    }

    /// Number of complex variables.
    pub fn n_vars(&self) -> usize {
        match self.kind {
            SpaceKind::Bidisc { .. } => 2,
            _ => 1,
        }
    }

    /// Number of scalar basis functions `e_m`.
    pub fn n_modes(&self) -> usize {
        self.truncation_order.pow(self.n_vars() as u32)
    }

    /// Dimension of the truncated vector-valued space, `n_modes · d`.
    pub fn dim(&self) -> usize {
        self.n_modes() * self.component_dim
    }

    pub fn kappa(&self) -> f64 {
        self.kappa.unwrap_or(match self.kind {
            SpaceKind::Fock => 0.0,
            _ => 1.0,
        })
    }

    /// `(4 − κ)/(2 − κ)`: the exponent threshold for the boundedness criteria.
    pub fn rkt_exponent_threshold(&self) -> f64 {
        let k = self.kappa();
        (4.0 - k) / (2.0 - k)
    }

    /// Largest admissible modulus per factor.
    pub fn admissible_radius(&self) -> f64 {
        match self.kind {
            SpaceKind::Fock => self.fock_cutoff_radius,
            _ => self.disc_max_radius,
        }
    }

    /// Rejects points outside Ω (any space) or outside the admissible region.
    pub fn check_admissible(&self, z: &DomainPoint) -> Result<()> {
        self.check_point(z)?;
        let r = self.admissible_radius();
        if z.coords().iter().any(|c| c.norm() > r + 1e-12) {
            return Err(LabError::Truncation(format!(
                "{z:?} lies outside the admissible region |z| <= {r}"
            )));
        }
        Ok(())
    }

    /// Rejects points outside Ω or of the wrong arity.
    pub fn check_point(&self, z: &DomainPoint) -> Result<()> {
        if z.arity() != self.n_vars() {
            return Err(LabError::Domain(format!(
                "point {z:?} has {} coordinates, space has {}",
                z.arity(),
                self.n_vars()
            )));
        }
        for (f, c) in self.factors().iter().zip(z.coords()) {
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(LabError::Domain(format!("non-finite coordinate {c}")));
            }
            if let Factor::Disc { .. } = f {
                if c.norm() >= 1.0 {
                    return Err(LabError::Domain(format!("|{c}| >= 1 in a disc factor")));
                }
            }
        }
        Ok(())
    }

    /// Same domain, truncation and component count (tolerances may differ).
    pub fn compatible(&self, other: &SpaceSpec) -> bool {
        self.kind == other.kind
            && self.truncation_order == other.truncation_order
            && self.component_dim == other.component_dim
    }

    pub(crate) fn ensure_compatible(&self, other: &SpaceSpec) -> Result<()> {
        if self.compatible(other) {
            Ok(())
        } else {
            Err(LabError::mismatch(format!(
                "space {:?} (N={}, d={}) vs {:?} (N={}, d={})",
                self.kind, self.truncation_order, self.component_dim, other.kind, other.truncation_order, other.component_dim
            )))
        }
    }

    /// Normaliser ratios `c_{m+1}/c_m` for `m < n`, per factor.
    pub(crate) fn step_table(&self, n: usize) -> Vec<Vec<f64>> {
        self.factors().iter().map(|f| f.steps(n)).collect()
    }

    /// Origin of Ω.
    pub fn origin(&self) -> DomainPoint {
        match self.n_vars() {
            1 => DomainPoint::Single(C64::new(0.0, 0.0)),
            _ => DomainPoint::Pair([C64::new(0.0, 0.0); 2]),
        }
    }
}

/// A point of Ω: one complex coordinate, or two for the bidisc.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DomainPoint {
    Single(C64),
    Pair([C64; 2]),
}

impl DomainPoint {
    pub fn coords(&self) -> &[C64] {
        match self {
            DomainPoint::Single(z) => std::slice::from_ref(z),
            DomainPoint::Pair(p) => p,
        }
    }

    pub fn arity(&self) -> usize {
        self.coords().len()
    }

    pub(crate) fn from_coords(c: &[C64]) -> Self {
        match c {
            [z] => DomainPoint::Single(*z),
            [a, b] => DomainPoint::Pair([*a, *b]),
            _ => panic!("domain points have one or two coordinates"),
        }
    }

    pub(crate) fn map2(&self, other: &DomainPoint, f: impl Fn(usize, C64, C64) -> C64) -> Self {
        let v: Vec<C64> = self
            .coords()
            .iter()
            .zip(other.coords())
            .enumerate()
            .map(|(i, (a, b))| f(i, *a, *b))
            .collect();
        DomainPoint::from_coords(&v)
    }
}

impl From<C64> for DomainPoint {
    fn from(z: C64) -> Self {
        DomainPoint::Single(z)
    }
}

impl From<f64> for DomainPoint {
    fn from(x: f64) -> Self {
        DomainPoint::Single(C64::new(x, 0.0))
    }
}

/// One complex factor of a model domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Factor {
    Disc { alpha: f64 },
    Fock,
}

impl Factor {
    /// `K_z(w)`.
    #[inline]
    pub fn kernel(&self, z: C64, w: C64) -> C64 {
        match *self {
            Factor::Disc { alpha } => {
                let base = C64::new(1.0, 0.0) - w * z.conj();
                if alpha == 0.0 {
                    (base * base).inv()
                } else {
                    base.powf(-(2.0 + alpha))
                }
            }
            Factor::Fock => (w * z.conj()).exp(),
        }
    }

    /// `K(z, z) = ‖K_z‖²`.
    #[inline]
    pub fn kernel_diag(&self, z: C64) -> f64 {
        match *self {
            Factor::Disc { alpha } => (1.0 - z.norm_sqr()).powf(-(2.0 + alpha)),
            Factor::Fock => z.norm_sqr().exp(),
        }
    }

    /// Normalised kernel `k_z(w) = K_z(w)/‖K_z‖`.
    #[inline]
    pub fn normalized_kernel(&self, z: C64, w: C64) -> C64 {
        match *self {
            Factor::Disc { alpha } => {
                let base = C64::new(1.0, 0.0) - w * z.conj();
                let scale = (1.0 - z.norm_sqr()).powf(0.5 * (2.0 + alpha));
                if alpha == 0.0 {
                    scale * (base * base).inv()
                } else {
                    scale * base.powf(-(2.0 + alpha))
                }
            }
            Factor::Fock => (w * z.conj() - 0.5 * z.norm_sqr()).exp(),
        }
    }

    #[inline]
    pub fn involution(&self, z: C64, w: C64) -> C64 {
        match self {
            Factor::Disc { .. } => (z - w) / (C64::new(1.0, 0.0) - z.conj() * w),
            Factor::Fock => z - w,
        }
    }

    #[inline]
    pub fn metric(&self, z: C64, w: C64) -> f64 {
        match self {
            Factor::Disc { .. } => {
                if z == w {
                    return 0.0;
                }
                let rho = ((z - w) / (C64::new(1.0, 0.0) - z.conj() * w)).norm();
                rho.min(1.0 - f64::EPSILON).atanh()
            }
            Factor::Fock => (z - w).norm(),
        }
    }

    /// Distance from the origin, which only depends on `|z|`.
    #[inline]
    pub fn radial_metric(&self, rho: f64) -> f64 {
        match self {
            Factor::Disc { .. } => rho.min(1.0 - f64::EPSILON).atanh(),
            Factor::Fock => rho,
        }
    }

    /// Inverse of [`Factor::radial_metric`].
    #[inline]
    pub fn radius_at_distance(&self, dist: f64) -> f64 {
        match self {
            Factor::Disc { .. } => dist.tanh(),
            Factor::Fock => dist,
        }
    }

    /// Density of σ with respect to area measure.
    #[inline]
    pub fn sigma_density(&self, z: C64) -> f64 {
        match *self {
            Factor::Disc { alpha } => (alpha + 1.0) / PI * (1.0 - z.norm_sqr()).powf(alpha),
            Factor::Fock => (-z.norm_sqr()).exp() / PI,
        }
    }

    /// `c_{m+1}² / c_m²`, the ratio of consecutive squared normalisers.
    #[inline]
    pub(crate) fn normalizer_sq_ratio(&self, m: usize) -> f64 {
        let m = m as f64;
        match *self {
            Factor::Disc { alpha } => (m + 2.0 + alpha) / (m + 1.0),
            Factor::Fock => 1.0 / (m + 1.0),
        }
    }

    /// Orthonormalising constants `c_0..c_{n-1}` with `e_m(z) = c_m z^m`.
    pub fn normalizers(&self, n: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(n);
        let mut sq: f64 = 1.0;
        for m in 0..n {
            out.push(sq.sqrt());
            sq *= self.normalizer_sq_ratio(m);
        }
        out
    }

    /// Ratios `c_{m+1}/c_m` for `m < n` (with `c_0 = 1`).
    pub fn steps(&self, n: usize) -> Vec<f64> {
        (0..n).map(|m| self.normalizer_sq_ratio(m).sqrt()).collect()
    }

    /// `Σ_{m<n} |e_m(z)|² / K(z, z)`: the fraction of `‖K_z‖²` captured by `n` modes.
    pub fn captured_fraction(&self, z: C64, n: usize) -> f64 {
        let x = z.norm_sqr();
        let mut term = 1.0;
        let mut head = 0.0;
        for m in 0..n {
            head += term;
            term *= self.normalizer_sq_ratio(m) * x;
        }
        let frac = head / self.kernel_diag(z);
        frac.min(1.0)
    }
}

/// `K_z(w)`.
pub fn kernel_eval(space: &SpaceSpec, z: &DomainPoint, w: &DomainPoint) -> Result<C64> {
    space.check_point(z)?;
    space.check_point(w)?;
    Ok(space
        .factors()
        .iter()
        .zip(z.coords().iter().zip(w.coords()))
        .map(|(f, (a, b))| f.kernel(*a, *b))
        .product())
}

/// `‖K_z‖ = sqrt(K(z, z))`.
pub fn kernel_norm(space: &SpaceSpec, z: &DomainPoint) -> Result<f64> {
    space.check_point(z)?;
    Ok(kernel_diag(space, z).sqrt())
}

pub(crate) fn kernel_diag(space: &SpaceSpec, z: &DomainPoint) -> f64 {
    space
        .factors()
        .iter()
        .zip(z.coords())
        .map(|(f, c)| f.kernel_diag(*c))
        .product()
}

/// `⟨k_z, k_w⟩` in closed form.
pub fn normalized_kernel_inner(space: &SpaceSpec, z: &DomainPoint, w: &DomainPoint) -> Result<C64> {
    let k = kernel_eval(space, z, w)?;
    Ok(k / (kernel_diag(space, z) * kernel_diag(space, w)).sqrt())
}

/// `φ_z(w)`.
pub fn involution(space: &SpaceSpec, z: &DomainPoint, w: &DomainPoint) -> Result<DomainPoint> {
    space.check_point(z)?;
    space.check_point(w)?;
    let f = space.factors();
    Ok(z.map2(w, |i, a, b| f[i].involution(a, b)))
}

/// `𝔡(z, w)`.
pub fn metric(space: &SpaceSpec, z: &DomainPoint, w: &DomainPoint) -> Result<f64> {
    space.check_point(z)?;
    space.check_point(w)?;
    Ok(metric_unchecked(&space.factors(), z, w))
}

pub(crate) fn metric_unchecked(factors: &[Factor], z: &DomainPoint, w: &DomainPoint) -> f64 {
    factors
        .iter()
        .zip(z.coords().iter().zip(w.coords()))
        .map(|(f, (a, b))| f.metric(*a, *b))
        .fold(0.0, f64::max)
}

/// Density of σ with respect to Lebesgue measure.
pub fn sigma_density(space: &SpaceSpec, z: &DomainPoint) -> Result<f64> {
    space.check_point(z)?;
    Ok(space
        .factors()
        .iter()
        .zip(z.coords())
        .map(|(f, c)| f.sigma_density(*c))
        .product())
}

/// Density of `dλ = ‖K_z‖² dσ`.
pub fn lambda_density(space: &SpaceSpec, z: &DomainPoint) -> Result<f64> {
    Ok(sigma_density(space, z)? * kernel_diag(space, z))
}

/// Relative truncation tail `1 − ‖P_N K_z‖²/‖K_z‖²` of the reproducing kernel.
pub fn kernel_tail(space: &SpaceSpec, z: &DomainPoint) -> Result<f64> {
    space.check_point(z)?;
    let captured: f64 = space
        .factors()
        .iter()
        .zip(z.coords())
        .map(|(f, c)| f.captured_fraction(*c, space.truncation_order))
        .product();
    Ok((1.0 - captured).max(0.0))
}

/// Largest radius (per factor, along the real axis) whose kernel tail stays below `tol`.
pub fn certified_radius(space: &SpaceSpec, tol: f64) -> f64 {
    let factor = space.factors()[0];
    let n = space.truncation_order;
    let tail = |r: f64| 1.0 - factor.captured_fraction(C64::new(r, 0.0), n);
    let (mut lo, mut hi) = (0.0, space.admissible_radius());
    if tail(hi) <= tol {
        return hi;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if tail(mid) <= tol {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}
