use nalgebra::DMatrix;
use rayon::prelude::*;
use rustfft::FftPlanner;
use std::f64::consts::PI;

use super::gauss::{gauss_jacobi, gauss_laguerre, gauss_legendre_interval, GaussRule};
use crate::error::{LabError, Result};
use crate::space::{DomainPoint, Factor, SpaceSpec, C64};

/// Hard cap on the node count of a single rule.
pub const MAX_NODES: usize = 1 << 22;

/// Rings of a polar rule: radii and the σ-mass carried by each ring.
#[derive(Clone, Debug)]
pub struct RadialRule {
    pub radii: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Tensor rule in one complex variable: rings × `angular_order` equispaced angles.
#[derive(Clone, Debug)]
pub struct PolarRule {
    pub radial: RadialRule,
    pub angular_order: usize,
}

impl PolarRule {
    pub fn len(&self) -> usize {
        self.radial.radii.len() * self.angular_order
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn angle(&self, a: usize) -> f64 {
        2.0 * PI * a as f64 / self.angular_order as f64
    }

    pub fn node(&self, r: usize, a: usize) -> C64 {
        C64::from_polar(self.radial.radii[r], self.angle(a))
    }
}

/// Radial rule in `t = |z|²` for one factor.
///
/// Panels are split at the given `t`-breakpoints; every panel carries
/// `order` Gauss points. The outer panel uses the exact weight of the factor
/// (Jacobi `(1 − t)^α` on the disc, Laguerre `e^{−t}` for Fock), so monomial
/// moments `|z|^{2k}` are integrated exactly for `k ≤ 2·order − 1`.
pub fn radial_rule(factor: Factor, order: usize, breakpoints: &[f64]) -> Result<RadialRule> {
    if order == 0 {
        return Err(LabError::param("radial order must be at least 1"));
    }
    let upper = match factor {
        Factor::Disc { .. } => 1.0,
        Factor::Fock => f64::INFINITY,
    };
    let mut edges: Vec<f64> = breakpoints.iter().copied().filter(|&b| b > 0.0 && b < upper).collect();
    edges.sort_by(|a, b| a.total_cmp(b));
    edges.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    edges.insert(0, 0.0);

    let mut t_nodes = Vec::new();
    let mut weights = Vec::new();
    for (p, &lo) in edges.iter().enumerate() {
        let hi = edges.get(p + 1).copied();
        let panel: GaussRule = match (factor, hi) {
            (Factor::Disc { alpha }, Some(hi)) => {
                let g = gauss_legendre_interval(order, lo, hi)?;
                let w = g.nodes.iter().zip(&g.weights).map(|(t, w)| w * (alpha + 1.0) * (1.0 - t).powf(alpha));
                GaussRule { weights: w.collect(), nodes: g.nodes }
            }
            (Factor::Disc { alpha }, None) => {
                let g = gauss_jacobi(order, alpha, 0.0)?;
                let half = 0.5 * (1.0 - lo);
                let scale = (alpha + 1.0) * half.powf(alpha + 1.0);
                GaussRule {
                    nodes: g.nodes.iter().map(|x| lo + half * (1.0 + x)).collect(),
                    weights: g.weights.iter().map(|w| w * scale).collect(),
                }
            }
            (Factor::Fock, Some(hi)) => {
                let g = gauss_legendre_interval(order, lo, hi)?;
                let w = g.nodes.iter().zip(&g.weights).map(|(t, w)| w * (-t).exp());
                GaussRule { weights: w.collect(), nodes: g.nodes }
            }
            (Factor::Fock, None) => {
                let g = gauss_laguerre(order)?;
                let scale = (-lo).exp();
                GaussRule {
                    nodes: g.nodes.iter().map(|x| lo + x).collect(),
                    weights: g.weights.iter().map(|w| w * scale).collect(),
                }
            }
        };
        t_nodes.extend(panel.nodes);
        weights.extend(panel.weights);
    }
    Ok(RadialRule { radii: t_nodes.iter().map(|t| t.max(0.0).sqrt()).collect(), weights })
}

/// Tensor quadrature rule on Ω against σ (and λ).
///
/// Node order is ring-major: node `r·L + a` sits at radius `r`, angle `a`.
/// For the bidisc the node index is `i·n₂ + j` over the two factor rules.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    space: SpaceSpec,
    radial_order: usize,
    angular_order: usize,
    breakpoints: Vec<f64>,
    factors: Vec<PolarRule>,
    nodes: Vec<DomainPoint>,
    sigma_weights: Vec<f64>,
    lambda_weights: Vec<f64>,
}

/// Tensor rule: Gauss in `|z|²` (per panel) × uniform trapezoid in angle.
pub fn build_rule(space: &SpaceSpec, radial_order: usize, angular_order: usize) -> Result<QuadratureRule> {
    QuadratureRule::new(space, radial_order, angular_order, &[])
}

impl QuadratureRule {
    /// `breakpoints` are panel edges in `t = |z|²`, applied to every factor.
    pub fn new(space: &SpaceSpec, radial_order: usize, angular_order: usize, breakpoints: &[f64]) -> Result<Self> {
        space.validate()?;
        if radial_order == 0 || angular_order == 0 {
            return Err(LabError::param("quadrature orders must be at least 1"));
        }
        let factors = space
            .factors()
            .iter()
            .map(|f| {
                Ok(PolarRule { radial: radial_rule(*f, radial_order, breakpoints)?, angular_order })
            })
            .collect::<Result<Vec<_>>>()?;
        let total = factors.iter().try_fold(1usize, |acc, p| acc.checked_mul(p.len()));
        match total {
            Some(t) if t <= MAX_NODES => {}
            _ => return Err(LabError::param(format!("quadrature rule exceeds {MAX_NODES} nodes"))),
        }

        let mut nodes = Vec::new();
        let mut sigma = Vec::new();
        match factors.as_slice() {
            [p] => {
                for (r, w) in p.radial.weights.iter().enumerate() {
                    for a in 0..angular_order {
                        nodes.push(DomainPoint::Single(p.node(r, a)));
                        sigma.push(w / angular_order as f64);
                    }
                }
            }
            [p, q] => {
                let flat = |p: &PolarRule| -> Vec<(C64, f64)> {
                    let mut v = Vec::with_capacity(p.len());
                    for (r, w) in p.radial.weights.iter().enumerate() {
                        for a in 0..p.angular_order {
                            v.push((p.node(r, a), w / p.angular_order as f64));
                        }
                    }
                    v
                };
                let (fp, fq) = (flat(p), flat(q));
                for (z1, w1) in &fp {
                    for (z2, w2) in &fq {
                        nodes.push(DomainPoint::Pair([*z1, *z2]));
                        sigma.push(w1 * w2);
                    }
                }
            }
            _ => unreachable!("one or two factors"),
        }
        let lambda = nodes
            .iter()
            .zip(&sigma)
            .map(|(z, w)| w * crate::space::kernel_diag(space, z))
            .collect();
        let mut breakpoints = breakpoints.to_vec();
        breakpoints.sort_by(|a, b| a.total_cmp(b));
        Ok(QuadratureRule {
            space: space.clone(),
            radial_order,
            angular_order,
            breakpoints,
            factors,
            nodes,
            sigma_weights: sigma,
            lambda_weights: lambda,
        })
    }

    pub fn space(&self) -> &SpaceSpec {
        &self.space
    }

    pub fn radial_order(&self) -> usize {
        self.radial_order
    }

    pub fn angular_order(&self) -> usize {
        self.angular_order
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn nodes(&self) -> &[DomainPoint] {
        &self.nodes
    }

    pub fn sigma_weights(&self) -> &[f64] {
        &self.sigma_weights
    }

    pub fn lambda_weights(&self) -> &[f64] {
        &self.lambda_weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The single polar factor, for one-variable spaces.
    pub fn polar(&self) -> Option<&PolarRule> {
        match self.factors.as_slice() {
            [p] => Some(p),
            _ => None,
        }
    }

    pub fn factor_rules(&self) -> &[PolarRule] {
        &self.factors
    }

    /// Same node layout, different space tag (truncation or component count).
    pub fn retag(&self, space: &SpaceSpec) -> Result<Self> {
        if space.kind != self.space.kind {
            return Err(LabError::mismatch("rule retagged to a different model space"));
        }
        let mut r = self.clone();
        r.space = space.clone();
        Ok(r)
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.len() {
            return Err(LabError::mismatch(format!("{n} samples for a rule of {} nodes", self.len())));
        }
        Ok(())
    }

    /// `∫ f dσ`, summed in node order.
    pub fn integrate_sigma(&self, samples: &[C64]) -> Result<C64> {
        self.check_len(samples.len())?;
        Ok(samples.iter().zip(&self.sigma_weights).map(|(s, w)| s * w).sum())
    }

    /// `∫ f dλ`, summed in node order.
    pub fn integrate_lambda(&self, samples: &[C64]) -> Result<C64> {
        self.check_len(samples.len())?;
        Ok(samples.iter().zip(&self.lambda_weights).map(|(s, w)| s * w).sum())
    }

    pub fn integrate_sigma_real(&self, samples: &[f64]) -> Result<f64> {
        self.check_len(samples.len())?;
        Ok(samples.iter().zip(&self.sigma_weights).map(|(s, w)| s * w).sum())
    }

    pub fn integrate_lambda_real(&self, samples: &[f64]) -> Result<f64> {
        self.check_len(samples.len())?;
        Ok(samples.iter().zip(&self.lambda_weights).map(|(s, w)| s * w).sum())
    }

    /// Values `e_m(node)` for `m < n_modes`, node-major.
    pub(crate) fn basis_table(&self, steps: &[Vec<f64>], n: usize) -> Vec<C64> {
        let modes = n.pow(steps.len() as u32);
        let mut out = vec![C64::new(0.0, 0.0); self.len() * modes];
        for (row, z) in out.chunks_mut(modes).zip(&self.nodes) {
            basis_values(z, steps, n, row);
        }
        out
    }

    /// `Σ_nodes w · conj(e_m) · s` for `m < n_modes` (scalar projection onto modes).
    pub(crate) fn project_scalar(&self, samples: &[C64], steps: &[Vec<f64>], n: usize) -> Vec<C64> {
        if let Some(p) = self.polar() {
            return polar_project(p, samples, &steps[0], n);
        }
        let modes = n.pow(steps.len() as u32);
        let mut out = vec![C64::new(0.0, 0.0); modes];
        let mut row = vec![C64::new(0.0, 0.0); modes];
        for ((z, w), s) in self.nodes.iter().zip(&self.sigma_weights).zip(samples) {
            basis_values(z, steps, n, &mut row);
            for (o, b) in out.iter_mut().zip(&row) {
                *o += b.conj() * (s * w);
            }
        }
        out
    }

    /// Node samples of `Σ_m c_m e_m`.
    pub(crate) fn synthesize_scalar(&self, coeffs: &[C64], steps: &[Vec<f64>], n: usize) -> Vec<C64> {
        if let Some(p) = self.polar() {
            return polar_synthesize(p, coeffs, &steps[0], n);
        }
        let modes = coeffs.len();
        let mut row = vec![C64::new(0.0, 0.0); modes];
        self.nodes
            .iter()
            .map(|z| {
                basis_values(z, steps, n, &mut row);
                row.iter().zip(coeffs).map(|(b, c)| b * c).sum()
            })
            .collect()
    }

    /// `T[m', m] = Σ_nodes w · u · e_m · conj(e_{m'})`.
    pub(crate) fn toeplitz_scalar(&self, samples: &[C64], steps: &[Vec<f64>], n: usize) -> DMatrix<C64> {
        if let Some(p) = self.polar() {
            return polar_toeplitz(p, samples, &steps[0], n);
        }
        let modes = n.pow(steps.len() as u32);
        let table = self.basis_table(steps, n);
        let b = DMatrix::from_row_slice(self.len(), modes, &table);
        let mut weighted = b.clone();
        for (i, (w, s)) in self.sigma_weights.iter().zip(samples).enumerate() {
            let f = s * w;
            weighted.row_mut(i).iter_mut().for_each(|x| *x *= f);
        }
        b.adjoint() * weighted
    }
}

/// Writes `e_m(z)` for every mode into `out` (bidisc modes flattened `m₁·n + m₂`).
///
/// `steps[m] = c_{m+1}/c_m`; values are built by repeated multiplication so
/// that no normaliser is formed on its own (they underflow for Fock at high order).
pub(crate) fn basis_values(z: &DomainPoint, steps: &[Vec<f64>], n: usize, out: &mut [C64]) {
    fn powers(z: C64, steps: &[f64], out: &mut [C64]) {
        let len = out.len();
        let mut v = C64::new(1.0, 0.0);
        for (m, o) in out.iter_mut().enumerate() {
            *o = v;
            if m + 1 < len {
                v *= z * steps[m];
            }
        }
    }
    match (z, steps) {
        (DomainPoint::Single(z), [s]) => powers(*z, s, &mut out[..n]),
        (DomainPoint::Pair([z1, z2]), [s1, s2]) => {
            let mut a = vec![C64::new(0.0, 0.0); n];
            let mut b = vec![C64::new(0.0, 0.0); n];
            powers(*z1, s1, &mut a);
            powers(*z2, s2, &mut b);
            for (m1, x) in a.iter().enumerate() {
                for (m2, y) in b.iter().enumerate() {
                    out[m1 * n + m2] = x * y;
                }
            }
        }
        _ => panic!("point arity does not match basis"),
    }
}

fn forward_ring_transforms(p: &PolarRule, samples: &[C64]) -> Vec<Vec<C64>> {
    let l = p.angular_order;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(l);
    let scale = 1.0 / l as f64;
    samples
        .par_chunks(l)
        .map(|ring| {
            let mut buf = ring.to_vec();
            fft.process(&mut buf);
            buf.iter_mut().for_each(|x| *x *= scale);
            buf
        })
        .collect()
}

/// `c_m ρ_r^m` for every ring and mode.
fn ring_powers(p: &PolarRule, steps: &[f64], n: usize) -> Vec<Vec<f64>> {
    p.radial
        .radii
        .iter()
        .map(|&rho| {
            let mut v = 1.0;
            (0..n)
                .map(|m| {
                    let out = v;
                    if m + 1 < n {
                        v *= rho * steps[m];
                    }
                    out
                })
                .collect()
        })
        .collect()
}

fn polar_project(p: &PolarRule, samples: &[C64], steps: &[f64], n: usize) -> Vec<C64> {
    let l = p.angular_order;
    let rings = forward_ring_transforms(p, samples);
    let pw = ring_powers(p, steps, n);
    let mut out = vec![C64::new(0.0, 0.0); n];
    for ((hat, w), pr) in rings.iter().zip(&p.radial.weights).zip(&pw) {
        for (m, o) in out.iter_mut().enumerate() {
            *o += hat[m % l] * (w * pr[m]);
        }
    }
    out
}

fn polar_synthesize(p: &PolarRule, coeffs: &[C64], steps: &[f64], n: usize) -> Vec<C64> {
    let l = p.angular_order;
    let ifft = FftPlanner::<f64>::new().plan_fft_inverse(l);
    let pw = ring_powers(p, steps, n);
    let mut out = Vec::with_capacity(p.len());
    for pr in &pw {
        let mut buf = vec![C64::new(0.0, 0.0); l];
        for (m, a) in coeffs.iter().enumerate() {
            buf[m % l] += a * pr[m];
        }
        ifft.process(&mut buf);
        out.extend(buf);
    }
    out
}

fn polar_toeplitz(p: &PolarRule, samples: &[C64], steps: &[f64], n: usize) -> DMatrix<C64> {
    let l = p.angular_order as isize;
    let rings = forward_ring_transforms(p, samples);
    let pw = ring_powers(p, steps, n);
    let mut t = DMatrix::<C64>::zeros(n, n);
    for ((hat, w), pr) in rings.iter().zip(&p.radial.weights).zip(&pw) {
        for m in 0..n {
            let a = w * pr[m];
            for mp in 0..n {
                let k = (mp as isize - m as isize).rem_euclid(l) as usize;
                t[(mp, m)] += hat[k] * (a * pr[mp]);
            }
        }
    }
    t
}
