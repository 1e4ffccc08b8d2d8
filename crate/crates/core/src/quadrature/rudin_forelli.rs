use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::gauss::{gauss_jacobi, gauss_laguerre, MAX_LAGUERRE_ORDER};
use crate::error::{LabError, Result};
use crate::io::{point_to_json, Cx};
use crate::space::{DomainPoint, Factor, SpaceSpec, C64};

/// Quadrature resolution for the kernel-power integrals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RfResolution {
    pub radial: usize,
    pub angular: usize,
}

impl Default for RfResolution {
    fn default() -> Self {
        RfResolution { radial: 120, angular: 512 }
    }
}

impl RfResolution {
    pub fn scaled(self, scale: f64) -> Self {
        let s = if scale.is_finite() && scale > 0.0 { scale } else { 1.0 };
        RfResolution {
            radial: ((self.radial as f64) * s).ceil() as usize,
            angular: ((self.angular as f64) * s).ceil() as usize,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RfPoint {
    pub z: Vec<Cx>,
    /// `∫ |⟨K_z,K_w⟩|^{(r+s)/2} / (‖K_z‖^s ‖K_w‖^r) dλ(w)`.
    pub upper: f64,
    /// `∫ |⟨K_z,K_w⟩|^{(r−s)/2} / ‖K_w‖^r dλ(w)`.
    pub quasi: f64,
    /// `quasi / upper`.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RfReport {
    pub r: f64,
    pub s: f64,
    pub resolution: RfResolution,
    pub points: Vec<RfPoint>,
    pub sup_upper: f64,
    pub sup_quasi: f64,
    pub ratio_min: f64,
    pub ratio_max: f64,
}

/// Boundary exponent of `‖K_w‖^{-r} dλ(w)` in the radial variable, per factor:
/// `(1 − t)^β` on the disc. Fock decays like `e^{−r t/2}`.
fn boundary_exponent(factor: Factor, r: f64) -> f64 {
    match factor {
        Factor::Disc { alpha } => 0.5 * r * (2.0 + alpha) - 2.0,
        Factor::Fock => f64::INFINITY,
    }
}

/// Rejects exponents for which `∫ ‖K_w‖^{-r} dλ(w)` diverges near the boundary.
pub fn check_integrable(space: &SpaceSpec, r: f64, s: f64) -> Result<()> {
    if !r.is_finite() || !s.is_finite() {
        return Err(LabError::param("Rudin–Forelli exponents must be finite"));
    }
    for f in space.factors() {
        let ok = match f {
            Factor::Disc { .. } => boundary_exponent(f, r) > -1.0,
            Factor::Fock => r > 0.0,
        };
        if !ok {
            return Err(LabError::Divergent(format!(
                "integrand ‖K_w‖^-{r} dλ is not integrable for this space (radial exponent {})",
                boundary_exponent(f, r)
            )));
        }
    }
    Ok(())
}

/// Radial nodes `t` and weights for `∫ g(t) ‖K_w‖^{-r} dλ` per unit angle,
/// with the boundary behaviour folded into the Gauss weight.
fn radial_nodes(factor: Factor, r: f64, order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    match factor {
        Factor::Disc { alpha } => {
            // dλ = (α+1)(1−t)^{−2} dt dθ/2π and ‖K_w‖^{-r} = (1−t)^{r(2+α)/2}
            let beta = boundary_exponent(factor, r);
            let g = gauss_jacobi(order, beta, 0.0)?;
            let scale = (alpha + 1.0) * 0.5f64.powf(beta + 1.0);
            Ok((g.nodes.iter().map(|x| 0.5 * (1.0 + x)).collect(), g.weights.iter().map(|w| w * scale).collect()))
        }
        Factor::Fock => {
            // dλ = dt dθ/2π and ‖K_w‖^{-r} = e^{−r t/2}
            let g = gauss_laguerre(order.min(MAX_LAGUERRE_ORDER))?;
            let c = 2.0 / r;
            Ok((g.nodes.iter().map(|u| c * u).collect(), g.weights.iter().map(|w| w * c).collect()))
        }
    }
}

/// `|K_z(w)|^a` for one factor.
#[inline]
fn kernel_power(factor: Factor, z: C64, w: C64, a: f64) -> f64 {
    match factor {
        Factor::Disc { alpha } => (C64::new(1.0, 0.0) - w * z.conj()).norm().powf(-a * (2.0 + alpha)),
        Factor::Fock => (a * (w * z.conj()).re).exp(),
    }
}

/// Both integrals for one factor at one point.
fn factor_integrals(factor: Factor, z: C64, r: f64, s: f64, nodes: &(Vec<f64>, Vec<f64>), angular: usize) -> (f64, f64) {
    let a = 0.5 * (r + s);
    let b = 0.5 * (r - s);
    let (mut upper, mut quasi) = (0.0, 0.0);
    for (t, w) in nodes.0.iter().zip(&nodes.1) {
        let rho = t.max(0.0).sqrt();
        let (mut su, mut sq) = (0.0, 0.0);
        for j in 0..angular {
            let x = C64::from_polar(rho, 2.0 * PI * j as f64 / angular as f64);
            su += kernel_power(factor, z, x, a);
            sq += kernel_power(factor, z, x, b);
        }
        upper += w * su / angular as f64;
        quasi += w * sq / angular as f64;
    }
    let norm_s = factor.kernel_diag(z).powf(-0.5 * s);
    (upper * norm_s, quasi)
}

/// Rudin–Forelli integrals at each grid point.
pub fn rudin_forelli(space: &SpaceSpec, r: f64, s: f64, z_grid: &[DomainPoint], res: RfResolution) -> Result<RfReport> {
    check_integrable(space, r, s)?;
    if res.radial == 0 || res.angular == 0 {
        return Err(LabError::param("resolution orders must be positive"));
    }
    if z_grid.is_empty() {
        return Err(LabError::param("empty z grid"));
    }
    for z in z_grid {
        space.check_point(z)?;
    }
    let factors = space.factors();
    let nodes: Vec<_> = factors.iter().map(|f| radial_nodes(*f, r, res.radial)).collect::<Result<_>>()?;
    let points: Vec<RfPoint> = z_grid
        .par_iter()
        .map(|z| {
            let (mut upper, mut quasi) = (1.0, 1.0);
            // every integrand factorises over the coordinates
            for ((f, c), nd) in factors.iter().zip(z.coords()).zip(&nodes) {
                let (u, q) = factor_integrals(*f, *c, r, s, nd, res.angular);
                upper *= u;
                quasi *= q;
            }
            RfPoint { z: point_to_json(z), upper, quasi, ratio: quasi / upper }
        })
        .collect();
    let fold = |f: fn(&RfPoint) -> f64, init: f64, op: fn(f64, f64) -> f64| points.iter().map(f).fold(init, op);
    Ok(RfReport {
        r,
        s,
        resolution: res,
        sup_upper: fold(|p| p.upper, 0.0, f64::max),
        sup_quasi: fold(|p| p.quasi, 0.0, f64::max),
        ratio_min: fold(|p| p.ratio, f64::INFINITY, f64::min),
        ratio_max: fold(|p| p.ratio, 0.0, f64::max),
        points,
    })
}

/// Default sweep grid: the origin plus 8 equally spaced angles per nonzero radius.
pub fn default_z_grid(space: &SpaceSpec) -> Vec<DomainPoint> {
    let radii: &[f64] = match space.factors()[0] {
        Factor::Disc { .. } => &[0.0, 0.3, 0.6, 0.8, 0.9],
        Factor::Fock => &[0.0, 1.0, 2.0, 3.0],
    };
    let mut out = Vec::new();
    for &rho in radii {
        let angles = if rho == 0.0 { 1 } else { 8 };
        for j in 0..angles {
            let c = C64::from_polar(rho, 2.0 * PI * j as f64 / 8.0);
            out.push(match space.n_vars() {
                1 => DomainPoint::Single(c),
                _ => DomainPoint::Pair([c, c]),
            });
        }
    }
    out
}
