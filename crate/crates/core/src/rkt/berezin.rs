use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::coeff::basis_at;
use crate::error::{LabError, Result};
use crate::io::{point_to_json, Cx};
use crate::linalg;
use crate::operator::OperatorMatrix;
use crate::space::{DomainPoint, SpaceSpec, C64};

/// Truncated kernel at `z` rescaled to unit norm, as a scalar mode vector.
fn unit_kernel_modes(space: &SpaceSpec, z: &DomainPoint) -> Result<Vec<C64>> {
    space.check_admissible(z)?;
    let mut u: Vec<C64> = basis_at(space, z)?.into_iter().map(|e| e.conj()).collect();
    let n = u.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    u.iter_mut().for_each(|c| *c /= n);
    Ok(u)
}

/// `u ⊗ I_d` as an `(N·d) × d` matrix.
fn spread(u: &[C64], d: usize) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(u.len() * d, d);
    for (m, c) in u.iter().enumerate() {
        for k in 0..d {
            out[(m * d + k, k)] = *c;
        }
    }
    out
}

/// Berezin matrix: entry `(i, k) = ⟨T k_z e_k, k_z e_i⟩` with the truncated
/// kernel normalised to unit length.
pub fn berezin(t: &OperatorMatrix, z: &DomainPoint) -> Result<DMatrix<C64>> {
    let space = t.space();
    let u = spread(&unit_kernel_modes(space, z)?, space.component_dim);
    Ok(u.adjoint() * t.matrix() * u)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BerezinSample {
    pub z: Vec<Cx>,
    /// Row-major `d × d`.
    pub matrix: Vec<Cx>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BerezinProfile {
    pub radii: Vec<f64>,
    pub angles: usize,
    /// Largest `|entry|` over angles and `(i, k)`, per radius.
    pub per_radius_max: Vec<f64>,
    pub threshold: f64,
    /// Strictly decreasing over the last three radii and below the threshold at the last.
    pub decaying: bool,
    pub samples: Vec<BerezinSample>,
}

/// Points `ρ e^{2πij/angles}` (or the diagonal pair on the bidisc).
pub fn shell_points(space: &SpaceSpec, rho: f64, angles: usize) -> Vec<DomainPoint> {
    let count = if rho == 0.0 { 1 } else { angles.max(1) };
    (0..count)
        .map(|j| {
            let c = C64::from_polar(rho, 2.0 * PI * j as f64 / angles.max(1) as f64);
            match space.n_vars() {
                1 => DomainPoint::Single(c),
                _ => DomainPoint::Pair([c, c]),
            }
        })
        .collect()
}

pub fn berezin_decay_profile(t: &OperatorMatrix, radii: &[f64], angles: usize, threshold: f64) -> Result<BerezinProfile> {
    if radii.is_empty() || angles == 0 {
        return Err(LabError::param("Berezin profile needs radii and at least one angle"));
    }
    if radii.iter().any(|r| !r.is_finite() || *r < 0.0) {
        return Err(LabError::param("radii must be finite and nonnegative"));
    }
    let space = t.space();
    let points: Vec<(usize, DomainPoint)> =
        radii.iter().enumerate().flat_map(|(i, r)| shell_points(space, *r, angles).into_iter().map(move |z| (i, z))).collect();
    for (_, z) in &points {
        space.check_admissible(z)?;
    }
    let mats: Vec<DMatrix<C64>> = points.par_iter().map(|(_, z)| berezin(t, z)).collect::<Result<_>>()?;
    let mut per_radius_max = vec![0.0f64; radii.len()];
    let mut samples = Vec::with_capacity(points.len());
    for ((ri, z), m) in points.iter().zip(&mats) {
        let top = m.iter().map(|c| c.norm()).fold(0.0, f64::max);
        per_radius_max[*ri] = per_radius_max[*ri].max(top);
        samples.push(BerezinSample {
            z: point_to_json(z),
            matrix: (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |k| (i, k))).map(|(i, k)| m[(i, k)].into()).collect(),
        });
    }
    let k = per_radius_max.len();
    let tail = &per_radius_max[k.saturating_sub(3)..];
    let decaying = tail.windows(2).all(|w| w[1] < w[0]) && per_radius_max[k - 1] < threshold;
    Ok(BerezinProfile { radii: radii.to_vec(), angles, per_radius_max, threshold, decaying, samples })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InjectivityReport {
    pub order: usize,
    pub components: usize,
    pub grid_points: usize,
    /// `(N·d)²`, the dimension of the operator space.
    pub unknowns: usize,
    pub rank: usize,
    pub full_rank: bool,
    /// Smallest singular value relative to the largest.
    pub conditioning: f64,
}

/// Sample points on a sunflower spiral inside radius `r_max`.
fn spiral(space: &SpaceSpec, count: usize, r_max: f64) -> Vec<DomainPoint> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|j| {
            let rho = r_max * ((j as f64 + 0.5) / count as f64).sqrt();
            let c = C64::from_polar(rho, golden * j as f64);
            match space.n_vars() {
                1 => DomainPoint::Single(c),
                // independent radius and angle: equal moduli would make |z₁|² and |z₂|² indistinguishable
                _ => {
                    let rho2 = r_max * ((j as f64 * 0.618_033_988_749_895 + 0.31).fract()).sqrt();
                    DomainPoint::Pair([c, C64::from_polar(rho2, 0.5 * golden * j as f64 + 1.0)])
                }
            }
        })
        .collect()
}

/// Linear map from operators on a small truncated space to their Berezin
/// samples; full column rank certifies that the Berezin transform is one to
/// one at this truncation.
pub fn berezin_injectivity_probe(space: &SpaceSpec, grid_points: usize) -> Result<InjectivityReport> {
    let dim = space.dim();
    if dim > 8 {
        return Err(LabError::param(format!("probe is limited to N·d <= 8, got {dim}")));
    }
    let unknowns = dim * dim;
    if grid_points < unknowns {
        return Err(LabError::param(format!("{grid_points} grid points cannot resolve {unknowns} unknowns")));
    }
    let d = space.component_dim;
    let r_max = 0.8 * space.admissible_radius().min(1.0);
    let points = spiral(space, grid_points, r_max);
    let mut map = DMatrix::zeros(grid_points * d * d, unknowns);
    for (p, z) in points.iter().enumerate() {
        let u = unit_kernel_modes(space, z)?;
        // column (a, b) is the matrix unit E_{ab}, a = m'·d + i, b = m·d + k;
        // its Berezin entry (i, k) is conj(u_{m'}) u_m
        for a in 0..dim {
            for b in 0..dim {
                let (mp, i, m, k) = (a / d, a % d, b / d, b % d);
                map[((p * d + i) * d + k, a * dim + b)] = u[mp].conj() * u[m];
            }
        }
    }
    let s = linalg::singular_values(&map);
    let rank = linalg::numerical_rank(&map, 1e-10);
    let conditioning = match (s.first(), s.get(unknowns - 1)) {
        (Some(top), Some(low)) if *top > 0.0 => low / top,
        _ => 0.0,
    };
    Ok(InjectivityReport {
        order: space.truncation_order,
        components: d,
        grid_points,
        unknowns,
        rank,
        full_rank: rank == unknowns,
        conditioning,
    })
}
