use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::berezin::shell_points;
use crate::coeff::CoeffFunction;
use crate::error::{LabError, Result};
use crate::linalg;
use crate::operator::{OperatorMatrix, Translation};
use crate::space::{Factor, SpaceSpec, C64};

/// Basis probes `e_m ⊗ e_k` plus `extra` seeded random unit functions.
pub fn default_probes(space: &SpaceSpec, extra: usize, seed: u64) -> Vec<CoeffFunction> {
    let d = space.component_dim;
    let mut out: Vec<CoeffFunction> = (0..space.n_modes())
        .flat_map(|m| (0..d).map(move |k| (m, k)))
        .map(|(m, k)| CoeffFunction::basis(space, m, k).expect("index in range"))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..extra {
        let mut c: Vec<C64> = (0..space.dim()).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let n = c.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        c.iter_mut().for_each(|x| *x /= n);
        out.push(CoeffFunction::new(space, c).expect("length matches"));
    }
    out
}

/// Shell radii of increasing distance from the origin inside the admissible region.
pub fn default_shells(space: &SpaceSpec) -> Vec<f64> {
    let r = space.admissible_radius();
    let shells: &[f64] = match space.factors()[0] {
        Factor::Disc { .. } => &[0.3, 0.6, 0.8, 0.9],
        Factor::Fock => &[1.0, 2.0, 3.0, 4.0],
    };
    shells.iter().copied().filter(|s| *s <= r + 1e-12).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EssNormReport {
    pub shells: Vec<f64>,
    pub angles: usize,
    /// `max_{probe, angle} ‖T^z f‖` per shell.
    pub shell_values: Vec<f64>,
    /// `max_angle ‖T^z f‖` at the outermost shell, per probe.
    pub outer_probe_values: Vec<f64>,
    /// Value at the outermost shell.
    pub estimate: f64,
    /// The outermost shell does not exceed the one before it.
    pub outer_monotone: bool,
    /// `‖T (I − P_{N/2})‖`: the part of `T` acting on the upper half of the modes,
    /// a finite-rank comparison quantity.
    pub high_mode_norm: f64,
    pub singular_values: Vec<f64>,
}

/// Upper-half mode projector `I − P_{⌈N/2⌉}` (per variable on the bidisc).
fn high_mode_projector(space: &SpaceSpec) -> DMatrix<C64> {
    let n = space.truncation_order;
    let d = space.component_dim;
    let cut = n.div_ceil(2);
    let high = |m: usize| match space.n_vars() {
        1 => m >= cut,
        _ => m / n >= cut || m % n >= cut,
    };
    DMatrix::from_fn(space.dim(), space.dim(), |r, c| if r == c && high(r / d) { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
}

/// `‖T^z f‖ = ‖U_z T U_z* f‖ = ‖T U_z* f‖` over shells of points and a probe set.
///
/// `U_z* f` is the compression `P_N U_z* P_N f`, so at every shell the
/// probes only see the part of `U_z* f` the truncated operator can act on.
pub fn essential_norm_estimate(t: &OperatorMatrix, shells: &[f64], angles: usize, probes: &[CoeffFunction]) -> Result<EssNormReport> {
    let space = t.space();
    if shells.is_empty() || probes.is_empty() || angles == 0 {
        return Err(LabError::param("essential norm estimate needs shells, angles and probes"));
    }
    if shells.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LabError::param("shell radii must be strictly increasing"));
    }
    for p in probes {
        space.ensure_compatible(p.space())?;
    }
    let probe_mat = DMatrix::from_fn(space.dim(), probes.len(), |r, c| probes[c].coeffs()[r]);
    let points: Vec<(usize, _)> =
        shells.iter().enumerate().flat_map(|(i, r)| shell_points(space, *r, angles).into_iter().map(move |z| (i, z))).collect();
    for (_, z) in &points {
        space.check_admissible(z)?;
    }
    let per_point: Vec<Vec<f64>> = points
        .par_iter()
        .map(|(_, z)| {
            let u = Translation::new(space, z)?.matrix();
            let images = t.matrix() * u.matrix().adjoint() * &probe_mat;
            Ok(images.column_iter().map(|c| c.norm()).collect())
        })
        .collect::<Result<_>>()?;
    let mut shell_values = vec![0.0f64; shells.len()];
    let mut outer_probe_values = vec![0.0f64; probes.len()];
    let last = shells.len() - 1;
    for ((si, _), vals) in points.iter().zip(&per_point) {
        let top = vals.iter().copied().fold(0.0, f64::max);
        shell_values[*si] = shell_values[*si].max(top);
        if *si == last {
            for (o, v) in outer_probe_values.iter_mut().zip(vals) {
                *o = o.max(*v);
            }
        }
    }
    let estimate = shell_values[last];
    let outer_monotone = last == 0 || shell_values[last] <= shell_values[last - 1] * (1.0 + 1e-12);
    let high_mode_norm = linalg::spectral_norm(&(t.matrix() * high_mode_projector(space)));
    Ok(EssNormReport {
        shells: shells.to_vec(),
        angles,
        shell_values,
        outer_probe_values,
        estimate,
        outer_monotone,
        high_mode_norm,
        singular_values: linalg::singular_values(t.matrix()),
    })
}

/// `‖T f‖` for a single probe, a convenience for callers building their own profiles.
pub fn probe_image_norm(t: &OperatorMatrix, f: &CoeffFunction) -> Result<f64> {
    t.space().ensure_compatible(f.space())?;
    Ok((t.matrix() * DVector::from_column_slice(f.coeffs())).norm())
}
