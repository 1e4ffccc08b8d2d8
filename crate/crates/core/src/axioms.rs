//! Invariant suite for the strong-space models: reproducing property,
//! involutivity, the exact kernel/involution identity, weak-null decay and
//! metric invariance, all checked numerically on seeded samples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::coeff::basis_at;
use crate::error::{LabError, Result};
use crate::quadrature::build_rule;
use crate::space::{self, DomainPoint, Factor, SpaceSpec, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AxiomSettings {
    pub radial_order: usize,
    pub angular_order: usize,
    /// Random `(z, w)` pairs for the pointwise identities.
    pub pairs: usize,
    pub seed: u64,
    pub reproducing_tol: f64,
    pub involution_tol: f64,
    pub identity_tol: f64,
    pub metric_tol: f64,
}

impl Default for AxiomSettings {
    fn default() -> Self {
        AxiomSettings {
            radial_order: 40,
            angular_order: 64,
            pairs: 1000,
            seed: 0,
            reproducing_tol: 1e-8,
            involution_tol: 1e-12,
            identity_tol: 1e-10,
            metric_tol: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomCheck {
    pub name: String,
    pub anchor: String,
    /// Worst observed residual (or, for monotonicity, the largest increase).
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub checks: Vec<AxiomCheck>,
    pub passed: bool,
}

fn check(name: &str, anchor: &str, value: f64, tolerance: f64, samples: usize) -> AxiomCheck {
    AxiomCheck {
        name: name.into(),
        anchor: anchor.into(),
        value,
        tolerance,
        passed: value.is_finite() && value <= tolerance,
        samples,
    }
}

/// Uniform point with every coordinate of modulus at most `rho`.
fn random_point(space: &SpaceSpec, rng: &mut ChaCha8Rng, rho: f64) -> DomainPoint {
    let mut c = || C64::from_polar(rho * rng.random::<f64>().sqrt(), 2.0 * PI * rng.random::<f64>());
    match space.n_vars() {
        1 => DomainPoint::Single(c()),
        _ => DomainPoint::Pair([c(), c()]),
    }
}

fn sample_radius(space: &SpaceSpec) -> f64 {
    match space.factors()[0] {
        Factor::Disc { .. } => 0.9,
        Factor::Fock => 4.0,
    }
}

fn point_gap(a: &DomainPoint, b: &DomainPoint) -> f64 {
    a.coords().iter().zip(b.coords()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `max |∫ conj(K_z(w)) e_m(w) dσ(w) − e_m(z)|` over all basis monomials and a
/// grid of `z`, with the untruncated kernel.
fn reproducing(space: &SpaceSpec, s: &AxiomSettings) -> Result<(f64, usize)> {
    let rule = build_rule(space, s.radial_order, s.angular_order)?;
    let radii: &[f64] = match space.factors()[0] {
        Factor::Disc { .. } => &[0.0, 0.3, 0.6],
        Factor::Fock => &[0.0, 1.0, 2.0],
    };
    let basis: Vec<Vec<C64>> = rule.nodes().iter().map(|w| basis_at(space, w)).collect::<Result<_>>()?;
    let mut worst = 0.0f64;
    let mut count = 0;
    for rho in radii {
        for a in 0..5 {
            let c = C64::from_polar(*rho, 0.7 + 2.0 * PI * a as f64 / 5.0);
            let z = match space.n_vars() {
                1 => DomainPoint::Single(c),
                _ => DomainPoint::Pair([c, c.conj() * 0.5]),
            };
            let kz: Vec<C64> = rule.nodes().iter().map(|w| space::kernel_eval(space, &z, w).map(|k| k.conj())).collect::<Result<_>>()?;
            let at_z = basis_at(space, &z)?;
            for (m, target) in at_z.iter().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for ((k, b), wt) in kz.iter().zip(&basis).zip(rule.sigma_weights()) {
                    acc += k * b[m] * wt;
                }
                worst = worst.max((acc - target).norm());
                count += 1;
            }
        }
    }
    Ok((worst, count))
}

/// Largest step up of `|⟨k_z, k_w⟩|` along rays at increasing metric distance,
/// together with the final value (which must be small).
fn weak_null(space: &SpaceSpec, rng: &mut ChaCha8Rng) -> Result<(f64, f64, usize)> {
    let factor = space.factors()[0];
    let rho = |j: i32| {
        let r = 1.0 - 2f64.powi(-j);
        match factor {
            Factor::Disc { .. } => r,
            // same metric distance from the origin as the disc shells
            Factor::Fock => r.atanh(),
        }
    };
    let mut rise = 0.0f64;
    let mut last = 0.0f64;
    let mut count = 0;
    for _ in 0..8 {
        let w = random_point(space, rng, 0.5);
        let theta = 2.0 * PI * rng.random::<f64>();
        let mut prev = f64::INFINITY;
        for j in 3..=12 {
            let c = C64::from_polar(rho(j), theta);
            let z = match space.n_vars() {
                1 => DomainPoint::Single(c),
                _ => DomainPoint::Pair([c, c]),
            };
            let v = space::normalized_kernel_inner(space, &z, &w)?.norm();
            if prev.is_finite() {
                rise = rise.max(v - prev);
            }
            prev = v;
            count += 1;
        }
        last = last.max(prev);
    }
    Ok((rise, last, count))
}

/// Runs the invariant suite on one space.
pub fn verify_axioms(space: &SpaceSpec, s: &AxiomSettings) -> Result<AxiomReport> {
    space.validate()?;
    if s.pairs == 0 {
        return Err(LabError::param("the axiom suite needs at least one random pair"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let rho = sample_radius(space);
    let mut checks = Vec::new();

    let rule = build_rule(space, s.radial_order, s.angular_order)?;
    let total = rule.sigma_weights().iter().sum::<f64>();
    checks.push(check("sigma_probability", "finite measure normalised to one", (total - 1.0).abs(), s.reproducing_tol, rule.len()));

    let (rep, n) = reproducing(space, s)?;
    checks.push(check("reproducing_property", "f(z) = <f, K_z>", rep, s.reproducing_tol, n));

    let mut inv = 0.0f64;
    let mut ident = 0.0f64;
    let mut met = 0.0f64;
    for _ in 0..s.pairs {
        let z = random_point(space, &mut rng, rho);
        let w = random_point(space, &mut rng, rho);
        let a = random_point(space, &mut rng, rho);
        let back = space::involution(space, &z, &space::involution(space, &z, &w)?)?;
        inv = inv.max(point_gap(&back, &w));
        let phi = space::involution(space, &z, &w)?;
        let prod = space::normalized_kernel_inner(space, &z, &w)?.norm() * space::kernel_norm(space, &phi)?;
        ident = ident.max((prod - 1.0).abs());
        let d0 = space::metric(space, &z, &w)?;
        let d1 = space::metric(space, &space::involution(space, &a, &z)?, &space::involution(space, &a, &w)?)?;
        met = met.max((d1 - d0).abs() / (1.0 + d0));
    }
    checks.push(check("involutivity", "phi_z(phi_z(w)) = w", inv, s.involution_tol, s.pairs));
    checks.push(check("kernel_involution_identity", "|<k_z,k_w>| ||K_{phi_z(w)}|| = 1", ident, s.identity_tol, s.pairs));
    checks.push(check("metric_invariance", "d(phi_a u, phi_a v) = d(u, v)", met, s.metric_tol, s.pairs));

    let (rise, last, n) = weak_null(space, &mut rng)?;
    checks.push(check("weak_null_monotone", "k_z tends weakly to zero", rise, 0.0, n));
    checks.push(check("weak_null_limit", "k_z tends weakly to zero", last, 1e-2, n));

    let passed = checks.iter().all(|c| c.passed);
    Ok(AxiomReport { checks, passed })
}
