//! One runner per subcommand. Runners compute everything in memory and hand
//! back a JSON result and a CSV table; nothing touches the disk here.

use std::path::Path;

use bergman_lab::axioms::{verify_axioms, AxiomSettings};
use bergman_lab::coeff::CoeffFunction;
use bergman_lab::covering::{build_covering_on, covering_rule, localization_error, FactorCell};
use bergman_lab::io::{ComplexArray, Table};
use bergman_lab::linalg;
use bergman_lab::operator::{rank_one, rank_one_toeplitz_sum, OperatorSpec};
use bergman_lab::quadrature::{default_z_grid, parse_kernel_file, rudin_forelli, schur_test, RfResolution};
use bergman_lab::rkt::{
    berezin_decay_profile, default_probes, default_shells, essential_norm_estimate, hankel_rkt_check, rkt_boundedness_check,
    rkt_product_check, rkt_toeplitz_symbol_check, RktReport,
};
use bergman_lab::space::{self, Factor};
use bergman_lab::{DomainPoint, LabError, SpaceSpec, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{grid_points, ExperimentConfig, GridDef, Resolved};
use crate::error::{CliError, CliResult};

/// Everything a runner needs besides its own parameter block.
pub struct Context<'a> {
    pub cfg: &'a ExperimentConfig,
    pub resolved: &'a Resolved,
    pub seed: u64,
    pub scale: f64,
    /// Directory relative paths in the config are resolved against.
    pub base: &'a Path,
}

pub struct Outcome {
    pub anchor: &'static str,
    pub result: Value,
    pub table: Table,
    /// `None` for pure diagnostics that make no pass/fail claim.
    pub passed: Option<bool>,
}

pub(crate) fn num(x: f64) -> String {
    if x != 0.0 && (x.abs() < 1e-4 || x.abs() >= 1e16) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn cx(z: C64) -> String {
    if z.im < 0.0 || (z.im == 0.0 && z.im.is_sign_negative()) {
        format!("{}-{}i", num(z.re), num(-z.im))
    } else {
        format!("{}+{}i", num(z.re), num(z.im))
    }
}

fn point(z: &DomainPoint) -> String {
    z.coords().iter().map(|c| cx(*c)).collect::<Vec<_>>().join(";")
}

fn to_value<T: Serialize>(v: &T) -> CliResult<Value> {
    serde_json::to_value(v).map_err(|e| CliError::Lab(LabError::from(e)))
}

fn is_disc(space: &SpaceSpec) -> bool {
    matches!(space.factors()[0], Factor::Disc { .. })
}

fn admissible(space: &SpaceSpec, radii: &[f64]) -> Vec<f64> {
    let r = space.admissible_radius();
    radii.iter().copied().filter(|x| *x <= r + 1e-12).collect()
}

fn scaled(order: usize, scale: f64) -> usize {
    ((order as f64) * scale).ceil().max(1.0) as usize
}

/// The named operator, or the only one defined.
fn pick_operator(ctx: &Context, name: &Option<String>) -> CliResult<(String, OperatorSpec)> {
    let r = ctx.resolved;
    let name = match name {
        Some(n) => n.clone(),
        None => match (r.operators.len(), r.symbols.len()) {
            (1, _) => r.operators.keys().next().cloned().expect("one operator"),
            (0, 1) => r.symbols.keys().next().cloned().expect("one symbol"),
            _ => return Err(CliError::Config("name the operator to use in the command's `operator` field".into())),
        },
    };
    Ok((name.clone(), r.operator_or_symbol(&name)?))
}

fn grid_or(ctx: &Context, grid: &Option<GridDef>, default: GridDef) -> CliResult<Vec<DomainPoint>> {
    grid_points(&ctx.resolved.space, grid.as_ref().unwrap_or(&default), 8)
}

pub fn kernel(ctx: &Context) -> CliResult<Outcome> {
    let s = &ctx.resolved.space;
    let radii = match s.factors()[0] {
        Factor::Disc { .. } => vec![0.0, 0.25, 0.5, 0.75],
        Factor::Fock => vec![0.0, 1.0, 2.0, 3.0],
    };
    let pts = grid_or(ctx, &ctx.cfg.kernel.grid, GridDef { radii, angles: Some(4), points: vec![] })?;
    let mut table = Table::new(&["z", "w", "kernel", "kernel_norm_z", "involution", "metric", "sigma_density_z", "lambda_density_z", "kernel_tail_z"]);
    let mut rows = Vec::new();
    for z in &pts {
        let norm = space::kernel_norm(s, z)?;
        let sigma = space::sigma_density(s, z)?;
        let lambda = space::lambda_density(s, z)?;
        let tail = space::kernel_tail(s, z)?;
        for w in &pts {
            let k = space::kernel_eval(s, z, w)?;
            let phi = space::involution(s, z, w)?;
            let d = space::metric(s, z, w)?;
            table.push(vec![point(z), point(w), cx(k), num(norm), point(&phi), num(d), num(sigma), num(lambda), num(tail)]);
            rows.push(json!({
                "z": bergman_lab::io::point_to_json(z),
                "w": bergman_lab::io::point_to_json(w),
                "kernel": bergman_lab::io::Cx::from(k),
                "kernel_norm_z": norm,
                "involution": bergman_lab::io::point_to_json(&phi),
                "metric": d,
                "sigma_density_z": sigma,
                "lambda_density_z": lambda,
                "kernel_tail_z": tail,
            }));
        }
    }
    Ok(Outcome { anchor: "reproducing kernel, involution and invariant metric of the model space", result: json!({ "rows": rows }), table, passed: None })
}

pub fn toeplitz(ctx: &Context) -> CliResult<Outcome> {
    let s = &ctx.resolved.space;
    let (name, spec) = pick_operator(ctx, &ctx.cfg.toeplitz.operator)?;
    let t = spec.assemble(s, ctx.scale)?;
    let m = t.matrix();
    let mut table = Table::new(&["row", "col", "re", "im"]);
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            table.push(vec![r.to_string(), c.to_string(), num(m[(r, c)].re), num(m[(r, c)].im)]);
        }
    }
    let result = json!({
        "operator": name,
        "compact_class": spec.is_compact_class(),
        "norm": t.norm(),
        "singular_values": linalg::singular_values(m),
        "matrix": ComplexArray::from_matrix(s, m),
    });
    Ok(Outcome { anchor: "Toeplitz operator as the compression of a multiplication operator", result, table, passed: None })
}

pub fn berezin(ctx: &Context) -> CliResult<Outcome> {
    let s = &ctx.resolved.space;
    let p = &ctx.cfg.berezin;
    let (name, spec) = pick_operator(ctx, &p.operator)?;
    let radii = match &p.radii {
        Some(r) => r.clone(),
        None if is_disc(s) => admissible(s, &[0.3, 0.5, 0.7, 0.8, 0.9]),
        None => admissible(s, &[1.0, 2.0, 3.0, 4.0, 5.0]),
    };
    let t = spec.assemble(s, ctx.scale)?;
    let prof = berezin_decay_profile(&t, &radii, p.angles.unwrap_or(8), p.threshold.unwrap_or(1e-2))?;
    let mut table = Table::new(&["z", "modulus", "row", "col", "re", "im"]);
    let d = s.component_dim;
    for sample in &prof.samples {
        let z = bergman_lab::io::point_from_json(&sample.z)?;
        let modulus = z.coords().iter().map(|c| c.norm()).fold(0.0, f64::max);
        for (idx, v) in sample.matrix.iter().enumerate() {
            table.push(vec![point(&z), num(modulus), (idx / d).to_string(), (idx % d).to_string(), num(v.re), num(v.im)]);
        }
    }
    let result = json!({
        "operator": name,
        "compact_class": spec.is_compact_class(),
        "classified_compact": prof.decaying,
        "profile": to_value(&prof)?,
    });
    Ok(Outcome { anchor: "vanishing of the Berezin transform at the boundary and compactness", result, table, passed: None })
}

fn rkt_rows(table: &mut Table, r: &RktReport) -> CliResult<()> {
    for v in &r.values {
        let z = bergman_lab::io::point_from_json(&v.z)?;
        table.push(vec![r.quantity.clone(), point(&z), v.index.to_string(), num(v.value)]);
    }
    Ok(())
}

pub fn rkt(ctx: &Context) -> CliResult<Outcome> {
    let s = &ctx.resolved.space;
    let p = &ctx.cfg.rkt;
    let exponent = p.p.unwrap_or(4.0);
    let default = GridDef { radii: if is_disc(s) { vec![0.0, 0.3, 0.6] } else { vec![0.0, 1.0, 2.0] }, angles: Some(4), points: vec![] };
    let grid = grid_or(ctx, &p.grid, default)?;
    if p.symbol.is_none() && p.product.is_none() && p.operator.is_none() {
        return Err(CliError::Config("rkt needs at least one of `symbol`, `product` or `operator`".into()));
    }
    let mut reports: Vec<RktReport> = Vec::new();
    if let Some(name) = &p.symbol {
        let u = ctx.resolved.symbol(name)?;
        let pair = rkt_toeplitz_symbol_check(s, u, exponent, &grid, ctx.scale)?;
        reports.extend([pair.first, pair.second]);
        reports.push(hankel_rkt_check(s, u, exponent, &grid, ctx.scale)?);
    }
    if let Some([f, g]) = &p.product {
        let pair = rkt_product_check(s, ctx.resolved.symbol(f)?, ctx.resolved.symbol(g)?, exponent, &grid, ctx.scale)?;
        reports.extend([pair.first, pair.second]);
    }
    if let Some(name) = &p.operator {
        let t = ctx.resolved.operator_or_symbol(name)?.assemble(s, ctx.scale)?;
        let pair = rkt_boundedness_check(&t, &t.adjoint(), exponent, &grid, ctx.scale)?;
        reports.extend([pair.first, pair.second]);
    }
    let mut table = Table::new(&["quantity", "z", "index", "value"]);
    for r in &reports {
        rkt_rows(&mut table, r)?;
    }
    let sups: Vec<Value> = reports.iter().map(|r| json!({ "quantity": r.quantity, "sup": r.sup, "admissible": r.admissible })).collect();
    let result = json!({ "p": exponent, "summary": sups, "reports": to_value(&reports)? });
    Ok(Outcome { anchor: "boundedness from uniform bounds on translated kernels", result, table, passed: None })
}

pub fn essnorm(ctx: &Context) -> CliResult<Outcome> {
    let s = &ctx.resolved.space;
    let p = &ctx.cfg.essnorm;
    let (name, spec) = pick_operator(ctx, &p.operator)?;
    let shells = p.shells.clone().unwrap_or_else(|| default_shells(s));
    let probes = default_probes(s, p.random_probes.unwrap_or(8), ctx.seed);
    let t = spec.assemble(s, ctx.scale)?;
    let r = essential_norm_estimate(&t, &shells, p.angles.unwrap_or(8), &probes)?;
    let threshold = p.threshold.unwrap_or(0.25);
    let mut table = Table::new(&["kind", "index", "radius", "value"]);
    for (i, (rad, v)) in r.shells.iter().zip(&r.shell_values).enumerate() {
        table.push(vec!["shell".into(), i.to_string(), num(*rad), num(*v)]);
    }
    let outer = *r.shells.last().expect("nonempty shells");
    for (i, v) in r.outer_probe_values.iter().enumerate() {
        table.push(vec!["outer_probe".into(), i.to_string(), num(outer), num(*v)]);
    }
    let result = json!({
        "operator": name,
        "compact_class": spec.is_compact_class(),
        "threshold": threshold,
        "classified_compact": r.estimate < threshold,
        "estimate": to_value(&r)?,
    });
    Ok(Outcome { anchor: "essential norm through translates of the operator", result, table, passed: None })
}

pub fn rf(ctx: &Context) -> CliResult<Outcome> {
    let s = &ctx.resolved.space;
    let p = &ctx.cfg.rf;
    let grid = match &p.grid {
        Some(g) => grid_points(s, g, 8)?,
        None => default_z_grid(s).into_iter().filter(|z| s.check_admissible(z).is_ok()).collect(),
    };
    let base = RfResolution::default();
    let res = RfResolution { radial: p.radial.unwrap_or(base.radial), angular: p.angular.unwrap_or(base.angular) }.scaled(ctx.scale);
    let rep = rudin_forelli(s, p.r.unwrap_or(3.0), p.s.unwrap_or(3.0), &grid, res)?;
    let mut table = Table::new(&["z", "upper", "quasi", "ratio"]);
    for pt in &rep.points {
        let z = bergman_lab::io::point_from_json(&pt.z)?;
        table.push(vec![point(&z), num(pt.upper), num(pt.quasi), num(pt.ratio)]);
    }
    Ok(Outcome { anchor: "Rudin-Forelli estimates for powers of the normalised kernel", result: to_value(&rep)?, table, passed: None })
}

pub fn schur(ctx: &Context) -> CliResult<Outcome> {
    let p = &ctx.cfg.schur;
    let path = p.kernel_file.as_ref().ok_or_else(|| CliError::Config("schur needs `kernel_file`".into()))?;
    let text = std::fs::read_to_string(ctx.base.join(path)).map_err(LabError::from)?;
    let sample = parse_kernel_file(&text)?;
    let exponent = p.p.unwrap_or(2.0);
    let b = schur_test(&sample, exponent)?;
    let norm = sample.discretized_norm();
    // the discretised L² norm is the quantity the bound controls only at p = 2
    let holds = (exponent == 2.0).then_some(norm <= b.bound * (1.0 + 1e-12) + 1e-300);
    let mut table = Table::new(&["p", "c1", "c2", "bound", "discretized_norm"]);
    table.push(vec![num(exponent), num(b.c1), num(b.c2), num(b.bound), num(norm)]);
    let result = json!({ "bound": to_value(&b)?, "discretized_norm": norm, "bound_holds": holds });
    Ok(Outcome { anchor: "matrix-valued Schur test", result, table, passed: holds })
}

fn bounds_cells(b: &FactorCell) -> [String; 5] {
    match b {
        FactorCell::Annulus { s_lo, s_hi, theta_lo, theta_hi } => ["annulus".into(), num(*s_lo), num(*s_hi), num(*theta_lo), num(*theta_hi)],
        FactorCell::Square { x_lo, x_hi, y_lo, y_hi } => ["square".into(), num(*x_lo), num(*x_hi), num(*y_lo), num(*y_hi)],
    }
}

fn default_radii(cfg: &Option<Vec<f64>>) -> Vec<f64> {
    cfg.clone().unwrap_or_else(|| vec![0.5, 1.0, 2.0, 4.0])
}

pub fn covering(ctx: &Context) -> CliResult<Outcome> {
    let s = &ctx.resolved.space;
    let radii = default_radii(&ctx.cfg.covering.radii);
    let rule = covering_rule(s, ctx.scale)?;
    let mut table = Table::new(&["r", "cell", "factor", "shape", "lo1", "hi1", "lo2", "hi2", "nodes", "enlarged_nodes", "node_diameter"]);
    let mut per_r = Vec::new();
    let mut all_ok = true;
    for r in &radii {
        let cov = build_covering_on(&rule, *r)?;
        let diam = cov.max_node_diameter();
        let partition = cov.is_partition();
        let diam_ok = diam <= 4.0 * r + 1e-12;
        all_ok &= partition && diam_ok;
        for c in &cov.cells {
            for (f, b) in c.bounds.iter().enumerate() {
                let [shape, a, bb, cc, dd] = bounds_cells(b);
                table.push(vec![
                    num(*r),
                    c.id.to_string(),
                    f.to_string(),
                    shape,
                    a,
                    bb,
                    cc,
                    dd,
                    c.nodes.len().to_string(),
                    c.enlarged.len().to_string(),
                    num(c.node_diameter),
                ]);
            }
        }
        per_r.push(json!({
            "r": r,
            "cells": cov.cells.len(),
            "partition": partition,
            "max_node_diameter": diam,
            "diameter_within_4r": diam_ok,
            "measured_multiplicity": cov.measured_multiplicity,
            "multiplicity_histogram": cov.multiplicity_histogram(),
        }));
    }
    let mults: Vec<u64> = per_r.iter().map(|v| v["measured_multiplicity"].as_u64().unwrap_or(0)).collect();
    let result = json!({
        "rule_nodes": rule.len(),
        "coverings": per_r,
        "multiplicity_constant": mults.windows(2).all(|w| w[0] == w[1]),
    });
    Ok(Outcome { anchor: "disjoint covering with bounded overlap of enlargements", result, table, passed: Some(all_ok) })
}

pub fn localize(ctx: &Context) -> CliResult<Outcome> {
    let s = &ctx.resolved.space;
    let (name, spec) = pick_operator(ctx, &ctx.cfg.localize.operator)?;
    let radii = default_radii(&ctx.cfg.localize.radii);
    let t = spec.assemble(s, ctx.scale)?;
    let rule = covering_rule(s, ctx.scale)?;
    let mut table = Table::new(&["r", "cells", "multiplicity", "error"]);
    let mut errors = Vec::new();
    for r in &radii {
        let cov = build_covering_on(&rule, *r)?;
        let e = localization_error(&t, &cov)?;
        table.push(vec![num(*r), cov.cells.len().to_string(), cov.measured_multiplicity.to_string(), num(e)]);
        errors.push(e);
    }
    let mut order: Vec<usize> = (0..radii.len()).collect();
    order.sort_by(|a, b| radii[*a].total_cmp(&radii[*b]));
    let non_increasing = order.windows(2).all(|w| errors[w[1]] <= errors[w[0]] * (1.0 + 1e-9) + 1e-12);
    let result = json!({ "operator": name, "radii": radii, "errors": errors, "non_increasing": non_increasing });
    Ok(Outcome { anchor: "localisation of an operator over a covering", result, table, passed: Some(non_increasing) })
}

/// Seeded random polynomial with every component of degree at most `degree`.
pub fn random_polynomial(space: &SpaceSpec, degree: usize, rng: &mut ChaCha8Rng) -> CliResult<CoeffFunction> {
    let mut f = CoeffFunction::zeros(space);
    for m in 0..=degree.min(space.n_modes() - 1) {
        for k in 0..space.component_dim {
            f.set(m, k, C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        }
    }
    Ok(f)
}

pub fn rank1(ctx: &Context) -> CliResult<Outcome> {
    let s = &ctx.resolved.space;
    let p = &ctx.cfg.rank1;
    let degree = p.degree.unwrap_or(4);
    let trials = p.trials.unwrap_or(1);
    let tol = p.tolerance.unwrap_or(1e-6);
    if s.n_vars() != 1 {
        return Err(CliError::Config("rank1 runs on one-variable spaces".into()));
    }
    if trials == 0 || trials > 10_000 {
        return Err(CliError::Config("rank1 trials must lie in 1..=10000".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut table = Table::new(&["trial", "degree", "deviation"]);
    let mut devs = Vec::new();
    for i in 0..trials {
        let f = random_polynomial(s, degree, &mut rng)?;
        let g = random_polynomial(s, degree, &mut rng)?;
        let lhs = rank_one_toeplitz_sum(s, &f, &g)?;
        let dev = linalg::spectral_norm(&(lhs.matrix() - rank_one(&f, &g)?.matrix()));
        table.push(vec![i.to_string(), degree.to_string(), num(dev)]);
        devs.push(dev);
    }
    let max = devs.iter().copied().fold(0.0, f64::max);
    let passed = max <= tol;
    let result = json!({ "degree": degree, "trials": trials, "tolerance": tol, "deviations": devs, "max_deviation": max });
    Ok(Outcome { anchor: "rank-one operators as sums of products of Toeplitz operators", result, table, passed: Some(passed) })
}

pub fn verify_axioms_cmd(ctx: &Context) -> CliResult<Outcome> {
    let s = &ctx.resolved.space;
    let base = ctx.cfg.axioms.clone().unwrap_or_default();
    let settings = AxiomSettings {
        radial_order: scaled(base.radial_order, ctx.scale),
        angular_order: scaled(base.angular_order, ctx.scale),
        seed: ctx.seed,
        ..base
    };
    let r = verify_axioms(s, &settings)?;
    let mut table = Table::new(&["check", "anchor", "value", "tolerance", "samples", "passed"]);
    for c in &r.checks {
        table.push(vec![c.name.clone(), c.anchor.clone(), num(c.value), num(c.tolerance), c.samples.to_string(), c.passed.to_string()]);
    }
    Ok(Outcome {
        anchor: "strong-space axioms: involution, reproducing kernel, metric invariance",
        result: json!({ "settings": to_value(&settings)?, "report": to_value(&r)? }),
        table,
        passed: Some(r.passed),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_round_trips() {
        for x in [0.0, 1.5, -2.25e-9, 3.0e20, 1.0 / 3.0] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(cx(C64::new(1.0, -2.0)), "1-2i");
        assert_eq!(cx(C64::new(0.5, 0.0)), "0.5+0i");
    }
}
