//! Metric coverings of Ω by small disjoint cells with bounded-overlap
//! enlargements, and the localisation error of an operator against one.
//!
//! Cells tile all of Ω (hyperbolic annular sectors on disc factors, square
//! tiles for Fock) and are materialised only when they contain a node of the
//! supporting quadrature rule. All set operations happen at those nodes.

mod localize;

pub use localize::localization_error;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};

use crate::error::{LabError, Result};
use crate::quadrature::gauss::MAX_LAGUERRE_ORDER;
use crate::quadrature::QuadratureRule;
use crate::space::{Factor, SpaceSpec, C64};

/// Cell of one complex factor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum FactorCell {
    /// `s_lo ≤ 𝔡(0, z) < s_hi`, `theta_lo ≤ arg z < theta_hi`.
    Annulus { s_lo: f64, s_hi: f64, theta_lo: f64, theta_hi: f64 },
    /// `x_lo ≤ Re z < x_hi`, `y_lo ≤ Im z < y_hi`.
    Square { x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub id: usize,
    pub bounds: Vec<FactorCell>,
    /// Rule nodes in the cell.
    pub nodes: Vec<usize>,
    /// Rule nodes within distance `r` of a node of the cell.
    pub enlarged: Vec<usize>,
    /// Largest distance between two nodes of the cell.
    pub node_diameter: f64,
}

#[derive(Clone, Debug)]
pub struct Covering {
    rule: QuadratureRule,
    pub r: f64,
    pub cells: Vec<Cell>,
    /// Cell index of every node.
    pub node_cell: Vec<usize>,
    /// Number of enlargements containing each node.
    pub node_multiplicity: Vec<usize>,
    pub measured_multiplicity: usize,
}

/// Per-factor integer key locating the cell of a coordinate.
type FactorKey = (i64, i64);

/// Smallest number of sectors keeping the angular spread of an annulus with
/// outer pseudo-hyperbolic radius `rho` within distance `2r`.
fn sector_count(rho: f64, r: f64) -> i64 {
    let limit = (2.0 * r).tanh();
    let chord = |n: i64| {
        let delta = (2.0 * PI / n as f64).min(PI);
        let num = 2.0 * rho * (0.5 * delta).sin();
        let den = (C64::new(1.0, 0.0) - C64::from_polar(rho * rho, delta)).norm();
        num / den
    };
    let mut hi = 2;
    while chord(hi) > limit {
        hi *= 2;
        if hi > 1 << 40 {
            return hi;
        }
    }
    let mut lo = hi / 2;
    if lo < 1 {
        lo = 1;
    }
    // chord(lo) > limit or lo is the trivial count
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if chord(mid) <= limit {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if chord(lo) <= limit {
        lo
    } else {
        hi
    }
}

fn factor_key(factor: Factor, z: C64, r: f64) -> FactorKey {
    match factor {
        Factor::Disc { .. } => {
            let s = factor.radial_metric(z.norm());
            let j = (s / (2.0 * r)).floor() as i64;
            if j == 0 {
                return (0, 0);
            }
            let n = sector_count((2.0 * r * (j + 1) as f64).tanh(), r);
            let theta = z.arg().rem_euclid(2.0 * PI);
            let k = ((theta / (2.0 * PI) * n as f64).floor() as i64).min(n - 1);
            (j, k)
        }
        Factor::Fock => {
            let a = 2.0 * SQRT_2 * r;
            ((z.re / a).floor() as i64, (z.im / a).floor() as i64)
        }
    }
}

fn factor_bounds(factor: Factor, key: FactorKey, r: f64) -> FactorCell {
    match factor {
        Factor::Disc { .. } => {
            let (j, k) = key;
            let (s_lo, s_hi) = (2.0 * r * j as f64, 2.0 * r * (j + 1) as f64);
            if j == 0 {
                return FactorCell::Annulus { s_lo, s_hi, theta_lo: 0.0, theta_hi: 2.0 * PI };
            }
            let n = sector_count(s_hi.tanh(), r) as f64;
            FactorCell::Annulus { s_lo, s_hi, theta_lo: 2.0 * PI * k as f64 / n, theta_hi: 2.0 * PI * (k + 1) as f64 / n }
        }
        Factor::Fock => {
            let a = 2.0 * SQRT_2 * r;
            let (i, j) = key;
            FactorCell::Square { x_lo: a * i as f64, x_hi: a * (i + 1) as f64, y_lo: a * j as f64, y_hi: a * (j + 1) as f64 }
        }
    }
}

/// `𝔡(z, w) ≤ r` without inverse hyperbolic functions.
#[inline]
fn within(factor: Factor, z: C64, w: C64, r: f64, tanh_r: f64) -> bool {
    match factor {
        Factor::Disc { .. } => (z - w).norm_sqr() <= tanh_r * tanh_r * (C64::new(1.0, 0.0) - z.conj() * w).norm_sqr(),
        Factor::Fock => (z - w).norm_sqr() <= r * r,
    }
}

/// Default supporting rule: fine enough for exact Toeplitz masks at order `N`.
pub fn covering_rule(space: &SpaceSpec, scale: f64) -> Result<QuadratureRule> {
    let n = space.truncation_order;
    let scale = if scale.is_finite() && scale > 0.0 { scale } else { 1.0 };
    let (radial, angular) = match space.n_vars() {
        1 => ((n / 2 + 8).max(40), (2 * n).next_power_of_two().max(64)),
        _ => (n / 2 + 4, (2 * n).next_power_of_two().max(16)),
    };
    let mut radial = ((radial as f64) * scale).ceil() as usize;
    if let Factor::Fock = space.factors()[0] {
        radial = radial.min(MAX_LAGUERRE_ORDER);
    }
    QuadratureRule::new(space, radial, ((angular as f64) * scale).ceil() as usize, &[])
}

/// Covering at scale `r` on the default rule.
pub fn build_covering(space: &SpaceSpec, r: f64) -> Result<Covering> {
    build_covering_on(&covering_rule(space, 1.0)?, r)
}

/// Largest node count for which the pairwise enlargement search is attempted.
pub const MAX_COVERING_NODES: usize = 1 << 16;

pub fn build_covering_on(rule: &QuadratureRule, r: f64) -> Result<Covering> {
    if !r.is_finite() || r <= 0.0 {
        return Err(LabError::param(format!("covering radius r = {r} must be positive")));
    }
    if rule.len() > MAX_COVERING_NODES {
        return Err(LabError::param(format!("{} nodes exceed the covering limit {MAX_COVERING_NODES}", rule.len())));
    }
    let factors = rule.space().factors();
    let nodes = rule.nodes();
    let keys: Vec<Vec<FactorKey>> =
        nodes.iter().map(|z| factors.iter().zip(z.coords()).map(|(f, c)| factor_key(*f, *c, r)).collect()).collect();
    // cell ids follow key order, so they do not depend on node order
    let mut index: BTreeMap<Vec<FactorKey>, usize> = keys.iter().map(|k| (k.clone(), 0)).collect();
    index.values_mut().enumerate().for_each(|(i, v)| *v = i);
    let cell_of = |k: &Vec<FactorKey>| index[k];
    let node_cell: Vec<usize> = keys.iter().map(cell_of).collect();
    let mut cells: Vec<Cell> = index
        .keys()
        .enumerate()
        .map(|(id, k)| Cell {
            id,
            bounds: factors.iter().zip(k).map(|(f, fk)| factor_bounds(*f, *fk, r)).collect(),
            nodes: vec![],
            enlarged: vec![],
            node_diameter: 0.0,
        })
        .collect();
    for (i, c) in node_cell.iter().enumerate() {
        cells[*c].nodes.push(i);
    }

    let tanh_r = r.tanh();
    let close = |a: usize, b: usize| {
        factors.iter().zip(nodes[a].coords().iter().zip(nodes[b].coords())).all(|(f, (x, y))| within(*f, *x, *y, r, tanh_r))
    };
    // cells whose enlargement contains each node
    let touching: Vec<Vec<usize>> = (0..nodes.len())
        .into_par_iter()
        .map(|a| {
            let mut hit: Vec<usize> = (0..nodes.len()).filter(|&b| close(a, b)).map(|b| node_cell[b]).collect();
            hit.sort_unstable();
            hit.dedup();
            hit
        })
        .collect();
    for (a, hit) in touching.iter().enumerate() {
        for c in hit {
            cells[*c].enlarged.push(a);
        }
    }
    let node_multiplicity: Vec<usize> = touching.iter().map(Vec::len).collect();
    let measured_multiplicity = node_multiplicity.iter().copied().max().unwrap_or(0);

    let metric = |a: usize, b: usize| crate::space::metric_unchecked(&factors, &nodes[a], &nodes[b]);
    cells.par_iter_mut().for_each(|cell| {
        let ns = &cell.nodes;
        let mut diam: f64 = 0.0;
        for (i, a) in ns.iter().enumerate() {
            for b in &ns[i + 1..] {
                diam = diam.max(metric(*a, *b));
            }
        }
        cell.node_diameter = diam;
    });
    Ok(Covering { rule: rule.clone(), r, cells, node_cell, node_multiplicity, measured_multiplicity })
}

impl Covering {
    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn space(&self) -> &SpaceSpec {
        self.rule.space()
    }

    pub fn max_node_diameter(&self) -> f64 {
        self.cells.iter().map(|c| c.node_diameter).fold(0.0, f64::max)
    }

    /// Every node lies in exactly one cell.
    pub fn is_partition(&self) -> bool {
        let mut count = vec![0usize; self.node_cell.len()];
        for c in &self.cells {
            for n in &c.nodes {
                count[*n] += 1;
            }
        }
        count.iter().all(|&c| c == 1)
    }

    /// Histogram of node multiplicities: entry `m` counts nodes in exactly `m` enlargements.
    pub fn multiplicity_histogram(&self) -> Vec<usize> {
        let mut h = vec![0usize; self.measured_multiplicity + 1];
        for m in &self.node_multiplicity {
            h[*m] += 1;
        }
        h
    }

    /// Degenerate covering: one cell holding every node, enlarged to all nodes.
    pub fn single_cell(rule: &QuadratureRule) -> Self {
        let all: Vec<usize> = (0..rule.len()).collect();
        let bounds = rule
            .space()
            .factors()
            .iter()
            .map(|f| match f {
                Factor::Disc { .. } => FactorCell::Annulus { s_lo: 0.0, s_hi: f64::INFINITY, theta_lo: 0.0, theta_hi: 2.0 * PI },
                Factor::Fock => FactorCell::Square { x_lo: f64::NEG_INFINITY, x_hi: f64::INFINITY, y_lo: f64::NEG_INFINITY, y_hi: f64::INFINITY },
            })
            .collect();
        Covering {
            rule: rule.clone(),
            r: f64::INFINITY,
            cells: vec![Cell { id: 0, bounds, nodes: all.clone(), enlarged: all, node_diameter: f64::NAN }],
            node_cell: vec![0; rule.len()],
            node_multiplicity: vec![1; rule.len()],
            measured_multiplicity: 1,
        }
    }
}
