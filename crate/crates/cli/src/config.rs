//! Experiment configuration: one JSON document describing the space, named
//! symbols and operators, and per-command parameters.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use bergman_lab::axioms::AxiomSettings;
use bergman_lab::coeff::CoeffFunction;
use bergman_lab::io::{point_from_json, Cx, ComplexArray};
use bergman_lab::operator::{OperatorMatrix, OperatorSpec};
use bergman_lab::symbol::{parse_scalar, MatrixSymbol};
use bergman_lab::{DomainPoint, LabError, SpaceSpec, C64};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Largest accepted config document.
pub const MAX_CONFIG_BYTES: usize = 4 << 20;
const MAX_OPERATOR_DEPTH: usize = 32;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryDef {
    pub row: usize,
    pub col: usize,
    pub expr: String,
}

/// Either `expr` (times the identity) or a list of entries, optionally
/// composed with involutions `u ∘ φ_{a₁} ∘ ⋯`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolDef {
    #[serde(default)]
    pub expr: Option<String>,
    #[serde(default)]
    pub entries: Vec<EntryDef>,
    #[serde(default)]
    pub compose: Vec<Vec<Cx>>,
}

/// Sparse coefficient `c · e_m ⊗ e_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffDef {
    pub mode: usize,
    pub component: usize,
    pub value: Cx,
}

/// Operators refer to symbols and to each other by name. A bare symbol name
/// also works wherever an operator name is expected and means its Toeplitz
/// operator; `identity` is always defined.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorDef {
    Identity,
    Toeplitz { symbol: String },
    /// Left-to-right product of named operators.
    Product(Vec<String>),
    Sum(Vec<String>),
    Scaled { factor: Cx, of: String },
    Adjoint(String),
    RankOne { f: Vec<CoeffDef>, g: Vec<CoeffDef> },
    /// Operator JSON as written by the `toeplitz` command.
    File { path: PathBuf },
}

/// Points `ρ e^{2πij/angles}` for every radius, or an explicit list.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridDef {
    #[serde(default)]
    pub radii: Vec<f64>,
    #[serde(default)]
    pub angles: Option<usize>,
    #[serde(default)]
    pub points: Vec<Vec<Cx>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelParams {
    #[serde(default)]
    pub grid: Option<GridDef>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToeplitzParams {
    #[serde(default)]
    pub operator: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BerezinParams {
    #[serde(default)]
    pub operator: Option<String>,
    #[serde(default)]
    pub radii: Option<Vec<f64>>,
    #[serde(default)]
    pub angles: Option<usize>,
    #[serde(default)]
    pub threshold: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RktParams {
    /// Symbol for the Toeplitz and Hankel checks.
    #[serde(default)]
    pub symbol: Option<String>,
    /// Two analytic symbols for the product check.
    #[serde(default)]
    pub product: Option<[String; 2]>,
    /// Operator for the generic translate check.
    #[serde(default)]
    pub operator: Option<String>,
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub grid: Option<GridDef>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EssNormParams {
    #[serde(default)]
    pub operator: Option<String>,
    #[serde(default)]
    pub shells: Option<Vec<f64>>,
    #[serde(default)]
    pub angles: Option<usize>,
    #[serde(default)]
    pub random_probes: Option<usize>,
    #[serde(default)]
    pub threshold: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RfParams {
    #[serde(default)]
    pub r: Option<f64>,
    #[serde(default)]
    pub s: Option<f64>,
    #[serde(default)]
    pub grid: Option<GridDef>,
    #[serde(default)]
    pub radial: Option<usize>,
    #[serde(default)]
    pub angular: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchurParams {
    #[serde(default)]
    pub kernel_file: Option<PathBuf>,
    #[serde(default)]
    pub p: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoveringParams {
    #[serde(default)]
    pub radii: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalizeParams {
    #[serde(default)]
    pub operator: Option<String>,
    #[serde(default)]
    pub radii: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankOneParams {
    #[serde(default)]
    pub degree: Option<usize>,
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default)]
    pub tolerance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub space: SpaceSpec,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub resolution_scale: Option<f64>,
    #[serde(default)]
    pub symbols: BTreeMap<String, SymbolDef>,
    #[serde(default)]
    pub operators: BTreeMap<String, OperatorDef>,
    #[serde(default)]
    pub kernel: KernelParams,
    #[serde(default)]
    pub toeplitz: ToeplitzParams,
    #[serde(default)]
    pub berezin: BerezinParams,
    #[serde(default)]
    pub rkt: RktParams,
    #[serde(default)]
    pub essnorm: EssNormParams,
    #[serde(default)]
    pub rf: RfParams,
    #[serde(default)]
    pub schur: SchurParams,
    #[serde(default)]
    pub covering: CoveringParams,
    #[serde(default)]
    pub localize: LocalizeParams,
    #[serde(default)]
    pub rank1: RankOneParams,
    #[serde(default)]
    pub axioms: Option<AxiomSettings>,
}

impl ExperimentConfig {
    /// A config with only the space block set.
    pub fn for_space(space: SpaceSpec) -> Self {
        serde_json::from_value(serde_json::json!({ "space": space })).expect("space block round-trips")
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        if text.len() > MAX_CONFIG_BYTES {
            return Err(CliError::Config(format!("config exceeds {MAX_CONFIG_BYTES} bytes")));
        }
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(LabError::from)?;
        cfg.space.validate()?;
        Ok(cfg)
    }
}

/// Config with every name resolved and every symbol parsed.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub space: SpaceSpec,
    pub symbols: BTreeMap<String, MatrixSymbol>,
    pub operators: BTreeMap<String, OperatorSpec>,
}

fn parse_symbol(space: &SpaceSpec, name: &str, def: &SymbolDef) -> CliResult<MatrixSymbol> {
    let ctx = |e: LabError| CliError::Config(format!("symbol `{name}`: {e}"));
    let nv = space.n_vars();
    let mut u = match (&def.expr, def.entries.is_empty()) {
        (Some(e), true) => MatrixSymbol::scalar_identity(space, parse_scalar(e, nv).map_err(ctx)?),
        (None, false) => {
            let mut u = MatrixSymbol::zero(space);
            for e in &def.entries {
                let s = parse_scalar(&e.expr, nv).map_err(ctx)?;
                let prev = u.entry(e.row, e.col).cloned();
                let s = match prev {
                    Some(p) => p.add(&s),
                    None => s,
                };
                u.set(e.row, e.col, s).map_err(ctx)?;
            }
            u
        }
        _ => return Err(CliError::Config(format!("symbol `{name}` needs exactly one of `expr` or `entries`"))),
    };
    for a in &def.compose {
        u = u.compose_involution(&point_from_json(a).map_err(ctx)?);
    }
    u.check_space(space).map_err(ctx)?;
    Ok(u)
}

fn coeffs(space: &SpaceSpec, list: &[CoeffDef]) -> CliResult<CoeffFunction> {
    let mut f = CoeffFunction::zeros(space);
    for c in list {
        if c.mode >= space.n_modes() || c.component >= space.component_dim {
            return Err(CliError::Config(format!("coefficient ({}, {}) outside the truncated space", c.mode, c.component)));
        }
        let v: C64 = c.value.into();
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(CliError::Config("non-finite coefficient".into()));
        }
        f.set(c.mode, c.component, f.get(c.mode, c.component) + v);
    }
    Ok(f)
}

struct OpResolver<'a> {
    cfg: &'a ExperimentConfig,
    base: &'a Path,
    symbols: &'a BTreeMap<String, MatrixSymbol>,
}

impl OpResolver<'_> {
    fn name(&self, name: &str, depth: usize) -> CliResult<OperatorSpec> {
        if depth > MAX_OPERATOR_DEPTH {
            return Err(CliError::Config(format!("operator `{name}` nests deeper than {MAX_OPERATOR_DEPTH} (cycle?)")));
        }
        if let Some(def) = self.cfg.operators.get(name) {
            return self.def(def, depth + 1);
        }
        if let Some(u) = self.symbols.get(name) {
            return Ok(OperatorSpec::Toeplitz(u.clone()));
        }
        if name == "identity" {
            return Ok(OperatorSpec::Identity);
        }
        Err(CliError::Config(format!("undefined operator or symbol `{name}`")))
    }

    fn def(&self, def: &OperatorDef, depth: usize) -> CliResult<OperatorSpec> {
        let space = &self.cfg.space;
        let list = |of: &[String]| -> CliResult<Vec<OperatorSpec>> {
            if of.is_empty() {
                return Err(CliError::Config("empty operator list".into()));
            }
            of.iter().map(|n| self.name(n, depth)).collect()
        };
        Ok(match def {
            OperatorDef::Identity => OperatorSpec::Identity,
            OperatorDef::Toeplitz { symbol } => OperatorSpec::Toeplitz(
                self.symbols.get(symbol).cloned().ok_or_else(|| CliError::Config(format!("undefined symbol `{symbol}`")))?,
            ),
            OperatorDef::Product(of) => OperatorSpec::Product(list(of)?),
            OperatorDef::Sum(of) => OperatorSpec::Sum(list(of)?),
            OperatorDef::Scaled { factor, of } => OperatorSpec::Scaled((*factor).into(), Box::new(self.name(of, depth)?)),
            OperatorDef::Adjoint(of) => OperatorSpec::Adjoint(Box::new(self.name(of, depth)?)),
            OperatorDef::RankOne { f, g } => OperatorSpec::RankOne(coeffs(space, f)?, coeffs(space, g)?),
            OperatorDef::File { path } => {
                let text = std::fs::read_to_string(self.base.join(path)).map_err(LabError::from)?;
                let arr: ComplexArray = serde_json::from_str(&text).map_err(LabError::from)?;
                let m = OperatorMatrix::from_json(&arr)?;
                if m.space().kind != space.kind || m.space().component_dim != space.component_dim {
                    return Err(CliError::Config(format!("operator file {} belongs to a different space", path.display())));
                }
                OperatorSpec::Matrix(m)
            }
        })
    }
}

/// Parses every symbol and resolves every operator, relative paths against `base`.
pub fn resolve(cfg: &ExperimentConfig, base: &Path) -> CliResult<Resolved> {
    let space = cfg.space.clone();
    space.validate()?;
    let symbols: BTreeMap<String, MatrixSymbol> =
        cfg.symbols.iter().map(|(n, d)| Ok((n.clone(), parse_symbol(&space, n, d)?))).collect::<CliResult<_>>()?;
    let r = OpResolver { cfg, base, symbols: &symbols };
    let operators = cfg.operators.keys().map(|n| Ok((n.clone(), r.name(n, 0)?))).collect::<CliResult<_>>()?;
    let resolved = Resolved { space, symbols, operators };
    check_references(cfg, &resolved)?;
    Ok(resolved)
}

/// Every name and grid in every command block, whichever command runs.
fn check_references(cfg: &ExperimentConfig, r: &Resolved) -> CliResult<()> {
    let ops = [&cfg.toeplitz.operator, &cfg.berezin.operator, &cfg.essnorm.operator, &cfg.localize.operator, &cfg.rkt.operator];
    for name in ops.into_iter().flatten() {
        r.operator_or_symbol(name)?;
    }
    let syms = cfg.rkt.symbol.iter().chain(cfg.rkt.product.iter().flatten());
    for name in syms {
        r.symbol(name)?;
    }
    for grid in [&cfg.kernel.grid, &cfg.rkt.grid, &cfg.rf.grid].into_iter().flatten() {
        grid_points(&r.space, grid, 1)?;
    }
    Ok(())
}

impl Resolved {
    pub fn operator(&self, name: &str) -> CliResult<&OperatorSpec> {
        self.operators.get(name).ok_or_else(|| CliError::Config(format!("undefined operator `{name}`")))
    }

    /// Operator by name, falling back to a symbol's Toeplitz operator or the identity.
    pub fn operator_or_symbol(&self, name: &str) -> CliResult<OperatorSpec> {
        if let Some(op) = self.operators.get(name) {
            return Ok(op.clone());
        }
        if let Some(u) = self.symbols.get(name) {
            return Ok(OperatorSpec::Toeplitz(u.clone()));
        }
        if name == "identity" {
            return Ok(OperatorSpec::Identity);
        }
        Err(CliError::Config(format!("undefined operator or symbol `{name}`")))
    }

    pub fn symbol(&self, name: &str) -> CliResult<&MatrixSymbol> {
        self.symbols.get(name).ok_or_else(|| CliError::Config(format!("undefined symbol `{name}`")))
    }
}

/// Expands a grid, checking every point against the space.
pub fn grid_points(space: &SpaceSpec, grid: &GridDef, default_angles: usize) -> CliResult<Vec<DomainPoint>> {
    let mut out = Vec::new();
    for p in &grid.points {
        let z = point_from_json(p)?;
        space.check_point(&z)?;
        out.push(z);
    }
    let angles = grid.angles.unwrap_or(default_angles);
    if !grid.radii.is_empty() && angles == 0 {
        return Err(CliError::Config("grid angles must be positive".into()));
    }
    for r in &grid.radii {
        if !r.is_finite() || *r < 0.0 {
            return Err(CliError::Config(format!("grid radius {r} must be finite and nonnegative")));
        }
        for z in bergman_lab::rkt::shell_points(space, *r, angles) {
            space.check_point(&z)?;
            out.push(z);
        }
    }
    if out.is_empty() {
        return Err(CliError::Config("grid has no points".into()));
    }
    Ok(out)
}
