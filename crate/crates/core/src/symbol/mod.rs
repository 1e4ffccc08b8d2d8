//! Matrix-valued symbols `u: Ω → L(ℂ^d)`.
//!
//! Each entry is a finite sum of terms `c · z^a · z̄^b · 1_{B₁} ⋯ 1_{B_j}`
//! where the `B` are metric or Euclidean balls. A symbol may also carry a
//! chain of involutions it has been composed with, so that `u ∘ φ_z` is
//! evaluated exactly rather than re-expanded.

mod parse;

use nalgebra::DMatrix;
use std::collections::BTreeMap;

pub use parse::{parse_scalar, MAX_DEPTH, MAX_EXPONENT, MAX_INPUT_LEN, MAX_TERMS};

use crate::error::{LabError, Result};
use crate::space::{metric_unchecked, DomainPoint, Factor, SpaceSpec, C64};

/// A ball in Ω, either in the metric `𝔡` or in the Euclidean norm of the coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ball {
    pub center: DomainPoint,
    pub radius: f64,
    pub metric: bool,
}

impl Ball {
    fn key(&self) -> Vec<u64> {
        let mut k = vec![self.metric as u64, self.radius.to_bits()];
        for c in self.center.coords() {
            k.push(c.re.to_bits());
            k.push(c.im.to_bits());
        }
        k
    }

    pub fn contains(&self, factors: &[Factor], w: &DomainPoint) -> bool {
        if self.metric {
            metric_unchecked(factors, &self.center, w) < self.radius
        } else {
            let d2: f64 = self.center.coords().iter().zip(w.coords()).map(|(a, b)| (a - b).norm_sqr()).sum();
            d2 < self.radius * self.radius
        }
    }
}

/// `coeff · z^z_pow · z̄^zbar_pow · Π 1_balls` (two exponents per term; the second is unused in one variable).
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coeff: C64,
    pub z_pow: [u32; 2],
    pub zbar_pow: [u32; 2],
    pub balls: Vec<Ball>,
}

type TermKey = ([u32; 2], [u32; 2], Vec<Vec<u64>>);

impl Term {
    fn key(&self) -> TermKey {
        (self.z_pow, self.zbar_pow, self.balls.iter().map(Ball::key).collect())
    }

    fn eval(&self, factors: &[Factor], w: &DomainPoint) -> C64 {
        if self.balls.iter().any(|b| !b.contains(factors, w)) {
            return C64::new(0.0, 0.0);
        }
        let mut v = self.coeff;
        for (i, c) in w.coords().iter().enumerate() {
            if self.z_pow[i] > 0 {
                v *= c.powu(self.z_pow[i]);
            }
            if self.zbar_pow[i] > 0 {
                v *= c.conj().powu(self.zbar_pow[i]);
            }
        }
        v
    }

    fn mul(&self, other: &Term) -> Term {
        let mut balls = self.balls.clone();
        for b in &other.balls {
            if !balls.iter().any(|x| x.key() == b.key()) {
                balls.push(*b);
            }
        }
        balls.sort_by_key(|b| b.key());
        Term {
            coeff: self.coeff * other.coeff,
            z_pow: [self.z_pow[0] + other.z_pow[0], self.z_pow[1] + other.z_pow[1]],
            zbar_pow: [self.zbar_pow[0] + other.zbar_pow[0], self.zbar_pow[1] + other.zbar_pow[1]],
            balls,
        }
    }
}

/// A scalar symbol: a finite sum of [`Term`]s with like terms merged.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ScalarSymbol {
    terms: Vec<Term>,
}

impl ScalarSymbol {
    pub fn zero() -> Self {
        ScalarSymbol::default()
    }

    pub fn constant(c: C64) -> Self {
        Self::from_terms(vec![Term { coeff: c, z_pow: [0; 2], zbar_pow: [0; 2], balls: vec![] }])
    }

    /// `c · z_var^a · z̄_var^b`.
    pub fn monomial(c: C64, var: usize, a: u32, b: u32) -> Self {
        let mut t = Term { coeff: c, z_pow: [0; 2], zbar_pow: [0; 2], balls: vec![] };
        t.z_pow[var] = a;
        t.zbar_pow[var] = b;
        Self::from_terms(vec![t])
    }

    pub fn indicator(ball: Ball) -> Self {
        Self::from_terms(vec![Term { coeff: C64::new(1.0, 0.0), z_pow: [0; 2], zbar_pow: [0; 2], balls: vec![ball] }])
    }

    pub fn from_terms(terms: Vec<Term>) -> Self {
        let mut map: BTreeMap<TermKey, Term> = BTreeMap::new();
        for mut t in terms {
            t.balls.sort_by_key(|b| b.key());
            t.balls.dedup_by_key(|b| b.key());
            match map.get_mut(&t.key()) {
                Some(x) => x.coeff += t.coeff,
                None => {
                    map.insert(t.key(), t);
                }
            }
        }
        ScalarSymbol { terms: map.into_values().filter(|t| t.coeff != C64::new(0.0, 0.0)).collect() }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Analytic polynomial: no `z̄` and no indicators.
    pub fn is_analytic(&self) -> bool {
        self.terms.iter().all(|t| t.zbar_pow == [0, 0] && t.balls.is_empty())
    }

    pub fn eval(&self, factors: &[Factor], w: &DomainPoint) -> C64 {
        self.terms.iter().map(|t| t.eval(factors, w)).sum()
    }

    pub fn conj(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|t| Term { coeff: t.coeff.conj(), z_pow: t.zbar_pow, zbar_pow: t.z_pow, balls: t.balls.clone() })
                .collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_terms(self.terms.iter().chain(&other.terms).cloned().collect())
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::from_terms(self.terms.iter().map(|t| Term { coeff: t.coeff * c, ..t.clone() }).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                out.push(a.mul(b));
            }
        }
        Self::from_terms(out)
    }

    /// Largest exponent of any variable.
    pub fn max_power(&self) -> u32 {
        self.terms.iter().flat_map(|t| t.z_pow.iter().chain(&t.zbar_pow)).copied().max().unwrap_or(0)
    }

    fn has_balls(&self) -> bool {
        self.terms.iter().any(|t| !t.balls.is_empty())
    }

    fn balls(&self) -> impl Iterator<Item = &Ball> {
        self.terms.iter().flat_map(|t| t.balls.iter())
    }
}

/// A `d × d` matrix symbol with sparse entries `⟨u(w) e_k, e_i⟩` at `(i, k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixSymbol {
    dim: usize,
    n_vars: usize,
    entries: BTreeMap<(usize, usize), ScalarSymbol>,
    /// Points `a₁, a₂, …`: the symbol is `u ∘ φ_{a₁} ∘ φ_{a₂} ∘ ⋯`.
    compose: Vec<DomainPoint>,
}

impl MatrixSymbol {
    pub fn zero(space: &SpaceSpec) -> Self {
        MatrixSymbol { dim: space.component_dim, n_vars: space.n_vars(), entries: BTreeMap::new(), compose: vec![] }
    }

    /// `s · I`.
    pub fn scalar_identity(space: &SpaceSpec, s: ScalarSymbol) -> Self {
        let mut u = Self::zero(space);
        for i in 0..u.dim {
            u.set(i, i, s.clone()).expect("diagonal index in range");
        }
        u
    }

    pub fn identity(space: &SpaceSpec) -> Self {
        Self::scalar_identity(space, ScalarSymbol::constant(C64::new(1.0, 0.0)))
    }

    /// Constant matrix symbol.
    pub fn constant(space: &SpaceSpec, m: &DMatrix<C64>) -> Result<Self> {
        let mut u = Self::zero(space);
        if m.nrows() != u.dim || m.ncols() != u.dim {
            return Err(LabError::mismatch(format!("{}×{} matrix for d = {}", m.nrows(), m.ncols(), u.dim)));
        }
        for i in 0..u.dim {
            for k in 0..u.dim {
                u.set(i, k, ScalarSymbol::constant(m[(i, k)]))?;
            }
        }
        Ok(u)
    }

    /// `s · E_{i,k}`.
    pub fn unit(space: &SpaceSpec, i: usize, k: usize, s: ScalarSymbol) -> Result<Self> {
        let mut u = Self::zero(space);
        u.set(i, k, s)?;
        Ok(u)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn set(&mut self, i: usize, k: usize, s: ScalarSymbol) -> Result<()> {
        if i >= self.dim || k >= self.dim {
            return Err(LabError::param(format!("entry ({i}, {k}) outside a {0}×{0} symbol", self.dim)));
        }
        if s.terms.iter().any(|t| {
            (self.n_vars == 1 && (t.z_pow[1] > 0 || t.zbar_pow[1] > 0))
                || t.balls.iter().any(|b| b.center.arity() != self.n_vars)
        }) {
            return Err(LabError::mismatch("entry uses more variables than the space has"));
        }
        if s.is_zero() {
            self.entries.remove(&(i, k));
        } else {
            self.entries.insert((i, k), s);
        }
        Ok(())
    }

    pub fn entry(&self, i: usize, k: usize) -> Option<&ScalarSymbol> {
        self.entries.get(&(i, k))
    }

    /// Nonzero entries in `(row, col)` order.
    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize), &ScalarSymbol)> {
        self.entries.iter()
    }

    pub fn compose_chain(&self) -> &[DomainPoint] {
        &self.compose
    }

    pub fn check_space(&self, space: &SpaceSpec) -> Result<()> {
        if self.dim != space.component_dim || self.n_vars != space.n_vars() {
            return Err(LabError::mismatch(format!(
                "symbol of size {} in {} variable(s) for a space with d = {} in {}",
                self.dim,
                self.n_vars,
                space.component_dim,
                space.n_vars()
            )));
        }
        for b in self.entries.values().flat_map(|s| s.balls()) {
            space.check_point(&b.center)?;
        }
        for a in &self.compose {
            space.check_point(a)?;
        }
        Ok(())
    }

    /// Smallest `d'` such that every entry lies in the leading `d' × d'` block.
    pub fn band(&self) -> usize {
        self.entries.keys().map(|(i, k)| i.max(k) + 1).max().unwrap_or(0)
    }

    pub fn is_analytic(&self) -> bool {
        self.entries.values().all(ScalarSymbol::is_analytic)
    }

    pub fn has_indicators(&self) -> bool {
        self.entries.values().any(ScalarSymbol::has_balls)
    }

    pub fn is_constant(&self) -> bool {
        self.compose.is_empty()
            && self.entries.values().all(|s| s.terms.iter().all(|t| t.z_pow == [0, 0] && t.zbar_pow == [0, 0] && t.balls.is_empty()))
    }

    /// Largest exponent in any entry.
    pub fn max_power(&self) -> u32 {
        self.entries.values().map(ScalarSymbol::max_power).max().unwrap_or(0)
    }

    /// Pullback of `w` through the composition chain.
    pub fn pullback(&self, factors: &[Factor], w: &DomainPoint) -> DomainPoint {
        let mut p = *w;
        for a in self.compose.iter().rev() {
            p = a.map2(&p, |i, x, y| factors[i].involution(x, y));
        }
        p
    }

    /// `⟨u(w) e_k, e_i⟩` for one entry.
    pub fn eval_entry(&self, factors: &[Factor], i: usize, k: usize, w: &DomainPoint) -> C64 {
        match self.entries.get(&(i, k)) {
            Some(s) => s.eval(factors, &self.pullback(factors, w)),
            None => C64::new(0.0, 0.0),
        }
    }

    pub fn eval(&self, factors: &[Factor], w: &DomainPoint) -> DMatrix<C64> {
        let p = self.pullback(factors, w);
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for ((i, k), s) in &self.entries {
            m[(*i, *k)] = s.eval(factors, &p);
        }
        m
    }

    /// Pointwise adjoint `u*`.
    pub fn adjoint(&self) -> Self {
        MatrixSymbol {
            dim: self.dim,
            n_vars: self.n_vars,
            entries: self.entries.iter().map(|((i, k), s)| ((*k, *i), s.conj())).collect(),
            compose: self.compose.clone(),
        }
    }

    /// `u ∘ φ_a`.
    pub fn compose_involution(&self, a: &DomainPoint) -> Self {
        let mut u = self.clone();
        u.compose.push(*a);
        u
    }

    fn combine(&self, other: &Self, f: impl Fn(&BTreeMap<(usize, usize), ScalarSymbol>, &BTreeMap<(usize, usize), ScalarSymbol>) -> BTreeMap<(usize, usize), ScalarSymbol>) -> Result<Self> {
        if self.dim != other.dim || self.n_vars != other.n_vars {
            return Err(LabError::mismatch("symbols of different sizes"));
        }
        if self.compose != other.compose {
            return Err(LabError::mismatch("symbols composed with different involutions"));
        }
        let entries = f(&self.entries, &other.entries).into_iter().filter(|(_, s)| !s.is_zero()).collect();
        Ok(MatrixSymbol { dim: self.dim, n_vars: self.n_vars, entries, compose: self.compose.clone() })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| {
            let mut out = a.clone();
            for (key, s) in b {
                let v = out.get(key).map(|x| x.add(s)).unwrap_or_else(|| s.clone());
                out.insert(*key, v);
            }
            out
        })
    }

    /// Pointwise matrix product `u(w)·v(w)`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| {
            let mut out: BTreeMap<(usize, usize), ScalarSymbol> = BTreeMap::new();
            for ((i, j), s) in a {
                for ((j2, k), t) in b {
                    if j == j2 {
                        let p = s.mul(t);
                        let v = out.get(&(*i, *k)).map(|x| x.add(&p)).unwrap_or(p);
                        out.insert((*i, *k), v);
                    }
                }
            }
            out
        })
    }

    pub fn scale(&self, c: C64) -> Self {
        MatrixSymbol {
            entries: self.entries.iter().map(|(k, s)| (*k, s.scale(c))).filter(|(_, s)| !s.is_zero()).collect(),
            ..self.clone()
        }
    }

    /// Largest spectral norm of `u` over the given points.
    pub fn sup_norm_on(&self, factors: &[Factor], points: &[DomainPoint]) -> f64 {
        points.iter().map(|w| crate::linalg::spectral_norm(&self.eval(factors, w))).fold(0.0, f64::max)
    }
}
