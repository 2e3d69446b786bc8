//! Truncated-jet laboratory.
//!
//! Formal power series are modelled by polynomials cut above a fixed order
//! `K`. Every identity produced here holds modulo `m^{K+1}`.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::crit::{critical_locus, CritError, TowerOptions};
use crate::field::Scalar;
use crate::gb::LocalIdeal;
use crate::germ::{log_derivations, DerivationModule, GermMap};
use crate::linalg;
use crate::modops::{kernel_with_row_ideals, Submodule};
use crate::ring::{Monomial, Polynomial, Ring};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveFailure {
    /// The degree slice is outside the linearized tangent image.
    NotLiftable,
    IterationLimit,
    SingularStep,
    SourceIdealNotPreserved,
    TargetIdealNotPreserved,
}

impl fmt::Display for SolveFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SolveFailure::NotLiftable => "slice not in the tangent image",
            SolveFailure::IterationLimit => "iteration limit reached",
            SolveFailure::SingularStep => "correction has a singular linear part",
            SolveFailure::SourceIdealNotPreserved => "source automorphism leaves J_X",
            SolveFailure::TargetIdealNotPreserved => "target automorphism leaves J_Y",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JetError {
    #[error("jet order {0} is below 2")]
    OrderTooSmall(u32),
    #[error("characteristic {p} does not exceed the jet order {k}; derivation exponentials are unavailable")]
    Characteristic { p: u64, k: u32 },
    #[error("coefficient of d/d{var} has order below 2")]
    NotNilpotent { var: String },
    #[error("image of {var} has a nonzero constant term")]
    ConstantTerm { var: String },
    #[error("linear part is singular")]
    SingularLinearPart,
    #[error("linear part is not the identity")]
    NotTangent,
    #[error("expected {expected} entries, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("inputs live over different rings or ideals")]
    Mismatch,
    #[error("no solution at degree {degree}: {reason}")]
    Unsolvable { degree: u32, reason: SolveFailure, residual: Vec<String> },
    #[error("automorphism does not preserve J + I^N and I + J modulo degree > K")]
    Precondition,
    #[error("Fitt_0 of the critical module is zero")]
    ZeroFitting,
    #[error("no adjustment found for generator {index} ({generator})")]
    NoAdjustment { index: usize, generator: String },
    #[error("lift check failed: {0}")]
    Verification(String),
    #[error(transparent)]
    Crit(#[from] CritError),
}

/// Variable context plus truncation order.
#[derive(Clone, Debug)]
pub struct JetContext {
    ring: Arc<Ring>,
    order: u32,
}

impl JetContext {
    pub fn new(ring: &Arc<Ring>, order: u32) -> Result<Self, JetError> {
        if order < 2 {
            return Err(JetError::OrderTooSmall(order));
        }
        Ok(JetContext { ring: ring.clone(), order })
    }

    pub fn ring(&self) -> &Arc<Ring> {
        &self.ring
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Same order over another ring.
    pub fn on(&self, ring: &Arc<Ring>) -> JetContext {
        JetContext { ring: ring.clone(), order: self.order }
    }

    /// Exponentials need `j!` invertible for `j ≤ K`.
    pub fn check_exponential(&self) -> Result<(), JetError> {
        let p = self.ring.characteristic();
        if p != 0 && p <= self.order as u64 {
            return Err(JetError::Characteristic { p, k: self.order });
        }
        Ok(())
    }

    fn expect_ring(&self, ring: &Arc<Ring>) -> Result<(), JetError> {
        if Ring::same(&self.ring, ring) {
            Ok(())
        } else {
            Err(JetError::Mismatch)
        }
    }
}

fn var<F: Scalar>(ring: &Arc<Ring>, i: usize) -> Polynomial<F> {
    Polynomial::var(ring, i)
}

fn scalar<F: Scalar>(ring: &Arc<Ring>, n: i64) -> F {
    F::from_i64(&ring.field(), n)
}

/// Automorphism of `k[[x]]/m^{K+1}` given by the images of the variables.
#[derive(Clone, Debug, PartialEq)]
pub struct JetAutomorphism<F: Scalar> {
    ring: Arc<Ring>,
    order: u32,
    images: Vec<Polynomial<F>>,
}

impl<F: Scalar> JetAutomorphism<F> {
    pub fn new(ctx: &JetContext, images: Vec<Polynomial<F>>) -> Result<Self, JetError> {
        let n = ctx.ring.nvars();
        if images.len() != n {
            return Err(JetError::Shape { expected: n, got: images.len() });
        }
        for (i, p) in images.iter().enumerate() {
            ctx.expect_ring(p.ring())?;
            if !p.constant_term().is_zero() {
                return Err(JetError::ConstantTerm { var: ctx.ring.names()[i].clone() });
            }
        }
        let out = JetAutomorphism {
            ring: ctx.ring.clone(),
            order: ctx.order,
            images: images.iter().map(|p| p.truncate(ctx.order)).collect(),
        };
        if linalg::rank(&out.linear_part()) < n {
            return Err(JetError::SingularLinearPart);
        }
        Ok(out)
    }

    pub fn identity(ctx: &JetContext) -> Self {
        let images = (0..ctx.ring.nvars()).map(|i| var(&ctx.ring, i)).collect();
        JetAutomorphism { ring: ctx.ring.clone(), order: ctx.order, images }
    }

    pub fn ring(&self) -> &Arc<Ring> {
        &self.ring
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn images(&self) -> &[Polynomial<F>] {
        &self.images
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, p)| *p == var(&self.ring, i))
    }

    /// `p ∘ Φ`.
    pub fn apply(&self, p: &Polynomial<F>) -> Polynomial<F> {
        p.substitute(&self.ring, &self.images, Some(self.order))
    }

    /// `self ∘ other` as maps: `x ↦ self(other(x))`.
    pub fn compose(&self, other: &JetAutomorphism<F>) -> JetAutomorphism<F> {
        let images = self.images.iter().map(|p| other.apply(p)).collect();
        JetAutomorphism { ring: self.ring.clone(), order: self.order, images }
    }

    /// Row `i` holds the coefficients of the variables in the image of `x_i`.
    pub fn linear_part(&self) -> Vec<Vec<F>> {
        let n = self.ring.nvars();
        self.images.iter().map(|p| (0..n).map(|j| p.coeff(&Monomial::var(n, j))).collect()).collect()
    }

    pub fn is_tangent_to_identity(&self) -> bool {
        self.linear_part()
            .iter()
            .enumerate()
            .all(|(i, row)| row.iter().enumerate().all(|(j, c)| if i == j { c.is_one() } else { c.is_zero() }))
    }

    pub fn inverse(&self) -> JetAutomorphism<F> {
        let n = self.ring.nvars();
        let lin = self.linear_part();
        let mut linv = vec![vec![F::zero(); n]; n];
        for j in 0..n {
            let rhs: Vec<F> = (0..n).map(|i| if i == j { F::one() } else { F::zero() }).collect();
            let col = linalg::solve(&lin, &rhs, &(0..n).collect::<Vec<_>>()).expect("invertible linear part");
            for i in 0..n {
                linv[i][j] = col[i].clone();
            }
        }
        let nonlinear: Vec<Polynomial<F>> = self.images.iter().map(|p| p - &p.truncate(1)).collect();
        let apply_linv = |v: &[Polynomial<F>]| -> Vec<Polynomial<F>> {
            (0..n)
                .map(|i| {
                    let mut acc = Polynomial::zero(&self.ring);
                    for (j, vj) in v.iter().enumerate() {
                        if !linv[i][j].is_zero() {
                            acc = &acc + &vj.scale(&linv[i][j]);
                        }
                    }
                    acc
                })
                .collect()
        };
        let xs: Vec<Polynomial<F>> = (0..n).map(|i| var(&self.ring, i)).collect();
        let mut psi = apply_linv(&xs);
        for _ in 0..self.order {
            let rhs: Vec<Polynomial<F>> = (0..n)
                .map(|j| &xs[j] - &nonlinear[j].substitute(&self.ring, &psi, Some(self.order)))
                .collect();
            psi = apply_linv(&rhs);
        }
        let out = JetAutomorphism { ring: self.ring.clone(), order: self.order, images: psi };
        debug_assert!(self.compose(&out).is_identity());
        out
    }

    /// `Φ(I) ⊆ I` modulo degree > K, generator by generator.
    pub fn preserves(&self, ideal: &LocalIdeal<F>) -> bool {
        ideal.generators().iter().all(|g| ideal.contains_mod_degree(&self.apply(g), self.order))
    }

    /// Whether the two automorphisms induce the same map on `R/ideal`.
    pub fn agrees_modulo(&self, other: &JetAutomorphism<F>, ideal: &LocalIdeal<F>) -> bool {
        self.images.iter().zip(&other.images).all(|(a, b)| ideal.contains_mod_degree(&(a - b), self.order))
    }
}

impl<F: Scalar> fmt::Display for JetAutomorphism<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.ring.names().iter().zip(&self.images).map(|(x, p)| format!("{x} -> {p}")).collect();
        f.write_str(&parts.join(", "))
    }
}

/// Derivation `Σ a_j ∂_j` with coefficients cut above degree `K`.
#[derive(Clone, Debug, PartialEq)]
pub struct JetDerivation<F: Scalar> {
    ring: Arc<Ring>,
    order: u32,
    coeffs: Vec<Polynomial<F>>,
}

impl<F: Scalar> JetDerivation<F> {
    pub fn new(ctx: &JetContext, coeffs: Vec<Polynomial<F>>) -> Result<Self, JetError> {
        let n = ctx.ring.nvars();
        if coeffs.len() != n {
            return Err(JetError::Shape { expected: n, got: coeffs.len() });
        }
        for c in &coeffs {
            ctx.expect_ring(c.ring())?;
        }
        Ok(JetDerivation { ring: ctx.ring.clone(), order: ctx.order, coeffs: coeffs.iter().map(|c| c.truncate(ctx.order)).collect() })
    }

    pub fn zero(ctx: &JetContext) -> Self {
        let coeffs = (0..ctx.ring.nvars()).map(|_| Polynomial::zero(&ctx.ring)).collect();
        JetDerivation { ring: ctx.ring.clone(), order: ctx.order, coeffs }
    }

    pub fn coeffs(&self) -> &[Polynomial<F>] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// `ξ(m) ⊆ m²`.
    pub fn is_nilpotent(&self) -> bool {
        self.coeffs.iter().all(|c| c.ord().map_or(true, |o| o >= 2))
    }

    pub fn apply(&self, p: &Polynomial<F>) -> Polynomial<F> {
        DerivationModule::apply(&self.coeffs, p).truncate(self.order)
    }

    pub fn sub(&self, other: &JetDerivation<F>) -> JetDerivation<F> {
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        JetDerivation { ring: self.ring.clone(), order: self.order, coeffs }
    }
}

impl<F: Scalar> fmt::Display for JetDerivation<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .ring
            .names()
            .iter()
            .zip(&self.coeffs)
            .filter(|(_, c)| !c.is_zero())
            .map(|(x, c)| format!("({c})*d/d{x}"))
            .collect();
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}

/// `x_i ↦ Σ_{j ≤ K} ξ^j(x_i)/j!`.
pub fn exp_derivation<F: Scalar>(xi: &JetDerivation<F>, ctx: &JetContext) -> Result<JetAutomorphism<F>, JetError> {
    ctx.check_exponential()?;
    ctx.expect_ring(&xi.ring)?;
    for (i, c) in xi.coeffs.iter().enumerate() {
        if c.ord().is_some_and(|o| o < 2) {
            return Err(JetError::NotNilpotent { var: ctx.ring.names()[i].clone() });
        }
    }
    Ok(exp_series(xi, ctx, ctx.order).expect("nilpotent series terminates"))
}

/// `Σ_{j ≤ max_terms} ξ^j(x_i)/j!`, or `None` if the series has not
/// terminated by then.
fn exp_series<F: Scalar>(xi: &JetDerivation<F>, ctx: &JetContext, max_terms: u32) -> Option<JetAutomorphism<F>> {
    let mut images = Vec::with_capacity(ctx.ring.nvars());
    for i in 0..ctx.ring.nvars() {
        let mut term = var(&ctx.ring, i);
        let mut sum = term.clone();
        for j in 1..=max_terms + 1 {
            term = xi.apply(&term);
            if term.is_zero() {
                break;
            }
            if j > max_terms {
                return None;
            }
            term = term.scale(&scalar::<F>(&ctx.ring, j as i64).inv());
            sum = &sum + &term;
        }
        images.push(sum);
    }
    Some(JetAutomorphism { ring: ctx.ring.clone(), order: ctx.order, images })
}

/// The nilpotent derivation whose exponential is `Φ`, found degree by degree.
pub fn log_automorphism<F: Scalar>(phi: &JetAutomorphism<F>, ctx: &JetContext) -> Result<JetDerivation<F>, JetError> {
    ctx.check_exponential()?;
    ctx.expect_ring(&phi.ring)?;
    if !phi.is_tangent_to_identity() {
        return Err(JetError::NotTangent);
    }
    let mut xi = JetDerivation::zero(ctx);
    for d in 2..=ctx.order {
        let e = exp_derivation(&xi, ctx)?;
        for (i, c) in xi.coeffs.iter_mut().enumerate() {
            let slice = (&e.images[i] - &phi.images[i]).homogeneous_part(d);
            *c = &*c - &slice;
        }
    }
    debug_assert_eq!(exp_derivation(&xi, ctx)?, *phi);
    Ok(xi)
}

/// Solution of `Φ_Y ∘ f̃ = f ∘ Φ_X` modulo `J_X + m^{K+1}`.
#[derive(Clone, Debug)]
pub struct Equivalence<F: Scalar> {
    pub source: JetAutomorphism<F>,
    pub target: JetAutomorphism<F>,
    /// Linear solves performed.
    pub steps: usize,
}

/// Finds `Φ_X` with `f ∘ Φ_X = f̃` modulo `J_X + m^{K+1}`.
pub fn right_solver<F: Scalar>(f: &GermMap<F>, ft: &GermMap<F>, ctx: &JetContext) -> Result<Equivalence<F>, JetError> {
    solve_equivalence(f, ft, ctx, false)
}

/// Finds `(Φ_X, Φ_Y)` with `Φ_Y ∘ f̃ = f ∘ Φ_X` modulo `J_X + m^{K+1}`,
/// `Φ_Y` preserving `J_Y`.
pub fn lr_solver<F: Scalar>(f: &GermMap<F>, ft: &GermMap<F>, ctx: &JetContext) -> Result<Equivalence<F>, JetError> {
    solve_equivalence(f, ft, ctx, true)
}

/// Residual `Φ_Y ∘ f̃ - f ∘ Φ_X` reduced modulo `J_X + m^{K+1}`.
pub fn equivalence_residual<F: Scalar>(
    f: &GermMap<F>,
    ft: &GermMap<F>,
    source: &JetAutomorphism<F>,
    target: &JetAutomorphism<F>,
) -> Vec<Polynomial<F>> {
    let k = source.order;
    let a = left_side(ft, target, k);
    let b = right_side(f, source);
    a.iter().zip(&b).map(|(x, y)| f.source_ideal().truncated_normal_form(&(x - y), k)).collect()
}

fn left_side<F: Scalar>(ft: &GermMap<F>, target: &JetAutomorphism<F>, k: u32) -> Vec<Polynomial<F>> {
    target.images.iter().map(|p| p.substitute(ft.source(), ft.components(), Some(k))).collect()
}

fn right_side<F: Scalar>(f: &GermMap<F>, source: &JetAutomorphism<F>) -> Vec<Polynomial<F>> {
    f.components().iter().map(|c| source.apply(c)).collect()
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Unknown {
    Target,
    Source,
    SourceLinear,
}

struct Column<F: Scalar> {
    kind: Unknown,
    /// Lowest degree of the image, at most the residual degree `d`.
    order: u32,
    field: Vec<Polynomial<F>>,
    /// Image truncated at degree `d`.
    slice: Vec<Polynomial<F>>,
}

fn lowest_order<F: Scalar>(v: &[Polynomial<F>]) -> Option<u32> {
    v.iter().filter_map(|p| p.ord()).min()
}

/// One correction step: `exp(a)` when the series terminates and an ideal
/// must be kept exactly, otherwise `id + a`.
fn step_automorphism<F: Scalar>(
    ctx: &JetContext,
    ideal: &LocalIdeal<F>,
    a: Vec<Polynomial<F>>,
) -> Option<JetAutomorphism<F>> {
    if a.iter().all(|p| p.is_zero()) {
        return Some(JetAutomorphism::identity(ctx));
    }
    let d = JetDerivation::new(ctx, a).ok()?;
    if !ideal.is_zero() {
        let n = ctx.ring.nvars() as u32;
        let terms = n * (ctx.order + 1) * (ctx.order + 1);
        let p = ctx.ring.characteristic();
        if p == 0 || p > terms as u64 {
            if let Some(phi) = exp_series(&d, ctx, terms) {
                return Some(phi);
            }
        }
    }
    let images = d.coeffs.iter().enumerate().map(|(i, c)| &var(&ctx.ring, i) + c).collect();
    JetAutomorphism::new(ctx, images).ok()
}

fn unsolvable<F: Scalar>(degree: u32, reason: SolveFailure, residual: &[Polynomial<F>]) -> JetError {
    JetError::Unsolvable { degree, reason, residual: residual.iter().map(|p| p.to_string()).collect() }
}

/// Coefficients `z` (indexed like `cols`, zero outside `use_cols`) with
/// `Σ z_j · slice_j = rhs`.
fn solve_columns<F: Scalar>(cols: &[Column<F>], use_cols: &[usize], rhs_polys: &[Polynomial<F>]) -> Option<Vec<F>> {
    let mut rows: HashMap<(usize, Monomial), usize> = HashMap::new();
    let mut index = |l: usize, mono: &Monomial| {
        let next = rows.len();
        *rows.entry((l, mono.clone())).or_insert(next)
    };
    let mut entries: Vec<Vec<(usize, F)>> = Vec::new();
    for &j in use_cols {
        let mut col = Vec::new();
        for (l, p) in cols[j].slice.iter().enumerate() {
            for (mono, v) in p.terms() {
                col.push((index(l, mono), v.clone()));
            }
        }
        entries.push(col);
    }
    let mut rhs_entries = Vec::new();
    for (l, p) in rhs_polys.iter().enumerate() {
        for (mono, v) in p.terms() {
            rhs_entries.push((index(l, mono), v.clone()));
        }
    }
    let nrows = rows.len();
    let mut mat = vec![vec![F::zero(); use_cols.len()]; nrows];
    for (j, col) in entries.iter().enumerate() {
        for (i, v) in col {
            mat[*i][j] = v.clone();
        }
    }
    let mut rhs = vec![F::zero(); nrows];
    for (i, v) in rhs_entries {
        rhs[i] = v;
    }
    // Unknowns acting exactly in the residual degree first; lower ones only
    // when their low-degree effects must cancel.
    let mut preference: Vec<usize> = (0..use_cols.len()).collect();
    preference.sort_by_key(|&j| (std::cmp::Reverse(cols[use_cols[j]].order), cols[use_cols[j]].kind));
    let sub = linalg::solve(&mat, &rhs, &preference)?;
    let mut z = vec![F::zero(); cols.len()];
    for (&j, v) in use_cols.iter().zip(sub) {
        z[j] = v;
    }
    Some(z)
}

/// Consecutive steps allowed at one residual degree.
const STALL_LIMIT: usize = 8;

fn solve_equivalence<F: Scalar>(
    f: &GermMap<F>,
    ft: &GermMap<F>,
    ctx: &JetContext,
    left: bool,
) -> Result<Equivalence<F>, JetError> {
    ctx.expect_ring(f.source())?;
    if !Ring::same(f.source(), ft.source())
        || !Ring::same(f.target(), ft.target())
        || !f.source_ideal().equal(ft.source_ideal())
        || !f.target_ideal().equal(ft.target_ideal())
    {
        return Err(JetError::Mismatch);
    }
    let k = ctx.order;
    let src = f.source().clone();
    let tgt = f.target().clone();
    let tctx = ctx.on(&tgt);
    let (n, m) = (src.nvars(), tgt.nvars());
    let jx = f.source_ideal();
    let jy = f.target_ideal();
    let one = F::one();
    let sgens = log_derivations(&src, std::slice::from_ref(jx)).gens;
    let tgens = if left { log_derivations(&tgt, std::slice::from_ref(jy)).gens } else { Vec::new() };
    let mut px = JetAutomorphism::identity(ctx);
    let mut py = JetAutomorphism::identity(&tctx);
    let limit = 4 * k as usize + 8;
    // Steps spent at the current residual degree. Linear source unknowns act
    // nonlinearly, so their corrections can converge without ever becoming
    // exact (e.g. a square root that is not rational); coefficients then
    // double in size every step.
    let mut stalled = (0u32, 0usize);
    for step in 0..=limit {
        let a = left_side(ft, &py, k);
        let b = right_side(f, &px);
        let e: Vec<Polynomial<F>> = a.iter().zip(&b).map(|(x, y)| jx.truncated_normal_form(&(x - y), k)).collect();
        let Some(d) = lowest_order(&e) else {
            return Ok(Equivalence { source: px, target: py, steps: step });
        };
        let ed: Vec<Polynomial<F>> = e.iter().map(|p| p.homogeneous_part(d)).collect();
        stalled = if stalled.0 == d { (d, stalled.1 + 1) } else { (d, 0) };
        if step == limit || stalled.1 >= STALL_LIMIT {
            return Err(unsolvable(d, SolveFailure::IterationLimit, &ed));
        }
        let mut cols: Vec<Column<F>> = Vec::new();
        let mut push = |kind: Unknown, field: Vec<Polynomial<F>>, image: Vec<Polynomial<F>>| {
            let image: Vec<Polynomial<F>> = image.iter().map(|p| jx.truncated_normal_form(p, k)).collect();
            if let Some(order) = lowest_order(&image).filter(|&o| o <= d) {
                cols.push(Column { kind, order, field, slice: image.iter().map(|p| p.truncate(d)).collect() });
            }
        };
        for xi in &sgens {
            let w: Vec<Polynomial<F>> = b.iter().map(|bl| DerivationModule::apply(xi, bl).truncate(k)).collect();
            let Some(o) = lowest_order(&w) else { continue };
            for s in 0..=d.saturating_sub(o) {
                for mu in Monomial::all_of_degree(n, s) {
                    let field: Vec<Polynomial<F>> = xi.iter().map(|c| c.mul_term(&mu, &one).truncate(k)).collect();
                    if field.iter().all(|c| c.is_zero()) || field.iter().any(|c| !c.constant_term().is_zero()) {
                        continue;
                    }
                    let kind = if lowest_order(&field) == Some(1) { Unknown::SourceLinear } else { Unknown::Source };
                    push(kind, field, w.iter().map(|p| p.mul_term(&mu, &one)).collect());
                }
            }
        }
        if left {
            let mut powers: Vec<Vec<Polynomial<F>>> = a.iter().map(|p| vec![Polynomial::one(&src), p.clone()]).collect();
            for zeta in &tgens {
                let z: Vec<Polynomial<F>> = zeta.iter().map(|c| c.substitute(&src, &a, Some(k))).collect();
                if z.iter().all(|p| p.is_zero()) {
                    continue;
                }
                for s in 0..=d {
                    for mu in Monomial::all_of_degree(m, s) {
                        let field: Vec<Polynomial<F>> = zeta.iter().map(|c| c.mul_term(&mu, &one).truncate(k)).collect();
                        if field.iter().all(|c| c.is_zero()) || field.iter().any(|c| !c.constant_term().is_zero()) {
                            continue;
                        }
                        let mut mu_a = Polynomial::one(&src);
                        for (l, &ex) in mu.exponents().iter().enumerate() {
                            while powers[l].len() <= ex as usize {
                                let next = powers[l].last().unwrap().mul_trunc(&a[l], Some(k));
                                powers[l].push(next);
                            }
                            mu_a = mu_a.mul_trunc(&powers[l][ex as usize], Some(k));
                        }
                        if mu_a.ord().map_or(true, |o| o > d) {
                            continue;
                        }
                        push(Unknown::Target, field, z.iter().map(|p| -(mu_a.mul_trunc(p, Some(k)))).collect());
                    }
                }
            }
        }
        // The degree-`d` slice alone usually suffices and is much smaller.
        let exact: Vec<usize> = (0..cols.len()).filter(|&j| cols[j].order == d).collect();
        let all: Vec<usize> = (0..cols.len()).collect();
        let Some(z) = solve_columns(&cols, &exact, &ed).or_else(|| solve_columns(&cols, &all, &ed)) else {
            return Err(unsolvable(d, SolveFailure::NotLiftable, &ed));
        };
        let mut a_src = vec![Polynomial::zero(&src); n];
        let mut a_tgt = vec![Polynomial::zero(&tgt); m];
        for (c, zc) in cols.iter().zip(&z) {
            if zc.is_zero() {
                continue;
            }
            let acc = if c.kind == Unknown::Target { &mut a_tgt } else { &mut a_src };
            for (x, fx) in acc.iter_mut().zip(&c.field) {
                *x = &*x + &fx.scale(zc);
            }
        }
        let sx = step_automorphism(ctx, jx, a_src).ok_or_else(|| unsolvable(d, SolveFailure::SingularStep, &ed))?;
        let sy = step_automorphism(&tctx, jy, a_tgt).ok_or_else(|| unsolvable(d, SolveFailure::SingularStep, &ed))?;
        px = px.compose(&sx);
        py = sy.compose(&py);
        if !jx.is_zero() && !px.preserves(jx) {
            return Err(unsolvable(d, SolveFailure::SourceIdealNotPreserved, &ed));
        }
        if !jy.is_zero() && !py.preserves(jy) {
            return Err(unsolvable(d, SolveFailure::TargetIdealNotPreserved, &ed));
        }
    }
    unreachable!("loop returns at the iteration limit")
}

/// One row of a determinacy probe.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProbeRow {
    pub n: u32,
    pub trials: u32,
    pub successes: u32,
    /// Exact success fraction in lowest terms.
    pub rate: String,
}

fn trial_rng(seed: u64, n: u32, trial: u32) -> ChaCha8Rng {
    let mix = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ ((n as u64) << 40) ^ trial as u64;
    ChaCha8Rng::seed_from_u64(mix)
}

/// Random element of `ideal^{⊕m}` truncated at `k`: every generator times every
/// monomial that keeps the product within degree `k`, coefficients in `-3..=3`.
fn random_perturbation<F: Scalar>(gens: &[Polynomial<F>], m: usize, k: u32, rng: &mut ChaCha8Rng) -> Vec<Polynomial<F>> {
    let Some(ring) = gens.first().map(|g| g.ring().clone()) else { return Vec::new() };
    let n = ring.nvars();
    (0..m)
        .map(|_| {
            let mut h = Polynomial::zero(&ring);
            for g in gens {
                let Some(o) = g.ord() else { continue };
                for s in 0..=k.saturating_sub(o) {
                    for mu in Monomial::all_of_degree(n, s) {
                        let c: i64 = rng.gen_range(-3..=3);
                        if c != 0 {
                            h = &h + &g.mul_term(&mu, &scalar::<F>(&ring, c)).truncate(k);
                        }
                    }
                }
            }
            h
        })
        .collect()
}

/// For each `N`, the fraction of random `f + h` with `h ∈ Fitt_0(C)^N` that the
/// right solver proves equivalent to `f`.
pub fn determinacy_probe<F: Scalar>(
    f: &GermMap<F>,
    ns: &[u32],
    trials: u32,
    seed: u64,
    ctx: &JetContext,
) -> Result<Vec<ProbeRow>, JetError> {
    if trials == 0 {
        return Ok(Vec::new());
    }
    ctx.expect_ring(f.source())?;
    let opts = TowerOptions { reduce: false, ..TowerOptions::default() };
    let fitting = critical_locus(f, &opts)?.fitting;
    if fitting.generators().iter().all(|g| f.source_ideal().contains(g)) {
        return Err(JetError::ZeroFitting);
    }
    let k = ctx.order;
    let mut rows = Vec::new();
    for &n in ns {
        let gens: Vec<Polynomial<F>> = fitting.power(n).generators().to_vec();
        let successes: u32 = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_rng(seed, n, t);
                let h = random_perturbation(&gens, f.m(), k, &mut rng);
                let comps = f.components().iter().zip(&h).map(|(c, x)| c + x).collect();
                let ft = GermMap::new(f.source_ideal().clone(), f.target_ideal().clone(), comps).expect("same shape");
                match right_solver(f, &ft, ctx) {
                    Ok(eq) => {
                        let r = equivalence_residual(f, &ft, &eq.source, &eq.target);
                        assert!(r.iter().all(|p| p.is_zero()), "solver success without a passing composition");
                        1
                    }
                    Err(_) => 0,
                }
            })
            .sum();
        rows.push(ProbeRow { n, trials, successes, rate: Ratio::new(successes, trials).to_string() });
    }
    Ok(rows)
}

/// Output of [`lift_automorphism`].
#[derive(Clone, Debug)]
pub struct AutomorphismLift<F: Scalar> {
    pub map: JetAutomorphism<F>,
    /// Adjusted derivation whose exponential is `map`.
    pub derivation: JetDerivation<F>,
    /// Per generator of `J`: the drop `N - e` in the power `I^e` used for the
    /// adjustment, `None` when none was needed.
    pub drops: Vec<Option<u32>>,
}

fn unit_inverse<F: Scalar>(u: &Polynomial<F>, k: u32) -> Polynomial<F> {
    let c = u.constant_term().inv();
    let one = Polynomial::one(u.ring());
    let w = &one - &u.scale(&c);
    let mut term = one.clone();
    let mut acc = one;
    for _ in 0..k {
        term = term.mul_trunc(&w, Some(k));
        if term.is_zero() {
            break;
        }
        acc = &acc + &term;
    }
    acc.scale(&c)
}

/// Derivations of the ambient ring sending each of `gens` into `ideal` and
/// preserving every ideal in `keep`.
fn derivations_into<F: Scalar>(
    ring: &Arc<Ring>,
    gens: &[Polynomial<F>],
    ideal: &LocalIdeal<F>,
    keep: &[LocalIdeal<F>],
) -> Vec<Vec<Polynomial<F>>> {
    let n = ring.nvars();
    let grad = |q: &Polynomial<F>| (0..n).map(|j| q.diff(j)).collect::<Vec<_>>();
    let mut rows: Vec<Vec<Polynomial<F>>> = gens.iter().map(grad).collect();
    let mut ideals = vec![ideal.clone(); rows.len()];
    for k in keep {
        for q in k.generators() {
            rows.push(grad(q));
            ideals.push(k.clone());
        }
    }
    kernel_with_row_ideals(&LocalIdeal::zero(ring), n, &rows, &ideals).gens
}

/// Lifts an automorphism of `R/(J + I^N)` to one preserving `J` and `I` and
/// agreeing with the input modulo `I`. Here `I` is taken together with `J`.
pub fn lift_automorphism<F: Scalar>(
    j: &LocalIdeal<F>,
    i: &LocalIdeal<F>,
    big_n: u32,
    phi: &JetAutomorphism<F>,
    ctx: &JetContext,
) -> Result<AutomorphismLift<F>, JetError> {
    lift_keeping(j, i, big_n, phi, &[], ctx)
}

/// [`lift_automorphism`] restricted to adjustments that preserve every ideal
/// in `keep`, which `phi` must already preserve.
fn lift_keeping<F: Scalar>(
    j: &LocalIdeal<F>,
    i: &LocalIdeal<F>,
    big_n: u32,
    phi: &JetAutomorphism<F>,
    keep: &[LocalIdeal<F>],
    ctx: &JetContext,
) -> Result<AutomorphismLift<F>, JetError> {
    ctx.check_exponential()?;
    ctx.expect_ring(j.ring())?;
    ctx.expect_ring(i.ring())?;
    ctx.expect_ring(&phi.ring)?;
    if !phi.is_tangent_to_identity() {
        return Err(JetError::NotTangent);
    }
    let ij = i.sum(j);
    if !phi.preserves(&j.sum(&i.power(big_n))) || !phi.preserves(&ij) || !keep.iter().all(|k| phi.preserves(k)) {
        return Err(JetError::Precondition);
    }
    let k = ctx.order;
    let ring = ctx.ring.clone();
    let n = ring.nvars();
    let jet = j.with_generators(Monomial::all_of_degree(n, k + 1).into_iter().map(|mu| Polynomial::monomial(&ring, mu, F::one())));
    let mut xi = log_automorphism(phi, ctx)?;
    let qs = j.generators().to_vec();
    let mut drops = Vec::with_capacity(qs.len());
    for (idx, q) in qs.iter().enumerate() {
        let r = xi.apply(q);
        if j.contains_mod_degree(&r, k) {
            drops.push(None);
            continue;
        }
        let ders = derivations_into(&ring, &qs[..idx], j, keep);
        let images: Vec<Polynomial<F>> = ders.iter().map(|z| DerivationModule::apply(z, q).truncate(k)).collect();
        let mut found = None;
        for e in (1..=big_n).rev() {
            let hs: Vec<Polynomial<F>> = i.power(e).generators().to_vec();
            let mut gens = Vec::new();
            let mut labels = Vec::new();
            for h in &hs {
                for (zi, zq) in images.iter().enumerate() {
                    gens.push(vec![h.mul_trunc(zq, Some(k))]);
                    labels.push((h.clone(), zi));
                }
            }
            let Some(lift) = Submodule::new(&jet, 1, gens).lifter().lift(&[r.clone()]) else { continue };
            let uinv = unit_inverse(&lift.unit, k);
            let mut tau = vec![Polynomial::zero(&ring); n];
            for (c, (h, zi)) in lift.coeffs.iter().zip(&labels) {
                if c.is_zero() {
                    continue;
                }
                let scal = c.mul_trunc(&uinv, Some(k)).mul_trunc(h, Some(k));
                for (t, z) in tau.iter_mut().zip(&ders[*zi]) {
                    *t = &*t + &scal.mul_trunc(z, Some(k));
                }
            }
            let tau = JetDerivation::new(ctx, tau)?;
            let next = xi.sub(&tau);
            if j.contains_mod_degree(&next.apply(q), k) {
                found = Some((e, next));
                break;
            }
        }
        let Some((e, next)) = found else {
            return Err(JetError::NoAdjustment { index: idx, generator: q.to_string() });
        };
        xi = next;
        drops.push(Some(big_n - e));
    }
    let map = exp_derivation(&xi, ctx)?;
    if !map.preserves(j) {
        return Err(JetError::Verification("Φ(J) ⊄ J".into()));
    }
    if !map.preserves(&ij) {
        return Err(JetError::Verification("Φ(I) ⊄ I".into()));
    }
    if !map.agrees_modulo(phi, &ij) {
        return Err(JetError::Verification("Φ differs from the input modulo I".into()));
    }
    Ok(AutomorphismLift { map, derivation: xi, drops })
}

/// Lifts along a chain `I_1 ⊆ … ⊆ I_r` with exponents `N_1, …, N_r`, starting
/// from an automorphism of `R/(J + Σ I_t^{N_t})` that already preserves every
/// `I_t + J`. The result preserves `J` and every `I_t`.
pub fn lift_chain<F: Scalar>(
    j: &LocalIdeal<F>,
    chain: &[(LocalIdeal<F>, u32)],
    phi: &JetAutomorphism<F>,
    ctx: &JetContext,
) -> Result<JetAutomorphism<F>, JetError> {
    let mut cur = phi.clone();
    for idx in (0..chain.len()).rev() {
        let mut base = j.clone();
        for (it, nt) in &chain[..idx] {
            base = base.sum(&it.power(*nt));
        }
        let (it, nt) = &chain[idx];
        let keep: Vec<LocalIdeal<F>> = chain[..idx].iter().map(|(i, _)| i.sum(j)).collect();
        cur = lift_keeping(&base, it, *nt, &cur, &keep, ctx)?.map;
    }
    if !cur.preserves(j) {
        return Err(JetError::Verification("Φ(J) ⊄ J".into()));
    }
    for (idx, (it, _)) in chain.iter().enumerate() {
        if !cur.preserves(&it.sum(j)) {
            return Err(JetError::Verification(format!("Φ does not preserve I_{}", idx + 1)));
        }
    }
    Ok(cur)
}
