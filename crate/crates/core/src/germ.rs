//! Map-germs `f: (X, o) → (Y, o)` between germs of affine schemes.
//!
//! `X = V(J_X) ⊂ (k^n, o)` and `Y = V(J_Y) ⊂ (k^m, o)`; the map is given by
//! polynomial components `f_1, …, f_m` in the source variables.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::field::Scalar;
use crate::gb::{eliminate_polys, LocalIdeal, RadicalVerdict};
use crate::linalg;
use crate::modops::{kernel_with_row_ideals, ModError, ModulePresentation};
use crate::ring::{Polynomial, Ring};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GermError {
    #[error("component {component} has a nonzero constant term; germs must send o to o")]
    NonzeroConstant { component: String },
    #[error("{side} ideal is the unit ideal, so the germ is empty")]
    EmptyGerm { side: String },
    #[error("pullback of target generator {generator} is not in the source ideal (normal form {normal_form})")]
    Pullback { generator: String, normal_form: String },
    #[error("expected {expected} components, got {got}")]
    Shape { expected: usize, got: usize },
}

/// A polynomial map-germ with its source and target ideals.
#[derive(Clone, Debug)]
pub struct GermMap<F: Scalar> {
    source_ideal: LocalIdeal<F>,
    target_ideal: LocalIdeal<F>,
    components: Vec<Polynomial<F>>,
}

/// Non-fatal observations made by [`GermMap::validate`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationNotes {
    /// Generators of `J_X` or `J_Y` outside `m²`: the embedding is not minimal.
    pub non_minimal_embedding: Vec<String>,
}

/// Image ideal in the target together with the closure caveat.
#[derive(Clone, Debug)]
pub struct Image<F: Scalar> {
    pub ideal: LocalIdeal<F>,
    /// Set when the restriction is not finite, so the ideal describes the
    /// Zariski closure of the image.
    pub closure: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Dominance {
    pub dominant: bool,
    pub radical_bound: u32,
}

/// Derivations `Σ a_j ∂_j` preserving every constraint ideal.
#[derive(Clone, Debug)]
pub struct DerivationModule<F: Scalar> {
    pub ring: Arc<Ring>,
    pub gens: Vec<Vec<Polynomial<F>>>,
}

impl<F: Scalar> DerivationModule<F> {
    /// Applies the derivation with coefficient vector `a` to `p`.
    pub fn apply(a: &[Polynomial<F>], p: &Polynomial<F>) -> Polynomial<F> {
        let mut acc = Polynomial::zero(p.ring());
        for (j, aj) in a.iter().enumerate() {
            if !aj.is_zero() {
                acc = &acc + &(aj * &p.diff(j));
            }
        }
        acc
    }
}

impl<F: Scalar> GermMap<F> {
    /// Builds a germ without checking it; see [`GermMap::validate`].
    pub fn new(source_ideal: LocalIdeal<F>, target_ideal: LocalIdeal<F>, components: Vec<Polynomial<F>>) -> Result<Self, GermError> {
        let m = target_ideal.ring().nvars();
        if components.len() != m {
            return Err(GermError::Shape { expected: m, got: components.len() });
        }
        for c in &components {
            assert!(Ring::same(c.ring(), source_ideal.ring()), "component outside the source ring");
        }
        Ok(GermMap { source_ideal, target_ideal, components })
    }

    /// Germ between smooth spaces.
    pub fn smooth(source: &Arc<Ring>, target: &Arc<Ring>, components: Vec<Polynomial<F>>) -> Result<Self, GermError> {
        GermMap::new(LocalIdeal::zero(source), LocalIdeal::zero(target), components)
    }

    pub fn source(&self) -> &Arc<Ring> {
        self.source_ideal.ring()
    }

    pub fn target(&self) -> &Arc<Ring> {
        self.target_ideal.ring()
    }

    pub fn source_ideal(&self) -> &LocalIdeal<F> {
        &self.source_ideal
    }

    pub fn target_ideal(&self) -> &LocalIdeal<F> {
        &self.target_ideal
    }

    pub fn components(&self) -> &[Polynomial<F>] {
        &self.components
    }

    pub fn n(&self) -> usize {
        self.source().nvars()
    }

    pub fn m(&self) -> usize {
        self.target().nvars()
    }

    /// Same map with a different target ideal.
    pub fn with_target_ideal(&self, target_ideal: LocalIdeal<F>) -> GermMap<F> {
        GermMap { source_ideal: self.source_ideal.clone(), target_ideal, components: self.components.clone() }
    }

    /// Same map with a different source ideal.
    pub fn with_source_ideal(&self, source_ideal: LocalIdeal<F>) -> GermMap<F> {
        GermMap { source_ideal, target_ideal: self.target_ideal.clone(), components: self.components.clone() }
    }

    /// `f♯(q) = q(f_1, …, f_m)`.
    pub fn pullback(&self, q: &Polynomial<F>) -> Polynomial<F> {
        q.substitute(self.source(), &self.components, None)
    }

    pub fn pullback_ideal(&self, ideal: &LocalIdeal<F>) -> LocalIdeal<F> {
        LocalIdeal::new(self.source(), ideal.generators().iter().map(|q| self.pullback(q)))
    }

    /// Checks the germ axioms: components vanish at `o`, both ideals are
    /// proper, and `f♯(J_Y) ⊆ J_X`.
    pub fn validate(&self) -> Result<ValidationNotes, GermError> {
        for c in &self.components {
            if !c.constant_term().is_zero() {
                return Err(GermError::NonzeroConstant { component: c.to_string() });
            }
        }
        if self.source_ideal.is_unit() {
            return Err(GermError::EmptyGerm { side: "source".into() });
        }
        if self.target_ideal.is_unit() {
            return Err(GermError::EmptyGerm { side: "target".into() });
        }
        for q in self.target_ideal.generators() {
            let nf = self.source_ideal.normal_form(&self.pullback(q));
            if !nf.is_zero() {
                return Err(GermError::Pullback { generator: q.to_string(), normal_form: nf.to_string() });
            }
        }
        let mut notes = ValidationNotes::default();
        for g in self.source_ideal.generators().iter().chain(self.target_ideal.generators()) {
            if g.ord().is_some_and(|o| o < 2) {
                notes.non_minimal_embedding.push(g.to_string());
            }
        }
        Ok(notes)
    }

    /// Whether the fibre `J_X + extra + (f)` has finite length.
    pub fn is_finite_on(&self, extra: Option<&LocalIdeal<F>>) -> bool {
        let mut i = self.source_ideal.with_generators(self.components.iter().cloned());
        if let Some(e) = extra {
            i = i.sum(e);
        }
        i.quotient_dimension().is_finite()
    }

    /// Whether `f` has full generic rank, decided at sample points. Sound:
    /// a `true` answer proves the components algebraically independent.
    fn has_full_generic_rank(&self) -> bool {
        let n = self.n();
        let m = self.m();
        if m > n {
            return false;
        }
        let field = self.source().field();
        let jac: Vec<Vec<Polynomial<F>>> = self.components.iter().map(|f| (0..n).map(|j| f.diff(j)).collect()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..6 {
            let pt: Vec<F> = (0..n).map(|_| F::from_i64(&field, rng.gen_range(-7..=7))).collect();
            let rows: Vec<Vec<F>> = jac.iter().map(|r| r.iter().map(|p| p.evaluate(&pt)).collect()).collect();
            if linalg::rank(&rows) == m {
                return true;
            }
        }
        false
    }

    /// `ker(f♯)` restricted to `J_X + extra`, by elimination of the source
    /// variables from `J_X + extra + (y − f)`, plus `J_Y`.
    pub fn image_ideal(&self, extra: Option<&LocalIdeal<F>>) -> Image<F> {
        let target = self.target().clone();
        let closure = !self.is_finite_on(extra);
        if extra.is_none() && self.source_ideal.is_zero() && self.has_full_generic_rank() {
            return Image { ideal: self.target_ideal.clone(), closure };
        }
        let n = self.n();
        let m = self.m();
        let big = self.source().extend(target.names());
        let src_map: Vec<usize> = (0..n).collect();
        let mut gens: Vec<Polynomial<F>> = Vec::new();
        for g in self.source_ideal.generators() {
            gens.push(g.embed(&big, &src_map));
        }
        if let Some(e) = extra {
            for g in e.generators() {
                gens.push(g.embed(&big, &src_map));
            }
        }
        for (l, f) in self.components.iter().enumerate() {
            gens.push(&Polynomial::var(&big, n + l) - &f.embed(&big, &src_map));
        }
        let elim: Vec<usize> = (0..n).collect();
        let image = eliminate_polys(&gens, &elim, &target);
        debug_assert_eq!(target.nvars(), m);
        let ideal = self.target_ideal.with_generators(image).minimized();
        Image { ideal, closure }
    }

    /// Dominance: the image ideal reduces to zero modulo `J_Y`, and `J_Y`
    /// lies in its radical within `bound`.
    pub fn is_dominant(&self, bound: u32) -> Dominance {
        let img = self.image_ideal(None).ideal;
        let forward = img.generators().iter().all(|g| self.target_ideal.contains(g));
        let backward = self
            .target_ideal
            .generators()
            .iter()
            .all(|q| matches!(img.radical_membership(q, bound), RadicalVerdict::Member(_)));
        Dominance { dominant: forward && backward, radical_bound: bound }
    }

    /// Replaces the target by the image of `X`.
    pub fn corestrict(&self) -> GermMap<F> {
        self.with_target_ideal(self.image_ideal(None).ideal)
    }

    /// `dim X − dim(image closure)`.
    pub fn generic_fibre_dimension(&self) -> usize {
        let dx = self.source_ideal.krull_dimension().unwrap_or(0);
        let dy = self.image_ideal(None).ideal.krull_dimension().unwrap_or(0);
        dx.saturating_sub(dy)
    }

    /// `Fitt_d(Ω_{X/Y})`: generators `dx_j`, relations `dq` for `q ∈ J_X`
    /// and `df_i`, over `R_X`.
    pub fn relative_differentials_fitting(&self, d: usize, guard: usize) -> Result<LocalIdeal<F>, ModError> {
        let n = self.n();
        let mut rels: Vec<Vec<Polynomial<F>>> = Vec::new();
        for q in self.source_ideal.generators() {
            rels.push((0..n).map(|j| q.diff(j)).collect());
        }
        for f in &self.components {
            rels.push((0..n).map(|j| f.diff(j)).collect());
        }
        ModulePresentation::new(&self.source_ideal, n, rels).fitting_ideal(d, guard)
    }

    /// Jacobian matrix `∂f_i/∂x_j`, rows indexed by components.
    pub fn jacobian(&self) -> Vec<Vec<Polynomial<F>>> {
        self.components.iter().map(|f| (0..self.n()).map(|j| f.diff(j)).collect()).collect()
    }
}

impl<F: Scalar> fmt::Display for GermMap<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let comps: Vec<String> = self.components.iter().map(|c| c.to_string()).collect();
        write!(f, "({}) : {} -> {}", comps.join(", "), self.source_ideal, self.target_ideal)
    }
}

/// Derivations of `k[x]_(x)` preserving each constraint ideal.
///
/// One row `∇q` per generator `q` of each constraint, tested modulo that
/// constraint; the kernel is computed in a single syzygy computation.
pub fn log_derivations<F: Scalar>(ring: &Arc<Ring>, constraints: &[LocalIdeal<F>]) -> DerivationModule<F> {
    let n = ring.nvars();
    let mut rows = Vec::new();
    let mut row_ideals = Vec::new();
    for c in constraints {
        for q in c.generators() {
            rows.push((0..n).map(|j| q.diff(j)).collect::<Vec<_>>());
            row_ideals.push(c.clone());
        }
    }
    let zero = LocalIdeal::zero(ring);
    let k = kernel_with_row_ideals(&zero, n, &rows, &row_ideals);
    let out = DerivationModule { ring: ring.clone(), gens: k.gens };
    for a in &out.gens {
        for c in constraints {
            for q in c.generators() {
                assert!(c.contains(&DerivationModule::apply(a, q)), "derivation fails its logarithmic test");
            }
        }
    }
    out
}
