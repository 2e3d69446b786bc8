//! Finitely generated modules over `R/J` with `R = k[x]_(x)`.
//!
//! Every computation lifts to the free module over `R` and appends
//! `J`-multiples of the unit vectors, so a single standard-basis engine
//! serves ideals and modules alike.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::field::Scalar;
use crate::gb::engine::{self, ModOrder, Vector};
use crate::gb::LocalIdeal;
use crate::ring::{MonomialOrder, Polynomial, Ring};

/// Default cap on the size of minors enumerated for Fitting ideals.
pub const DEFAULT_MINOR_GUARD: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize)]
pub enum ModError {
    #[error("generator {index} of the submodule is not contained in the ambient submodule")]
    NotContained { index: usize },
    #[error("Fitting ideal needs {size}x{size} minors, above the guard of {guard}; raise --minor-guard")]
    MinorGuard { size: usize, guard: usize },
}

pub type ColumnVec<F> = Vec<Polynomial<F>>;

fn local() -> ModOrder {
    ModOrder::new(MonomialOrder::LocalDegRevLex)
}

fn zero_vec<F: Scalar>(ring: &Arc<Ring>, n: usize) -> ColumnVec<F> {
    vec![Polynomial::zero(ring); n]
}

fn unit_vec<F: Scalar>(ring: &Arc<Ring>, n: usize, i: usize) -> ColumnVec<F> {
    let mut v = zero_vec(ring, n);
    v[i] = Polynomial::one(ring);
    v
}

/// Scales a vector so its coefficients are canonical (primitive integral
/// over Q, monic over F_p).
fn normalize_vec<F: Scalar>(v: ColumnVec<F>) -> ColumnVec<F> {
    let coeffs: Vec<F> = v.iter().flat_map(|p| p.terms().map(|(_, c)| c.clone()).collect::<Vec<_>>()).collect();
    let s = F::normalizer(coeffs.iter());
    v.into_iter().map(|p| p.scale(&s)).collect()
}

/// A submodule of `(R/J)^rank` given by generators.
#[derive(Clone, Debug)]
pub struct Submodule<F: Scalar> {
    pub ring: Arc<Ring>,
    pub rank: usize,
    pub quotient: LocalIdeal<F>,
    pub gens: Vec<ColumnVec<F>>,
}

impl<F: Scalar> Submodule<F> {
    pub fn new(quotient: &LocalIdeal<F>, rank: usize, gens: Vec<ColumnVec<F>>) -> Self {
        for g in &gens {
            assert_eq!(g.len(), rank, "generator of the wrong rank");
        }
        Submodule { ring: quotient.ring().clone(), rank, quotient: quotient.clone(), gens }
    }

    /// The whole free module, generated by unit vectors.
    pub fn free(quotient: &LocalIdeal<F>, rank: usize) -> Self {
        let ring = quotient.ring().clone();
        let gens = (0..rank).map(|i| unit_vec(&ring, rank, i)).collect();
        Submodule::new(quotient, rank, gens)
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    /// Whether `v` vanishes in `(R/J)^rank`.
    pub fn is_trivial(&self, v: &[Polynomial<F>]) -> bool {
        v.iter().all(|p| self.quotient.contains(p))
    }

    /// Module-membership oracle with cached standard basis.
    pub fn lifter(&self) -> Lifter<F> {
        Lifter::new(self)
    }

    /// Mutual containment.
    pub fn equal(&self, other: &Submodule<F>) -> bool {
        let a = self.lifter();
        let b = other.lifter();
        other.gens.iter().all(|g| a.lift(g).is_some()) && self.gens.iter().all(|g| b.lift(g).is_some())
    }
}

/// `c` with `unit · v = Σ c_i · gen_i` in `(R/J)^rank`, `unit` a local unit.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalLift<F: Scalar> {
    pub unit: Polynomial<F>,
    pub coeffs: Vec<Polynomial<F>>,
}

/// Standard basis of `(gens | 0 | e_i) + J·(e_k | 0 | 0)` prepared for
/// repeated division.
pub struct Lifter<F: Scalar> {
    ring: Arc<Ring>,
    rank: usize,
    ngens: usize,
    gens: Vec<ColumnVec<F>>,
    quotient: LocalIdeal<F>,
    basis: Vec<Vector<F>>,
    ord: ModOrder,
}

impl<F: Scalar> Lifter<F> {
    fn new(sub: &Submodule<F>) -> Self {
        let ord = local();
        let r = sub.rank;
        let s = sub.len();
        let ring = sub.ring.clone();
        let mut vs = Vec::new();
        for (i, g) in sub.gens.iter().enumerate() {
            let v = Vector::from_polys(g, 0, &ord).with_block(&unit_vec(&ring, s, i), r as u32 + 1, &ord);
            vs.push(v);
        }
        for q in sub.quotient.standard_basis() {
            for k in 0..r {
                let mut col = zero_vec(&ring, r);
                col[k] = q.clone();
                vs.push(Vector::from_polys(&col, 0, &ord));
            }
        }
        let basis = engine::standard_basis(vs, &ord, Some(r as u32), false).basis;
        Lifter { ring, rank: r, ngens: s, gens: sub.gens.clone(), quotient: sub.quotient.clone(), basis, ord }
    }

    /// Expresses `v` through the generators, or `None` if `v` is not in the
    /// submodule. The result is verified exactly.
    pub fn lift(&self, v: &[Polynomial<F>]) -> Option<LocalLift<F>> {
        assert_eq!(v.len(), self.rank);
        let r = self.rank as u32;
        if v.iter().all(|p| p.is_zero()) {
            return Some(LocalLift { unit: Polynomial::one(&self.ring), coeffs: zero_vec(&self.ring, self.ngens) });
        }
        let start = Vector::from_polys(v, 0, &self.ord).with_block(&[Polynomial::one(&self.ring)], r, &self.ord);
        let h = engine::normal_form(&start, &self.basis, &self.ord, Some(r));
        if !h.is_zero() && h.lead_pos() < r {
            return None;
        }
        let unit = h.block(&self.ring, r, 1).pop().expect("tracker");
        let coeffs: Vec<Polynomial<F>> = h.block(&self.ring, r + 1, self.ngens).into_iter().map(|c| -c).collect();
        assert!(unit.is_local_unit(), "Mora normal form produced a non-unit multiplier");
        let out = LocalLift { unit, coeffs };
        assert!(self.verify(v, &out), "lift failed exact verification");
        Some(out)
    }

    fn verify(&self, v: &[Polynomial<F>], l: &LocalLift<F>) -> bool {
        (0..self.rank).all(|k| {
            let mut acc = &l.unit * &v[k];
            for (c, g) in l.coeffs.iter().zip(&self.gens) {
                acc = &acc - &(c * &g[k]);
            }
            self.quotient.contains(&acc)
        })
    }
}

/// Relations among the generators of `sub` over `R/J`.
///
/// Returned vectors `c` satisfy `Σ c_i · gen_i ∈ J^rank`; trivial ones (all
/// entries in `J`) are dropped.
pub fn syzygies<F: Scalar>(sub: &Submodule<F>) -> Submodule<F> {
    let ring = sub.ring.clone();
    let s = sub.len();
    let out = syzygies_with_row_ideals(&ring, sub.rank, &sub.gens, &vec![sub.quotient.clone(); sub.rank]);
    let out: Vec<ColumnVec<F>> = out.into_iter().filter(|c| !c.iter().all(|p| sub.quotient.contains(p))).collect();
    Submodule::new(&sub.quotient, s, out)
}

/// Core syzygy routine: vectors `c` with `Σ c_i gens_i[k] ∈ row_ideals[k]`.
fn syzygies_with_row_ideals<F: Scalar>(
    ring: &Arc<Ring>,
    rank: usize,
    gens: &[ColumnVec<F>],
    row_ideals: &[LocalIdeal<F>],
) -> Vec<ColumnVec<F>> {
    let ord = local();
    let r = rank as u32;
    let s = gens.len();
    let mut vs = Vec::new();
    for (i, g) in gens.iter().enumerate() {
        vs.push(Vector::from_polys(g, 0, &ord).with_block(&unit_vec(ring, s, i), r, &ord));
    }
    for (k, ideal) in row_ideals.iter().enumerate() {
        for q in ideal.standard_basis() {
            let mut col = zero_vec(ring, rank);
            col[k] = q.clone();
            vs.push(Vector::from_polys(&col, 0, &ord));
        }
    }
    let out = engine::standard_basis(vs, &ord, Some(r), false);
    let mut syz: Vec<ColumnVec<F>> = Vec::new();
    for v in out.side {
        let c = normalize_vec(v.block(ring, r, s));
        if c.iter().any(|p| !p.is_zero()) && !syz.contains(&c) {
            syz.push(c);
        }
    }
    syz
}

/// Kernel of the matrix `rows` acting on `(R/S)^m`, where row `k` is tested
/// modulo `row_ideals[k]` and `source` is the ideal `S` the result lives over.
pub fn kernel_with_row_ideals<F: Scalar>(
    source: &LocalIdeal<F>,
    m: usize,
    rows: &[Vec<Polynomial<F>>],
    row_ideals: &[LocalIdeal<F>],
) -> Submodule<F> {
    assert_eq!(rows.len(), row_ideals.len());
    let ring = source.ring().clone();
    if rows.is_empty() {
        return Submodule::free(source, m);
    }
    let columns: Vec<ColumnVec<F>> = (0..m).map(|j| rows.iter().map(|row| row[j].clone()).collect()).collect();
    let raw = syzygies_with_row_ideals(&ring, rows.len(), &columns, row_ideals);
    let gens: Vec<ColumnVec<F>> = raw.into_iter().filter(|h| !h.iter().all(|p| source.contains(p))).collect();
    for h in &gens {
        for (row, ideal) in rows.iter().zip(row_ideals) {
            let mut acc = Polynomial::zero(&ring);
            for (a, x) in row.iter().zip(h) {
                acc = &acc + &(a * x);
            }
            assert!(ideal.contains(&acc), "kernel vector failed verification");
        }
    }
    Submodule::new(source, m, gens)
}

/// `{h ∈ (R/J)^m : A·h = 0}` for a matrix `A` given by rows.
pub fn kernel_of_row_matrix<F: Scalar>(quotient: &LocalIdeal<F>, m: usize, rows: &[Vec<Polynomial<F>>]) -> Submodule<F> {
    kernel_with_row_ideals(quotient, m, rows, &vec![quotient.clone(); rows.len()])
}

/// Free-function form of [`Lifter::lift`].
pub fn lift_in_submodule<F: Scalar>(v: &[Polynomial<F>], sub: &Submodule<F>) -> Option<LocalLift<F>> {
    sub.lifter().lift(v)
}

/// Presentation matrix over `R/J`: `ngens` generators, relations as columns.
#[derive(Clone, Debug)]
pub struct ModulePresentation<F: Scalar> {
    pub ring: Arc<Ring>,
    pub quotient: LocalIdeal<F>,
    pub ngens: usize,
    pub relations: Vec<ColumnVec<F>>,
}

impl<F: Scalar> ModulePresentation<F> {
    pub fn new(quotient: &LocalIdeal<F>, ngens: usize, relations: Vec<ColumnVec<F>>) -> Self {
        for c in &relations {
            assert_eq!(c.len(), ngens, "relation column of the wrong length");
        }
        ModulePresentation { ring: quotient.ring().clone(), quotient: quotient.clone(), ngens, relations }
    }

    /// Whether the presented module is visibly zero (no generators).
    pub fn is_zero_module(&self) -> bool {
        self.ngens == 0
    }

    /// Equivalent smaller presentation: pivots on unit entries and drops
    /// relations that vanish modulo `J`.
    pub fn minimize(&self) -> ModulePresentation<F> {
        let mut rels: Vec<ColumnVec<F>> = self
            .relations
            .iter()
            .filter(|c| !c.iter().all(|p| self.quotient.contains(p)))
            .cloned()
            .collect();
        let mut alive: Vec<usize> = (0..self.ngens).collect();
        loop {
            let pivot = rels.iter().enumerate().find_map(|(ci, c)| {
                alive.iter().position(|&row| c[row].is_local_unit()).map(|ri| (ci, ri))
            });
            let Some((ci, ri)) = pivot else { break };
            let row = alive[ri];
            let col = rels.remove(ci);
            let a = col[row].clone();
            rels = rels
                .into_iter()
                .map(|c| {
                    let b = c[row].clone();
                    c.iter().zip(&col).map(|(x, y)| &(&a * x) - &(&b * y)).collect::<ColumnVec<F>>()
                })
                .filter(|c: &ColumnVec<F>| !alive.iter().filter(|&&r| r != row).all(|&r| self.quotient.contains(&c[r])))
                .collect();
            alive.remove(ri);
        }
        let relations = rels.into_iter().map(|c| normalize_vec(alive.iter().map(|&r| c[r].clone()).collect())).collect();
        ModulePresentation::new(&self.quotient, alive.len(), relations)
    }

    /// `Fitt_k`: ideal of `(s−k)`-minors of the relation matrix plus `J`.
    pub fn fitting_ideal(&self, k: usize, guard: usize) -> Result<LocalIdeal<F>, ModError> {
        let p = self.minimize();
        if k >= p.ngens {
            return Ok(LocalIdeal::unit(&self.ring));
        }
        let size = p.ngens - k;
        if size > guard {
            return Err(ModError::MinorGuard { size, guard });
        }
        if p.relations.len() < size {
            return Ok(self.quotient.clone());
        }
        let row_sets = subsets(p.ngens, size);
        let col_sets = subsets(p.relations.len(), size);
        let mut jobs = Vec::new();
        for rs in &row_sets {
            for cs in &col_sets {
                jobs.push((rs.clone(), cs.clone()));
            }
        }
        let minors: Vec<Polynomial<F>> = jobs
            .par_iter()
            .map(|(rs, cs)| {
                let m: Vec<Vec<Polynomial<F>>> =
                    rs.iter().map(|&r| cs.iter().map(|&c| p.relations[c][r].clone()).collect()).collect();
                determinant(&m, &self.ring)
            })
            .collect();
        let mut gens: Vec<Polynomial<F>> = Vec::new();
        for d in minors {
            if !d.is_zero() {
                let d = d.normalized();
                if !gens.contains(&d) {
                    gens.push(d);
                }
            }
        }
        Ok(self.quotient.with_generators(gens))
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Determinant by dynamic programming over column subsets (Laplace along
/// rows), exact and division-free.
pub fn determinant<F: Scalar>(m: &[Vec<Polynomial<F>>], ring: &Arc<Ring>) -> Polynomial<F> {
    let n = m.len();
    if n == 0 {
        return Polynomial::one(ring);
    }
    let mut dp: Vec<Polynomial<F>> = vec![Polynomial::zero(ring); 1 << n];
    dp[0] = Polynomial::one(ring);
    for mask in 0usize..(1 << n) {
        if dp[mask].is_zero() {
            continue;
        }
        let row = mask.count_ones() as usize;
        if row == n {
            continue;
        }
        for c in 0..n {
            if mask & (1 << c) != 0 || m[row][c].is_zero() {
                continue;
            }
            // sign: number of already used columns greater than c
            let above = (mask >> (c + 1)).count_ones();
            let term = &dp[mask] * &m[row][c];
            let next = mask | (1 << c);
            dp[next] = if above % 2 == 0 { &dp[next] + &term } else { &dp[next] - &term };
        }
    }
    dp[(1 << n) - 1].clone()
}

/// Presentation of `T/D` on the generators of `T`.
pub fn presentation_of_subquotient<F: Scalar>(t: &Submodule<F>, d: &Submodule<F>) -> Result<ModulePresentation<F>, ModError> {
    assert_eq!(t.rank, d.rank);
    let mut relations = syzygies(t).gens;
    debug_assert!(relations.iter().all(|c| expands_to_zero(t, c)));
    let lifter = t.lifter();
    for (index, g) in d.gens.iter().enumerate() {
        match lifter.lift(g) {
            Some(l) => relations.push(l.coeffs),
            None => return Err(ModError::NotContained { index }),
        }
    }
    Ok(ModulePresentation::new(&t.quotient, t.len(), relations))
}

/// Whether `Σ c_i · gen_i` vanishes in `(R/J)^rank`.
pub fn expands_to_zero<F: Scalar>(t: &Submodule<F>, c: &[Polynomial<F>]) -> bool {
    (0..t.rank).all(|k| {
        let mut acc = Polynomial::zero(&t.ring);
        for (ci, g) in c.iter().zip(&t.gens) {
            acc = &acc + &(ci * &g[k]);
        }
        t.quotient.contains(&acc)
    })
}

/// Free-function form of [`ModulePresentation::fitting_ideal`].
pub fn fitting_ideal<F: Scalar>(p: &ModulePresentation<F>, k: usize, guard: usize) -> Result<LocalIdeal<F>, ModError> {
    p.fitting_ideal(k, guard)
}
