//! Ideals in local rings at the origin and polynomial elimination.

pub(crate) mod engine;
mod radical;

use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::Serialize;

use crate::field::Scalar;
use crate::ring::{Monomial, MonomialOrder, Polynomial, Ring};
use engine::{ModOrder, Vector};

pub use radical::{reduced_structure, square_free_part, Reducedness};

/// Dimension of `k[x]_(x) / I` as a vector space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum QuotientDim {
    Finite(u64),
    Infinite,
}

impl QuotientDim {
    pub fn is_finite(&self) -> bool {
        matches!(self, QuotientDim::Finite(_))
    }
}

impl fmt::Display for QuotientDim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuotientDim::Finite(n) => write!(f, "finite({n})"),
            QuotientDim::Infinite => write!(f, "infinite"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "exponent", rename_all = "kebab-case")]
pub enum RadicalVerdict {
    Member(u32),
    NotDecidedWithinBound,
}

/// An ideal of the local ring `k[x]_(x)`, given by polynomial generators.
///
/// The local standard basis is computed on first use and cached.
pub struct LocalIdeal<F> {
    ring: Arc<Ring>,
    gens: Vec<Polynomial<F>>,
    sb: OnceLock<Vec<Polynomial<F>>>,
}

impl<F: Scalar> Clone for LocalIdeal<F> {
    fn clone(&self) -> Self {
        LocalIdeal { ring: self.ring.clone(), gens: self.gens.clone(), sb: self.sb.clone() }
    }
}

impl<F: Scalar> fmt::Debug for LocalIdeal<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LocalIdeal{}", self)
    }
}

impl<F: Scalar> fmt::Display for LocalIdeal<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.generator_strings().join(", "))
    }
}

fn local_order() -> ModOrder {
    ModOrder::new(MonomialOrder::LocalDegRevLex)
}

fn to_vec<F: Scalar>(p: &Polynomial<F>, ord: &ModOrder) -> Vector<F> {
    Vector::from_polys(std::slice::from_ref(p), 0, ord)
}

fn to_poly<F: Scalar>(v: &Vector<F>, ring: &Arc<Ring>) -> Polynomial<F> {
    v.block(ring, 0, 1).pop().expect("rank one")
}

impl<F: Scalar> LocalIdeal<F> {
    pub fn new(ring: &Arc<Ring>, gens: impl IntoIterator<Item = Polynomial<F>>) -> Self {
        let gens: Vec<Polynomial<F>> = gens.into_iter().filter(|g| !g.is_zero()).collect();
        for g in &gens {
            assert!(Ring::same(g.ring(), ring), "generator from a different ring");
        }
        LocalIdeal { ring: ring.clone(), gens, sb: OnceLock::new() }
    }

    pub fn zero(ring: &Arc<Ring>) -> Self {
        LocalIdeal::new(ring, [])
    }

    pub fn unit(ring: &Arc<Ring>) -> Self {
        LocalIdeal::new(ring, [Polynomial::one(ring)])
    }

    /// The maximal ideal `(x_1, …, x_n)`.
    pub fn maximal(ring: &Arc<Ring>) -> Self {
        LocalIdeal::new(ring, (0..ring.nvars()).map(|i| Polynomial::var(ring, i)))
    }

    pub fn ring(&self) -> &Arc<Ring> {
        &self.ring
    }

    pub fn generators(&self) -> &[Polynomial<F>] {
        &self.gens
    }

    pub fn is_zero(&self) -> bool {
        self.gens.is_empty()
    }

    /// Minimal local standard basis under the negative degree reverse
    /// lexicographic order, each element monic.
    pub fn standard_basis(&self) -> &[Polynomial<F>] {
        self.sb.get_or_init(|| {
            let ord = local_order();
            let gens = self.gens.iter().map(|g| to_vec(g, &ord)).collect();
            let out = engine::standard_basis(gens, &ord, None, true);
            out.basis.iter().map(|v| to_poly(v, &self.ring)).collect()
        })
    }

    fn sb_vectors(&self, ord: &ModOrder) -> Vec<Vector<F>> {
        self.standard_basis().iter().map(|g| to_vec(g, ord)).collect()
    }

    /// Mora normal form. Zero exactly when `p` lies in the ideal.
    pub fn normal_form(&self, p: &Polynomial<F>) -> Polynomial<F> {
        let ord = local_order();
        let basis = self.sb_vectors(&ord);
        to_poly(&engine::normal_form(&to_vec(p, &ord), &basis, &ord, None), &self.ring)
    }

    pub fn contains(&self, p: &Polynomial<F>) -> bool {
        p.is_zero() || self.normal_form(p).is_zero()
    }

    pub fn contains_ideal(&self, other: &LocalIdeal<F>) -> bool {
        other.gens.iter().all(|g| self.contains(g))
    }

    pub fn equal(&self, other: &LocalIdeal<F>) -> bool {
        self.contains_ideal(other) && other.contains_ideal(self)
    }

    pub fn is_unit(&self) -> bool {
        self.standard_basis().iter().any(|g| g.is_local_unit())
    }

    /// Leading monomials of the standard basis.
    pub fn leading_monomials(&self) -> Vec<Monomial> {
        let ord = MonomialOrder::LocalDegRevLex;
        self.standard_basis().iter().map(|g| g.leading_term(&ord).expect("nonzero").0).collect()
    }

    pub fn sum(&self, other: &LocalIdeal<F>) -> LocalIdeal<F> {
        LocalIdeal::new(&self.ring, self.gens.iter().chain(other.gens.iter()).cloned())
    }

    pub fn with_generators(&self, extra: impl IntoIterator<Item = Polynomial<F>>) -> LocalIdeal<F> {
        LocalIdeal::new(&self.ring, self.gens.iter().cloned().chain(extra))
    }

    pub fn product(&self, other: &LocalIdeal<F>) -> LocalIdeal<F> {
        let mut out = Vec::new();
        for a in &self.gens {
            for b in &other.gens {
                out.push(a * b);
            }
        }
        LocalIdeal::new(&self.ring, out)
    }

    pub fn power(&self, n: u32) -> LocalIdeal<F> {
        let mut acc = LocalIdeal::unit(&self.ring);
        for _ in 0..n {
            acc = acc.product(self).minimized();
        }
        acc
    }

    /// Same ideal with duplicate and redundant generators removed.
    pub fn minimized(&self) -> LocalIdeal<F> {
        if self.is_unit() {
            return LocalIdeal::unit(&self.ring);
        }
        let mut gens: Vec<Polynomial<F>> = Vec::new();
        for g in &self.gens {
            let n = g.normalized();
            if !gens.contains(&n) {
                gens.push(n);
            }
        }
        let mut i = 0;
        while i < gens.len() {
            let rest: Vec<Polynomial<F>> = gens.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, g)| g.clone()).collect();
            if LocalIdeal::new(&self.ring, rest.clone()).contains(&gens[i]) {
                gens = rest;
            } else {
                i += 1;
            }
        }
        let out = LocalIdeal::new(&self.ring, gens);
        let _ = out.sb.set(self.standard_basis().to_vec());
        out
    }

    /// Generators as normalized strings, sorted. `1` for the unit ideal and
    /// `0` for the zero ideal.
    pub fn generator_strings(&self) -> Vec<String> {
        if self.gens.is_empty() {
            return vec!["0".to_string()];
        }
        let m = self.minimized();
        if m.is_unit() {
            return vec!["1".to_string()];
        }
        let mut out: Vec<String> = m.gens.iter().map(|g| g.normalized().to_string()).collect();
        out.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
        out
    }

    /// Counts standard monomials of the leading ideal.
    pub fn quotient_dimension(&self) -> QuotientDim {
        if self.is_unit() {
            return QuotientDim::Finite(0);
        }
        let leads = self.leading_monomials();
        let n = self.ring.nvars();
        for i in 0..n {
            let pure = leads.iter().any(|m| m.exponent(i) > 0 && m.degree() == m.exponent(i));
            if !pure {
                return QuotientDim::Infinite;
            }
        }
        let mut count = 0u64;
        let mut d = 0;
        loop {
            let standard = Monomial::all_of_degree(n, d)
                .into_iter()
                .filter(|m| !leads.iter().any(|l| l.divides(m)))
                .count() as u64;
            if standard == 0 {
                return QuotientDim::Finite(count);
            }
            count += standard;
            d += 1;
        }
    }

    /// Krull dimension of the quotient: largest set of variables carrying no
    /// leading monomial of the standard basis.
    pub fn krull_dimension(&self) -> Option<usize> {
        if self.is_unit() {
            return None;
        }
        let leads = self.leading_monomials();
        let n = self.ring.nvars();
        let mut best = 0;
        for mask in 0u64..(1u64 << n) {
            let size = mask.count_ones() as usize;
            if size <= best {
                continue;
            }
            let inside = |m: &Monomial| (0..n).all(|i| m.exponent(i) == 0 || mask & (1 << i) != 0);
            if !leads.iter().any(inside) {
                best = size;
            }
        }
        Some(best)
    }

    /// Smallest `e ≤ bound` with `p^e` in the ideal.
    pub fn radical_membership(&self, p: &Polynomial<F>, bound: u32) -> RadicalVerdict {
        let mut acc = Polynomial::one(&self.ring);
        for e in 1..=bound {
            acc = &acc * p;
            if self.contains(&acc) {
                return RadicalVerdict::Member(e);
            }
        }
        RadicalVerdict::NotDecidedWithinBound
    }

    /// Canonical representative of `p` modulo `I + m^{k+1}`: full reduction
    /// by the standard basis with all terms above degree `k` dropped.
    pub fn truncated_normal_form(&self, p: &Polynomial<F>, k: u32) -> Polynomial<F> {
        if self.standard_basis().is_empty() {
            return p.truncate(k);
        }
        let order = MonomialOrder::LocalDegRevLex;
        let basis: Vec<(Monomial, F, Polynomial<F>)> = self
            .standard_basis()
            .iter()
            .map(|g| {
                let (m, c) = g.leading_term(&order).expect("nonzero");
                (m, c, g.clone())
            })
            .collect();
        let mut h = p.truncate(k);
        let mut rem = Polynomial::zero(&self.ring);
        while let Some((m, c)) = h.leading_term(&order) {
            match basis.iter().find(|(l, _, _)| l.divides(&m)) {
                Some((l, lc, g)) => {
                    let q = l.quotient_of(&m);
                    let s = c / lc.clone();
                    h = &h - &g.mul_term(&q, &s).truncate(k);
                }
                None => {
                    rem.add_term(m.clone(), c.clone());
                    h.add_term(m, -c);
                }
            }
        }
        rem
    }

    /// Whether `p ∈ I + m^{k+1}`.
    pub fn contains_mod_degree(&self, p: &Polynomial<F>, k: u32) -> bool {
        self.truncated_normal_form(p, k).is_zero()
    }
}

/// Free-function form of [`LocalIdeal::standard_basis`]; `ord` selects Mora
/// (local) or Buchberger (global or block).
pub fn standard_basis<F: Scalar>(gens: &[Polynomial<F>], ring: &Arc<Ring>, ord: &MonomialOrder) -> Vec<Polynomial<F>> {
    let mo = ModOrder::new(ord.clone());
    let vs = gens.iter().filter(|g| !g.is_zero()).map(|g| to_vec(g, &mo)).collect();
    engine::standard_basis(vs, &mo, None, true).basis.iter().map(|v| to_poly(v, ring)).collect()
}

pub fn normal_form<F: Scalar>(p: &Polynomial<F>, ideal: &LocalIdeal<F>) -> Polynomial<F> {
    ideal.normal_form(p)
}

pub fn ideal_equal<F: Scalar>(a: &LocalIdeal<F>, b: &LocalIdeal<F>) -> bool {
    a.equal(b)
}

pub fn bounded_radical_membership<F: Scalar>(p: &Polynomial<F>, ideal: &LocalIdeal<F>, bound: u32) -> RadicalVerdict {
    assert!(bound >= 1, "radical bound must be positive");
    ideal.radical_membership(p, bound)
}

pub fn local_quotient_dimension<F: Scalar>(ideal: &LocalIdeal<F>) -> QuotientDim {
    ideal.quotient_dimension()
}

/// Polynomial elimination `I ∩ k[remaining variables]` via a block order,
/// returned in the ring of the remaining variables.
pub fn eliminate_polys<F: Scalar>(gens: &[Polynomial<F>], elim: &[usize], target: &Arc<Ring>) -> Vec<Polynomial<F>> {
    let ring = gens.first().map(|g| g.ring().clone());
    let Some(ring) = ring else {
        return Vec::new();
    };
    let n = ring.nvars();
    let ord = MonomialOrder::block(n, elim);
    let gb = standard_basis(gens, &ring, &ord);
    let mut keep_map: Vec<Option<usize>> = vec![None; n];
    let mut next = 0;
    for (i, slot) in keep_map.iter_mut().enumerate() {
        if !elim.contains(&i) {
            *slot = Some(next);
            next += 1;
        }
    }
    assert_eq!(next, target.nvars(), "target ring must hold the remaining variables");
    gb.iter().filter_map(|g| g.restrict(target, &keep_map)).collect()
}

/// Eliminates the variables `elim` from `ideal`; the result lives in a ring
/// over the remaining variables (same names, same order).
pub fn eliminate<F: Scalar>(ideal: &LocalIdeal<F>, elim: &[usize]) -> LocalIdeal<F> {
    let ring = ideal.ring();
    let names: Vec<&str> = ring.names().iter().enumerate().filter(|(i, _)| !elim.contains(i)).map(|(_, n)| n.as_str()).collect();
    let target = Ring::new(&names, ring.field()).expect("subset of valid names");
    if ideal.is_zero() {
        return LocalIdeal::zero(&target);
    }
    LocalIdeal::new(&target, eliminate_polys(ideal.generators(), elim, &target))
}

/// Exact quotient `a / d` in the polynomial ring; `None` if `d` does not
/// divide `a`.
pub fn exact_division<F: Scalar>(a: &Polynomial<F>, d: &Polynomial<F>) -> Option<Polynomial<F>> {
    let ord = MonomialOrder::GlobalDegRevLex;
    let (dm, dc) = d.leading_term(&ord)?;
    let mut r = a.clone();
    let mut q = Polynomial::zero(a.ring());
    while let Some((m, c)) = r.leading_term(&ord) {
        if !dm.divides(&m) {
            return None;
        }
        let t = dm.quotient_of(&m);
        let s = c / dc.clone();
        r = &r - &d.mul_term(&t, &s);
        q.add_term(t, s);
    }
    Some(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{CoefficientField, Rational};
    use crate::ring::parse_poly;

    fn ring(names: &[&str]) -> Arc<Ring> {
        Ring::new(names, CoefficientField::Rationals).unwrap()
    }

    fn p(s: &str, r: &Arc<Ring>) -> Polynomial<Rational> {
        parse_poly(s, r).unwrap()
    }

    fn ideal(gens: &[&str], r: &Arc<Ring>) -> LocalIdeal<Rational> {
        LocalIdeal::new(r, gens.iter().map(|g| p(g, r)))
    }

    #[test]
    fn local_unit_is_absorbed() {
        let r = ring(&["x"]);
        let i = ideal(&["x - x^2"], &r);
        assert_eq!(i.standard_basis().len(), 1);
        assert_eq!(i.leading_monomials()[0].degree(), 1);
        assert!(i.normal_form(&p("x", &r)).is_zero());
    }

    #[test]
    fn coordinate_ideal_basis() {
        let r = ring(&["x", "y"]);
        for ord in [MonomialOrder::LocalDegRevLex, MonomialOrder::GlobalDegRevLex] {
            let sb = standard_basis(&[p("x", &r), p("y", &r)], &r, &ord);
            assert_eq!(sb.len(), 2);
        }
    }

    #[test]
    fn block_order_basis_contains_cusp() {
        let r = ring(&["t", "u", "v"]);
        let gb = standard_basis(&[p("u - t^2", &r), p("v - t^3", &r)], &r, &MonomialOrder::block(3, &[0]));
        let cusp = p("u^3 - v^2", &r);
        assert!(gb.iter().any(|g| g.normalized() == cusp.normalized()));
    }

    #[test]
    fn normal_form_examples() {
        let r = ring(&["x", "y"]);
        assert_eq!(ideal(&["x"], &r).normal_form(&p("y", &r)), p("y", &r));
        assert_eq!(ideal(&["x - y^2"], &r).normal_form(&p("x^2", &r)), p("y^4", &r));
    }

    #[test]
    fn equality_examples() {
        let r = ring(&["t"]);
        assert!(ideal(&["2*t", "3*t^2"], &r).equal(&ideal(&["t"], &r)));
        let r = ring(&["x"]);
        assert!(!ideal(&["x^2"], &r).equal(&ideal(&["x"], &r)));
        assert!(LocalIdeal::<Rational>::zero(&r).equal(&LocalIdeal::zero(&r)));
    }

    #[test]
    fn radical_examples() {
        let r = ring(&["x", "y"]);
        assert_eq!(bounded_radical_membership(&p("x", &r), &ideal(&["x^2"], &r), 8), RadicalVerdict::Member(2));
        assert_eq!(bounded_radical_membership(&p("x + y", &r), &ideal(&["x^2", "y^2"], &r), 8), RadicalVerdict::Member(3));
        assert_eq!(bounded_radical_membership(&p("x", &r), &ideal(&["y"], &r), 8), RadicalVerdict::NotDecidedWithinBound);
    }

    #[test]
    fn quotient_dimension_examples() {
        let r = ring(&["x", "y"]);
        assert_eq!(ideal(&["x^2", "x*y", "y^3"], &r).quotient_dimension(), QuotientDim::Finite(4));
        assert_eq!(ideal(&["x"], &r).quotient_dimension(), QuotientDim::Infinite);
        assert_eq!(ideal(&["x", "y"], &r).quotient_dimension(), QuotientDim::Finite(1));
        assert_eq!(ideal(&["1 + x"], &r).quotient_dimension(), QuotientDim::Finite(0));
    }

    #[test]
    fn elimination_examples() {
        let r = ring(&["t", "u", "v"]);
        let e = eliminate(&ideal(&["u - t^2", "v - t^3"], &r), &[0]);
        assert!(e.equal(&ideal(&["u^3 - v^2"], e.ring())));
        let r = ring(&["x", "y"]);
        let e = eliminate(&ideal(&["x"], &r), &[1]);
        assert!(e.equal(&ideal(&["x"], e.ring())));
        let r = ring(&["x", "y", "u", "v"]);
        let e = eliminate(&ideal(&["u - x", "v - x*y"], &r), &[0, 1]);
        assert!(e.is_zero() || e.generators().iter().all(|g| g.is_zero()));
    }

    #[test]
    fn truncated_normal_form_decides_jets() {
        let r = ring(&["x", "y"]);
        let i = ideal(&["x*y"], &r);
        assert!(i.contains_mod_degree(&p("x*y + x^5", &r), 4));
        assert!(!i.contains_mod_degree(&p("x*y + x^4", &r), 4));
        assert!(i.contains_mod_degree(&p("x*y*(1 + x + y^3)", &r), 3));
    }

    #[test]
    fn krull_dimension_from_leads() {
        let r = ring(&["x", "y", "z"]);
        assert_eq!(ideal(&["x*y"], &r).krull_dimension(), Some(2));
        assert_eq!(ideal(&["x", "y"], &r).krull_dimension(), Some(1));
        assert_eq!(LocalIdeal::<Rational>::unit(&r).krull_dimension(), None);
    }
}
