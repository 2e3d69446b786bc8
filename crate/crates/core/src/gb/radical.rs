//! Certified reduced structures for the cases we can decide exactly.

use std::sync::Arc;

use serde::Serialize;

use super::{eliminate_polys, exact_division, LocalIdeal};
use crate::field::Scalar;
use crate::ring::{Monomial, MonomialOrder, Polynomial, Ring};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Reducedness {
    /// The returned ideal is radical; `reason` names the certificate.
    Reduced { reason: String },
    /// No certificate; the ideal is carried as computed.
    UnreducedFallback { bound: u32 },
}

impl Reducedness {
    pub fn is_reduced(&self) -> bool {
        matches!(self, Reducedness::Reduced { .. })
    }

    fn because(reason: &str) -> Self {
        Reducedness::Reduced { reason: reason.to_string() }
    }
}

/// Replaces `ideal` by its radical when one of the exact certificates
/// applies, otherwise returns it unchanged with a fallback flag.
pub fn reduced_structure<F: Scalar>(ideal: &LocalIdeal<F>, bound: u32) -> (LocalIdeal<F>, Reducedness) {
    let ring = ideal.ring().clone();
    if ideal.is_zero() {
        return (ideal.clone(), Reducedness::because("zero-ideal"));
    }
    if ideal.is_unit() {
        return (LocalIdeal::unit(&ring), Reducedness::because("unit-ideal"));
    }
    if ideal.quotient_dimension().is_finite() {
        return (LocalIdeal::maximal(&ring), Reducedness::because("zero-dimensional"));
    }
    let leads = ideal.leading_monomials();
    if leads.iter().all(|m| m.degree() == 1) {
        return (ideal.clone(), Reducedness::because("smooth"));
    }
    let min = ideal.minimized();
    if min.generators().iter().all(|g| g.len() == 1) {
        let gens = min.generators().iter().map(|g| square_free_monomial(g));
        let out = LocalIdeal::new(&ring, gens).minimized();
        return (out, Reducedness::because("monomial"));
    }
    if min.generators().len() == 1 && ring.characteristic() == 0 {
        let q = square_free_part(&min.generators()[0]);
        return (LocalIdeal::new(&ring, [q]), Reducedness::because("principal-square-free"));
    }
    (ideal.clone(), Reducedness::UnreducedFallback { bound })
}

fn square_free_monomial<F: Scalar>(g: &Polynomial<F>) -> Polynomial<F> {
    let (m, _) = g.terms().next().expect("monomial generator");
    let exps = m.exponents().iter().map(|&e| e.min(1)).collect();
    Polynomial::monomial(g.ring(), Monomial::from_exponents(exps), F::from_i64(&g.ring().field(), 1))
}

/// `p / gcd(p, ∂p/∂x_1, …, ∂p/∂x_n)`, normalized. Characteristic zero only.
pub fn square_free_part<F: Scalar>(p: &Polynomial<F>) -> Polynomial<F> {
    assert_eq!(p.ring().characteristic(), 0, "square-free part needs characteristic zero");
    let mut g = p.clone();
    for i in 0..p.ring().nvars() {
        let d = p.diff(i);
        if d.is_zero() {
            continue;
        }
        g = gcd(&g, &d);
        if g.is_constant() {
            break;
        }
    }
    exact_division(p, &g).expect("gcd divides").normalized()
}

/// Polynomial gcd through the lcm `(a) ∩ (b)`.
pub fn gcd<F: Scalar>(a: &Polynomial<F>, b: &Polynomial<F>) -> Polynomial<F> {
    let l = lcm(a, b);
    let prod = a * b;
    exact_division(&prod, &l).expect("lcm divides the product").normalized()
}

fn lcm<F: Scalar>(a: &Polynomial<F>, b: &Polynomial<F>) -> Polynomial<F> {
    let ring: &Arc<Ring> = a.ring();
    let n = ring.nvars();
    let big = ring.extend(&["t"]);
    let ids: Vec<usize> = (0..n).collect();
    let t = Polynomial::var(&big, n);
    let one = Polynomial::one(&big);
    let gens = vec![&t * &a.embed(&big, &ids), &(&one - &t) * &b.embed(&big, &ids)];
    let mut out = eliminate_polys(&gens, &[n], ring);
    out.sort_by_key(|g| g.len());
    assert_eq!(out.len(), 1, "intersection of principal ideals is principal");
    let ord = MonomialOrder::GlobalDegRevLex;
    debug_assert!(out[0].leading_term(&ord).is_some());
    out.remove(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{CoefficientField, Rational};
    use crate::ring::parse_poly;

    fn ring(names: &[&str]) -> Arc<Ring> {
        Ring::new(names, CoefficientField::Rationals).unwrap()
    }

    #[test]
    fn square_free_parts() {
        let r = ring(&["x", "y"]);
        let p: Polynomial<Rational> = parse_poly("x^3*y^2 + x^3*y^3", &r).unwrap();
        let q = square_free_part(&p);
        let expect: Polynomial<Rational> = parse_poly("x*y + x*y^2", &r).unwrap();
        assert_eq!(q, expect.normalized());
    }

    #[test]
    fn certificates() {
        let r = ring(&["x", "y"]);
        let i = |gs: &[&str]| LocalIdeal::new(&r, gs.iter().map(|g| parse_poly::<Rational>(g, &r).unwrap()));
        let (red, cert) = reduced_structure(&i(&["x^2", "y^3"]), 8);
        assert!(cert.is_reduced());
        assert!(red.equal(&LocalIdeal::maximal(&r)));
        let (red, cert) = reduced_structure(&i(&["y^2 - x^3"]), 8);
        assert!(cert.is_reduced());
        assert!(red.equal(&i(&["y^2 - x^3"])));
        let (red, _) = reduced_structure(&i(&["(y^2 - x^3)^2"]), 8);
        assert!(red.equal(&i(&["y^2 - x^3"])));
        let (red, _) = reduced_structure(&i(&["x^2*y"]), 8);
        assert!(red.equal(&i(&["x*y"])));
    }
}
