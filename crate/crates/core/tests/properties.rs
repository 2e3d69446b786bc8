use std::sync::Arc;

use critgerm::gb::standard_basis;
use critgerm::jetlab::{exp_derivation, log_automorphism, JetAutomorphism, JetContext, JetDerivation};
use critgerm::{parse_poly, CoefficientField, LocalIdeal, Monomial, MonomialOrder, Polynomial, QPoly, Rational, Ring, Scalar};
use num_bigint::BigInt;
use proptest::prelude::*;

fn ring2() -> Arc<Ring> {
    Ring::new(&["x", "y"], CoefficientField::Rationals).unwrap()
}

fn q(n: i64) -> Rational {
    Rational::from_i64(&CoefficientField::Rationals, n)
}

/// Polynomial in `ring` from (exponents, coefficient) triples.
fn build(ring: &Arc<Ring>, terms: &[(u32, u32, i64)]) -> QPoly {
    Polynomial::from_terms(ring, terms.iter().map(|&(a, b, c)| (Monomial::from_exponents(vec![a, b]), q(c))))
}

fn poly_strategy(max_deg: u32, max_terms: usize) -> impl Strategy<Value = Vec<(u32, u32, i64)>> {
    prop::collection::vec((0..=max_deg, 0..=max_deg, -5i64..=5), 0..=max_terms)
}

fn local_poly_strategy(lo: u32, hi: u32) -> impl Strategy<Value = Vec<(u32, u32, i64)>> {
    prop::collection::vec((0..=hi, 0..=hi, -4i64..=4), 0..=4)
        .prop_map(move |v| v.into_iter().filter(|(a, b, _)| a + b >= lo && a + b <= hi).collect())
}

/// Division by a list under a global order; returns the remainder.
fn global_remainder(p: &QPoly, basis: &[QPoly], ord: &MonomialOrder) -> QPoly {
    let mut h = p.clone();
    let mut rem = Polynomial::zero(p.ring());
    while let Some((m, c)) = h.leading_term(ord) {
        match basis.iter().find_map(|g| {
            let (gm, gc) = g.leading_term(ord)?;
            gm.divides(&m).then(|| (g, gm, gc))
        }) {
            Some((g, gm, gc)) => h = &h - &g.mul_term(&gm.quotient_of(&m), &(c / gc)),
            None => {
                let t = Polynomial::monomial(p.ring(), m, c);
                rem = &rem + &t;
                h = &h - &t;
            }
        }
    }
    rem
}

fn s_poly(a: &QPoly, b: &QPoly, ord: &MonomialOrder) -> QPoly {
    let (am, ac) = a.leading_term(ord).unwrap();
    let (bm, bc) = b.leading_term(ord).unwrap();
    let l = am.lcm(&bm);
    &a.mul_term(&am.quotient_of(&l), &ac.inv()) - &b.mul_term(&bm.quotient_of(&l), &bc.inv())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, .. ProptestConfig::default() })]

    #[test]
    fn ring_axioms(a in poly_strategy(3, 4), b in poly_strategy(3, 4), c in poly_strategy(3, 4)) {
        let r = ring2();
        let (a, b, c) = (build(&r, &a), build(&r, &b), build(&r, &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&(&a + &b) - &b, a.clone());
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn substitution_is_a_homomorphism(a in poly_strategy(2, 3), b in poly_strategy(2, 3),
                                      s in poly_strategy(2, 3), t in poly_strategy(2, 3)) {
        let r = ring2();
        let (a, b) = (build(&r, &a), build(&r, &b));
        let imgs = vec![build(&r, &s), build(&r, &t)];
        let sub = |p: &QPoly| p.substitute(&r, &imgs, None);
        prop_assert_eq!(sub(&(&a * &b)), &sub(&a) * &sub(&b));
        prop_assert_eq!(sub(&(&a + &b)), &sub(&a) + &sub(&b));
        let k = 4;
        let subk = |p: &QPoly| p.substitute(&r, &imgs, Some(k));
        prop_assert_eq!(subk(&(&a * &b)), (&sub(&a) * &sub(&b)).truncate(k));
    }

    #[test]
    fn leibniz_rule(a in poly_strategy(4, 4), b in poly_strategy(4, 4)) {
        let r = ring2();
        let (a, b) = (build(&r, &a), build(&r, &b));
        for i in 0..2 {
            prop_assert_eq!((&a * &b).diff(i), &(&a.diff(i) * &b) + &(&a * &b.diff(i)));
        }
    }

    #[test]
    fn print_parse_roundtrip(a in poly_strategy(4, 5)) {
        let r = ring2();
        let a = build(&r, &a);
        let back: QPoly = parse_poly(&a.to_string(), &r).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn global_s_polynomials_reduce_to_zero(g in prop::collection::vec(poly_strategy(3, 3), 1..=3)) {
        let r = ring2();
        let gens: Vec<QPoly> = g.iter().map(|t| build(&r, t)).filter(|p| !p.is_zero()).collect();
        let ord = MonomialOrder::GlobalDegRevLex;
        let gb = standard_basis(&gens, &r, &ord);
        for p in &gens {
            prop_assert!(global_remainder(p, &gb, &ord).is_zero());
        }
        for i in 0..gb.len() {
            for j in i + 1..gb.len() {
                prop_assert!(global_remainder(&s_poly(&gb[i], &gb[j], &ord), &gb, &ord).is_zero());
            }
        }
    }

    #[test]
    fn local_membership_is_ideal_closed(g in prop::collection::vec(local_poly_strategy(1, 3), 1..=2),
                                        h in local_poly_strategy(0, 2)) {
        let r = ring2();
        let gens: Vec<QPoly> = g.iter().map(|t| build(&r, t)).collect();
        let ideal = LocalIdeal::new(&r, gens.clone());
        let h = build(&r, &h);
        for p in ideal.generators() {
            prop_assert!(ideal.contains(&(p * &h)));
        }
        let unit = &Polynomial::one(&r) + &build(&r, &[(1, 0, 1)]);
        let scaled = LocalIdeal::new(&r, gens.iter().map(|p| p * &unit));
        prop_assert!(scaled.equal(&ideal));
    }

    #[test]
    fn generator_strings_reparse(g in prop::collection::vec(local_poly_strategy(1, 3), 1..=3)) {
        let r = ring2();
        let ideal = LocalIdeal::new(&r, g.iter().map(|t| build(&r, t)));
        let back = LocalIdeal::new(&r, ideal.generator_strings().iter().map(|s| parse_poly::<Rational>(s, &r).unwrap()));
        prop_assert!(back.equal(&ideal));
    }

    #[test]
    fn exp_log_roundtrip_and_contract(a in local_poly_strategy(2, 5), b in local_poly_strategy(2, 5)) {
        let r = ring2();
        let ctx = JetContext::new(&r, 7).unwrap();
        let xi = JetDerivation::new(&ctx, vec![build(&r, &a), build(&r, &b)]).unwrap();
        let phi = exp_derivation(&xi, &ctx).unwrap();
        prop_assert_eq!(log_automorphism(&phi, &ctx).unwrap(), xi.clone());
        for i in 0..2 {
            let x = Polynomial::var(&r, i);
            let rest = &(&phi.images()[i] - &x) - &xi.apply(&x);
            let xi2 = xi.apply(&xi.apply(&x));
            if let Some(o) = xi2.ord() {
                prop_assert!(rest.ord().map_or(true, |ro| ro >= o));
            } else {
                prop_assert!(rest.is_zero());
            }
        }
    }

    #[test]
    fn jet_composition(a in local_poly_strategy(2, 4), b in local_poly_strategy(2, 4), c in local_poly_strategy(2, 4)) {
        let r = ring2();
        let ctx = JetContext::new(&r, 6).unwrap();
        let x = Polynomial::var(&r, 0);
        let y = Polynomial::var(&r, 1);
        let f = JetAutomorphism::new(&ctx, vec![&x + &build(&r, &a), &(&y + &x.scale(&q(2))) + &build(&r, &b)]).unwrap();
        let g = JetAutomorphism::new(&ctx, vec![&x.scale(&q(3)) + &build(&r, &c), y.clone()]).unwrap();
        let h = exp_derivation(&JetDerivation::new(&ctx, vec![build(&r, &b), build(&r, &a)]).unwrap(), &ctx).unwrap();
        prop_assert_eq!(f.compose(&g).compose(&h), f.compose(&g.compose(&h)));
        prop_assert!(f.compose(&f.inverse()).is_identity());
        prop_assert!(g.inverse().compose(&g).is_identity());
    }
}

#[test]
fn big_rational_coefficients_survive_printing() {
    let r = ring2();
    let c = Rational::new(BigInt::from(12345678901234567i64) * BigInt::from(1000), BigInt::from(7));
    let p = Polynomial::monomial(&r, Monomial::from_exponents(vec![1, 2]), c);
    let back: QPoly = parse_poly(&p.to_string(), &r).unwrap();
    assert_eq!(back, p);
}
