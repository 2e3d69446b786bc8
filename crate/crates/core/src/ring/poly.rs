use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use super::{Monomial, MonomialOrder, Ring, RingError};
use crate::field::Scalar;

/// Sparse polynomial: monomial -> nonzero coefficient.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Polynomial<F> {
    ring: Arc<Ring>,
    terms: BTreeMap<Monomial, F>,
}

impl<F: Scalar> Polynomial<F> {
    pub fn zero(ring: &Arc<Ring>) -> Self {
        Polynomial { ring: ring.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(ring: &Arc<Ring>, c: F) -> Self {
        Self::monomial(ring, Monomial::one(ring.nvars()), c)
    }

    pub fn from_i64(ring: &Arc<Ring>, n: i64) -> Self {
        Self::constant(ring, F::from_i64(&ring.field(), n))
    }

    pub fn one(ring: &Arc<Ring>) -> Self {
        Self::from_i64(ring, 1)
    }

    pub fn var(ring: &Arc<Ring>, i: usize) -> Self {
        Self::monomial(ring, Monomial::var(ring.nvars(), i), F::from_i64(&ring.field(), 1))
    }

    pub fn var_named(ring: &Arc<Ring>, name: &str) -> Result<Self, RingError> {
        Ok(Self::var(ring, ring.index_of(name)?))
    }

    pub fn monomial(ring: &Arc<Ring>, m: Monomial, c: F) -> Self {
        debug_assert_eq!(m.nvars(), ring.nvars());
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Polynomial { ring: ring.clone(), terms }
    }

    pub fn from_terms(ring: &Arc<Ring>, terms: impl IntoIterator<Item = (Monomial, F)>) -> Self {
        let mut p = Self::zero(ring);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: F) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().clone() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn ring(&self) -> &Arc<Ring> {
        &self.ring
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &F)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (Monomial, F)> {
        self.terms.into_iter()
    }

    pub fn coeff(&self, m: &Monomial) -> F {
        self.terms.get(m).cloned().unwrap_or_else(F::zero)
    }

    pub fn constant_term(&self) -> F {
        self.coeff(&Monomial::one(self.ring.nvars()))
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.is_one())
    }

    /// Nonzero constant term: a unit of the local ring at the origin.
    pub fn is_local_unit(&self) -> bool {
        !self.constant_term().is_zero()
    }

    /// Maximal total degree; `None` for zero.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    /// Order of vanishing at the origin; `None` for zero.
    pub fn ord(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).min()
    }

    pub fn homogeneous_part(&self, d: u32) -> Self {
        self.filter(|m| m.degree() == d)
    }

    /// Discards every term of total degree above `k`.
    pub fn truncate(&self, k: u32) -> Self {
        self.filter(|m| m.degree() <= k)
    }

    fn filter(&self, keep: impl Fn(&Monomial) -> bool) -> Self {
        Polynomial {
            ring: self.ring.clone(),
            terms: self.terms.iter().filter(|(m, _)| keep(m)).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    pub fn scale(&self, c: &F) -> Self {
        if c.is_zero() {
            return Self::zero(&self.ring);
        }
        Polynomial {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a.clone() * c.clone())).collect(),
        }
    }

    pub fn mul_term(&self, m: &Monomial, c: &F) -> Self {
        if c.is_zero() {
            return Self::zero(&self.ring);
        }
        Polynomial {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(a, x)| (a.mul(m), x.clone() * c.clone())).collect(),
        }
    }

    fn assert_same(&self, other: &Self) {
        assert!(Ring::same(&self.ring, &other.ring), "{}", RingError::ContextMismatch);
    }

    pub fn check_same_ring(&self, other: &Self) -> Result<(), RingError> {
        if Ring::same(&self.ring, &other.ring) {
            Ok(())
        } else {
            Err(RingError::ContextMismatch)
        }
    }

    /// Product with all terms of degree above `k` dropped (when `k` is given).
    pub fn mul_trunc(&self, other: &Self, k: Option<u32>) -> Self {
        self.assert_same(other);
        let mut out = Self::zero(&self.ring);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if let Some(k) = k {
                    if ma.degree() + mb.degree() > k {
                        continue;
                    }
                }
                out.add_term(ma.mul(mb), ca.clone() * cb.clone());
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        self.pow_trunc(e, None)
    }

    pub fn pow_trunc(&self, mut e: u32, k: Option<u32>) -> Self {
        let mut acc = Self::one(&self.ring);
        let mut base = match k {
            Some(k) => self.truncate(k),
            None => self.clone(),
        };
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_trunc(&base, k);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_trunc(&base, k);
            }
        }
        acc
    }

    /// Formal partial derivative with respect to variable `i`.
    pub fn diff(&self, i: usize) -> Self {
        let field = self.ring.field();
        let mut out = Self::zero(&self.ring);
        for (m, c) in &self.terms {
            let e = m.exponent(i);
            if e == 0 {
                continue;
            }
            let mut dm = m.clone();
            dm.set_exponent(i, e - 1);
            out.add_term(dm, c.clone() * F::from_i64(&field, e as i64));
        }
        out
    }

    pub fn diff_named(&self, name: &str) -> Result<Self, RingError> {
        Ok(self.diff(self.ring.index_of(name)?))
    }

    /// Composition `p(images)`, landing in `target`. With `trunc = Some(k)`
    /// every intermediate product is cut above degree `k`.
    pub fn substitute(&self, target: &Arc<Ring>, images: &[Polynomial<F>], trunc: Option<u32>) -> Self {
        assert_eq!(images.len(), self.ring.nvars(), "one image per variable");
        for im in images {
            assert!(Ring::same(im.ring(), target), "{}", RingError::ContextMismatch);
        }
        let n = self.ring.nvars();
        let mut maxe = vec![0u32; n];
        for m in self.terms.keys() {
            for (i, e) in m.exponents().iter().enumerate() {
                maxe[i] = maxe[i].max(*e);
            }
        }
        let powers: Vec<Vec<Polynomial<F>>> = (0..n)
            .map(|i| {
                let mut v = vec![Polynomial::one(target)];
                for e in 1..=maxe[i] {
                    let next = v[e as usize - 1].mul_trunc(&images[i], trunc);
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = Polynomial::zero(target);
        for (m, c) in &self.terms {
            let mut t = Polynomial::constant(target, c.clone());
            for (i, e) in m.exponents().iter().enumerate() {
                if *e > 0 {
                    t = t.mul_trunc(&powers[i][*e as usize], trunc);
                    if t.is_zero() {
                        break;
                    }
                }
            }
            out = out + t;
        }
        out
    }

    /// Value at a point of `k^n`.
    pub fn evaluate(&self, point: &[F]) -> F {
        assert_eq!(point.len(), self.ring.nvars());
        let mut acc = F::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, e) in point.iter().zip(m.exponents()) {
                for _ in 0..*e {
                    t = t * x.clone();
                }
            }
            acc = acc + t;
        }
        acc
    }

    /// Substitution by variable name inside the same ring; unbound variables
    /// stay fixed.
    pub fn substitute_named(&self, bindings: &[(&str, Polynomial<F>)], trunc: Option<u32>) -> Result<Self, RingError> {
        let mut images: Vec<Polynomial<F>> = (0..self.ring.nvars()).map(|i| Polynomial::var(&self.ring, i)).collect();
        for (name, p) in bindings {
            let i = self.ring.index_of(name)?;
            p.check_same_ring(self)?;
            images[i] = p.clone();
        }
        Ok(self.substitute(&self.ring, &images, trunc))
    }

    /// Renames variable `i` to target variable `var_map[i]`.
    pub fn embed(&self, target: &Arc<Ring>, var_map: &[usize]) -> Self {
        let tn = target.nvars();
        let mut out = Polynomial::zero(target);
        for (m, c) in &self.terms {
            let mut e = vec![0u32; tn];
            for (i, x) in m.exponents().iter().enumerate() {
                e[var_map[i]] += x;
            }
            out.add_term(Monomial::from_exponents(e), c.clone());
        }
        out
    }

    /// Inverse of [`embed`](Self::embed); `None` if a dropped variable occurs.
    pub fn restrict(&self, target: &Arc<Ring>, var_map: &[Option<usize>]) -> Option<Self> {
        let tn = target.nvars();
        let mut out = Polynomial::zero(target);
        for (m, c) in &self.terms {
            let mut e = vec![0u32; tn];
            for (i, x) in m.exponents().iter().enumerate() {
                if *x == 0 {
                    continue;
                }
                e[var_map[i]?] += x;
            }
            out.add_term(Monomial::from_exponents(e), c.clone());
        }
        Some(out)
    }

    /// Terms sorted from leading to trailing under `order`.
    pub fn sorted_terms(&self, order: &MonomialOrder) -> Vec<(Monomial, F)> {
        let mut v: Vec<(Monomial, F)> = self.terms.iter().map(|(m, c)| (m.clone(), c.clone())).collect();
        v.sort_by(|a, b| order.cmp(&b.0, &a.0));
        v
    }

    pub fn leading_term(&self, order: &MonomialOrder) -> Option<(Monomial, F)> {
        self.terms
            .iter()
            .max_by(|a, b| order.cmp(a.0, b.0))
            .map(|(m, c)| (m.clone(), c.clone()))
    }

    /// Canonical scalar multiple (see [`Scalar::normalizer`]), with terms
    /// visited in print order.
    pub fn normalized(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let terms = self.sorted_terms(&MonomialOrder::GlobalDegRevLex);
        let s = F::normalizer(terms.iter().map(|(_, c)| c));
        self.scale(&s)
    }

    pub fn variables_used(&self) -> Vec<bool> {
        let mut used = vec![false; self.ring.nvars()];
        for m in self.terms.keys() {
            for (i, e) in m.exponents().iter().enumerate() {
                if *e > 0 {
                    used[i] = true;
                }
            }
        }
        used
    }
}

impl<F: Scalar> fmt::Display for Polynomial<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let names = self.ring.names();
        for (k, (m, c)) in self.sorted_terms(&MonomialOrder::GlobalDegRevLex).iter().enumerate() {
            let neg = c.is_negative();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            let mut parts: Vec<String> = Vec::new();
            if !c.is_one_abs() || m.is_one() {
                parts.push(c.abs_text());
            }
            for (i, e) in m.exponents().iter().enumerate() {
                match e {
                    0 => {}
                    1 => parts.push(names[i].clone()),
                    _ => parts.push(format!("{}^{}", names[i], e)),
                }
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

impl<F: Scalar> fmt::Debug for Polynomial<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial({self})")
    }
}

impl<F: Scalar> Add<&Polynomial<F>> for &Polynomial<F> {
    type Output = Polynomial<F>;
    fn add(self, rhs: &Polynomial<F>) -> Polynomial<F> {
        self.assert_same(rhs);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<F: Scalar> Add for Polynomial<F> {
    type Output = Polynomial<F>;
    fn add(mut self, rhs: Polynomial<F>) -> Polynomial<F> {
        self.assert_same(&rhs);
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
        self
    }
}

impl<F: Scalar> Neg for &Polynomial<F> {
    type Output = Polynomial<F>;
    fn neg(self) -> Polynomial<F> {
        Polynomial {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }
}

impl<F: Scalar> Neg for Polynomial<F> {
    type Output = Polynomial<F>;
    fn neg(self) -> Polynomial<F> {
        -&self
    }
}

impl<F: Scalar> Sub<&Polynomial<F>> for &Polynomial<F> {
    type Output = Polynomial<F>;
    fn sub(self, rhs: &Polynomial<F>) -> Polynomial<F> {
        self.assert_same(rhs);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl<F: Scalar> Sub for Polynomial<F> {
    type Output = Polynomial<F>;
    fn sub(self, rhs: Polynomial<F>) -> Polynomial<F> {
        &self - &rhs
    }
}

impl<F: Scalar> Mul<&Polynomial<F>> for &Polynomial<F> {
    type Output = Polynomial<F>;
    fn mul(self, rhs: &Polynomial<F>) -> Polynomial<F> {
        self.mul_trunc(rhs, None)
    }
}

impl<F: Scalar> Mul for Polynomial<F> {
    type Output = Polynomial<F>;
    fn mul(self, rhs: Polynomial<F>) -> Polynomial<F> {
        self.mul_trunc(&rhs, None)
    }
}
