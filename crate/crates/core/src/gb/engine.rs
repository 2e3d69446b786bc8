//! Standard-basis kernel over free modules `R^r`.
//!
//! Elements are sparse vectors whose terms carry a position and a monomial,
//! ordered position-over-term (lower position leads) on top of a monomial
//! order. Local orders use Mora's tangent-cone normal form with écart-driven
//! reducer selection; global orders use ordinary full division.

use std::cmp::Ordering;
use std::sync::Arc;

use crate::field::Scalar;
use crate::ring::{Monomial, MonomialOrder, Polynomial, Ring};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub(crate) struct Term {
    pub pos: u32,
    pub mono: Monomial,
}

impl Term {
    fn divides(&self, other: &Term) -> bool {
        self.pos == other.pos && self.mono.divides(&other.mono)
    }
}

/// Position-over-term module order.
#[derive(Clone, Debug)]
pub(crate) struct ModOrder {
    pub order: MonomialOrder,
}

impl ModOrder {
    pub fn new(order: MonomialOrder) -> Self {
        ModOrder { order }
    }

    pub fn cmp(&self, a: &Term, b: &Term) -> Ordering {
        b.pos.cmp(&a.pos).then_with(|| self.order.cmp(&a.mono, &b.mono))
    }

    pub fn is_local(&self) -> bool {
        self.order.is_local()
    }
}

/// Terms sorted from leading to trailing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Vector<F> {
    pub terms: Vec<(Term, F)>,
}

impl<F: Scalar> Vector<F> {
    pub fn zero() -> Self {
        Vector { terms: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn lead(&self) -> &Term {
        &self.terms[0].0
    }

    pub fn lc(&self) -> &F {
        &self.terms[0].1
    }

    pub fn lead_pos(&self) -> u32 {
        self.terms[0].0.pos
    }

    pub fn ecart(&self) -> u32 {
        let top = self.terms.iter().map(|(t, _)| t.mono.degree()).max().unwrap_or(0);
        top - self.lead().mono.degree()
    }

    pub fn from_polys(polys: &[Polynomial<F>], first_pos: u32, ord: &ModOrder) -> Self {
        let mut terms = Vec::new();
        for (i, p) in polys.iter().enumerate() {
            for (m, c) in p.terms() {
                terms.push((Term { pos: first_pos + i as u32, mono: m.clone() }, c.clone()));
            }
        }
        terms.sort_by(|a, b| ord.cmp(&b.0, &a.0));
        Vector { terms }
    }

    /// Appends `polys` at positions `first_pos..` (the new positions must be
    /// disjoint from the existing ones).
    pub fn with_block(mut self, polys: &[Polynomial<F>], first_pos: u32, ord: &ModOrder) -> Self {
        let extra = Vector::from_polys(polys, first_pos, ord);
        self.terms.extend(extra.terms);
        self.terms.sort_by(|a, b| ord.cmp(&b.0, &a.0));
        self
    }

    /// Components at positions `first_pos..first_pos + len`.
    pub fn block(&self, ring: &Arc<Ring>, first_pos: u32, len: usize) -> Vec<Polynomial<F>> {
        let mut out: Vec<Vec<(Monomial, F)>> = vec![Vec::new(); len];
        for (t, c) in &self.terms {
            if t.pos >= first_pos && ((t.pos - first_pos) as usize) < len {
                out[(t.pos - first_pos) as usize].push((t.mono.clone(), c.clone()));
            }
        }
        out.into_iter().map(|ts| Polynomial::from_terms(ring, ts)).collect()
    }

    pub fn scale(&mut self, c: &F) {
        for (_, a) in self.terms.iter_mut() {
            *a = a.clone() * c.clone();
        }
    }

    pub fn make_monic(&mut self) {
        if !self.is_zero() {
            let inv = self.lc().inv();
            self.scale(&inv);
        }
    }

    /// `self - c * m * other`.
    pub fn sub_mul(&self, c: &F, m: &Monomial, other: &Vector<F>, ord: &ModOrder) -> Vector<F> {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let mut a = self.terms.iter().peekable();
        let mut b = other
            .terms
            .iter()
            .map(|(t, x)| (Term { pos: t.pos, mono: t.mono.mul(m) }, x.clone() * c.clone()))
            .peekable();
        loop {
            match (a.peek(), b.peek()) {
                (None, None) => break,
                (Some(_), None) => out.push(a.next().unwrap().clone()),
                (None, Some(_)) => {
                    let (t, x) = b.next().unwrap();
                    out.push((t, -x));
                }
                (Some((ta, _)), Some((tb, _))) => match ord.cmp(ta, tb) {
                    Ordering::Greater => out.push(a.next().unwrap().clone()),
                    Ordering::Less => {
                        let (t, x) = b.next().unwrap();
                        out.push((t, -x));
                    }
                    Ordering::Equal => {
                        let (t, xa) = a.next().unwrap().clone();
                        let (_, xb) = b.next().unwrap();
                        let s = xa - xb;
                        if !s.is_zero() {
                            out.push((t, s));
                        }
                    }
                },
            }
        }
        Vector { terms: out }
    }

    /// `u·self - self_p·g` where `g` has leading term `1·e_p` and `u`, `self_p`
    /// are the position-`p` components of `g` and `self`.
    fn clear_position_with(&self, g: &Vector<F>, ord: &ModOrder) -> Vector<F> {
        let p = g.lead_pos();
        let mut out = Vector::zero();
        for (t, c) in g.terms.iter().filter(|(t, _)| t.pos == p) {
            out = out.sub_mul(&-c.clone(), &t.mono, self, ord);
        }
        for (t, c) in self.terms.iter().filter(|(t, _)| t.pos == p) {
            out = out.sub_mul(c, &t.mono, g, ord);
        }
        debug_assert!(out.terms.iter().all(|(t, _)| t.pos != p));
        out
    }

    /// Reduces the leading term of `self` by `g`, assuming `lead(g) | lead(self)`.
    fn reduce_lead_by(&self, g: &Vector<F>, ord: &ModOrder) -> Vector<F> {
        let m = g.lead().mono.quotient_of(&self.lead().mono);
        let c = self.lc().clone() / g.lc().clone();
        self.sub_mul(&c, &m, g, ord)
    }
}

/// S-vector of `a` and `b`, which must share their leading position.
pub(crate) fn s_vector<F: Scalar>(a: &Vector<F>, b: &Vector<F>, ord: &ModOrder) -> Vector<F> {
    let l = a.lead().mono.lcm(&b.lead().mono);
    let ma = a.lead().mono.quotient_of(&l);
    let mb = b.lead().mono.quotient_of(&l);
    let lhs = Vector::zero().sub_mul(&(-b.lc().clone()), &ma, a, ord);
    lhs.sub_mul(a.lc(), &mb, b, ord)
}

/// Mora normal form (local orders) or full division (global orders).
///
/// With `stop_pos`, reduction halts as soon as the leading position reaches
/// `stop_pos`; used when the trailing positions only track cofactors.
pub(crate) fn normal_form<F: Scalar>(v: &Vector<F>, basis: &[Vector<F>], ord: &ModOrder, stop_pos: Option<u32>) -> Vector<F> {
    if ord.is_local() {
        mora_normal_form(v, basis, ord, stop_pos)
    } else {
        full_division(v, basis, ord, stop_pos)
    }
}

fn mora_normal_form<F: Scalar>(v: &Vector<F>, basis: &[Vector<F>], ord: &ModOrder, stop_pos: Option<u32>) -> Vector<F> {
    let mut h = v.clone();
    let mut extra: Vec<(Vector<F>, u32)> = Vec::new();
    let ecarts: Vec<u32> = basis.iter().map(|g| g.ecart()).collect();
    loop {
        if h.is_zero() {
            return h;
        }
        if let Some(s) = stop_pos {
            if h.lead_pos() >= s {
                return h;
            }
        }
        let lead = h.lead().clone();
        // smallest écart, then oldest element
        let mut best: Option<(u32, usize)> = None;
        for (i, g) in basis.iter().enumerate() {
            if g.lead().divides(&lead) && best.is_none_or(|(e, _)| ecarts[i] < e) {
                best = Some((ecarts[i], i));
            }
        }
        for (j, (g, e)) in extra.iter().enumerate() {
            if g.lead().divides(&lead) && best.is_none_or(|(b, _)| *e < b) {
                best = Some((*e, basis.len() + j));
            }
        }
        let Some((e, idx)) = best else {
            return h;
        };
        let he = h.ecart();
        let g = if idx < basis.len() { basis[idx].clone() } else { extra[idx - basis.len()].0.clone() };
        if g.lead().mono.degree() == 0 {
            // `g` is a unit `u` at this position: `u·h - h_pos·g` clears the
            // whole position at once, which single-term steps never finish.
            h = h.clear_position_with(&g, ord);
            continue;
        }
        if e > he {
            extra.push((h.clone(), he));
        }
        h = h.reduce_lead_by(&g, ord);
    }
}

fn full_division<F: Scalar>(v: &Vector<F>, basis: &[Vector<F>], ord: &ModOrder, stop_pos: Option<u32>) -> Vector<F> {
    let mut h = v.clone();
    let mut rem: Vec<(Term, F)> = Vec::new();
    while !h.is_zero() {
        if let Some(s) = stop_pos {
            if h.lead_pos() >= s {
                rem.extend(h.terms);
                break;
            }
        }
        let lead = h.lead().clone();
        match basis.iter().find(|g| g.lead().divides(&lead)) {
            Some(g) => h = h.reduce_lead_by(g, ord),
            None => {
                let t = h.terms.remove(0);
                rem.push(t);
            }
        }
    }
    Vector { terms: rem }
}

#[derive(Clone, Debug)]
struct Pair {
    i: usize,
    j: usize,
    lcm: Monomial,
}

/// Output of [`standard_basis`]: the basis proper and the elements whose
/// leading position reached the stop position (left unpaired).
pub(crate) struct SbOutput<F> {
    pub basis: Vec<Vector<F>>,
    pub side: Vec<Vector<F>>,
}

/// Standard basis (Mora) or Gröbner basis (Buchberger) of the submodule
/// generated by `gens`.
///
/// `ideal_mode` enables the coprime-leading-monomial criterion, which is only
/// valid for rank-one inputs. Elements whose leading position is at least
/// `stop_pos` are diverted to `side` and never paired.
pub(crate) fn standard_basis<F: Scalar>(
    gens: Vec<Vector<F>>,
    ord: &ModOrder,
    stop_pos: Option<u32>,
    ideal_mode: bool,
) -> SbOutput<F> {
    let mut basis: Vec<Vector<F>> = Vec::new();
    let mut side: Vec<Vector<F>> = Vec::new();
    let mut pairs: Vec<Pair> = Vec::new();

    let diverted = |v: &Vector<F>| stop_pos.is_some_and(|s| v.lead_pos() >= s);

    let mut queue: Vec<Vector<F>> = gens.into_iter().filter(|g| !g.is_zero()).collect();
    queue.reverse();
    loop {
        let h = if let Some(g) = queue.pop() {
            normal_form(&g, &basis, ord, stop_pos)
        } else if let Some(p) = pop_pair(&mut pairs) {
            let s = s_vector(&basis[p.i], &basis[p.j], ord);
            normal_form(&s, &basis, ord, stop_pos)
        } else {
            break;
        };
        if h.is_zero() {
            continue;
        }
        if diverted(&h) {
            side.push(h);
            continue;
        }
        let mut h = h;
        h.make_monic();
        add_element(&mut basis, &mut pairs, h, ideal_mode);
    }
    let mut out = basis;
    minimize(&mut out);
    if !ord.is_local() {
        out = interreduce(out, ord);
    }
    SbOutput { basis: out, side }
}

fn pop_pair(pairs: &mut Vec<Pair>) -> Option<Pair> {
    if pairs.is_empty() {
        return None;
    }
    let mut best = 0;
    for (k, p) in pairs.iter().enumerate() {
        let b = &pairs[best];
        let key = (p.lcm.degree(), p.j, p.i);
        let bkey = (b.lcm.degree(), b.j, b.i);
        if key < bkey {
            best = k;
        }
    }
    Some(pairs.swap_remove(best))
}

fn add_element<F: Scalar>(
    basis: &mut Vec<Vector<F>>,
    pairs: &mut Vec<Pair>,
    h: Vector<F>,
    ideal_mode: bool,
) {
    let k = basis.len();
    let hl = h.lead().clone();
    // chain criterion on existing pairs
    pairs.retain(|p| {
        let li = &basis[p.i].lead().mono;
        let lj = &basis[p.j].lead().mono;
        let same_pos = basis[p.i].lead().pos == hl.pos;
        if !same_pos || !hl.mono.divides(&p.lcm) {
            return true;
        }
        let lih = li.lcm(&hl.mono);
        let ljh = lj.lcm(&hl.mono);
        lih == p.lcm || ljh == p.lcm
    });
    let mut new_pairs: Vec<Pair> = Vec::new();
    for i in 0..k {
        if basis[i].lead().pos != hl.pos {
            continue;
        }
        let li = &basis[i].lead().mono;
        if ideal_mode && li.is_coprime(&hl.mono) {
            continue;
        }
        new_pairs.push(Pair { i, j: k, lcm: li.lcm(&hl.mono) });
    }
    // among new pairs with equal lcm keep one
    new_pairs.sort_by(|a, b| a.lcm.cmp(&b.lcm).then(a.i.cmp(&b.i)));
    new_pairs.dedup_by(|a, b| a.lcm == b.lcm);
    pairs.extend(new_pairs);
    basis.push(h);
}

/// Drops elements whose leading term is divisible by another's.
fn minimize<F: Scalar>(basis: &mut Vec<Vector<F>>) {
    let n = basis.len();
    let mut keep = vec![true; n];
    for i in 0..n {
        for j in 0..n {
            if i == j || !keep[j] {
                continue;
            }
            let (li, lj) = (basis[i].lead(), basis[j].lead());
            if lj.divides(li) && (li != lj || j < i) {
                keep[i] = false;
                break;
            }
        }
    }
    let mut k = 0;
    basis.retain(|_| {
        k += 1;
        keep[k - 1]
    });
}

fn interreduce<F: Scalar>(basis: Vec<Vector<F>>, ord: &ModOrder) -> Vec<Vector<F>> {
    let mut out = Vec::with_capacity(basis.len());
    for i in 0..basis.len() {
        let others: Vec<Vector<F>> = basis.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, b)| b.clone()).collect();
        let lead = basis[i].terms[0].clone();
        let tail = Vector { terms: basis[i].terms[1..].to_vec() };
        let mut r = full_division(&tail, &others, ord, None);
        r.terms.insert(0, lead);
        r.make_monic();
        out.push(r);
    }
    out.sort_by(|a, b| ord.cmp(b.lead(), a.lead()));
    out
}
