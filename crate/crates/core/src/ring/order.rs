use std::cmp::Ordering;

use serde::Serialize;

use super::Monomial;

/// Monomial orders used by the standard-basis engine.
///
/// `cmp` returns `Greater` when the first argument is the more leading one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum MonomialOrder {
    /// Negative degree reverse lexicographic: lower total degree leads, so
    /// `1 > x_i` and elements with a nonzero constant term are local units.
    LocalDegRevLex,
    GlobalDegRevLex,
    /// Elimination order: degrevlex on the flagged block, ties broken by
    /// degrevlex on the remaining variables.
    Block { elim: Vec<bool> },
}

impl MonomialOrder {
    pub fn block(nvars: usize, elim_vars: &[usize]) -> Self {
        let mut elim = vec![false; nvars];
        for &i in elim_vars {
            elim[i] = true;
        }
        MonomialOrder::Block { elim }
    }

    pub fn is_local(&self) -> bool {
        matches!(self, MonomialOrder::LocalDegRevLex)
    }

    pub fn is_global(&self) -> bool {
        !self.is_local()
    }

    pub fn name(&self) -> &'static str {
        match self {
            MonomialOrder::LocalDegRevLex => "ds",
            MonomialOrder::GlobalDegRevLex => "dp",
            MonomialOrder::Block { .. } => "block(dp,dp)",
        }
    }

    pub fn cmp(&self, a: &Monomial, b: &Monomial) -> Ordering {
        match self {
            MonomialOrder::LocalDegRevLex => {
                b.degree().cmp(&a.degree()).then_with(|| a.revlex_cmp(b))
            }
            MonomialOrder::GlobalDegRevLex => {
                a.degree().cmp(&b.degree()).then_with(|| a.revlex_cmp(b))
            }
            MonomialOrder::Block { elim } => {
                block_cmp(a, b, elim, true).then_with(|| block_cmp(a, b, elim, false))
            }
        }
    }
}

/// degrevlex restricted to the variables whose flag equals `block`.
fn block_cmp(a: &Monomial, b: &Monomial, flags: &[bool], block: bool) -> Ordering {
    let (ea, eb) = (a.exponents(), b.exponents());
    let deg = |e: &[u32]| -> u32 {
        e.iter().zip(flags).filter(|(_, &f)| f == block).map(|(x, _)| *x).sum()
    };
    deg(ea).cmp(&deg(eb)).then_with(|| {
        for i in (0..ea.len()).rev() {
            if flags[i] != block {
                continue;
            }
            match ea[i].cmp(&eb[i]) {
                Ordering::Equal => continue,
                Ordering::Less => return Ordering::Greater,
                Ordering::Greater => return Ordering::Less,
            }
        }
        Ordering::Equal
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(e: &[u32]) -> Monomial {
        Monomial::from_exponents(e.to_vec())
    }

    #[test]
    fn local_order_puts_units_first() {
        let o = MonomialOrder::LocalDegRevLex;
        assert_eq!(o.cmp(&m(&[0, 0]), &m(&[1, 0])), Ordering::Greater);
        assert_eq!(o.cmp(&m(&[1, 0]), &m(&[2, 0])), Ordering::Greater);
        assert_eq!(o.cmp(&m(&[1, 0]), &m(&[0, 1])), Ordering::Greater);
    }

    #[test]
    fn block_order_eliminates() {
        let o = MonomialOrder::block(3, &[0]);
        // t > u^5 regardless of degree
        assert_eq!(o.cmp(&m(&[1, 0, 0]), &m(&[0, 5, 0])), Ordering::Greater);
        assert_eq!(o.cmp(&m(&[0, 2, 0]), &m(&[0, 0, 1])), Ordering::Greater);
    }
}
