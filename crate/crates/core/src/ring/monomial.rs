use std::cmp::Ordering;

/// Exponent vector over a fixed variable context.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct Monomial {
    exps: Vec<u32>,
}

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial { exps: vec![0; nvars] }
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut exps = vec![0; nvars];
        exps[i] = 1;
        Monomial { exps }
    }

    pub fn from_exponents(exps: Vec<u32>) -> Self {
        Monomial { exps }
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exps
    }

    pub fn nvars(&self) -> usize {
        self.exps.len()
    }

    pub fn degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial { exps: self.exps.iter().zip(&other.exps).map(|(a, b)| a + b).collect() }
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.exps.iter().zip(&other.exps).all(|(a, b)| a <= b)
    }

    /// `other / self`, assuming `self` divides `other`.
    pub fn quotient_of(&self, other: &Monomial) -> Monomial {
        Monomial { exps: other.exps.iter().zip(&self.exps).map(|(b, a)| b - a).collect() }
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        Monomial { exps: self.exps.iter().zip(&other.exps).map(|(a, b)| *a.max(b)).collect() }
    }

    pub fn is_coprime(&self, other: &Monomial) -> bool {
        self.exps.iter().zip(&other.exps).all(|(a, b)| *a == 0 || *b == 0)
    }

    pub fn exponent(&self, i: usize) -> u32 {
        self.exps[i]
    }

    pub(crate) fn set_exponent(&mut self, i: usize, e: u32) {
        self.exps[i] = e;
    }

    /// Degree-reverse-lexicographic tie-break on equal-degree monomials:
    /// `Greater` iff the last nonzero entry of `self - other` is negative.
    pub fn revlex_cmp(&self, other: &Monomial) -> Ordering {
        for (a, b) in self.exps.iter().zip(&other.exps).rev() {
            match a.cmp(b) {
                Ordering::Equal => continue,
                Ordering::Less => return Ordering::Greater,
                Ordering::Greater => return Ordering::Less,
            }
        }
        Ordering::Equal
    }

    /// All monomials in `nvars` variables of exactly total degree `d`.
    pub fn all_of_degree(nvars: usize, d: u32) -> Vec<Monomial> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; nvars];
        fn rec(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
            let n = cur.len();
            if n == 0 {
                if left == 0 {
                    out.push(Monomial { exps: vec![] });
                }
                return;
            }
            if i == n - 1 {
                cur[i] = left;
                out.push(Monomial { exps: cur.clone() });
                cur[i] = 0;
                return;
            }
            for e in (0..=left).rev() {
                cur[i] = e;
                rec(i + 1, left - e, cur, out);
            }
            cur[i] = 0;
        }
        rec(0, d, &mut cur, &mut out);
        out
    }

    /// All monomials of total degree in `lo..=hi`.
    pub fn all_in_degree_range(nvars: usize, lo: u32, hi: u32) -> Vec<Monomial> {
        (lo..=hi).flat_map(|d| Monomial::all_of_degree(nvars, d)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_monomials_of_degree() {
        assert_eq!(Monomial::all_of_degree(3, 2).len(), 6);
        assert_eq!(Monomial::all_in_degree_range(2, 0, 3).len(), 10);
        assert_eq!(Monomial::all_of_degree(0, 0).len(), 1);
        assert!(Monomial::all_of_degree(0, 1).is_empty());
    }

    #[test]
    fn revlex_tie_break() {
        let xy = Monomial::from_exponents(vec![1, 1, 0]);
        let xz = Monomial::from_exponents(vec![1, 0, 1]);
        let y2 = Monomial::from_exponents(vec![0, 2, 0]);
        assert_eq!(xy.revlex_cmp(&xz), Ordering::Greater);
        assert_eq!(y2.revlex_cmp(&xz), Ordering::Greater);
    }
}
