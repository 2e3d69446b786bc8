//! Dense exact linear algebra over a [`Scalar`] field.

use crate::field::Scalar;

/// Rank of a dense matrix given by rows.
pub fn rank<F: Scalar>(rows: &[Vec<F>]) -> usize {
    let mut m: Vec<Vec<F>> = rows.to_vec();
    let ncols = m.first().map(|r| r.len()).unwrap_or(0);
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = m[r][c].inv();
        for i in r + 1..m.len() {
            if m[i][c].is_zero() {
                continue;
            }
            let f = m[i][c].clone() * inv.clone();
            for j in c..ncols {
                let v = m[i][j].clone() - f.clone() * m[r][j].clone();
                m[i][j] = v;
            }
        }
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}

/// Solves `A·z = b` by Gauss–Jordan elimination, pivoting on columns in the
/// order given by `preference`. Free unknowns are set to zero. `None` when the
/// system is inconsistent.
pub fn solve<F: Scalar>(a: &[Vec<F>], b: &[F], preference: &[usize]) -> Option<Vec<F>> {
    let nrows = a.len();
    let ncols = preference.len();
    let mut m: Vec<Vec<F>> = a.to_vec();
    let mut rhs: Vec<F> = b.to_vec();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut r = 0;
    for &c in preference {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        rhs.swap(r, p);
        let inv = m[r][c].inv();
        for x in m[r].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        rhs[r] = rhs[r].clone() * inv;
        for i in 0..nrows {
            if i == r || m[i][c].is_zero() {
                continue;
            }
            let f = m[i][c].clone();
            for j in 0..m[i].len() {
                let v = m[i][j].clone() - f.clone() * m[r][j].clone();
                m[i][j] = v;
            }
            rhs[i] = rhs[i].clone() - f * rhs[r].clone();
        }
        pivots.push((r, c));
        r += 1;
    }
    if rhs[r..].iter().any(|x| !x.is_zero()) {
        return None;
    }
    let total = a.first().map(|row| row.len()).unwrap_or(ncols);
    let mut z = vec![F::zero(); total];
    for (row, c) in pivots {
        z[c] = rhs[row].clone();
    }
    Some(z)
}
