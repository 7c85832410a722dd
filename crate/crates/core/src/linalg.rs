//! Dense exact linear algebra over the rationals.

use num_traits::{One, Zero};

use crate::rational::Rational;

pub type Matrix = Vec<Vec<Rational>>;

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(m: &mut Matrix) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for v in m[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let factor = m[i][c].clone();
                let (top, bottom) = if i < r {
                    let (a, b) = m.split_at_mut(r);
                    (&mut a[i], &b[0])
                } else {
                    let (a, b) = m.split_at_mut(i);
                    (&mut b[0], &a[r])
                };
                for (x, y) in top.iter_mut().zip(bottom.iter()) {
                    if !y.is_zero() {
                        *x -= &factor * y;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &Matrix) -> usize {
    let mut copy = m.clone();
    rref(&mut copy).len()
}

/// One solution of `A z = b` (free variables set to zero), or `None` when inconsistent.
pub fn solve(a: &Matrix, b: &[Rational]) -> Option<Vec<Rational>> {
    let cols = a.first().map_or(0, |r| r.len());
    let mut aug: Matrix = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.last() == Some(&cols) {
        return None;
    }
    let mut z = vec![Rational::zero(); cols];
    for (r, &c) in pivots.iter().enumerate() {
        z[c] = aug[r][cols].clone();
    }
    Some(z)
}

/// Basis of the null space of `A`.
pub fn nullspace(a: &Matrix, cols: usize) -> Vec<Vec<Rational>> {
    let mut m = a.clone();
    let pivots = rref(&mut m);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); cols];
            v[f] = Rational::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -m[r][f].clone();
            }
            v
        })
        .collect()
}

pub fn transpose(m: &Matrix) -> Matrix {
    let cols = m.first().map_or(0, |r| r.len());
    (0..cols).map(|c| m.iter().map(|r| r[c].clone()).collect()).collect()
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn determinant(m: &Matrix) -> Rational {
    let n = m.len();
    let mut a = m.clone();
    let mut det = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else { return Rational::zero() };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= &a[c][c];
        let inv = a[c][c].recip();
        for i in c + 1..n {
            if a[i][c].is_zero() {
                continue;
            }
            let factor = &a[i][c] * &inv;
            for j in c..n {
                let v = &factor * &a[c][j];
                a[i][j] -= v;
            }
        }
    }
    det
}
