//! Exact dense linear algebra over the integers and rationals.
//!
//! Elimination is fraction-free (Bareiss): every intermediate entry is an
//! integer minor of the input, so the last pivot is the determinant.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::rational::Q;

pub type IntMatrix = Vec<Vec<BigInt>>;

/// Leading principal minors `D_1..D_k` of `m`, stopping after the first zero.
/// Without row exchanges the k-th Bareiss pivot is exactly `D_k`.
pub fn leading_minors(m: &[Vec<BigInt>]) -> Vec<BigInt> {
    let n = m.len();
    let mut a: IntMatrix = m.to_vec();
    let mut prev = BigInt::one();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let pivot = a[k][k].clone();
        out.push(pivot.clone());
        if pivot.is_zero() {
            break;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &pivot - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = pivot;
    }
    out
}

/// Bareiss elimination with row pivoting on an `n x (n + extra)` matrix.
/// Returns the signed determinant of the leading square block; the matrix is
/// left upper triangular. Zero determinant leaves it partially reduced.
fn bareiss_in_place(a: &mut IntMatrix, n: usize) -> BigInt {
    let width = a.first().map_or(0, Vec::len);
    let mut prev = BigInt::one();
    let mut negate = false;
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    negate = !negate;
                }
                None => return BigInt::zero(),
            }
        }
        let pivot = a[k][k].clone();
        for i in k + 1..n {
            for j in k + 1..width {
                let v = &a[i][j] * &pivot - &a[i][k] * &a[k][j];
                debug_assert!((&v % &prev).is_zero());
                a[i][j] = v / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = pivot;
    }
    if n == 0 {
        return BigInt::one();
    }
    let det = a[n - 1][n - 1].clone();
    if negate {
        -det
    } else {
        det
    }
}

pub fn determinant(m: &[Vec<BigInt>]) -> BigInt {
    let mut a = m.to_vec();
    bareiss_in_place(&mut a, m.len())
}

/// Solves `m x = rhs` exactly. Returns `(x, det m)`, or `None` when singular.
pub fn solve(m: &[Vec<BigInt>], rhs: &[Q]) -> Option<(Vec<Q>, BigInt)> {
    let n = m.len();
    assert_eq!(rhs.len(), n, "rhs length must match matrix order");
    // Clear denominators so the augmented column stays integral.
    let scale = rhs.iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    let mut a: IntMatrix = m
        .iter()
        .zip(rhs)
        .map(|(row, r)| {
            let mut row = row.clone();
            row.push(r.numer() * (&scale / r.denom()));
            row
        })
        .collect();
    let det = bareiss_in_place(&mut a, n);
    if det.is_zero() {
        return None;
    }
    let mut x = vec![Q::zero(); n];
    for i in (0..n).rev() {
        let mut acc = Q::from_integer(a[i][n].clone());
        for j in i + 1..n {
            acc -= Q::from_integer(a[i][j].clone()) * &x[j];
        }
        x[i] = acc / Q::from_integer(a[i][i].clone());
    }
    let scale = Q::from_integer(scale);
    for xi in &mut x {
        *xi /= &scale;
    }
    Some((x, det))
}

/// Rational inverse by plain Gauss-Jordan. Deliberately a different route from
/// [`solve`] so the two can cross-check each other.
pub fn inverse(m: &[Vec<BigInt>]) -> Option<Vec<Vec<Q>>> {
    let n = m.len();
    let mut a: Vec<Vec<Q>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<Q> = row.iter().cloned().map(Q::from_integer).collect();
            r.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, p);
        let inv = a[col][col].recip();
        for v in &mut a[col] {
            *v *= &inv;
        }
        let pivot_row = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v -= &f * pv;
            }
        }
    }
    Some(a.into_iter().map(|row| row[n..].to_vec()).collect())
}

pub fn negate(m: &[Vec<BigInt>]) -> IntMatrix {
    m.iter().map(|r| r.iter().map(|v| -v).collect()).collect()
}

pub fn all_positive(xs: &[BigInt]) -> bool {
    xs.iter().all(Signed::is_positive)
}
