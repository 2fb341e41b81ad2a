//! Reference computations that share no code with `mld-core`.
//!
//! Everything here works on `Rational64` and plain vectors: no graphs, no
//! tower state, no big integers. The acceptance checks compare the engine
//! against these on inputs small enough that `i64` never overflows.

use num_rational::Rational64;
use num_traits::{One, Zero};

pub type R = Rational64;

pub fn r(n: i64, d: i64) -> R {
    R::new(n, d)
}

/// A smooth germ: branch coefficients and the number of infinitely near
/// points each pair shares, the origin included.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchData {
    pub coeffs: Vec<R>,
    /// Symmetric; the diagonal is unused.
    pub contact: Vec<Vec<u32>>,
}

impl BranchData {
    pub fn new(coeffs: Vec<R>, pairs: &[(usize, usize, u32)]) -> Self {
        let n = coeffs.len();
        let mut contact = vec![vec![1; n]; n];
        for &(i, j, c) in pairs {
            contact[i][j] = c;
            contact[j][i] = c;
        }
        Self { coeffs, contact }
    }
}

/// Minimum log discrepancy over every divisor reachable by a sequence of at
/// most `depth` blow-ups, each centred on the curve created by the previous
/// one and starting at the origin. Also returns the number of divisors seen.
///
/// At a point lying on exceptional curves with log discrepancies `cs` and on
/// branches `bs`, the new curve gets `2 - sum(1 - c) - sum b`. Its points
/// worth visiting are its intersections with the curves in `cs`, one point per
/// group of branches still sharing the next infinitely near point, and one
/// general point.
pub fn tower_minimum(germ: &BranchData, depth: usize) -> (R, usize) {
    let all: Vec<usize> = (0..germ.coeffs.len()).collect();
    let mut best: Option<R> = None;
    let mut seen = 0;
    visit(germ, &[], &all, 1, depth, &mut best, &mut seen);
    (best.expect("depth >= 1"), seen)
}

fn visit(germ: &BranchData, cs: &[R], bs: &[usize], level: u32, left: usize, best: &mut Option<R>, seen: &mut usize) {
    if left == 0 {
        return;
    }
    let mut a = r(2, 1);
    for c in cs {
        a -= R::one() - c;
    }
    for &b in bs {
        a -= germ.coeffs[b];
    }
    *seen += 1;
    if best.is_none_or(|m| a < m) {
        *best = Some(a);
    }
    for c in cs {
        visit(germ, &[a, *c], &[], 0, left - 1, best, seen);
    }
    // Branches through this point (the `level`-th shared point) stay together
    // on the new curve while their contact exceeds `level`.
    let mut rest: Vec<usize> = bs.to_vec();
    while let Some(&first) = rest.first() {
        let (group, others): (Vec<usize>, Vec<usize>) =
            rest.iter().copied().partition(|&j| j == first || germ.contact[first][j] > level);
        visit(germ, &[a], &group, level + 1, left - 1, best, seen);
        rest = others;
    }
    visit(germ, &[a], &[], 0, left - 1, best, seen);
}

/// Log discrepancies `a_i` of the curves of a dual graph: solves
/// `sum_j (E_i . E_j)(a_j - 1) = w_i - 2 + beta_i` by Gaussian elimination.
/// Returns `None` for a singular matrix.
pub fn discrepancies(weights: &[i64], edges: &[(usize, usize)], beta: &[R]) -> Option<Vec<R>> {
    let n = weights.len();
    let mut m = vec![vec![R::zero(); n + 1]; n];
    for i in 0..n {
        m[i][i] = R::from_integer(-weights[i]);
        m[i][n] = R::from_integer(weights[i] - 2) + beta[i];
    }
    for &(i, j) in edges {
        m[i][j] += R::one();
        m[j][i] += R::one();
    }
    for col in 0..n {
        let p = (col..n).find(|&row| !m[row][col].is_zero())?;
        m.swap(col, p);
        for row in 0..n {
            if row != col && !m[row][col].is_zero() {
                let f = m[row][col] / m[col][col];
                for k in col..=n {
                    let v = m[col][k];
                    m[row][k] -= f * v;
                }
            }
        }
    }
    Some((0..n).map(|i| R::one() + m[i][n] / m[i][i]).collect())
}

/// Whether every leading principal minor of `-M` is positive, by explicit
/// cofactor expansion. Only meant for tiny matrices.
pub fn negative_definite(weights: &[i64], edges: &[(usize, usize)]) -> bool {
    let n = weights.len();
    let mut m = vec![vec![0i64; n]; n];
    for i in 0..n {
        m[i][i] = weights[i];
    }
    for &(i, j) in edges {
        m[i][j] -= 1;
        m[j][i] -= 1;
    }
    (1..=n).all(|k| det(&m[..k].iter().map(|row| row[..k].to_vec()).collect::<Vec<_>>()) > 0)
}

fn det(m: &[Vec<i64>]) -> i64 {
    match m.len() {
        0 => 1,
        1 => m[0][0],
        n => (0..n)
            .map(|j| {
                let minor: Vec<Vec<i64>> =
                    m[1..].iter().map(|row| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, v)| *v).collect()).collect();
                let sign = if j % 2 == 0 { 1 } else { -1 };
                sign * m[0][j] * det(&minor)
            })
            .sum(),
    }
}
