//! Germs of the worked examples, parameterised as in their closed forms.

use crate::dual_graph::d_graph;
use crate::mld_engine::SingularGerm;
use crate::rational::{q, Q};
use crate::smooth_germ::{Branch, BranchId, ContactTable, SmoothGerm};

/// Two branches `x = 0` and `x = y^k` with coefficients `1/2` and
/// `1/2 + 1/(k+1)`; they share `k` infinitely near points.
pub fn example_4_2(k: u32) -> SmoothGerm {
    assert!(k >= 1);
    SmoothGerm::with_coefficients(&[q(1, 2), q(1, 2) + q(1, i64::from(k) + 1)]).contact(0, 1, k)
}

/// Branches `x - y^(k+i) - y^(k+i+j) = 0` for group `i` (1-based, coefficient
/// `groups[i-1].0`) and `1 <= j <= groups[i-1].1`. Contacts are read off the
/// valuation of the difference of two parametrisations:
/// `k + min(i, i')` across groups, `k + i + min(j, j')` within one.
pub fn example_6_7(k: u32, groups: &[(Q, u32)]) -> SmoothGerm {
    let mut tags = Vec::new();
    let mut branches = Vec::new();
    for (gi, (b, n)) in groups.iter().enumerate() {
        for j in 1..=*n {
            let id = BranchId(branches.len() as u32);
            branches.push(Branch { id, coefficient: b.clone() });
            tags.push((gi as u32 + 1, j));
        }
    }
    let mut contacts = ContactTable::default();
    for (x, &(i, j)) in tags.iter().enumerate() {
        for (y, &(i2, j2)) in tags.iter().enumerate().skip(x + 1) {
            let c = if i == i2 { k + i + j.min(j2) } else { k + i.min(i2) };
            contacts.set(BranchId(x as u32), BranchId(y as u32), c);
        }
    }
    SmoothGerm { branches, contacts, ambient: vec![] }
}

/// The simplest instance: one group of two coefficient-1/2 branches.
pub fn example_6_7_pair(k: u32) -> SmoothGerm {
    example_6_7(k, &[(q(1, 2), 2)])
}

/// Du Val `D_{k+3}` with empty boundary.
pub fn example_6_8(k: u32) -> SingularGerm {
    let g = d_graph(k as usize + 3);
    let weights = g.vertices().map(|v| g.weight(v).expect("vertex")).collect();
    let edges = g.edges().map(|(u, v, _)| (u.0 as usize, v.0 as usize)).collect();
    SingularGerm::new(weights, edges)
}

/// `A_2` with a `1/2`-branch on the first curve and a `(1/2 - 1/k)`-branch on
/// the second; the second is absent when `k = 2`.
pub fn example_8_4(k: u32) -> SingularGerm {
    assert!(k >= 2);
    let g = SingularGerm::new(vec![2, 2], vec![(0, 1)]).attach(q(1, 2), 0);
    let b2 = q(1, 2) - q(1, i64::from(k));
    if b2 == Q::from_integer(0.into()) {
        g
    } else {
        g.attach(b2, 1)
    }
}

/// Chain of weights `(2k+2, 2k+1)` with a `1/2`-branch on each curve.
pub fn example_8_5(k: u32) -> SingularGerm {
    assert!(k >= 1);
    SingularGerm::new(vec![2 * k + 2, 2 * k + 1], vec![(0, 1)]).attach(q(1, 2), 0).attach(q(1, 2), 1)
}
