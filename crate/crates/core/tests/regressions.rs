//! Fixed values for the worked examples and the documented edge cases.

use mld_core::discrepancy::{
    check_weight_lemma, pld, solve_discrepancies, BoundaryIncidence, Pld, PldOptions, WeightLemmaOptions,
    WeightLemmaReport,
};
use mld_core::dual_graph::{chain, d_graph, ContractionFlag, GraphError, VertexId};
use mld_core::fixtures;
use mld_core::mld_engine::{
    constants_for, gamma_of_set, hits_target, mld_singular, mld_smooth, witness_set_smooth, MldError,
};
use mld_core::rational::{q, qi};
use mld_core::smooth_germ::SmoothGerm;

fn item(r: &WeightLemmaReport, n: u8) -> (usize, usize) {
    let WeightLemmaReport::Checked(items) = r else { panic!("not applicable: {r:?}") };
    let it = items.iter().find(|i| i.item == n).expect("item present");
    (it.instances, it.violations.len())
}

#[test]
fn d4_weight_items_at_equality() {
    let g = d_graph(4);
    let inc = BoundaryIncidence::zero();
    let d = solve_discrepancies(&g, &inc).unwrap();
    assert!(d.a.values().all(|a| *a == qi(1)));
    let r = check_weight_lemma(&g, &inc, &d.a, &WeightLemmaOptions::default());
    assert!(r.passes());
    let (n3, bad3) = item(&r, 3);
    let (n5, bad5) = item(&r, 5);
    assert!(n3 > 0 && n5 > 0);
    assert_eq!((bad3, bad5), (0, 0));
}

#[test]
fn a2_family_never_violates_convexity() {
    for k in 2..=50 {
        let germ = fixtures::example_8_4(k);
        let (g, inc) = (germ.graph().unwrap(), germ.incidence().unwrap());
        let d = solve_discrepancies(&g, &inc).unwrap();
        let r = check_weight_lemma(&g, &inc, &d.a, &WeightLemmaOptions::default());
        assert_eq!(item(&r, 2).1, 0, "k={k}");
    }
}

#[test]
fn gamma_and_constants() {
    assert_eq!(gamma_of_set(&[q(2, 3)], 1).unwrap(), q(1, 3));
    assert_eq!(constants_for(&q(1, 3)).unwrap().n0, 292);
    let c = constants_for(&gamma_of_set(&[q(1, 2), q(1, 3)], 1).unwrap()).unwrap();
    assert_eq!((c.gamma, c.n0, c.epsilon, c.delta), (q(1, 6), 1159, q(1, 288), q(1, 12)));
    assert!(hits_target(&[q(1, 2)], 1));
    assert!(!hits_target(&[q(2, 3)], 1));
}

#[test]
fn single_two_thirds_branch() {
    let r = mld_smooth(&SmoothGerm::with_coefficients(&[q(2, 3)])).unwrap();
    assert_eq!((r.value, r.depth), (q(4, 3), 1));
}

#[test]
fn two_transverse_halves_have_a_single_witness() {
    // The branches separate after one blow-up and every later curve has a >= 3/2.
    let g = SmoothGerm::with_coefficients(&[q(1, 2), q(1, 2)]);
    let w = witness_set_smooth(&g, 4).unwrap();
    assert_eq!(w.mld, qi(1));
    assert_eq!(w.witnesses.len(), 1);
    assert!(!w.truncated);
    assert_eq!(witness_set_smooth(&g, 0), Err(MldError::DepthBoundTooSmall));
}

#[test]
fn du_val_d_and_a_have_pld_one() {
    for n in 4..=12 {
        let g = d_graph(n);
        assert_eq!(g.determinant_abs(), 4.into());
        assert_eq!(pld(&g, &BoundaryIncidence::zero(), PldOptions::default()).unwrap(), Pld::Value(qi(1)));
    }
    for n in 1..=30 {
        let g = chain(&vec![2; n]);
        assert_eq!(g.determinant_abs(), (n as u64 + 1).into());
        assert_eq!(pld(&g, &BoundaryIncidence::zero(), PldOptions::default()).unwrap(), Pld::Value(qi(1)));
    }
    let r = mld_singular(&fixtures::example_6_8(2)).unwrap();
    assert_eq!((r.result.value, r.pld), (qi(1), qi(1)));
}

#[test]
fn chain_of_two_with_halves() {
    let r = mld_singular(&fixtures::example_8_5(2)).unwrap();
    let a: Vec<_> = r.discrepancies.a.values().cloned().collect();
    assert_eq!(a, vec![q(3, 29), q(7, 58)]);
}

#[test]
fn contraction_edge_cases() {
    // (-1) between two (-2)s: the neighbours become adjacent (-1)-curves.
    let g = chain(&[2, 1, 2]);
    let c = g.contract_minus_one(VertexId(1)).unwrap();
    assert_eq!(c.graph.len(), 2);
    assert!(c.flags.contains(&ContractionFlag::AdjacentMinusOneCurves(VertexId(0), VertexId(2))));
    // A (-1)-curve next to another (-1)-curve would leave weight 0.
    let g = chain(&[1, 1]);
    assert_eq!(
        g.contract_minus_one(VertexId(0)).unwrap_err(),
        GraphError::NegativityViolation { vertex: VertexId(1), weight: 0 }
    );
    assert_eq!(g.contract_minus_one(VertexId(5)).unwrap_err(), GraphError::MissingVertex(VertexId(5)));
    assert_eq!(chain(&[2]).contract_minus_one(VertexId(0)).unwrap_err(), GraphError::NotMinusOneCurve(VertexId(0)));
}
