use num_bigint::BigInt;
use proptest::prelude::*;

use mld_core::discrepancy::{
    check_weight_lemma, pld, solve_discrepancies, BoundaryIncidence, Pld, PldOptions, WeightLemmaOptions,
};
use mld_core::dual_graph::{build_graph, DualGraph, Shape, VertexId};
use mld_core::germ_file::{self, Germ};
use mld_core::linalg;
use mld_core::mld_engine::{mld_smooth, MldError, SingularGerm};
use mld_core::rational::{fmt_q, parse_q, q, qi, Q};
use mld_core::smooth_germ::{a0_fib_check, tower_stats, Center, SmoothGerm, TowerState};

fn tower(choices: &[u8]) -> TowerState {
    let mut s = TowerState::new(&SmoothGerm::default()).unwrap();
    s.blow_up_in_place(&Center::Origin).unwrap();
    for &c in choices {
        let centers = s.canonical_centers();
        let pick = centers[c as usize % centers.len()].clone();
        s.blow_up_in_place(&pick).unwrap();
    }
    s
}

fn grid() -> impl Strategy<Value = Q> {
    prop::sample::select(vec![q(1, 3), q(1, 2), q(2, 3), qi(1)])
}

/// Chain or tree on `n` vertices, weights in 2..=5, an optional grid
/// coefficient per vertex.
fn tree_germ() -> impl Strategy<Value = (Vec<u32>, Vec<(usize, usize)>, Vec<Option<Q>>)> {
    (1usize..=6).prop_flat_map(|n| {
        (
            prop::collection::vec(2u32..=5, n),
            prop::collection::vec(any::<prop::sample::Index>(), n),
            prop::collection::vec(prop::option::of(grid()), n),
        )
            .prop_map(|(w, parents, beta)| {
                let edges = (1..w.len()).map(|i| (parents[i].index(i), i)).collect();
                (w, edges, beta)
            })
    })
}

fn incidence(beta: &[Option<Q>]) -> BoundaryIncidence {
    let br: Vec<(VertexId, Q)> =
        beta.iter().enumerate().filter_map(|(i, b)| b.clone().map(|b| (VertexId(i as u32), b))).collect();
    BoundaryIncidence::from_branches(&br).unwrap()
}

fn smooth_germ() -> impl Strategy<Value = SmoothGerm> {
    // Up to three branches. The first pair shares `lo + extra` points and every
    // other pair `lo`, which is always ultrametric.
    (prop::collection::vec(grid(), 1..=3), 1u32..=3, 0u32..=2).prop_map(|(coeffs, lo, extra)| {
        let mut g = SmoothGerm::with_coefficients(&coeffs);
        let n = coeffs.len() as u32;
        for i in 0..n {
            for j in i + 1..n {
                let c = if i == 0 && j == 1 { lo + extra } else { lo };
                g = g.contact(i, j, c);
            }
        }
        g
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn rationals_round_trip(n in -10_000i64..10_000, d in 1i64..10_000) {
        let x = q(n, d);
        prop_assert_eq!(parse_q(&fmt_q(&x)).unwrap(), x);
    }

    #[test]
    fn towers_over_a_smooth_point_are_unimodular(choices in prop::collection::vec(any::<u8>(), 0..10)) {
        let s = tower(&choices);
        prop_assert_eq!(s.graph().determinant_abs(), BigInt::from(1));
        prop_assert!(s.graph().is_negative_definite());
        prop_assert_eq!(s.graph().weight(s.newest().unwrap()), Some(1));
    }

    #[test]
    fn contracting_the_newest_curve_undoes_the_blow_up(choices in prop::collection::vec(any::<u8>(), 1..10)) {
        let s = tower(&choices);
        let before = tower(&choices[..choices.len() - 1]);
        let c = s.graph().contract_minus_one(s.newest().unwrap()).unwrap();
        prop_assert_eq!(&c.graph, before.graph());
    }

    #[test]
    fn incremental_values_match_the_linear_system(choices in prop::collection::vec(any::<u8>(), 0..10)) {
        let s = tower(&choices);
        let solved = s.rederive().unwrap();
        for (v, a) in solved {
            prop_assert_eq!(s.a(v), &a);
        }
    }

    #[test]
    fn a0_stays_within_the_sharp_fibonacci_bound(choices in prop::collection::vec(any::<u8>(), 0..12)) {
        let r = a0_fib_check(&tower(&choices));
        prop_assert!(r.within_sharp_bound && r.within_pow2_bound);
    }

    #[test]
    fn chain_towers_satisfy_the_counter_identity(choices in prop::collection::vec(any::<u8>(), 1..11)) {
        // Only keep choices that leave a chain, so every prefix stays valid.
        let mut s = TowerState::new(&SmoothGerm::default()).unwrap();
        s.blow_up_in_place(&Center::Origin).unwrap();
        for c in choices {
            let centers: Vec<Center> = s.canonical_centers().into_iter()
                .filter(|x| s.blow_up(x).unwrap().graph().classify() == Shape::Chain)
                .collect();
            let pick = centers[c as usize % centers.len()].clone();
            s.blow_up_in_place(&pick).unwrap();
        }
        let st = tower_stats(&s).unwrap();
        prop_assert!(st.identity_holds && st.bound_holds, "{:?}", st);
    }

    #[test]
    fn solve_agrees_with_the_inverse((w, edges, beta) in tree_germ()) {
        let g = build_graph(&w, &edges).unwrap();
        prop_assume!(g.is_negative_definite());
        let m = g.intersection_matrix().to_bigint();
        let rhs: Vec<Q> = (0..w.len()).map(|i| qi(i64::from(w[i]) - 2) + beta[i].clone().unwrap_or_else(|| qi(0))).collect();
        let (x, det) = linalg::solve(&m, &rhs).unwrap();
        let inv = linalg::inverse(&m).unwrap();
        for i in 0..w.len() {
            let y: Q = (0..w.len()).map(|j| &inv[i][j] * &rhs[j]).sum();
            prop_assert_eq!(&x[i], &y);
        }
        prop_assert_eq!(det.clone(), linalg::determinant(&m));
        prop_assert_eq!(linalg::leading_minors(&m).last().cloned(), Some(det));
    }

    #[test]
    fn discrepancies_satisfy_the_adjunction_system((w, edges, beta) in tree_germ()) {
        let g = build_graph(&w, &edges).unwrap();
        prop_assume!(g.is_negative_definite());
        let inc = incidence(&beta);
        let d = solve_discrepancies(&g, &inc).unwrap();
        let m = g.intersection_matrix();
        for (i, v) in m.order.iter().enumerate() {
            let lhs: Q = m.order.iter().enumerate()
                .map(|(j, u)| qi(m.entries[i][j]) * (&d.a[u] - qi(1)))
                .sum();
            prop_assert_eq!(lhs, qi(i64::from(w[i]) - 2) + inc.beta(*v));
        }
    }

    #[test]
    fn weight_inequalities_hold_on_lc_trees((w, edges, beta) in tree_germ()) {
        let g = build_graph(&w, &edges).unwrap();
        prop_assume!(g.is_negative_definite());
        let inc = incidence(&beta);
        let d = solve_discrepancies(&g, &inc).unwrap();
        prop_assume!(d.a.values().all(|a| *a >= qi(0)));
        let r = check_weight_lemma(&g, &inc, &d.a, &WeightLemmaOptions::default());
        prop_assert!(r.passes(), "{:?}", r);
    }

    #[test]
    fn more_boundary_lowers_pld((w, edges, beta) in tree_germ(), at in any::<prop::sample::Index>()) {
        let g = build_graph(&w, &edges).unwrap();
        prop_assume!(g.is_negative_definite());
        let mut more = beta.clone();
        let j = at.index(w.len());
        prop_assume!(more[j].is_none());
        more[j] = Some(q(1, 2));
        let (Pld::Value(p0), Pld::Value(p1)) = (
            pld(&g, &incidence(&beta), PldOptions::default()).unwrap(),
            pld(&g, &incidence(&more), PldOptions::default()).unwrap(),
        ) else { unreachable!("non-empty graph") };
        prop_assert!(p1 < p0);
    }

    #[test]
    fn smooth_mld_is_at_most_the_origin_value(g in smooth_germ()) {
        let origin = qi(2) - g.origin_multiplicity();
        match mld_smooth(&g) {
            Ok(r) => {
                prop_assert!(r.value <= origin);
                prop_assert!(r.value >= qi(0) && r.certified);
                prop_assert!(r.witness_a0 >= qi(2));
            }
            Err(MldError::NotLc { .. }) => prop_assert!(true),
            Err(e) => prop_assert!(false, "unexpected {e}"),
        }
    }

    #[test]
    fn germ_files_round_trip(g in smooth_germ(), (w, edges, beta) in tree_germ()) {
        let mut s = SingularGerm::new(w, edges);
        for (i, b) in beta.into_iter().enumerate() {
            if let Some(b) = b {
                s = s.attach(b, i);
            }
        }
        for germ in [Germ::Smooth(g), Germ::Singular(s)] {
            let text = germ_file::serialize(&germ);
            let back = germ_file::parse(&text).unwrap();
            prop_assert_eq!(&back, &germ);
            prop_assert_eq!(germ_file::serialize(&back), text);
        }
    }
}

#[test]
fn cyclic_graphs_are_classified() {
    let g: DualGraph = build_graph(&[2, 2, 2], &[(0, 1), (1, 2), (2, 0)]).unwrap();
    assert_eq!(g.classify(), Shape::ContainsCycle);
    assert!(!g.is_negative_definite());
}
