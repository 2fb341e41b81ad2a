//! Chain-tower counters and the `a0` growth bound over random towers.

use num_bigint::BigInt;
use num_traits::One;
use rand::Rng;
use serde_json::json;

use super::{case_ids, case_rng, run_cases, FamilyKind, FamilySpec, LabError, Outcome, VerificationReport};
use crate::dual_graph::Shape;
use crate::rational::{fmt_q, Q};
use crate::smooth_germ::{
    a0_fib_check, all_satellite_tower, fib, path_string, tower_stats, Center, SmoothGerm, TowerState, TowerStats,
};

fn bare() -> TowerState {
    TowerState::new(&SmoothGerm::default()).expect("empty germ is valid")
}

fn tower_path(s: &TowerState) -> String {
    s.newest().map(|v| path_string(&s.curve(v).expect("curve").path)).unwrap_or_default()
}

/// Random tower over a smooth point. With `keep_chain`, only centers whose
/// blow-up leaves the graph a chain are eligible.
pub(crate) fn random_tower(rng: &mut impl Rng, depth: usize, keep_chain: bool) -> TowerState {
    let mut s = bare();
    for _ in 0..depth {
        let mut centers = s.canonical_centers();
        if keep_chain {
            centers.retain(|c| s.blow_up(c).map(|t| t.graph().classify() == Shape::Chain).unwrap_or(false));
        }
        let c = centers[rng.gen_range(0..centers.len())].clone();
        s.blow_up_in_place(&c).expect("canonical centers are valid");
    }
    s
}

fn stats_json(st: &TowerStats) -> serde_json::Value {
    serde_json::to_value(st).expect("stats")
}

/// `(W1 - n1) + n3 - 1 = W2 - n2` and `n <= n3 + min(W1, W2)` on random chain
/// towers, with the counters read off the finished graph and compared against
/// the ones kept during construction. Also checks the closed forms of `W2` on
/// the towers with `n = n3` and `n = n3 + 1`.
pub fn verify_tower_identity(spec: &FamilySpec) -> Result<VerificationReport, LabError> {
    spec.expect("tower-identity", &[FamilyKind::RandomTower])?;
    if spec.depth_cap < 2 {
        return Err(LabError::BadParameter("depth_cap must be at least 2".into()));
    }
    let mut report = VerificationReport::new("tower-identity", Some(spec.seed));
    let seed = spec.seed;
    let cap = spec.depth_cap;
    let stats = run_cases(&mut report, spec.execution, case_ids("tower", spec.trials), |i, _| {
        let mut rng = case_rng(seed, i);
        let depth = rng.gen_range(2..=cap);
        let s = random_tower(&mut rng, depth, true);
        let st = match tower_stats(&s) {
            Ok(st) => st,
            Err(e) => return Outcome::Fail(json!({"path": tower_path(&s), "error": e.to_string()})),
        };
        let incremental = s.counters().map(|c| (c.n1, c.n2, c.w1, c.w2));
        let agree = incremental == Some((st.n1, st.n2, st.w1, st.w2));
        if st.identity_holds && st.bound_holds && agree && st.n == s.depth() {
            Outcome::Pass(st)
        } else {
            Outcome::Fail(json!({
                "path": tower_path(&s),
                "recounted": stats_json(&st),
                "incremental": incremental,
            }))
        }
    });
    let max = |f: fn(&TowerStats) -> u64| stats.iter().map(f).max().unwrap_or(0);
    report.set("max_n", max(|s| s.n as u64));
    report.set("max_n3", max(|s| s.n3 as u64));
    report.set("max_w1", max(|s| s.w1));
    report.set("max_w2", max(|s| s.w2));
    report.set(
        "min_bound_slack",
        stats.iter().map(|s| s.n3 as u64 + s.w1.min(s.w2) - s.n as u64).min().unwrap_or(0),
    );

    // Closed forms: n3 free blow-ups give W2 = 2 n3 - 2; one more blow-up at
    // the node of the last two curves gives W2 = 2 n3 - 1.
    let mut closed = 0;
    for n3 in 2..=cap {
        let mut s = bare();
        s.blow_up_in_place(&Center::Origin).expect("origin");
        for _ in 1..n3 {
            let e = s.newest().expect("curve");
            s.blow_up_in_place(&Center::Free(e)).expect("free");
        }
        let mut t = s.clone();
        let (e, prev) = (t.tower_curves()[n3 - 1], t.tower_curves()[n3 - 2]);
        t.blow_up_in_place(&Center::Node(e, prev)).expect("node");
        for (tower, n, expect) in [(&s, n3, 2 * n3 - 2), (&t, n3 + 1, 2 * n3 - 1)] {
            closed += 1;
            match tower_stats(tower) {
                Ok(st) if st.n3 == n3 && st.n == n && st.w2 == expect as u64 && st.identity_holds => {}
                other => report.fail(
                    format!("closed-n{n}-n3{n3}"),
                    json!({"expected_w2": expect, "got": other.map(|s| stats_json(&s)).map_err(|e| e.to_string())}),
                ),
            }
        }
    }
    report.set("closed_form_cases", closed);
    Ok(report)
}

fn pow2(i: usize) -> BigInt {
    BigInt::one() << i
}

/// `a0(F_i) <= Fib(i + 1) + 1 <= 2^i` on random towers, and exact attainment
/// of `Fib(i + 1) + 1` along the all-satellite tower up to `depth_cap`.
///
/// The sharp bound `Fib(i + 2)` and the power bound `2^i` are tracked in the
/// summary separately from the `Fib(i + 1) + 1` bound.
pub fn verify_fib_bound(spec: &FamilySpec) -> Result<VerificationReport, LabError> {
    spec.expect("fib-bound", &[FamilyKind::RandomTower])?;
    if spec.depth_cap < 1 {
        return Err(LabError::BadParameter("depth_cap must be at least 1".into()));
    }
    let mut report = VerificationReport::new("fib-bound", Some(spec.seed));
    let seed = spec.seed;
    let cap = spec.depth_cap;
    let chains_ok = (1..=cap).all(|i| fib(i + 1) < pow2(i));
    report.set("fib_bound_below_pow2", chains_ok);

    // (within sharp, within pow2) per passing or failing case.
    let results = run_cases(&mut report, spec.execution, case_ids("tower", spec.trials), |i, _| {
        let mut rng = case_rng(seed, i);
        let depth = rng.gen_range(1..=cap);
        let s = random_tower(&mut rng, depth, false);
        let r = a0_fib_check(&s);
        if r.within_fib_bound {
            Outcome::Pass((r.within_sharp_bound, r.within_pow2_bound))
        } else {
            let first = r.rows.iter().find(|row| row.a0 > Q::from_integer(row.fib_bound.clone())).expect("a violation");
            Outcome::Fail(json!({
                "path": tower_path(&s),
                "index": first.index,
                "a0": fmt_q(&first.a0),
                "fib_bound": first.fib_bound.to_string(),
                "within_sharp_bound": r.within_sharp_bound,
                "within_pow2_bound": r.within_pow2_bound,
            }))
        }
    });
    let violating = report.failures.len();
    let sharp_failures = report
        .failures
        .iter()
        .filter(|f| f.payload["within_sharp_bound"] == json!(false))
        .count()
        + results.iter().filter(|r| !r.0).count();
    let pow2_failures = report
        .failures
        .iter()
        .filter(|f| f.payload["within_pow2_bound"] == json!(false))
        .count()
        + results.iter().filter(|r| !r.1).count();
    report.set("random_towers_over_fib_bound", violating as u64);
    report.set("random_towers_over_sharp_bound", sharp_failures as u64);
    report.set("random_towers_over_pow2_bound", pow2_failures as u64);

    let s = all_satellite_tower(cap);
    let rows = a0_fib_check(&s).rows;
    let mut sat = Vec::new();
    for row in &rows {
        report.cases += 1;
        let target = Q::from_integer(row.fib_bound.clone());
        sat.push(json!([row.index, fmt_q(&row.a0), row.fib_bound.to_string(), row.sharp_bound.to_string()]));
        if row.a0 != target {
            report.fail(
                format!("satellite-{:02}", row.index),
                json!({"a0": fmt_q(&row.a0), "expected": row.fib_bound.to_string()}),
            );
        }
    }
    report.set("satellite_rows", sat);
    report.set(
        "satellite_attains_sharp_bound",
        rows.iter().all(|r| r.a0 == Q::from_integer(r.sharp_bound.clone())),
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_chain_towers_stay_chains() {
        let mut rng = case_rng(3, 0);
        for _ in 0..20 {
            let s = random_tower(&mut rng, 8, true);
            assert_eq!(s.graph().classify(), Shape::Chain);
            assert!(s.counters().is_some());
        }
    }

    #[test]
    fn identity_suite_small_run() {
        let spec = FamilySpec { trials: 50, seed: 11, ..FamilySpec::new(FamilyKind::RandomTower) };
        let r = verify_tower_identity(&spec).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
        assert_eq!(r.cases, 50);
        assert_eq!(r.summary["closed_form_cases"], json!(22));
    }

    #[test]
    fn satellite_tower_beats_the_fib_bound() {
        let spec = FamilySpec { trials: 0, depth_cap: 5, ..FamilySpec::new(FamilyKind::RandomTower) };
        let r = verify_fib_bound(&spec).unwrap();
        let failed: Vec<&str> = r.failures.iter().map(|f| f.case.as_str()).collect();
        assert_eq!(failed, ["satellite-03", "satellite-04", "satellite-05"]);
        assert_eq!(r.summary["satellite_attains_sharp_bound"], json!(true));
    }

    #[test]
    fn wrong_family_is_refused() {
        let spec = FamilySpec::new(FamilyKind::DuvalD);
        assert!(matches!(verify_tower_identity(&spec), Err(LabError::WrongFamily { .. })));
    }
}
