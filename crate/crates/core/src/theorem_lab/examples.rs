//! Worked examples compared exactly with their closed forms.

use serde_json::{json, Value};

use super::{LabError, VerificationReport};
use crate::fixtures;
use crate::mld_engine::{mld_singular, mld_smooth, smooth_resolution, witness_set_singular, witness_set_smooth};
use crate::rational::{fmt_q, q, qi, Q};

pub const EXAMPLES: [&str; 5] = ["ex4_2", "ex6_7", "ex6_8", "ex8_4", "ex8_5"];

fn min_k(name: &str) -> u32 {
    match name {
        "ex8_4" => 2,
        "ex6_7" => 0,
        _ => 1,
    }
}

struct Checks {
    observed: Vec<(String, Value)>,
    mismatches: Vec<Value>,
}

impl Checks {
    fn eq(&mut self, what: &str, got: impl Into<Value>, expected: impl Into<Value>) {
        let (got, expected) = (got.into(), expected.into());
        if got != expected {
            self.mismatches.push(json!({"check": what, "got": got, "expected": expected}));
        }
        self.observed.push((what.to_string(), got));
    }

    fn q(&mut self, what: &str, got: &Q, expected: &Q) {
        self.eq(what, fmt_q(got), fmt_q(expected));
    }
}

fn one_case(name: &str, k: u32, c: &mut Checks) -> Result<(), String> {
    let err = |e: crate::mld_engine::MldError| e.to_string();
    let kq = qi(i64::from(k));
    match name {
        "ex4_2" => {
            let r = mld_smooth(&fixtures::example_4_2(k)).map_err(err)?;
            c.q("mld", &r.value, &(Q::from_integer(1.into()) / (&kq + qi(1))));
            c.eq("depth", r.depth as u64, u64::from(k));
            c.q("witness_a0", &r.witness_a0, &(&kq + qi(1)));
            c.eq("certified", r.certified, true);
        }
        "ex6_7" => {
            let g = fixtures::example_6_7_pair(k);
            let s = smooth_resolution(&g).map_err(err)?;
            let off: Vec<String> = s
                .tower_curves()
                .iter()
                .filter(|v| *s.a(**v) != qi(1))
                .map(|v| v.to_string())
                .collect();
            c.eq("curves_with_a_not_1", off, Vec::<String>::new());
            if k == 0 {
                c.eq("depth_bound_zero_rejected", witness_set_smooth(&g, 0).is_err(), true);
            } else {
                let w = witness_set_smooth(&g, k as usize).map_err(err)?;
                c.q("mld", &w.mld, &qi(1));
                c.eq("witnesses", w.witnesses.len() as u64, u64::from(k));
                c.eq("truncated", w.truncated, true);
            }
        }
        "ex6_8" => {
            let g = fixtures::example_6_8(k);
            let det = g.graph().map_err(err)?.determinant_abs();
            c.eq("determinant_abs", det.to_string(), "4");
            let w = witness_set_singular(&g, 1).map_err(err)?;
            c.q("mld", &w.mld, &qi(1));
            c.eq("witnesses", w.witnesses.len() as u64, u64::from(k) + 3);
        }
        "ex8_4" => {
            let r = mld_singular(&fixtures::example_8_4(k)).map_err(err)?;
            let a: Vec<&Q> = r.discrepancies.a.values().collect();
            c.q("a1", a[0], &(q(1, 2) + q(1, 3 * i64::from(k))));
            c.q("a2", a[1], &(q(1, 2) + q(2, 3 * i64::from(k))));
        }
        "ex8_5" => {
            let r = mld_singular(&fixtures::example_8_5(k)).map_err(err)?;
            let a: Vec<&Q> = r.discrepancies.a.values().collect();
            let d = 2 * (2 * i64::from(k) + 2) * (2 * i64::from(k) + 1) - 2;
            c.q("a1", a[0], &q(2 * i64::from(k) + 2, d));
            c.q("a2", a[1], &q(2 * i64::from(k) + 3, d));
        }
        _ => unreachable!("checked by caller"),
    }
    Ok(())
}

/// Builds the named example for each `k` in the inclusive range and compares
/// the engine's output with the closed form.
pub fn run_example(name: &str, k_range: (u32, u32)) -> Result<VerificationReport, LabError> {
    if !EXAMPLES.contains(&name) {
        return Err(LabError::UnknownExample(name.to_string()));
    }
    let (k0, k1) = k_range;
    if k0 > k1 || k0 < min_k(name) || k1 > 200 {
        return Err(LabError::BadParameter(format!("k range {k0}..={k1} for {name}")));
    }
    let mut report = VerificationReport::new(name, None);
    let mut observed = serde_json::Map::new();
    for k in k0..=k1 {
        report.cases += 1;
        let mut c = Checks { observed: vec![], mismatches: vec![] };
        let case = format!("k{k:03}");
        match one_case(name, k, &mut c) {
            Ok(()) if c.mismatches.is_empty() => {}
            Ok(()) => report.fail(case.clone(), Value::Array(c.mismatches)),
            Err(e) => report.fail(case.clone(), json!({"error": e})),
        }
        observed.insert(case, Value::Object(c.observed.into_iter().collect()));
    }
    report.set("observed", Value::Object(observed));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_instances() {
        let r = run_example("ex8_4", (5, 5)).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
        assert_eq!(r.summary["observed"]["k005"]["a1"], json!("17/30"));
        let r = run_example("ex8_5", (2, 2)).unwrap();
        assert_eq!(r.summary["observed"]["k002"]["a1"], json!("3/29"));
        assert!(run_example("ex6_8", (1, 4)).unwrap().passed());
        assert!(run_example("ex4_2", (1, 5)).unwrap().passed());
        assert!(run_example("ex6_7", (0, 4)).unwrap().passed());
    }

    #[test]
    fn bad_requests() {
        assert!(matches!(run_example("ex9_9", (1, 1)), Err(LabError::UnknownExample(_))));
        assert!(matches!(run_example("ex8_4", (1, 3)), Err(LabError::BadParameter(_))));
    }
}
