//! Depth, `a0` and witness-count bounds against `N0` over grid-restricted
//! germ families.

use serde_json::json;

use super::{run_cases, FamilyKind, FamilySpec, LabError, Outcome, VerificationReport};
use crate::fixtures::example_6_7;
use crate::mld_engine::{constants_for, gamma_of_set, hits_target, mld_smooth, pow2, witness_set_smooth, MldError};
use crate::rational::{fmt_q, Q};
use crate::smooth_germ::SmoothGerm;

/// The `example_4_2` family over a grid: one branch of each coefficient, and
/// two branches `b <= b'` with contact `k`. The `example_6_7` family: one or
/// two groups of `m` branches sharing a grid coefficient.
fn family(spec: &FamilySpec, grid: &[Q]) -> Vec<(String, SmoothGerm)> {
    let mut out = Vec::new();
    let (k0, k1) = spec.k_range;
    match spec.kind {
        FamilyKind::Example4_2 => {
            for b in grid {
                out.push((format!("single-{}", fmt_q(b)), SmoothGerm::with_coefficients(std::slice::from_ref(b))));
            }
            for (i, b) in grid.iter().enumerate() {
                for b2 in &grid[i..] {
                    for k in k0.max(1)..=k1 {
                        let g = SmoothGerm::with_coefficients(&[b.clone(), b2.clone()]).contact(0, 1, k);
                        out.push((format!("pair-{}-{}-k{k}", fmt_q(b), fmt_q(b2)), g));
                    }
                }
            }
        }
        _ => {
            for b in grid {
                for m in spec.m_range.0.max(1)..=spec.m_range.1 {
                    for k in k0..=k1 {
                        out.push((format!("group-{}-m{m}-k{k}", fmt_q(b)), example_6_7(k, &[(b.clone(), m)])));
                        for b2 in grid.iter().filter(|b2| *b2 > b) {
                            out.push((
                                format!("groups-{}-{}-m{m}-k{k}", fmt_q(b), fmt_q(b2)),
                                example_6_7(k, &[(b.clone(), m), (b2.clone(), m)]),
                            ));
                        }
                    }
                }
            }
        }
    }
    out
}

/// For each germ: mld witness depth at most `N0`, `a0 <= 2^N0`, certified;
/// every witness found within `min(N0, depth_cap)` blow-ups has `a0 <= 2^N0`;
/// and, when `sum n_i b_i = 1` has no solution over the grid, at most `N0`
/// witnesses. Germs that are not lc are skipped.
pub fn verify_nak_bounds(spec: &FamilySpec) -> Result<VerificationReport, LabError> {
    spec.expect("nak-bounds", &[FamilyKind::Example4_2, FamilyKind::Example6_7])?;
    let grid = spec.positive_coefficients();
    let gamma = gamma_of_set(&grid, 1).map_err(|_| LabError::GammaUndefined)?;
    let c = constants_for(&gamma).map_err(|e| LabError::BadParameter(e.to_string()))?;
    let n0 = c.n0;
    let cap_a0 = pow2(n0);
    let bound = usize::try_from(n0).unwrap_or(usize::MAX).min(spec.depth_cap.max(1));
    let card_check = !hits_target(&grid, 1);

    let members = family(spec, &grid);
    if members.len() > spec.max_cases {
        return Err(LabError::FamilyTooLarge { size: members.len() as u128, cap: spec.max_cases });
    }
    let mut report = VerificationReport::new("nak-bounds", None);
    report.set("gamma", fmt_q(&gamma));
    report.set("n0", n0);
    report.set("search_depth", bound as u64);
    report.set("cardinality_checked", card_check);

    let germs: Vec<SmoothGerm> = members.iter().map(|(_, g)| g.clone()).collect();
    let ids: Vec<String> = members.into_iter().map(|(id, _)| id).collect();
    let stats = run_cases(&mut report, spec.execution, ids, |i, _| {
        let g = &germs[i as usize];
        let r = match mld_smooth(g) {
            Ok(r) => r,
            Err(MldError::NotLc { .. }) => return Outcome::Skip("not lc".into()),
            Err(e) => return Outcome::Fail(json!({"error": e.to_string()})),
        };
        let w = match witness_set_smooth(g, bound) {
            Ok(w) => w,
            Err(e) => return Outcome::Fail(json!({"error": e.to_string()})),
        };
        let mut problems = Vec::new();
        if r.depth as u64 > n0 {
            problems.push(format!("witness depth {} > N0", r.depth));
        }
        if r.witness_a0 > cap_a0 {
            problems.push("witness a0 above 2^N0".to_string());
        }
        if !r.certified {
            problems.push("mld not certified".to_string());
        }
        if w.witnesses.iter().any(|x| x.witness_a0 > cap_a0 || x.depth as u64 > n0) {
            problems.push("a witness exceeds the depth or a0 bound".to_string());
        }
        if card_check && w.witnesses.len() as u64 > n0 {
            problems.push(format!("{} witnesses > N0", w.witnesses.len()));
        }
        if problems.is_empty() {
            Outcome::Pass((r.depth, w.witnesses.len(), w.truncated, r.witness_a0))
        } else {
            Outcome::Fail(json!({"mld": r.to_json(), "witnesses": w.witnesses.len(), "problems": problems}))
        }
    });
    report.set("max_witness_depth", stats.iter().map(|s| s.0).max().unwrap_or(0) as u64);
    report.set("max_witness_count", stats.iter().map(|s| s.1).max().unwrap_or(0) as u64);
    report.set("truncated_cases", stats.iter().filter(|s| s.2).count() as u64);
    report.set("max_witness_a0", stats.iter().map(|s| s.3.clone()).max().map(|x| fmt_q(&x)).unwrap_or_default());
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn half_third_grid_passes() {
        let spec = FamilySpec {
            coefficients: vec![q(1, 2), q(1, 3)],
            k_range: (1, 4),
            ..FamilySpec::new(FamilyKind::Example4_2)
        };
        let r = verify_nak_bounds(&spec).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
        assert_eq!(r.summary["n0"], json!(1159));
        assert_eq!(r.summary["cardinality_checked"], json!(false));
    }

    #[test]
    fn two_thirds_single_branch() {
        let spec = FamilySpec { coefficients: vec![q(2, 3)], k_range: (1, 1), ..FamilySpec::new(FamilyKind::Example4_2) };
        let r = verify_nak_bounds(&spec).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
        assert_eq!(r.summary["n0"], json!(292));
        assert_eq!(r.summary["cardinality_checked"], json!(true));
        let g = SmoothGerm::with_coefficients(&[q(2, 3)]);
        assert_eq!(mld_smooth(&g).unwrap().depth, 1);
    }

    #[test]
    fn empty_grid_has_no_gamma() {
        let spec = FamilySpec { coefficients: vec![Q::from_integer(0.into())], ..FamilySpec::new(FamilyKind::Example4_2) };
        assert_eq!(verify_nak_bounds(&spec), Err(LabError::GammaUndefined));
    }
}
