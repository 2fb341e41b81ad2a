//! The weight inequalities over random negative-definite chains and trees.

use std::collections::BTreeMap;

use rand::Rng;
use serde_json::json;

use super::{case_ids, case_rng, run_cases, FamilyKind, FamilySpec, LabError, Outcome, VerificationReport};
use crate::discrepancy::{check_weight_lemma, solve_discrepancies, BoundaryIncidence, WeightLemmaOptions, WeightLemmaReport};
use crate::dual_graph::{build_graph, DualGraph, VertexId};
use crate::rational::{fmt_q, Q};

pub(crate) struct RandomGerm {
    pub weights: Vec<u32>,
    pub edges: Vec<(usize, usize)>,
    /// `(vertex index, coefficient)`, at most one per vertex.
    pub branches: Vec<(usize, Q)>,
}

impl RandomGerm {
    pub fn graph(&self) -> DualGraph {
        build_graph(&self.weights, &self.edges).expect("generated graphs are valid")
    }

    pub fn incidence(&self) -> BoundaryIncidence {
        let b: Vec<(VertexId, Q)> = self.branches.iter().map(|(v, c)| (VertexId(*v as u32), c.clone())).collect();
        BoundaryIncidence::from_branches(&b).expect("grid coefficients are in (0, 1]")
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "weights": self.weights,
            "edges": self.edges,
            "beta": self.branches.iter().map(|(v, c)| json!([v, fmt_q(c)])).collect::<Vec<_>>(),
        })
    }
}

/// A chain or a random tree (each vertex glued to a random earlier one), with
/// weights in `2..=weight_cap` and at most one grid coefficient per vertex.
pub(crate) fn random_germ(rng: &mut impl Rng, spec: &FamilySpec) -> RandomGerm {
    let n = rng.gen_range(1..=spec.length_cap.max(1));
    let chain = rng.gen_bool(0.5);
    let weights: Vec<u32> = (0..n).map(|_| rng.gen_range(2..=spec.weight_cap.max(2))).collect();
    let edges = (1..n).map(|i| (if chain { i - 1 } else { rng.gen_range(0..i) }, i)).collect();
    let grid = spec.positive_coefficients();
    let mut branches = Vec::new();
    for v in 0..n {
        // Half the curves carry no branch, which is the zero entry of the grid.
        if !grid.is_empty() && rng.gen_bool(0.5) {
            branches.push((v, grid[rng.gen_range(0..grid.len())].clone()));
        }
    }
    RandomGerm { weights, edges, branches }
}

/// Draws per case before giving up on finding a usable sample.
const MAX_DRAWS: u32 = 256;

/// Runs every applicable weight inequality on random lc configurations.
/// Samples that are not negative definite or not lc are rejected and redrawn,
/// never clamped.
pub fn verify_weight_lemma(spec: &FamilySpec) -> Result<VerificationReport, LabError> {
    spec.expect("weight-lemma", &[FamilyKind::RandomChainGerm])?;
    let mut report = VerificationReport::new("weight-lemma", Some(spec.seed));
    let results = run_cases(&mut report, spec.execution, case_ids("germ", spec.trials), |i, _| {
        let mut rng = case_rng(spec.seed, i);
        let mut rejected = [0u32; 2];
        let (germ, g, inc, d) = loop {
            if rejected[0] + rejected[1] >= MAX_DRAWS {
                return Outcome::Skip(format!("no lc negative-definite sample in {MAX_DRAWS} draws"));
            }
            let germ = random_germ(&mut rng, spec);
            let g = germ.graph();
            if !g.is_negative_definite() {
                rejected[0] += 1;
                continue;
            }
            let inc = germ.incidence();
            let d = solve_discrepancies(&g, &inc).expect("negative definite");
            if d.a.values().any(|a| *a < Q::from_integer(0.into())) {
                rejected[1] += 1;
                continue;
            }
            break (germ, g, inc, d);
        };
        let r = check_weight_lemma(&g, &inc, &d.a, &WeightLemmaOptions::default());
        if r.passes() {
            Outcome::Pass((r, rejected))
        } else {
            Outcome::Fail(json!({"germ": germ.to_json(), "report": r}))
        }
    });
    let mut instances: BTreeMap<String, u64> = BTreeMap::new();
    let mut not_applicable = 0u64;
    let mut rejected = [0u64; 2];
    for (r, rej) in &results {
        rejected[0] += u64::from(rej[0]);
        rejected[1] += u64::from(rej[1]);
        match r {
            WeightLemmaReport::NotApplicable(_) => not_applicable += 1,
            WeightLemmaReport::Checked(items) => {
                for it in items {
                    *instances.entry(format!("item_{}", it.item)).or_default() += it.instances as u64;
                }
            }
        }
    }
    report.set("instances", serde_json::to_value(instances).expect("map"));
    report.set("not_applicable", not_applicable);
    report.set("rejected_not_negative_definite", rejected[0]);
    report.set("rejected_not_lc", rejected[1]);
    Ok(report)
}
