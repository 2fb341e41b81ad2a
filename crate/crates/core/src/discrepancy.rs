//! Log discrepancies on a resolution graph.
//!
//! For exceptional curves `E_i` with boundary incidences `beta_i`, the log
//! discrepancies solve `M (a - 1) = (w_i - 2 + beta_i)_i` where `M` is the
//! intersection matrix. The same solve with `beta = 0` gives `a0`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::dual_graph::{DualGraph, VertexId};
use crate::linalg;
use crate::rational::{qi, Q};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiscrepancyError {
    #[error("intersection matrix is not negative definite")]
    NotNegativeDefinite,
    #[error("boundary incidence names unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("boundary incidence at {0} is negative")]
    NegativeBeta(VertexId),
    #[error("boundary coefficient {0} lies outside (0, 1]")]
    CoefficientOutOfRange(String),
    #[error("incidence at {0} is not a non-negative integer combination of the coefficients")]
    NotACombination(VertexId),
    #[error("{0} has weight 1, so the resolution is not minimal")]
    WeightOneVertex(VertexId),
    #[error("multi-edges are rejected unless explicitly allowed")]
    MultiEdgeRejected,
    #[error("graph must be connected")]
    NotConnected,
    #[error("scaled inverse entry ({0}, {1}) is not a negative integer")]
    InverseSignViolation(VertexId, VertexId),
}

/// `beta_i = f^{-1}_* B . E_i` for each exceptional curve, together with the
/// coefficient set the incidences are drawn from.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BoundaryIncidence {
    beta: BTreeMap<VertexId, Q>,
    coefficients: Vec<Q>,
}

impl BoundaryIncidence {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Validated incidences. With an empty coefficient set every beta must be 0.
    pub fn new(beta: BTreeMap<VertexId, Q>, coefficients: Vec<Q>) -> Result<Self, DiscrepancyError> {
        for b in &coefficients {
            if !b.is_positive() || *b > Q::one() {
                return Err(DiscrepancyError::CoefficientOutOfRange(crate::rational::fmt_q(b)));
            }
        }
        for (&v, x) in &beta {
            if x.is_negative() {
                return Err(DiscrepancyError::NegativeBeta(v));
            }
            if !is_nonneg_combination(x, &coefficients) {
                return Err(DiscrepancyError::NotACombination(v));
            }
        }
        let beta = beta.into_iter().filter(|(_, x)| !x.is_zero()).collect();
        Ok(Self { beta, coefficients })
    }

    /// One transverse branch of coefficient `b` per `(host, b)` pair.
    pub fn from_branches(branches: &[(VertexId, Q)]) -> Result<Self, DiscrepancyError> {
        let mut beta: BTreeMap<VertexId, Q> = BTreeMap::new();
        let mut coeffs: Vec<Q> = Vec::new();
        for (v, b) in branches {
            *beta.entry(*v).or_insert_with(Q::zero) += b;
            if !coeffs.contains(b) {
                coeffs.push(b.clone());
            }
        }
        Self::new(beta, coeffs)
    }

    pub fn beta(&self, v: VertexId) -> Q {
        self.beta.get(&v).cloned().unwrap_or_else(Q::zero)
    }

    pub fn coefficients(&self) -> &[Q] {
        &self.coefficients
    }

    fn check_vertices(&self, g: &DualGraph) -> Result<(), DiscrepancyError> {
        match self.beta.keys().find(|v| !g.contains(**v)) {
            Some(&v) => Err(DiscrepancyError::UnknownVertex(v)),
            None => Ok(()),
        }
    }
}

/// Whether `target = sum n_i b_i` for some non-negative integers `n_i`.
pub fn is_nonneg_combination(target: &Q, coeffs: &[Q]) -> bool {
    fn go(rest: &Q, coeffs: &[Q]) -> bool {
        if rest.is_zero() {
            return true;
        }
        let Some((first, tail)) = coeffs.split_first() else {
            return false;
        };
        let mut r = rest.clone();
        loop {
            if go(&r, tail) {
                return true;
            }
            r -= first;
            if r.is_negative() {
                return false;
            }
        }
    }
    if target.is_negative() {
        return false;
    }
    let positive: Vec<Q> = coeffs.iter().filter(|b| b.is_positive()).cloned().collect();
    go(target, &positive)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Discrepancies {
    pub a: BTreeMap<VertexId, Q>,
    /// Log discrepancies of the pair with empty boundary.
    pub a0: BTreeMap<VertexId, Q>,
    /// Signed determinant of the intersection matrix, a by-product of the solve.
    pub determinant: BigInt,
}

impl Discrepancies {
    pub fn min_a(&self) -> Option<Q> {
        self.a.values().min().cloned()
    }
}

fn solve_with(g: &DualGraph, beta: impl Fn(VertexId) -> Q) -> Option<(BTreeMap<VertexId, Q>, BigInt)> {
    let im = g.intersection_matrix();
    let rhs: Vec<Q> = im
        .order
        .iter()
        .map(|&v| qi(i64::from(g.weight(v).expect("vertex")) - 2) + beta(v))
        .collect();
    let (x, det) = linalg::solve(&im.to_bigint(), &rhs)?;
    let a = im.order.iter().zip(x).map(|(&v, xi)| (v, xi + Q::one())).collect();
    Some((a, det))
}

/// Exact log discrepancies. Works for any negative definite graph, including
/// cycles and multi-edges.
pub fn solve_discrepancies(g: &DualGraph, inc: &BoundaryIncidence) -> Result<Discrepancies, DiscrepancyError> {
    inc.check_vertices(g)?;
    if !g.is_negative_definite() {
        return Err(DiscrepancyError::NotNegativeDefinite);
    }
    let (a, determinant) = solve_with(g, |v| inc.beta(v)).ok_or(DiscrepancyError::NotNegativeDefinite)?;
    let (a0, _) = solve_with(g, |_| Q::zero()).ok_or(DiscrepancyError::NotNegativeDefinite)?;
    Ok(Discrepancies { a, a0, determinant })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PldOptions {
    /// Multiplicity >= 2 edges are outside the minimal-resolution setting;
    /// they are rejected unless this is set.
    pub allow_multi_edges: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Pld {
    /// Empty graph: the germ is smooth and no exceptional curve exists.
    Smooth,
    Value(#[serde(with = "crate::rational::serde_q")] Q),
}

/// Minimum of `a` over the curves of a minimal resolution.
pub fn pld(g: &DualGraph, inc: &BoundaryIncidence, opts: PldOptions) -> Result<Pld, DiscrepancyError> {
    if g.is_empty() {
        inc.check_vertices(g)?;
        return Ok(Pld::Smooth);
    }
    if let Some(v) = g.vertices().find(|&v| g.weight(v) == Some(1)) {
        return Err(DiscrepancyError::WeightOneVertex(v));
    }
    if !opts.allow_multi_edges && g.edges().any(|(_, _, m)| m > 1) {
        return Err(DiscrepancyError::MultiEdgeRejected);
    }
    let d = solve_discrepancies(g, inc)?;
    Ok(Pld::Value(d.min_a().expect("non-empty graph")))
}

/// Rational inverse of the intersection matrix, rows and columns in vertex order.
pub fn inverse_intersection(g: &DualGraph) -> Option<(Vec<VertexId>, Vec<Vec<Q>>)> {
    let im = g.intersection_matrix();
    let inv = linalg::inverse(&im.to_bigint())?;
    Some((im.order, inv))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrictCoefficients {
    /// `1 - a_i` on each curve.
    pub coefficients: BTreeMap<VertexId, Q>,
    /// `I = |det M|`.
    pub scale: BigInt,
    /// `I * s_ij` where `s = M^{-1}`; every entry is a negative integer.
    pub scaled_inverse: Vec<Vec<BigInt>>,
    pub order: Vec<VertexId>,
}

impl StrictCoefficients {
    /// Checks that `multiple * s_ij` is a negative integer for every entry.
    /// Holds for any multiple of `scale`.
    pub fn check_multiple(&self, multiple: &BigInt) -> bool {
        let (q, r) = (multiple / &self.scale, multiple % &self.scale);
        r.is_zero() && q.is_positive() && self.scaled_inverse.iter().flatten().all(|v| v.is_negative())
    }
}

/// Coefficients `1 - a_i` with the integrality of `I * M^{-1}` verified.
pub fn strict_coefficients(g: &DualGraph, inc: &BoundaryIncidence) -> Result<StrictCoefficients, DiscrepancyError> {
    if !g.is_connected() {
        return Err(DiscrepancyError::NotConnected);
    }
    let d = solve_discrepancies(g, inc)?;
    let scale = d.determinant.abs();
    let (order, inv) = inverse_intersection(g).ok_or(DiscrepancyError::NotNegativeDefinite)?;
    let sq = Q::from_integer(scale.clone());
    let mut scaled = Vec::with_capacity(order.len());
    for (i, row) in inv.iter().enumerate() {
        let mut out = Vec::with_capacity(row.len());
        for (j, s) in row.iter().enumerate() {
            let v = s * &sq;
            if !v.is_integer() || !v.is_negative() {
                return Err(DiscrepancyError::InverseSignViolation(order[i], order[j]));
            }
            out.push(v.to_integer());
        }
        scaled.push(out);
    }
    let coefficients = d.a.iter().map(|(&v, a)| (v, Q::one() - a)).collect();
    Ok(StrictCoefficients { coefficients, scale, scaled_inverse: scaled, order })
}

#[derive(Debug, Clone, Default)]
pub struct WeightLemmaOptions {
    /// Lower bound used by item 4; defaults to the smallest positive `a`.
    pub epsilon0: Option<Q>,
    /// The mld used by item 6; defaults to `min a` over the graph.
    pub mld: Option<Q>,
    /// Evaluate the fork equality clause of item 3 literally, requiring the
    /// fork itself to have weight 2 even when `a` vanishes there. The literal
    /// clause is false in that degenerate case, so this is off by default.
    pub literal_fork_equality: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ItemOutcome {
    pub item: u8,
    pub instances: usize,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightLemmaReport {
    NotApplicable(String),
    Checked(Vec<ItemOutcome>),
}

impl WeightLemmaReport {
    pub fn passes(&self) -> bool {
        match self {
            Self::NotApplicable(_) => true,
            Self::Checked(items) => items.iter().all(|i| i.violations.is_empty()),
        }
    }

    pub fn is_applicable(&self) -> bool {
        matches!(self, Self::Checked(_))
    }
}

/// Evaluates the six weight inequalities on an lc configuration whose
/// discrepancies are all at most 1.
pub fn check_weight_lemma(
    g: &DualGraph,
    inc: &BoundaryIncidence,
    a: &BTreeMap<VertexId, Q>,
    opts: &WeightLemmaOptions,
) -> WeightLemmaReport {
    let one = Q::one();
    if let Some((v, _)) = a.iter().find(|(_, x)| x.is_negative()) {
        return WeightLemmaReport::NotApplicable(format!("a({v}) < 0, not lc"));
    }
    if let Some((v, _)) = a.iter().find(|(_, x)| **x > one) {
        return WeightLemmaReport::NotApplicable(format!("a({v}) > 1"));
    }
    let w = |v: VertexId| i64::from(g.weight(v).expect("vertex"));
    let av = |v: VertexId| a[&v].clone();
    let beta = |v: VertexId| inc.beta(v);
    let two = qi(2);
    let three = qi(3);
    let verts: Vec<VertexId> = g.vertices().collect();

    let mut items = Vec::with_capacity(6);

    // (1) w_k <= 2 / a_k
    let mut it = ItemOutcome { item: 1, instances: 0, violations: vec![] };
    for &k in &verts {
        if av(k).is_positive() {
            it.instances += 1;
            if qi(w(k)) * av(k) > two {
                it.violations.push(format!("w({k}) * a({k}) > 2"));
            }
        }
    }
    items.push(it);

    // (2) midpoint convexity at curves of weight >= 2
    let mut it = ItemOutcome { item: 2, instances: 0, violations: vec![] };
    for &k in &verts {
        if w(k) < 2 {
            continue;
        }
        let nb = g.neighbors(k);
        for (i, &k1) in nb.iter().enumerate() {
            for &k2 in &nb[i + 1..] {
                it.instances += 1;
                let lhs = &two * av(k);
                let rhs = av(k1) + av(k2);
                if lhs > rhs {
                    it.violations.push(format!("2a({k}) > a({k1}) + a({k2})"));
                } else if lhs == rhs {
                    let all_zero = av(k).is_zero() && av(k1).is_zero() && av(k2).is_zero();
                    if !beta(k).is_zero() || !(w(k) == 2 || all_zero) {
                        it.violations.push(format!("equality at {k} without beta = 0 and (w = 2 or a = 0)"));
                    }
                }
            }
        }
    }
    items.push(it);

    // (3) at a fork the third branch does not dip below the fork
    let mut it = ItemOutcome { item: 3, instances: 0, violations: vec![] };
    for &k0 in &verts {
        let nb = g.neighbors(k0);
        if nb.len() < 3 || w(k0) < 2 {
            continue;
        }
        for (i, &k1) in nb.iter().enumerate() {
            for &k2 in &nb[i + 1..] {
                if w(k1) < 2 || w(k2) < 2 {
                    continue;
                }
                for &k3 in nb.iter().filter(|&&x| x != k1 && x != k2) {
                    it.instances += 1;
                    if av(k3) < av(k0) {
                        it.violations.push(format!("a({k3}) < a({k0}) at fork"));
                    } else if av(k3) == av(k0) {
                        let betas = [k0, k1, k2].iter().all(|&x| beta(x).is_zero());
                        let sides = w(k1) == 2 && w(k2) == 2;
                        let centre = w(k0) == 2 || (!opts.literal_fork_equality && av(k0).is_zero());
                        if !(betas && sides && centre) {
                            it.violations.push(format!("fork equality at {k0} with {k1},{k2},{k3}"));
                        }
                    }
                }
            }
        }
    }
    items.push(it);

    // (4) a gap of eps0 / 3 next to a curve of weight >= 3
    let eps0 = opts
        .epsilon0
        .clone()
        .or_else(|| a.values().filter(|x| x.is_positive()).min().cloned());
    let mut it = ItemOutcome { item: 4, instances: 0, violations: vec![] };
    if let Some(eps0) = &eps0 {
        for &k0 in &verts {
            if w(k0) < 3 {
                continue;
            }
            let nb = g.neighbors(k0);
            for &k1 in &nb {
                for &k2 in nb.iter().filter(|&&x| x != k1) {
                    if av(k1) < av(k2) || av(k1) < *eps0 {
                        continue;
                    }
                    it.instances += 1;
                    if av(k1) - av(k0) < eps0 / &three {
                        it.violations.push(format!("a({k1}) - a({k0}) < eps0/3"));
                    }
                }
            }
        }
    }
    items.push(it);

    // (5) a fork whose neighbourhood has weights >= 2 carries the minimum
    let mut it = ItemOutcome { item: 5, instances: 0, violations: vec![] };
    let min_a = a.values().min().cloned();
    for &k0 in &verts {
        let nb = g.neighbors(k0);
        if nb.len() < 3 || w(k0) < 2 {
            continue;
        }
        let heavy = nb.iter().filter(|&&x| w(x) >= 2).count();
        if heavy < 3 {
            continue;
        }
        it.instances += 1;
        if let Some(m) = &min_a {
            if *m < av(k0) {
                it.violations.push(format!("some a(E) < a({k0}) with {k0} a heavy fork"));
            }
        }
    }
    items.push(it);

    // (6) two mld-curves joined through curves of weight >= 2
    let mut it = ItemOutcome { item: 6, instances: 0, violations: vec![] };
    if let Some(mld) = opts.mld.clone().or(min_a) {
        if mld.is_positive() {
            let ends: Vec<VertexId> = verts.iter().copied().filter(|&v| av(v) == mld).collect();
            for &s in &ends {
                for path in simple_paths_from(g, s) {
                    let t = *path.last().expect("non-empty");
                    if path.len() < 3 || t <= s || av(t) != mld {
                        continue;
                    }
                    let interior = &path[1..path.len() - 1];
                    if interior.iter().any(|&x| w(x) < 2) {
                        continue;
                    }
                    it.instances += 1;
                    let flat = path.iter().all(|&x| av(x) == mld);
                    let twos = interior.iter().all(|&x| w(x) == 2);
                    if !(flat && twos) {
                        it.violations.push(format!("path {s}..{t} between mld-curves is not flat"));
                    }
                }
            }
        }
    }
    items.push(it);

    WeightLemmaReport::Checked(items)
}

/// All simple paths starting at `s` (including the trivial one).
fn simple_paths_from(g: &DualGraph, s: VertexId) -> Vec<Vec<VertexId>> {
    let mut out = Vec::new();
    let mut path = vec![s];
    fn go(g: &DualGraph, path: &mut Vec<VertexId>, out: &mut Vec<Vec<VertexId>>) {
        out.push(path.clone());
        let last = *path.last().expect("non-empty");
        for u in g.neighbors(last) {
            if !path.contains(&u) {
                path.push(u);
                go(g, path, out);
                path.pop();
            }
        }
    }
    go(g, &mut path, &mut out);
    out
}
