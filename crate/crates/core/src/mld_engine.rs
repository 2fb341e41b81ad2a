//! Minimal log discrepancies and their witnesses.
//!
//! Over a smooth germ the engine first separates the branches by blowing up
//! their shared points. On the resulting snc model every point `p` satisfies
//! `mld_p >= a(first blow-up of p)`, so once no single blow-up undercuts the
//! running minimum that minimum is the mld. Singular germs reduce to smooth
//! ones at finitely many candidate points of the minimal resolution.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::discrepancy::{solve_discrepancies, BoundaryIncidence, DiscrepancyError, Discrepancies};
use crate::dual_graph::{DualGraph, GraphError, Shape, VertexId};
use crate::rational::{fmt_q, floor_to_int, qi, Q};
use crate::smooth_germ::{
    path_string, resolve_branches, AmbientCurve, Branch, BranchId, ContactTable, GermError, PathStep,
    SmoothGerm, TowerState,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MldError {
    #[error(transparent)]
    Germ(#[from] GermError),
    #[error(transparent)]
    Discrepancy(#[from] DiscrepancyError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("pair is not log canonical: a = {value} on {at}")]
    NotLc { value: String, at: String },
    #[error("coefficient set has no positive element")]
    EmptyCoefficientSet,
    #[error("n must be a positive integer")]
    BadTarget,
    #[error("N0 does not fit in 64 bits")]
    ConstantOverflow,
    #[error("resolution graph is empty; use the smooth engine")]
    EmptyGraph,
    #[error("resolution graph must be a tree, found {0:?}")]
    NotATree(Shape),
    #[error("curve {0} has weight 1, so the resolution is not minimal")]
    NotMinimalResolution(usize),
    #[error("attachment {0} names a host outside the graph")]
    UnknownHost(usize),
    #[error("branches {0} and {1} have a contact but different hosts")]
    ContactAcrossHosts(usize, usize),
    #[error("depth bound must be at least 1 for a smooth germ")]
    DepthBoundTooSmall,
}

/// `min { sum n_i b_i - n > 0 }` over non-negative integers `n_i`.
///
/// The minimum is at most `min b`, so only sums up to `n + min b` matter.
pub fn gamma_of_set(coeffs: &[Q], n: u32) -> Result<Q, MldError> {
    if n == 0 {
        return Err(MldError::BadTarget);
    }
    let mut pos: Vec<Q> = coeffs.iter().filter(|b| b.is_positive()).cloned().collect();
    pos.sort();
    pos.dedup();
    let bmin = pos.first().cloned().ok_or(MldError::EmptyCoefficientSet)?;
    let target = qi(i64::from(n));
    let cap = &target + &bmin;
    let mut best = bmin.clone();
    fn go(pos: &[Q], sum: &Q, target: &Q, cap: &Q, best: &mut Q) {
        if sum > target {
            let g = sum - target;
            if g < *best {
                *best = g;
            }
            return;
        }
        let Some((b, rest)) = pos.split_first() else {
            return;
        };
        let mut s = sum.clone();
        while s <= *cap {
            go(rest, &s, target, cap, best);
            s += b;
        }
    }
    go(&pos, &Q::zero(), &target, &cap, &mut best);
    Ok(best)
}

/// Whether `sum n_i b_i = n` is solvable, i.e. whether `{sum n_i b_i - n >= 0}`
/// reaches 0.
pub fn hits_target(coeffs: &[Q], n: u32) -> bool {
    crate::discrepancy::is_nonneg_combination(&qi(i64::from(n)), coeffs)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Constants {
    #[serde(with = "crate::rational::serde_q")]
    pub gamma: Q,
    pub n0: u64,
    #[serde(with = "crate::rational::serde_q")]
    pub epsilon: Q,
    #[serde(with = "crate::rational::serde_q")]
    pub delta: Q,
}

/// `N0 = floor(1 + 32/gamma^2 + 1/gamma)`, `epsilon = gamma^2/8`, `delta = gamma/2`.
pub fn constants_for(gamma: &Q) -> Result<Constants, MldError> {
    if !gamma.is_positive() {
        return Err(MldError::BadTarget);
    }
    let g2 = gamma * gamma;
    let n0 = floor_to_int(&(Q::one() + qi(32) / &g2 + gamma.recip()));
    let n0 = n0.to_u64().ok_or(MldError::ConstantOverflow)?;
    Ok(Constants { gamma: gamma.clone(), n0, epsilon: g2 / qi(8), delta: gamma / qi(2) })
}

/// Where a divisor's path starts.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StartPoint {
    /// The origin of a smooth germ.
    Origin,
    /// A curve of the minimal resolution itself (depth 0).
    Curve(usize),
    /// The intersection point of two resolution curves.
    Node(usize, usize),
    /// The point of a resolution curve where the listed branches pass.
    BranchPoint(usize, Vec<BranchId>),
    /// A general point of a resolution curve.
    FreePoint(usize),
}

impl fmt::Display for StartPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StartPoint::Origin => write!(f, "origin"),
            StartPoint::Curve(i) => write!(f, "E{i}"),
            StartPoint::Node(i, j) => write!(f, "E{i}^E{j}"),
            StartPoint::BranchPoint(i, b) => {
                let b: Vec<String> = b.iter().map(ToString::to_string).collect();
                write!(f, "E{i}[{}]", b.join(","))
            }
            StartPoint::FreePoint(i) => write!(f, "E{i}*"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Witness {
    pub start: StartPoint,
    pub path: Vec<PathStep>,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.start)
        } else {
            write!(f, "{}:{}", self.start, path_string(&self.path))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MldResult {
    pub value: Q,
    pub witness: Witness,
    /// Number of blow-ups from the start point; 0 for resolution curves.
    pub depth: usize,
    pub witness_a0: Q,
    /// True when the closure argument certified the minimum.
    pub certified: bool,
}

impl MldResult {
    fn key(&self) -> (&Q, &Q, usize, &Witness) {
        (&self.value, &self.witness_a0, self.depth, &self.witness)
    }

    /// Order used to pick a witness: value, then `a0`, then depth, then path.
    pub fn cmp_key(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "value": fmt_q(&self.value),
            "depth": self.depth,
            "witness_a0": fmt_q(&self.witness_a0),
            "certified": self.certified,
            "witness": self.witness.to_string(),
        })
    }
}

fn not_lc(value: &Q, at: impl fmt::Display) -> MldError {
    MldError::NotLc { value: fmt_q(value), at: at.to_string() }
}

fn check_lc(s: &TowerState) -> Result<(), MldError> {
    for &v in s.tower_curves() {
        let a = s.a(v);
        if a.is_negative() {
            return Err(not_lc(a, path_string(&s.curve(v).expect("curve").path)));
        }
    }
    Ok(())
}

/// Separates the branches, then blows up any center whose new curve would
/// undercut the running minimum until none does.
fn closed_resolution(germ: &SmoothGerm) -> Result<TowerState, MldError> {
    let mut s = resolve_branches(germ)?;
    check_lc(&s)?;
    loop {
        let m = s.tower_curves().iter().map(|&v| s.a(v).clone()).min().expect("origin blown up");
        let mut bad = None;
        for c in s.all_centers() {
            if s.one_step(&c)?.0 < m {
                bad = Some(c);
                break;
            }
        }
        match bad {
            Some(c) => {
                s.blow_up_in_place(&c)?;
                check_lc(&s)?;
            }
            None => return Ok(s),
        }
    }
}

fn candidates_of(s: &TowerState, start: &StartPoint, certified: bool) -> Vec<MldResult> {
    s.tower_curves()
        .iter()
        .map(|&v| {
            let r = s.curve(v).expect("curve");
            MldResult {
                value: r.a.clone(),
                witness: Witness { start: start.clone(), path: r.path.clone() },
                depth: r.depth,
                witness_a0: r.a0.clone(),
                certified,
            }
        })
        .collect()
}

fn best_of(mut v: Vec<MldResult>) -> Option<MldResult> {
    v.sort_by(MldResult::cmp_key);
    v.into_iter().next()
}

/// Minimum over divisors centered at the origin of `germ`, with its witness.
fn local_mld(germ: &SmoothGerm, start: &StartPoint) -> Result<MldResult, MldError> {
    let s = closed_resolution(germ)?;
    Ok(best_of(candidates_of(&s, start, true)).expect("non-empty tower"))
}

/// Exact mld of a smooth germ. When the minimum exceeds 1 it equals
/// `2 - mult_x B`, attained only by the first blow-up.
pub fn mld_smooth(germ: &SmoothGerm) -> Result<MldResult, MldError> {
    let best = local_mld(germ, &StartPoint::Origin)?;
    if best.value > Q::one() && germ.ambient.is_empty() {
        debug_assert_eq!(best.value, qi(2) - germ.origin_multiplicity());
        debug_assert_eq!(best.depth, 1);
    }
    Ok(best)
}

/// The resolved model used by [`mld_smooth`], for inspection.
pub fn smooth_resolution(germ: &SmoothGerm) -> Result<TowerState, MldError> {
    closed_resolution(germ)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attachment {
    pub coefficient: Q,
    /// Positional index of the host curve.
    pub host: usize,
}

/// A minimal resolution with branches meeting its curves transversally at
/// general points. Two branches on the same host share a point exactly when
/// their contact is listed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingularGerm {
    pub weights: Vec<u32>,
    pub edges: Vec<(usize, usize)>,
    pub attachments: Vec<Attachment>,
    pub contacts: ContactTable,
}

impl SingularGerm {
    pub fn new(weights: Vec<u32>, edges: Vec<(usize, usize)>) -> Self {
        Self { weights, edges, attachments: vec![], contacts: ContactTable::default() }
    }

    pub fn attach(mut self, coefficient: Q, host: usize) -> Self {
        self.attachments.push(Attachment { coefficient, host });
        self
    }

    pub fn graph(&self) -> Result<DualGraph, MldError> {
        Ok(crate::dual_graph::build_graph(&self.weights, &self.edges)?)
    }

    pub fn incidence(&self) -> Result<BoundaryIncidence, MldError> {
        let n = self.weights.len();
        let mut br = Vec::new();
        for (i, at) in self.attachments.iter().enumerate() {
            if at.host >= n {
                return Err(MldError::UnknownHost(i));
            }
            br.push((VertexId(at.host as u32), at.coefficient.clone()));
        }
        Ok(BoundaryIncidence::from_branches(&br)?)
    }

    /// Distinct attachment points: `(host, branches through it)`.
    pub fn attachment_points(&self) -> Result<Vec<(usize, Vec<BranchId>)>, MldError> {
        for (i, j, _) in self.contacts.entries() {
            let (a, b) = (i.0 as usize, j.0 as usize);
            if a >= self.attachments.len() || b >= self.attachments.len() {
                return Err(GermError::UnknownBranch(if a >= self.attachments.len() { i } else { j }).into());
            }
            if self.attachments[a].host != self.attachments[b].host {
                return Err(MldError::ContactAcrossHosts(a, b));
            }
        }
        let listed = |a: usize, b: usize| {
            self.contacts.entries().any(|(i, j, _)| {
                (i.0 as usize, j.0 as usize) == (a.min(b), a.max(b))
            })
        };
        let mut points: Vec<(usize, Vec<BranchId>)> = Vec::new();
        for (i, at) in self.attachments.iter().enumerate() {
            let slot = points
                .iter_mut()
                .find(|(h, ids)| *h == at.host && ids.iter().any(|b| listed(b.0 as usize, i)));
            match slot {
                Some((_, ids)) => ids.push(BranchId(i as u32)),
                None => points.push((at.host, vec![BranchId(i as u32)])),
            }
        }
        Ok(points)
    }

    fn validate(&self) -> Result<(DualGraph, Discrepancies), MldError> {
        let g = self.graph()?;
        if g.is_empty() {
            return Err(MldError::EmptyGraph);
        }
        match g.classify() {
            Shape::Chain | Shape::TreeWithForks(_) => {}
            other => return Err(MldError::NotATree(other)),
        }
        if let Some(i) = self.weights.iter().position(|&w| w < 2) {
            return Err(MldError::NotMinimalResolution(i));
        }
        let inc = self.incidence()?;
        let d = solve_discrepancies(&g, &inc)?;
        if let Some((v, a)) = d.a.iter().find(|(_, a)| a.is_negative()) {
            return Err(not_lc(a, format!("E{}", v.0)));
        }
        Ok((g, d))
    }

    fn ambient(&self, g: &DualGraph, d: &Discrepancies, i: usize) -> AmbientCurve {
        let v = VertexId(i as u32);
        AmbientCurve {
            name: format!("E{i}"),
            coefficient: Q::one() - &d.a[&v],
            a0: d.a0[&v].clone(),
            weight: g.weight(v).expect("vertex"),
        }
    }

    /// The smooth germ seen at each candidate point of the resolution.
    fn local_germs(&self, g: &DualGraph, d: &Discrepancies) -> Result<Vec<(StartPoint, SmoothGerm)>, MldError> {
        let mut out = Vec::new();
        for (u, v, _) in g.edges() {
            let (i, j) = (u.0 as usize, v.0 as usize);
            let germ = SmoothGerm {
                ambient: vec![self.ambient(g, d, i), self.ambient(g, d, j)],
                ..SmoothGerm::default()
            };
            out.push((StartPoint::Node(i, j), germ));
        }
        for (host, ids) in self.attachment_points()? {
            let branches = ids
                .iter()
                .map(|&b| Branch { id: b, coefficient: self.attachments[b.0 as usize].coefficient.clone() })
                .collect();
            let mut contacts = ContactTable::default();
            for (i, j, c) in self.contacts.entries() {
                if ids.contains(&i) && ids.contains(&j) {
                    contacts.set(i, j, c);
                }
            }
            let germ = SmoothGerm { branches, contacts, ambient: vec![self.ambient(g, d, host)] };
            out.push((StartPoint::BranchPoint(host, ids), germ));
        }
        for i in 0..self.weights.len() {
            let germ = SmoothGerm { ambient: vec![self.ambient(g, d, i)], ..SmoothGerm::default() };
            out.push((StartPoint::FreePoint(i), germ));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingularMld {
    pub result: MldResult,
    pub pld: Q,
    pub discrepancies: Discrepancies,
}

/// Exact mld of a singular germ: the smaller of the pld and the local mld at
/// every node, attachment point and one general point per curve.
pub fn mld_singular(germ: &SingularGerm) -> Result<SingularMld, MldError> {
    let (g, d) = germ.validate()?;
    let mut cands: Vec<MldResult> = d
        .a
        .iter()
        .map(|(v, a)| MldResult {
            value: a.clone(),
            witness: Witness { start: StartPoint::Curve(v.0 as usize), path: vec![] },
            depth: 0,
            witness_a0: d.a0[v].clone(),
            certified: true,
        })
        .collect();
    let pld = d.min_a().expect("non-empty");
    for (start, local) in germ.local_germs(&g, &d)? {
        cands.push(local_mld(&local, &start)?);
    }
    let result = best_of(cands).expect("non-empty");
    Ok(SingularMld { result, pld, discrepancies: d })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessSet {
    pub mld: Q,
    /// Sorted by value, `a0`, depth, path.
    pub witnesses: Vec<MldResult>,
    /// Set when some divisor beyond the bound could still attain the mld.
    pub truncated: bool,
    pub depth_bound: usize,
}

impl WitnessSet {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "mld": fmt_q(&self.mld),
            "count": self.witnesses.len(),
            "truncated": self.truncated,
            "depth_bound": self.depth_bound,
            "witnesses": self.witnesses.iter().map(MldResult::to_json).collect::<Vec<_>>(),
        })
    }
}

struct Search<'a> {
    mld: &'a Q,
    bound: usize,
    start: StartPoint,
    out: Vec<MldResult>,
    truncated: bool,
}

impl Search<'_> {
    /// Expands only centers whose whole subtree can still reach the mld; the
    /// subtree minimum is the local mld at the center.
    fn visit(&mut self, s: &TowerState) -> Result<(), MldError> {
        for c in s.canonical_centers() {
            let local = s.local_germ(&c)?;
            let lm = local_mld(&local, &StartPoint::Origin)?;
            if lm.value > *self.mld {
                continue;
            }
            if s.depth() >= self.bound {
                self.truncated = true;
                continue;
            }
            let child = s.blow_up(&c)?;
            let f = child.newest().expect("just created");
            let r = child.curve(f).expect("curve");
            if r.a == *self.mld {
                self.out.push(MldResult {
                    value: r.a.clone(),
                    witness: Witness { start: self.start.clone(), path: r.path.clone() },
                    depth: r.depth,
                    witness_a0: r.a0.clone(),
                    certified: true,
                });
            }
            self.visit(&child)?;
        }
        Ok(())
    }
}

fn search_from(germ: &SmoothGerm, start: StartPoint, mld: &Q, bound: usize) -> Result<(Vec<MldResult>, bool), MldError> {
    let mut search = Search { mld, bound, start, out: vec![], truncated: false };
    search.visit(&TowerState::new(germ)?)?;
    Ok((search.out, search.truncated))
}

/// Every divisor over the origin attaining the mld within `depth_bound`
/// blow-ups, one representative per general point.
pub fn witness_set_smooth(germ: &SmoothGerm, depth_bound: usize) -> Result<WitnessSet, MldError> {
    if depth_bound == 0 {
        return Err(MldError::DepthBoundTooSmall);
    }
    let mld = mld_smooth(germ)?.value;
    let (mut witnesses, truncated) = search_from(germ, StartPoint::Origin, &mld, depth_bound)?;
    witnesses.sort_by(MldResult::cmp_key);
    Ok(WitnessSet { mld, witnesses, truncated, depth_bound })
}

/// Resolution curves attaining the mld plus divisors over candidate points
/// within `depth_bound` blow-ups.
pub fn witness_set_singular(germ: &SingularGerm, depth_bound: usize) -> Result<WitnessSet, MldError> {
    let sm = mld_singular(germ)?;
    let mld = sm.result.value.clone();
    let (g, d) = germ.validate()?;
    let mut witnesses: Vec<MldResult> = d
        .a
        .iter()
        .filter(|(_, a)| **a == mld)
        .map(|(v, a)| MldResult {
            value: a.clone(),
            witness: Witness { start: StartPoint::Curve(v.0 as usize), path: vec![] },
            depth: 0,
            witness_a0: d.a0[v].clone(),
            certified: true,
        })
        .collect();
    let mut truncated = false;
    for (start, local) in germ.local_germs(&g, &d)? {
        if local_mld(&local, &start)?.value > mld {
            continue;
        }
        if depth_bound == 0 {
            truncated = true;
            continue;
        }
        let (w, t) = search_from(&local, start, &mld, depth_bound)?;
        witnesses.extend(w);
        truncated |= t;
    }
    witnesses.sort_by(MldResult::cmp_key);
    Ok(WitnessSet { mld, witnesses, truncated, depth_bound })
}

/// `N0` for the coefficient set of a germ, when its gamma exists.
pub fn default_depth_bound(coeffs: &[Q]) -> Option<u64> {
    let gamma = gamma_of_set(coeffs, 1).ok()?;
    constants_for(&gamma).ok().map(|c| c.n0)
}

/// `2^n` as a rational, for comparing witness `a0` against `2^N0`.
pub fn pow2(n: u64) -> Q {
    Q::from_integer(BigInt::one() << n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_of_set(&[q(1, 2)], 1).unwrap(), q(1, 2));
        assert_eq!(gamma_of_set(&[q(1, 2), q(1, 3)], 1).unwrap(), q(1, 6));
        assert_eq!(gamma_of_set(&[Q::one()], 1).unwrap(), Q::one());
        assert_eq!(gamma_of_set(&[], 1), Err(MldError::EmptyCoefficientSet));
    }

    #[test]
    fn constants_examples() {
        let c = constants_for(&q(1, 6)).unwrap();
        assert_eq!((c.n0, c.epsilon.clone(), c.delta.clone()), (1159, q(1, 288), q(1, 12)));
        assert_eq!(constants_for(&Q::one()).unwrap().n0, 34);
        assert_eq!(constants_for(&q(1, 2)).unwrap().n0, 131);
        assert_eq!(constants_for(&q(1, 4)).unwrap().n0, 517);
    }

    #[test]
    fn smooth_examples() {
        let r = mld_smooth(&SmoothGerm::default()).unwrap();
        assert_eq!((r.value.clone(), r.depth, r.witness_a0.clone()), (qi(2), 1, qi(2)));
        let r = mld_smooth(&SmoothGerm::with_coefficients(&[q(1, 2), q(1, 2)])).unwrap();
        assert_eq!((r.value.clone(), r.depth), (Q::one(), 1));
        let r = mld_smooth(&SmoothGerm::with_coefficients(&[q(1, 2), q(3, 4)]).contact(0, 1, 3)).unwrap();
        assert_eq!((r.value.clone(), r.depth, r.witness_a0.clone()), (q(1, 4), 3, qi(4)));
        assert!(r.certified);
    }

    #[test]
    fn not_lc_is_reported() {
        let g = SmoothGerm::with_coefficients(&[Q::one(), Q::one(), Q::one()]);
        assert!(matches!(mld_smooth(&g), Err(MldError::NotLc { .. })));
    }

    #[test]
    fn singular_a2() {
        let g = SingularGerm::new(vec![2, 2], vec![(0, 1)]).attach(q(1, 2), 0);
        let r = mld_singular(&g).unwrap();
        assert_eq!(r.result.value, q(2, 3));
        assert_eq!(r.result.depth, 0);
        assert_eq!(r.result.witness.start, StartPoint::Curve(0));
    }

    #[test]
    fn singular_rejections() {
        let g = SingularGerm::new(vec![2, 1], vec![(0, 1)]);
        assert_eq!(mld_singular(&g), Err(MldError::NotMinimalResolution(1)));
        let g = SingularGerm::new(vec![3, 3, 3], vec![(0, 1), (1, 2), (2, 0)]);
        assert!(matches!(mld_singular(&g), Err(MldError::NotATree(_))));
    }

    #[test]
    fn unique_witness_above_one() {
        let g = SmoothGerm::with_coefficients(&[q(1, 3), q(1, 3)]).contact(0, 1, 3);
        let w = witness_set_smooth(&g, 6).unwrap();
        assert_eq!(w.mld, q(4, 3));
        assert_eq!(w.witnesses.len(), 1);
        assert!(!w.truncated);
    }
}
