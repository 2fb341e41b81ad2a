//! Smooth surface germs with a boundary of smooth branches, and towers of
//! point blow-ups over them.
//!
//! Branches meet each other and every curve transversally. `c(i, j)` counts
//! the infinitely near points two branches share, so `1` means they only meet
//! at the origin. Ambient curves are pre-existing curves through the origin,
//! carried with coefficient `1 - a`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::discrepancy::{BoundaryIncidence, DiscrepancyError};
use crate::dual_graph::{DualGraph, Shape, VertexId};
use crate::rational::{qi, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct BranchId(pub u32);

impl fmt::Display for BranchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    pub id: BranchId,
    pub coefficient: Q,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GermError {
    #[error("branch {0} has coefficient outside (0, 1]")]
    CoefficientOutOfRange(BranchId),
    #[error("contact between {0} and {1} must be at least 1")]
    ZeroContact(BranchId, BranchId),
    #[error("contacts of {0}, {1}, {2} are not ultrametric")]
    NonUltrametric(BranchId, BranchId, BranchId),
    #[error("unknown branch {0}")]
    UnknownBranch(BranchId),
    #[error("branch {0} listed twice")]
    DuplicateBranch(BranchId),
    #[error("{0} ambient curves through the origin; at most 2 keep the boundary snc")]
    TooManyAmbientCurves(usize),
    #[error("ambient curve {0} is invalid")]
    InvalidAmbient(String),
    #[error("invalid center: {0}")]
    InvalidCenter(String),
    #[error("{0} and {1} no longer meet")]
    StaleState(VertexId, VertexId),
    #[error("tower counters need n3 >= 2, got {0}")]
    TooShallow(usize),
    #[error("state is not a tower over a bare origin")]
    NotATower,
    #[error("tower graph is not a chain")]
    NotAChain,
    #[error(transparent)]
    Discrepancy(#[from] DiscrepancyError),
}

/// Symmetric contact table; pairs not listed have contact 1.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ContactTable {
    map: BTreeMap<(BranchId, BranchId), u32>,
}

fn pair(i: BranchId, j: BranchId) -> (BranchId, BranchId) {
    if i <= j {
        (i, j)
    } else {
        (j, i)
    }
}

impl ContactTable {
    pub fn get(&self, i: BranchId, j: BranchId) -> u32 {
        self.map.get(&pair(i, j)).copied().unwrap_or(1)
    }

    pub fn set(&mut self, i: BranchId, j: BranchId, c: u32) {
        self.map.insert(pair(i, j), c);
    }

    /// Explicit entries `(i, j, c)` with `i < j`.
    pub fn entries(&self) -> impl Iterator<Item = (BranchId, BranchId, u32)> + '_ {
        self.map.iter().map(|(&(i, j), &c)| (i, j, c))
    }
}

/// A curve through the origin that is not created by the tower.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmbientCurve {
    pub name: String,
    /// Boundary coefficient `1 - a`; may be negative for curves with `a > 1`.
    pub coefficient: Q,
    pub a0: Q,
    pub weight: u32,
}

impl AmbientCurve {
    /// A plain boundary component of the smooth germ.
    pub fn boundary(name: impl Into<String>, coefficient: Q) -> Self {
        Self { name: name.into(), coefficient, a0: Q::one(), weight: 1 }
    }

    pub fn a(&self) -> Q {
        Q::one() - &self.coefficient
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SmoothGerm {
    pub branches: Vec<Branch>,
    pub contacts: ContactTable,
    pub ambient: Vec<AmbientCurve>,
}

impl SmoothGerm {
    /// Branches `0..n` with the given coefficients, pairwise transverse.
    pub fn with_coefficients(coeffs: &[Q]) -> Self {
        let branches = coeffs
            .iter()
            .enumerate()
            .map(|(i, b)| Branch { id: BranchId(i as u32), coefficient: b.clone() })
            .collect();
        Self { branches, ..Self::default() }
    }

    pub fn contact(mut self, i: u32, j: u32, c: u32) -> Self {
        self.contacts.set(BranchId(i), BranchId(j), c);
        self
    }

    pub fn coefficient(&self, id: BranchId) -> Option<&Q> {
        self.branches.iter().find(|b| b.id == id).map(|b| &b.coefficient)
    }

    /// `mult_x B`: branch coefficients plus ambient coefficients.
    pub fn origin_multiplicity(&self) -> Q {
        let br: Q = self.branches.iter().map(|b| b.coefficient.clone()).sum();
        let amb: Q = self.ambient.iter().map(|c| c.coefficient.clone()).sum();
        br + amb
    }

    pub fn validate_boundary(&self) -> Result<(), GermError> {
        let mut seen = BTreeSet::new();
        for b in &self.branches {
            if !seen.insert(b.id) {
                return Err(GermError::DuplicateBranch(b.id));
            }
            if !b.coefficient.is_positive() || b.coefficient > Q::one() {
                return Err(GermError::CoefficientOutOfRange(b.id));
            }
        }
        for (i, j, c) in self.contacts.entries() {
            for x in [i, j] {
                if !seen.contains(&x) {
                    return Err(GermError::UnknownBranch(x));
                }
            }
            if c == 0 {
                return Err(GermError::ZeroContact(i, j));
            }
        }
        let ids: Vec<BranchId> = seen.into_iter().collect();
        for (x, &i) in ids.iter().enumerate() {
            for (y, &j) in ids.iter().enumerate().skip(x + 1) {
                for &k in ids.iter().skip(y + 1) {
                    let (cij, cjk, cik) = (self.contacts.get(i, j), self.contacts.get(j, k), self.contacts.get(i, k));
                    let mut v = [cij, cjk, cik];
                    v.sort_unstable();
                    if v[0] != v[1] {
                        return Err(GermError::NonUltrametric(i, j, k));
                    }
                }
            }
        }
        if self.ambient.len() > 2 {
            return Err(GermError::TooManyAmbientCurves(self.ambient.len()));
        }
        for c in &self.ambient {
            if c.weight < 1 || c.coefficient > Q::one() {
                return Err(GermError::InvalidAmbient(c.name.clone()));
            }
        }
        Ok(())
    }
}

/// A point to blow up.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Center {
    /// The origin itself; only valid before the first blow-up.
    Origin,
    /// The intersection point of two curves.
    Node(VertexId, VertexId),
    /// The point of a curve where the listed branches (one contact class) pass.
    Branches(VertexId, Vec<BranchId>),
    /// A general point of a curve, off every node and branch.
    Free(VertexId),
}

/// The partner curve at a node, named independently of vertex ids.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum NodePartner {
    /// The curve created at this 1-based depth along the same path.
    Tower(usize),
    Ambient(String),
}

/// One step of a divisor's path from the origin: where its center sits on the
/// previous curve.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum PathStep {
    Origin,
    Node(NodePartner),
    Branches(Vec<BranchId>),
    Free,
}

impl fmt::Display for PathStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathStep::Origin => write!(f, "O"),
            PathStep::Free => write!(f, "f"),
            PathStep::Node(NodePartner::Tower(d)) => write!(f, "n{d}"),
            PathStep::Node(NodePartner::Ambient(name)) => write!(f, "n[{name}]"),
            PathStep::Branches(ids) => {
                let ids: Vec<String> = ids.iter().map(ToString::to_string).collect();
                write!(f, "b{{{}}}", ids.join(","))
            }
        }
    }
}

pub fn path_string(path: &[PathStep]) -> String {
    path.iter().map(ToString::to_string).collect::<Vec<_>>().join("/")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CurveKind {
    /// Created by the `index`-th blow-up (1-based).
    Tower { index: usize },
    Ambient { name: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveRecord {
    pub kind: CurveKind,
    pub a: Q,
    pub a0: Q,
    /// Length of the divisor's path; 0 for ambient curves.
    pub depth: usize,
    pub path: Vec<PathStep>,
}

impl CurveRecord {
    pub fn is_tower(&self) -> bool {
        matches!(self.kind, CurveKind::Tower { .. })
    }

    fn index(&self) -> usize {
        match self.kind {
            CurveKind::Tower { index } => index,
            CurveKind::Ambient { .. } => 0,
        }
    }
}

/// Counters maintained step by step while the tower stays a chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainCounters {
    pub n1: usize,
    pub n2: usize,
    pub w1: u64,
    pub w2: u64,
    neg: Option<VertexId>,
    pos: Option<VertexId>,
}

#[derive(Debug, Clone)]
pub struct TowerState {
    germ: SmoothGerm,
    graph: DualGraph,
    curves: BTreeMap<VertexId, CurveRecord>,
    /// `None` while the branch still passes through the origin.
    tips: BTreeMap<BranchId, Option<VertexId>>,
    consumed: BTreeMap<(BranchId, BranchId), u32>,
    tower: Vec<VertexId>,
    centers: Vec<Center>,
    free_prefix: usize,
    prefix_open: bool,
    is_tower: bool,
    counters: Option<ChainCounters>,
}

impl TowerState {
    /// Depth-0 state: only ambient curves, all branches at the origin.
    pub fn new(germ: &SmoothGerm) -> Result<Self, GermError> {
        germ.validate_boundary()?;
        let mut graph = DualGraph::new();
        let mut curves = BTreeMap::new();
        let mut amb = Vec::new();
        for c in &germ.ambient {
            let v = graph.add_vertex(c.weight);
            amb.push(v);
            curves.insert(
                v,
                CurveRecord {
                    kind: CurveKind::Ambient { name: c.name.clone() },
                    a: c.a(),
                    a0: c.a0.clone(),
                    depth: 0,
                    path: vec![],
                },
            );
        }
        if let [u, v] = amb[..] {
            graph.add_edge(u, v);
        }
        Ok(Self {
            tips: germ.branches.iter().map(|b| (b.id, None)).collect(),
            germ: germ.clone(),
            graph,
            curves,
            consumed: BTreeMap::new(),
            tower: vec![],
            centers: vec![],
            free_prefix: 0,
            prefix_open: true,
            is_tower: true,
            counters: None,
        })
    }

    pub fn germ(&self) -> &SmoothGerm {
        &self.germ
    }

    pub fn graph(&self) -> &DualGraph {
        &self.graph
    }

    pub fn curve(&self, v: VertexId) -> Option<&CurveRecord> {
        self.curves.get(&v)
    }

    pub fn curves(&self) -> impl Iterator<Item = (VertexId, &CurveRecord)> {
        self.curves.iter().map(|(&v, r)| (v, r))
    }

    /// Tower curves in creation order.
    pub fn tower_curves(&self) -> &[VertexId] {
        &self.tower
    }

    pub fn newest(&self) -> Option<VertexId> {
        self.tower.last().copied()
    }

    pub fn depth(&self) -> usize {
        self.tower.len()
    }

    pub fn centers(&self) -> &[Center] {
        &self.centers
    }

    /// True while every center lay on the newest curve.
    pub fn is_tower(&self) -> bool {
        self.is_tower
    }

    /// Length of the leading run of centers lying on at most one curve,
    /// capped by the depth.
    pub fn n3(&self) -> usize {
        self.free_prefix.min(self.depth())
    }

    pub fn counters(&self) -> Option<ChainCounters> {
        self.counters
    }

    pub fn a(&self, v: VertexId) -> &Q {
        &self.curves[&v].a
    }

    pub fn tip(&self, b: BranchId) -> Option<VertexId> {
        self.tips.get(&b).copied().flatten()
    }

    pub fn consumed(&self, i: BranchId, j: BranchId) -> u32 {
        self.consumed.get(&pair(i, j)).copied().unwrap_or(0)
    }

    pub fn remaining_contact(&self, i: BranchId, j: BranchId) -> u32 {
        self.germ.contacts.get(i, j).saturating_sub(self.consumed(i, j))
    }

    fn coefficient(&self, b: BranchId) -> &Q {
        self.germ.coefficient(b).expect("known branch")
    }

    /// Branches through each distinct point of `u`, grouped and sorted.
    pub fn branch_classes(&self, u: VertexId) -> Vec<Vec<BranchId>> {
        let here: Vec<BranchId> = self.tips.iter().filter(|(_, t)| **t == Some(u)).map(|(&b, _)| b).collect();
        self.group(&here)
    }

    fn group(&self, here: &[BranchId]) -> Vec<Vec<BranchId>> {
        let mut classes: Vec<Vec<BranchId>> = Vec::new();
        for &b in here {
            match classes.iter_mut().find(|c| self.remaining_contact(c[0], b) > 0) {
                Some(c) => c.push(b),
                None => classes.push(vec![b]),
            }
        }
        classes
    }

    fn is_ambient(&self, v: VertexId) -> bool {
        self.curves.get(&v).is_some_and(|r| !r.is_tower())
    }

    /// Curves and branches through `c`, after validating it against this state.
    fn resolve_center(&self, c: &Center) -> Result<(Vec<VertexId>, Vec<BranchId>), GermError> {
        let tower_curve = |u: VertexId| -> Result<(), GermError> {
            match self.curves.get(&u) {
                Some(r) if r.is_tower() => Ok(()),
                Some(_) => Err(GermError::InvalidCenter(format!("{u} is an ambient curve"))),
                None => Err(GermError::InvalidCenter(format!("{u} does not exist"))),
            }
        };
        match c {
            Center::Origin => {
                if !self.tower.is_empty() {
                    return Err(GermError::InvalidCenter("origin was already blown up".into()));
                }
                let through = self.curves.keys().copied().collect();
                Ok((through, self.tips.keys().copied().collect()))
            }
            Center::Node(u, v) => {
                for x in [u, v] {
                    if !self.curves.contains_key(x) {
                        return Err(GermError::InvalidCenter(format!("{x} does not exist")));
                    }
                }
                if self.is_ambient(*u) && self.is_ambient(*v) {
                    return Err(GermError::InvalidCenter("node of two ambient curves is the origin".into()));
                }
                if self.graph.multiplicity(*u, *v) == 0 {
                    return Err(GermError::StaleState(*u, *v));
                }
                Ok((vec![*u, *v], vec![]))
            }
            Center::Branches(u, set) => {
                tower_curve(*u)?;
                let mut want = set.clone();
                want.sort_unstable();
                if !self.branch_classes(*u).contains(&want) {
                    return Err(GermError::InvalidCenter(format!("no branch point {want:?} on {u}")));
                }
                Ok((vec![*u], want))
            }
            Center::Free(u) => {
                tower_curve(*u)?;
                Ok((vec![*u], vec![]))
            }
        }
    }

    /// `(a, a0)` of the curve that blowing up `c` would create.
    pub fn one_step(&self, c: &Center) -> Result<(Q, Q), GermError> {
        let (through, br) = self.resolve_center(c)?;
        Ok(self.new_values(&through, &br))
    }

    fn new_values(&self, through: &[VertexId], br: &[BranchId]) -> (Q, Q) {
        let two = qi(2);
        let mut a = two.clone();
        let mut a0 = two;
        for t in through {
            let r = &self.curves[t];
            a -= Q::one() - &r.a;
            a0 -= Q::one() - &r.a0;
        }
        for b in br {
            a -= self.coefficient(*b);
        }
        (a, a0)
    }

    pub fn blow_up(&self, c: &Center) -> Result<TowerState, GermError> {
        let mut s = self.clone();
        s.blow_up_in_place(c)?;
        Ok(s)
    }

    pub fn blow_up_in_place(&mut self, c: &Center) -> Result<VertexId, GermError> {
        let (through, br) = self.resolve_center(c)?;
        let (a, a0) = self.new_values(&through, &br);
        let old_newest = self.newest();

        let f = self.graph.add_vertex(1);
        for &t in &through {
            let w = self.graph.weight(t).expect("curve");
            self.graph.set_weight(t, w + 1);
            self.graph.add_edge(t, f);
        }
        if let [u, v] = through[..] {
            self.graph.remove_edge(u, v);
        }
        for (x, &i) in br.iter().enumerate() {
            self.tips.insert(i, Some(f));
            for &j in &br[x + 1..] {
                *self.consumed.entry(pair(i, j)).or_insert(0) += 1;
            }
        }

        let parent = through
            .iter()
            .filter(|t| self.curves[t].is_tower())
            .max_by_key(|t| self.curves[t].index())
            .copied();
        let (depth, path) = match parent {
            None => (1, vec![PathStep::Origin]),
            Some(p) => {
                let pr = &self.curves[&p];
                let step = match c {
                    Center::Node(..) => {
                        let q = *through.iter().find(|&&t| t != p).expect("two curves at a node");
                        let qr = &self.curves[&q];
                        match &qr.kind {
                            CurveKind::Ambient { name } => PathStep::Node(NodePartner::Ambient(name.clone())),
                            CurveKind::Tower { .. } => PathStep::Node(NodePartner::Tower(qr.depth)),
                        }
                    }
                    Center::Branches(..) => PathStep::Branches(br.clone()),
                    _ => PathStep::Free,
                };
                let mut path = pr.path.clone();
                path.push(step);
                (pr.depth + 1, path)
            }
        };
        let index = self.tower.len() + 1;
        self.curves.insert(f, CurveRecord { kind: CurveKind::Tower { index }, a, a0, depth, path });

        let free = through.len() <= 1;
        if self.prefix_open {
            if free {
                self.free_prefix += 1;
            } else {
                self.prefix_open = false;
            }
        }
        let on_newest = match old_newest {
            None => true,
            Some(n) => through.contains(&n),
        };
        self.is_tower &= on_newest;
        self.counters = if self.is_tower && self.germ.ambient.is_empty() {
            match (old_newest, self.counters) {
                (None, _) => Some(ChainCounters { n1: 0, n2: 0, w1: 0, w2: 0, neg: None, pos: None }),
                (Some(e0), Some(k)) => step_counters(k, e0, &through),
                _ => None,
            }
        } else {
            None
        };

        self.tower.push(f);
        self.centers.push(c.clone());
        Ok(f)
    }

    /// Canonical centers on the newest curve: its nodes, its branch points and
    /// one representative general point. Before any blow-up, just the origin.
    pub fn canonical_centers(&self) -> Vec<Center> {
        let Some(e) = self.newest() else {
            return vec![Center::Origin];
        };
        let mut out: Vec<Center> = self.graph.neighbors(e).into_iter().map(|v| Center::Node(e, v)).collect();
        out.extend(self.branch_classes(e).into_iter().map(|c| Center::Branches(e, c)));
        out.push(Center::Free(e));
        out
    }

    /// Every center worth testing on every tower curve.
    pub fn all_centers(&self) -> Vec<Center> {
        let mut out = Vec::new();
        for &u in &self.tower {
            for v in self.graph.neighbors(u) {
                if !self.curves[&v].is_tower() || u < v {
                    out.push(Center::Node(u, v));
                }
            }
            out.extend(self.branch_classes(u).into_iter().map(|c| Center::Branches(u, c)));
            out.push(Center::Free(u));
        }
        out
    }

    /// The germ seen at `c`: the curves through it become ambient curves and
    /// the branches through it keep their unconsumed contact.
    pub fn local_germ(&self, c: &Center) -> Result<SmoothGerm, GermError> {
        let (through, br) = self.resolve_center(c)?;
        if matches!(c, Center::Origin) {
            return Ok(self.germ.clone());
        }
        let ambient = through
            .iter()
            .map(|t| {
                let r = &self.curves[t];
                AmbientCurve {
                    name: t.0.to_string(),
                    coefficient: Q::one() - &r.a,
                    a0: r.a0.clone(),
                    weight: self.graph.weight(*t).expect("curve"),
                }
            })
            .collect();
        let branches = br
            .iter()
            .map(|&b| Branch { id: b, coefficient: self.coefficient(b).clone() })
            .collect();
        let mut contacts = ContactTable::default();
        for (x, &i) in br.iter().enumerate() {
            for &j in &br[x + 1..] {
                contacts.set(i, j, self.remaining_contact(i, j));
            }
        }
        Ok(SmoothGerm { branches, contacts, ambient })
    }

    /// Recomputes `a` on the tower curves from the linear system, treating
    /// branch tips and ambient curves as boundary.
    pub fn rederive(&self) -> Result<BTreeMap<VertexId, Q>, GermError> {
        let keep: BTreeSet<VertexId> = self.tower.iter().copied().collect();
        let sub = self.graph.induced(&keep);
        let mut beta: BTreeMap<VertexId, Q> = BTreeMap::new();
        for (b, t) in &self.tips {
            if let Some(v) = t {
                *beta.entry(*v).or_insert_with(Q::zero) += self.coefficient(*b);
            }
        }
        let mut extra: BTreeMap<VertexId, Q> = BTreeMap::new();
        for (v, r) in &self.curves {
            if r.is_tower() {
                continue;
            }
            for u in self.graph.neighbors(*v) {
                let m = Q::from_integer(BigInt::from(self.graph.multiplicity(u, *v)));
                *extra.entry(u).or_insert_with(Q::zero) += (Q::one() - &r.a) * m;
            }
        }
        // Ambient coefficients may be negative, which the incidence type
        // rejects, so fold them into the weights' right-hand side directly.
        let inc = BoundaryIncidence::new(beta, self.germ.branches.iter().map(|b| b.coefficient.clone()).collect())?;
        let im = sub.intersection_matrix();
        let rhs: Vec<Q> = im
            .order
            .iter()
            .map(|&v| {
                qi(i64::from(sub.weight(v).expect("vertex")) - 2)
                    + inc.beta(v)
                    + extra.get(&v).cloned().unwrap_or_else(Q::zero)
            })
            .collect();
        if !sub.is_negative_definite() {
            return Err(DiscrepancyError::NotNegativeDefinite.into());
        }
        let (x, _) = crate::linalg::solve(&im.to_bigint(), &rhs).ok_or(DiscrepancyError::NotNegativeDefinite)?;
        Ok(im.order.into_iter().zip(x).map(|(v, xi)| (v, xi + Q::one())).collect())
    }
}

fn step_counters(k: ChainCounters, e0: VertexId, through: &[VertexId]) -> Option<ChainCounters> {
    match through {
        [t] if *t == e0 => {
            // A new leaf beyond E0 keeps a chain only if E0 was an end.
            if k.neg.is_some() {
                return None;
            }
            Some(ChainCounters { n1: 0, w1: 0, n2: k.n2 + 1, w2: k.w2 + 2, neg: None, pos: Some(e0) })
        }
        [u, v] if *u == e0 || *v == e0 => {
            let other = if *u == e0 { *v } else { *u };
            if Some(other) == k.pos {
                Some(ChainCounters { n1: k.n1 + 1, w1: k.w1 + 2, w2: k.w2 + 1, neg: Some(e0), pos: Some(other), ..k })
            } else if Some(other) == k.neg {
                Some(ChainCounters { n2: k.n2 + 1, w2: k.w2 + 2, w1: k.w1 + 1, neg: Some(other), pos: Some(e0), ..k })
            } else {
                None
            }
        }
        _ => None,
    }
}

/// Blows up until every pair of branches has used up its contact. The origin
/// is always blown up, so the result has at least one curve.
pub fn resolve_branches(germ: &SmoothGerm) -> Result<TowerState, GermError> {
    let mut s = TowerState::new(germ)?;
    s.blow_up_in_place(&Center::Origin)?;
    loop {
        let next = s.tower.iter().find_map(|&u| {
            s.branch_classes(u).into_iter().find(|c| c.len() >= 2).map(|c| Center::Branches(u, c))
        });
        match next {
            Some(c) => {
                s.blow_up_in_place(&c)?;
            }
            None => return Ok(s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TowerStats {
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    pub w1: u64,
    pub w2: u64,
    pub n: usize,
    /// `(W1 - n1) + n3 - 1 = W2 - n2`
    pub identity_holds: bool,
    /// `n <= n3 + min(W1, W2)`
    pub bound_holds: bool,
}

/// Counters of a chain tower read off its graph. E0 is the newest curve and
/// the positive side is the one ending at the first curve.
pub fn tower_stats(s: &TowerState) -> Result<TowerStats, GermError> {
    if !s.is_tower() || !s.germ.ambient.is_empty() {
        return Err(GermError::NotATower);
    }
    let n3 = s.n3();
    if n3 < 2 {
        return Err(GermError::TooShallow(n3));
    }
    if s.graph.classify() != Shape::Chain {
        return Err(GermError::NotAChain);
    }
    let e0 = s.newest().expect("depth >= 2");
    let f1 = s.tower[0];
    let walk = |start: VertexId| {
        let mut side = vec![start];
        let mut prev = e0;
        let mut cur = start;
        loop {
            let next = s.graph.neighbors(cur).into_iter().find(|&x| x != prev);
            match next {
                Some(x) => {
                    side.push(x);
                    prev = cur;
                    cur = x;
                }
                None => return side,
            }
        }
    };
    let sides: Vec<Vec<VertexId>> = s.graph.neighbors(e0).into_iter().map(walk).collect();
    let (pos, neg): (Vec<_>, Vec<_>) = sides.into_iter().partition(|side| side.last() == Some(&f1));
    let pos = pos.into_iter().next().ok_or(GermError::NotAChain)?;
    let neg = neg.into_iter().next().unwrap_or_default();
    let sum = |side: &[VertexId]| side.iter().map(|&v| u64::from(s.graph.weight(v).expect("v"))).sum::<u64>();
    let (n1, n2, w1, w2) = (neg.len(), pos.len(), sum(&neg), sum(&pos));
    let n = n1 + n2 + 1;
    let lhs = w1 as i128 - n1 as i128 + n3 as i128 - 1;
    let rhs = w2 as i128 - n2 as i128;
    Ok(TowerStats {
        n1,
        n2,
        n3,
        w1,
        w2,
        n,
        identity_holds: lhs == rhs,
        bound_holds: (n as u64) <= n3 as u64 + w1.min(w2),
    })
}

/// `Fib(1) = Fib(2) = 1`.
pub fn fib(n: usize) -> BigInt {
    let (mut x, mut y) = (BigInt::zero(), BigInt::one());
    for _ in 0..n {
        let z = &x + &y;
        x = y;
        y = z;
    }
    x
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FibRow {
    pub index: usize,
    #[serde(with = "crate::rational::serde_q")]
    pub a0: Q,
    #[serde(with = "crate::rational::serde_int")]
    pub fib_bound: BigInt,
    #[serde(with = "crate::rational::serde_int")]
    pub sharp_bound: BigInt,
    #[serde(with = "crate::rational::serde_int")]
    pub pow2_bound: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FibReport {
    pub rows: Vec<FibRow>,
    /// `a0(F_i) <= Fib(i + 1) + 1` on every curve.
    pub within_fib_bound: bool,
    /// `a0(F_i) <= Fib(i + 2)`, which the all-satellite tower attains.
    pub within_sharp_bound: bool,
    /// `a0(F_i) <= 2^i`.
    pub within_pow2_bound: bool,
}

/// Compares `a0` of each tower curve with the Fibonacci and power-of-two
/// bounds, indexing curves by their depth.
pub fn a0_fib_check(s: &TowerState) -> FibReport {
    let rows: Vec<FibRow> = s
        .tower
        .iter()
        .map(|v| {
            let r = &s.curves[v];
            let i = r.depth;
            FibRow {
                index: i,
                a0: r.a0.clone(),
                fib_bound: fib(i + 1) + 1,
                sharp_bound: fib(i + 2),
                pow2_bound: BigInt::one() << i,
            }
        })
        .collect();
    let within = |f: fn(&FibRow) -> &BigInt| rows.iter().all(|r| r.a0 <= Q::from_integer(f(r).clone()));
    FibReport {
        within_fib_bound: within(|r| &r.fib_bound),
        within_sharp_bound: within(|r| &r.sharp_bound),
        within_pow2_bound: within(|r| &r.pow2_bound),
        rows,
    }
}

/// Tower where every center after the second is the node of the two newest
/// curves.
pub fn all_satellite_tower(depth: usize) -> TowerState {
    let mut s = TowerState::new(&SmoothGerm::default()).expect("empty germ");
    for i in 0..depth {
        let c = match i {
            0 => Center::Origin,
            1 => Center::Free(s.tower[0]),
            _ => Center::Node(s.tower[i - 1], s.tower[i - 2]),
        };
        s.blow_up_in_place(&c).expect("valid satellite center");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn first_blow_up_and_free_chain() {
        let mut s = TowerState::new(&SmoothGerm::default()).unwrap();
        let f1 = s.blow_up_in_place(&Center::Origin).unwrap();
        assert_eq!(s.a(f1), &qi(2));
        let f2 = s.blow_up_in_place(&Center::Free(f1)).unwrap();
        let f3 = s.blow_up_in_place(&Center::Free(f2)).unwrap();
        assert_eq!(s.curve(f3).unwrap().a0, qi(4));
        let st = tower_stats(&s).unwrap();
        assert_eq!((st.n1, st.n2, st.n3, st.w1, st.w2), (0, 2, 3, 0, 4));
        let s2 = s.blow_up(&Center::Node(f3, f2)).unwrap();
        let st = tower_stats(&s2).unwrap();
        assert_eq!((st.n1, st.n2, st.n3, st.w1, st.w2), (1, 2, 3, 2, 5));
        assert!(st.identity_holds && st.bound_holds);
    }

    #[test]
    fn shallow_towers_are_refused() {
        let s = TowerState::new(&SmoothGerm::default()).unwrap().blow_up(&Center::Origin).unwrap();
        assert_eq!(tower_stats(&s), Err(GermError::TooShallow(1)));
    }

    #[test]
    fn contact_two_needs_two_shared_blow_ups() {
        let g = SmoothGerm::with_coefficients(&[q(1, 2), q(1, 2)]).contact(0, 1, 2);
        let s = resolve_branches(&g).unwrap();
        assert_eq!(s.depth(), 2);
        assert_eq!(s.consumed(BranchId(0), BranchId(1)), 2);
        let f2 = s.newest().unwrap();
        assert_eq!(s.branch_classes(f2).len(), 2);
    }

    #[test]
    fn satellite_a0_follows_fibonacci() {
        let s = all_satellite_tower(5);
        let a0: Vec<Q> = s.tower_curves().iter().map(|v| s.curve(*v).unwrap().a0.clone()).collect();
        assert_eq!(a0, [2, 3, 5, 8, 13].map(qi).to_vec());
        let r = a0_fib_check(&s);
        assert!(r.within_sharp_bound && r.within_pow2_bound);
        assert!(!r.within_fib_bound);
    }

    #[test]
    fn center_validation() {
        let s = TowerState::new(&SmoothGerm::default()).unwrap().blow_up(&Center::Origin).unwrap();
        let f1 = s.newest().unwrap();
        assert!(matches!(s.blow_up(&Center::Origin), Err(GermError::InvalidCenter(_))));
        let s2 = s.blow_up(&Center::Free(f1)).unwrap();
        let f2 = s2.newest().unwrap();
        let s3 = s2.blow_up(&Center::Node(f2, f1)).unwrap();
        assert_eq!(s3.blow_up(&Center::Node(f2, f1)).unwrap_err(), GermError::StaleState(f2, f1));
        assert!(matches!(s3.blow_up(&Center::Branches(f1, vec![BranchId(0)])), Err(GermError::InvalidCenter(_))));
    }

    #[test]
    fn boundary_validation() {
        let g = SmoothGerm::with_coefficients(&[q(1, 2), q(1, 2), q(1, 2)]).contact(0, 1, 3).contact(1, 2, 2);
        assert!(matches!(g.validate_boundary(), Err(GermError::NonUltrametric(..))));
        let g = SmoothGerm::with_coefficients(&[q(3, 2)]);
        assert_eq!(g.validate_boundary(), Err(GermError::CoefficientOutOfRange(BranchId(0))));
        let g = SmoothGerm::with_coefficients(&[q(1, 2), q(1, 2)]).contact(0, 1, 0);
        assert!(matches!(g.validate_boundary(), Err(GermError::ZeroContact(..))));
    }

    #[test]
    fn ambient_node_origin_is_satellite() {
        let g = SmoothGerm {
            ambient: vec![AmbientCurve::boundary("A", q(1, 2)), AmbientCurve::boundary("B", q(1, 3))],
            ..SmoothGerm::default()
        };
        let s = TowerState::new(&g).unwrap().blow_up(&Center::Origin).unwrap();
        let f = s.newest().unwrap();
        assert_eq!(s.a(f), &q(7, 6));
        assert_eq!(s.n3(), 0);
        assert_eq!(s.rederive().unwrap()[&f], q(7, 6));
    }
}
