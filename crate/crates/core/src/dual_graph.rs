//! Weighted dual graphs of exceptional curves.
//!
//! A vertex is a smooth rational curve `E` labelled by `w = -E^2`; an edge of
//! multiplicity `m` records `E_i . E_j = m`. Vertex ids are opaque and stable:
//! contracting a curve never renumbers the survivors.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::Signed;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexId(pub u32);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex index {0} out of range")]
    UnknownVertex(usize),
    #[error("vertex {0} is not in the graph")]
    MissingVertex(VertexId),
    #[error("self-loop at vertex index {0}")]
    SelfLoop(usize),
    #[error("weight at vertex index {0} must be at least 1")]
    NonPositiveWeight(usize),
    #[error("{0} is not a (-1)-curve")]
    NotMinusOneCurve(VertexId),
    #[error("{0} meets some curve with multiplicity > 1")]
    MultiEdgeAtVertex(VertexId),
    #[error("contraction drives the weight of {vertex} to {weight}")]
    NegativityViolation { vertex: VertexId, weight: i64 },
}

#[derive(Debug, Clone, Default)]
pub struct DualGraph {
    weights: BTreeMap<VertexId, u32>,
    /// Keyed by `(min, max)`; values are multiplicities `>= 1`.
    edges: BTreeMap<(VertexId, VertexId), u32>,
    next_id: u32,
}

/// Equality ignores the id allocator: two graphs are equal when they have
/// the same vertices, weights and edges.
impl PartialEq for DualGraph {
    fn eq(&self, other: &Self) -> bool {
        self.weights == other.weights && self.edges == other.edges
    }
}
impl Eq for DualGraph {}

fn key(u: VertexId, v: VertexId) -> (VertexId, VertexId) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Builds a graph with `VertexId(i)` for the i-th weight. Repeated edges add
/// to the multiplicity.
pub fn build_graph(weights: &[u32], edges: &[(usize, usize)]) -> Result<DualGraph, GraphError> {
    let mut g = DualGraph::default();
    for (i, &w) in weights.iter().enumerate() {
        if w < 1 {
            return Err(GraphError::NonPositiveWeight(i));
        }
        g.add_vertex(w);
    }
    for &(i, j) in edges {
        let n = weights.len();
        if i >= n {
            return Err(GraphError::UnknownVertex(i));
        }
        if j >= n {
            return Err(GraphError::UnknownVertex(j));
        }
        if i == j {
            return Err(GraphError::SelfLoop(i));
        }
        g.add_edge(VertexId(i as u32), VertexId(j as u32));
    }
    Ok(g)
}

impl DualGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.weights.contains_key(&v)
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.weights.keys().copied()
    }

    pub fn weight(&self, v: VertexId) -> Option<u32> {
        self.weights.get(&v).copied()
    }

    pub fn multiplicity(&self, u: VertexId, v: VertexId) -> u32 {
        self.edges.get(&key(u, v)).copied().unwrap_or(0)
    }

    /// `(u, v, multiplicity)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId, u32)> + '_ {
        self.edges.iter().map(|(&(u, v), &m)| (u, v, m))
    }

    /// Number of edges counted with multiplicity.
    pub fn edge_count(&self) -> usize {
        self.edges.values().map(|&m| m as usize).sum()
    }

    pub fn neighbors(&self, v: VertexId) -> Vec<VertexId> {
        self.edges
            .keys()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Distinct neighbours.
    pub fn degree(&self, v: VertexId) -> usize {
        self.neighbors(v).len()
    }

    pub fn add_vertex(&mut self, weight: u32) -> VertexId {
        let id = VertexId(self.next_id);
        self.next_id += 1;
        self.weights.insert(id, weight);
        id
    }

    pub fn add_edge(&mut self, u: VertexId, v: VertexId) {
        assert!(u != v && self.contains(u) && self.contains(v));
        *self.edges.entry(key(u, v)).or_insert(0) += 1;
    }

    /// Drops one unit of multiplicity; returns false if there was no edge.
    pub fn remove_edge(&mut self, u: VertexId, v: VertexId) -> bool {
        let k = key(u, v);
        match self.edges.get_mut(&k) {
            Some(m) if *m > 1 => {
                *m -= 1;
                true
            }
            Some(_) => {
                self.edges.remove(&k);
                true
            }
            None => false,
        }
    }

    pub fn set_weight(&mut self, v: VertexId, w: u32) {
        assert!(w >= 1, "weights stay positive");
        *self.weights.get_mut(&v).expect("vertex present") = w;
    }

    pub fn remove_vertex(&mut self, v: VertexId) {
        self.weights.remove(&v);
        self.edges.retain(|&(a, b), _| a != v && b != v);
    }

    pub fn induced(&self, keep: &BTreeSet<VertexId>) -> DualGraph {
        DualGraph {
            weights: self
                .weights
                .iter()
                .filter(|(v, _)| keep.contains(v))
                .map(|(&v, &w)| (v, w))
                .collect(),
            edges: self
                .edges
                .iter()
                .filter(|((a, b), _)| keep.contains(a) && keep.contains(b))
                .map(|(&k, &m)| (k, m))
                .collect(),
            next_id: self.next_id,
        }
    }

    pub fn is_connected(&self) -> bool {
        let Some(start) = self.vertices().next() else {
            return true;
        };
        let mut seen = BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for u in self.neighbors(v) {
                if seen.insert(u) {
                    stack.push(u);
                }
            }
        }
        seen.len() == self.len()
    }

    pub fn intersection_matrix(&self) -> IntersectionMatrix {
        let order: Vec<VertexId> = self.vertices().collect();
        let entries = order
            .iter()
            .map(|&u| {
                order
                    .iter()
                    .map(|&v| {
                        if u == v {
                            -i64::from(self.weights[&u])
                        } else {
                            i64::from(self.multiplicity(u, v))
                        }
                    })
                    .collect()
            })
            .collect();
        IntersectionMatrix { order, entries }
    }

    /// True iff every leading principal minor of `-M` is positive.
    pub fn is_negative_definite(&self) -> bool {
        let neg = linalg::negate(&self.intersection_matrix().to_bigint());
        let minors = linalg::leading_minors(&neg);
        minors.len() == self.len() && linalg::all_positive(&minors)
    }

    /// `|det M|`; the empty graph gives 1.
    pub fn determinant_abs(&self) -> BigInt {
        linalg::determinant(&self.intersection_matrix().to_bigint()).abs()
    }

    pub fn forks(&self) -> Vec<VertexId> {
        self.vertices().filter(|&v| self.degree(v) >= 3).collect()
    }

    pub fn classify(&self) -> Shape {
        if self.edges.values().any(|&m| m > 1) {
            return Shape::MultiEdge;
        }
        if !self.is_connected() {
            return Shape::Disconnected;
        }
        if !self.is_empty() && self.edges.len() != self.len() - 1 {
            return Shape::ContainsCycle;
        }
        let forks = self.forks();
        if forks.is_empty() {
            Shape::Chain
        } else {
            Shape::TreeWithForks(forks)
        }
    }

    /// Contracts the (-1)-curve `v`. Each neighbour loses one unit of weight
    /// and every pair of former neighbours gains a mutual edge.
    pub fn contract_minus_one(&self, v: VertexId) -> Result<Contraction, GraphError> {
        match self.weight(v) {
            None => return Err(GraphError::MissingVertex(v)),
            Some(1) => {}
            Some(_) => return Err(GraphError::NotMinusOneCurve(v)),
        }
        let nbrs = self.neighbors(v);
        if nbrs.iter().any(|&u| self.multiplicity(u, v) > 1) {
            return Err(GraphError::MultiEdgeAtVertex(v));
        }
        let mut g = self.clone();
        g.remove_vertex(v);
        for &u in &nbrs {
            let w = i64::from(self.weights[&u]) - 1;
            if w < 1 {
                return Err(GraphError::NegativityViolation { vertex: u, weight: w });
            }
            g.set_weight(u, w as u32);
        }
        let mut flags = Vec::new();
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                if g.multiplicity(a, b) > 0 {
                    flags.push(ContractionFlag::MultiEdgeCreated(a, b));
                }
                g.add_edge(a, b);
                if g.weights[&a] == 1 && g.weights[&b] == 1 {
                    flags.push(ContractionFlag::AdjacentMinusOneCurves(a, b));
                }
            }
        }
        if nbrs.len() >= 3 {
            flags.push(ContractionFlag::CycleCreated);
        }
        Ok(Contraction { graph: g, flags })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntersectionMatrix {
    /// Row/column `i` belongs to `order[i]`.
    pub order: Vec<VertexId>,
    pub entries: Vec<Vec<i64>>,
}

impl IntersectionMatrix {
    pub fn to_bigint(&self) -> linalg::IntMatrix {
        self.entries
            .iter()
            .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
            .collect()
    }

    pub fn index_of(&self, v: VertexId) -> Option<usize> {
        self.order.iter().position(|&u| u == v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Chain,
    TreeWithForks(Vec<VertexId>),
    ContainsCycle,
    MultiEdge,
    Disconnected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContractionFlag {
    /// Two weight-1 curves now meet; the result is not relatively minimal.
    AdjacentMinusOneCurves(VertexId, VertexId),
    /// Two former neighbours already met, so their multiplicity grew.
    MultiEdgeCreated(VertexId, VertexId),
    /// Three or more former neighbours now pairwise meet.
    CycleCreated,
}

#[derive(Debug, Clone)]
pub struct Contraction {
    pub graph: DualGraph,
    pub flags: Vec<ContractionFlag>,
}

/// The A_n chain of n (-2)-curves.
pub fn chain(weights: &[u32]) -> DualGraph {
    let edges: Vec<_> = (1..weights.len()).map(|i| (i - 1, i)).collect();
    build_graph(weights, &edges).expect("chain weights are positive")
}

/// The D_n graph: a chain of `n - 2` (-2)-curves whose last vertex carries two
/// extra (-2)-leaves. Requires `n >= 4`.
pub fn d_graph(n: usize) -> DualGraph {
    assert!(n >= 4, "D_n needs n >= 4");
    let weights = vec![2; n];
    let mut edges: Vec<_> = (1..n - 2).map(|i| (i - 1, i)).collect();
    edges.push((n - 3, n - 2));
    edges.push((n - 3, n - 1));
    build_graph(&weights, &edges).expect("valid D_n")
}
