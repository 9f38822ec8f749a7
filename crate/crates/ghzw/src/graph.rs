//! Immutable simple graphs and the measurement rewrite calculus.
//!
//! A graph state can be transformed by local Pauli measurements, and each
//! measurement has a purely combinatorial effect on the underlying graph:
//!
//! * `Z` at `v`: delete `v`.
//! * `Y` at `v`: locally complement at `v`, then delete `v`.
//! * `X` at `v`: pick a special neighbor `u`, then apply
//!   `LC_u . Z_v . LC_v . LC_u`.
//!
//! All operations are pure: they return a new graph and never mutate the
//! input. Vertex ids are stable across rewrites so that measurement plans can
//! keep referring to them.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub type VertexId = u32;

/// Errors raised by graph rewrites.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("vertex {0} is not in the graph")]
    UnknownVertex(VertexId),
    #[error("vertex {0} is isolated; X measurement needs a neighbor")]
    IsolatedX(VertexId),
    #[error("vertex {u} is not a neighbor of {v}")]
    NotANeighbor { v: VertexId, u: VertexId },
    #[error("merge precondition failed at {0}: {1}")]
    MergePrecondition(VertexId, String),
    #[error("plan step {index} failed: {source}")]
    PlanStep {
        index: usize,
        #[source]
        source: Box<GraphError>,
    },
    #[error("invalid graph data: {0}")]
    InvalidData(String),
}

/// Pauli measurement basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// One measurement in a plan. `special_neighbor` is required for `X` (it is
/// chosen automatically when omitted) and ignored otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewriteStep {
    pub basis: Pauli,
    pub target: VertexId,
    pub special_neighbor: Option<VertexId>,
}

impl RewriteStep {
    pub fn z(target: VertexId) -> Self {
        Self { basis: Pauli::Z, target, special_neighbor: None }
    }

    pub fn y(target: VertexId) -> Self {
        Self { basis: Pauli::Y, target, special_neighbor: None }
    }

    pub fn x(target: VertexId, special_neighbor: Option<VertexId>) -> Self {
        Self { basis: Pauli::X, target, special_neighbor }
    }
}

/// Undirected simple finite graph over small integer vertex ids.
///
/// Equality is exact on the (vertex set, edge set) pair, not isomorphism:
/// every rewrite in the calculus preserves vertex identity.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Graph {
    adj: BTreeMap<VertexId, BTreeSet<VertexId>>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Build from an explicit vertex list and edge list.
    pub fn from_parts(
        vertices: impl IntoIterator<Item = VertexId>,
        edges: impl IntoIterator<Item = (VertexId, VertexId)>,
    ) -> Result<Self, GraphError> {
        let mut g = Graph::new();
        for v in vertices {
            g.adj.entry(v).or_default();
        }
        for (a, b) in edges {
            if a == b {
                return Err(GraphError::InvalidData(format!("self-loop at {a}")));
            }
            if !g.adj.contains_key(&a) {
                return Err(GraphError::UnknownVertex(a));
            }
            if !g.adj.contains_key(&b) {
                return Err(GraphError::UnknownVertex(b));
            }
            g.adj.get_mut(&a).unwrap().insert(b);
            g.adj.get_mut(&b).unwrap().insert(a);
        }
        Ok(g)
    }

    /// Path graph 0-1-...-(n-1). Convenience for tests.
    pub fn path(n: u32) -> Self {
        Graph::from_parts(0..n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    /// Cycle graph on n >= 3 vertices.
    pub fn cycle(n: u32) -> Self {
        let mut edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        edges.push((n - 1, 0));
        Graph::from_parts(0..n, edges).unwrap()
    }

    /// Star with the given center and leaves.
    pub fn star(center: VertexId, leaves: impl IntoIterator<Item = VertexId>) -> Self {
        let leaves: Vec<_> = leaves.into_iter().collect();
        Graph::from_parts(
            std::iter::once(center).chain(leaves.iter().copied()),
            leaves.iter().map(|&l| (center, l)),
        )
        .unwrap()
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.adj.contains_key(&v)
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.adj.keys().copied()
    }

    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.adj.get(&v).into_iter().flatten().copied()
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj.get(&v).map_or(0, BTreeSet::len)
    }

    pub fn has_edge(&self, a: VertexId, b: VertexId) -> bool {
        self.adj.get(&a).is_some_and(|s| s.contains(&b))
    }

    /// Edges as (i, j) pairs with i < j, in sorted order.
    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::new();
        for (&v, nbrs) in &self.adj {
            for &w in nbrs.range(v + 1..) {
                out.push((v, w));
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.values().map(BTreeSet::len).sum::<usize>() / 2
    }

    fn require(&self, v: VertexId) -> Result<(), GraphError> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(GraphError::UnknownVertex(v))
        }
    }

    /// Local complementation at `v`: toggle every edge between two distinct
    /// neighbors of `v`.
    pub fn local_complement(&self, v: VertexId) -> Result<Graph, GraphError> {
        self.require(v)?;
        let mut out = self.clone();
        let nbrs: Vec<_> = self.neighbors(v).collect();
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                if out.has_edge(a, b) {
                    out.adj.get_mut(&a).unwrap().remove(&b);
                    out.adj.get_mut(&b).unwrap().remove(&a);
                } else {
                    out.adj.get_mut(&a).unwrap().insert(b);
                    out.adj.get_mut(&b).unwrap().insert(a);
                }
            }
        }
        Ok(out)
    }

    /// Remove `v` and every incident edge.
    pub fn delete_vertex(&self, v: VertexId) -> Result<Graph, GraphError> {
        self.require(v)?;
        let mut out = self.clone();
        let nbrs = out.adj.remove(&v).unwrap();
        for w in nbrs {
            out.adj.get_mut(&w).unwrap().remove(&v);
        }
        Ok(out)
    }

    /// Z measurement: plain vertex deletion.
    pub fn z_measure(&self, v: VertexId) -> Result<Graph, GraphError> {
        self.delete_vertex(v)
    }

    /// Y measurement: local complement at `v`, then delete `v`.
    pub fn y_measure(&self, v: VertexId) -> Result<Graph, GraphError> {
        self.local_complement(v)?.delete_vertex(v)
    }

    /// X measurement at `v` with special neighbor `u`:
    /// `LC_u . Z_v . LC_v . LC_u`. When `u` is `None` the minimum-id neighbor
    /// is used; the choice only changes the result by local Cliffords, so a
    /// deterministic default keeps plans reproducible. Returns the rewritten
    /// graph and the neighbor actually used.
    pub fn x_measure(
        &self,
        v: VertexId,
        u: Option<VertexId>,
    ) -> Result<(Graph, VertexId), GraphError> {
        self.require(v)?;
        let u = match u {
            Some(u) => {
                if !self.has_edge(v, u) {
                    return Err(GraphError::NotANeighbor { v, u });
                }
                u
            }
            None => self.neighbors(v).next().ok_or(GraphError::IsolatedX(v))?,
        };
        let g = self
            .local_complement(u)?
            .local_complement(v)?
            .delete_vertex(v)?
            .local_complement(u)?;
        Ok((g, u))
    }

    /// Closed form for an X measurement at a degree-2 cut vertex `u` joining
    /// two components `G1` (through `v1`) and `G2` (through `v2`): `u`
    /// disappears, `v1` gains edges to `v2` and to every `G2`-neighbor of
    /// `v2`, and `v2` loses its old `G2` edges. `v1` is the smaller-id
    /// neighbor; the same graph is produced by `x_measure(u, Some(v2))`.
    pub fn x_merge_closed_form(&self, u: VertexId) -> Result<Graph, GraphError> {
        self.require(u)?;
        let nbrs: Vec<_> = self.neighbors(u).collect();
        if nbrs.len() != 2 {
            return Err(GraphError::MergePrecondition(
                u,
                format!("degree is {}, expected 2", nbrs.len()),
            ));
        }
        let (v1, v2) = (nbrs[0], nbrs[1]);
        let without_u = self.delete_vertex(u)?;
        let comp1 = without_u.component_of(v1);
        if comp1.contains(&v2) {
            return Err(GraphError::MergePrecondition(
                u,
                format!("{v1} and {v2} stay connected after removing {u}"),
            ));
        }
        let n2: Vec<_> = without_u.neighbors(v2).collect();
        let mut out = without_u;
        out.adj.get_mut(&v1).unwrap().insert(v2);
        out.adj.get_mut(&v2).unwrap().insert(v1);
        for w in n2 {
            out.adj.get_mut(&v1).unwrap().insert(w);
            out.adj.get_mut(&w).unwrap().insert(v1);
            out.adj.get_mut(&v2).unwrap().remove(&w);
            out.adj.get_mut(&w).unwrap().remove(&v2);
        }
        Ok(out)
    }

    /// Apply a plan left to right. On error, reports the failing step index.
    /// Returns the final graph and the per-step trace (graph after each step,
    /// with the special neighbor actually chosen for X steps).
    pub fn apply_plan(&self, plan: &[RewriteStep]) -> Result<(Graph, Vec<RewriteStep>), GraphError> {
        let mut g = self.clone();
        let mut trace = Vec::with_capacity(plan.len());
        for (index, step) in plan.iter().enumerate() {
            let wrap = |source: GraphError| GraphError::PlanStep {
                index,
                source: Box::new(source),
            };
            match step.basis {
                Pauli::Z => {
                    g = g.z_measure(step.target).map_err(wrap)?;
                    trace.push(*step);
                }
                Pauli::Y => {
                    g = g.y_measure(step.target).map_err(wrap)?;
                    trace.push(*step);
                }
                Pauli::X => {
                    let (next, used) = g.x_measure(step.target, step.special_neighbor).map_err(wrap)?;
                    g = next;
                    trace.push(RewriteStep::x(step.target, Some(used)));
                }
            }
        }
        Ok((g, trace))
    }

    /// Center of the graph if it is a star. A single vertex is its own
    /// center; for a single edge the minimum id is returned.
    pub fn is_star(&self) -> Option<VertexId> {
        let n = self.len();
        if n == 0 {
            return None;
        }
        if n == 1 {
            return self.vertices().next();
        }
        if self.edge_count() != n - 1 {
            return None;
        }
        // n-1 edges and no vertex isolated => connected iff some vertex
        // touches every edge.
        let center = self.vertices().find(|&v| self.degree(v) == n - 1)?;
        if self
            .vertices()
            .all(|v| v == center || (self.degree(v) == 1 && self.has_edge(v, center)))
        {
            Some(center)
        } else {
            None
        }
    }

    /// Connected component containing `v`.
    pub fn component_of(&self, v: VertexId) -> BTreeSet<VertexId> {
        let mut seen = BTreeSet::new();
        if !self.contains(v) {
            return seen;
        }
        let mut queue = VecDeque::from([v]);
        seen.insert(v);
        while let Some(w) = queue.pop_front() {
            for x in self.neighbors(w) {
                if seen.insert(x) {
                    queue.push_back(x);
                }
            }
        }
        seen
    }

    pub fn is_connected(&self) -> bool {
        match self.vertices().next() {
            None => true,
            Some(v) => self.component_of(v).len() == self.len(),
        }
    }

    /// GF(2) rank of the bipartite adjacency submatrix between `part` and its
    /// complement. This is an invariant of local complementation and equals
    /// the entanglement rank of the corresponding graph state across the cut.
    pub fn cut_rank(&self, part: &BTreeSet<VertexId>) -> usize {
        let rest: Vec<_> = self.vertices().filter(|v| !part.contains(v)).collect();
        if rest.len() > 64 {
            // Chunked rows would be needed past 64 columns; every caller in
            // this crate stays far below that.
            panic!("cut_rank supports at most 64 complement vertices");
        }
        let mut rows: Vec<u64> = part
            .iter()
            .filter(|v| self.contains(**v))
            .map(|&v| {
                let mut row = 0u64;
                for (i, &w) in rest.iter().enumerate() {
                    if self.has_edge(v, w) {
                        row |= 1 << i;
                    }
                }
                row
            })
            .collect();
        let mut rank = 0;
        for col in 0..rest.len() {
            let bit = 1u64 << col;
            if let Some(pos) = (rank..rows.len()).find(|&r| rows[r] & bit != 0) {
                rows.swap(rank, pos);
                let pivot = rows[rank];
                for (r, row) in rows.iter_mut().enumerate() {
                    if r != rank && *row & bit != 0 {
                        *row ^= pivot;
                    }
                }
                rank += 1;
            }
        }
        rank
    }

    /// Induced subgraph on the given vertex set.
    pub fn induced(&self, keep: &BTreeSet<VertexId>) -> Graph {
        let mut out = Graph::new();
        for &v in keep {
            if self.contains(v) {
                out.adj.insert(v, self.neighbors(v).filter(|w| keep.contains(w)).collect());
            }
        }
        out
    }

    /// DOT serialization. `style` maps a vertex to (label, extra attributes).
    pub fn to_dot<F>(&self, name: &str, mut style: F) -> String
    where
        F: FnMut(VertexId) -> (String, String),
    {
        let mut out = String::new();
        let _ = writeln!(out, "graph {name} {{");
        for v in self.vertices() {
            let (label, extra) = style(v);
            let sep = if extra.is_empty() { "" } else { ", " };
            let _ = writeln!(out, "  v{v} [label=\"{label}\"{sep}{extra}];");
        }
        for (a, b) in self.edges() {
            let _ = writeln!(out, "  v{a} -- v{b};");
        }
        out.push_str("}\n");
        out
    }
}

/// JSON wire format: `{"vertices":[...],"edges":[[i,j],...]}` with i < j,
/// both lists sorted. Round-trips bit-exactly.
#[derive(Debug, Serialize, Deserialize)]
pub struct GraphJson {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<(VertexId, VertexId)>,
}

impl From<&Graph> for GraphJson {
    fn from(g: &Graph) -> Self {
        GraphJson { vertices: g.vertices().collect(), edges: g.edges() }
    }
}

impl TryFrom<GraphJson> for Graph {
    type Error = GraphError;

    fn try_from(j: GraphJson) -> Result<Self, Self::Error> {
        Graph::from_parts(j.vertices, j.edges)
    }
}

impl Graph {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&GraphJson::from(self)).expect("graph serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self, GraphError> {
        let j: GraphJson =
            serde_json::from_str(s).map_err(|e| GraphError::InvalidData(e.to_string()))?;
        j.try_into()
    }
}
