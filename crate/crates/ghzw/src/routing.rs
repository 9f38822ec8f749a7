//! Terminal-constrained routing: find an embedded tree that spans a set of
//! user vertices, extracts to a GHZ state over them, and consumes as little
//! of the network as possible so the rest stays usable.
//!
//! A routing tree generalizes the strict repeater pattern: runs of
//! consecutive h vertices are allowed as long as every maximal run has odd
//! length. "Consumed" means the tree's vertices plus the Z-isolation
//! boundary (outside vertices adjacent to the tree), since those are the
//! vertices measured away by the plan.

use std::collections::{BTreeMap, BTreeSet};

use crate::graph::{Graph, VertexId};
use crate::tree::{
    consumed_vertices, extract_plan_unchecked, isolate_then_extract_with, MeasurementPlan,
    RepeaterTree, VertexKind,
};

#[derive(Debug, Clone)]
pub struct RoutingRequest {
    pub network: Graph,
    pub terminals: BTreeSet<VertexId>,
    pub budget: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RoutingResult {
    pub tree: RepeaterTree,
    pub consumed: BTreeSet<VertexId>,
    pub residual: Graph,
    pub plan: MeasurementPlan,
    /// True when the result came from the exact subset search rather than
    /// the Steiner heuristic.
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RoutingError {
    #[error("request invalid: {0}")]
    BadRequest(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
}

/// Check the three routing conditions on a rooted g/h-labeled tree:
/// (1) every maximal run of h vertices has odd length;
/// (2) no g-g edge except at a path end (one endpoint of tree-degree 1);
/// (3) every h vertex has exactly one child.
/// Also requires a tree-shaped underlying graph and a g root.
pub fn check_routing_conditions(tree: &RepeaterTree) -> Vec<String> {
    let mut out = Vec::new();
    let g = &tree.underlying;
    if g.edge_count() + 1 != g.len() || !g.is_connected() {
        out.push("underlying graph is not a tree".to_string());
        return out;
    }
    if tree.kind_of(tree.root) != VertexKind::GType {
        out.push(format!("root {} is not g-type", tree.root));
    }
    for v in g.vertices() {
        if tree.kind_of(v) == VertexKind::HType {
            let children = tree.children(v);
            if children.len() != 1 {
                out.push(format!(
                    "condition 3: h vertex {v} has {} children, expected exactly 1",
                    children.len()
                ));
            }
        }
    }
    for (a, b) in g.edges() {
        if tree.kind_of(a) == VertexKind::GType
            && tree.kind_of(b) == VertexKind::GType
            && g.degree(a) > 1
            && g.degree(b) > 1
        {
            out.push(format!("condition 2: interior g-g edge {a}-{b}"));
        }
    }
    // Condition 1: h vertices chain (given condition 3); walk each maximal
    // run from its top (an h whose parent is not h).
    for v in g.vertices() {
        if tree.kind_of(v) != VertexKind::HType {
            continue;
        }
        let top = match tree.parent.get(&v) {
            Some(&p) => tree.kind_of(p) != VertexKind::HType,
            None => true,
        };
        if !top {
            continue;
        }
        let mut len = 1;
        let mut cur = v;
        loop {
            let children = tree.children(cur);
            match children.as_slice() {
                [c] if tree.kind_of(*c) == VertexKind::HType => {
                    len += 1;
                    cur = *c;
                }
                _ => break,
            }
        }
        if len % 2 == 0 {
            out.push(format!("condition 1: h run of even length {len} starting at {v}"));
        }
    }
    out
}

/// Exact search is used up to this many network vertices.
pub const EXACT_SEARCH_CAP: usize = 16;

/// Find a minimum-consumption routing tree for the request. Exhaustive
/// subset search on networks of at most [`EXACT_SEARCH_CAP`] vertices, a
/// shortest-path Steiner heuristic with parity repair above that. The
/// returned plan has been simulated: it yields a star covering every
/// terminal.
pub fn find_repeater_spanning_tree(req: &RoutingRequest) -> Result<RoutingResult, RoutingError> {
    if req.terminals.is_empty() {
        return Err(RoutingError::BadRequest("at least one terminal required".into()));
    }
    for &t in &req.terminals {
        if !req.network.contains(t) {
            return Err(RoutingError::BadRequest(format!("terminal {t} not in network")));
        }
    }
    let first = *req.terminals.iter().next().unwrap();
    let comp = req.network.component_of(first);
    if !req.terminals.iter().all(|t| comp.contains(t)) {
        return Err(RoutingError::Infeasible("terminals are not connected in the network".into()));
    }
    let candidate = if req.network.len() <= EXACT_SEARCH_CAP {
        exact_search(req)
    } else {
        steiner_heuristic(req)
    }?;
    if let Some(budget) = req.budget {
        if candidate.consumed.len() > budget {
            return Err(RoutingError::Infeasible(format!(
                "minimum consumption {} exceeds budget {budget}",
                candidate.consumed.len()
            )));
        }
    }
    Ok(candidate)
}

/// Network minus the consumed vertex set.
pub fn residual_network(network: &Graph, result: &RoutingResult) -> Graph {
    let keep: BTreeSet<VertexId> =
        network.vertices().filter(|v| !result.consumed.contains(v)).collect();
    network.induced(&keep)
}

/// Candidate ordering key: consumption first, then fewer h vertices, then
/// lexicographic tree vertex ids, then edges, then kinds.
type CandidateKey = (usize, usize, Vec<VertexId>, Vec<(VertexId, VertexId)>, Vec<VertexId>);

fn finish(req: &RoutingRequest, tree: RepeaterTree, exact: bool) -> Result<RoutingResult, RoutingError> {
    let plan = isolate_then_extract_with(
        &req.network,
        &tree,
        extract_plan_unchecked(&tree),
    )
    .map_err(|e| RoutingError::Infeasible(e.to_string()))?;
    let (final_graph, _) = req
        .network
        .apply_plan(&plan.steps)
        .map_err(|e| RoutingError::Infeasible(format!("extraction failed: {e}")))?;
    let center = final_graph.is_star();
    let covers = req.terminals.iter().all(|t| final_graph.contains(*t));
    if center.is_none() || !covers {
        return Err(RoutingError::Infeasible(
            "extraction of the selected tree did not produce a star over the terminals".into(),
        ));
    }
    let consumed = consumed_vertices(&req.network, &tree);
    let residual = {
        let keep: BTreeSet<VertexId> =
            req.network.vertices().filter(|v| !consumed.contains(v)).collect();
        req.network.induced(&keep)
    };
    Ok(RoutingResult { tree, consumed, residual, plan, exact })
}

fn exact_search(req: &RoutingRequest) -> Result<RoutingResult, RoutingError> {
    let vertices: Vec<VertexId> = req.network.vertices().collect();
    let n = vertices.len();
    let index: BTreeMap<VertexId, usize> =
        vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let terminal_mask: u32 = req.terminals.iter().map(|t| 1u32 << index[t]).sum();

    let evaluate = |mask: u32| -> Option<(CandidateKey, RepeaterTree)> {
        if mask & terminal_mask != terminal_mask {
            return None;
        }
        let subset: BTreeSet<VertexId> = (0..n)
            .filter(|&i| mask & (1 << i) != 0)
            .map(|i| vertices[i])
            .collect();
        let induced = req.network.induced(&subset);
        if !induced.is_connected() {
            return None;
        }
        // The isolation Z's keep every network edge inside the subset, so a
        // chord would survive extraction and spoil the star: only subsets
        // that induce a tree are usable.
        if induced.edge_count() + 1 != induced.len() {
            return None;
        }
        let consumption = {
            let mut c = subset.clone();
            for &v in &subset {
                c.extend(req.network.neighbors(v));
            }
            c.len()
        };
        best_labeled_tree(&induced, &req.terminals).map(|(key_tail, tree)| {
            let (h_count, verts, edges, kinds) = key_tail;
            ((consumption, h_count, verts, edges, kinds), tree)
        })
    };

    let best = {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            (0u32..1 << n)
                .into_par_iter()
                .filter_map(evaluate)
                .min_by(|a, b| a.0.cmp(&b.0))
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0u32..1 << n).filter_map(evaluate).min_by(|a, b| a.0.cmp(&b.0))
        }
    };
    match best {
        Some((_, tree)) => finish(req, tree, true),
        None => Err(RoutingError::Infeasible(
            "no embedded tree satisfies the routing conditions for these terminals".into(),
        )),
    }
}

/// Over all spanning trees of `induced` and all g/h assignments with
/// terminals fixed to g, return the minimal valid candidate.
fn best_labeled_tree(
    induced: &Graph,
    terminals: &BTreeSet<VertexId>,
) -> Option<(
    (usize, Vec<VertexId>, Vec<(VertexId, VertexId)>, Vec<VertexId>),
    RepeaterTree,
)> {
    let verts: Vec<VertexId> = induced.vertices().collect();
    let edges = induced.edges();
    let need = verts.len().saturating_sub(1);
    let mut best: Option<(
        (usize, Vec<VertexId>, Vec<(VertexId, VertexId)>, Vec<VertexId>),
        RepeaterTree,
    )> = None;
    let free: Vec<VertexId> = verts.iter().copied().filter(|v| !terminals.contains(v)).collect();
    let root = *terminals.iter().next().unwrap();

    let mut chosen: Vec<(VertexId, VertexId)> = Vec::with_capacity(need);
    enumerate_spanning_trees(&verts, &edges, need, 0, &mut chosen, &mut |tree_edges| {
        for kind_mask in 0u32..1 << free.len() {
            let mut kind: BTreeMap<VertexId, VertexKind> = BTreeMap::new();
            for &t in terminals.iter() {
                kind.insert(t, VertexKind::GType);
            }
            let mut h_list = Vec::new();
            for (i, &v) in free.iter().enumerate() {
                let k = if kind_mask & (1 << i) != 0 {
                    h_list.push(v);
                    VertexKind::HType
                } else {
                    VertexKind::GType
                };
                kind.insert(v, k);
            }
            let tree_graph =
                Graph::from_parts(verts.iter().copied(), tree_edges.iter().copied()).unwrap();
            let Ok(tree) = RepeaterTree::from_graph(&tree_graph, root, kind) else {
                continue;
            };
            if !check_routing_conditions(&tree).is_empty() {
                continue;
            }
            let key = (
                h_list.len(),
                verts.clone(),
                tree_edges.to_vec(),
                h_list,
            );
            if best.as_ref().is_none_or(|(bk, _)| key < *bk) {
                best = Some((key, tree));
            }
        }
    });
    best
}

/// Recursively enumerate edge subsets of size `need` that form spanning
/// trees, invoking `sink` for each.
fn enumerate_spanning_trees(
    verts: &[VertexId],
    edges: &[(VertexId, VertexId)],
    need: usize,
    start: usize,
    chosen: &mut Vec<(VertexId, VertexId)>,
    sink: &mut dyn FnMut(&[(VertexId, VertexId)]),
) {
    if chosen.len() == need {
        let g = Graph::from_parts(verts.iter().copied(), chosen.iter().copied()).unwrap();
        if g.is_connected() {
            sink(chosen);
        }
        return;
    }
    if edges.len() - start < need - chosen.len() {
        return;
    }
    for i in start..edges.len() {
        chosen.push(edges[i]);
        enumerate_spanning_trees(verts, edges, need, i + 1, chosen, sink);
        chosen.pop();
    }
}

/// Shortest-path Steiner tree plus parity repair, for networks past the
/// exact-search cap. Approximate: consumption can exceed the true minimum.
/// Public so its quality can be measured against the exact search on small
/// networks.
pub fn steiner_heuristic(req: &RoutingRequest) -> Result<RoutingResult, RoutingError> {
    let mut in_tree: BTreeSet<VertexId> = BTreeSet::new();
    let mut tree_edges: Vec<(VertexId, VertexId)> = Vec::new();
    let first = *req.terminals.iter().next().unwrap();
    in_tree.insert(first);
    let mut remaining: BTreeSet<VertexId> = req.terminals.iter().skip(1).copied().collect();
    while !remaining.is_empty() {
        // BFS from the current tree to the nearest remaining terminal.
        let mut parent: BTreeMap<VertexId, VertexId> = BTreeMap::new();
        let mut queue: std::collections::VecDeque<VertexId> = in_tree.iter().copied().collect();
        let mut seen = in_tree.clone();
        let mut hit = None;
        'bfs: while let Some(v) = queue.pop_front() {
            for w in req.network.neighbors(v) {
                if seen.insert(w) {
                    parent.insert(w, v);
                    if remaining.contains(&w) {
                        hit = Some(w);
                        break 'bfs;
                    }
                    queue.push_back(w);
                }
            }
        }
        let Some(t) = hit else {
            return Err(RoutingError::Infeasible("terminals are not connected".into()));
        };
        remaining.remove(&t);
        let mut cur = t;
        while let Some(&p) = parent.get(&cur) {
            tree_edges.push((p, cur));
            let newly = in_tree.insert(cur);
            if !newly {
                break;
            }
            cur = p;
        }
        in_tree.insert(cur);
    }

    // Initial labeling: terminals g, everything else h; repair even runs by
    // detouring one extra vertex into the run (making its length odd).
    let mut kind: BTreeMap<VertexId, VertexKind> = in_tree
        .iter()
        .map(|&v| {
            let k = if req.terminals.contains(&v) { VertexKind::GType } else { VertexKind::HType };
            (v, k)
        })
        .collect();
    let root = first;
    for _ in 0..in_tree.len() {
        let tree_graph =
            Graph::from_parts(in_tree.iter().copied(), tree_edges.iter().copied()).unwrap();
        let tree = RepeaterTree::from_graph(&tree_graph, root, kind.clone())
            .map_err(|e| RoutingError::Infeasible(e.to_string()))?;
        let violations = check_routing_conditions(&tree);
        if violations.is_empty() {
            return finish(req, tree, false);
        }
        if !repair_even_run(req, &tree, &mut in_tree, &mut tree_edges, &mut kind) {
            return Err(RoutingError::Infeasible(format!(
                "heuristic could not repair routing violations: {}",
                violations.join("; ")
            )));
        }
    }
    Err(RoutingError::Infeasible("heuristic repair did not converge".into()))
}

/// Find one even h-run and try to fix it: either shortcut two run vertices
/// joined by a network edge around a third, or detour through an unused
/// vertex adjacent to two consecutive run members. Returns false when no
/// repair applies.
fn repair_even_run(
    req: &RoutingRequest,
    tree: &RepeaterTree,
    in_tree: &mut BTreeSet<VertexId>,
    tree_edges: &mut Vec<(VertexId, VertexId)>,
    kind: &mut BTreeMap<VertexId, VertexKind>,
) -> bool {
    // Locate an even run: top h whose parent is not h.
    for v in tree.underlying.vertices() {
        if tree.kind_of(v) != VertexKind::HType {
            continue;
        }
        if let Some(&p) = tree.parent.get(&v) {
            if tree.kind_of(p) == VertexKind::HType {
                continue;
            }
        }
        let mut run = vec![v];
        let mut cur = v;
        while let [c] = tree.children(cur).as_slice() {
            if tree.kind_of(*c) != VertexKind::HType {
                break;
            }
            run.push(*c);
            cur = *c;
        }
        if run.len() % 2 == 1 {
            continue;
        }
        // Detour: find consecutive run members (a, b) and an unused vertex w
        // adjacent to both; replace edge a-b with a-w-b.
        for pair in run.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let candidate = req
                .network
                .neighbors(a)
                .find(|&w| !in_tree.contains(&w) && req.network.has_edge(w, b));
            if let Some(w) = candidate {
                tree_edges.retain(|&(x, y)| !((x == a && y == b) || (x == b && y == a)));
                tree_edges.push((a, w));
                tree_edges.push((w, b));
                in_tree.insert(w);
                kind.insert(w, VertexKind::HType);
                return true;
            }
        }
        // Shortcut: run members a-b-c where the network has edge a-c and b
        // has no other tree role; drop b.
        for window in run.windows(3) {
            let (a, b, c) = (window[0], window[1], window[2]);
            if req.network.has_edge(a, c) && tree.underlying.degree(b) == 2 {
                tree_edges.retain(|&(x, y)| x != b && y != b);
                tree_edges.push((a, c));
                in_tree.remove(&b);
                kind.remove(&b);
                return true;
            }
        }
        // Relabel: flipping the bottom (or top) run member to g splits off
        // a run of odd length len - 1 and grows the GHZ by one. This can
        // introduce a g-g violation instead, so accept the flip only when
        // it strictly reduces the violation count.
        let current = check_routing_conditions(tree).len();
        for &flip in [run[run.len() - 1], run[0]].iter() {
            let mut trial_kind = kind.clone();
            trial_kind.insert(flip, VertexKind::GType);
            let tree_graph =
                Graph::from_parts(in_tree.iter().copied(), tree_edges.iter().copied()).unwrap();
            let Ok(trial) = RepeaterTree::from_graph(&tree_graph, tree.root, trial_kind.clone())
            else {
                continue;
            };
            if check_routing_conditions(&trial).len() < current {
                kind.insert(flip, VertexKind::GType);
                return true;
            }
        }
    }
    false
}
