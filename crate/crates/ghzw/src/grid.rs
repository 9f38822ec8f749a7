//! Grid labeling: assign Z/X/G roles to an n x n lattice, derive the
//! repeater tree, and evaluate the closed-form sizes and comparison bounds.
//!
//! The labeling procedure is executed exactly as published, branch by
//! branch. Where it misbehaves for particular n — overlapping writes that
//! erase a G, or a non-Z subgraph that is disconnected or cyclic — the
//! deviation is surfaced (recorded writes, construction-violation errors)
//! rather than patched, and the callers decide what to do with it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::graph::{Graph, VertexId};
use crate::tree::{RepeaterTree, TreeError, VertexKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VertexLabel {
    Z,
    X,
    G,
}

impl VertexLabel {
    pub fn as_char(self) -> char {
        match self {
            VertexLabel::Z => 'Z',
            VertexLabel::X => 'X',
            VertexLabel::G => 'G',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GridError {
    #[error("grid side must be at least 1")]
    DomainN,
    #[error("construction violation: {0}")]
    ConstructionViolation(String),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// A write whose (row, column) target fell outside the grid; it is skipped
/// and reported instead of applied.
pub type SkippedWrite = (i64, i64, VertexLabel);

/// A write that replaced an already-promoted (non-Z) label with something
/// different. These collisions are why the G count can fall short of the
/// closed form for some n.
pub type ConflictWrite = (i64, i64, VertexLabel, VertexLabel);

/// n x n label matrix, rows and columns indexed 1..=n, row 1 at the bottom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledGrid {
    pub n: usize,
    labels: Vec<VertexLabel>,
    pub skipped_writes: Vec<SkippedWrite>,
    pub conflict_writes: Vec<ConflictWrite>,
}

impl LabeledGrid {
    pub fn get(&self, row: usize, col: usize) -> VertexLabel {
        assert!((1..=self.n).contains(&row) && (1..=self.n).contains(&col));
        self.labels[(row - 1) * self.n + (col - 1)]
    }

    fn set(&mut self, row: i64, col: i64, label: VertexLabel) {
        let n = self.n as i64;
        if row < 1 || row > n || col < 1 || col > n {
            self.skipped_writes.push((row, col, label));
            return;
        }
        let idx = (row as usize - 1) * self.n + (col as usize - 1);
        let old = self.labels[idx];
        if old != VertexLabel::Z && old != label {
            self.conflict_writes.push((row, col, old, label));
        }
        self.labels[idx] = label;
    }

    /// Fig-5(a)-style 3x2 block: left column (col) all G; right column
    /// (col+1) Z, X, Z from bottom row upward.
    fn block_a(&mut self, bottom_row: i64, left_col: i64) {
        for d in 0..3 {
            self.set(bottom_row + d, left_col, VertexLabel::G);
        }
        self.set(bottom_row, left_col + 1, VertexLabel::Z);
        self.set(bottom_row + 1, left_col + 1, VertexLabel::X);
        self.set(bottom_row + 2, left_col + 1, VertexLabel::Z);
    }

    /// Fig-5(b)-style 2x2 block: left column G, G; right column Z below,
    /// X above.
    fn block_b(&mut self, bottom_row: i64, left_col: i64) {
        self.set(bottom_row, left_col, VertexLabel::G);
        self.set(bottom_row + 1, left_col, VertexLabel::G);
        self.set(bottom_row, left_col + 1, VertexLabel::Z);
        self.set(bottom_row + 1, left_col + 1, VertexLabel::X);
    }

    /// True when any write had to be skipped: the degenerate-case report.
    pub fn is_degenerate(&self) -> bool {
        !self.skipped_writes.is_empty()
    }

    pub fn count(&self, label: VertexLabel) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    pub fn g_count(&self) -> usize {
        self.count(VertexLabel::G)
    }

    /// Vertex id of cell (row, col) in the grid graph.
    pub fn vertex_id(&self, row: usize, col: usize) -> VertexId {
        ((row - 1) * self.n + (col - 1)) as VertexId
    }

    /// (row, col) of a vertex id.
    pub fn coords(&self, v: VertexId) -> (usize, usize) {
        let v = v as usize;
        (v / self.n + 1, v % self.n + 1)
    }

    /// Text rendering: one row per line, top row first.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for row in (1..=self.n).rev() {
            for col in 1..=self.n {
                out.push(self.get(row, col).as_char());
            }
            out.push('\n');
        }
        out
    }
}

/// Build the label matrix for an n x n grid, executing every branch of the
/// published procedure as written. `extra_reps` adds that many extra
/// iterations to the main row-block loop (used to check that repeating the
/// loop never grows the G count); out-of-grid writes those iterations
/// produce are skipped and recorded.
pub fn build_grid_labels_with_reps(n: usize, extra_reps: usize) -> Result<LabeledGrid, GridError> {
    if n < 1 {
        return Err(GridError::DomainN);
    }
    let mut lg = LabeledGrid {
        n,
        labels: vec![VertexLabel::Z; n * n],
        skipped_writes: Vec::new(),
        conflict_writes: Vec::new(),
    };
    let ni = n as i64;
    if n % 2 == 1 {
        let k = ni / 4 + extra_reps as i64;
        let r = ni % 4;
        for i in 0..k {
            for j in 0..=(ni - 3) / 2 {
                lg.block_a(4 * i + 1, 2 * j + 1);
            }
            lg.set(4 * i + 1, ni, VertexLabel::X);
            lg.set(4 * i + 3, ni, VertexLabel::X);
            lg.set(4 * i + 2, ni, VertexLabel::G);
            lg.set(4 * i + 4, ni - 1, VertexLabel::G);
            lg.set(4 * i + 4, ni, VertexLabel::G);
        }
        if r == 3 {
            for j in 0..=(ni - 3) / 2 {
                lg.block_a(ni - 2, 2 * j + 1);
            }
            lg.set(1, ni, VertexLabel::G);
            lg.set(ni - 1, ni, VertexLabel::G);
            lg.set(ni, ni, VertexLabel::G);
            lg.set(ni - 2, ni, VertexLabel::X);
        } else {
            // r = 1
            for j in 1..=(ni - 3) / 2 {
                lg.block_b(ni - 1, 2 * j);
            }
            lg.set(ni - 1, ni - 1, VertexLabel::X);
            lg.set(ni, 1, VertexLabel::G);
            lg.set(ni, ni - 1, VertexLabel::G);
            lg.set(1, ni, VertexLabel::G);
        }
    } else {
        let k = ni / 6 + extra_reps as i64;
        let r = ni % 6;
        for i in 0..k {
            for j in 0..=(ni - 4) / 2 {
                lg.block_a(6 * i + 1, 2 * j + 1);
                lg.block_a(6 * i + 4, 2 * j + 2);
            }
            lg.set(6 * i + 2, ni, VertexLabel::X);
            lg.set(6 * i + 4, ni, VertexLabel::X);
            lg.set(6 * i + 6, ni, VertexLabel::X);
            lg.set(6 * i + 2, ni - 1, VertexLabel::G);
            lg.set(6 * i + 3, ni, VertexLabel::G);
            lg.set(6 * i + 5, ni, VertexLabel::G);
            lg.set(6 * i + 5, 1, VertexLabel::G);
        }
        if r == 0 {
            lg.set(ni, ni, VertexLabel::G);
        } else {
            if r == 2 {
                for j in 0..=(ni - 4) / 2 {
                    lg.block_b(ni - 1, 2 * j + 1);
                }
                lg.set(ni, ni - 1, VertexLabel::G);
                lg.set(ni - 1, ni, VertexLabel::G);
            } else {
                // r = 4
                for j in 0..=(ni - 4) / 2 {
                    lg.block_a(ni - 3, 2 * j + 1);
                }
                lg.set(ni - 2, ni - 1, VertexLabel::G);
                lg.set(ni - 1, ni, VertexLabel::G);
                lg.set(ni, ni - 2, VertexLabel::G);
                lg.set(ni, ni - 1, VertexLabel::G);
            }
            lg.set(ni, ni, VertexLabel::X);
        }
        lg.set(1, ni - 1, VertexLabel::G);
    }
    Ok(lg)
}

/// Standard labeling (no extra loop repetitions).
pub fn build_grid_labels(n: usize) -> Result<LabeledGrid, GridError> {
    build_grid_labels_with_reps(n, 0)
}

/// The n x n lattice as a graph; vertex ids are row-major from the bottom
/// row, matching [`LabeledGrid::vertex_id`].
pub fn grid_graph(n: usize) -> Graph {
    let id = |row: usize, col: usize| ((row - 1) * n + (col - 1)) as VertexId;
    let mut edges = Vec::new();
    for row in 1..=n {
        for col in 1..=n {
            if col < n {
                edges.push((id(row, col), id(row, col + 1)));
            }
            if row < n {
                edges.push((id(row, col), id(row + 1, col)));
            }
        }
    }
    Graph::from_parts(0..(n * n) as VertexId, edges).expect("lattice is well-formed")
}

/// Repeater tree of a labeled grid: the induced lattice subgraph on the
/// non-Z cells, kinds X -> h and G -> g, rooted at the G cell with the
/// lexicographically smallest (row, column). Errors if that subgraph is not
/// a tree — which indicates the labeling procedure broke down for this n,
/// not a bug in the caller.
pub fn tree_from_labels(lg: &LabeledGrid) -> Result<RepeaterTree, GridError> {
    let full = grid_graph(lg.n);
    let keep: std::collections::BTreeSet<VertexId> = full
        .vertices()
        .filter(|&v| {
            let (r, c) = lg.coords(v);
            lg.get(r, c) != VertexLabel::Z
        })
        .collect();
    let sub = full.induced(&keep);
    if sub.is_empty() {
        return Err(GridError::ConstructionViolation("no non-Z cells".into()));
    }
    if !sub.is_connected() {
        return Err(GridError::ConstructionViolation(format!(
            "non-Z subgraph is disconnected ({} vertices, {} edges)",
            sub.len(),
            sub.edge_count()
        )));
    }
    if sub.edge_count() + 1 != sub.len() {
        return Err(GridError::ConstructionViolation(format!(
            "non-Z subgraph is cyclic ({} vertices, {} edges)",
            sub.len(),
            sub.edge_count()
        )));
    }
    let root = sub
        .vertices()
        .filter(|&v| {
            let (r, c) = lg.coords(v);
            lg.get(r, c) == VertexLabel::G
        })
        .min_by_key(|&v| lg.coords(v))
        .ok_or_else(|| GridError::ConstructionViolation("no G cells".into()))?;
    let kind: BTreeMap<VertexId, VertexKind> = sub
        .vertices()
        .map(|v| {
            let (r, c) = lg.coords(v);
            let k = match lg.get(r, c) {
                VertexLabel::G => VertexKind::GType,
                VertexLabel::X => VertexKind::HType,
                VertexLabel::Z => unreachable!("Z cells were filtered out"),
            };
            (v, k)
        })
        .collect();
    Ok(RepeaterTree::from_graph(&sub, root, kind)?)
}

/// Closed-form GHZ size for the n x n grid, by congruence class.
pub fn ghz_size_formula(n: usize) -> u64 {
    let n = n as u64;
    if n % 2 == 1 {
        if n % 4 == 3 {
            3 * (n + 1) * (n + 1) / 8
        } else {
            3 * (n * n - 1) / 8 + n
        }
    } else {
        match n % 6 {
            0 => (3 * n * n - 2 * n + 12) / 6,
            2 => (3 * n * n - 2 * n + 10) / 6,
            _ => (3 * n * n - 5 * n + 20) / 6,
        }
    }
}

/// Earlier conjectured bound: ceil(n/2)^2.
pub fn l_b(n: usize) -> i64 {
    let h = ((n + 1) / 2) as i64;
    h * h
}

/// Later conjectured bound, evaluated exactly as written (negative for
/// n = 1, where the leading floor term vanishes).
pub fn l_m(n: usize) -> i64 {
    let n = n as i64;
    (n + 1) / 4 * (3 * ((n - 1) / 2) + 4) - 2
}

/// Correction of that bound: 3 * floor((n+1)/4) * floor((n+1)/2).
pub fn l_m_corrected(n: usize) -> i64 {
    let n = n as i64;
    3 * ((n + 1) / 4) * ((n + 1) / 2)
}

/// Per-n comparison of all bounds against the closed-form construction size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeReport {
    pub n: usize,
    pub l_b: i64,
    pub l_m: i64,
    pub l_m_corrected: i64,
    pub l_0: i64,
    pub improvement_over_l_b: i64,
    pub improvement_over_l_m_corrected: i64,
}

pub fn size_report(n: usize) -> SizeReport {
    let l0 = ghz_size_formula(n) as i64;
    let lb = l_b(n);
    let lmc = l_m_corrected(n);
    SizeReport {
        n,
        l_b: lb,
        l_m: l_m(n),
        l_m_corrected: lmc,
        l_0: l0,
        improvement_over_l_b: l0 - lb,
        improvement_over_l_m_corrected: l0 - lmc,
    }
}

/// Reports for n = 1..=n_max, in order. The per-n computations fan out
/// across threads when the `parallel` feature is on; output order is fixed.
pub fn size_report_sweep(n_max: usize) -> Vec<SizeReport> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (1..=n_max).into_par_iter().map(size_report).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (1..=n_max).map(size_report).collect()
    }
}

/// CSV with the fixed header `n,L_B,L_M,L_Mc,L_0`.
pub fn size_report_csv(reports: &[SizeReport]) -> String {
    let mut out = String::from("n,L_B,L_M,L_Mc,L_0\n");
    for r in reports {
        out.push_str(&format!("{},{},{},{},{}\n", r.n, r.l_b, r.l_m, r.l_m_corrected, r.l_0));
    }
    out
}

/// JSON wrapper for the label matrix. Rows are serialized top-to-bottom for
/// readability; the `row_order` field states this explicitly because the
/// construction itself indexes rows bottom-to-top.
#[derive(Debug, Serialize, Deserialize)]
pub struct LabeledGridJson {
    pub n: usize,
    pub row_order: String,
    pub rows: Vec<String>,
}

impl From<&LabeledGrid> for LabeledGridJson {
    fn from(lg: &LabeledGrid) -> Self {
        LabeledGridJson {
            n: lg.n,
            row_order: "top_to_bottom".to_string(),
            rows: lg.render().lines().map(str::to_string).collect(),
        }
    }
}

impl TryFrom<LabeledGridJson> for LabeledGrid {
    type Error = GridError;

    fn try_from(j: LabeledGridJson) -> Result<Self, Self::Error> {
        if j.n < 1 || j.rows.len() != j.n || j.rows.iter().any(|r| r.chars().count() != j.n) {
            return Err(GridError::ConstructionViolation("bad label matrix shape".into()));
        }
        let top_first = match j.row_order.as_str() {
            "top_to_bottom" => true,
            "bottom_to_top" => false,
            _ => return Err(GridError::ConstructionViolation("bad row_order".into())),
        };
        let mut labels = vec![VertexLabel::Z; j.n * j.n];
        for (i, row) in j.rows.iter().enumerate() {
            let grid_row = if top_first { j.n - i } else { i + 1 };
            for (c, ch) in row.chars().enumerate() {
                let l = match ch {
                    'Z' => VertexLabel::Z,
                    'X' => VertexLabel::X,
                    'G' => VertexLabel::G,
                    _ => {
                        return Err(GridError::ConstructionViolation(format!(
                            "bad label character {ch}"
                        )))
                    }
                };
                labels[(grid_row - 1) * j.n + c] = l;
            }
        }
        Ok(LabeledGrid { n: j.n, labels, skipped_writes: Vec::new(), conflict_writes: Vec::new() })
    }
}

/// DOT rendering of the labeled grid: vertices named `r_c`, G cells filled,
/// X cells diamonds, Z cells plain.
pub fn grid_dot(lg: &LabeledGrid) -> String {
    let full = grid_graph(lg.n);
    full.to_dot("grid", |v| {
        let (r, c) = lg.coords(v);
        let extra = match lg.get(r, c) {
            VertexLabel::G => "style=filled",
            VertexLabel::X => "shape=diamond",
            VertexLabel::Z => "",
        };
        (format!("{r}_{c}"), extra.to_string())
    })
}
