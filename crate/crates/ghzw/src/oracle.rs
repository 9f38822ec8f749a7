//! Independent quantum-state oracle.
//!
//! Everything in [`crate::graph`] manipulates graphs; this module checks
//! those rewrites against direct amplitude arithmetic. A graph state is
//! built by applying controlled-Z along every edge to an all-|+> register,
//! measurements are realized as post-selected projections, and two states
//! are compared up to single-qubit Cliffords by explicit witness search.
//!
//! The oracle is deliberately small and slow: it exists to certify the fast
//! combinatorial layer at sizes where exhaustive checking is feasible.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::graph::{Graph, GraphError, Pauli, RewriteStep, VertexId};

/// Default cap on oracle register width (64Ki amplitudes).
pub const DEFAULT_QUBIT_CAP: usize = 16;

/// Witness searches enumerate 24^k Clifford tuples; k is capped here.
pub const WITNESS_QUBIT_CAP: usize = 6;

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("register of {qubits} qubits exceeds the cap of {cap}")]
    CapExceeded { qubits: usize, cap: usize },
    #[error("witness search over {qubits} qubits exceeds the cap of {cap}")]
    SearchCapExceeded { qubits: usize, cap: usize },
    #[error("vertex {0} is not in the register")]
    UnknownQubit(VertexId),
    #[error("post-selected outcome has probability {0:.3e} (impossible outcome)")]
    ImpossibleOutcome(f64),
    #[error("registers hold different vertex sets")]
    RegisterMismatch,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Measurement outcome sign for post-selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Plus,
    Minus,
}

/// Pure state over a register of named qubits.
///
/// `qubit_order[i]` is the vertex id of qubit `i`, kept sorted ascending;
/// basis index bit `i` (value `1 << i`) is the computational value of
/// qubit `i`.
#[derive(Debug, Clone)]
pub struct StateVector {
    pub qubit_order: Vec<VertexId>,
    pub amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn num_qubits(&self) -> usize {
        self.qubit_order.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    fn position(&self, vertex: VertexId) -> Result<usize, OracleError> {
        self.qubit_order
            .binary_search(&vertex)
            .map_err(|_| OracleError::UnknownQubit(vertex))
    }

    /// Overlap |<self|other>|^2; both registers must hold the same vertices.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64, OracleError> {
        if self.qubit_order != other.qubit_order {
            return Err(OracleError::RegisterMismatch);
        }
        let dot: Complex64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(dot.norm_sqr())
    }

    /// Apply a single-qubit operator to the qubit holding `vertex`.
    pub fn apply_1q(&self, vertex: VertexId, m: &[[Complex64; 2]; 2]) -> Result<StateVector, OracleError> {
        let p = self.position(vertex)?;
        let bit = 1usize << p;
        let mut amps = self.amplitudes.clone();
        for idx in 0..amps.len() {
            if idx & bit == 0 {
                let a0 = self.amplitudes[idx];
                let a1 = self.amplitudes[idx | bit];
                amps[idx] = m[0][0] * a0 + m[0][1] * a1;
                amps[idx | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
        Ok(StateVector { qubit_order: self.qubit_order.clone(), amplitudes: amps })
    }
}

/// Build |G> = prod CZ |+>^V with the default qubit cap.
pub fn build_graph_state(g: &Graph) -> Result<StateVector, OracleError> {
    build_graph_state_with_cap(g, DEFAULT_QUBIT_CAP)
}

/// Build |G> with an explicit cap on register width.
pub fn build_graph_state_with_cap(g: &Graph, cap: usize) -> Result<StateVector, OracleError> {
    let qubit_order: Vec<VertexId> = g.vertices().collect();
    let n = qubit_order.len();
    if n > cap {
        return Err(OracleError::CapExceeded { qubits: n, cap });
    }
    let dim = 1usize << n;
    let amp = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
    let mut amplitudes = vec![amp; dim];
    let pos: BTreeMap<VertexId, usize> =
        qubit_order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    for (a, b) in g.edges() {
        let mask = (1usize << pos[&a]) | (1usize << pos[&b]);
        for (idx, amp) in amplitudes.iter_mut().enumerate() {
            if idx & mask == mask {
                *amp = -*amp;
            }
        }
    }
    Ok(StateVector { qubit_order, amplitudes })
}

/// Post-selected Pauli measurement: project onto the chosen eigenspace,
/// renormalize, and drop the measured qubit (it factors out in its
/// eigenstate). Returns the pre-projection probability of the outcome.
pub fn measure_pauli(
    s: &StateVector,
    vertex: VertexId,
    basis: Pauli,
    outcome: Outcome,
) -> Result<(StateVector, f64), OracleError> {
    let p = s.position(vertex)?;
    let sign = match outcome {
        Outcome::Plus => 1.0,
        Outcome::Minus => -1.0,
    };
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    // Eigenvector (e0, e1) of the basis operator for the requested eigenvalue.
    let (e0, e1) = match basis {
        Pauli::Z => {
            if sign > 0.0 {
                (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
            } else {
                (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
            }
        }
        Pauli::X => (Complex64::new(inv_sqrt2, 0.0), Complex64::new(sign * inv_sqrt2, 0.0)),
        Pauli::Y => (Complex64::new(inv_sqrt2, 0.0), Complex64::new(0.0, sign * inv_sqrt2)),
    };
    let bit = 1usize << p;
    let low_mask = bit - 1;
    let dim = s.amplitudes.len() >> 1;
    let mut amps = Vec::with_capacity(dim);
    for rest in 0..dim {
        let idx0 = (rest & low_mask) | ((rest & !low_mask) << 1);
        let a = e0.conj() * s.amplitudes[idx0] + e1.conj() * s.amplitudes[idx0 | bit];
        amps.push(a);
    }
    let prob: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if prob < 1e-12 {
        return Err(OracleError::ImpossibleOutcome(prob));
    }
    let scale = prob.sqrt().recip();
    for a in &mut amps {
        *a *= scale;
    }
    let mut qubit_order = s.qubit_order.clone();
    qubit_order.remove(p);
    Ok((StateVector { qubit_order, amplitudes: amps }, prob))
}

type Mat2 = [[Complex64; 2]; 2];

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Phase-canonical key used to deduplicate matrices that differ only by a
/// global phase.
fn phase_key(m: &Mat2) -> [i64; 8] {
    let flat = [m[0][0], m[0][1], m[1][0], m[1][1]];
    let lead = *flat.iter().find(|c| c.norm() > 1e-6).expect("zero matrix");
    let phase = lead / lead.norm();
    let mut key = [0i64; 8];
    for (i, c) in flat.iter().enumerate() {
        let c = c / phase;
        key[2 * i] = (c.re * 1e6).round() as i64;
        key[2 * i + 1] = (c.im * 1e6).round() as i64;
    }
    key
}

/// The 24 single-qubit Cliffords (up to global phase) in a fixed canonical
/// order: breadth-first products over the generators S = diag(1, i) and
/// H = (1/sqrt2)[[1,1],[1,-1]], identity first, left-multiplying S before H
/// at every level. Witness indices refer to this enumeration and are stable
/// across runs.
pub fn clifford_table() -> &'static [Mat2; 24] {
    use std::sync::OnceLock;
    static TABLE: OnceLock<[Mat2; 24]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let s_gate: Mat2 = [[one, zero], [zero, i]];
        let h_gate: Mat2 = [[h, h], [h, -h]];
        let identity: Mat2 = [[one, zero], [zero, one]];
        let mut out: Vec<Mat2> = vec![identity];
        let mut seen: BTreeSet<[i64; 8]> = BTreeSet::new();
        seen.insert(phase_key(&identity));
        let mut frontier = 0;
        while out.len() < 24 {
            let current = out[frontier];
            frontier += 1;
            for gen in [&s_gate, &h_gate] {
                let m = mat_mul(gen, &current);
                if seen.insert(phase_key(&m)) {
                    out.push(m);
                }
            }
        }
        out.try_into().expect("exactly 24 single-qubit Cliffords")
    })
}

/// Per-qubit Clifford assignment demonstrating local-Clifford equality.
/// Indices refer to [`clifford_table`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliffordWitness {
    pub assignment: Vec<(VertexId, usize)>,
}

impl CliffordWitness {
    pub fn apply(&self, s: &StateVector) -> Result<StateVector, OracleError> {
        let table = clifford_table();
        let mut out = s.clone();
        for &(v, idx) in &self.assignment {
            out = out.apply_1q(v, &table[idx])?;
        }
        Ok(out)
    }

    pub fn is_identity(&self) -> bool {
        self.assignment.iter().all(|&(_, idx)| idx == 0)
    }
}

/// Cross tensor D indexed by (bra, ket) values of the search qubits:
/// D[s][t] = sum over the shared values of the non-search qubits of
/// conj(a[s, rest]) * b[t, rest]. Contracting D against a tensor product of
/// 2x2 matrices on the search qubits gives <a| W |b> directly, so the 24^k
/// witness scan never touches the full register again.
fn cross_tensor(a: &StateVector, b: &StateVector, search_pos: &[usize]) -> Vec<Complex64> {
    let k = search_pos.len();
    let mut d = vec![Complex64::new(0.0, 0.0); 1 << (2 * k)];
    let search_mask: usize = search_pos.iter().map(|&p| 1usize << p).sum();
    for idx_a in 0..a.amplitudes.len() {
        let rest = idx_a & !search_mask;
        let mut s_bits = 0usize;
        for (j, &p) in search_pos.iter().enumerate() {
            if idx_a & (1 << p) != 0 {
                s_bits |= 1 << j;
            }
        }
        // Enumerate ket values of the search qubits over the same rest bits.
        for t_bits in 0..1usize << k {
            let mut idx_b = rest;
            for (j, &p) in search_pos.iter().enumerate() {
                if t_bits & (1 << j) != 0 {
                    idx_b |= 1 << p;
                }
            }
            d[(s_bits << k) | t_bits] += a.amplitudes[idx_a].conj() * b.amplitudes[idx_b];
        }
    }
    d
}

/// Contract qubit 0 of the cross tensor with one 2x2 matrix, producing the
/// cross tensor over the remaining k-1 search qubits.
fn contract_first(d: &[Complex64], k: usize, m: &Mat2) -> Vec<Complex64> {
    let kk = k - 1;
    let mut out = vec![Complex64::new(0.0, 0.0); 1 << (2 * kk)];
    for s_rest in 0..1usize << kk {
        for t_rest in 0..1usize << kk {
            let mut acc = Complex64::new(0.0, 0.0);
            for s0 in 0..2usize {
                for t0 in 0..2usize {
                    let s = (s_rest << 1) | s0;
                    let t = (t_rest << 1) | t0;
                    // <s0| M |t0> weighting, conjugated on the bra side is
                    // not needed: W acts on the ket.
                    acc += m[s0][t0] * d[(s << k) | t];
                }
            }
            out[(s_rest << kk) | t_rest] = acc;
        }
    }
    out
}

fn witness_dfs(d: &[Complex64], k: usize, prefix: &mut Vec<usize>, out: &mut Option<Vec<usize>>) {
    if out.is_some() {
        return;
    }
    if k == 0 {
        if d[0].norm_sqr() >= 1.0 - EPS {
            *out = Some(prefix.clone());
        }
        return;
    }
    // Cauchy-Schwarz bound on the best still-reachable overlap: the final
    // value contracts d against k unitaries of Frobenius norm sqrt(2) each,
    // so |<a|W|b>|^2 <= ||d||_F^2 * 2^k. Prune branches that cannot reach
    // fidelity 1 no matter which Cliffords follow.
    let reachable: f64 = d.iter().map(|c| c.norm_sqr()).sum::<f64>() * (1u64 << k) as f64;
    if reachable < 1.0 - EPS {
        return;
    }
    for (idx, m) in clifford_table().iter().enumerate() {
        prefix.push(idx);
        let reduced = contract_first(d, k, m);
        witness_dfs(&reduced, k - 1, prefix, out);
        prefix.pop();
        if out.is_some() {
            return;
        }
    }
}

/// Search for per-qubit Cliffords W on `search_qubits` such that
/// W|b> equals |a> up to global phase (fidelity >= 1 - 1e-9). Returns the
/// lexicographically first witness in the canonical Clifford order, or None.
///
/// The scan over the first search qubit fans out across threads when the
/// `parallel` feature is on; each branch is fully ordered internally and the
/// first matching branch index wins, so the result is identical either way.
pub fn equal_up_to_local_clifford(
    a: &StateVector,
    b: &StateVector,
    search_qubits: &BTreeSet<VertexId>,
) -> Result<Option<CliffordWitness>, OracleError> {
    if a.qubit_order != b.qubit_order {
        return Err(OracleError::RegisterMismatch);
    }
    let qubits: Vec<VertexId> = search_qubits.iter().copied().collect();
    if qubits.len() > WITNESS_QUBIT_CAP {
        return Err(OracleError::SearchCapExceeded {
            qubits: qubits.len(),
            cap: WITNESS_QUBIT_CAP,
        });
    }
    let mut search_pos = Vec::with_capacity(qubits.len());
    for &v in &qubits {
        search_pos.push(a.position(v)?);
    }
    let k = qubits.len();
    let d = cross_tensor(a, b, &search_pos);
    // cross_tensor packs search qubit j into tensor bit j; witness_dfs
    // contracts the lowest bit first, so reverse to make qubits[0] the
    // outermost (slowest-varying, lexicographically leading) choice.
    let found = if k == 0 {
        if d[0].norm_sqr() >= 1.0 - EPS {
            Some(Vec::new())
        } else {
            None
        }
    } else {
        // witness_dfs strips tensor bit 0 (= qubits[0]) first, so qubits[0]
        // is the outermost, lexicographically leading choice; the fan-out
        // below parallelizes exactly that outermost level.
        let branch = |idx: usize| -> Option<Vec<usize>> {
            let m = &clifford_table()[idx];
            let reduced = contract_first(&d, k, m);
            let mut prefix = vec![idx];
            let mut out = None;
            witness_dfs(&reduced, k - 1, &mut prefix, &mut out);
            out
        };
        first_some_by_index(24, branch)
    };
    Ok(found.map(|indices| CliffordWitness {
        assignment: qubits.into_iter().zip(indices).collect(),
    }))
}

/// Evaluate `f(0..n)` and return the result of the smallest index that
/// yields `Some`, fanning out across threads when available.
fn first_some_by_index<T, F>(n: usize, f: F) -> Option<T>
where
    T: Send,
    F: Fn(usize) -> Option<T> + Sync,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n)
            .into_par_iter()
            .filter_map(|i| f(i).map(|t| (i, t)))
            .min_by_key(|(i, _)| *i)
            .map(|(_, t)| t)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).find_map(f)
    }
}

/// Outcome of checking one Table-style rewrite rule against the oracle.
#[derive(Debug, Clone)]
pub struct RuleReport {
    pub step: RewriteStep,
    pub chosen_neighbor: Option<VertexId>,
    pub probability: f64,
    pub witness: Option<CliffordWitness>,
}

impl RuleReport {
    pub fn ok(&self) -> bool {
        self.witness.is_some()
    }
}

/// Certify one measurement rewrite: build |g>, measure, build |g'| for the
/// graph-calculus result, and search for a local-Clifford witness over the
/// closed neighborhood of the measured vertex (plus the special neighbor's
/// neighborhood for X).
pub fn verify_rewrite_rule(
    g: &Graph,
    step: &RewriteStep,
    outcome: Outcome,
) -> Result<RuleReport, OracleError> {
    let state = build_graph_state(g)?;
    let (rewritten, chosen) = match step.basis {
        Pauli::Z => (g.z_measure(step.target)?, None),
        Pauli::Y => (g.y_measure(step.target)?, None),
        Pauli::X => {
            let (h, u) = g.x_measure(step.target, step.special_neighbor)?;
            (h, Some(u))
        }
    };
    let (post, probability) = measure_pauli(&state, step.target, step.basis, outcome)?;
    let expected = build_graph_state(&rewritten)?;
    let mut search: BTreeSet<VertexId> = g.neighbors(step.target).collect();
    if let Some(u) = chosen {
        search.extend(g.neighbors(u));
    }
    search.remove(&step.target);
    let witness = equal_up_to_local_clifford(&post, &expected, &search)?;
    Ok(RuleReport { step: *step, chosen_neighbor: chosen, probability, witness })
}

/// True iff applying Hadamard on every qubit except `center` turns `s` into
/// (|0...0> + |1...1>)/sqrt2 up to global phase.
pub fn is_ghz_up_to_hadamards(s: &StateVector, center: VertexId) -> Result<bool, OracleError> {
    s.position(center)?;
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let h_gate: Mat2 = [[h, h], [h, -h]];
    let mut t = s.clone();
    for &v in &s.qubit_order {
        if v != center {
            t = t.apply_1q(v, &h_gate)?;
        }
    }
    let dim = t.amplitudes.len();
    if dim == 1 {
        return Ok(t.amplitudes[0].norm_sqr() >= 1.0 - EPS);
    }
    if dim == 2 {
        // Single qubit: GHZ-1 degenerates to |+>.
        let target = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let dot = target * (t.amplitudes[0] + t.amplitudes[1]);
        return Ok(dot.norm_sqr() >= 1.0 - EPS);
    }
    let dot = (t.amplitudes[0] + t.amplitudes[dim - 1])
        * Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    Ok(dot.norm_sqr() >= 1.0 - EPS)
}

/// Bipartite entanglement rank of |g> across (part, complement), computed
/// from the state itself: the numeric rank of the amplitude matrix. For
/// graph states this equals 2^cut_rank.
pub fn entanglement_rank(s: &StateVector, part: &BTreeSet<VertexId>) -> Result<usize, OracleError> {
    let part_pos: Vec<usize> = s
        .qubit_order
        .iter()
        .enumerate()
        .filter(|(_, v)| part.contains(v))
        .map(|(i, _)| i)
        .collect();
    let rest_pos: Vec<usize> = (0..s.num_qubits()).filter(|i| !part_pos.contains(i)).collect();
    let rows = 1usize << part_pos.len();
    let cols = 1usize << rest_pos.len();
    let mut m = vec![vec![Complex64::new(0.0, 0.0); cols]; rows];
    for (idx, &a) in s.amplitudes.iter().enumerate() {
        let mut r = 0usize;
        for (j, &p) in part_pos.iter().enumerate() {
            if idx & (1 << p) != 0 {
                r |= 1 << j;
            }
        }
        let mut c = 0usize;
        for (j, &p) in rest_pos.iter().enumerate() {
            if idx & (1 << p) != 0 {
                c |= 1 << j;
            }
        }
        m[r][c] = a;
    }
    // Gaussian elimination with partial pivoting; rank by tolerance.
    let mut rank = 0;
    for col in 0..cols {
        let pivot = (rank..rows).max_by(|&a, &b| {
            m[a][col].norm().partial_cmp(&m[b][col].norm()).unwrap()
        });
        let Some(p) = pivot else { break };
        if m[p][col].norm() < 1e-7 {
            continue;
        }
        m.swap(rank, p);
        let lead = m[rank][col];
        for r in rank + 1..rows {
            let factor = m[r][col] / lead;
            for c in col..cols {
                let sub = factor * m[rank][c];
                m[r][c] -= sub;
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    Ok(rank)
}

/// Exhaustive graph-level search for the largest star reachable by any
/// sequence of Z/Y/X measurements (X over every neighbor choice), up to
/// `depth_cap` measurements. Each measurement removes one vertex, so any
/// depth_cap >= |V| explores the full space.
pub fn max_ghz_brute(g: &Graph, depth_cap: usize) -> Result<usize, OracleError> {
    if g.len() > 7 {
        return Err(OracleError::CapExceeded { qubits: g.len(), cap: 7 });
    }
    let mut memo: HashMap<(Vec<(VertexId, VertexId)>, Vec<VertexId>, usize), usize> = HashMap::new();
    Ok(brute_rec(g, depth_cap.min(g.len()), &mut memo))
}

fn brute_rec(
    g: &Graph,
    depth: usize,
    memo: &mut HashMap<(Vec<(VertexId, VertexId)>, Vec<VertexId>, usize), usize>,
) -> usize {
    let key = (g.edges(), g.vertices().collect::<Vec<_>>(), depth);
    if let Some(&v) = memo.get(&key) {
        return v;
    }
    let mut best = if g.is_star().is_some() { g.len() } else { 0 };
    if depth > 0 {
        let vertices: Vec<VertexId> = g.vertices().collect();
        for &v in &vertices {
            best = best.max(brute_rec(&g.z_measure(v).unwrap(), depth - 1, memo));
            best = best.max(brute_rec(&g.y_measure(v).unwrap(), depth - 1, memo));
            let nbrs: Vec<VertexId> = g.neighbors(v).collect();
            for u in nbrs {
                let (h, _) = g.x_measure(v, Some(u)).unwrap();
                best = best.max(brute_rec(&h, depth - 1, memo));
            }
        }
    }
    memo.insert(key, best);
    best
}
