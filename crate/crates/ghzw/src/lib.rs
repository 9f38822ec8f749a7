//! Toolkit for planning and verifying the routing of multiparty GHZ
//! entanglement over quantum networks modeled as graph states.
//!
//! * [`graph`] — immutable graphs and the Pauli-measurement rewrite calculus
//!   (vertex deletion, local complementation, the X-merge closed form).
//! * [`oracle`] — an independent state-vector simulator that certifies the
//!   graph rewrites and final GHZ states up to local Cliffords.
//! * [`tree`] — repeater trees, extraction planning and size formulas for
//!   balanced/unbalanced trees, and multi-memory expansion.
//! * [`grid`] — the n x n lattice labeling construction, its repeater tree,
//!   closed-form sizes and comparison bounds.
//! * [`routing`] — terminal-constrained minimum-consumption routing.
//!
//! The heavy searches (Clifford witness scans, per-n sweeps, routing subset
//! enumeration) are data-parallel and fan out across threads by default;
//! build with `--no-default-features` for the sequential fallback. Results
//! are identical either way.

pub mod graph;
pub mod grid;
pub mod oracle;
pub mod routing;
pub mod tree;
