//! `ghzw` — plan and verify GHZ extraction over graph-state networks.
//!
//! Subcommands: `grid-plan` (label an n x n lattice and derive its repeater
//! tree), `verify` (check a tree or star JSON, optionally against the state
//! oracle), `compare` (CSV sweep of the size bounds), `route` (terminal
//! routing on an arbitrary network), `tree-size` (closed-form tree sizes).
//!
//! Exit codes: 0 success, 1 verification failure or degenerate report,
//! 2 infeasibility, 3 usage error.

use std::collections::BTreeSet;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ghzw::graph::{Graph, Pauli};
use ghzw::grid::{
    build_grid_labels, grid_dot, grid_graph, size_report, size_report_csv, size_report_sweep,
    tree_from_labels, LabeledGridJson,
};
use ghzw::oracle::{
    build_graph_state_with_cap, equal_up_to_local_clifford, is_ghz_up_to_hadamards,
    measure_pauli, Outcome, StateVector, DEFAULT_QUBIT_CAP,
};
use ghzw::routing::{find_repeater_spanning_tree, RoutingError, RoutingRequest};
use ghzw::tree::{
    balanced_size, extract_plan_unchecked, isolate_then_extract_with, unbalanced_size, validate,
    MeasurementPlan, RepeaterTree, TreeJson, VertexKind,
};

const EXIT_VERIFY: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_USAGE: u8 = 3;

#[derive(Parser)]
#[command(name = "ghzw", version, about = "GHZ routing planner for graph-state networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Format {
    Text,
    Json,
    Dot,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Label an n x n lattice, derive the repeater tree and its plan.
    GridPlan(GridPlanArgs),
    /// Verify a repeater tree or claimed GHZ star, optionally with the
    /// state-vector oracle.
    Verify(VerifyArgs),
    /// CSV sweep comparing the construction size against the prior bounds.
    Compare(CompareArgs),
    /// Route a GHZ state to a set of terminals in a network graph.
    Route(RouteArgs),
    /// Closed-form repeater tree sizes.
    TreeSize(TreeSizeArgs),
}

#[derive(Args)]
struct GridPlanArgs {
    /// Grid side length.
    n: usize,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct VerifyArgs {
    /// Path to a tree JSON ({"root",...}) or graph JSON ({"vertices",...}).
    #[arg(required_unless_present = "grid", conflicts_with = "grid")]
    input: Option<String>,
    /// Verify the full grid pipeline for this side length instead.
    #[arg(long)]
    grid: Option<usize>,
    /// Also certify with the state-vector oracle (register caps apply).
    #[arg(long)]
    oracle: bool,
    /// Override the oracle register cap (default 16; env GHZW_ORACLE_CAP).
    #[arg(long)]
    oracle_cap: Option<usize>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long, default_value = "60")]
    max_n: usize,
}

#[derive(Args)]
struct RouteArgs {
    /// Path to the network graph JSON.
    network: String,
    /// Comma-separated terminal vertex ids.
    #[arg(long, value_delimiter = ',', required = true)]
    terminals: Vec<u32>,
    /// Reject routes consuming more than this many vertices.
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct TreeSizeArgs {
    #[command(subcommand)]
    which: TreeSizeCommand,
}

#[derive(Subcommand)]
enum TreeSizeCommand {
    /// Balanced tree: m branches per level, k levels.
    Balanced { m: u64, k: u32 },
    /// Unbalanced tree: n vertices, m root branches.
    Unbalanced { n: u64, m: u64 },
    /// CSV sweep of balanced sizes for m = 1..=m_max, k = 0..=k_max.
    Sweep {
        #[arg(long, default_value = "6")]
        m_max: u64,
        #[arg(long, default_value = "6")]
        k_max: u32,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // Help/version are successful exits; real parse errors are usage
            // errors with the dedicated code.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::GridPlan(a) => cmd_grid_plan(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Compare(a) => cmd_compare(&a),
        Command::Route(a) => cmd_route(&a),
        Command::TreeSize(a) => cmd_tree_size(&a),
    }
}

fn oracle_cap(flag: Option<usize>) -> usize {
    flag.or_else(|| {
        std::env::var("GHZW_ORACLE_CAP")
            .ok()
            .and_then(|s| s.parse().ok())
    })
    .unwrap_or(DEFAULT_QUBIT_CAP)
}

// --- grid-plan ---

fn cmd_grid_plan(a: &GridPlanArgs) -> ExitCode {
    let lg = match build_grid_labels(a.n) {
        Ok(lg) => lg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let tree = tree_from_labels(&lg);
    let report = size_report(a.n);
    match a.format {
        Format::Dot => {
            print!("{}", grid_dot(&lg));
        }
        Format::Json => {
            let tree_json = tree.as_ref().ok().map(|t| TreeJson::from(t));
            let plan = tree.as_ref().ok().map(extract_plan_unchecked);
            let out = serde_json::json!({
                "n": a.n,
                "labels": LabeledGridJson::from(&lg),
                "degenerate": lg.is_degenerate(),
                "skipped_writes": lg.skipped_writes,
                "tree": tree_json,
                "plan": plan,
                "size_report": report,
                "construction_error": tree.as_ref().err().map(|e| e.to_string()),
            });
            println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
        }
        Format::Text | Format::Csv => {
            print!("{}", lg.render());
            println!("size_report: L_B={} L_M={} L_Mc={} L_0={}", report.l_b, report.l_m, report.l_m_corrected, report.l_0);
            match &tree {
                Ok(t) => {
                    let plan = extract_plan_unchecked(t);
                    println!("tree: {}", t.to_json());
                    println!(
                        "plan: {} X measurements, expected GHZ size {}",
                        plan.steps.len(),
                        plan.expected_size
                    );
                }
                Err(e) => println!("construction error: {e}"),
            }
        }
    }
    if lg.is_degenerate() {
        eprintln!(
            "degenerate-case report: {} out-of-grid writes skipped",
            lg.skipped_writes.len()
        );
        return ExitCode::from(EXIT_VERIFY);
    }
    if let Err(e) = tree {
        eprintln!("construction violation for n={}: {e}", a.n);
        return ExitCode::from(EXIT_VERIFY);
    }
    ExitCode::SUCCESS
}

// --- verify ---

fn cmd_verify(a: &VerifyArgs) -> ExitCode {
    let cap = oracle_cap(a.oracle_cap);
    if let Some(n) = a.grid {
        return verify_grid(n, a.oracle, cap);
    }
    let path = a.input.as_deref().expect("clap enforces input xor grid");
    let raw = match std::fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: cannot read {path}: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let looks_like_tree = serde_json::from_str::<serde_json::Value>(&raw)
        .ok()
        .map(|v| v.get("root").is_some())
        .unwrap_or(false);
    if looks_like_tree {
        match RepeaterTree::from_json(&raw) {
            Ok(t) => verify_tree(&t, a.oracle, cap),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_USAGE)
            }
        }
    } else {
        match Graph::from_json(&raw) {
            Ok(g) => verify_star(&g, a.oracle, cap),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_USAGE)
            }
        }
    }
}

fn verify_tree(t: &RepeaterTree, oracle: bool, cap: usize) -> ExitCode {
    let violations = validate(t);
    if !violations.is_empty() {
        for v in &violations {
            println!("FAIL {v}");
        }
        return ExitCode::from(EXIT_VERIFY);
    }
    println!("PASS tree conditions");
    let plan = extract_plan_unchecked(t);
    let star = match t.underlying.apply_plan(&plan.steps) {
        Ok((g, _)) => g,
        Err(e) => {
            println!("FAIL extraction: {e}");
            return ExitCode::from(EXIT_VERIFY);
        }
    };
    if star.is_star().is_none() || star.len() != plan.expected_size {
        println!(
            "FAIL extraction produced {} vertices, star: {}",
            star.len(),
            star.is_star().is_some()
        );
        return ExitCode::from(EXIT_VERIFY);
    }
    println!("PASS extraction to a {}-party star", star.len());
    if oracle {
        match certify_plan(&t.underlying, &plan, cap) {
            Ok(center) => println!("PASS oracle GHZ certification (center {center})"),
            Err(msg) => {
                println!("FAIL oracle: {msg}");
                return ExitCode::from(EXIT_VERIFY);
            }
        }
    }
    ExitCode::SUCCESS
}

fn verify_star(g: &Graph, oracle: bool, cap: usize) -> ExitCode {
    let Some(center) = g.is_star() else {
        println!("FAIL graph is not a star");
        return ExitCode::from(EXIT_VERIFY);
    };
    println!("PASS star with center {center} over {} vertices", g.len());
    if oracle {
        let state = match build_graph_state_with_cap(g, cap) {
            Ok(s) => s,
            Err(e) => {
                println!("FAIL oracle: {e}");
                return ExitCode::from(EXIT_VERIFY);
            }
        };
        match is_ghz_up_to_hadamards(&state, center) {
            Ok(true) => println!("PASS oracle GHZ check"),
            Ok(false) => {
                println!("FAIL oracle GHZ check");
                return ExitCode::from(EXIT_VERIFY);
            }
            Err(e) => {
                println!("FAIL oracle: {e}");
                return ExitCode::from(EXIT_VERIFY);
            }
        }
    }
    ExitCode::SUCCESS
}

fn verify_grid(n: usize, oracle: bool, cap: usize) -> ExitCode {
    let lg = match build_grid_labels(n) {
        Ok(lg) => lg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let t = match tree_from_labels(&lg) {
        Ok(t) => t,
        Err(e) => {
            println!("FAIL {e}");
            return ExitCode::from(EXIT_VERIFY);
        }
    };
    let host = grid_graph(n);
    let plan = match isolate_then_extract_with(&host, &t, extract_plan_unchecked(&t)) {
        Ok(p) => p,
        Err(e) => {
            println!("FAIL {e}");
            return ExitCode::from(EXIT_VERIFY);
        }
    };
    let star = match host.apply_plan(&plan.steps) {
        Ok((g, _)) => g,
        Err(e) => {
            println!("FAIL extraction: {e}");
            return ExitCode::from(EXIT_VERIFY);
        }
    };
    if star.is_star().is_none() {
        println!("FAIL extraction did not produce a star");
        return ExitCode::from(EXIT_VERIFY);
    }
    println!("PASS {n}x{n} grid extracts to a {}-party star", star.len());
    if oracle {
        match certify_plan(&host, &plan, cap) {
            Ok(center) => println!("PASS oracle GHZ certification (center {center})"),
            Err(msg) => {
                println!("FAIL oracle: {msg}");
                return ExitCode::from(EXIT_VERIFY);
            }
        }
    }
    ExitCode::SUCCESS
}

/// Simulate a plan on the state vector, realigning after every step with a
/// local-Clifford witness against the graph-calculus prediction, and check
/// the final state is GHZ. Returns the star center.
fn certify_plan(start: &Graph, plan: &MeasurementPlan, cap: usize) -> Result<u32, String> {
    let mut graph = start.clone();
    let mut state: StateVector =
        build_graph_state_with_cap(start, cap).map_err(|e| e.to_string())?;
    for step in &plan.steps {
        let (next_graph, chosen) = match step.basis {
            Pauli::Z => (graph.z_measure(step.target).map_err(|e| e.to_string())?, None),
            Pauli::Y => (graph.y_measure(step.target).map_err(|e| e.to_string())?, None),
            Pauli::X => {
                let (h, u) = graph
                    .x_measure(step.target, step.special_neighbor)
                    .map_err(|e| e.to_string())?;
                (h, Some(u))
            }
        };
        let (post, _) = measure_pauli(&state, step.target, step.basis, Outcome::Plus)
            .map_err(|e| e.to_string())?;
        let expected = build_graph_state_with_cap(&next_graph, cap).map_err(|e| e.to_string())?;
        let mut search: BTreeSet<u32> = graph.neighbors(step.target).collect();
        if let Some(u) = chosen {
            search.extend(graph.neighbors(u));
        }
        search.remove(&step.target);
        let witness = equal_up_to_local_clifford(&expected, &post, &search)
            .map_err(|e| e.to_string())?
            .ok_or_else(|| format!("step at vertex {} not certified", step.target))?;
        state = witness.apply(&post).map_err(|e| e.to_string())?;
        graph = next_graph;
    }
    let center = graph
        .is_star()
        .ok_or_else(|| "final graph is not a star".to_string())?;
    match is_ghz_up_to_hadamards(&state, center) {
        Ok(true) => Ok(center),
        Ok(false) => Err("final state is not GHZ".to_string()),
        Err(e) => Err(e.to_string()),
    }
}

// --- compare ---

fn cmd_compare(a: &CompareArgs) -> ExitCode {
    if a.max_n < 1 {
        eprintln!("error: --max-n must be at least 1");
        return ExitCode::from(EXIT_USAGE);
    }
    print!("{}", size_report_csv(&size_report_sweep(a.max_n)));
    ExitCode::SUCCESS
}

// --- route ---

fn cmd_route(a: &RouteArgs) -> ExitCode {
    let raw = match std::fs::read_to_string(&a.network) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", a.network);
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let network = match Graph::from_json(&raw) {
        Ok(g) => g,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let req = RoutingRequest {
        network: network.clone(),
        terminals: a.terminals.iter().copied().collect(),
        budget: a.budget,
    };
    let result = match find_repeater_spanning_tree(&req) {
        Ok(r) => r,
        Err(RoutingError::BadRequest(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_USAGE);
        }
        Err(RoutingError::Infeasible(msg)) => {
            eprintln!("infeasible: {msg}");
            return ExitCode::from(EXIT_INFEASIBLE);
        }
    };
    match a.format {
        Format::Dot => {
            let tree_vs: BTreeSet<u32> = result.tree.underlying.vertices().collect();
            print!(
                "{}",
                network.to_dot("route", |v| {
                    let style = if !tree_vs.contains(&v) {
                        ""
                    } else if result.tree.kind_of(v) == VertexKind::HType {
                        "shape=diamond"
                    } else {
                        "style=filled"
                    };
                    (v.to_string(), style.to_string())
                })
            );
        }
        _ => {
            let out = serde_json::json!({
                "tree": TreeJson::from(&result.tree),
                "consumed": result.consumed,
                "residual": serde_json::from_str::<serde_json::Value>(&result.residual.to_json())
                    .expect("graph JSON is valid"),
                "plan": result.plan,
                "exact": result.exact,
            });
            println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
        }
    }
    ExitCode::SUCCESS
}

// --- tree-size ---

fn cmd_tree_size(a: &TreeSizeArgs) -> ExitCode {
    match a.which {
        TreeSizeCommand::Balanced { m, k } => {
            if m < 1 {
                eprintln!("error: m must be at least 1");
                return ExitCode::from(EXIT_USAGE);
            }
            let (n, size) = balanced_size(m, k);
            println!("n={n}, size={size}");
        }
        TreeSizeCommand::Unbalanced { n, m } => {
            println!("n={n}, size={}", unbalanced_size(n, m));
        }
        TreeSizeCommand::Sweep { m_max, k_max } => {
            println!("m,k,n,size");
            for m in 1..=m_max {
                for k in 0..=k_max {
                    let (n, size) = balanced_size(m, k);
                    println!("{m},{k},{n},{size}");
                }
            }
        }
    }
    ExitCode::SUCCESS
}
