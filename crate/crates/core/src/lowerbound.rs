//! The loopy-graph chain `G_0, G_1, ...` that forces ever larger even parts
//! in the denominators of any uniform PO algorithm's output.
//!
//! `G_0` is one node with `d` loops. Every node of a loopy graph is
//! saturated, so at the node `2 a_1 + ... + 2 a_d = 1` and some loop value
//! has a denominator divisible by 2. Given a node `v` whose loop `ℓ` has
//! class `j`, `G_{i+1}` removes `ℓ`, takes `2T + 3` copies and threads a
//! directed path through the copies of `v`. An algorithm with running time
//! `T` cannot tell the middle copy from `v`, so the path edges at the root
//! carry the value of `ℓ`; walking away from the root along edges whose
//! class does not drop must end at a loop of strictly larger class.

use serde::Serialize;
use thiserror::Error;

use crate::graph::{is_forest_ignoring_loops, EdgeId, GraphError, NodeId, PortGraph, RawGraph};
use crate::rational::Rat;
use crate::sim::{run_loopy, Algorithm, Model, RunOptions};
use crate::verify::{verify, EdgeAssignment, VerifyError, VerifyReport};

#[derive(Debug, Error)]
pub enum LowerBoundError {
    #[error("edge {0} is not a loop at node {1}")]
    NotALoop(EdgeId, NodeId),
    #[error("no loop of class above {threshold}: the assignment cannot be a maximal fractional matching")]
    TheoryViolation { threshold: u64 },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

/// `d` loops on a single node; loop `k` uses ports `2k - 1` (out) and `2k`
/// (in).
pub fn make_g0(d: usize) -> PortGraph {
    crate::generate::g0(d)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FineLoop {
    pub node: NodeId,
    pub edge: EdgeId,
    pub value: Rat,
    pub class: u64,
    /// Nodes visited by the walk, starting at the root.
    pub path: Vec<NodeId>,
    /// The walk got stuck and the loop came from a global scan instead.
    pub walk_failed: bool,
}

/// Walks from `root` keeping the invariant that the last edge taken has
/// class `n >= threshold`: at each node either a loop has class above `n`
/// (returned) or some other tree edge has class at least `n` (followed).
pub fn find_fine_loop(g: &PortGraph, x: &EdgeAssignment, root: NodeId, threshold: u64) -> Result<FineLoop, LowerBoundError> {
    let class = |e: EdgeId| x.get(e).class_index();
    let found = |v: NodeId, e: EdgeId, path: Vec<NodeId>, walk_failed| FineLoop {
        node: v,
        edge: e,
        value: x.get(e).clone(),
        class: class(e),
        path,
        walk_failed,
    };

    let mut v = root;
    let mut came_from: Option<EdgeId> = None;
    let mut n = threshold;
    let mut path = vec![root];
    // the loop-free part is a tree, so the walk visits each node once
    for _ in 0..=g.node_count() {
        if let Some(e) = g.loops_at(v).into_iter().find(|&e| class(e) > n) {
            return Ok(found(v, e, path, false));
        }
        let next = g
            .incidences(v)
            .iter()
            .find(|inc| inc.peer != v && Some(inc.edge) != came_from && class(inc.edge) >= n);
        let Some(inc) = next else { break };
        n = class(inc.edge);
        came_from = Some(inc.edge);
        v = inc.peer;
        path.push(v);
    }

    for (e, edge) in g.edges().iter().enumerate() {
        if edge.is_loop() && class(e) > threshold {
            return Ok(found(edge.u, e, path, true));
        }
    }
    Err(LowerBoundError::TheoryViolation { threshold })
}

/// Removes `loop_id` at `v_prev`, makes `2T + 3` copies and joins the copies
/// of `v_prev` by a directed path through the freed port slots. Copy `k`
/// holds nodes `k * n .. (k + 1) * n`; the root is copy `T + 1`.
pub fn build_next(g_prev: &PortGraph, v_prev: NodeId, loop_id: EdgeId, t: usize) -> Result<(PortGraph, NodeId), LowerBoundError> {
    if loop_id >= g_prev.edge_count() {
        return Err(GraphError::UnknownEdge(loop_id).into());
    }
    let ell = g_prev.edge(loop_id);
    if !ell.is_loop() || ell.u != v_prev {
        return Err(LowerBoundError::NotALoop(loop_id, v_prev));
    }
    let (_, p_out) = ell.tail();
    let (_, p_in) = ell.head();
    let n = g_prev.node_count();
    let copies = 2 * t + 3;

    // port of v_prev in copy k once an unused freed slot is squeezed out
    let remap = |k: usize, p: usize| -> usize {
        let missing = if k == 0 {
            Some(p_in)
        } else if k == copies - 1 {
            Some(p_out)
        } else {
            None
        };
        match missing {
            Some(m) if p > m => p - 1,
            _ => p,
        }
    };
    let port = |k: usize, w: NodeId, p: usize| if w == v_prev { remap(k, p) } else { p };

    let mut raw = RawGraph::new(copies * n);
    for k in 0..copies {
        for (id, e) in g_prev.edges().iter().enumerate() {
            if id == loop_id {
                continue;
            }
            raw.edge(k * n + e.u, port(k, e.u, e.pu), k * n + e.v, port(k, e.v, e.pv), e.orientation);
        }
    }
    for k in 0..copies - 1 {
        raw.edge(
            k * n + v_prev,
            remap(k, p_out),
            (k + 1) * n + v_prev,
            remap(k + 1, p_in),
            crate::graph::Orientation::UV,
        );
    }
    Ok((raw.build()?, (t + 1) * n + v_prev))
}

/// Violations of the chain invariants for level `i`: maximum degree `2d`,
/// the loop-free part a forest, at least `d - i` loops per node.
pub fn chain_violations(g: &PortGraph, d: usize, i: usize) -> Vec<String> {
    let mut out = Vec::new();
    if g.max_degree() > 2 * d {
        out.push(format!("maximum degree {} exceeds {}", g.max_degree(), 2 * d));
    }
    if !is_forest_ignoring_loops(g) {
        out.push("loop-free part has a cycle".into());
    }
    let need = d.saturating_sub(i);
    if let Some(v) = g.nodes().find(|&v| g.loops_at(v).len() < need) {
        out.push(format!("node {v} has {} loops, fewer than {need}", g.loops_at(v).len()));
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct LbLevel {
    pub index: usize,
    pub nodes: usize,
    pub edges: usize,
    /// `T` used to build this level; absent for level 0.
    pub t: Option<usize>,
    pub rounds: usize,
    pub root: NodeId,
    pub fine_loop: Option<FineLoop>,
    #[serde(skip)]
    pub graph: PortGraph,
    #[serde(skip)]
    pub assignment: Option<EdgeAssignment>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LbOutcome {
    Completed,
    /// The algorithm's output is not a maximal fractional matching.
    VerifyFailed { level: usize, message: String, report: Option<Box<VerifyReport>> },
    TheoryViolation { level: usize, message: String },
    EngineFault { level: usize, message: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct LbChainReport {
    pub d: usize,
    pub algorithm: String,
    pub levels: Vec<LbLevel>,
    pub outcome: LbOutcome,
    /// Largest class of any value emitted on any level.
    pub max_class: u64,
    /// Some traced loop reached class `d`, i.e. even denominator part `2^d`.
    pub reached_bound: bool,
}

#[derive(Clone, Debug)]
pub struct HarnessOptions {
    /// Fixed `T` for every level; otherwise the rounds measured on the
    /// previous level plus `margin`.
    pub t_override: Option<usize>,
    pub margin: usize,
    pub model: Model,
    pub max_rounds: usize,
}

impl Default for HarnessOptions {
    fn default() -> HarnessOptions {
        HarnessOptions { t_override: None, margin: 2, model: Model::Po, max_rounds: 100_000 }
    }
}

/// Runs `alg` along the chain `G_0 .. G_{d-1}`, stopping at the first level
/// whose output fails verification.
pub fn harness(alg: &dyn Algorithm, d: usize, opts: &HarnessOptions) -> LbChainReport {
    let mut report = LbChainReport {
        d,
        algorithm: alg.name(),
        levels: Vec::new(),
        outcome: LbOutcome::Completed,
        max_class: 0,
        reached_bound: false,
    };
    let run_opts = RunOptions::with_max_rounds(opts.max_rounds);
    let mut graph = make_g0(d);
    let mut root = 0;
    let mut t = None;
    for i in 0..d {
        let level = i;
        let res = match run_loopy(&graph, alg, opts.model, &run_opts) {
            Ok(res) => res,
            Err(e) => {
                report.outcome = LbOutcome::EngineFault { level, message: e.to_string() };
                break;
            }
        };
        report.max_class = report.max_class.max(res.assignment.values().iter().map(Rat::class_index).max().unwrap_or(0));
        let mut entry = LbLevel {
            index: i,
            nodes: graph.node_count(),
            edges: graph.edge_count(),
            t,
            rounds: res.rounds,
            root,
            fine_loop: None,
            graph: graph.clone(),
            assignment: Some(res.assignment.clone()),
        };
        let verdict = match verify(&graph, &res.assignment, None) {
            Ok(v) => v,
            Err(e) => {
                report.levels.push(entry);
                report.outcome = LbOutcome::VerifyFailed { level, message: e.to_string(), report: None };
                break;
            }
        };
        if !(verdict.feasible && verdict.maximal) {
            report.levels.push(entry);
            let message = if verdict.feasible { "not maximal" } else { "not feasible" };
            report.outcome = LbOutcome::VerifyFailed { level, message: message.into(), report: Some(Box::new(verdict)) };
            break;
        }
        let fine = match find_fine_loop(&graph, &res.assignment, root, i as u64) {
            Ok(f) => f,
            Err(e) => {
                report.levels.push(entry);
                report.outcome = LbOutcome::TheoryViolation { level, message: e.to_string() };
                break;
            }
        };
        if fine.class >= d as u64 {
            report.reached_bound = true;
        }
        entry.fine_loop = Some(fine.clone());
        report.levels.push(entry);
        if i + 1 == d {
            break;
        }
        let next_t = opts.t_override.unwrap_or(res.rounds + opts.margin);
        match build_next(&graph, fine.node, fine.edge, next_t) {
            Ok((g, r)) => {
                let bad = chain_violations(&g, d, i + 1);
                if !bad.is_empty() {
                    report.outcome = LbOutcome::TheoryViolation { level: i + 1, message: bad.join("; ") };
                    break;
                }
                graph = g;
                root = r;
                t = Some(next_t);
            }
            Err(e) => {
                report.outcome = LbOutcome::TheoryViolation { level: i + 1, message: e.to_string() };
                break;
            }
        }
    }
    report
}
