//! Round-synchronous execution of node-local algorithms under the PN, PO
//! and LOCAL models.
//!
//! A round consists of delivering every pending outbox and then stepping
//! every running node on its inbox. Outboxes of round `r` are produced by
//! the steps of round `r - 1` (or by `start` for round 1), so all nodes move
//! in lock step. A node that halts sends nothing afterwards.
//!
//! Loops need no special casing: the incidence table of a loop at `v` points
//! from its outgoing port to its incoming port and back, so `v` receives on
//! one side exactly what it sent on the other side in the same round. This
//! is what every lift of `v` in the unfolded graph would receive, because
//! all lifts of a node share one state.

use std::fmt;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{EdgeId, NodeId, PortGraph, Side};
use crate::rational::Rat;
use crate::verify::EdgeAssignment;

/// An opaque message.
pub type Message = Vec<u8>;

/// One optional message per port; index `p - 1` is port `p`.
pub type Mailbox = Vec<Option<Message>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Pn,
    Po,
    Local,
}

impl std::str::FromStr for Model {
    type Err = String;
    fn from_str(s: &str) -> Result<Model, String> {
        match s.to_ascii_lowercase().as_str() {
            "pn" => Ok(Model::Pn),
            "po" => Ok(Model::Po),
            "local" => Ok(Model::Local),
            other => Err(format!("unknown model '{other}' (expected pn, po or local)")),
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Pn => "pn",
            Model::Po => "po",
            Model::Local => "local",
        })
    }
}

/// Everything a node knows before the first round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeView {
    pub degree: usize,
    /// Per port, whether the edge is outgoing. PO and LOCAL only.
    pub outgoing: Option<Vec<bool>>,
    /// Unique identifier. LOCAL only.
    pub id: Option<u64>,
    /// Side of a supplied 2-colouring, when the run was given one.
    pub color: Option<Side>,
}

impl NodeView {
    pub fn anonymous(degree: usize) -> NodeView {
        NodeView { degree, outgoing: None, id: None, color: None }
    }
}

/// Reasons a node program gives up.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum Fault {
    #[error("degree {degree} exceeds the supported maximum {max}")]
    Degree { degree: usize, max: usize },
    #[error("missing input: {0}")]
    MissingInput(String),
    #[error("malformed message: {0}")]
    Protocol(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decision {
    Continue,
    /// Final output, one value per port.
    Halt(Vec<Rat>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub outbox: Mailbox,
    pub decision: Decision,
}

impl Step {
    pub fn send(outbox: Mailbox) -> Step {
        Step { outbox, decision: Decision::Continue }
    }

    pub fn halt(output: Vec<Rat>) -> Step {
        Step { outbox: Vec::new(), decision: Decision::Halt(output) }
    }
}

/// State machine running at one node.
pub trait NodeProgram: Send + fmt::Debug {
    /// Produces the messages of round 1, or halts without communicating.
    fn start(&mut self) -> Result<Step, Fault>;

    /// Consumes the messages of the current round and produces those of the
    /// next one.
    fn step(&mut self, inbox: &[Option<Message>]) -> Result<Step, Fault>;
}

/// A deterministic distributed algorithm: a factory of node programs.
pub trait Algorithm: Send + Sync {
    fn name(&self) -> String;

    /// Largest number of rounds the algorithm can take, when known
    /// independently of the graph.
    fn round_bound(&self) -> Option<usize>;

    fn init(&self, view: &NodeView) -> Box<dyn NodeProgram>;
}

impl<A: Algorithm + ?Sized> Algorithm for Box<A> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn round_bound(&self) -> Option<usize> {
        (**self).round_bound()
    }
    fn init(&self, view: &NodeView) -> Box<dyn NodeProgram> {
        (**self).init(view)
    }
}

impl<A: Algorithm + ?Sized> Algorithm for std::sync::Arc<A> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn round_bound(&self) -> Option<usize> {
        (**self).round_bound()
    }
    fn init(&self, view: &NodeView) -> Box<dyn NodeProgram> {
        (**self).init(view)
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub max_rounds: usize,
    /// Identifiers for LOCAL runs; generated from `id_seed` when absent.
    pub ids: Option<Vec<u64>>,
    pub id_seed: u64,
    pub coloring: Option<Vec<Side>>,
    pub trace: bool,
    pub parallel: bool,
}

impl Default for RunOptions {
    fn default() -> RunOptions {
        RunOptions { max_rounds: 100_000, ids: None, id_seed: 0, coloring: None, trace: false, parallel: true }
    }
}

impl RunOptions {
    pub fn with_max_rounds(max_rounds: usize) -> RunOptions {
        RunOptions { max_rounds, ..RunOptions::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceRecord {
    pub round: usize,
    pub node: NodeId,
    pub state_digest: String,
    pub outbox_sizes: Vec<usize>,
    pub halted: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunResult {
    pub assignment: EdgeAssignment,
    pub rounds: usize,
    pub halting_rounds: Vec<usize>,
    pub trace: Option<Vec<TraceRecord>>,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("graph contains loops; use run_loopy")]
    LoopsNotAllowed,
    #[error("the LOCAL model is not defined on loopy graphs")]
    LocalOnLoopy,
    #[error("round budget of {0} exceeded")]
    RoundBudget(usize),
    #[error("node {node} faulted in round {round}: {fault}")]
    Fault { node: NodeId, round: usize, fault: Fault },
    #[error("node {node} produced {got} outputs for {expected} ports")]
    OutputArity { node: NodeId, expected: usize, got: usize },
    #[error("endpoints disagree on edge {edge}: {left} vs {right}")]
    OutputMismatch { edge: EdgeId, left: Rat, right: Rat },
    #[error("invalid identifiers: {0}")]
    BadIds(String),
    #[error("colouring has {got} entries for {expected} nodes")]
    BadColoring { expected: usize, got: usize },
}

/// Deterministic pseudorandom injection of `n` nodes into `{1, ..., n^3}`.
pub fn generate_ids(n: usize, seed: u64) -> Vec<u64> {
    if n == 0 {
        return Vec::new();
    }
    let space = (n as u64).saturating_pow(3).min(usize::MAX as u64) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample(&mut rng, space, n).into_iter().map(|x| x as u64 + 1).collect()
}

/// Runs `alg` on a loop-free graph.
pub fn run<A: Algorithm + ?Sized>(
    g: &PortGraph,
    alg: &A,
    model: Model,
    opts: &RunOptions,
) -> Result<RunResult, SimError> {
    if g.has_loops() {
        return Err(SimError::LoopsNotAllowed);
    }
    execute(g, alg, model, opts)
}

/// Runs `alg` on a graph that may contain loops, with the output on each
/// loop defined by the infinite unfolding of the loops.
pub fn run_loopy<A: Algorithm + ?Sized>(
    g: &PortGraph,
    alg: &A,
    model: Model,
    opts: &RunOptions,
) -> Result<RunResult, SimError> {
    if model == Model::Local {
        return Err(SimError::LocalOnLoopy);
    }
    execute(g, alg, model, opts)
}

fn views(g: &PortGraph, model: Model, opts: &RunOptions) -> Result<Vec<NodeView>, SimError> {
    let n = g.node_count();
    let ids = match model {
        Model::Local => {
            let ids = opts.ids.clone().unwrap_or_else(|| generate_ids(n, opts.id_seed));
            if ids.len() != n {
                return Err(SimError::BadIds(format!("{} identifiers for {n} nodes", ids.len())));
            }
            let mut sorted = ids.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(SimError::BadIds("identifiers are not unique".into()));
            }
            Some(ids)
        }
        _ => None,
    };
    if let Some(c) = &opts.coloring {
        if c.len() != n {
            return Err(SimError::BadColoring { expected: n, got: c.len() });
        }
    }
    Ok(g.nodes()
        .map(|v| NodeView {
            degree: g.degree(v),
            outgoing: (model != Model::Pn).then(|| g.outgoing_flags(v)),
            id: ids.as_ref().map(|ids| ids[v]),
            color: opts.coloring.as_ref().map(|c| c[v]),
        })
        .collect())
}

fn digest(program: &dyn NodeProgram) -> String {
    // FNV-1a over the debug rendering of the state.
    let mut h: u64 = 0xcbf29ce484222325;
    for b in format!("{program:?}").bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

struct Slot {
    program: Box<dyn NodeProgram>,
    outbox: Option<Mailbox>,
    output: Option<Vec<Rat>>,
    halted_at: usize,
}

impl Slot {
    fn apply(&mut self, node: NodeId, degree: usize, round: usize, step: Step) -> Result<(), SimError> {
        match step.decision {
            Decision::Continue => {
                let mut outbox = step.outbox;
                outbox.resize(degree, None);
                self.outbox = Some(outbox);
            }
            Decision::Halt(out) => {
                if out.len() != degree {
                    return Err(SimError::OutputArity { node, expected: degree, got: out.len() });
                }
                self.outbox = None;
                self.output = Some(out);
                self.halted_at = round;
            }
        }
        Ok(())
    }
}

fn execute<A: Algorithm + ?Sized>(
    g: &PortGraph,
    alg: &A,
    model: Model,
    opts: &RunOptions,
) -> Result<RunResult, SimError> {
    let n = g.node_count();
    let mut slots: Vec<Slot> = views(g, model, opts)?
        .iter()
        .map(|view| Slot { program: alg.init(view), outbox: None, output: None, halted_at: 0 })
        .collect();
    let mut trace = opts.trace.then(Vec::new);

    let starts: Vec<Result<Step, Fault>> = if opts.parallel {
        slots.par_iter_mut().map(|s| s.program.start()).collect()
    } else {
        slots.iter_mut().map(|s| s.program.start()).collect()
    };
    for (v, step) in starts.into_iter().enumerate() {
        let step = step.map_err(|fault| SimError::Fault { node: v, round: 0, fault })?;
        slots[v].apply(v, g.degree(v), 0, step)?;
    }
    record(&mut trace, 0, &slots);

    let mut round = 0;
    while slots.iter().any(|s| s.output.is_none()) {
        round += 1;
        if round > opts.max_rounds {
            return Err(SimError::RoundBudget(opts.max_rounds));
        }
        let inboxes: Vec<Option<Mailbox>> = (0..n)
            .map(|v| {
                slots[v].output.is_none().then(|| {
                    g.incidences(v)
                        .iter()
                        .map(|inc| {
                            slots[inc.peer]
                                .outbox
                                .as_ref()
                                .and_then(|out| out[inc.peer_port - 1].clone())
                        })
                        .collect()
                })
            })
            .collect();
        let stepper = |(slot, inbox): (&mut Slot, &Option<Mailbox>)| {
            inbox.as_ref().map(|inbox| slot.program.step(inbox))
        };
        let steps: Vec<Option<Result<Step, Fault>>> = if opts.parallel {
            slots.par_iter_mut().zip(inboxes.par_iter()).map(stepper).collect()
        } else {
            slots.iter_mut().zip(inboxes.iter()).map(stepper).collect()
        };
        for (v, step) in steps.into_iter().enumerate() {
            if let Some(step) = step {
                let step = step.map_err(|fault| SimError::Fault { node: v, round, fault })?;
                slots[v].apply(v, g.degree(v), round, step)?;
            }
        }
        record(&mut trace, round, &slots);
    }

    let outputs: Vec<Vec<Rat>> = slots.iter_mut().map(|s| s.output.take().expect("halted")).collect();
    let mut values = Vec::with_capacity(g.edge_count());
    for (id, e) in g.edges().iter().enumerate() {
        let left = &outputs[e.u][e.pu - 1];
        let right = &outputs[e.v][e.pv - 1];
        if left != right {
            return Err(SimError::OutputMismatch { edge: id, left: left.clone(), right: right.clone() });
        }
        values.push(left.clone());
    }
    let halting_rounds: Vec<usize> = slots.iter().map(|s| s.halted_at).collect();
    Ok(RunResult {
        assignment: EdgeAssignment::new(values),
        rounds: halting_rounds.iter().copied().max().unwrap_or(0),
        halting_rounds,
        trace,
    })
}

fn record(trace: &mut Option<Vec<TraceRecord>>, round: usize, slots: &[Slot]) {
    let Some(trace) = trace else { return };
    for (node, s) in slots.iter().enumerate() {
        // halted nodes appear once, in the round they stopped
        if s.output.is_some() && s.halted_at != round {
            continue;
        }
        trace.push(TraceRecord {
            round,
            node,
            state_digest: digest(s.program.as_ref()),
            outbox_sizes: s
                .outbox
                .as_ref()
                .map(|o| o.iter().map(|m| m.as_ref().map_or(0, Vec::len)).collect())
                .unwrap_or_default(),
            halted: s.output.is_some(),
        });
    }
}

/// Writes a trace as JSON lines.
pub fn trace_to_jsonl(trace: &[TraceRecord]) -> String {
    let mut out = String::new();
    for r in trace {
        out.push_str(&serde_json::to_string(r).expect("serializable"));
        out.push('\n');
    }
    out
}
