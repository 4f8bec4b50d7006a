//! Reduction from maximum degree `2d + 1` to `2d`.
//!
//! An edge entering `u` on port `i` and `v` on port `j` gets the label
//! `{i, j}`. Within one label every node has at most two edges, so each
//! label class is a union of paths and cycles. Edges whose endpoints both
//! have two edges of their label are "Mid"; the rest are "End". Every node
//! of degree `2d + 1` has an odd number of ports, so at least one of its
//! labels is used once and the Mid subgraph has maximum degree `2d`.
//! After solving it recursively, the End edges are filled in greedily one
//! label at a time with `x(e) = min(1 - x[u], 1 - x[v])`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::wire::{expect, Writer};
use super::{check_degree, Embedded};
use crate::graph::{EdgeId, PortGraph, Port};
use crate::rational::Rat;
use crate::sim::{Algorithm, Fault, Mailbox, Message, NodeProgram, NodeView, Step};

/// Unordered pair of port numbers, stored as `lo <= hi`. The derived order
/// is the canonical processing order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeLabel {
    pub lo: Port,
    pub hi: Port,
}

impl EdgeLabel {
    pub fn new(i: Port, j: Port) -> EdgeLabel {
        EdgeLabel { lo: i.min(j), hi: i.max(j) }
    }

    /// All labels over ports `1..=delta`, in canonical order.
    pub fn all(delta: usize) -> Vec<EdgeLabel> {
        (1..=delta).flat_map(|i| (i..=delta).map(move |j| EdgeLabel { lo: i, hi: j })).collect()
    }
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}", self.lo, self.hi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeType {
    Mid,
    End,
}

/// Number of ports of `v` that carry `label`. Only ports `lo` and `hi` can.
fn label_degree(g: &PortGraph, labels: &[EdgeLabel], v: usize, label: EdgeLabel) -> usize {
    g.incidences(v).iter().filter(|inc| labels[inc.edge] == label).count()
}

/// Label and type of every edge, computed centrally.
pub fn classify_edges(g: &PortGraph) -> Vec<(EdgeLabel, EdgeType)> {
    let labels: Vec<EdgeLabel> = g.edges().iter().map(|e| EdgeLabel::new(e.pu, e.pv)).collect();
    g.edges()
        .iter()
        .enumerate()
        .map(|(id, e)| {
            let l = labels[id];
            let mid = label_degree(g, &labels, e.u, l) == 2 && label_degree(g, &labels, e.v, l) == 2;
            (l, if mid { EdgeType::Mid } else { EdgeType::End })
        })
        .collect()
}

/// Edges of type Mid.
pub fn mid_edges(g: &PortGraph) -> Vec<EdgeId> {
    classify_edges(g)
        .iter()
        .enumerate()
        .filter(|(_, (_, t))| *t == EdgeType::Mid)
        .map(|(e, _)| e)
        .collect()
}

#[derive(Clone)]
pub struct OddStep {
    delta: usize,
    inner: Arc<dyn Algorithm>,
    inner_rounds: usize,
    labels: Arc<Vec<EdgeLabel>>,
}

impl fmt::Debug for OddStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OddStep").field("delta", &self.delta).field("inner", &self.inner.name()).finish()
    }
}

impl OddStep {
    /// `inner` must solve maximum degree `delta - 1` and have a round bound.
    pub fn new(delta: usize, inner: Arc<dyn Algorithm>) -> OddStep {
        let inner_rounds = inner.round_bound().expect("inner algorithm needs a round bound");
        OddStep { delta, inner, inner_rounds, labels: Arc::new(EdgeLabel::all(delta)) }
    }
}

impl Algorithm for OddStep {
    fn name(&self) -> String {
        format!("odd-step(Δ={}, {})", self.delta, self.inner.name())
    }

    fn round_bound(&self) -> Option<usize> {
        Some(2 + self.inner_rounds + 2 * self.labels.len())
    }

    fn init(&self, view: &NodeView) -> Box<dyn NodeProgram> {
        Box::new(OddNode {
            view: view.clone(),
            alg: self.clone(),
            round: 0,
            labels: Vec::new(),
            label_deg: Vec::new(),
            mid: Vec::new(),
            inner: None,
            x: vec![None; view.degree],
            load: Rat::zero(),
            nb: Vec::new(),
        })
    }
}

struct OddNode {
    view: NodeView,
    alg: OddStep,
    round: usize,
    labels: Vec<EdgeLabel>,
    label_deg: Vec<usize>,
    mid: Vec<bool>,
    inner: Option<Embedded>,
    x: Vec<Option<Rat>>,
    load: Rat,
    /// neighbour's (load, End-port count) for the label being processed
    nb: Vec<Option<(Rat, usize)>>,
}

impl fmt::Debug for OddNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OddNode")
            .field("round", &self.round)
            .field("labels", &self.labels)
            .field("mid", &self.mid)
            .field("inner", &self.inner)
            .field("x", &self.x)
            .field("load", &self.load)
            .finish()
    }
}

impl OddNode {
    fn degree(&self) -> usize {
        self.view.degree
    }

    fn end_ports(&self, label: EdgeLabel) -> Vec<Port> {
        (1..=self.degree()).filter(|&p| !self.mid[p - 1] && self.labels[p - 1] == label).collect()
    }

    fn assign(&mut self, p: Port, value: Rat) -> Result<(), Fault> {
        if self.x[p - 1].is_some() {
            return Err(Fault::Invariant(format!("port {p} assigned twice")));
        }
        self.load = &self.load + &value;
        self.x[p - 1] = Some(value);
        Ok(())
    }

    /// Phase A of a label: announce load and End-port count.
    fn announce(&self, label: EdgeLabel) -> Mailbox {
        let ends = self.end_ports(label);
        let mut out = vec![None; self.degree()];
        for &p in &ends {
            out[p - 1] = Some(Writer::new().rat(&self.load).uint(ends.len() as u64).finish());
        }
        out
    }

    /// Handles the announcements of `label`; returns the phase B messages.
    fn settle(&mut self, label: EdgeLabel, inbox: &[Option<Message>]) -> Result<Mailbox, Fault> {
        let ends = self.end_ports(label);
        self.nb = vec![None; self.degree()];
        for &p in &ends {
            let mut r = expect(inbox, p)?;
            let load = r.rat()?;
            let count = r.uint()? as usize;
            self.nb[p - 1] = Some((load, count));
        }
        let mut out = vec![None; self.degree()];
        match ends.as_slice() {
            [] => {}
            &[p] => {
                let (nb_load, nb_count) = self.nb[p - 1].clone().expect("read above");
                match nb_count {
                    1 => {
                        let value = self.load.slack().min(nb_load.slack());
                        self.assign(p, value)?;
                    }
                    2 => {} // the neighbour is the middle of a path and decides
                    c => return Err(Fault::Protocol(format!("End-port count {c}"))),
                }
            }
            &[p1, p2] => {
                for p in [p1, p2] {
                    let (nb_load, nb_count) = self.nb[p - 1].clone().expect("read above");
                    if nb_count != 1 {
                        return Err(Fault::Invariant(format!("End edges of label {label} form a path longer than 2")));
                    }
                    let value = self.load.slack().min(nb_load.slack());
                    out[p - 1] = Some(Writer::new().rat(&value).finish());
                    self.assign(p, value)?;
                }
            }
            _ => return Err(Fault::Invariant(format!("label {label} used on more than two ports"))),
        }
        Ok(out)
    }

    /// Phase B: leaves of length-2 paths take the value chosen by the middle.
    fn receive_values(&mut self, label: EdgeLabel, inbox: &[Option<Message>]) -> Result<(), Fault> {
        let ends = self.end_ports(label);
        if let &[p] = ends.as_slice() {
            if matches!(self.nb[p - 1], Some((_, 2))) {
                let value = expect(inbox, p)?.rat()?;
                self.assign(p, value)?;
            }
        }
        if self.load > Rat::one() {
            return Err(Fault::Invariant(format!("load {} after label {label}", self.load)));
        }
        Ok(())
    }

    fn output(&self) -> Result<Vec<Rat>, Fault> {
        self.x
            .iter()
            .enumerate()
            .map(|(i, v)| v.clone().ok_or_else(|| Fault::Invariant(format!("port {} left unassigned", i + 1))))
            .collect()
    }
}

impl NodeProgram for OddNode {
    fn start(&mut self) -> Result<Step, Fault> {
        check_degree(&self.view, self.alg.delta)?;
        if self.degree() == 0 {
            return Ok(Step::halt(Vec::new()));
        }
        Ok(Step::send((1..=self.degree()).map(|p| Some(Writer::new().uint(p as u64).finish())).collect()))
    }

    fn step(&mut self, inbox: &[Option<Message>]) -> Result<Step, Fault> {
        self.round += 1;
        let b = self.alg.inner_rounds;
        let r = self.round;
        if r == 1 {
            for p in 1..=self.degree() {
                let q = expect(inbox, p)?.uint()? as usize;
                self.labels.push(EdgeLabel::new(p, q));
            }
            self.label_deg = self.labels.iter().map(|l| self.labels.iter().filter(|m| *m == l).count()).collect();
            if self.label_deg.iter().any(|&c| c > 2) {
                return Err(Fault::Invariant("a label class has a node of degree above 2".into()));
            }
            return Ok(Step::send(self.label_deg.iter().map(|&c| Some(Writer::new().uint(c as u64).finish())).collect()));
        }
        if r == 2 {
            let mut ports = Vec::new();
            for p in 1..=self.degree() {
                let nb = expect(inbox, p)?.uint()?;
                let mid = self.label_deg[p - 1] == 2 && nb == 2;
                self.mid.push(mid);
                if mid {
                    ports.push(p);
                }
            }
            let mut inner = Embedded::new(self.alg.inner.as_ref(), &self.view, ports);
            let out = inner.start()?;
            self.inner = Some(inner);
            return Ok(Step::send(out));
        }
        if r <= 2 + b {
            let inner = self.inner.as_mut().expect("set in round 2");
            let out = inner.step(inbox)?;
            if r < 2 + b {
                return Ok(Step::send(out));
            }
            let ports = inner.ports().to_vec();
            let values = inner.finish()?;
            for (p, v) in ports.into_iter().zip(values) {
                self.assign(p, v)?;
            }
            if self.load > Rat::one() {
                return Err(Fault::Invariant(format!("Mid subgraph solution has load {}", self.load)));
            }
            return Ok(Step::send(self.announce(self.alg.labels[0])));
        }
        let k = (r - 3 - b) / 2;
        let label = self.alg.labels[k];
        if (r - 3 - b).is_multiple_of(2) {
            return Ok(Step::send(self.settle(label, inbox)?));
        }
        self.receive_values(label, inbox)?;
        match self.alg.labels.get(k + 1) {
            Some(&next) => Ok(Step::send(self.announce(next))),
            None => Ok(Step::halt(self.output()?)),
        }
    }
}
