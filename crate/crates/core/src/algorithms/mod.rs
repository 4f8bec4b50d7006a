//! Maximal fractional matching with values in `S(floor(Δ/2))`, built by
//! induction on the maximum degree:
//!
//! * `Δ <= 2`: [`BaseCase`], one round.
//! * `Δ = 2d + 1`: [`OddStep`] classifies edges by port-pair label, solves
//!   the "Mid" subgraph (maximum degree `2d`) recursively and then extends
//!   greedily over the "End" edges, label by label.
//! * `Δ = 2d + 2`: [`EvenStep`] computes an almost-saturating half-integral
//!   solution from a maximal matching of the bipartite double cover, solves
//!   the half-saturated subgraph (maximum degree `2d + 1`) recursively and
//!   adds half of that solution.
//!
//! All composites run on a fixed global schedule: a recursive phase always
//! lasts exactly the inner algorithm's round bound, so every node knows
//! which phase a round belongs to without extra coordination.

mod almost_sat;
mod base;
mod even;
mod odd;
mod proposal;
mod registry;
mod wire;

use std::sync::Arc;

pub use almost_sat::{almost_saturating, AlmostSaturating};
pub use base::{base_case, BaseCase};
pub use even::EvenStep;
pub use odd::{classify_edges, mid_edges, EdgeLabel, EdgeType, OddStep};
pub use proposal::{bipartite_proposal_mm, ProposalMm};
pub use registry::{by_name, AlgorithmParams, RegistryError, ALGORITHM_NAMES};

use crate::graph::Port;
use crate::rational::Rat;
use crate::sim::{Algorithm, Decision, Fault, Mailbox, Message, NodeProgram, NodeView};

/// The upper-bound algorithm for maximum degree `delta`.
pub fn mfm(delta: usize) -> Arc<dyn Algorithm> {
    match delta {
        0..=2 => Arc::new(BaseCase::new(delta)),
        _ if delta % 2 == 1 => Arc::new(OddStep::new(delta, mfm(delta - 1))),
        _ => Arc::new(EvenStep::new(delta, mfm(delta - 1))),
    }
}

/// Round bound promised for maximum degree `delta`: `5Δ³`.
pub fn cubic_round_bound(delta: usize) -> usize {
    5 * delta.pow(3)
}

/// An inner algorithm simulated by one node on a subgraph whose ports are a
/// subset of the node's own ports, renumbered `1..` in increasing order.
#[derive(Debug)]
pub(crate) struct Embedded {
    program: Box<dyn NodeProgram>,
    /// inner port `i` is outer port `ports[i - 1]`
    ports: Vec<Port>,
    outer_degree: usize,
    output: Option<Vec<Rat>>,
}

impl Embedded {
    pub(crate) fn new(alg: &dyn Algorithm, outer: &NodeView, ports: Vec<Port>) -> Embedded {
        let view = NodeView {
            degree: ports.len(),
            outgoing: outer
                .outgoing
                .as_ref()
                .map(|flags| ports.iter().map(|&p| flags[p - 1]).collect()),
            id: outer.id,
            color: None,
        };
        Embedded { program: alg.init(&view), ports, outer_degree: outer.degree, output: None }
    }

    fn lift(&mut self, step: crate::sim::Step) -> Mailbox {
        let mut outbox = vec![None; self.outer_degree];
        match step.decision {
            Decision::Halt(out) => self.output = Some(out),
            Decision::Continue => {
                for (i, msg) in step.outbox.into_iter().enumerate() {
                    if let Some(&p) = self.ports.get(i) {
                        outbox[p - 1] = msg;
                    }
                }
            }
        }
        outbox
    }

    pub(crate) fn start(&mut self) -> Result<Mailbox, Fault> {
        let step = self.program.start()?;
        Ok(self.lift(step))
    }

    pub(crate) fn step(&mut self, inbox: &[Option<Message>]) -> Result<Mailbox, Fault> {
        if self.output.is_some() {
            return Ok(vec![None; self.outer_degree]);
        }
        let inner: Vec<Option<Message>> = self.ports.iter().map(|&p| inbox[p - 1].clone()).collect();
        let step = self.program.step(&inner)?;
        Ok(self.lift(step))
    }

    pub(crate) fn ports(&self) -> &[Port] {
        &self.ports
    }

    /// The inner output, which must exist once the phase budget is used up.
    pub(crate) fn finish(&mut self) -> Result<Vec<Rat>, Fault> {
        let out = self
            .output
            .take()
            .ok_or_else(|| Fault::Invariant("inner algorithm did not halt within its round bound".into()))?;
        if out.len() != self.ports.len() {
            return Err(Fault::Invariant(format!(
                "inner algorithm produced {} values for {} ports",
                out.len(),
                self.ports.len()
            )));
        }
        Ok(out)
    }
}

pub(crate) fn check_degree(view: &NodeView, max: usize) -> Result<(), Fault> {
    if view.degree > max {
        return Err(Fault::Degree { degree: view.degree, max });
    }
    Ok(())
}
