//! Proposal-based maximal matching for 2-coloured graphs.
//!
//! Round `2k - 1`: every unmatched white node proposes along its port `k`.
//! Round `2k`: every black node that is still free accepts the proposal
//! arriving on its lowest port. After `Δ` such phases every white node is
//! matched or has been turned down by every neighbour, and a black node only
//! turns a proposal down once it is matched, so the matching is maximal.

use super::check_degree;
use crate::graph::{Port, Side};
use crate::rational::Rat;
use crate::sim::{Algorithm, Fault, Mailbox, Message, NodeProgram, NodeView, Step};

const PROPOSE: u8 = 0b01;
const ACCEPT: u8 = 0b10;

/// Matching state of the white and/or black role played by one node.
/// A node of the double cover plays both roles over the same ports: the
/// white part of a message goes to the neighbour's black copy and vice
/// versa.
#[derive(Clone, Debug)]
pub(crate) struct ProposalCore {
    degree: usize,
    delta: usize,
    white: Option<Option<Port>>,
    black: Option<Option<Port>>,
    /// black acceptance decided in the last proposal round
    accepting: Option<Port>,
}

impl ProposalCore {
    pub(crate) fn new(degree: usize, delta: usize, white: bool, black: bool) -> ProposalCore {
        ProposalCore {
            degree,
            delta,
            white: white.then_some(None),
            black: black.then_some(None),
            accepting: None,
        }
    }

    pub(crate) fn rounds(&self) -> usize {
        2 * self.delta
    }

    /// Messages for round `round` (1-based).
    pub(crate) fn outbox(&self, round: usize) -> Mailbox {
        let mut bits = vec![0u8; self.degree];
        if round % 2 == 1 {
            let k = round.div_ceil(2);
            if self.white == Some(None) && k <= self.degree {
                bits[k - 1] |= PROPOSE;
            }
        } else if let Some(p) = self.accepting {
            bits[p - 1] |= ACCEPT;
        }
        bits.into_iter().map(|b| (b != 0).then(|| vec![b])).collect()
    }

    pub(crate) fn receive(&mut self, round: usize, inbox: &[Option<Message>]) {
        let bit = |p: usize, mask: u8| inbox[p - 1].as_ref().is_some_and(|m| m.first().is_some_and(|b| b & mask != 0));
        if round % 2 == 1 {
            self.accepting = None;
            if self.black == Some(None) {
                if let Some(p) = (1..=self.degree).find(|&p| bit(p, PROPOSE)) {
                    self.black = Some(Some(p));
                    self.accepting = Some(p);
                }
            }
        } else {
            let k = round / 2;
            if self.white == Some(None) && k <= self.degree && bit(k, ACCEPT) {
                self.white = Some(Some(k));
            }
        }
    }

    pub(crate) fn white_match(&self) -> Option<Port> {
        self.white.flatten()
    }

    pub(crate) fn black_match(&self) -> Option<Port> {
        self.black.flatten()
    }
}

/// Maximal matching on a graph with a proper white/black colouring given as
/// node input. Runs exactly `2Δ` rounds.
#[derive(Clone, Debug)]
pub struct ProposalMm {
    delta: usize,
}

impl ProposalMm {
    pub fn new(delta: usize) -> ProposalMm {
        ProposalMm { delta }
    }
}

pub fn bipartite_proposal_mm(delta: usize) -> ProposalMm {
    ProposalMm::new(delta)
}

impl Algorithm for ProposalMm {
    fn name(&self) -> String {
        format!("proposal-mm(Δ={})", self.delta)
    }

    fn round_bound(&self) -> Option<usize> {
        Some(2 * self.delta)
    }

    fn init(&self, view: &NodeView) -> Box<dyn NodeProgram> {
        Box::new(ProposalNode { view: view.clone(), delta: self.delta, core: None, round: 0 })
    }
}

#[derive(Debug)]
struct ProposalNode {
    view: NodeView,
    delta: usize,
    core: Option<ProposalCore>,
    round: usize,
}

impl ProposalNode {
    fn output(&self) -> Vec<Rat> {
        let core = self.core.as_ref().expect("started");
        let matched = core.white_match().or(core.black_match());
        (1..=self.view.degree)
            .map(|p| if Some(p) == matched { Rat::one() } else { Rat::zero() })
            .collect()
    }
}

impl NodeProgram for ProposalNode {
    fn start(&mut self) -> Result<Step, Fault> {
        check_degree(&self.view, self.delta)?;
        let side = self
            .view
            .color
            .ok_or_else(|| Fault::MissingInput("proposal matching needs a 2-colouring".into()))?;
        let core = ProposalCore::new(self.view.degree, self.delta, side == Side::White, side == Side::Black);
        let first = core.outbox(1);
        let rounds = core.rounds();
        self.core = Some(core);
        if rounds == 0 {
            return Ok(Step::halt(self.output()));
        }
        Ok(Step::send(first))
    }

    fn step(&mut self, inbox: &[Option<Message>]) -> Result<Step, Fault> {
        self.round += 1;
        let core = self.core.as_mut().expect("started");
        core.receive(self.round, inbox);
        if self.round == core.rounds() {
            return Ok(Step::halt(self.output()));
        }
        Ok(Step::send(core.outbox(self.round + 1)))
    }
}
