//! Half-integral almost-saturating solution from a maximal matching of the
//! bipartite double cover. Each node plays its white copy `v1` and its black
//! copy `v2`; cover edge `{u1, v2}` is matched iff the white side of `u`
//! and the black side of `v` agree on the shared port.

use super::check_degree;
use super::proposal::ProposalCore;
use crate::rational::Rat;
use crate::sim::{Algorithm, Fault, Mailbox, Message, NodeProgram, NodeView, Step};

/// Runs the cover matching for `2Δ` rounds and maps it to `x̄(e) =
/// (x'[{u1,v2}] + x'[{u2,v1}]) / 2`.
#[derive(Clone, Debug)]
pub(crate) struct CoverMatching {
    core: ProposalCore,
    degree: usize,
}

impl CoverMatching {
    pub(crate) fn new(degree: usize, delta: usize) -> CoverMatching {
        CoverMatching { core: ProposalCore::new(degree, delta, true, true), degree }
    }

    pub(crate) fn rounds(&self) -> usize {
        self.core.rounds()
    }

    pub(crate) fn outbox(&self, round: usize) -> Mailbox {
        self.core.outbox(round)
    }

    pub(crate) fn receive(&mut self, round: usize, inbox: &[Option<Message>]) {
        self.core.receive(round, inbox);
    }

    pub(crate) fn values(&self) -> Vec<Rat> {
        let w = self.core.white_match();
        let b = self.core.black_match();
        (1..=self.degree)
            .map(|p| match (w == Some(p), b == Some(p)) {
                (true, true) => Rat::one(),
                (false, false) => Rat::zero(),
                _ => Rat::half(),
            })
            .collect()
    }
}

/// Almost-saturating half-integral solution for maximum degree `delta`,
/// `2Δ` rounds.
#[derive(Clone, Debug)]
pub struct AlmostSaturating {
    delta: usize,
}

impl AlmostSaturating {
    pub fn new(delta: usize) -> AlmostSaturating {
        AlmostSaturating { delta }
    }
}

/// The construction used by the even step for `Δ = 2d + 2`.
pub fn almost_saturating(d: usize) -> AlmostSaturating {
    AlmostSaturating::new(2 * d + 2)
}

impl Algorithm for AlmostSaturating {
    fn name(&self) -> String {
        format!("almost-sat(Δ={})", self.delta)
    }

    fn round_bound(&self) -> Option<usize> {
        Some(2 * self.delta)
    }

    fn init(&self, view: &NodeView) -> Box<dyn NodeProgram> {
        Box::new(AlmostSatNode { view: view.clone(), delta: self.delta, cover: None, round: 0 })
    }
}

#[derive(Debug)]
struct AlmostSatNode {
    view: NodeView,
    delta: usize,
    cover: Option<CoverMatching>,
    round: usize,
}

impl NodeProgram for AlmostSatNode {
    fn start(&mut self) -> Result<Step, Fault> {
        check_degree(&self.view, self.delta)?;
        let cover = CoverMatching::new(self.view.degree, self.delta);
        let step = if cover.rounds() == 0 { Step::halt(cover.values()) } else { Step::send(cover.outbox(1)) };
        self.cover = Some(cover);
        Ok(step)
    }

    fn step(&mut self, inbox: &[Option<Message>]) -> Result<Step, Fault> {
        self.round += 1;
        let cover = self.cover.as_mut().expect("started");
        cover.receive(self.round, inbox);
        if self.round == cover.rounds() {
            return Ok(Step::halt(cover.values()));
        }
        Ok(Step::send(cover.outbox(self.round + 1)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Orientation, RawGraph};
    use crate::sim::{run, Model, RunOptions};
    use crate::verify::check_almost_saturating;

    #[test]
    fn single_edge_is_fully_matched() {
        let mut raw = RawGraph::new(2);
        raw.edge(0, 1, 1, 1, Orientation::UV);
        let g = raw.build().unwrap();
        let res = run(&g, &AlmostSaturating::new(1), Model::Pn, &RunOptions::default()).unwrap();
        assert_eq!(res.assignment.values(), &[Rat::one()]);
    }

    #[test]
    fn triangle() {
        let mut raw = RawGraph::new(3);
        for i in 0..3 {
            raw.edge(i, 1, (i + 1) % 3, 2, Orientation::UV);
        }
        let g = raw.build().unwrap();
        let res = run(&g, &AlmostSaturating::new(2), Model::Pn, &RunOptions::default()).unwrap();
        assert!(res.rounds <= 2 * 2 + 1);
        let rep = check_almost_saturating(&g, &res.assignment).unwrap();
        assert!(rep.is_almost_saturating(), "{rep:?}");
    }
}
