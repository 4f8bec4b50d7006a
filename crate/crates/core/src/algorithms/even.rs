//! Reduction from maximum degree `2d + 2` to `2d + 1`.
//!
//! The almost-saturating solution `x̄` leaves unsaturated only edges whose
//! endpoints both have load exactly `1/2`. A node at load `1/2` has a
//! neighbour at load 1, so it keeps at most `Δ - 1` half-saturated edges.
//! Solving the half-saturated subgraph recursively and adding half of that
//! solution saturates one endpoint of every such edge.

use std::fmt;
use std::sync::Arc;

use super::almost_sat::CoverMatching;
use super::wire::{expect, Writer};
use super::{check_degree, Embedded};
use crate::rational::Rat;
use crate::sim::{Algorithm, Fault, Message, NodeProgram, NodeView, Step};

#[derive(Clone)]
pub struct EvenStep {
    delta: usize,
    inner: Arc<dyn Algorithm>,
    inner_rounds: usize,
}

impl fmt::Debug for EvenStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EvenStep").field("delta", &self.delta).field("inner", &self.inner.name()).finish()
    }
}

impl EvenStep {
    /// `inner` must solve maximum degree `delta - 1` and have a round bound.
    pub fn new(delta: usize, inner: Arc<dyn Algorithm>) -> EvenStep {
        let inner_rounds = inner.round_bound().expect("inner algorithm needs a round bound");
        EvenStep { delta, inner, inner_rounds }
    }
}

impl Algorithm for EvenStep {
    fn name(&self) -> String {
        format!("even-step(Δ={}, {})", self.delta, self.inner.name())
    }

    fn round_bound(&self) -> Option<usize> {
        Some(2 * self.delta + 1 + self.inner_rounds)
    }

    fn init(&self, view: &NodeView) -> Box<dyn NodeProgram> {
        Box::new(EvenNode {
            view: view.clone(),
            alg: self.clone(),
            round: 0,
            cover: CoverMatching::new(view.degree, self.delta),
            base: Vec::new(),
            load: Rat::zero(),
            inner: None,
        })
    }
}

struct EvenNode {
    view: NodeView,
    alg: EvenStep,
    round: usize,
    cover: CoverMatching,
    base: Vec<Rat>,
    load: Rat,
    inner: Option<Embedded>,
}

impl fmt::Debug for EvenNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EvenNode")
            .field("round", &self.round)
            .field("cover", &self.cover)
            .field("base", &self.base)
            .field("inner", &self.inner)
            .finish()
    }
}

impl EvenNode {
    /// Checks the almost-saturating clauses at this node and picks the
    /// half-saturated ports.
    fn half_saturated(&self, inbox: &[Option<Message>]) -> Result<Vec<usize>, Fault> {
        let half = Rat::half();
        let mut nb_loads = Vec::with_capacity(self.view.degree);
        for p in 1..=self.view.degree {
            nb_loads.push(expect(inbox, p)?.rat()?);
        }
        let ok = if self.load.is_zero() {
            nb_loads.iter().all(Rat::is_one)
        } else if self.load == half {
            nb_loads.iter().any(Rat::is_one)
        } else {
            self.load.is_one()
        };
        if !ok {
            return Err(Fault::Invariant(format!("base solution is not almost-saturating (load {})", self.load)));
        }
        if self.load != half {
            return Ok(Vec::new());
        }
        let ports: Vec<usize> = (1..=self.view.degree).filter(|&p| nb_loads[p - 1] == half).collect();
        if ports.len() + 1 > self.alg.delta {
            return Err(Fault::Invariant(format!("{} half-saturated edges at one node", ports.len())));
        }
        Ok(ports)
    }
}

impl NodeProgram for EvenNode {
    fn start(&mut self) -> Result<Step, Fault> {
        check_degree(&self.view, self.alg.delta)?;
        if self.view.degree == 0 {
            return Ok(Step::halt(Vec::new()));
        }
        Ok(Step::send(self.cover.outbox(1)))
    }

    fn step(&mut self, inbox: &[Option<Message>]) -> Result<Step, Fault> {
        self.round += 1;
        let r = self.round;
        let m = self.cover.rounds();
        if r < m {
            self.cover.receive(r, inbox);
            return Ok(Step::send(self.cover.outbox(r + 1)));
        }
        if r == m {
            self.cover.receive(r, inbox);
            self.base = self.cover.values();
            self.load = self.base.iter().sum();
            let msg = Writer::new().rat(&self.load).finish();
            return Ok(Step::send(vec![Some(msg); self.view.degree]));
        }
        if r == m + 1 {
            let ports = self.half_saturated(inbox)?;
            let mut inner = Embedded::new(self.alg.inner.as_ref(), &self.view, ports);
            let out = inner.start()?;
            self.inner = Some(inner);
            return Ok(Step::send(out));
        }
        let inner = self.inner.as_mut().expect("set after the base phase");
        let out = inner.step(inbox)?;
        if r < m + 1 + self.alg.inner_rounds {
            return Ok(Step::send(out));
        }
        let ports = inner.ports().to_vec();
        let extra = inner.finish()?;
        let mut x = std::mem::take(&mut self.base);
        for (p, v) in ports.into_iter().zip(extra) {
            x[p - 1] = &x[p - 1] + &v.halve();
        }
        Ok(Step::halt(x))
    }
}
