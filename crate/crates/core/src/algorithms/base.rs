use super::check_degree;
use super::wire::{expect, Writer};
use crate::rational::Rat;
use crate::sim::{Algorithm, Fault, Message, NodeProgram, NodeView, Step};

/// One-round algorithm for maximum degree at most 2: degree-2 nodes put
/// `1/2` on both edges; a degree-1 node puts `1/2` on its edge when the
/// neighbour has degree 2 and `1` otherwise.
#[derive(Clone, Debug)]
pub struct BaseCase {
    max_degree: usize,
}

impl BaseCase {
    pub fn new(max_degree: usize) -> BaseCase {
        assert!(max_degree <= 2, "the base case handles maximum degree at most 2");
        BaseCase { max_degree }
    }
}

pub fn base_case() -> BaseCase {
    BaseCase::new(2)
}

impl Algorithm for BaseCase {
    fn name(&self) -> String {
        format!("base(Δ={})", self.max_degree)
    }

    fn round_bound(&self) -> Option<usize> {
        Some(1)
    }

    fn init(&self, view: &NodeView) -> Box<dyn NodeProgram> {
        Box::new(BaseNode { view: view.clone(), max: self.max_degree })
    }
}

#[derive(Debug)]
struct BaseNode {
    view: NodeView,
    max: usize,
}

impl NodeProgram for BaseNode {
    fn start(&mut self) -> Result<Step, Fault> {
        check_degree(&self.view, self.max)?;
        let d = self.view.degree;
        if d == 0 {
            return Ok(Step::halt(Vec::new()));
        }
        Ok(Step::send(vec![Some(Writer::new().uint(d as u64).finish()); d]))
    }

    fn step(&mut self, inbox: &[Option<Message>]) -> Result<Step, Fault> {
        let out = match self.view.degree {
            2 => vec![Rat::half(), Rat::half()],
            1 => match expect(inbox, 1)?.uint()? {
                1 => vec![Rat::one()],
                2 => vec![Rat::half()],
                other => return Err(Fault::Degree { degree: other as usize, max: 2 }),
            },
            _ => unreachable!("checked in start"),
        };
        Ok(Step::halt(out))
    }
}
