use mfm_core::algorithms::mfm;
use mfm_core::lowerbound::{harness, HarnessOptions, LbOutcome};
use mfm_core::rational::Rat;
use mfm_core::sim::{Algorithm, Fault, Message, NodeProgram, NodeView, Step};

#[derive(Debug)]
struct Zeros(usize);

impl NodeProgram for Zeros {
    fn start(&mut self) -> Result<Step, Fault> {
        Ok(Step::halt(vec![Rat::zero(); self.0]))
    }
    fn step(&mut self, _: &[Option<Message>]) -> Result<Step, Fault> {
        unreachable!()
    }
}

struct AllZero;

impl Algorithm for AllZero {
    fn name(&self) -> String {
        "all-zero".into()
    }
    fn round_bound(&self) -> Option<usize> {
        Some(0)
    }
    fn init(&self, view: &NodeView) -> Box<dyn NodeProgram> {
        Box::new(Zeros(view.degree))
    }
}

#[test]
fn chain_for_delta_four() {
    let rep = harness(&mfm(4), 2, &HarnessOptions::default());
    assert_eq!(rep.outcome, LbOutcome::Completed, "{rep:#?}");
    assert_eq!(rep.levels.len(), 2);
    let classes: Vec<u64> = rep.levels.iter().map(|l| l.fine_loop.as_ref().unwrap().class).collect();
    assert!(classes[0] >= 1 && classes[1] >= 2, "{classes:?}");
    assert!(rep.reached_bound);
    let t = rep.levels[1].t.unwrap();
    assert_eq!(rep.levels[1].nodes, 2 * t + 3);
    for l in &rep.levels {
        assert!(!l.fine_loop.as_ref().unwrap().walk_failed);
    }
}

#[test]
fn zero_output_fails_verification_at_level_zero() {
    let rep = harness(&AllZero, 2, &HarnessOptions::default());
    assert!(matches!(rep.outcome, LbOutcome::VerifyFailed { level: 0, .. }), "{:?}", rep.outcome);
}
