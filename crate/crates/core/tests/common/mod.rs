#![allow(dead_code)]

use mfm_core::graph::PortGraph;
use mfm_core::rational::Rat;
use mfm_core::sim::{Algorithm, Fault, Message, NodeProgram, NodeView, Step};

fn fnv(h: u64, bytes: &[u8]) -> u64 {
    bytes.iter().fold(h, |h, &b| (h ^ u64::from(b)).wrapping_mul(0x100000001b3))
}

const FNV_INIT: u64 = 0xcbf29ce484222325;

/// Gathers a digest of the radius-`radius` view (ports and orientations)
/// and labels each edge with a value in `{0/101, .., 100/101}` derived
/// from the unordered pair of endpoint digests. Runs `radius + 1` rounds
/// and is consistent on every graph, so it can be compared across covers.
#[derive(Clone, Debug)]
pub struct ViewDigest {
    pub radius: usize,
}

impl Algorithm for ViewDigest {
    fn name(&self) -> String {
        format!("view-digest(r={})", self.radius)
    }
    fn round_bound(&self) -> Option<usize> {
        Some(self.radius + 1)
    }
    fn init(&self, view: &NodeView) -> Box<dyn NodeProgram> {
        let mut h = fnv(FNV_INIT, &(view.degree as u64).to_le_bytes());
        for &out in view.outgoing.iter().flatten() {
            h = fnv(h, &[out as u8]);
        }
        Box::new(DigestNode { degree: view.degree, radius: self.radius, round: 0, state: h })
    }
}

#[derive(Debug)]
struct DigestNode {
    degree: usize,
    radius: usize,
    round: usize,
    state: u64,
}

impl DigestNode {
    fn outbox(&self) -> Vec<Option<Message>> {
        (1..=self.degree)
            .map(|p| {
                let mut m = self.state.to_le_bytes().to_vec();
                m.extend_from_slice(&(p as u64).to_le_bytes());
                Some(m)
            })
            .collect()
    }
}

fn decode(m: &Option<Message>) -> Result<(u64, u64), Fault> {
    let m = m.as_ref().filter(|m| m.len() == 16).ok_or_else(|| Fault::Protocol("bad digest".into()))?;
    Ok((u64::from_le_bytes(m[..8].try_into().unwrap()), u64::from_le_bytes(m[8..].try_into().unwrap())))
}

impl NodeProgram for DigestNode {
    fn start(&mut self) -> Result<Step, Fault> {
        if self.degree == 0 {
            return Ok(Step::halt(Vec::new()));
        }
        Ok(Step::send(self.outbox()))
    }

    fn step(&mut self, inbox: &[Option<Message>]) -> Result<Step, Fault> {
        self.round += 1;
        if self.round <= self.radius {
            let mut h = self.state;
            for m in inbox {
                let (s, q) = decode(m)?;
                h = fnv(h, &s.to_le_bytes());
                h = fnv(h, &q.to_le_bytes());
            }
            self.state = h;
            return Ok(Step::send(self.outbox()));
        }
        let mut out = Vec::with_capacity(self.degree);
        for (i, m) in inbox.iter().enumerate() {
            let (s, q) = decode(m)?;
            let mine = (self.state, (i + 1) as u64);
            let (a, b) = if mine <= (s, q) { (mine, (s, q)) } else { ((s, q), mine) };
            let h = [a.0, a.1, b.0, b.1].iter().fold(FNV_INIT, |h, x| fnv(h, &x.to_le_bytes()));
            out.push(Rat::new(h % 101, 101));
        }
        Ok(Step::halt(out))
    }
}

/// Hand-picked loopy graphs with at most three nodes.
pub fn loopy_zoo() -> Vec<(&'static str, PortGraph)> {
    use mfm_core::format::parse_graph;
    let src = [
        ("one loop", "node 0\nloop 0 1 2\n"),
        ("two loops", "node 0\nloop 0 1 2\nloop 0 3 4\n"),
        ("three loops, mixed ports", "node 0\nloop 0 4 1\nloop 0 2 6\nloop 0 5 3\n"),
        ("two nodes", "node 0\nnode 1\nloop 0 1 3\nloop 1 2 1\nedge 0 2 1 3 uv\n"),
        ("path of three", "node 0\nnode 1\nnode 2\nloop 0 1 2\nloop 1 4 1\nloop 2 3 1\nedge 0 3 1 2 vu\nedge 1 3 2 2 uv\n"),
        (
            "triangle",
            "node 0\nnode 1\nnode 2\nloop 0 1 2\nloop 1 3 4\nloop 2 2 4\nedge 0 3 1 1 uv\nedge 1 2 2 1 uv\nedge 2 3 0 4 uv\n",
        ),
    ];
    src.iter().map(|(name, text)| (*name, parse_graph(text).expect("valid fixture"))).collect()
}
