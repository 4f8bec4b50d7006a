//! Port-numbered, edge-oriented multigraphs with self-loops.
//!
//! Every node `v` numbers its incident edge endpoints `1..=deg(v)`. A loop
//! at `v` occupies two of those ports: one is its outgoing side and the
//! other its incoming side, so a loop counts twice towards the degree.
//! Non-loop parallel edges are not supported.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub type NodeId = usize;
pub type EdgeId = usize;
/// 1-based port number.
pub type Port = usize;

/// Orientation of an edge record `(u, pu, v, pv)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Orientation {
    /// `u -> v`
    UV,
    /// `v -> u`
    VU,
}

impl Orientation {
    pub fn flipped(self) -> Orientation {
        match self {
            Orientation::UV => Orientation::VU,
            Orientation::VU => Orientation::UV,
        }
    }
}

/// An edge record as read from a file, before validation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawEdge {
    pub u: NodeId,
    pub pu: Port,
    pub v: NodeId,
    pub pv: Port,
    pub orientation: Option<Orientation>,
}

/// Unvalidated graph description. [`PortGraph::from_raw`] turns it into a
/// graph once [`validate`] reports no violations.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawGraph {
    pub nodes: usize,
    pub edges: Vec<RawEdge>,
}

impl RawGraph {
    pub fn new(nodes: usize) -> RawGraph {
        RawGraph { nodes, edges: Vec::new() }
    }

    pub fn edge(&mut self, u: NodeId, pu: Port, v: NodeId, pv: Port, dir: Orientation) -> EdgeId {
        self.edges.push(RawEdge { u, pu, v, pv, orientation: Some(dir) });
        self.edges.len() - 1
    }

    /// A loop at `v` leaving through `p_out` and entering through `p_in`.
    pub fn self_loop(&mut self, v: NodeId, p_out: Port, p_in: Port) -> EdgeId {
        self.edge(v, p_out, v, p_in, Orientation::UV)
    }

    pub fn build(self) -> Result<PortGraph, GraphError> {
        PortGraph::from_raw(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    UnknownNode { edge: EdgeId, node: NodeId },
    PortZero { edge: EdgeId, node: NodeId },
    DuplicatePort { node: NodeId, port: Port },
    MissingPort { node: NodeId, port: Port },
    MissingOrientation { edge: EdgeId },
    LoopReusesPort { edge: EdgeId },
    ParallelEdge { edge: EdgeId, first: EdgeId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownNode { edge, node } => write!(f, "edge {edge}: unknown node {node}"),
            Violation::PortZero { edge, node } => {
                write!(f, "edge {edge}: port 0 used at node {node}")
            }
            Violation::DuplicatePort { node, port } => {
                write!(f, "node {node}: port {port} used more than once")
            }
            Violation::MissingPort { node, port } => write!(f, "node {node}: port {port} missing"),
            Violation::MissingOrientation { edge } => write!(f, "edge {edge}: missing orientation"),
            Violation::LoopReusesPort { edge } => {
                write!(f, "edge {edge}: loop uses the same port on both sides")
            }
            Violation::ParallelEdge { edge, first } => {
                write!(f, "edge {edge}: parallel to edge {first}")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        let lines: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", lines.join("; "))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("invalid graph: {0}")]
    Invalid(ValidationReport),
    #[error("unknown edge id {0}")]
    UnknownEdge(EdgeId),
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),
    #[error("operation requires a loop-free graph")]
    LoopsPresent,
    #[error("edge {0} is not a loop at node {1}")]
    NotALoop(EdgeId, NodeId),
    #[error("construction would exceed {0} nodes")]
    TooLarge(usize),
}

/// Checks every structural invariant and reports all violations found.
pub fn validate(g: &RawGraph) -> ValidationReport {
    let mut violations = Vec::new();
    let mut used: Vec<Vec<Port>> = vec![Vec::new(); g.nodes];
    let mut pairs: HashMap<(NodeId, NodeId), EdgeId> = HashMap::new();

    for (id, e) in g.edges.iter().enumerate() {
        let mut endpoints_known = true;
        for (node, port) in [(e.u, e.pu), (e.v, e.pv)] {
            if node >= g.nodes {
                violations.push(Violation::UnknownNode { edge: id, node });
                endpoints_known = false;
                continue;
            }
            if port == 0 {
                violations.push(Violation::PortZero { edge: id, node });
            } else {
                used[node].push(port);
            }
        }
        if e.orientation.is_none() {
            violations.push(Violation::MissingOrientation { edge: id });
        }
        if e.u == e.v && e.pu == e.pv {
            violations.push(Violation::LoopReusesPort { edge: id });
        }
        if endpoints_known && e.u != e.v {
            let key = (e.u.min(e.v), e.u.max(e.v));
            match pairs.get(&key) {
                Some(&first) => violations.push(Violation::ParallelEdge { edge: id, first }),
                None => {
                    pairs.insert(key, id);
                }
            }
        }
    }

    for (node, ports) in used.iter_mut().enumerate() {
        ports.sort_unstable();
        let mut seen = BTreeSet::new();
        for &p in ports.iter() {
            if !seen.insert(p) && !violations.contains(&Violation::DuplicatePort { node, port: p }) {
                violations.push(Violation::DuplicatePort { node, port: p });
            }
        }
        let max = ports.last().copied().unwrap_or(0);
        for port in 1..=max {
            if !seen.contains(&port) {
                violations.push(Violation::MissingPort { node, port });
            }
        }
    }

    ValidationReport { violations }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub u: NodeId,
    pub pu: Port,
    pub v: NodeId,
    pub pv: Port,
    pub orientation: Orientation,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.u == self.v
    }

    /// `(node, port)` of the outgoing side.
    pub fn tail(&self) -> (NodeId, Port) {
        match self.orientation {
            Orientation::UV => (self.u, self.pu),
            Orientation::VU => (self.v, self.pv),
        }
    }

    /// `(node, port)` of the incoming side.
    pub fn head(&self) -> (NodeId, Port) {
        match self.orientation {
            Orientation::UV => (self.v, self.pv),
            Orientation::VU => (self.u, self.pu),
        }
    }
}

/// What a node sees behind one of its ports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Incidence {
    pub edge: EdgeId,
    pub peer: NodeId,
    pub peer_port: Port,
    pub outgoing: bool,
}

/// A validated port-numbered graph. Immutable after construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PortGraph {
    edges: Vec<Edge>,
    ports: Vec<Vec<Incidence>>,
}

impl PortGraph {
    pub fn from_raw(raw: RawGraph) -> Result<PortGraph, GraphError> {
        let report = validate(&raw);
        if !report.is_ok() {
            return Err(GraphError::Invalid(report));
        }
        let mut slots: Vec<Vec<Option<Incidence>>> = vec![Vec::new(); raw.nodes];
        let mut edges = Vec::with_capacity(raw.edges.len());
        for (id, e) in raw.edges.into_iter().enumerate() {
            let orientation = e.orientation.expect("validated");
            let u_out = orientation == Orientation::UV;
            for (node, port, peer, peer_port, outgoing) in
                [(e.u, e.pu, e.v, e.pv, u_out), (e.v, e.pv, e.u, e.pu, !u_out)]
            {
                let s = &mut slots[node];
                if s.len() < port {
                    s.resize(port, None);
                }
                s[port - 1] = Some(Incidence { edge: id, peer, peer_port, outgoing });
            }
            edges.push(Edge { u: e.u, pu: e.pu, v: e.v, pv: e.pv, orientation });
        }
        let ports = slots
            .into_iter()
            .map(|s| s.into_iter().map(|i| i.expect("validated")).collect())
            .collect();
        Ok(PortGraph { edges, ports })
    }

    pub fn empty() -> PortGraph {
        PortGraph { edges: Vec::new(), ports: Vec::new() }
    }

    pub fn node_count(&self) -> usize {
        self.ports.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> std::ops::Range<NodeId> {
        0..self.node_count()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.ports[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.ports.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Incidence behind port `p` (1-based) of `v`.
    pub fn port(&self, v: NodeId, p: Port) -> &Incidence {
        &self.ports[v][p - 1]
    }

    /// Incidences of `v` in port order.
    pub fn incidences(&self, v: NodeId) -> &[Incidence] {
        &self.ports[v]
    }

    pub fn outgoing_flags(&self, v: NodeId) -> Vec<bool> {
        self.ports[v].iter().map(|i| i.outgoing).collect()
    }

    pub fn loops_at(&self, v: NodeId) -> Vec<EdgeId> {
        let mut loops: Vec<EdgeId> = self.ports[v]
            .iter()
            .filter(|i| i.peer == v)
            .map(|i| i.edge)
            .collect();
        loops.sort_unstable();
        loops.dedup();
        loops
    }

    pub fn has_loops(&self) -> bool {
        self.edges.iter().any(Edge::is_loop)
    }

    /// Every node carries at least one loop.
    pub fn is_loopy(&self) -> bool {
        self.nodes().all(|v| !self.loops_at(v).is_empty())
    }

    pub fn to_raw(&self) -> RawGraph {
        RawGraph {
            nodes: self.node_count(),
            edges: self
                .edges
                .iter()
                .map(|e| RawEdge { u: e.u, pu: e.pu, v: e.v, pv: e.pv, orientation: Some(e.orientation) })
                .collect(),
        }
    }
}

/// How a subgraph relates to its parent graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubgraphMap {
    /// New node id -> parent node id. Node sets are kept whole, so this is
    /// the identity, but callers should not rely on that.
    pub node_map: Vec<NodeId>,
    /// Per parent node: parent port (index `p - 1`) -> new port, if kept.
    pub port_map: Vec<Vec<Option<Port>>>,
    /// New edge id -> parent edge id.
    pub edge_map: Vec<EdgeId>,
}

impl SubgraphMap {
    /// The map of taking `next` (a subgraph of `self`'s result) directly from
    /// `self`'s parent.
    pub fn compose(&self, next: &SubgraphMap) -> SubgraphMap {
        let node_map = next.node_map.iter().map(|&v| self.node_map[v]).collect();
        let port_map = self
            .port_map
            .iter()
            .enumerate()
            .map(|(v, ports)| {
                ports
                    .iter()
                    .map(|p| p.and_then(|mid| next.port_map[v][mid - 1]))
                    .collect()
            })
            .collect();
        let edge_map = next.edge_map.iter().map(|&e| self.edge_map[e]).collect();
        SubgraphMap { node_map, port_map, edge_map }
    }
}

/// Keeps exactly the listed edges (and all nodes), compacting each node's
/// ports while preserving the relative order of the surviving ones.
pub fn subgraph(g: &PortGraph, keep: &BTreeSet<EdgeId>) -> Result<(PortGraph, SubgraphMap), GraphError> {
    if let Some(&bad) = keep.iter().find(|&&e| e >= g.edge_count()) {
        return Err(GraphError::UnknownEdge(bad));
    }
    let port_map: Vec<Vec<Option<Port>>> = g
        .nodes()
        .map(|v| {
            let mut next = 0;
            g.incidences(v)
                .iter()
                .map(|inc| {
                    keep.contains(&inc.edge).then(|| {
                        next += 1;
                        next
                    })
                })
                .collect()
        })
        .collect();
    let mut raw = RawGraph::new(g.node_count());
    let mut edge_map = Vec::with_capacity(keep.len());
    for &e in keep {
        let old = g.edge(e);
        let pu = port_map[old.u][old.pu - 1].expect("kept");
        let pv = port_map[old.v][old.pv - 1].expect("kept");
        raw.edge(old.u, pu, old.v, pv, old.orientation);
        edge_map.push(e);
    }
    let sub = raw.build()?;
    Ok((sub, SubgraphMap { node_map: g.nodes().collect(), port_map, edge_map }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Side {
    White,
    Black,
}

#[derive(Clone, Debug)]
pub struct DoubleCover {
    pub graph: PortGraph,
    /// Original node -> (white copy, black copy).
    pub copies: Vec<(NodeId, NodeId)>,
    pub coloring: Vec<Side>,
}

/// Bipartite double cover: `v -> (v1, v2)`, and each edge `{u, v}` becomes
/// `{u1, v2}` (edge `2e`) and `{u2, v1}` (edge `2e + 1`), both with the
/// original ports and orientation.
pub fn double_cover(g: &PortGraph) -> Result<DoubleCover, GraphError> {
    if g.has_loops() {
        return Err(GraphError::LoopsPresent);
    }
    let n = g.node_count();
    let mut raw = RawGraph::new(2 * n);
    for e in g.edges() {
        raw.edge(e.u, e.pu, n + e.v, e.pv, e.orientation);
        raw.edge(n + e.u, e.pu, e.v, e.pv, e.orientation);
    }
    let coloring = (0..2 * n)
        .map(|x| if x < n { Side::White } else { Side::Black })
        .collect();
    Ok(DoubleCover { graph: raw.build()?, copies: (0..n).map(|v| (v, n + v)).collect(), coloring })
}

/// A proper white/black colouring by breadth-first search, if the graph is
/// bipartite. Loops make a graph non-bipartite.
pub fn two_coloring(g: &PortGraph) -> Option<Vec<Side>> {
    let mut side: Vec<Option<Side>> = vec![None; g.node_count()];
    for s in g.nodes() {
        if side[s].is_some() {
            continue;
        }
        side[s] = Some(Side::White);
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            let other = match side[v] {
                Some(Side::White) => Side::Black,
                _ => Side::White,
            };
            for inc in g.incidences(v) {
                match side[inc.peer] {
                    None => {
                        side[inc.peer] = Some(other);
                        queue.push_back(inc.peer);
                    }
                    Some(c) if c != other => return None,
                    Some(_) => {}
                }
            }
        }
    }
    side.into_iter().collect()
}

/// Truncated universal cover around one lift of a node.
#[derive(Clone, Debug)]
pub struct Unfolding {
    pub tree: PortGraph,
    pub root: NodeId,
    /// Tree node -> node of the original graph.
    pub preimage: Vec<NodeId>,
    pub distance: Vec<usize>,
}

const UNFOLD_NODE_LIMIT: usize = 4_000_000;

/// Unrolls every loop (and every cycle) of `g` into a tree, out to `depth`
/// hops from the lift of `anchor`. Nodes strictly inside the radius keep
/// their original ports; nodes at distance `depth` keep only the edge
/// towards the root, renumbered to port 1.
pub fn unfold_loops(g: &PortGraph, depth: usize, anchor: NodeId) -> Result<Unfolding, GraphError> {
    if anchor >= g.node_count() {
        return Err(GraphError::UnknownNode(anchor));
    }
    let mut preimage = vec![anchor];
    let mut distance = vec![0];
    let mut raw = RawGraph::new(0);
    // (tree node, arrival port at its preimage)
    let mut queue: VecDeque<(NodeId, Option<Port>)> = VecDeque::from([(0, None)]);

    while let Some((t, arrival)) = queue.pop_front() {
        let dist = distance[t];
        if dist == depth {
            continue;
        }
        let v = preimage[t];
        for (idx, inc) in g.incidences(v).iter().enumerate() {
            let p = idx + 1;
            if Some(p) == arrival {
                continue;
            }
            let child = preimage.len();
            if child >= UNFOLD_NODE_LIMIT {
                return Err(GraphError::TooLarge(UNFOLD_NODE_LIMIT));
            }
            preimage.push(inc.peer);
            distance.push(dist + 1);
            let child_port = if dist + 1 == depth { 1 } else { inc.peer_port };
            let dir = if inc.outgoing { Orientation::UV } else { Orientation::VU };
            raw.edge(t, p, child, child_port, dir);
            queue.push_back((child, Some(inc.peer_port)));
        }
    }
    raw.nodes = preimage.len();
    Ok(Unfolding { tree: raw.build()?, root: 0, preimage, distance })
}

/// True iff the graph without its loops has no cycle.
pub fn is_forest_ignoring_loops(g: &PortGraph) -> bool {
    let mut parent: Vec<NodeId> = g.nodes().collect();
    fn find(parent: &mut [NodeId], mut x: NodeId) -> NodeId {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for e in g.edges().iter().filter(|e| !e.is_loop()) {
        let (a, b) = (find(&mut parent, e.u), find(&mut parent, e.v));
        if a == b {
            return false;
        }
        parent[a] = b;
    }
    true
}

/// Canonical string of the rooted, port-labelled, oriented tree hanging
/// from `root`. Two rooted trees receive the same string iff there is an
/// isomorphism between them preserving ports and orientations.
pub fn rooted_tree_encoding(tree: &PortGraph, root: NodeId) -> String {
    let mut out = String::new();
    // explicit stack: (node, arrival port, next port index to visit)
    let mut stack: Vec<(NodeId, Option<Port>, usize)> = vec![(root, None, 0)];
    out.push_str(&format!("<{}", tree.degree(root)));
    while let Some(top) = stack.last_mut() {
        let (v, arrival, idx) = *top;
        if idx == tree.degree(v) {
            out.push('>');
            stack.pop();
            continue;
        }
        top.2 += 1;
        let p = idx + 1;
        if Some(p) == arrival {
            continue;
        }
        let inc = tree.port(v, p);
        let arrow = if inc.outgoing { '>' } else { '<' };
        out.push_str(&format!(" {p}{arrow}{}:", inc.peer_port));
        out.push_str(&format!("<{}", tree.degree(inc.peer)));
        stack.push((inc.peer, Some(inc.peer_port), 0));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> PortGraph {
        let mut raw = RawGraph::new(3);
        raw.edge(0, 1, 1, 1, Orientation::UV);
        raw.edge(1, 2, 2, 1, Orientation::UV);
        raw.build().unwrap()
    }

    fn cycle(n: usize) -> PortGraph {
        let mut raw = RawGraph::new(n);
        for i in 0..n {
            raw.edge(i, 1, (i + 1) % n, 2, Orientation::UV);
        }
        raw.build().unwrap()
    }

    fn single_loop() -> PortGraph {
        let mut raw = RawGraph::new(1);
        raw.self_loop(0, 1, 2);
        raw.build().unwrap()
    }

    #[test]
    fn validate_minimal_graphs() {
        let mut raw = RawGraph::new(1);
        raw.self_loop(0, 1, 2);
        assert!(validate(&raw).is_ok());
        assert_eq!(raw.build().unwrap().degree(0), 2);

        let mut raw = RawGraph::new(2);
        raw.edge(0, 1, 1, 1, Orientation::VU);
        assert!(validate(&raw).is_ok());
    }

    #[test]
    fn validate_reports_gap() {
        let mut raw = RawGraph::new(3);
        raw.edge(0, 1, 1, 1, Orientation::UV);
        raw.edge(0, 3, 2, 1, Orientation::UV);
        let report = validate(&raw);
        assert_eq!(report.violations, vec![Violation::MissingPort { node: 0, port: 2 }]);
        assert_eq!(report.to_string(), "node 0: port 2 missing");
    }

    #[test]
    fn validate_reports_every_violation() {
        let raw = RawGraph {
            nodes: 2,
            edges: vec![
                RawEdge { u: 0, pu: 1, v: 1, pv: 1, orientation: None },
                RawEdge { u: 0, pu: 1, v: 5, pv: 1, orientation: Some(Orientation::UV) },
                RawEdge { u: 1, pu: 2, v: 1, pv: 2, orientation: Some(Orientation::UV) },
                RawEdge { u: 1, pu: 3, v: 0, pv: 0, orientation: Some(Orientation::UV) },
            ],
        };
        let v = validate(&raw).violations;
        assert!(v.contains(&Violation::MissingOrientation { edge: 0 }));
        assert!(v.contains(&Violation::UnknownNode { edge: 1, node: 5 }));
        assert!(v.contains(&Violation::DuplicatePort { node: 0, port: 1 }));
        assert!(v.contains(&Violation::LoopReusesPort { edge: 2 }));
        assert!(v.contains(&Violation::PortZero { edge: 3, node: 0 }));
        assert!(v.contains(&Violation::ParallelEdge { edge: 3, first: 0 }));
    }

    #[test]
    fn incidences_of_a_loop() {
        let g = single_loop();
        let out = g.port(0, 1);
        let inc = g.port(0, 2);
        assert!(out.outgoing && !inc.outgoing);
        assert_eq!((out.peer, out.peer_port), (0, 2));
        assert_eq!((inc.peer, inc.peer_port), (0, 1));
        assert_eq!(g.loops_at(0), vec![0]);
        assert!(g.is_loopy());
    }

    #[test]
    fn subgraph_single_edge_of_path() {
        let g = path3();
        let (sub, map) = subgraph(&g, &BTreeSet::from([0])).unwrap();
        assert_eq!(sub.edge_count(), 1);
        assert_eq!((sub.edge(0).pu, sub.edge(0).pv), (1, 1));
        assert_eq!(sub.degree(2), 0);
        assert_eq!(map.edge_map, vec![0]);
    }

    #[test]
    fn subgraph_compacts_in_order() {
        let mut raw = RawGraph::new(4);
        for leaf in 1..=3 {
            raw.edge(0, leaf, leaf, 1, Orientation::UV);
        }
        let g = raw.build().unwrap();
        let (sub, map) = subgraph(&g, &BTreeSet::from([0, 2])).unwrap();
        assert_eq!(map.port_map[0], vec![Some(1), None, Some(2)]);
        assert_eq!(sub.port(0, 1).peer, 1);
        assert_eq!(sub.port(0, 2).peer, 3);
        assert_eq!(sub.degree(0), 2);
    }

    #[test]
    fn subgraph_identity_and_errors() {
        let g = cycle(4);
        let all: BTreeSet<EdgeId> = (0..4).collect();
        let (sub, map) = subgraph(&g, &all).unwrap();
        assert_eq!(sub, g);
        for v in 0..4 {
            assert_eq!(map.port_map[v], vec![Some(1), Some(2)]);
        }
        assert_eq!(subgraph(&g, &BTreeSet::from([9])).unwrap_err(), GraphError::UnknownEdge(9));
    }

    #[test]
    fn subgraph_maps_compose() {
        let mut raw = RawGraph::new(5);
        for leaf in 1..=4 {
            raw.edge(0, leaf, leaf, 1, Orientation::UV);
        }
        let g = raw.build().unwrap();
        let (g1, m1) = subgraph(&g, &BTreeSet::from([0, 1, 3])).unwrap();
        let (g2, m2) = subgraph(&g1, &BTreeSet::from([1, 2])).unwrap();
        let composed = m1.compose(&m2);
        let (direct, md) = subgraph(&g, &BTreeSet::from([1, 3])).unwrap();
        assert_eq!(g2, direct);
        assert_eq!(composed, md);
    }

    fn check_covering(g: &PortGraph, cover: &DoubleCover) {
        let n = g.node_count();
        assert_eq!(cover.graph.edge_count(), 2 * g.edge_count());
        for (x, side) in cover.coloring.iter().enumerate() {
            let base = x % n;
            assert_eq!(cover.graph.degree(x), g.degree(base));
            for p in 1..=g.degree(base) {
                let lifted = cover.graph.port(x, p);
                let orig = g.port(base, p);
                assert_eq!(lifted.peer % n, orig.peer);
                assert_eq!(lifted.peer_port, orig.peer_port);
                assert_eq!(lifted.outgoing, orig.outgoing);
                assert_ne!(cover.coloring[lifted.peer], *side);
            }
        }
    }

    fn components(g: &PortGraph) -> Vec<usize> {
        let mut seen = vec![false; g.node_count()];
        let mut sizes = Vec::new();
        for s in g.nodes() {
            if seen[s] {
                continue;
            }
            let mut stack = vec![s];
            seen[s] = true;
            let mut size = 0;
            while let Some(v) = stack.pop() {
                size += 1;
                for inc in g.incidences(v) {
                    if !seen[inc.peer] {
                        seen[inc.peer] = true;
                        stack.push(inc.peer);
                    }
                }
            }
            sizes.push(size);
        }
        sizes.sort_unstable();
        sizes
    }

    #[test]
    fn double_cover_of_edge_triangle_and_path() {
        let mut raw = RawGraph::new(2);
        raw.edge(0, 1, 1, 1, Orientation::UV);
        let edge = raw.build().unwrap();
        let c = double_cover(&edge).unwrap();
        check_covering(&edge, &c);
        assert_eq!(components(&c.graph), vec![2, 2]);

        let c3 = cycle(3);
        let c = double_cover(&c3).unwrap();
        check_covering(&c3, &c);
        assert_eq!(components(&c.graph), vec![6]);
        assert!((0..6).all(|v| c.graph.degree(v) == 2));

        let p3 = path3();
        let c = double_cover(&p3).unwrap();
        check_covering(&p3, &c);
        assert_eq!(components(&c.graph), vec![3, 3]);

        assert_eq!(double_cover(&single_loop()).unwrap_err(), GraphError::LoopsPresent);
    }

    #[test]
    fn unfold_single_loop_is_directed_path() {
        let u = unfold_loops(&single_loop(), 3, 0).unwrap();
        assert_eq!(u.tree.node_count(), 7);
        assert!(is_forest_ignoring_loops(&u.tree));
        let indeg = |v: NodeId| u.tree.incidences(v).iter().filter(|i| !i.outgoing).count();
        let outdeg = |v: NodeId| u.tree.incidences(v).iter().filter(|i| i.outgoing).count();
        assert_eq!((indeg(u.root), outdeg(u.root)), (1, 1));
        for v in u.tree.nodes() {
            assert!(indeg(v) <= 1 && outdeg(v) <= 1);
        }
        assert_eq!(u.tree.nodes().filter(|&v| u.tree.degree(v) == 1).count(), 2);
    }

    #[test]
    fn unfold_two_loops_gives_four_regular_root() {
        let mut raw = RawGraph::new(1);
        raw.self_loop(0, 1, 2);
        raw.self_loop(0, 3, 4);
        let g = raw.build().unwrap();
        let u = unfold_loops(&g, 1, 0).unwrap();
        let root = u.tree.incidences(u.root);
        assert_eq!(root.iter().filter(|i| i.outgoing).count(), 2);
        assert_eq!(root.iter().filter(|i| !i.outgoing).count(), 2);
        assert_eq!(u.tree.node_count(), 5);
    }

    #[test]
    fn unfold_tree_is_identity() {
        let g = path3();
        let u = unfold_loops(&g, 5, 1).unwrap();
        assert_eq!(u.tree.node_count(), 3);
        let direct = rooted_tree_encoding(&g, 1);
        assert_eq!(rooted_tree_encoding(&u.tree, u.root), direct);
    }

    #[test]
    fn unfold_preserves_profiles_inside_radius() {
        let mut raw = RawGraph::new(3);
        raw.self_loop(0, 1, 3);
        raw.edge(0, 2, 1, 2, Orientation::VU);
        raw.self_loop(1, 3, 1);
        raw.edge(1, 4, 2, 1, Orientation::UV);
        raw.self_loop(2, 2, 3);
        let g = raw.build().unwrap();
        let depth = 4;
        let u = unfold_loops(&g, depth, 1).unwrap();
        for t in u.tree.nodes() {
            if u.distance[t] < depth {
                let v = u.preimage[t];
                assert_eq!(u.tree.degree(t), g.degree(v));
                assert_eq!(u.tree.outgoing_flags(t), g.outgoing_flags(v));
                for p in 1..=g.degree(v) {
                    let inc = u.tree.port(t, p);
                    assert_eq!(u.preimage[inc.peer], g.port(v, p).peer);
                    // leaves are renumbered to port 1
                    if u.distance[inc.peer] < depth {
                        assert_eq!(inc.peer_port, g.port(v, p).peer_port);
                    }
                }
            }
        }
    }

    #[test]
    fn two_colorings() {
        let mut raw = RawGraph::new(4);
        for i in 0..4 {
            raw.edge(i, 1, (i + 1) % 4, 2, Orientation::UV);
        }
        let c = two_coloring(&raw.build().unwrap()).unwrap();
        assert_eq!(c, vec![Side::White, Side::Black, Side::White, Side::Black]);
        let mut raw = RawGraph::new(3);
        for i in 0..3 {
            raw.edge(i, 1, (i + 1) % 3, 2, Orientation::UV);
        }
        assert!(two_coloring(&raw.build().unwrap()).is_none());
        let mut raw = RawGraph::new(1);
        raw.self_loop(0, 1, 2);
        assert!(two_coloring(&raw.build().unwrap()).is_none());
    }

    #[test]
    fn forest_checks() {
        let mut raw = RawGraph::new(1);
        raw.self_loop(0, 1, 2);
        raw.self_loop(0, 3, 4);
        assert!(is_forest_ignoring_loops(&raw.build().unwrap()));
        assert!(!is_forest_ignoring_loops(&cycle(3)));
        assert!(is_forest_ignoring_loops(&path3()));
    }

    #[test]
    fn encoding_distinguishes_ports_and_orientation() {
        let a = path3();
        let mut raw = RawGraph::new(3);
        raw.edge(0, 1, 1, 1, Orientation::VU);
        raw.edge(1, 2, 2, 1, Orientation::UV);
        let b = raw.build().unwrap();
        assert_ne!(rooted_tree_encoding(&a, 1), rooted_tree_encoding(&b, 1));
        assert_eq!(rooted_tree_encoding(&a, 1), rooted_tree_encoding(&a.clone(), 1));
    }
}
