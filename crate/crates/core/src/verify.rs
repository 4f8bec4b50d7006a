//! Exact checks for fractional matchings.

use serde::Serialize;
use thiserror::Error;

use crate::graph::{EdgeId, NodeId, PortGraph};
use crate::rational::{Rat, ValueSet};

/// The fractional matching `x`: one value per edge, indexed by edge id.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct EdgeAssignment(Vec<Rat>);

impl EdgeAssignment {
    pub fn new(values: Vec<Rat>) -> EdgeAssignment {
        EdgeAssignment(values)
    }

    pub fn zeros(edges: usize) -> EdgeAssignment {
        EdgeAssignment(vec![Rat::zero(); edges])
    }

    pub fn values(&self) -> &[Rat] {
        &self.0
    }

    pub fn get(&self, e: EdgeId) -> &Rat {
        &self.0[e]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_values(self) -> Vec<Rat> {
        self.0
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error("assignment has {got} values for {expected} edges")]
    NotTotal { expected: usize, got: usize },
    #[error("edge {edge} carries {value}, which is not half-integral")]
    NotHalfIntegral { edge: EdgeId, value: Rat },
}

fn check_total(g: &PortGraph, x: &EdgeAssignment) -> Result<(), VerifyError> {
    if x.len() != g.edge_count() {
        return Err(VerifyError::NotTotal { expected: g.edge_count(), got: x.len() });
    }
    Ok(())
}

/// `x[v]`: the sum of the values behind every port of `v`. A loop occupies
/// two ports and is therefore counted twice.
pub fn node_load(g: &PortGraph, x: &EdgeAssignment, v: NodeId) -> Rat {
    g.incidences(v).iter().map(|inc| x.get(inc.edge)).sum()
}

pub fn node_loads(g: &PortGraph, x: &EdgeAssignment) -> Vec<Rat> {
    g.nodes().map(|v| node_load(g, x, v)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NodeWitness {
    pub node: NodeId,
    pub load: Rat,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EdgeWitness {
    pub edge: EdgeId,
    pub value: Rat,
    pub load_u: Rat,
    pub load_v: Rat,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValueVerdict {
    pub edge: EdgeId,
    pub value: Rat,
    pub class: u64,
    pub in_set: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub feasible: bool,
    pub maximal: bool,
    pub value_set: Option<String>,
    pub values_ok: bool,
    pub saturated: Vec<NodeId>,
    pub overloaded: Vec<NodeWitness>,
    pub out_of_range: Vec<EdgeId>,
    pub unsaturated_edges: Vec<EdgeWitness>,
    pub value_verdicts: Vec<ValueVerdict>,
}

impl VerifyReport {
    /// Feasible, maximal and within the requested value set.
    pub fn is_valid_mfm(&self) -> bool {
        self.feasible && self.maximal && self.values_ok
    }
}

/// Checks feasibility (`x[v] <= 1`, `x(e) <= 1`), maximality (every edge
/// has a saturated endpoint; for a loop this is its only endpoint) and,
/// when asked, membership of every value in `value_set`.
pub fn verify(g: &PortGraph, x: &EdgeAssignment, value_set: Option<ValueSet>) -> Result<VerifyReport, VerifyError> {
    check_total(g, x)?;
    let loads = node_loads(g, x);
    let one = Rat::one();

    let overloaded: Vec<NodeWitness> = loads
        .iter()
        .enumerate()
        .filter(|(_, l)| **l > one)
        .map(|(node, l)| NodeWitness { node, load: l.clone() })
        .collect();
    let out_of_range: Vec<EdgeId> = (0..g.edge_count()).filter(|&e| *x.get(e) > one).collect();
    let saturated: Vec<NodeId> = g.nodes().filter(|&v| loads[v].is_one()).collect();
    let unsaturated_edges: Vec<EdgeWitness> = g
        .edges()
        .iter()
        .enumerate()
        .filter(|(_, e)| !loads[e.u].is_one() && !loads[e.v].is_one())
        .map(|(edge, e)| EdgeWitness {
            edge,
            value: x.get(edge).clone(),
            load_u: loads[e.u].clone(),
            load_v: loads[e.v].clone(),
        })
        .collect();
    let value_verdicts: Vec<ValueVerdict> = match value_set {
        None => Vec::new(),
        Some(set) => x
            .values()
            .iter()
            .enumerate()
            .map(|(edge, value)| ValueVerdict {
                edge,
                value: value.clone(),
                class: value.class_index(),
                in_set: set.contains(value),
            })
            .collect(),
    };
    let feasible = overloaded.is_empty() && out_of_range.is_empty();
    Ok(VerifyReport {
        feasible,
        maximal: unsaturated_edges.is_empty(),
        value_set: value_set.map(|s| s.to_string()),
        values_ok: value_verdicts.iter().all(|v| v.in_set),
        saturated,
        overloaded,
        out_of_range,
        unsaturated_edges,
        value_verdicts,
    })
}

fn check_half_integral(g: &PortGraph, x: &EdgeAssignment) -> Result<(), VerifyError> {
    check_total(g, x)?;
    match x.values().iter().enumerate().find(|(_, v)| !v.is_half_integral()) {
        Some((edge, value)) => Err(VerifyError::NotHalfIntegral { edge, value: value.clone() }),
        None => Ok(()),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AlmostSaturatingReport {
    pub feasible: bool,
    /// Load-0 nodes with some neighbour that is not saturated.
    pub zero_load_violations: Vec<NodeId>,
    /// Load-1/2 nodes without a saturated neighbour.
    pub half_load_violations: Vec<NodeId>,
}

impl AlmostSaturatingReport {
    pub fn is_almost_saturating(&self) -> bool {
        self.feasible && self.zero_load_violations.is_empty() && self.half_load_violations.is_empty()
    }
}

/// Checks both almost-saturating clauses for a half-integral `x`. A loop
/// makes a node its own neighbour.
pub fn check_almost_saturating(g: &PortGraph, x: &EdgeAssignment) -> Result<AlmostSaturatingReport, VerifyError> {
    check_half_integral(g, x)?;
    let loads = node_loads(g, x);
    let half = Rat::half();
    let mut zero_load_violations = Vec::new();
    let mut half_load_violations = Vec::new();
    for v in g.nodes() {
        let mut neighbours = g.incidences(v).iter().map(|inc| &loads[inc.peer]);
        if loads[v].is_zero() {
            if !neighbours.all(Rat::is_one) {
                zero_load_violations.push(v);
            }
        } else if loads[v] == half && !neighbours.any(Rat::is_one) {
            half_load_violations.push(v);
        }
    }
    Ok(AlmostSaturatingReport {
        feasible: loads.iter().all(|l| *l <= Rat::one()),
        zero_load_violations,
        half_load_violations,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SaturationClasses {
    /// Both endpoints at load exactly 1/2.
    pub half_saturated: Vec<EdgeId>,
    /// Some endpoint at load 1.
    pub fully_saturated: Vec<EdgeId>,
    pub other: Vec<EdgeId>,
}

pub fn classify_saturation(g: &PortGraph, x: &EdgeAssignment) -> Result<SaturationClasses, VerifyError> {
    check_half_integral(g, x)?;
    let loads = node_loads(g, x);
    let half = Rat::half();
    let mut out = SaturationClasses::default();
    for (id, e) in g.edges().iter().enumerate() {
        if loads[e.u].is_one() || loads[e.v].is_one() {
            out.fully_saturated.push(id);
        } else if loads[e.u] == half && loads[e.v] == half {
            out.half_saturated.push(id);
        } else {
            out.other.push(id);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Orientation, RawGraph};
    use proptest::prelude::*;

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    fn assign(vals: &[&str]) -> EdgeAssignment {
        EdgeAssignment::new(vals.iter().map(|s| r(s)).collect())
    }

    fn cycle(n: usize) -> PortGraph {
        let mut raw = RawGraph::new(n);
        for i in 0..n {
            raw.edge(i, 1, (i + 1) % n, 2, Orientation::UV);
        }
        raw.build().unwrap()
    }

    fn path(n: usize) -> PortGraph {
        let mut raw = RawGraph::new(n);
        for i in 0..n.saturating_sub(1) {
            let pu = if i == 0 { 1 } else { 2 };
            raw.edge(i, pu, i + 1, 1, Orientation::UV);
        }
        raw.build().unwrap()
    }

    #[test]
    fn loads() {
        let mut raw = RawGraph::new(1);
        raw.self_loop(0, 1, 2);
        let g = raw.build().unwrap();
        assert_eq!(node_load(&g, &assign(&["1/2"]), 0), Rat::one());

        let mut raw = RawGraph::new(5);
        raw.edge(0, 1, 1, 1, Orientation::UV);
        raw.edge(0, 2, 2, 1, Orientation::UV);
        raw.edge(0, 3, 3, 1, Orientation::UV);
        let g = raw.build().unwrap();
        let x = assign(&["1/4", "1/4", "1/2"]);
        assert_eq!(node_load(&g, &x, 0), Rat::one());
        assert_eq!(node_load(&g, &x, 4), Rat::zero());
    }

    #[test]
    fn verify_basic_cases() {
        let rep = verify(&cycle(4), &assign(&["1/2"; 4]), Some(ValueSet::Dyadic(1))).unwrap();
        assert!(rep.is_valid_mfm());
        assert_eq!(rep.saturated, vec![0, 1, 2, 3]);

        let rep = verify(&path(2), &assign(&["1/2"]), None).unwrap();
        assert!(rep.feasible && !rep.maximal);
        assert_eq!(rep.unsaturated_edges[0].edge, 0);

        let rep = verify(&cycle(4), &assign(&["1/2"; 4]), Some(ValueSet::ClassAtMost(0))).unwrap();
        assert!(!rep.values_ok);
        assert!(rep.value_verdicts.iter().all(|v| v.class == 1));
    }

    #[test]
    fn fractional_star_is_maximal() {
        let mut raw = RawGraph::new(4);
        for leaf in 1..=3 {
            raw.edge(0, leaf, leaf, 1, Orientation::UV);
        }
        let g = raw.build().unwrap();
        let rep = verify(&g, &assign(&["1/3", "1/3", "1/3"]), None).unwrap();
        assert!(rep.feasible && rep.maximal);
        assert_eq!(rep.saturated, vec![0]);
    }

    #[test]
    fn overload_and_not_total() {
        let rep = verify(&path(3), &assign(&["1", "1/2"]), None).unwrap();
        assert!(!rep.feasible && !rep.is_valid_mfm());
        assert_eq!(rep.overloaded, vec![NodeWitness { node: 1, load: r("3/2") }]);
        assert!(matches!(verify(&path(3), &assign(&["1"]), None), Err(VerifyError::NotTotal { .. })));
    }

    #[test]
    fn unsaturated_loop_is_never_maximal() {
        let mut raw = RawGraph::new(1);
        raw.self_loop(0, 1, 2);
        raw.self_loop(0, 3, 4);
        let g = raw.build().unwrap();
        assert!(!verify(&g, &assign(&["1/4", "0"]), None).unwrap().maximal);
        assert!(verify(&g, &assign(&["1/4", "1/4"]), None).unwrap().maximal);
    }

    #[test]
    fn almost_saturating_cases() {
        let rep = check_almost_saturating(&path(2), &assign(&["1"])).unwrap();
        assert!(rep.is_almost_saturating());
        let rep = check_almost_saturating(&path(3), &assign(&["1/2", "1/2"])).unwrap();
        assert!(rep.is_almost_saturating());
        let rep = check_almost_saturating(&path(2), &assign(&["1/2"])).unwrap();
        assert_eq!(rep.half_load_violations, vec![0, 1]);
        let rep = check_almost_saturating(&path(3), &assign(&["0", "0"])).unwrap();
        assert_eq!(rep.zero_load_violations, vec![0, 1, 2]);
        assert!(matches!(
            check_almost_saturating(&path(2), &assign(&["1/3"])),
            Err(VerifyError::NotHalfIntegral { edge: 0, .. })
        ));
    }

    #[test]
    fn saturation_classes() {
        let c = classify_saturation(&path(3), &assign(&["1/2", "1/2"])).unwrap();
        assert_eq!(c.fully_saturated, vec![0, 1]);
        assert!(c.half_saturated.is_empty() && c.other.is_empty());

        // loads: 1/2, 1/2, 1/2, 1/2 -> every edge half-saturated, including
        // the two 0-edges
        let c = classify_saturation(&cycle(4), &assign(&["1/2", "0", "1/2", "0"])).unwrap();
        assert_eq!(c.half_saturated, vec![0, 1, 2, 3]);

        // loads: a=1/2, b=1, c=1/2, d=0
        let c = classify_saturation(&cycle(4), &assign(&["1/2", "1/2", "0", "0"])).unwrap();
        assert_eq!(c.fully_saturated, vec![0, 1]);
        assert_eq!(c.other, vec![2, 3]);

        let c = classify_saturation(&cycle(4), &assign(&["1", "0", "1", "0"])).unwrap();
        assert_eq!(c.fully_saturated, vec![0, 1, 2, 3]);
    }

    fn small_graph() -> impl Strategy<Value = PortGraph> {
        (2usize..6, proptest::collection::vec((0usize..6, 0usize..6), 0..7)).prop_map(|(n, pairs)| {
            let mut deg = vec![0usize; n];
            let mut seen = std::collections::BTreeSet::new();
            let mut raw = RawGraph::new(n);
            for (a, b) in pairs {
                let (a, b) = (a % n, b % n);
                if a == b || !seen.insert((a.min(b), a.max(b))) {
                    continue;
                }
                deg[a] += 1;
                deg[b] += 1;
                raw.edge(a, deg[a], b, deg[b], Orientation::UV);
            }
            raw.build().unwrap()
        })
    }

    proptest! {
        #[test]
        fn verify_agrees_with_direct_summation(
            g in small_graph(),
            nums in proptest::collection::vec(0u64..=4, 7),
        ) {
            let x = EdgeAssignment::new((0..g.edge_count()).map(|e| Rat::new(nums[e], 4)).collect());
            let mut loads = vec![Rat::zero(); g.node_count()];
            for (e, edge) in g.edges().iter().enumerate() {
                loads[edge.u] = &loads[edge.u] + x.get(e);
                loads[edge.v] = &loads[edge.v] + x.get(e);
            }
            let feasible = loads.iter().all(|l| *l <= Rat::one());
            let maximal = g.edges().iter().all(|e| loads[e.u].is_one() || loads[e.v].is_one());
            let rep = verify(&g, &x, None).unwrap();
            prop_assert_eq!(rep.feasible, feasible);
            prop_assert_eq!(rep.maximal, maximal);
            for w in &rep.overloaded {
                prop_assert!(node_load(&g, &x, w.node) > Rat::one());
            }
        }
    }
}
