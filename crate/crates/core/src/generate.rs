//! Seeded instance generators. Port numbers and orientations are drawn
//! uniformly at random so the algorithms see adversarial-looking inputs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{NodeId, Orientation, PortGraph, RawGraph};

/// Builds a graph from an undirected simple edge list, shuffling the ports
/// at every node and orienting each edge at random.
pub fn with_random_ports(n: usize, pairs: &[(NodeId, NodeId)], rng: &mut impl Rng) -> PortGraph {
    let mut degree = vec![0usize; n];
    for &(u, v) in pairs {
        degree[u] += 1;
        degree[v] += 1;
    }
    let mut ports: Vec<Vec<usize>> = degree
        .iter()
        .map(|&d| {
            let mut p: Vec<usize> = (1..=d).collect();
            p.shuffle(rng);
            p
        })
        .collect();
    let mut raw = RawGraph::new(n);
    for &(u, v) in pairs {
        let pu = ports[u].pop().expect("degree counted");
        let pv = ports[v].pop().expect("degree counted");
        let dir = if rng.gen() { Orientation::UV } else { Orientation::VU };
        raw.edge(u, pu, v, pv, dir);
    }
    raw.build().expect("simple graph with consistent ports")
}

pub fn path(n: usize, seed: u64) -> PortGraph {
    let pairs: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    with_random_ports(n, &pairs, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Cycle on `n >= 3` nodes.
pub fn cycle(n: usize, seed: u64) -> PortGraph {
    assert!(n >= 3, "a simple cycle needs at least 3 nodes");
    let pairs: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    with_random_ports(n, &pairs, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Random simple graph on `n` nodes with maximum degree at most `delta`.
///
/// Edges are proposed between uniformly random node pairs and kept while
/// both endpoints have spare degree; the number of proposals is itself
/// random, so the results range from sparse forests to nearly
/// `delta`-regular graphs.
pub fn random_graph(n: usize, delta: usize, seed: u64) -> PortGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut degree = vec![0usize; n];
    let mut present = std::collections::HashSet::new();
    let mut pairs = Vec::new();
    if n >= 2 && delta >= 1 {
        let attempts = rng.gen_range(n..=4 * n * delta);
        for _ in 0..attempts {
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n);
            if u == v || degree[u] >= delta || degree[v] >= delta || !present.insert((u.min(v), u.max(v))) {
                continue;
            }
            degree[u] += 1;
            degree[v] += 1;
            pairs.push((u, v));
        }
    }
    with_random_ports(n, &pairs, &mut rng)
}

/// One node with `d` oriented loops; loop `k` leaves through port `2k - 1`
/// and enters through port `2k`.
pub fn g0(d: usize) -> PortGraph {
    let mut raw = RawGraph::new(1);
    for k in 1..=d {
        raw.self_loop(0, 2 * k - 1, 2 * k);
    }
    raw.build().expect("valid by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::write_graph;

    #[test]
    fn deterministic() {
        assert_eq!(write_graph(&random_graph(50, 5, 7)), write_graph(&random_graph(50, 5, 7)));
        assert_ne!(write_graph(&random_graph(50, 5, 7)), write_graph(&random_graph(50, 5, 8)));
    }

    #[test]
    fn degree_bound_respected() {
        for seed in 0..20 {
            let g = random_graph(60, 3, seed);
            assert!(g.max_degree() <= 3);
            assert!(!g.has_loops());
        }
        assert!((0..20).any(|s| random_graph(60, 3, s).max_degree() == 3));
    }

    #[test]
    fn shapes() {
        let c = cycle(8, 1);
        assert_eq!((c.node_count(), c.edge_count(), c.max_degree()), (8, 8, 2));
        let p = path(5, 1);
        assert_eq!((p.node_count(), p.edge_count()), (5, 4));
        assert_eq!(path(1, 0).edge_count(), 0);
        let g = g0(2);
        assert_eq!((g.node_count(), g.edge_count(), g.degree(0)), (1, 2, 4));
        assert!(g.is_loopy());
    }
}
