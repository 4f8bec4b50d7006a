//! Brute-force oracles for small instances. Nothing here reuses the
//! verifier's load computation, so the two can check each other.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{NodeId, Orientation, PortGraph, RawGraph};
use crate::rational::Rat;
use crate::verify::EdgeAssignment;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("search space of {0} assignments exceeds the limit of {SEARCH_LIMIT}")]
    TooLarge(f64),
    #[error("target {target} is not in R_{n}")]
    TargetClass { target: Rat, n: u64 },
}

pub const SEARCH_LIMIT: f64 = 1e7;

/// Every maximal fractional matching of `g` whose values all lie in
/// `values`, in lexicographic order of the value indices.
pub fn exhaustive_mfm_search(g: &PortGraph, values: &[Rat]) -> Result<Vec<EdgeAssignment>, OracleError> {
    let mut values: Vec<Rat> = values.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    values.retain(|v| *v <= Rat::one());
    let space = (values.len() as f64).powi(g.edge_count() as i32);
    if space > SEARCH_LIMIT {
        return Err(OracleError::TooLarge(space));
    }
    let m = g.edge_count();
    let ends: Vec<(NodeId, NodeId)> = g.edges().iter().map(|e| (e.u, e.v)).collect();
    let mut load = vec![Rat::zero(); g.node_count()];
    let mut choice = vec![0usize; m];
    let mut out = Vec::new();

    fn add(load: &mut [Rat], (u, v): (NodeId, NodeId), x: &Rat) {
        // a loop meets its node twice
        load[u] = &load[u] + x;
        load[v] = &load[v] + x;
    }
    fn sub(load: &mut [Rat], (u, v): (NodeId, NodeId), x: &Rat) {
        load[u] = load[u].sub_clamped_at_zero(x);
        load[v] = load[v].sub_clamped_at_zero(x);
    }

    fn rec(
        e: usize,
        ends: &[(NodeId, NodeId)],
        values: &[Rat],
        load: &mut Vec<Rat>,
        choice: &mut Vec<usize>,
        out: &mut Vec<EdgeAssignment>,
    ) {
        if e == ends.len() {
            if ends.iter().all(|&(u, v)| load[u].is_one() || load[v].is_one()) {
                out.push(EdgeAssignment::new(choice.iter().map(|&i| values[i].clone()).collect()));
            }
            return;
        }
        for (i, x) in values.iter().enumerate() {
            add(load, ends[e], x);
            let (u, v) = ends[e];
            if load[u] <= Rat::one() && load[v] <= Rat::one() {
                choice[e] = i;
                rec(e + 1, ends, values, load, choice, out);
            }
            sub(load, ends[e], x);
        }
    }

    rec(0, &ends, &values, &mut load, &mut choice, &mut out);
    Ok(out)
}

/// Rationals in `[0, 1]` with denominator at most `q_max`, ascending.
pub fn farey(q_max: u64) -> Vec<Rat> {
    let set: BTreeSet<Rat> = (1..=q_max).flat_map(|q| (0..=q).map(move |p| Rat::new(p, q))).collect();
    set.into_iter().collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Obs32Counterexample {
    pub loops: Vec<Rat>,
    pub edges: Vec<Rat>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Obs32Report {
    pub n: u64,
    pub target: Rat,
    pub r: usize,
    pub r_prime: usize,
    pub q_max: u64,
    /// Solutions up to reordering within the loop and edge groups.
    pub solutions: u64,
    pub counterexamples: Vec<Obs32Counterexample>,
}

impl Obs32Report {
    pub fn holds(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// Enumerates every solution of `2(l_1 + .. + l_r) + x_1 + .. + x_r' +
/// target = 1` with all unknowns on the grid of rationals in `[0, 1]` with
/// denominator at most `q_max`, and collects those where no `l_i` has class
/// above `n` and no `x_i` has class at least `n`.
pub fn obs32_witness_search(n: u64, target: &Rat, r: usize, r_prime: usize, q_max: u64) -> Result<Obs32Report, OracleError> {
    if target.class_index() != n || *target > Rat::one() {
        return Err(OracleError::TargetClass { target: target.clone(), n });
    }
    // everything is an integer multiple of 1/D
    let d = (1..=q_max).fold(BigUint::from(1u32), |acc, q| acc.lcm(&BigUint::from(q)));
    let d_u = d.to_u64().expect("lcm(1..q_max) fits in u64 for q_max <= 40");
    let grid = farey(q_max);
    let scaled = |x: &Rat| (x.numer() * (&d / x.denom())).to_u64().expect("at most D");
    let nums: Vec<u64> = grid.iter().map(scaled).collect();
    let index: HashMap<u64, usize> = nums.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let class: Vec<u64> = grid.iter().map(Rat::class_index).collect();
    let rest = d_u - scaled(target);

    struct Search<'a> {
        nums: &'a [u64],
        index: &'a HashMap<u64, usize>,
        class: &'a [u64],
        r: usize,
        total: usize,
        n: u64,
    }

    impl Search<'_> {
        fn weight(&self, pos: usize) -> u64 {
            if pos < self.r {
                2
            } else {
                1
            }
        }

        fn fine(&self, pos: usize, i: usize) -> bool {
            if pos < self.r {
                self.class[i] > self.n
            } else {
                self.class[i] >= self.n
            }
        }

        /// Fills positions `pos..` with grid indices, non-decreasing within
        /// each group, spending exactly `remaining`.
        fn go(&self, pos: usize, remaining: u64, min: usize, picked: &mut Vec<usize>, found: &mut (u64, Vec<Vec<usize>>)) {
            if pos == self.total {
                if remaining == 0 {
                    found.0 += 1;
                    if !picked.iter().enumerate().any(|(p, &i)| self.fine(p, i)) {
                        found.1.push(picked.clone());
                    }
                }
                return;
            }
            let w = self.weight(pos);
            let start = if pos == self.r { 0 } else { min };
            if pos + 1 == self.total {
                if !remaining.is_multiple_of(w) {
                    return;
                }
                if let Some(&i) = self.index.get(&(remaining / w)) {
                    if i >= start {
                        picked.push(i);
                        self.go(pos + 1, 0, i, picked, found);
                        picked.pop();
                    }
                }
                return;
            }
            for i in start..self.nums.len() {
                let cost = w * self.nums[i];
                if cost > remaining {
                    break;
                }
                picked.push(i);
                self.go(pos + 1, remaining - cost, i, picked, found);
                picked.pop();
            }
        }
    }

    let search = Search { nums: &nums, index: &index, class: &class, r, total: r + r_prime, n };
    let mut found = (0u64, Vec::new());
    search.go(0, rest, 0, &mut Vec::new(), &mut found);
    let counterexamples = found
        .1
        .into_iter()
        .map(|picked| Obs32Counterexample {
            loops: picked[..r].iter().map(|&i| grid[i].clone()).collect(),
            edges: picked[r..].iter().map(|&i| grid[i].clone()).collect(),
        })
        .collect();
    Ok(Obs32Report { n, target: target.clone(), r, r_prime, q_max, solutions: found.0, counterexamples })
}

/// Runs [`obs32_witness_search`] for every target in `R_n` with
/// denominator at most `q_max` and every `r, r' <= max_arity`.
pub fn obs32_sweep(ns: &[u64], q_max: u64, max_arity: usize) -> Vec<Obs32Report> {
    let mut jobs = Vec::new();
    for &n in ns {
        for t in farey(q_max).into_iter().filter(|t| t.class_index() == n) {
            for r in 0..=max_arity {
                for rp in 0..=max_arity {
                    jobs.push((n, t.clone(), r, rp));
                }
            }
        }
    }
    jobs.par_iter()
        .map(|(n, t, r, rp)| obs32_witness_search(*n, t, *r, *rp, q_max).expect("targets drawn from R_n"))
        .collect()
}

/// A simple undirected graph without isolated nodes, as an edge list over
/// nodes `0..nodes`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SimpleGraph {
    pub nodes: usize,
    pub edges: Vec<(usize, usize)>,
}

/// Canonical form: the lexicographically least relabelled edge sequence
/// over all edge orders and endpoint flips, nodes numbered by first
/// appearance. Branch and bound over sequence prefixes.
fn canonical(edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
    struct State<'a> {
        edges: &'a [(usize, usize)],
        used: Vec<bool>,
        label: Vec<Option<usize>>,
        next: usize,
        seq: Vec<(usize, usize)>,
        best: Option<Vec<(usize, usize)>>,
    }

    impl State<'_> {
        fn go(&mut self) {
            let k = self.seq.len();
            if k == self.edges.len() {
                if self.best.as_ref().is_none_or(|best| self.seq < *best) {
                    self.best = Some(self.seq.clone());
                }
                return;
            }
            for e in 0..self.edges.len() {
                if self.used[e] {
                    continue;
                }
                for (a, b) in [self.edges[e], (self.edges[e].1, self.edges[e].0)] {
                    let (saved_next, la, lb) = (self.next, self.label[a], self.label[b]);
                    let take = |x: usize, st: &mut Self| {
                        *st.label[x].get_or_insert_with(|| {
                            st.next += 1;
                            st.next - 1
                        })
                    };
                    let pa = take(a, self);
                    let pb = take(b, self);
                    self.seq.push((pa, pb));
                    let keep = self.best.as_ref().is_none_or(|best| self.seq[..] <= best[..=k]);
                    if keep {
                        self.used[e] = true;
                        self.go();
                        self.used[e] = false;
                    }
                    self.seq.pop();
                    self.next = saved_next;
                    self.label[a] = la;
                    self.label[b] = lb;
                }
            }
        }
    }

    let n = edges.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0);
    let mut st = State {
        edges,
        used: vec![false; edges.len()],
        label: vec![None; n],
        next: 0,
        seq: Vec::new(),
        best: None,
    };
    st.go();
    st.best.unwrap_or_default()
}

/// All simple graphs with `1..=max_edges` edges and no isolated nodes, one
/// per isomorphism class.
pub fn enumerate_graphs(max_edges: usize) -> Vec<SimpleGraph> {
    let mut level: BTreeSet<Vec<(usize, usize)>> = BTreeSet::from([Vec::new()]);
    let mut all = Vec::new();
    for _ in 0..max_edges {
        let next: BTreeSet<Vec<(usize, usize)>> = level
            .par_iter()
            .flat_map_iter(|edges| {
                let n = edges.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0);
                let mut out = Vec::new();
                for a in 0..=n {
                    for b in a + 1..=n + 1 {
                        // new nodes are numbered n, n + 1
                        if (b == n + 1 && a != n) || edges.contains(&(a, b)) || edges.contains(&(b, a)) {
                            continue;
                        }
                        let mut e = edges.clone();
                        e.push((a, b));
                        out.push(canonical(&e));
                    }
                }
                out
            })
            .collect();
        all.extend(next.iter().cloned());
        level = next;
    }
    all.into_iter()
        .map(|edges| SimpleGraph { nodes: edges.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0), edges })
        .collect()
}

/// Port numberings of `g`: all of them when there are at most `limit`,
/// otherwise `limit` seeded random ones. Every edge is oriented `u -> v`.
pub fn port_numberings(g: &SimpleGraph, limit: usize, seed: u64) -> Vec<PortGraph> {
    let mut incident: Vec<Vec<(usize, bool)>> = vec![Vec::new(); g.nodes];
    for (id, &(a, b)) in g.edges.iter().enumerate() {
        incident[a].push((id, true));
        incident[b].push((id, false));
    }
    let total: f64 = incident.iter().map(|inc| (1..=inc.len()).map(|k| k as f64).product::<f64>()).product();
    let build = |perms: &[Vec<usize>]| {
        // perms[v][k] = port given to the k-th incidence of v
        let mut ports = vec![(0, 0); g.edges.len()];
        for (v, inc) in incident.iter().enumerate() {
            for (k, &(id, first)) in inc.iter().enumerate() {
                if first {
                    ports[id].0 = perms[v][k];
                } else {
                    ports[id].1 = perms[v][k];
                }
            }
        }
        let mut raw = RawGraph::new(g.nodes);
        for (id, &(a, b)) in g.edges.iter().enumerate() {
            raw.edge(a, ports[id].0, b, ports[id].1, Orientation::UV);
        }
        raw.build().expect("valid port numbering")
    };
    if total <= limit as f64 {
        let per_node: Vec<Vec<Vec<usize>>> = incident.iter().map(|inc| all_perms(inc.len())).collect();
        let mut out = Vec::new();
        let mut idx = vec![0usize; g.nodes];
        loop {
            let perms: Vec<Vec<usize>> = idx.iter().enumerate().map(|(v, &i)| per_node[v][i].clone()).collect();
            out.push(build(&perms));
            let mut v = 0;
            while v < g.nodes {
                idx[v] += 1;
                if idx[v] < per_node[v].len() {
                    break;
                }
                idx[v] = 0;
                v += 1;
            }
            if v == g.nodes {
                return out;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..limit)
        .map(|_| {
            let perms: Vec<Vec<usize>> = incident
                .iter()
                .map(|inc| {
                    let mut p: Vec<usize> = (1..=inc.len()).collect();
                    p.shuffle(&mut rng);
                    p
                })
                .collect();
            build(&perms)
        })
        .collect()
}

fn all_perms(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in all_perms(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k);
            out.push(q);
        }
    }
    out
}

/// First port-numbered graph (fewest edges first, at most `max_nodes`
/// nodes) on which the double-cover matching, mapped to half-integral
/// values, is feasible but not maximal. Returns the graph and the mapped
/// values.
pub fn cover_matching_gap(max_edges: usize, max_nodes: usize, per_graph: usize) -> Option<(PortGraph, EdgeAssignment)> {
    use crate::algorithms::AlmostSaturating;
    use crate::sim::{run, Model, RunOptions};

    let opts = RunOptions { parallel: false, ..RunOptions::default() };
    let graphs: Vec<SimpleGraph> = enumerate_graphs(max_edges).into_iter().filter(|g| g.nodes <= max_nodes).collect();
    graphs.par_iter().find_map_first(|sg| {
        port_numberings(sg, per_graph, 0).into_iter().find_map(|g| {
            let alg = AlmostSaturating::new(g.max_degree());
            let x = run(&g, &alg, Model::Pn, &opts).expect("loop-free input").assignment;
            let maximal = g.edges().iter().all(|e| {
                let load = |v: NodeId| -> Rat {
                    g.incidences(v).iter().map(|inc| x.get(inc.edge)).sum()
                };
                load(e.u).is_one() || load(e.v).is_one()
            });
            (!maximal).then_some((g, x))
        })
    })
}
