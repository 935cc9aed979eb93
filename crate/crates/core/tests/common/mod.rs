#![allow(dead_code)]

use ecoroute::graph::{Link, NetworkGraph, NodeId, TrafficMode};
use ecoroute::preprocess::SegmentRecord;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const BATTERIES: [f64; 4] = [0.0, 2.0, 5.57, 50.0];
pub const ACCEPTANCE_SEED: u64 = 0x5EED_2019;

#[derive(Debug, Clone)]
pub struct Instance {
    pub seed: u64,
    pub graph: NetworkGraph,
    pub origin: NodeId,
    pub dest: NodeId,
    pub battery: f64,
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_mode<R: Rng>(rng: &mut R) -> TrafficMode {
    *TrafficMode::ALL.choose(rng).unwrap()
}

/// Random digraph on `1..=n` with at most `max_links` links of 1-30 mi.
pub fn random_graph<R: Rng>(rng: &mut R, n: u32, max_links: usize) -> NetworkGraph {
    let mut pairs: Vec<(u32, u32)> = (1..=n)
        .flat_map(|a| (1..=n).filter(move |&b| b != a).map(move |b| (a, b)))
        .collect();
    pairs.shuffle(rng);
    let upper = max_links.min(pairs.len());
    let lower = (n as usize - 1).min(upper);
    let count = rng.gen_range(lower..=upper);
    let links = pairs[..count]
        .iter()
        .map(|&(a, b)| {
            Link::new(a, b, rng.gen_range(1.0..=30.0), rng.gen_range(10.0..70.0), random_mode(rng)).unwrap()
        })
        .collect();
    NetworkGraph::with_nodes(1..=n, links).unwrap()
}

fn reachable(graph: &NetworkGraph, origin: NodeId, dest: NodeId) -> bool {
    let mut seen = vec![origin];
    let mut stack = vec![origin];
    while let Some(node) = stack.pop() {
        for next in graph.out_neighbors(node).unwrap() {
            if !seen.contains(&next) {
                seen.push(next);
                stack.push(next);
            }
        }
    }
    seen.contains(&dest)
}

/// Connected random instance: up to `max_nodes` nodes and `max_links` links,
/// routing from node 1 to the highest node.
pub fn random_instance(seed: u64, battery: f64, max_nodes: u32, max_links: usize) -> Instance {
    let mut rng = rng(seed);
    loop {
        let n = rng.gen_range(2..=max_nodes);
        let graph = random_graph(&mut rng, n, max_links);
        let (origin, dest) = (NodeId(1), NodeId(n));
        if reachable(&graph, origin, dest) {
            return Instance {
                seed,
                graph,
                origin,
                dest,
                battery,
            };
        }
    }
}

/// The 200-instance acceptance set: at most 10 nodes and 25 links, batteries
/// cycling through 0, 2, 5.57 and 50 kWh.
pub fn acceptance_instances() -> Vec<Instance> {
    (0..200u64)
        .map(|i| random_instance(ACCEPTANCE_SEED + i, BATTERIES[i as usize % 4], 10, 25))
        .collect()
}

/// Random links (pairs of distinct nodes on `1..=8`), each with 1-8 segments.
pub fn random_segments<R: Rng>(rng: &mut R) -> Vec<SegmentRecord> {
    let mut pairs: Vec<(u32, u32)> = (1..=8u32)
        .flat_map(|a| (1..=8u32).filter(move |&b| b != a).map(move |b| (a, b)))
        .collect();
    pairs.shuffle(rng);
    let n_links = rng.gen_range(1..=12);
    let mut out = Vec::new();
    for &(a, b) in &pairs[..n_links] {
        for seq in 0..rng.gen_range(1..=8u32) {
            // Mix exact threshold speeds in with continuous ones.
            let speed = if rng.gen_bool(0.2) {
                *[20.0, 40.0].choose(rng).unwrap()
            } else {
                rng.gen_range(3.0..75.0)
            };
            out.push(SegmentRecord::new(a, b, seq, rng.gen_range(0.05..5.0), speed));
        }
    }
    out.shuffle(rng);
    out
}
