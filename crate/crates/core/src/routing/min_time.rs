use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use super::{check_endpoints, Algorithm, RouteSolution};
use crate::energy::{cdf_allocation, cdf_links_cost, VehicleEnergyParams};
use crate::error::{Error, Result};
use crate::graph::{NetworkGraph, NodeId, Path};

/// Fastest route by link travel time; its energy cost is the
/// charge-depleting-first cost of driving it.
///
/// Labels carry their full node sequence so equal-time routes resolve to the
/// lexicographically smallest one.
pub fn shortest_time_path(
    graph: &NetworkGraph,
    params: &VehicleEnergyParams,
    origin: NodeId,
    dest: NodeId,
) -> Result<RouteSolution> {
    check_endpoints(graph, origin, dest)?;
    let mut best: BTreeMap<NodeId, Label> = BTreeMap::new();
    let mut settled = BTreeSet::new();
    let mut heap = BinaryHeap::new();
    let start = Label {
        time: 0.0,
        nodes: vec![origin],
    };
    best.insert(origin, start.clone());
    heap.push(start);

    let mut found = None;
    while let Some(label) = heap.pop() {
        let here = *label.nodes.last().expect("labels are nonempty");
        if !settled.insert(here) {
            continue;
        }
        if here == dest {
            found = Some(label);
            break;
        }
        for &li in graph.out_links(here) {
            let link = &graph.links()[li];
            if settled.contains(&link.to) {
                continue;
            }
            let mut nodes = label.nodes.clone();
            nodes.push(link.to);
            let candidate = Label {
                time: label.time + link.travel_time(),
                nodes,
            };
            let improves = best
                .get(&link.to)
                .map_or(true, |cur| candidate.key_cmp(cur) == Ordering::Less);
            if improves {
                best.insert(link.to, candidate.clone());
                heap.push(candidate);
            }
        }
    }

    let label = found.ok_or(Error::Unreachable { origin, dest })?;
    let path = Path(label.nodes);
    let links = graph.path_links(&path)?;
    let cost = cdf_links_cost(&links, params).total_cost;
    let y = cdf_allocation(&links, params);
    Ok(RouteSolution::assemble(Algorithm::MinTime, path, &links, y, cost, params))
}

#[derive(Debug, Clone)]
struct Label {
    time: f64,
    nodes: Vec<NodeId>,
}

impl Label {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then_with(|| self.nodes.cmp(&other.nodes))
    }
}

// Reversed so the max-heap pops the smallest key.
impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        other.key_cmp(self)
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Label {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Label {}
