//! Charge-depleting-first routing.
//!
//! Once the battery is empty every remaining link costs gas only, so the cost
//! after the first depletion node `p` no longer depends on history. The search
//! enumerates partial routes from the origin up to their depletion node,
//! completes each with the cheapest gas-only route from `p` (a unit-supply
//! min-cost flow LP, whose basic optimum is integral), and compares the result
//! with routes that reach the destination before the battery runs out.

use std::collections::{BTreeSet, HashMap};

use super::{
    check_endpoints, min_time::shortest_time_path, path_from_flow, Algorithm, Cheapest,
    RouteSolution, DEFAULT_MAX_PATHS,
};
use crate::energy::{cdf_allocation, cdf_link_cost, cdf_links_cost, link_mode_costs, VehicleEnergyParams};
use crate::error::{Error, Result};
use crate::graph::{NetworkGraph, NodeId, Path};
use crate::solver::{solve_lp, LinearProgram, Sense, Status};
use crate::COST_TOL;

/// Cheapest gas-only route from `from` to `dest`, found by solving the
/// min-cost flow LP with `0 <= x <= 1`. `None` if `dest` is unreachable.
pub fn suffix_gas_lp(
    graph: &NetworkGraph,
    params: &VehicleEnergyParams,
    from: NodeId,
    dest: NodeId,
) -> Result<Option<(f64, Path)>> {
    if from == dest {
        return Ok(Some((0.0, Path(vec![dest]))));
    }
    let costs: Vec<f64> = graph
        .links()
        .iter()
        .map(|l| link_mode_costs(l, params).cs_cost)
        .collect();
    let lp = unit_flow_lp(graph, &costs, from, dest);
    let res = solve_lp(&lp)?;
    match res.status {
        Status::Optimal => {}
        Status::Infeasible => return Ok(None),
        Status::IterationLimit => return Err(Error::SolverStatus(res.status)),
    }
    let path = path_from_flow(graph, |k| res.values[k], from, dest)
        .expect("optimal unit flow carries a route");
    let cost = graph.path_links(&path)?.iter().map(|l| link_mode_costs(l, params).cs_cost).sum();
    Ok(Some((cost, path)))
}

/// Flow-conservation LP sending one unit from `source` to `sink`, one
/// variable per link in graph order.
pub(crate) fn unit_flow_lp(
    graph: &NetworkGraph,
    costs: &[f64],
    source: NodeId,
    sink: NodeId,
) -> LinearProgram {
    let mut lp = LinearProgram::new();
    for &c in costs {
        lp.add_var(c, 0.0, 1.0);
    }
    add_flow_rows(&mut lp, graph, |k| k, source, sink);
    lp
}

/// Appends `sum_out x - sum_in x = b_i` for every node, with link `k`'s flow
/// variable at index `var(k)`.
pub(crate) fn add_flow_rows(
    lp: &mut LinearProgram,
    graph: &NetworkGraph,
    var: impl Fn(usize) -> usize,
    source: NodeId,
    sink: NodeId,
) {
    for node in graph.nodes() {
        let mut terms: Vec<(usize, f64)> = graph.out_links(node).iter().map(|&k| (var(k), 1.0)).collect();
        terms.extend(graph.in_links(node).iter().map(|&k| (var(k), -1.0)));
        let supply = if node == source {
            1.0
        } else if node == sink {
            -1.0
        } else {
            0.0
        };
        lp.add_constraint(&terms, Sense::Eq, supply);
    }
}

#[derive(Default)]
struct PrefixSearch {
    /// Partial routes ending at their first node with an empty battery.
    depleted: Vec<(Path, f64)>,
    /// Complete routes.
    complete: Vec<(Path, f64)>,
    visited: usize,
}

impl PrefixSearch {
    #[allow(clippy::too_many_arguments)]
    fn extend(
        &mut self,
        graph: &NetworkGraph,
        params: &VehicleEnergyParams,
        dest: NodeId,
        ceiling: f64,
        stack: &mut Vec<NodeId>,
        on_path: &mut BTreeSet<NodeId>,
        cost: f64,
        battery: f64,
    ) -> Result<()> {
        let here = *stack.last().expect("prefix starts at origin");
        for &li in graph.out_links(here) {
            let link = &graph.links()[li];
            if on_path.contains(&link.to) {
                continue;
            }
            let step = cdf_link_cost(link, battery, params);
            let next_cost = cost + step.cost();
            if next_cost > ceiling + COST_TOL {
                continue;
            }
            self.visited += 1;
            if self.visited > DEFAULT_MAX_PATHS {
                return Err(Error::TooManyPaths { limit: DEFAULT_MAX_PATHS });
            }
            stack.push(link.to);
            if link.to == dest {
                self.complete.push((Path(stack.clone()), next_cost));
            } else if step.battery_after <= 0.0 {
                self.depleted.push((Path(stack.clone()), next_cost));
            } else {
                on_path.insert(link.to);
                self.extend(graph, params, dest, ceiling, stack, on_path, next_cost, step.battery_after)?;
                on_path.remove(&link.to);
            }
            stack.pop();
        }
        Ok(())
    }
}

/// Cheapest route under charge-depleting-first operation.
pub fn cdf_route_hybrid_lp(
    graph: &NetworkGraph,
    params: &VehicleEnergyParams,
    origin: NodeId,
    dest: NodeId,
) -> Result<RouteSolution> {
    check_endpoints(graph, origin, dest)?;
    params.validate()?;
    // Any feasible route bounds the optimum; use the fastest one.
    let ceiling = shortest_time_path(graph, params, origin, dest)?.energy_cost;

    let mut search = PrefixSearch::default();
    if params.e_init <= 0.0 {
        search.depleted.push((Path(vec![origin]), 0.0));
    } else {
        let mut stack = vec![origin];
        let mut on_path = BTreeSet::from([origin]);
        search.extend(graph, params, dest, ceiling, &mut stack, &mut on_path, 0.0, params.e_init)?;
    }

    let mut best = Cheapest::<()>::new();
    for (path, _) in &search.complete {
        let cost = cdf_links_cost(&graph.path_links(path)?, params).total_cost;
        best.offer(cost, path, || ());
    }

    let mut full_suffix: HashMap<NodeId, Option<(f64, Path)>> = HashMap::new();
    let mut restricted_suffix: HashMap<(NodeId, Vec<NodeId>), Option<(f64, Path)>> = HashMap::new();
    for (prefix, _) in &search.depleted {
        let depot = prefix.last().expect("nonempty prefix");
        let full = match full_suffix.get(&depot) {
            Some(s) => s.clone(),
            None => {
                let s = suffix_gas_lp(graph, params, depot, dest)?;
                full_suffix.insert(depot, s.clone());
                s
            }
        };
        let Some((_, suffix)) = full else {
            continue;
        };
        let interior: Vec<NodeId> = prefix.nodes()[..prefix.len() - 1].to_vec();
        let revisits = suffix.nodes()[1..].iter().any(|n| interior.contains(n));
        let suffix = if revisits {
            let key = (depot, {
                let mut k = interior.clone();
                k.sort();
                k
            });
            let s = match restricted_suffix.get(&key) {
                Some(s) => s.clone(),
                None => {
                    let removed: BTreeSet<NodeId> = interior.iter().copied().collect();
                    let sub = graph.without_nodes(&removed);
                    let s = suffix_gas_lp(&sub, params, depot, dest)?;
                    restricted_suffix.insert(key, s.clone());
                    s
                }
            };
            match s {
                Some((_, path)) => path,
                None => continue,
            }
        } else {
            suffix
        };
        let mut nodes = prefix.nodes().to_vec();
        nodes.extend_from_slice(&suffix.nodes()[1..]);
        let route = Path(nodes);
        let cost = cdf_links_cost(&graph.path_links(&route)?, params).total_cost;
        best.offer(cost, &route, || ());
    }

    let (cost, path, ()) = best.into_inner().ok_or(Error::Unreachable { origin, dest })?;
    let links = graph.path_links(&path)?;
    let y = cdf_allocation(&links, params);
    Ok(RouteSolution::assemble(Algorithm::Cdf, path, &links, y, cost, params))
}

/// Minimum charge-depleting-first cost over every simple route.
pub fn cdf_brute_force(
    graph: &NetworkGraph,
    params: &VehicleEnergyParams,
    origin: NodeId,
    dest: NodeId,
    max_paths: usize,
) -> Result<RouteSolution> {
    check_endpoints(graph, origin, dest)?;
    let mut best = Cheapest::<()>::new();
    for path in graph.enumerate_simple_paths(origin, dest, max_paths)? {
        let cost = cdf_links_cost(&graph.path_links(&path)?, params).total_cost;
        best.offer(cost, &path, || ());
    }
    let (cost, path, ()) = best.into_inner().ok_or(Error::Unreachable { origin, dest })?;
    let links = graph.path_links(&path)?;
    let y = cdf_allocation(&links, params);
    Ok(RouteSolution::assemble(Algorithm::CdfBruteForce, path, &links, y, cost, params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Link, TrafficMode};

    fn link(a: u32, b: u32, d: f64, m: TrafficMode) -> Link {
        Link::new(a, b, d, 40.0, m).unwrap()
    }

    fn grid() -> NetworkGraph {
        use TrafficMode::*;
        NetworkGraph::new(vec![
            link(1, 2, 8.0, High),
            link(1, 3, 12.0, Low),
            link(2, 3, 3.0, Medium),
            link(2, 4, 15.0, Medium),
            link(3, 4, 9.0, Low),
            link(3, 5, 20.0, Medium),
            link(4, 5, 6.0, High),
            link(4, 3, 2.0, Medium),
        ])
        .unwrap()
    }

    #[test]
    fn suffix_lp_matches_enumeration() {
        let g = grid();
        let p = VehicleEnergyParams::default();
        let (cost, path) = suffix_gas_lp(&g, &p, NodeId(1), NodeId(5)).unwrap().unwrap();
        let brute = g
            .enumerate_simple_paths(NodeId(1), NodeId(5), 100)
            .unwrap()
            .into_iter()
            .map(|path| {
                g.path_links(&path).unwrap().iter().map(|l| link_mode_costs(l, &p).cs_cost).sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min);
        assert!((cost - brute).abs() < 1e-9);
        assert!(path.is_simple());
        assert!(suffix_gas_lp(&g, &p, NodeId(5), NodeId(1)).unwrap().is_none());
    }

    #[test]
    fn empty_battery_reduces_to_gas_shortest_path() {
        let g = grid();
        let p = VehicleEnergyParams::default().with_battery(0.0);
        let sol = cdf_route_hybrid_lp(&g, &p, NodeId(1), NodeId(5)).unwrap();
        let (gas, _) = suffix_gas_lp(&g, &p, NodeId(1), NodeId(5)).unwrap().unwrap();
        assert!((sol.energy_cost - gas).abs() < 1e-9);
        assert!(sol.y.iter().all(|&y| y == 0.0));
    }

    #[test]
    fn huge_battery_is_pure_electric() {
        let g = grid();
        let p = VehicleEnergyParams::default().with_battery(1e6);
        let sol = cdf_route_hybrid_lp(&g, &p, NodeId(1), NodeId(5)).unwrap();
        let best_cd = g
            .enumerate_simple_paths(NodeId(1), NodeId(5), 100)
            .unwrap()
            .iter()
            .map(|path| {
                g.path_links(path).unwrap().iter().map(|l| link_mode_costs(l, &p).cd_cost).sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min);
        assert!((sol.energy_cost - best_cd).abs() < 1e-9);
        assert!(sol.y.iter().all(|&y| y == 1.0));
    }

    #[test]
    fn matches_brute_force_across_batteries() {
        let g = grid();
        for e in [0.0, 0.5, 1.0, 2.0, 3.5, 5.57, 8.0, 50.0] {
            let p = VehicleEnergyParams::default().with_battery(e);
            let fast = cdf_route_hybrid_lp(&g, &p, NodeId(1), NodeId(5)).unwrap();
            let brute = cdf_brute_force(&g, &p, NodeId(1), NodeId(5), 1000).unwrap();
            assert!((fast.energy_cost - brute.energy_cost).abs() < 1e-9, "battery {e}");
            assert_eq!(fast.path, brute.path, "battery {e}");
        }
    }

    #[test]
    fn unreachable_destination() {
        let g = NetworkGraph::with_nodes([9u32], vec![link(1, 2, 3.0, TrafficMode::Low)]).unwrap();
        let p = VehicleEnergyParams::default();
        assert!(matches!(
            cdf_route_hybrid_lp(&g, &p, NodeId(1), NodeId(9)),
            Err(Error::Unreachable { .. })
        ));
    }
}
