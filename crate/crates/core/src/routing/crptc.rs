//! Joint routing and power-train control.
//!
//! Each link carries a route indicator `x`, a CD fraction `y` and the
//! product `z = x * y`. The product is linearised with
//! `0 <= z <= y`, `z <= x`, `z >= y - (1 - x)`, which turns the problem into a
//! MILP solved exactly by branch-and-bound.

use super::cdf::add_flow_rows;
use super::{check_endpoints, path_from_flow, Algorithm, Cheapest, RouteSolution};
use crate::energy::{allocate_battery, link_mode_costs, split_links_cost, VehicleEnergyParams};
use crate::error::{Error, Result};
use crate::graph::{NetworkGraph, NodeId};
use crate::solver::{solve_milp, LinearProgram, MilpProblem, Sense, Status};

/// MILP for one origin-destination query together with its variable layout.
#[derive(Debug, Clone)]
pub struct CrptcModel {
    pub problem: MilpProblem,
}

impl CrptcModel {
    pub fn x(link: usize) -> usize {
        3 * link
    }

    pub fn y(link: usize) -> usize {
        3 * link + 1
    }

    pub fn z(link: usize) -> usize {
        3 * link + 2
    }
}

pub fn build_crptc_milp(
    graph: &NetworkGraph,
    params: &VehicleEnergyParams,
    origin: NodeId,
    dest: NodeId,
) -> Result<CrptcModel> {
    check_endpoints(graph, origin, dest)?;
    params.validate()?;
    let mut lp = LinearProgram::new();
    let costs: Vec<_> = graph.links().iter().map(|l| link_mode_costs(l, params)).collect();
    for c in &costs {
        lp.add_var(c.cs_cost, 0.0, 1.0);
        lp.add_var(0.0, 0.0, 1.0);
        lp.add_var(c.cd_cost - c.cs_cost, 0.0, 1.0);
    }
    add_flow_rows(&mut lp, graph, CrptcModel::x, origin, dest);

    let battery: Vec<(usize, f64)> = costs
        .iter()
        .enumerate()
        .map(|(k, c)| (CrptcModel::z(k), c.cd_energy))
        .collect();
    lp.add_constraint(&battery, Sense::Le, params.e_init);

    for k in 0..costs.len() {
        let (x, y, z) = (CrptcModel::x(k), CrptcModel::y(k), CrptcModel::z(k));
        lp.add_constraint(&[(z, 1.0), (y, -1.0)], Sense::Le, 0.0);
        lp.add_constraint(&[(z, 1.0), (x, -1.0)], Sense::Le, 0.0);
        lp.add_constraint(&[(z, 1.0), (y, -1.0), (x, -1.0)], Sense::Ge, -1.0);
    }

    let integer_vars = (0..costs.len()).map(CrptcModel::x).collect();
    Ok(CrptcModel {
        problem: MilpProblem { lp, integer_vars },
    })
}

/// Energy-optimal route and CD schedule, solved as a MILP.
pub fn crptc_route_milp(
    graph: &NetworkGraph,
    params: &VehicleEnergyParams,
    origin: NodeId,
    dest: NodeId,
) -> Result<RouteSolution> {
    let model = build_crptc_milp(graph, params, origin, dest)?;
    let res = solve_milp(&model.problem)?;
    match res.status {
        Status::Optimal => {}
        Status::Infeasible => return Err(Error::Unreachable { origin, dest }),
        Status::IterationLimit => return Err(Error::SolverStatus(res.status)),
    }
    let values = &res.values;
    let path = path_from_flow(graph, |k| values[CrptcModel::x(k)], origin, dest)
        .expect("optimal flow carries a route");
    let links = graph.path_links(&path)?;
    let y: Vec<f64> = path
        .arcs()
        .map(|(a, b)| {
            let k = graph.link_index(a, b).expect("path links exist");
            values[CrptcModel::z(k)].clamp(0.0, 1.0)
        })
        .collect();
    let (cost, _) = split_links_cost(&links, &y, params)?;
    Ok(RouteSolution::assemble(Algorithm::Crptc, path, &links, y, cost, params))
}

/// Exhaustive counterpart of [`crptc_route_milp`]: the best battery split on
/// every simple route.
pub fn crptc_oracle(
    graph: &NetworkGraph,
    params: &VehicleEnergyParams,
    origin: NodeId,
    dest: NodeId,
    max_paths: usize,
) -> Result<RouteSolution> {
    check_endpoints(graph, origin, dest)?;
    let mut best = Cheapest::new();
    for path in graph.enumerate_simple_paths(origin, dest, max_paths)? {
        let links = graph.path_links(&path)?;
        let y = allocate_battery(&links, params);
        let (cost, _) = split_links_cost(&links, &y, params)?;
        best.offer(cost, &path, || y);
    }
    let (cost, path, y) = best.into_inner().ok_or(Error::Unreachable { origin, dest })?;
    let links = graph.path_links(&path)?;
    Ok(RouteSolution::assemble(Algorithm::CrptcOracle, path, &links, y, cost, params))
}
