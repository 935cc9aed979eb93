//! Route search: the min-time baseline, charge-depleting-first routing, joint
//! routing and power-train control, and their brute-force oracles.

mod actual;
mod cdf;
mod crptc;
mod min_time;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::energy::{link_mode_costs, VehicleEnergyParams};
use crate::error::{Error, Result};
use crate::graph::{Link, NetworkGraph, NodeId, Path};
use crate::COST_TOL;

pub use actual::{expected_actual_cost, OdRouteDistribution, Period, WeightedRoute};
pub use cdf::{cdf_brute_force, cdf_route_hybrid_lp, suffix_gas_lp};
pub use crptc::{build_crptc_milp, crptc_oracle, crptc_route_milp, CrptcModel};
pub use min_time::shortest_time_path;

/// Upper bound on enumerated paths or prefixes before giving up.
pub const DEFAULT_MAX_PATHS: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    MinTime,
    Cdf,
    Crptc,
    CdfBruteForce,
    CrptcOracle,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::MinTime => "min_time",
            Algorithm::Cdf => "cdf",
            Algorithm::Crptc => "crptc",
            Algorithm::CdfBruteForce => "cdf_brute_force",
            Algorithm::CrptcOracle => "crptc_oracle",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteSolution {
    pub algorithm: Algorithm,
    pub path: Path,
    /// Fraction of each link driven in charge-depleting mode.
    pub y: Vec<f64>,
    /// Dollars.
    pub energy_cost: f64,
    /// Hours.
    pub travel_time: f64,
    /// Battery energy used over the route, kWh.
    pub cd_energy: f64,
    /// Battery energy at every node of the path, clamped at zero.
    pub battery_trajectory: Vec<f64>,
}

impl RouteSolution {
    pub(crate) fn assemble(
        algorithm: Algorithm,
        path: Path,
        links: &[&Link],
        y: Vec<f64>,
        energy_cost: f64,
        params: &VehicleEnergyParams,
    ) -> Self {
        let mut battery = params.e_init;
        let mut trajectory = Vec::with_capacity(links.len() + 1);
        trajectory.push(battery.max(0.0));
        let mut cd_energy = 0.0;
        for (link, frac) in links.iter().zip(&y) {
            let used = link_mode_costs(link, params).cd_energy * frac;
            cd_energy += used;
            battery -= used;
            trajectory.push(battery.max(0.0));
        }
        RouteSolution {
            algorithm,
            travel_time: links.iter().map(|l| l.travel_time()).sum(),
            path,
            y,
            energy_cost,
            cd_energy,
            battery_trajectory: trajectory,
        }
    }
}

/// Keeps the cheapest route seen so far, breaking near-ties by node sequence.
#[derive(Debug, Default)]
pub(crate) struct Cheapest<T> {
    best: Option<(f64, Path, T)>,
}

impl<T> Cheapest<T> {
    pub(crate) fn new() -> Self {
        Cheapest { best: None }
    }

    pub(crate) fn offer(&mut self, cost: f64, path: &Path, extra: impl FnOnce() -> T) {
        let replace = match &self.best {
            None => true,
            Some((best, best_path, _)) => {
                cost < best - COST_TOL || (cost <= best + COST_TOL && path < best_path)
            }
        };
        if replace {
            self.best = Some((cost, path.clone(), extra()));
        }
    }

    pub(crate) fn into_inner(self) -> Option<(f64, Path, T)> {
        self.best
    }
}

pub(crate) fn check_endpoints(graph: &NetworkGraph, origin: NodeId, dest: NodeId) -> Result<()> {
    for node in [origin, dest] {
        if !graph.contains(node) {
            return Err(Error::UnknownNode(node));
        }
    }
    if origin == dest {
        return Err(Error::InvalidParameter(
            "origin and destination must differ".into(),
        ));
    }
    Ok(())
}

/// Simple `origin -> dest` path inside the links with `flow[k] > 0.5`,
/// fewest hops first and lowest node ids on ties.
pub(crate) fn path_from_flow(
    graph: &NetworkGraph,
    flow: impl Fn(usize) -> f64,
    origin: NodeId,
    dest: NodeId,
) -> Option<Path> {
    let mut parent: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    let mut seen = BTreeSet::from([origin]);
    let mut queue = VecDeque::from([origin]);
    while let Some(node) = queue.pop_front() {
        if node == dest {
            let mut nodes = vec![dest];
            let mut cur = dest;
            while let Some(&p) = parent.get(&cur) {
                nodes.push(p);
                cur = p;
            }
            nodes.reverse();
            return Some(Path(nodes));
        }
        for &li in graph.out_links(node) {
            let next = graph.links()[li].to;
            if flow(li) > 0.5 && seen.insert(next) {
                parent.insert(next, node);
                queue.push_back(next);
            }
        }
    }
    None
}
