//! Link-averaged PHEV energy costs.
//!
//! A link of length `d` driven in charge-depleting (CD) mode draws
//! `d / mu_cd` kWh from the battery; in charge-sustaining (CS) mode it burns
//! `d / mu_cs` gallons. Both conversion factors depend on the link's
//! [`TrafficMode`] through the drive cycle assigned to it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Link, NetworkGraph, Path, TrafficMode};

/// Conversion factors of one drive cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeFactors {
    /// Miles per kWh in charge-depleting mode.
    pub mu_cd: f64,
    /// Miles per gallon in charge-sustaining mode.
    pub mu_cs: f64,
}

/// Conversion factors for each traffic mode. Defaults are the PHEV20 values
/// for HWFET (low), UDDS (medium) and NYC (high) cycles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveCycleTable {
    pub low: ModeFactors,
    pub medium: ModeFactors,
    pub high: ModeFactors,
}

impl Default for DriveCycleTable {
    fn default() -> Self {
        DriveCycleTable {
            low: ModeFactors { mu_cd: 5.7, mu_cs: 58.6 },
            medium: ModeFactors { mu_cd: 6.2, mu_cs: 69.4 },
            high: ModeFactors { mu_cd: 4.2, mu_cs: 45.7 },
        }
    }
}

impl DriveCycleTable {
    pub fn factors(&self, mode: TrafficMode) -> ModeFactors {
        match mode {
            TrafficMode::Low => self.low,
            TrafficMode::Medium => self.medium,
            TrafficMode::High => self.high,
        }
    }

    pub fn factors_mut(&mut self, mode: TrafficMode) -> &mut ModeFactors {
        match mode {
            TrafficMode::Low => &mut self.low,
            TrafficMode::Medium => &mut self.medium,
            TrafficMode::High => &mut self.high,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for mode in TrafficMode::ALL {
            let f = self.factors(mode);
            if !(f.mu_cd.is_finite() && f.mu_cd > 0.0 && f.mu_cs.is_finite() && f.mu_cs > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "conversion factors for {mode} traffic must be positive"
                )));
            }
        }
        Ok(())
    }
}

/// Prices, initial battery energy and conversion factors of one vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleEnergyParams {
    /// $/gallon.
    pub c_gas: f64,
    /// $/kWh.
    pub c_ele: f64,
    /// Battery energy available at the origin, kWh.
    pub e_init: f64,
    pub table: DriveCycleTable,
}

impl Default for VehicleEnergyParams {
    fn default() -> Self {
        VehicleEnergyParams {
            c_gas: 2.75,
            c_ele: 0.114,
            e_init: 5.57,
            table: DriveCycleTable::default(),
        }
    }
}

impl VehicleEnergyParams {
    pub fn with_battery(mut self, e_init: f64) -> Self {
        self.e_init = e_init;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("c_gas", self.c_gas), ("c_ele", self.c_ele), ("e_init", self.e_init)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be a nonnegative number, got {v}"
                )));
            }
        }
        self.table.validate()
    }

    /// Dollars saved by spending one kWh of battery in place of gas on a link
    /// of the given mode.
    pub fn savings_per_kwh(&self, mode: TrafficMode) -> f64 {
        let f = self.table.factors(mode);
        self.c_gas * f.mu_cd / f.mu_cs - self.c_ele
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkModeCosts {
    /// Cost of driving the whole link in CD mode.
    pub cd_cost: f64,
    /// Cost of driving the whole link in CS mode.
    pub cs_cost: f64,
    /// Battery energy needed to drive the whole link in CD mode.
    pub cd_energy: f64,
}

pub fn link_mode_costs(link: &Link, params: &VehicleEnergyParams) -> LinkModeCosts {
    let f = params.table.factors(link.mode);
    let cd_energy = link.length_mi / f.mu_cd;
    LinkModeCosts {
        cd_cost: params.c_ele * cd_energy,
        cs_cost: params.c_gas * link.length_mi / f.mu_cs,
        cd_energy,
    }
}

/// Cost of one link under charge-depleting-first operation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkCostBreakdown {
    pub elec_cost: f64,
    pub gas_cost: f64,
    pub cd_energy_used: f64,
    /// Battery state after the link. Goes negative once the battery is
    /// exhausted; only its sign is meaningful then.
    pub battery_after: f64,
}

impl LinkCostBreakdown {
    pub fn cost(&self) -> f64 {
        self.elec_cost + self.gas_cost
    }

    pub fn reported_battery_after(&self) -> f64 {
        self.battery_after.max(0.0)
    }
}

/// Drives `link` with `battery` kWh left, depleting the battery first.
pub fn cdf_link_cost(link: &Link, battery: f64, params: &VehicleEnergyParams) -> LinkCostBreakdown {
    let f = params.table.factors(link.mode);
    let costs = link_mode_costs(link, params);
    let (elec_cost, gas_cost, cd_energy_used) = if battery <= 0.0 {
        (0.0, costs.cs_cost, 0.0)
    } else if battery >= costs.cd_energy {
        (costs.cd_cost, 0.0, costs.cd_energy)
    } else {
        let gas_miles = link.length_mi - f.mu_cd * battery;
        (params.c_ele * battery, params.c_gas * gas_miles / f.mu_cs, battery)
    };
    LinkCostBreakdown {
        elec_cost,
        gas_cost,
        cd_energy_used,
        battery_after: battery - costs.cd_energy,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CdfEvaluation {
    pub total_cost: f64,
    pub breakdowns: Vec<LinkCostBreakdown>,
}

pub fn cdf_links_cost(links: &[&Link], params: &VehicleEnergyParams) -> CdfEvaluation {
    let mut battery = params.e_init;
    let mut total_cost = 0.0;
    let breakdowns = links
        .iter()
        .map(|link| {
            let b = cdf_link_cost(link, battery, params);
            battery = b.battery_after;
            total_cost += b.cost();
            b
        })
        .collect();
    CdfEvaluation {
        total_cost,
        breakdowns,
    }
}

/// Energy cost of `path` when the battery is drained from the start of the
/// trip and gas is used afterwards.
pub fn cdf_path_cost(
    path: &Path,
    graph: &NetworkGraph,
    params: &VehicleEnergyParams,
) -> Result<CdfEvaluation> {
    Ok(cdf_links_cost(&graph.path_links(path)?, params))
}

/// CD fractions realised by charge-depleting-first operation.
pub fn cdf_allocation(links: &[&Link], params: &VehicleEnergyParams) -> Vec<f64> {
    cdf_links_cost(links, params)
        .breakdowns
        .iter()
        .zip(links)
        .map(|(b, link)| {
            let need = link_mode_costs(link, params).cd_energy;
            (b.cd_energy_used / need).clamp(0.0, 1.0)
        })
        .collect()
}

/// Cost and battery use of driving each link with CD fraction `y`.
pub fn split_links_cost(
    links: &[&Link],
    y: &[f64],
    params: &VehicleEnergyParams,
) -> Result<(f64, f64)> {
    if y.len() != links.len() {
        return Err(Error::InvalidParameter(format!(
            "expected {} CD fractions, got {}",
            links.len(),
            y.len()
        )));
    }
    let mut cost = 0.0;
    let mut cd_energy = 0.0;
    for (link, &frac) in links.iter().zip(y) {
        if !(0.0..=1.0).contains(&frac) {
            return Err(Error::InvalidParameter(format!(
                "CD fraction {frac} on link {}->{} is outside [0, 1]",
                link.from, link.to
            )));
        }
        let c = link_mode_costs(link, params);
        cost += c.cs_cost * (1.0 - frac) + c.cd_cost * frac;
        cd_energy += c.cd_energy * frac;
    }
    Ok((cost, cd_energy))
}

pub fn split_path_cost(
    path: &Path,
    y: &[f64],
    graph: &NetworkGraph,
    params: &VehicleEnergyParams,
) -> Result<(f64, f64)> {
    split_links_cost(&graph.path_links(path)?, y, params)
}

/// Cheapest CD fractions for a fixed sequence of links.
///
/// With the route fixed this is a continuous knapsack: battery goes to the
/// links with the highest savings per kWh first. Links where CD is not
/// cheaper than CS get nothing. Ties keep path order.
pub fn allocate_battery(links: &[&Link], params: &VehicleEnergyParams) -> Vec<f64> {
    let mut order: Vec<usize> = (0..links.len()).collect();
    // Stable sort keeps earlier links first among equal savings.
    order.sort_by(|&a, &b| {
        params
            .savings_per_kwh(links[b].mode)
            .total_cmp(&params.savings_per_kwh(links[a].mode))
    });
    let mut y = vec![0.0; links.len()];
    let mut remaining = params.e_init;
    for idx in order {
        if remaining <= 0.0 || params.savings_per_kwh(links[idx].mode) <= 0.0 {
            break;
        }
        let need = link_mode_costs(links[idx], params).cd_energy;
        if remaining >= need {
            y[idx] = 1.0;
            remaining -= need;
        } else {
            y[idx] = remaining / need;
            remaining = 0.0;
        }
    }
    y
}

pub fn optimal_pt_allocation(
    path: &Path,
    graph: &NetworkGraph,
    params: &VehicleEnergyParams,
) -> Result<Vec<f64>> {
    Ok(allocate_battery(&graph.path_links(path)?, params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::NodeId;

    fn graph(links: &[(u32, u32, f64, TrafficMode)]) -> NetworkGraph {
        NetworkGraph::new(
            links
                .iter()
                .map(|&(a, b, d, m)| Link::new(a, b, d, 40.0, m).unwrap())
                .collect(),
        )
        .unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn medium_link_costs() {
        let link = Link::new(1, 2, 10.0, 30.0, TrafficMode::Medium).unwrap();
        let c = link_mode_costs(&link, &VehicleEnergyParams::default());
        assert!(close(c.cs_cost, 0.39625, 1e-5));
        assert!(close(c.cd_cost, 0.18387, 1e-5));
        assert!(close(c.cd_energy, 1.61290, 1e-5));

        let free = VehicleEnergyParams {
            c_gas: 0.0,
            c_ele: 0.0,
            ..Default::default()
        };
        let c = link_mode_costs(&link, &free);
        assert_eq!((c.cd_cost, c.cs_cost), (0.0, 0.0));
    }

    #[test]
    fn cdf_two_medium_links() {
        let g = graph(&[(1, 2, 20.0, TrafficMode::Medium), (2, 3, 20.0, TrafficMode::Medium)]);
        let eval = cdf_path_cost(&Path::new([1u32, 2, 3]), &g, &VehicleEnergyParams::default())
            .unwrap();
        assert!(close(eval.total_cost, 0.85157, 1e-5));
        let [first, second] = eval.breakdowns[..] else { panic!() };
        assert!(close(first.elec_cost, 0.36774, 1e-5));
        assert_eq!(first.gas_cost, 0.0);
        assert!(close(second.elec_cost, 0.26724, 1e-5));
        assert!(close(second.gas_cost, 0.21659, 1e-5));
        assert!(second.battery_after < 0.0);
        assert_eq!(second.reported_battery_after(), 0.0);
        assert!(close(second.cd_energy_used, first.battery_after, 1e-12));
    }

    #[test]
    fn cdf_single_link_all_electric() {
        let g = graph(&[(1, 2, 10.0, TrafficMode::Medium)]);
        let params = VehicleEnergyParams::default().with_battery(10.0);
        let eval = cdf_path_cost(&Path::new([1u32, 2]), &g, &params).unwrap();
        assert!(close(eval.total_cost, 0.18387, 1e-5));
        assert!(close(eval.breakdowns[0].battery_after, 8.38710, 1e-5));
    }

    #[test]
    fn cdf_empty_battery_is_pure_gas() {
        let g = graph(&[
            (1, 2, 7.0, TrafficMode::High),
            (2, 3, 12.0, TrafficMode::Low),
            (3, 4, 3.0, TrafficMode::Medium),
        ]);
        let params = VehicleEnergyParams::default().with_battery(0.0);
        let eval = cdf_path_cost(&Path::new([1u32, 2, 3, 4]), &g, &params).unwrap();
        let gas: f64 = g
            .links()
            .iter()
            .map(|l| link_mode_costs(l, &params).cs_cost)
            .sum();
        assert!(close(eval.total_cost, gas, 1e-12));
    }

    #[test]
    fn savings_per_kwh_defaults() {
        let p = VehicleEnergyParams::default();
        // 2.75 * mu_cd / mu_cs - 0.114, evaluated by hand.
        assert!(close(p.savings_per_kwh(TrafficMode::Low), 0.15349, 1e-5));
        assert!(close(p.savings_per_kwh(TrafficMode::Medium), 0.13168, 1e-5));
        assert!(close(p.savings_per_kwh(TrafficMode::High), 0.13874, 1e-5));
    }

    #[test]
    fn cd_cheaper_per_mile_for_every_mode() {
        let p = VehicleEnergyParams::default();
        let expected = [
            (TrafficMode::Low, 0.0200, 0.04693),
            (TrafficMode::Medium, 0.01839, 0.03963),
            (TrafficMode::High, 0.02714, 0.06018),
        ];
        for (mode, cd, cs) in expected {
            let link = Link::new(1, 2, 1.0, 30.0, mode).unwrap();
            let c = link_mode_costs(&link, &p);
            assert!(close(c.cd_cost, cd, 1e-5), "{mode}");
            assert!(close(c.cs_cost, cs, 1e-5), "{mode}");
            assert!(c.cd_cost < c.cs_cost);
        }
    }

    #[test]
    fn medium_then_low_allocation() {
        let g = graph(&[(1, 2, 20.0, TrafficMode::Medium), (2, 3, 20.0, TrafficMode::Low)]);
        let params = VehicleEnergyParams::default().with_battery(3.0);
        let path = Path::new([1u32, 2, 3]);
        let y = optimal_pt_allocation(&path, &g, &params).unwrap();
        assert_eq!(y[0], 0.0);
        assert!(close(y[1], 3.0 / 3.50877, 1e-5));
        let (cost, energy) = split_path_cost(&path, &y, &g, &params).unwrap();
        assert!(close(cost, 1.27060, 1e-5));
        assert!(close(energy, 3.0, 1e-12));
        let cdf = cdf_path_cost(&path, &g, &params).unwrap().total_cost;
        assert!(close(cdf, 1.33604, 1e-5));
        let saving = 100.0 * (cdf - cost) / cdf;
        assert!(close(saving, 4.90, 0.01));
    }

    #[test]
    fn large_battery_runs_fully_electric() {
        let g = graph(&[(1, 2, 20.0, TrafficMode::High), (2, 3, 20.0, TrafficMode::Low)]);
        let params = VehicleEnergyParams::default().with_battery(100.0);
        let y = optimal_pt_allocation(&Path::new([1u32, 2, 3]), &g, &params).unwrap();
        assert_eq!(y, vec![1.0, 1.0]);
    }

    #[test]
    fn split_cost_edges() {
        let g = graph(&[(1, 2, 20.0, TrafficMode::Medium), (2, 3, 20.0, TrafficMode::Low)]);
        let p = VehicleEnergyParams::default();
        let path = Path::new([1u32, 2, 3]);
        let links = g.path_links(&path).unwrap();
        let (cs, e0) = split_path_cost(&path, &[0.0, 0.0], &g, &p).unwrap();
        let pure_cs: f64 = links.iter().map(|l| link_mode_costs(l, &p).cs_cost).sum();
        assert!(close(cs, pure_cs, 1e-12));
        assert_eq!(e0, 0.0);
        let (cd, e1) = split_path_cost(&path, &[1.0, 1.0], &g, &p).unwrap();
        let pure_cd: f64 = links.iter().map(|l| link_mode_costs(l, &p).cd_cost).sum();
        assert!(close(cd, pure_cd, 1e-12));
        assert!(close(e1, 20.0 / 6.2 + 20.0 / 5.7, 1e-12));
        assert!(split_path_cost(&path, &[1.5, 0.0], &g, &p).is_err());
        assert!(split_path_cost(&path, &[-0.1, 0.0], &g, &p).is_err());
        assert!(split_path_cost(&path, &[0.0], &g, &p).is_err());
    }

    #[test]
    fn cdf_matches_split_with_induced_fractions() {
        let g = graph(&[
            (1, 2, 11.0, TrafficMode::Low),
            (2, 3, 4.0, TrafficMode::High),
            (3, 4, 9.0, TrafficMode::Medium),
        ]);
        for e in [0.0, 1.0, 2.5, 3.0, 10.0] {
            let p = VehicleEnergyParams::default().with_battery(e);
            let links = g.path_links(&Path::new([1u32, 2, 3, 4])).unwrap();
            let cdf = cdf_links_cost(&links, &p).total_cost;
            let y = cdf_allocation(&links, &p);
            let (split, _) = split_links_cost(&links, &y, &p).unwrap();
            assert!(close(cdf, split, 1e-12), "battery {e}");
        }
    }

    #[test]
    fn no_allocation_when_gas_is_free() {
        let g = graph(&[(1, 2, 5.0, TrafficMode::Low)]);
        let p = VehicleEnergyParams {
            c_gas: 0.0,
            ..Default::default()
        };
        let y = optimal_pt_allocation(&Path::new([1u32, 2]), &g, &p).unwrap();
        assert_eq!(y, vec![0.0]);
        assert!(g.contains(NodeId(1)));
    }

    #[test]
    fn param_validation() {
        assert!(VehicleEnergyParams::default().validate().is_ok());
        assert!(VehicleEnergyParams::default().with_battery(-1.0).validate().is_err());
        let mut p = VehicleEnergyParams::default();
        p.table.high.mu_cs = 0.0;
        assert!(p.validate().is_err());
    }
}
