//! Side-by-side comparison of routing algorithms for origin-destination pairs.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::energy::VehicleEnergyParams;
use crate::error::Result;
use crate::graph::{NetworkGraph, NodeId, Path};
use crate::routing::{
    cdf_route_hybrid_lp, crptc_route_milp, expected_actual_cost, shortest_time_path,
    OdRouteDistribution, Period, RouteSolution,
};

/// Percentage of `baseline` saved by `cost`. Zero when the baseline is zero.
pub fn saving_percent(cost: f64, baseline: f64) -> f64 {
    if baseline == 0.0 {
        0.0
    } else {
        100.0 * (baseline - cost) / baseline
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmResult {
    pub algorithm: String,
    pub energy_cost: f64,
    pub travel_time: f64,
    pub path: Path,
    pub y_profile: Vec<f64>,
}

impl From<&RouteSolution> for AlgorithmResult {
    fn from(sol: &RouteSolution) -> Self {
        AlgorithmResult {
            algorithm: sol.algorithm.to_string(),
            energy_cost: sol.energy_cost,
            travel_time: sol.travel_time,
            path: sol.path.clone(),
            y_profile: sol.y.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActualResult {
    pub period: Period,
    pub expected_cost: f64,
    pub expected_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Delta {
    /// e.g. `crptc_vs_cdf`.
    pub name: String,
    pub cost: f64,
    pub baseline_cost: f64,
    pub saving_pct: f64,
    pub time: f64,
    pub baseline_time: f64,
    /// Extra travel time of the CRPTC route relative to the baseline, in percent.
    pub extra_time_pct: f64,
}

impl Delta {
    fn new(name: String, cost: f64, time: f64, baseline_cost: f64, baseline_time: f64) -> Self {
        Delta {
            name,
            cost,
            baseline_cost,
            saving_pct: saving_percent(cost, baseline_cost),
            time,
            baseline_time,
            extra_time_pct: -saving_percent(time, baseline_time),
        }
    }

    /// True when the stored percentages equal a fresh recomputation.
    pub fn is_consistent(&self) -> bool {
        self.saving_pct == saving_percent(self.cost, self.baseline_cost)
            && self.extra_time_pct == -saving_percent(self.time, self.baseline_time)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdComparison {
    pub origin: NodeId,
    pub dest: NodeId,
    pub algorithms: Vec<AlgorithmResult>,
    pub actual: Vec<ActualResult>,
    pub deltas: Vec<Delta>,
}

impl OdComparison {
    pub fn result(&self, algorithm: &str) -> Option<&AlgorithmResult> {
        self.algorithms.iter().find(|a| a.algorithm == algorithm)
    }

    pub fn delta(&self, name: &str) -> Option<&Delta> {
        self.deltas.iter().find(|d| d.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub params: VehicleEnergyParams,
    pub pairs: Vec<OdComparison>,
}

impl ComparisonReport {
    pub fn deltas_consistent(&self) -> bool {
        self.pairs.iter().flat_map(|p| &p.deltas).all(Delta::is_consistent)
    }

    /// Long-format rows `(od, algorithm, metric, value)` for plotting.
    pub fn plot_rows(&self) -> Vec<(String, String, &'static str, f64)> {
        let mut rows = Vec::new();
        for pair in &self.pairs {
            let od = format!("{}-{}", pair.origin, pair.dest);
            for a in &pair.algorithms {
                rows.push((od.clone(), a.algorithm.clone(), "energy_cost", a.energy_cost));
                rows.push((od.clone(), a.algorithm.clone(), "travel_time", a.travel_time));
            }
            for a in &pair.actual {
                let name = format!("actual_{}", a.period);
                rows.push((od.clone(), name.clone(), "energy_cost", a.expected_cost));
                rows.push((od.clone(), name, "travel_time", a.expected_time));
            }
            for d in &pair.deltas {
                rows.push((od.clone(), d.name.clone(), "saving_pct", d.saving_pct));
                rows.push((od.clone(), d.name.clone(), "extra_time_pct", d.extra_time_pct));
            }
        }
        rows
    }

    pub fn write_plot_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["od", "algorithm", "metric", "value"])?;
        for (od, algorithm, metric, value) in self.plot_rows() {
            writer.write_record([od, algorithm, metric.to_string(), value.to_string()])?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Runs every algorithm on one pair and, for each observed-route distribution
/// of the pair, the expected cost of the observed routes.
pub fn compare_od(
    graph: &NetworkGraph,
    params: &VehicleEnergyParams,
    origin: NodeId,
    dest: NodeId,
    observed: &[&OdRouteDistribution],
) -> Result<OdComparison> {
    let min_time = shortest_time_path(graph, params, origin, dest)?;
    let cdf = cdf_route_hybrid_lp(graph, params, origin, dest)?;
    let crptc = crptc_route_milp(graph, params, origin, dest)?;

    let mut actual = Vec::new();
    for dist in observed {
        let (expected_cost, expected_time) = expected_actual_cost(dist, graph, params)?;
        actual.push(ActualResult {
            period: dist.period,
            expected_cost,
            expected_time,
        });
    }

    let delta = |name: String, base_cost: f64, base_time: f64| {
        Delta::new(name, crptc.energy_cost, crptc.travel_time, base_cost, base_time)
    };
    let mut deltas = vec![
        delta("crptc_vs_cdf".into(), cdf.energy_cost, cdf.travel_time),
        delta("crptc_vs_min_time".into(), min_time.energy_cost, min_time.travel_time),
    ];
    for a in &actual {
        deltas.push(delta(
            format!("crptc_vs_actual_{}", a.period),
            a.expected_cost,
            a.expected_time,
        ));
    }

    Ok(OdComparison {
        origin,
        dest,
        algorithms: [&min_time, &cdf, &crptc].into_iter().map(AlgorithmResult::from).collect(),
        actual,
        deltas,
    })
}

/// Compares every requested pair. Pairs are independent and evaluated on
/// scoped threads; the report keeps the input order.
pub fn compare(
    graph: &NetworkGraph,
    params: &VehicleEnergyParams,
    pairs: &[(NodeId, NodeId)],
    observed: &[OdRouteDistribution],
) -> Result<ComparisonReport> {
    let results: Vec<Result<OdComparison>> = std::thread::scope(|scope| {
        let handles: Vec<_> = pairs
            .iter()
            .map(|&(origin, dest)| {
                let routes: Vec<&OdRouteDistribution> = observed
                    .iter()
                    .filter(|d| d.origin == origin && d.dest == dest)
                    .collect();
                scope.spawn(move || compare_od(graph, params, origin, dest, &routes))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("comparison thread panicked"))
            .collect()
    });
    Ok(ComparisonReport {
        params: *params,
        pairs: results.into_iter().collect::<Result<_>>()?,
    })
}
