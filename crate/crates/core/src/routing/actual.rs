use std::fmt;

use serde::{Deserialize, Serialize};

use crate::energy::{cdf_links_cost, VehicleEnergyParams};
use crate::error::{Error, Result};
use crate::graph::{NetworkGraph, NodeId, Path};

/// Time-of-day window of observed route choices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Period {
    /// 6 am to 9 am.
    AM,
    /// 9 am to 3 pm.
    MD,
    /// 3 pm to 6 pm.
    PM,
    /// 6 pm to 6 am.
    NT,
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Period::AM => "AM",
            Period::MD => "MD",
            Period::PM => "PM",
            Period::NT => "NT",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedRoute {
    pub nodes: Path,
    pub prob: f64,
}

/// Observed routes between one origin-destination pair with their
/// probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdRouteDistribution {
    pub origin: NodeId,
    pub dest: NodeId,
    pub period: Period,
    pub routes: Vec<WeightedRoute>,
}

impl OdRouteDistribution {
    /// Checks the probabilities and rescales them to sum to one. Returns
    /// whether rescaling was needed; a warning is logged in that case.
    pub fn normalize(&mut self) -> Result<bool> {
        if self.routes.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "no routes for {}->{} ({})",
                self.origin, self.dest, self.period
            )));
        }
        if let Some(r) = self.routes.iter().find(|r| !(r.prob.is_finite() && r.prob >= 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "route {} has invalid probability {}",
                r.nodes, r.prob
            )));
        }
        let total: f64 = self.routes.iter().map(|r| r.prob).sum();
        if total <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "route probabilities for {}->{} ({}) sum to zero",
                self.origin, self.dest, self.period
            )));
        }
        if (total - 1.0).abs() <= 1e-9 {
            return Ok(false);
        }
        log::warn!(
            "route probabilities for {}->{} ({}) sum to {total}; renormalizing",
            self.origin,
            self.dest,
            self.period
        );
        for r in &mut self.routes {
            r.prob /= total;
        }
        Ok(true)
    }
}

/// Probability-weighted charge-depleting-first cost and travel time of the
/// observed routes. Returns `(dollars, hours)`.
pub fn expected_actual_cost(
    dist: &OdRouteDistribution,
    graph: &NetworkGraph,
    params: &VehicleEnergyParams,
) -> Result<(f64, f64)> {
    let mut cost = 0.0;
    let mut time = 0.0;
    for route in &dist.routes {
        let path = &route.nodes;
        if path.first() != Some(dist.origin) || path.last() != Some(dist.dest) {
            return Err(Error::InvalidPath {
                path: path.to_string(),
                reason: format!("does not run from {} to {}", dist.origin, dist.dest),
            });
        }
        let links = graph.path_links(path)?;
        cost += route.prob * cdf_links_cost(&links, params).total_cost;
        time += route.prob * links.iter().map(|l| l.travel_time()).sum::<f64>();
    }
    Ok((cost, time))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Link, TrafficMode};

    fn dist(routes: &[(&[u32], f64)]) -> OdRouteDistribution {
        OdRouteDistribution {
            origin: NodeId(1),
            dest: NodeId(3),
            period: Period::AM,
            routes: routes
                .iter()
                .map(|(nodes, prob)| WeightedRoute {
                    nodes: Path::new(nodes.iter().copied()),
                    prob: *prob,
                })
                .collect(),
        }
    }

    fn triangle() -> NetworkGraph {
        NetworkGraph::new(vec![
            Link::new(1, 2, 10.0, 50.0, TrafficMode::Low).unwrap(),
            Link::new(2, 3, 10.0, 25.0, TrafficMode::Medium).unwrap(),
            Link::new(1, 3, 15.0, 15.0, TrafficMode::High).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn single_route_is_its_own_expectation() {
        let g = triangle();
        let p = VehicleEnergyParams::default();
        let d = dist(&[(&[1, 3], 1.0)]);
        let (cost, time) = expected_actual_cost(&d, &g, &p).unwrap();
        let links = g.path_links(&Path::new([1u32, 3])).unwrap();
        assert_eq!(cost, cdf_links_cost(&links, &p).total_cost);
        assert_eq!(time, 1.0);
    }

    #[test]
    fn renormalizes_with_warning() {
        let mut d = dist(&[(&[1, 2, 3], 0.5), (&[1, 3], 0.49)]);
        assert!(d.normalize().unwrap());
        let total: f64 = d.routes.iter().map(|r| r.prob).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let mut exact = dist(&[(&[1, 2, 3], 0.25), (&[1, 3], 0.75)]);
        assert!(!exact.normalize().unwrap());
        assert!(dist(&[(&[1, 3], -0.1)]).normalize().is_err());
        assert!(dist(&[(&[1, 3], 0.0)]).normalize().is_err());
        assert!(dist(&[]).normalize().is_err());
    }

    #[test]
    fn invalid_route_is_named() {
        let g = triangle();
        let d = dist(&[(&[1, 2], 1.0)]);
        let err = expected_actual_cost(&d, &g, &Default::default()).unwrap_err();
        assert!(err.to_string().contains("[1,2]"));
        let d = dist(&[(&[1, 3, 2, 3], 1.0)]);
        assert!(expected_actual_cost(&d, &g, &Default::default()).is_err());
    }
}
