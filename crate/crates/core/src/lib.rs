//! Energy-optimal routing for plug-in hybrid electric vehicles.
//!
//! The crate covers the whole pipeline: turning per-segment speed records into
//! a routable graph ([`preprocess`]), per-link PHEV energy costs
//! ([`energy`]), a dense simplex / branch-and-bound engine ([`solver`]), the
//! routing algorithms themselves ([`routing`]) and the file formats and
//! comparison reports used by the `ecoroute` binary ([`io`], [`report`]).

pub mod energy;
pub mod error;
pub mod graph;
pub mod io;
pub mod preprocess;
pub mod report;
pub mod routing;
pub mod solver;

pub use energy::{DriveCycleTable, ModeFactors, VehicleEnergyParams};
pub use error::{Error, Result};
pub use graph::{Link, NetworkGraph, NodeId, Path, TrafficMode};
pub use routing::{Algorithm, RouteSolution};

/// Absolute tolerance used when comparing dollar costs.
pub const COST_TOL: f64 = 1e-9;
