//! Dense linear and mixed-integer programming.
//!
//! [`solve_lp`] runs a two-phase bounded-variable primal simplex on a dense
//! tableau. [`solve_milp`] wraps it in best-first branch-and-bound. Both are
//! sized for the routing formulations in this crate (a few hundred columns at
//! most) and require finite bounds on every structural variable.

mod lp;
mod milp;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use lp::solve_lp;
pub use milp::solve_milp;

/// Primal feasibility tolerance.
pub const FEAS_TOL: f64 = 1e-7;
/// Distance from an integer below which a value counts as integral.
pub const INT_TOL: f64 = 1e-6;
/// Branch-and-bound pruning slack.
pub const PRUNE_TOL: f64 = 1e-9;
pub const MAX_PIVOTS: usize = 1_000_000;
pub const MAX_NODES: usize = 1_000_000;
/// Consecutive degenerate pivots before switching to Bland's rule.
pub const BLAND_AFTER: usize = 1000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("malformed problem: {0}")]
    Malformed(String),
    #[error("branch-and-bound node limit of {limit} exceeded")]
    NodeLimit { limit: usize },
    #[error("problem is unbounded")]
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl Sense {
    fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    /// Dense coefficient row, one entry per variable.
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

/// `minimize c·x` subject to row constraints and `lower <= x <= upper`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    /// Adds a variable and returns its index. Existing rows get a zero
    /// coefficient for it.
    pub fn add_var(&mut self, cost: f64, lower: f64, upper: f64) -> usize {
        self.objective.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        for row in &mut self.constraints {
            row.coeffs.push(0.0);
        }
        self.objective.len() - 1
    }

    /// Adds `sum(coef * x[var]) sense rhs`. Repeated indices are summed.
    pub fn add_constraint(&mut self, terms: &[(usize, f64)], sense: Sense, rhs: f64) {
        let mut coeffs = vec![0.0; self.num_vars()];
        for &(var, coef) in terms {
            coeffs[var] += coef;
        }
        self.constraints.push(Constraint { coeffs, sense, rhs });
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(SolverError::Malformed("bound vectors do not match objective".into()));
        }
        for j in 0..n {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            if !lo.is_finite() || !hi.is_finite() {
                return Err(SolverError::Malformed(format!("variable {j} has an infinite bound")));
            }
            if lo > hi {
                return Err(SolverError::Malformed(format!("variable {j} has lower > upper")));
            }
            if !self.objective[j].is_finite() {
                return Err(SolverError::Malformed(format!("objective coefficient {j} is not finite")));
            }
        }
        for (i, row) in self.constraints.iter().enumerate() {
            if row.coeffs.len() != n {
                return Err(SolverError::Malformed(format!("row {i} has {} coefficients, expected {n}", row.coeffs.len())));
            }
            if !row.rhs.is_finite() || row.coeffs.iter().any(|c| !c.is_finite()) {
                return Err(SolverError::Malformed(format!("row {i} has a non-finite entry")));
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest bound or row violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(self.lower[j] - v).max(v - self.upper[j]);
        }
        for row in &self.constraints {
            let lhs: f64 = row.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
            let gap = match row.sense {
                Sense::Le => lhs - row.rhs,
                Sense::Ge => row.rhs - lhs,
                Sense::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(gap);
        }
        worst
    }
}

/// Plain-text dump of the instance, one row per line.
impl fmt::Display for LinearProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let row = |v: &[f64]| v.iter().map(|c| format!("{c:>10.6}")).collect::<Vec<_>>().join(" ");
        writeln!(f, "vars {} rows {}", self.num_vars(), self.constraints.len())?;
        writeln!(f, "min  {}", row(&self.objective))?;
        for (i, c) in self.constraints.iter().enumerate() {
            writeln!(f, "r{i:<3} {} {} {:.6}", row(&c.coeffs), c.sense.symbol(), c.rhs)?;
        }
        writeln!(f, "lo   {}", row(&self.lower))?;
        writeln!(f, "hi   {}", row(&self.upper))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpProblem {
    pub lp: LinearProgram,
    pub integer_vars: Vec<usize>,
}

impl MilpProblem {
    pub fn validate(&self) -> Result<(), SolverError> {
        self.lp.validate()?;
        for &j in &self.integer_vars {
            if j >= self.lp.num_vars() {
                return Err(SolverError::Malformed(format!("integer variable {j} out of range")));
            }
            if self.lp.lower[j] < 0.0 || self.lp.upper[j] > 1.0 {
                return Err(SolverError::Malformed(format!(
                    "integer variable {j} must have bounds within [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for MilpProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.lp)?;
        let ints: Vec<String> = self.integer_vars.iter().map(|j| j.to_string()).collect();
        writeln!(f, "int  {}", ints.join(" "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Optimal,
    Infeasible,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: Status,
    /// Structural variable values; empty unless `status` is `Optimal`.
    pub values: Vec<f64>,
    pub objective: f64,
    /// Simplex pivots (summed over all nodes for MILPs).
    pub pivots: usize,
    /// Branch-and-bound nodes solved; 0 for pure LPs.
    pub nodes: usize,
}

impl SolveResult {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }

    fn without_solution(status: Status, pivots: usize, nodes: usize) -> Self {
        SolveResult {
            status,
            values: Vec::new(),
            objective: f64::NAN,
            pivots,
            nodes,
        }
    }
}
