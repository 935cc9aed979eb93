use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::lp::solve_lp_with_limit;
use super::{
    MilpProblem, SolveResult, SolverError, Status, INT_TOL, MAX_NODES, MAX_PIVOTS, PRUNE_TOL,
};

/// Solves `problem` exactly by best-first branch-and-bound.
///
/// Nodes are explored in order of their parent's relaxation bound (ties in
/// creation order), branching on the most fractional integer variable.
pub fn solve_milp(problem: &MilpProblem) -> Result<SolveResult, SolverError> {
    solve_milp_with_limit(problem, MAX_NODES)
}

pub(crate) fn solve_milp_with_limit(
    problem: &MilpProblem,
    max_nodes: usize,
) -> Result<SolveResult, SolverError> {
    problem.validate()?;
    let mut heap = BinaryHeap::new();
    heap.push(Node {
        bound: f64::NEG_INFINITY,
        seq: 0,
        lower: problem.lp.lower.clone(),
        upper: problem.lp.upper.clone(),
    });
    let mut next_seq = 1;
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut nodes = 0usize;
    let mut pivots = 0usize;
    let mut relaxation = problem.lp.clone();

    while let Some(node) = heap.pop() {
        let cutoff = incumbent.as_ref().map_or(f64::INFINITY, |(obj, _)| obj - PRUNE_TOL);
        if node.bound >= cutoff {
            continue;
        }
        if nodes == max_nodes {
            return Err(SolverError::NodeLimit { limit: max_nodes });
        }
        nodes += 1;

        relaxation.lower.clone_from(&node.lower);
        relaxation.upper.clone_from(&node.upper);
        let res = solve_lp_with_limit(&relaxation, MAX_PIVOTS.saturating_sub(pivots))?;
        pivots += res.pivots;
        match res.status {
            Status::Optimal => {}
            Status::Infeasible => continue,
            Status::IterationLimit => {
                return Ok(SolveResult::without_solution(Status::IterationLimit, pivots, nodes))
            }
        }
        if res.objective >= cutoff {
            continue;
        }

        let branch = most_fractional(&res.values, &problem.integer_vars);
        match branch {
            None => {
                let mut values = res.values;
                for &j in &problem.integer_vars {
                    values[j] = values[j].round();
                }
                let objective = problem.lp.objective_value(&values);
                incumbent = Some((objective, values));
            }
            Some(j) => {
                let v = res.values[j];
                let mut down_upper = node.upper.clone();
                down_upper[j] = v.floor();
                heap.push(Node {
                    bound: res.objective,
                    seq: next_seq,
                    lower: node.lower.clone(),
                    upper: down_upper,
                });
                let mut up_lower = node.lower;
                up_lower[j] = v.ceil();
                heap.push(Node {
                    bound: res.objective,
                    seq: next_seq + 1,
                    lower: up_lower,
                    upper: node.upper,
                });
                next_seq += 2;
            }
        }
    }

    Ok(match incumbent {
        Some((objective, values)) => SolveResult {
            status: Status::Optimal,
            values,
            objective,
            pivots,
            nodes,
        },
        None => SolveResult::without_solution(Status::Infeasible, pivots, nodes),
    })
}

/// Integer variable farthest from integrality; lowest index on ties.
fn most_fractional(values: &[f64], integer_vars: &[usize]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for &j in integer_vars {
        let frac = values[j] - values[j].floor();
        let dist = frac.min(1.0 - frac);
        if dist <= INT_TOL {
            continue;
        }
        let better = match best {
            None => true,
            Some((k, d)) => dist > d || (dist == d && j < k),
        };
        if better {
            best = Some((j, dist));
        }
    }
    best.map(|(j, _)| j)
}

struct Node {
    bound: f64,
    seq: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

// Min-heap on (bound, seq).
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}
