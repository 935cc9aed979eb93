use super::{
    LinearProgram, Sense, SolveResult, SolverError, Status, BLAND_AFTER, FEAS_TOL, MAX_PIVOTS,
};

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const DEGENERATE_STEP: f64 = 1e-12;
const REFRESH_EVERY: usize = 64;

/// Solves `lp` to a basic optimal solution.
pub fn solve_lp(lp: &LinearProgram) -> Result<SolveResult, SolverError> {
    lp.validate()?;
    solve_lp_with_limit(lp, MAX_PIVOTS)
}

pub(super) fn solve_lp_with_limit(
    lp: &LinearProgram,
    max_pivots: usize,
) -> Result<SolveResult, SolverError> {
    let mut tab = Tableau::new(lp, max_pivots);

    let phase_one: Vec<f64> = (0..tab.ncols)
        .map(|j| if j >= tab.first_artificial { 1.0 } else { 0.0 })
        .collect();
    match tab.optimize(&phase_one)? {
        Outcome::Optimal => {}
        Outcome::IterationLimit => {
            return Ok(SolveResult::without_solution(Status::IterationLimit, tab.pivots, 0))
        }
    }
    let infeasibility: f64 = (tab.first_artificial..tab.ncols).map(|j| tab.x[j]).sum();
    if infeasibility > FEAS_TOL {
        return Ok(SolveResult::without_solution(Status::Infeasible, tab.pivots, 0));
    }
    tab.retire_artificials();

    let mut phase_two = vec![0.0; tab.ncols];
    phase_two[..lp.num_vars()].copy_from_slice(&lp.objective);
    match tab.optimize(&phase_two)? {
        Outcome::Optimal => {}
        Outcome::IterationLimit => {
            return Ok(SolveResult::without_solution(Status::IterationLimit, tab.pivots, 0))
        }
    }

    let values: Vec<f64> = (0..lp.num_vars())
        .map(|j| tab.x[j].clamp(lp.lower[j], lp.upper[j]))
        .collect();
    Ok(SolveResult {
        status: Status::Optimal,
        objective: lp.objective_value(&values),
        values,
        pivots: tab.pivots,
        nodes: 0,
    })
}

enum Outcome {
    Optimal,
    IterationLimit,
}

/// Dense bounded-variable tableau.
///
/// Columns are the structural variables, one slack per inequality row and one
/// artificial per row whose starting point violates it. Every row of the
/// stored matrix is sign-scaled so the starting basis is an identity, which
/// lets `refresh` recover the basis inverse from the tableau.
struct Tableau {
    m: usize,
    ncols: usize,
    first_artificial: usize,
    /// Scaled original matrix, kept to recompute basic values.
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    /// `B^-1 a`.
    t: Vec<Vec<f64>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    basis: Vec<usize>,
    basic_row: Vec<Option<usize>>,
    at_upper: Vec<bool>,
    initial_basis: Vec<usize>,
    pivots: usize,
    max_pivots: usize,
}

impl Tableau {
    fn new(lp: &LinearProgram, max_pivots: usize) -> Self {
        let m = lp.constraints.len();
        let mut lower = lp.lower.clone();
        let mut upper = lp.upper.clone();
        let mut x = lp.lower.clone();

        // Row residuals with every structural at its lower bound.
        let residual: Vec<f64> = lp
            .constraints
            .iter()
            .map(|row| row.rhs - row.coeffs.iter().zip(&lp.lower).map(|(a, l)| a * l).sum::<f64>())
            .collect();

        let mut a: Vec<Vec<f64>> = lp.constraints.iter().map(|r| r.coeffs.clone()).collect();
        let mut b: Vec<f64> = lp.constraints.iter().map(|r| r.rhs).collect();
        let mut basis = vec![usize::MAX; m];

        // Slack columns.
        for (i, row) in lp.constraints.iter().enumerate() {
            let coef = match row.sense {
                Sense::Le => 1.0,
                Sense::Ge => -1.0,
                Sense::Eq => continue,
            };
            let col = lower.len();
            for (k, r) in a.iter_mut().enumerate() {
                r.push(if k == i { coef } else { 0.0 });
            }
            lower.push(0.0);
            upper.push(f64::INFINITY);
            let slack_value = residual[i] * coef;
            if slack_value >= 0.0 {
                // The slack alone satisfies the row; scale so it reads +1.
                if coef < 0.0 {
                    a[i].iter_mut().for_each(|v| *v = -*v);
                    b[i] = -b[i];
                }
                basis[i] = col;
                x.push(slack_value);
            } else {
                x.push(0.0);
            }
        }

        let first_artificial = lower.len();
        for i in 0..m {
            if basis[i] != usize::MAX {
                continue;
            }
            if residual[i] < 0.0 {
                a[i].iter_mut().for_each(|v| *v = -*v);
                b[i] = -b[i];
            }
            let col = lower.len();
            for (k, r) in a.iter_mut().enumerate() {
                r.push(if k == i { 1.0 } else { 0.0 });
            }
            lower.push(0.0);
            upper.push(f64::INFINITY);
            x.push(residual[i].abs());
            basis[i] = col;
        }

        let ncols = lower.len();
        for r in &mut a {
            r.resize(ncols, 0.0);
        }
        let mut basic_row = vec![None; ncols];
        for (i, &col) in basis.iter().enumerate() {
            basic_row[col] = Some(i);
        }

        Tableau {
            m,
            ncols,
            first_artificial,
            t: a.clone(),
            a,
            b,
            lower,
            upper,
            x,
            initial_basis: basis.clone(),
            basis,
            basic_row,
            at_upper: vec![false; ncols],
            pivots: 0,
            max_pivots,
        }
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for (i, row) in self.t.iter().enumerate() {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for (dj, tij) in d.iter_mut().zip(row) {
                    *dj -= cb * tij;
                }
            }
        }
        d
    }

    /// Recomputes basic values from the nonbasic ones to shed drift.
    fn refresh(&mut self) {
        let mut rhs = self.b.clone();
        for j in 0..self.ncols {
            if self.basic_row[j].is_none() && self.x[j] != 0.0 {
                for (r, row) in rhs.iter_mut().zip(&self.a) {
                    *r -= row[j] * self.x[j];
                }
            }
        }
        for i in 0..self.m {
            let value: f64 = self
                .initial_basis
                .iter()
                .zip(&rhs)
                .map(|(&col, r)| self.t[i][col] * r)
                .sum();
            self.x[self.basis[i]] = value;
        }
    }

    fn entering(&self, d: &[f64], bland: bool) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.ncols {
            if self.basic_row[j].is_some() || self.upper[j] - self.lower[j] <= 0.0 {
                continue;
            }
            let improving = if self.at_upper[j] { d[j] > COST_TOL } else { d[j] < -COST_TOL };
            if !improving {
                continue;
            }
            if bland {
                return Some(j);
            }
            if best.map_or(true, |(_, score)| d[j].abs() > score) {
                best = Some((j, d[j].abs()));
            }
        }
        best.map(|(j, _)| j)
    }

    fn optimize(&mut self, cost: &[f64]) -> Result<Outcome, SolverError> {
        let mut d = self.reduced_costs(cost);
        let mut degenerate_run = 0usize;
        let mut bland = false;
        let mut since_refresh = 0usize;
        loop {
            let Some(j) = self.entering(&d, bland) else {
                self.refresh();
                return Ok(Outcome::Optimal);
            };
            if self.pivots >= self.max_pivots {
                return Ok(Outcome::IterationLimit);
            }
            self.pivots += 1;

            let dir = if self.at_upper[j] { -1.0 } else { 1.0 };
            let mut step = self.upper[j] - self.lower[j];
            let mut leaving: Option<usize> = None;
            let mut leaving_alpha = 0.0;
            for i in 0..self.m {
                let alpha = self.t[i][j] * dir;
                let col = self.basis[i];
                let limit = if alpha > PIVOT_TOL {
                    (self.x[col] - self.lower[col]) / alpha
                } else if alpha < -PIVOT_TOL && self.upper[col].is_finite() {
                    (self.upper[col] - self.x[col]) / -alpha
                } else {
                    continue;
                };
                let limit = limit.max(0.0);
                let better = match leaving {
                    None => limit < step,
                    Some(r) => {
                        if limit < step - DEGENERATE_STEP {
                            true
                        } else if limit <= step + DEGENERATE_STEP {
                            if bland {
                                col < self.basis[r]
                            } else {
                                alpha.abs() > leaving_alpha
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    step = limit;
                    leaving = Some(i);
                    leaving_alpha = alpha.abs();
                }
            }
            if !step.is_finite() {
                return Err(SolverError::Unbounded);
            }

            if step <= DEGENERATE_STEP {
                degenerate_run += 1;
                if degenerate_run >= BLAND_AFTER {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
            }

            self.x[j] += dir * step;
            for i in 0..self.m {
                let col = self.basis[i];
                self.x[col] -= self.t[i][j] * dir * step;
            }

            match leaving {
                None => {
                    // Bound flip, basis unchanged.
                    self.at_upper[j] = !self.at_upper[j];
                    self.x[j] = if self.at_upper[j] { self.upper[j] } else { self.lower[j] };
                }
                Some(r) => {
                    let out = self.basis[r];
                    let goes_up = self.t[r][j] * dir < 0.0;
                    self.at_upper[out] = goes_up;
                    self.x[out] = if goes_up { self.upper[out] } else { self.lower[out] };
                    self.pivot(r, j, &mut d);
                }
            }

            since_refresh += 1;
            if since_refresh >= REFRESH_EVERY {
                self.refresh();
                d = self.reduced_costs(cost);
                since_refresh = 0;
            }
        }
    }

    fn pivot(&mut self, r: usize, j: usize, d: &mut [f64]) {
        let piv = self.t[r][j];
        self.t[r].iter_mut().for_each(|v| *v /= piv);
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let factor = row[j];
            if factor != 0.0 {
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= factor * p;
                }
            }
        }
        let factor = d[j];
        if factor != 0.0 {
            for (v, p) in d.iter_mut().zip(&pivot_row) {
                *v -= factor * p;
            }
        }
        let out = self.basis[r];
        self.basic_row[out] = None;
        self.basic_row[j] = Some(r);
        self.basis[r] = j;
    }

    /// Fixes artificials at zero and pivots basic ones out where possible.
    fn retire_artificials(&mut self) {
        for j in self.first_artificial..self.ncols {
            self.upper[j] = 0.0;
            if self.basic_row[j].is_none() {
                self.x[j] = 0.0;
                self.at_upper[j] = false;
            }
        }
        let mut scratch = vec![0.0; self.ncols];
        for r in 0..self.m {
            let col = self.basis[r];
            if col < self.first_artificial {
                continue;
            }
            let replacement = (0..self.first_artificial)
                .filter(|&k| self.basic_row[k].is_none())
                .max_by(|&p, &q| self.t[r][p].abs().total_cmp(&self.t[r][q].abs()))
                .filter(|&k| self.t[r][k].abs() > 1e-7);
            if let Some(k) = replacement {
                self.x[col] = 0.0;
                self.at_upper[col] = false;
                self.pivot(r, k, &mut scratch);
            }
        }
        self.refresh();
    }
}
