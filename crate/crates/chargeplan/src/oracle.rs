//! Independent correctness oracle for the specialized solver.
//!
//! Two deliberately unrelated routes to the optimum: a dense textbook
//! two-phase simplex with Bland's rule (exact, test scale only) and an
//! exhaustive search over a discretized charge grid. Neither shares code
//! with the price-ordered solver. Also hosts the seeded random-instance
//! generator used by tests and the benchmark command.

use rand::Rng;

use crate::error::{Error, Result};
use crate::problem::{instance_has_feasible_point, CoreProblem};
use crate::transforms::{build_lossless, StorageScenario};

const EPS: f64 = 1e-9;

/// Which oracle route to run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleMethod {
    /// Dense two-phase simplex; limited to `n <= 50`.
    ExactLp,
    /// Exhaustive search over per-coordinate grids `{0, step, 2·step, …,
    /// cap}`; limited to `n <= 5`. The result upper-bounds the optimum
    /// within `n · step · max|price|`.
    GridEnumeration { step: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub objective: f64,
    pub x: Vec<f64>,
    pub method: OracleMethod,
}

pub fn oracle_solve(problem: &CoreProblem, method: OracleMethod) -> Result<OracleResult> {
    match method {
        OracleMethod::ExactLp => {
            if problem.n() > 50 {
                return Err(Error::SizeLimit(format!(
                    "exact LP oracle supports n <= 50, got {}",
                    problem.n()
                )));
            }
            let x = simplex_solve(problem)?;
            let objective = crate::problem::objective(problem, &x)?;
            Ok(OracleResult {
                objective,
                x,
                method,
            })
        }
        OracleMethod::GridEnumeration { step } => {
            if problem.n() > 5 {
                return Err(Error::SizeLimit(format!(
                    "grid enumeration supports n <= 5, got {}",
                    problem.n()
                )));
            }
            if !(step > 0.0) || !step.is_finite() {
                return Err(Error::Domain(format!("grid step {step} must be positive")));
            }
            let (objective, x) = grid_enumerate(problem, step)?;
            Ok(OracleResult {
                objective,
                x,
                method,
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Dense two-phase simplex with Bland's rule.
//
// Standard-form rows, all with nonnegative right-hand side:
//   x_i + s_i                 = cap_i      (box rows, slack basis)
//   x_1 + … + x_i + t_i       = upper_i    (prefix rows, slack basis)
//   x_1 + … + x_i - r + z     = lower_i    (only where lower_i > 0;
//                                           artificial z starts basic)
// Bland's smallest-index rule makes the pivoting finite; no performance
// goals here.
// ---------------------------------------------------------------------------

struct Tableau {
    rows: Vec<Vec<f64>>,
    /// Reduced-cost row; last entry is minus the current objective value.
    obj: Vec<f64>,
    basis: Vec<usize>,
    ncols: usize,
    /// Columns that may never enter the basis (artificials in phase 2).
    banned: Vec<bool>,
}

impl Tableau {
    fn rhs(&self, row: usize) -> f64 {
        self.rows[row][self.ncols]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let factor = self.rows[row][col];
        for v in &mut self.rows[row] {
            *v /= factor;
        }
        let pivot_row = self.rows[row].clone();
        for (r, other) in self.rows.iter_mut().enumerate() {
            if r == row {
                continue;
            }
            let mult = other[col];
            if mult != 0.0 {
                for (v, p) in other.iter_mut().zip(&pivot_row) {
                    *v -= mult * p;
                }
            }
        }
        let mult = self.obj[col];
        if mult != 0.0 {
            for (v, p) in self.obj.iter_mut().zip(&pivot_row) {
                *v -= mult * p;
            }
        }
        self.basis[row] = col;
    }

    /// Builds the reduced-cost row for the given variable costs under the
    /// current basis.
    fn set_costs(&mut self, costs: &[f64]) {
        self.obj = costs.to_vec();
        self.obj.push(0.0);
        for (r, &basic) in self.basis.clone().iter().enumerate() {
            let c = self.obj[basic];
            if c != 0.0 {
                let row = self.rows[r].clone();
                for (v, p) in self.obj.iter_mut().zip(&row) {
                    *v -= c * p;
                }
            }
        }
    }

    /// Bland's rule iteration until optimal. Errors if the problem turns
    /// out unbounded, which a compact feasible region rules out.
    fn optimize(&mut self) -> Result<()> {
        let limit = 1000 * (self.rows.len() + self.ncols).max(10);
        for _ in 0..limit {
            let entering = (0..self.ncols).find(|&j| !self.banned[j] && self.obj[j] < -EPS);
            let Some(col) = entering else {
                return Ok(());
            };
            let mut leaving: Option<(usize, f64)> = None;
            for r in 0..self.rows.len() {
                let coef = self.rows[r][col];
                if coef > EPS {
                    let ratio = self.rhs(r).max(0.0) / coef;
                    let better = match leaving {
                        None => true,
                        Some((best_r, best_ratio)) => {
                            ratio < best_ratio - EPS
                                || (ratio <= best_ratio + EPS
                                    && self.basis[r] < self.basis[best_r])
                        }
                    };
                    if better {
                        leaving = Some((r, ratio));
                    }
                }
            }
            let Some((row, _)) = leaving else {
                return Err(Error::Domain(
                    "oracle: unbounded pivot on a compact feasible region".into(),
                ));
            };
            self.pivot(row, col);
        }
        Err(Error::Domain("oracle: pivot limit exceeded".into()))
    }

    fn objective_value(&self) -> f64 {
        -self.obj[self.ncols]
    }
}

fn simplex_solve(problem: &CoreProblem) -> Result<Vec<f64>> {
    let n = problem.n();
    if let Some(i) = (0..n).find(|&i| problem.cum_upper()[i] < 0.0) {
        return Err(Error::Infeasible {
            index: i,
            shortfall: -problem.cum_upper()[i],
        });
    }

    let lower_rows: Vec<usize> = (0..n).filter(|&i| problem.cum_lower()[i] > 0.0).collect();
    let m3 = lower_rows.len();
    let nrows = 2 * n + m3;
    let x0 = 0; // x columns
    let s0 = n; // box slacks
    let t0 = 2 * n; // prefix-upper slacks
    let r0 = 3 * n; // prefix-lower surpluses
    let z0 = 3 * n + m3; // artificials
    let ncols = 3 * n + 2 * m3;

    let mut rows = vec![vec![0.0; ncols + 1]; nrows];
    let mut basis = vec![0usize; nrows];
    for i in 0..n {
        rows[i][x0 + i] = 1.0;
        rows[i][s0 + i] = 1.0;
        rows[i][ncols] = problem.step_cap()[i];
        basis[i] = s0 + i;
    }
    for i in 0..n {
        let r = n + i;
        for j in 0..=i {
            rows[r][x0 + j] = 1.0;
        }
        rows[r][t0 + i] = 1.0;
        rows[r][ncols] = problem.cum_upper()[i];
        basis[r] = t0 + i;
    }
    for (k, &i) in lower_rows.iter().enumerate() {
        let r = 2 * n + k;
        for j in 0..=i {
            rows[r][x0 + j] = 1.0;
        }
        rows[r][r0 + k] = -1.0;
        rows[r][z0 + k] = 1.0;
        rows[r][ncols] = problem.cum_lower()[i];
        basis[r] = z0 + k;
    }

    let mut tableau = Tableau {
        rows,
        obj: vec![],
        basis,
        ncols,
        banned: vec![false; ncols],
    };

    // Phase 1: minimize the artificial sum.
    if m3 > 0 {
        let mut phase1 = vec![0.0; ncols];
        for k in 0..m3 {
            phase1[z0 + k] = 1.0;
        }
        tableau.set_costs(&phase1);
        tableau.optimize()?;
        let scale = problem
            .cum_lower()
            .iter()
            .fold(1.0f64, |m, &v| m.max(v.abs()));
        if tableau.objective_value() > EPS * scale {
            // The artificial sum is the total shortfall; report the first
            // lower bound that stayed uncovered.
            let (index, shortfall) = lower_rows
                .iter()
                .enumerate()
                .filter_map(|(k, &i)| {
                    let row = (0..tableau.basis.len()).find(|&r| tableau.basis[r] == z0 + k)?;
                    let v = tableau.rhs(row);
                    (v > EPS * scale).then_some((i, v))
                })
                .next()
                .unwrap_or((lower_rows[0], tableau.objective_value()));
            return Err(Error::Infeasible { index, shortfall });
        }
        // Drive remaining artificials out of the basis where possible and
        // ban their columns for phase 2.
        for r in 0..tableau.rows.len() {
            if tableau.basis[r] >= z0 {
                if let Some(col) =
                    (0..z0).find(|&j| tableau.rows[r][j].abs() > EPS && !tableau.banned[j])
                {
                    tableau.pivot(r, col);
                }
            }
        }
        for k in 0..m3 {
            tableau.banned[z0 + k] = true;
        }
    }

    // Phase 2: the real objective.
    let mut costs = vec![0.0; ncols];
    costs[..n].copy_from_slice(problem.price());
    tableau.set_costs(&costs);
    tableau.optimize()?;

    let mut x = vec![0.0; n];
    for (r, &basic) in tableau.basis.iter().enumerate() {
        if basic < n {
            x[basic] = tableau.rhs(r).max(0.0);
        }
    }
    Ok(x)
}

// ---------------------------------------------------------------------------
// Exhaustive discretized search.
// ---------------------------------------------------------------------------

fn grid_enumerate(problem: &CoreProblem, step: f64) -> Result<(f64, Vec<f64>)> {
    let n = problem.n();
    let tol = problem.feasibility_tolerance();

    let values: Vec<Vec<f64>> = problem
        .step_cap()
        .iter()
        .map(|&cap| {
            let mut vs: Vec<f64> = (0..)
                .map(|k| k as f64 * step)
                .take_while(|v| *v <= cap)
                .collect();
            if vs.last().map_or(true, |&last| last < cap) {
                vs.push(cap);
            }
            vs
        })
        .collect();

    // Tightest remaining upper bound, and the smallest prefix from which
    // every remaining lower bound is still reachable through the caps.
    let mut tightest_upper = vec![0.0; n];
    let mut running = f64::INFINITY;
    for i in (0..n).rev() {
        running = running.min(problem.cum_upper()[i]);
        tightest_upper[i] = running;
    }
    // need_before[i] = max over j >= i of (lower_j - cap_i - … - cap_j):
    // the smallest prefix before i from which every remaining lower bound
    // is still reachable.
    let mut need_before = vec![0.0; n];
    let mut carry = f64::NEG_INFINITY;
    for i in (0..n).rev() {
        carry = carry.max(problem.cum_lower()[i]) - problem.step_cap()[i];
        need_before[i] = carry;
    }

    struct Search<'a> {
        problem: &'a CoreProblem,
        values: &'a [Vec<f64>],
        tightest_upper: &'a [f64],
        need_before: &'a [f64],
        tol: f64,
        current: Vec<f64>,
        best_cost: f64,
        best_x: Option<Vec<f64>>,
    }

    impl Search<'_> {
        fn dfs(&mut self, i: usize, prefix: f64, cost: f64) {
            if i == self.problem.n() {
                if cost < self.best_cost {
                    self.best_cost = cost;
                    self.best_x = Some(self.current.clone());
                }
                return;
            }
            if prefix > self.tightest_upper[i] + self.tol {
                return;
            }
            if prefix < self.need_before[i] - self.tol {
                return;
            }
            let price = self.problem.price()[i];
            for &v in &self.values[i] {
                let next = prefix + v;
                if next < self.problem.cum_lower()[i] - self.tol {
                    continue;
                }
                if next > self.problem.cum_upper()[i] + self.tol {
                    break; // candidate values ascend
                }
                self.current.push(v);
                self.dfs(i + 1, next, cost + price * v);
                self.current.pop();
            }
        }
    }

    let mut search = Search {
        problem,
        values: &values,
        tightest_upper: &tightest_upper,
        need_before: &need_before,
        tol,
        current: Vec::with_capacity(n),
        best_cost: f64::INFINITY,
        best_x: None,
    };
    search.dfs(0, 0.0, 0.0);

    match search.best_x {
        Some(x) => Ok((search.best_cost, x)),
        None => {
            let at = crate::problem::first_infeasible(problem);
            Err(match at {
                Some(at) => Error::Infeasible {
                    index: at.index,
                    shortfall: at.shortfall,
                },
                None => Error::Infeasible {
                    index: 0,
                    shortfall: step, // feasible region thinner than the grid
                },
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Seeded random instances.
// ---------------------------------------------------------------------------

/// Prices uniform in [-1, 1], excluding a ±1e-3 band around zero, redrawn
/// until pairwise distinct.
pub fn random_distinct_prices<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let prices: Vec<f64> = (0..n)
            .map(|_| loop {
                let p: f64 = rng.gen_range(-1.0..1.0);
                if p.abs() >= 1e-3 {
                    break p;
                }
            })
            .collect();
        let mut sorted = prices.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).all(|w| w[0] != w[1]) {
            return prices;
        }
    }
}

/// Random lossless scenario: demands uniform in [0, 2], capacity in [1, 5],
/// per-interval charge cap in [0.5, 3], prices from
/// [`random_distinct_prices`].
pub fn random_scenario<R: Rng + ?Sized>(rng: &mut R, n: usize) -> StorageScenario {
    let demand: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0)).collect();
    let capacity = rng.gen_range(1.0..5.0);
    let charge_cap = rng.gen_range(0.5..3.0);
    let price = random_distinct_prices(rng, n);
    StorageScenario::new(demand, price, charge_cap, capacity).expect("generated scenario is valid")
}

/// Draws scenarios until one admits a feasible charge vector and returns
/// its problem instance.
pub fn random_feasible_problem<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CoreProblem {
    loop {
        let scenario = random_scenario(rng, n);
        let (problem, _) = build_lossless(&scenario).expect("lossless scenario");
        if instance_has_feasible_point(&problem) {
            return problem;
        }
    }
}
