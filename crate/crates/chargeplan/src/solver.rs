//! Price-ordered direct solver for the structured charging problem.
//!
//! Charge values are fixed one price rank at a time, cheapest interval
//! first. For the interval `s` under consideration, with the working
//! cumulative bounds `a`, `b` (mutated as values are fixed):
//!
//! * `M1 = max{0, a_i : i < s}` — what earlier intervals must already cover,
//! * `M2 = max{0, a_i : i >= s}` — what must be covered from `s` onwards,
//! * `m  = min{b_i : i >= s}` — the tightest remaining headroom.
//!
//! A nonnegatively priced interval buys only what is still required,
//! `min{max{0, M2 - M1}, min{cap_s, m - M1}}`; a negatively priced interval
//! fills all available headroom, `min{cap_s, m - M1}`. The fixed value is
//! then subtracted from every `a_i`, `b_i` with `i >= s`.
//!
//! The main loop performs at most `n² + 3n` floating-point operations and
//! `3/2·n² + 5/2·n` comparisons; [`solve_counted`] reports the exact counts.

use crate::error::{Error, Result};
use crate::problem::{self, ChargeSolution, CoreProblem};

/// Interval indices (0-based) sorted by ascending price, ties broken by
/// original position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriceOrder {
    sigma: Vec<usize>,
}

impl PriceOrder {
    /// Stable sort of interval indices by price value.
    pub fn new(price: &[f64]) -> Self {
        let mut sigma: Vec<usize> = (0..price.len()).collect();
        sigma.sort_by(|&i, &j| price[i].total_cmp(&price[j]));
        Self { sigma }
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.sigma
    }
}

/// See [`PriceOrder::new`].
pub fn price_order(price: &[f64]) -> PriceOrder {
    PriceOrder::new(price)
}

/// How a price of exactly zero is treated by the sign test.
///
/// Both choices produce a minimizer; objectives agree. `TreatAsPositive`
/// buys only what is required at zero price, `TreatAsNegative` fills the
/// storage as far as the bounds allow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZeroPricePolicy {
    #[default]
    TreatAsPositive,
    TreatAsNegative,
}

impl ZeroPricePolicy {
    #[inline]
    fn buys_only_required(self, price: f64) -> bool {
        match self {
            ZeroPricePolicy::TreatAsPositive => price >= 0.0,
            ZeroPricePolicy::TreatAsNegative => price > 0.0,
        }
    }
}

/// Operation counts of one solver run.
///
/// Counts cover the main loop only: the price sort (the ordering is an
/// input of the algorithm) and the final verification pass are excluded,
/// as is the branch on the price sign. Scan comparisons are accounted
/// analytically per rank, so the counters are exact for the loop as
/// specified, not artifacts of fold seeding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OpCounts {
    /// Additions, subtractions and multiplications performed.
    pub flops: u64,
    /// Comparisons performed (bound scans and value clamping).
    pub comparisons: u64,
}

impl OpCounts {
    /// Worst-case flop count of the main loop: `n² + 3n`.
    pub fn flop_bound(n: usize) -> u64 {
        let n = n as u64;
        n * n + 3 * n
    }

    /// Worst-case comparison count of the main loop: `3/2·n² + 5/2·n`.
    /// `3n² + 5n` is always even, so the bound is exact in integers.
    pub fn comparison_bound(n: usize) -> u64 {
        let n = n as u64;
        (3 * n * n + 5 * n) / 2
    }

    pub fn within_bounds(&self, n: usize) -> bool {
        self.flops <= Self::flop_bound(n) && self.comparisons <= Self::comparison_bound(n)
    }
}

/// Solves the problem to optimality.
///
/// The instance is rejected up front when no feasible point exists; the
/// main loop presumes feasibility.
pub fn solve(problem: &CoreProblem, zero: ZeroPricePolicy) -> Result<ChargeSolution> {
    run(problem, zero).map(|(solution, _)| solution)
}

/// [`solve`] with instrumentation; the charge vector is identical.
pub fn solve_counted(
    problem: &CoreProblem,
    zero: ZeroPricePolicy,
) -> Result<(ChargeSolution, OpCounts)> {
    run(problem, zero)
}

fn run(problem: &CoreProblem, zero: ZeroPricePolicy) -> Result<(ChargeSolution, OpCounts)> {
    if let Some(at) = problem::first_infeasible(problem) {
        return Err(Error::Infeasible {
            index: at.index,
            shortfall: at.shortfall,
        });
    }

    let n = problem.n();
    let price = problem.price();
    let cap = problem.step_cap();
    let order = PriceOrder::new(price);

    // Working copies; the inputs are never mutated.
    let mut lower = problem.cum_lower().to_vec();
    let mut upper = problem.cum_upper().to_vec();

    let mut x = vec![0.0; n];
    let mut ops = OpCounts::default();

    for &s in order.as_slice() {
        let covered_before = lower[..s].iter().fold(0.0f64, |m, &v| m.max(v));
        let required_total = lower[s..].iter().fold(0.0f64, |m, &v| m.max(v));
        let (first, rest) = upper[s..].split_first().expect("s < n");
        let tightest_upper = rest.iter().fold(*first, |m, &v| m.min(v));
        // Scans: s  (+ n-s) + (n-s-1) comparisons.
        ops.comparisons += (2 * n - s - 1) as u64;

        let value = if zero.buys_only_required(price[s]) {
            ops.flops += 2;
            ops.comparisons += 3;
            let still_needed = (required_total - covered_before).max(0.0);
            still_needed.min(cap[s].min(tightest_upper - covered_before))
        } else {
            ops.flops += 1;
            ops.comparisons += 1;
            cap[s].min(tightest_upper - covered_before)
        };
        x[s] = value;

        for v in &mut lower[s..] {
            *v -= value;
        }
        for v in &mut upper[s..] {
            *v -= value;
        }
        ops.flops += 2 * (n - s) as u64;
    }

    debug_assert!(ops.within_bounds(n));

    let objective = problem::objective(problem, &x)?;
    let report = problem::check_feasible(problem, &x, problem.feasibility_tolerance())?;
    Ok((
        ChargeSolution {
            x,
            objective,
            feasibility_residual: report.residual,
        },
        ops,
    ))
}
