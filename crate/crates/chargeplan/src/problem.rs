//! Canonical data model for the structured charging problem.
//!
//! A problem instance asks for per-interval charge amounts `x` that
//! minimize `price · x` subject to box constraints `0 <= x_i <= step_cap_i`
//! and two-sided cumulative constraints
//! `cum_lower_i <= x_1 + … + x_i <= cum_upper_i`.
//! Every other module of this crate speaks this type.

use crate::error::{Error, Result};

/// One instance of the structured charging problem.
///
/// Immutable after construction; all sequences share length `n >= 1`,
/// `cum_lower_i <= cum_upper_i` and `step_cap_i >= 0` hold throughout.
#[derive(Debug, Clone, PartialEq)]
pub struct CoreProblem {
    cum_lower: Vec<f64>,
    cum_upper: Vec<f64>,
    step_cap: Vec<f64>,
    price: Vec<f64>,
}

impl CoreProblem {
    pub fn new(
        cum_lower: Vec<f64>,
        cum_upper: Vec<f64>,
        step_cap: Vec<f64>,
        price: Vec<f64>,
    ) -> Result<Self> {
        let n = cum_lower.len();
        if n == 0 {
            return Err(Error::EmptyProblem);
        }
        for (name, seq) in [
            ("cum_upper", &cum_upper),
            ("step_cap", &step_cap),
            ("price", &price),
        ] {
            if seq.len() != n {
                return Err(Error::LengthMismatch {
                    name,
                    expected: n,
                    found: seq.len(),
                });
            }
        }
        for i in 0..n {
            for (name, v) in [
                ("cumulative lower bound", cum_lower[i]),
                ("cumulative upper bound", cum_upper[i]),
                ("step cap", step_cap[i]),
                ("price", price[i]),
            ] {
                if !v.is_finite() {
                    return Err(Error::InvalidValue {
                        index: i,
                        reason: format!("{name} is {v}"),
                    });
                }
            }
            if cum_lower[i] > cum_upper[i] {
                return Err(Error::InvalidValue {
                    index: i,
                    reason: format!(
                        "cumulative lower bound {} exceeds upper bound {}",
                        cum_lower[i], cum_upper[i]
                    ),
                });
            }
            if step_cap[i] < 0.0 {
                return Err(Error::InvalidValue {
                    index: i,
                    reason: format!("step cap {} is negative", step_cap[i]),
                });
            }
        }
        Ok(Self {
            cum_lower,
            cum_upper,
            step_cap,
            price,
        })
    }

    pub fn n(&self) -> usize {
        self.price.len()
    }

    pub fn cum_lower(&self) -> &[f64] {
        &self.cum_lower
    }

    pub fn cum_upper(&self) -> &[f64] {
        &self.cum_upper
    }

    pub fn step_cap(&self) -> &[f64] {
        &self.step_cap
    }

    pub fn price(&self) -> &[f64] {
        &self.price
    }

    /// Feasibility tolerance for this instance: 1e-9 scaled by the largest
    /// cumulative-bound magnitude (floored at 1e-9 for small problems).
    pub fn feasibility_tolerance(&self) -> f64 {
        let scale = self
            .cum_upper
            .iter()
            .fold(1.0f64, |acc, &b| acc.max(b.abs()));
        1e-9 * scale
    }
}

/// A charge vector together with its objective value and the worst
/// constraint violation found when it was verified.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargeSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub feasibility_residual: f64,
}

/// Which constraint family a feasibility violation belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    BoxLower,
    BoxUpper,
    CumulativeLower,
    CumulativeUpper,
}

impl std::fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ConstraintKind::BoxLower => "box lower bound",
            ConstraintKind::BoxUpper => "box upper bound",
            ConstraintKind::CumulativeLower => "cumulative lower bound",
            ConstraintKind::CumulativeUpper => "cumulative upper bound",
        };
        f.write_str(s)
    }
}

/// Outcome of checking a charge vector against all constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub pass: bool,
    /// Largest violation over all constraints, 0 when none is violated.
    pub residual: f64,
    /// Interval (0-based) of the worst violation, when one exists.
    pub worst_index: Option<usize>,
    pub worst_constraint: Option<ConstraintKind>,
}

/// Total price of a charge vector: the inner product `price · x`.
pub fn objective(problem: &CoreProblem, x: &[f64]) -> Result<f64> {
    if x.len() != problem.n() {
        return Err(Error::LengthMismatch {
            name: "x",
            expected: problem.n(),
            found: x.len(),
        });
    }
    Ok(problem.price().iter().zip(x).map(|(c, v)| c * v).sum())
}

/// Checks a charge vector against box and cumulative constraints.
///
/// Passes iff every constraint holds within `tol`; the report carries the
/// worst violation and where it occurred.
pub fn check_feasible(problem: &CoreProblem, x: &[f64], tol: f64) -> Result<FeasibilityReport> {
    if tol < 0.0 || !tol.is_finite() {
        return Err(Error::Domain(format!("tolerance {tol} must be >= 0")));
    }
    if x.len() != problem.n() {
        return Err(Error::LengthMismatch {
            name: "x",
            expected: problem.n(),
            found: x.len(),
        });
    }
    let mut report = FeasibilityReport {
        pass: true,
        residual: 0.0,
        worst_index: None,
        worst_constraint: None,
    };
    let record = |violation: f64, index: usize, kind: ConstraintKind, report: &mut FeasibilityReport| {
        if violation > report.residual {
            report.residual = violation;
            report.worst_index = Some(index);
            report.worst_constraint = Some(kind);
        }
    };
    let mut prefix = 0.0;
    for i in 0..problem.n() {
        record(-x[i], i, ConstraintKind::BoxLower, &mut report);
        record(
            x[i] - problem.step_cap()[i],
            i,
            ConstraintKind::BoxUpper,
            &mut report,
        );
        prefix += x[i];
        record(
            problem.cum_lower()[i] - prefix,
            i,
            ConstraintKind::CumulativeLower,
            &mut report,
        );
        record(
            prefix - problem.cum_upper()[i],
            i,
            ConstraintKind::CumulativeUpper,
            &mut report,
        );
    }
    report.pass = report.residual <= tol;
    if report.pass {
        // No violation beyond tolerance: report a clean residual of the
        // worst (possibly sub-tolerance) violation, clamped at 0.
        report.residual = report.residual.max(0.0);
    }
    Ok(report)
}

/// Where and by how much an instance fails to admit any feasible point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct InfeasibleAt {
    pub index: usize,
    pub shortfall: f64,
}

/// Exact feasibility witness for this constraint structure.
///
/// Charging as early and as much as possible (capped by the step cap and by
/// the tightest remaining cumulative upper bound) maximizes every prefix sum
/// simultaneously, so the instance has a feasible point iff this fill meets
/// every cumulative lower bound.
pub(crate) fn first_infeasible(problem: &CoreProblem) -> Option<InfeasibleAt> {
    let n = problem.n();
    // Tightest cumulative upper bound over the remaining horizon.
    let mut tightest = vec![0.0; n];
    let mut running = f64::INFINITY;
    for i in (0..n).rev() {
        running = running.min(problem.cum_upper()[i]);
        tightest[i] = running;
    }
    if tightest[0] < 0.0 {
        // Prefix sums are nonnegative, so a negative upper bound is
        // unsatisfiable no matter the charges.
        let index = (0..n).find(|&i| problem.cum_upper()[i] < 0.0).unwrap();
        return Some(InfeasibleAt {
            index,
            shortfall: -problem.cum_upper()[index],
        });
    }
    let mut prefix = 0.0;
    for i in 0..n {
        prefix += problem.step_cap()[i].min(tightest[i] - prefix);
        if prefix < problem.cum_lower()[i] {
            return Some(InfeasibleAt {
                index: i,
                shortfall: problem.cum_lower()[i] - prefix,
            });
        }
    }
    None
}

/// True iff the instance admits at least one feasible charge vector.
pub fn instance_has_feasible_point(problem: &CoreProblem) -> bool {
    first_infeasible(problem).is_none()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(a: &[f64], b: &[f64], u: &[f64], c: &[f64]) -> CoreProblem {
        CoreProblem::new(a.to_vec(), b.to_vec(), u.to_vec(), c.to_vec()).unwrap()
    }

    #[test]
    fn objective_zero_vector() {
        let p = problem(&[0.0; 3], &[9.0; 3], &[9.0; 3], &[1.0, 2.0, 3.0]);
        assert_eq!(objective(&p, &[0.0, 0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn objective_single_term() {
        let p = problem(&[0.0], &[9.0], &[9.0], &[2.0]);
        assert_eq!(objective(&p, &[3.0]).unwrap(), 6.0);
    }

    #[test]
    fn objective_mixed_signs() {
        let p = problem(&[0.0; 3], &[9.0; 3], &[9.0; 3], &[0.5, -1.0, 2.0]);
        assert_eq!(objective(&p, &[2.0, 1.0, 1.0]).unwrap(), 2.0);
    }

    #[test]
    fn objective_rejects_length_mismatch() {
        let p = problem(&[0.0], &[1.0], &[1.0], &[1.0]);
        assert!(matches!(
            objective(&p, &[1.0, 2.0]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn construction_rejects_empty_and_bad_bounds() {
        assert!(matches!(
            CoreProblem::new(vec![], vec![], vec![], vec![]),
            Err(Error::EmptyProblem)
        ));
        assert!(matches!(
            CoreProblem::new(vec![2.0], vec![1.0], vec![1.0], vec![1.0]),
            Err(Error::InvalidValue { index: 0, .. })
        ));
        assert!(matches!(
            CoreProblem::new(vec![0.0], vec![1.0], vec![-1.0], vec![1.0]),
            Err(Error::InvalidValue { index: 0, .. })
        ));
        assert!(matches!(
            CoreProblem::new(vec![0.0], vec![f64::NAN], vec![1.0], vec![1.0]),
            Err(Error::InvalidValue { index: 0, .. })
        ));
    }

    #[test]
    fn check_feasible_pass() {
        let p = problem(&[0.0], &[5.0], &[2.0], &[1.0]);
        let r = check_feasible(&p, &[1.0], 0.0).unwrap();
        assert!(r.pass);
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn check_feasible_cumulative_lower_violation() {
        let p = problem(&[2.0], &[5.0], &[2.0], &[1.0]);
        let r = check_feasible(&p, &[1.0], 0.0).unwrap();
        assert!(!r.pass);
        assert_eq!(r.residual, 1.0);
        assert_eq!(r.worst_index, Some(0));
        assert_eq!(r.worst_constraint, Some(ConstraintKind::CumulativeLower));
    }

    #[test]
    fn check_feasible_two_interval_pass() {
        let p = problem(&[0.0, 3.0], &[2.0, 4.0], &[3.0, 3.0], &[1.0, 1.0]);
        assert!(check_feasible(&p, &[2.0, 2.0], 0.0).unwrap().pass);
    }

    #[test]
    fn check_feasible_rejects_negative_tolerance() {
        let p = problem(&[0.0], &[1.0], &[1.0], &[1.0]);
        assert!(matches!(
            check_feasible(&p, &[0.0], -1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn feasible_point_detection() {
        // Max prefix 2 < 3 required.
        let p = problem(&[3.0], &[5.0], &[2.0], &[1.0]);
        assert!(!instance_has_feasible_point(&p));

        // Prefix sums 1, 2 meet the bounds.
        let p = problem(&[0.0, 2.0], &[5.0, 5.0], &[1.0, 1.0], &[1.0, 1.0]);
        assert!(instance_has_feasible_point(&p));

        // Zero is feasible.
        let p = problem(&[0.0], &[0.0], &[5.0], &[1.0]);
        assert!(instance_has_feasible_point(&p));
    }

    #[test]
    fn infeasible_when_upper_bound_negative() {
        let p = problem(&[-5.0, -5.0], &[-1.0, 4.0], &[2.0, 2.0], &[1.0, 1.0]);
        let at = first_infeasible(&p).unwrap();
        assert_eq!(at.index, 0);
        assert_eq!(at.shortfall, 1.0);
    }

    #[test]
    fn infeasible_reports_first_violated_lower_bound() {
        // Caps allow 1 per interval; demand of 3 by interval 1 cannot be met.
        let p = problem(&[1.0, 3.0], &[9.0, 9.0], &[1.0, 1.0], &[1.0, 1.0]);
        let at = first_infeasible(&p).unwrap();
        assert_eq!(at.index, 1);
        assert_eq!(at.shortfall, 1.0);
    }

    #[test]
    fn early_fill_respects_future_upper_bounds() {
        // Filling interval 0 to its cap would overshoot the tighter bound at
        // interval 1; the witness must hold back and still satisfy a_1.
        let p = problem(&[0.0, 1.0], &[10.0, 1.5], &[5.0, 0.5], &[1.0, 1.0]);
        assert!(instance_has_feasible_point(&p));
    }
}
