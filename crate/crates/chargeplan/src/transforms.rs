//! Builders that turn physical storage scenarios into [`CoreProblem`]
//! instances, and the inverse mapping of solutions back to physical charges.
//!
//! Lossless and constant-loss scenarios map directly onto cumulative-demand
//! bounds. Retention losses (a fraction `q` of the stored energy survives
//! each interval) need a change of variables: with `y_j = q^(n-j) · x_j`
//! every decayed-sum constraint becomes a plain cumulative constraint, and
//! all substitution factors stay in `(0, 1]`, so year-scale horizons do not
//! overflow. The objective is preserved because prices are divided by the
//! same factors.

use crate::error::{Error, Result};
use crate::problem::CoreProblem;

/// Smallest substitution factor accepted before a horizon must be split.
const MIN_SCALE: f64 = 1e-280;

/// Physical description of a buffer-storage charging task.
#[derive(Debug, Clone, PartialEq)]
pub struct StorageScenario {
    demand: Vec<f64>,
    price: Vec<f64>,
    charge_cap: f64,
    capacity: f64,
    retention: f64,
    standby_loss: Option<Vec<f64>>,
}

impl StorageScenario {
    /// A lossless scenario: full retention, no standby losses.
    ///
    /// `demand` in kWh per interval, `price` in EUR/kWh, `charge_cap` the
    /// maximum charge energy per interval (kWh), `capacity` the storage
    /// size (kWh).
    pub fn new(
        demand: Vec<f64>,
        price: Vec<f64>,
        charge_cap: f64,
        capacity: f64,
    ) -> Result<Self> {
        let n = demand.len();
        if n == 0 {
            return Err(Error::EmptyProblem);
        }
        if price.len() != n {
            return Err(Error::LengthMismatch {
                name: "price",
                expected: n,
                found: price.len(),
            });
        }
        if !(charge_cap > 0.0) || !charge_cap.is_finite() {
            return Err(Error::Domain(format!(
                "charge cap {charge_cap} must be positive"
            )));
        }
        if !(capacity >= 0.0) || !capacity.is_finite() {
            return Err(Error::Domain(format!(
                "capacity {capacity} must be nonnegative"
            )));
        }
        for (i, &d) in demand.iter().enumerate() {
            if !d.is_finite() || d < 0.0 {
                return Err(Error::InvalidValue {
                    index: i,
                    reason: format!("demand {d} must be nonnegative"),
                });
            }
        }
        for (i, &p) in price.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::InvalidValue {
                    index: i,
                    reason: format!("price is {p}"),
                });
            }
        }
        Ok(Self {
            demand,
            price,
            charge_cap,
            capacity,
            retention: 1.0,
            standby_loss: None,
        })
    }

    /// Sets the hourly retention factor `q` (fraction of stored energy that
    /// survives one interval); `q = 1` means lossless.
    pub fn with_retention(mut self, retention: f64) -> Result<Self> {
        if !(retention > 0.0 && retention <= 1.0) {
            return Err(Error::Domain(format!(
                "retention {retention} must lie in (0, 1]"
            )));
        }
        self.retention = retention;
        Ok(self)
    }

    /// Sets constant standby losses per interval (kWh).
    pub fn with_standby_loss(mut self, standby_loss: Vec<f64>) -> Result<Self> {
        if standby_loss.len() != self.demand.len() {
            return Err(Error::LengthMismatch {
                name: "standby_loss",
                expected: self.demand.len(),
                found: standby_loss.len(),
            });
        }
        for (i, &l) in standby_loss.iter().enumerate() {
            if !l.is_finite() || l < 0.0 {
                return Err(Error::InvalidValue {
                    index: i,
                    reason: format!("standby loss {l} must be nonnegative"),
                });
            }
        }
        self.standby_loss = Some(standby_loss);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.demand.len()
    }

    pub fn demand(&self) -> &[f64] {
        &self.demand
    }

    pub fn price(&self) -> &[f64] {
        &self.price
    }

    pub fn charge_cap(&self) -> f64 {
        self.charge_cap
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn retention(&self) -> f64 {
        self.retention
    }

    pub fn standby_loss(&self) -> Option<&[f64]> {
        self.standby_loss.as_deref()
    }

    /// Demand plus standby losses, the series the bounds are built from.
    fn effective_demand(&self) -> Vec<f64> {
        match &self.standby_loss {
            Some(losses) => self
                .demand
                .iter()
                .zip(losses)
                .map(|(d, l)| d + l)
                .collect(),
            None => self.demand.clone(),
        }
    }
}

/// Which transformation produced a [`CoreProblem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformKind {
    Lossless,
    ConstantLoss,
    Decay,
    /// Constant standby losses folded into demand, then the decay transform.
    Combined,
}

impl std::fmt::Display for TransformKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            TransformKind::Lossless => "lossless",
            TransformKind::ConstantLoss => "constant_loss",
            TransformKind::Decay => "decay",
            TransformKind::Combined => "combined",
        };
        f.write_str(s)
    }
}

/// Per-index substitution factors of a build, needed to invert solutions.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformRecord {
    pub kind: TransformKind,
    /// `x_j = y_j / scale_j`; all ones for non-decay kinds.
    pub scale: Vec<f64>,
}

/// Builds the problem for a scenario, dispatching on its loss description.
pub fn build(scenario: &StorageScenario) -> Result<(CoreProblem, TransformRecord)> {
    match (scenario.standby_loss.is_some(), scenario.retention < 1.0) {
        (false, false) => build_lossless(scenario),
        (true, false) => build_constant_loss(scenario),
        (false, true) => build_decay_loss(scenario),
        (true, true) => build_combined(scenario),
    }
}

/// Lossless problem: bounds are running demand sums, shifted by the
/// capacity on the upper side.
pub fn build_lossless(scenario: &StorageScenario) -> Result<(CoreProblem, TransformRecord)> {
    if scenario.retention != 1.0 {
        return Err(Error::WrongBuilder(
            "lossless builder requires retention = 1".into(),
        ));
    }
    if scenario.standby_loss.is_some() {
        return Err(Error::WrongBuilder(
            "lossless builder cannot take standby losses".into(),
        ));
    }
    let problem = bounds_from_demand(scenario, &scenario.demand)?;
    let record = TransformRecord {
        kind: TransformKind::Lossless,
        scale: vec![1.0; scenario.n()],
    };
    Ok((problem, record))
}

/// Constant standby losses are added to the demand of each interval.
pub fn build_constant_loss(scenario: &StorageScenario) -> Result<(CoreProblem, TransformRecord)> {
    if scenario.standby_loss.is_none() {
        return Err(Error::WrongBuilder(
            "constant-loss builder requires standby losses".into(),
        ));
    }
    if scenario.retention != 1.0 {
        return Err(Error::WrongBuilder(
            "constant-loss builder requires retention = 1; use the combined builder".into(),
        ));
    }
    let effective = scenario.effective_demand();
    let problem = bounds_from_demand(scenario, &effective)?;
    let record = TransformRecord {
        kind: TransformKind::ConstantLoss,
        scale: vec![1.0; scenario.n()],
    };
    Ok((problem, record))
}

/// Retention losses via the anchored change of variables.
pub fn build_decay_loss(scenario: &StorageScenario) -> Result<(CoreProblem, TransformRecord)> {
    if scenario.standby_loss.is_some() {
        return Err(Error::WrongBuilder(
            "decay builder cannot take standby losses; use the combined builder".into(),
        ));
    }
    decay_transform(scenario, &scenario.demand, TransformKind::Decay)
}

/// Both loss types at once: standby losses are folded into the demand
/// first, then the decay transform is applied.
pub fn build_combined(scenario: &StorageScenario) -> Result<(CoreProblem, TransformRecord)> {
    if scenario.standby_loss.is_none() || scenario.retention >= 1.0 {
        return Err(Error::WrongBuilder(
            "combined builder requires standby losses and retention < 1".into(),
        ));
    }
    let effective = scenario.effective_demand();
    decay_transform(scenario, &effective, TransformKind::Combined)
}

fn bounds_from_demand(scenario: &StorageScenario, demand: &[f64]) -> Result<CoreProblem> {
    let n = demand.len();
    let mut cum_lower = Vec::with_capacity(n);
    let mut cum_upper = Vec::with_capacity(n);
    let mut acc = 0.0;
    for &d in demand {
        acc += d;
        cum_lower.push(acc);
        cum_upper.push(scenario.capacity + acc);
    }
    CoreProblem::new(
        cum_lower,
        cum_upper,
        vec![scenario.charge_cap; n],
        scenario.price.clone(),
    )
}

fn decay_transform(
    scenario: &StorageScenario,
    demand: &[f64],
    kind: TransformKind,
) -> Result<(CoreProblem, TransformRecord)> {
    let n = demand.len();
    let q = scenario.retention;
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::Domain(format!("retention {q} must lie in (0, 1]")));
    }
    if q < 1.0 && q.powi(n as i32 - 1) < MIN_SCALE {
        return Err(Error::NumericalRange(format!(
            "retention {q} over {n} intervals underflows the substitution; \
             split the horizon into chained sub-problems"
        )));
    }

    // scale_j = q^(n-j), 1-based j; decayed running demand via
    // D_i = q·D_{i-1} + d_i. At q = 1 every factor is exactly 1 and the
    // result is identical to the lossless build.
    let scale: Vec<f64> = (0..n).map(|j| q.powi((n - 1 - j) as i32)).collect();
    let mut cum_lower = Vec::with_capacity(n);
    let mut cum_upper = Vec::with_capacity(n);
    let mut decayed = 0.0;
    for i in 0..n {
        decayed = q * decayed + demand[i];
        cum_lower.push(scale[i] * decayed);
        cum_upper.push(scale[i] * (scenario.capacity + decayed));
    }
    let step_cap: Vec<f64> = scale.iter().map(|s| s * scenario.charge_cap).collect();
    let price: Vec<f64> = scenario
        .price
        .iter()
        .zip(&scale)
        .map(|(c, s)| c / s)
        .collect();

    let problem = CoreProblem::new(cum_lower, cum_upper, step_cap, price)?;
    Ok((problem, TransformRecord { kind, scale }))
}

/// Maps a solution of the transformed problem back to physical charges:
/// `x_j = y_j / scale_j`. The objective is preserved by construction.
pub fn recover_charges(y: &[f64], record: &TransformRecord) -> Result<Vec<f64>> {
    if y.len() != record.scale.len() {
        return Err(Error::LengthMismatch {
            name: "y",
            expected: record.scale.len(),
            found: y.len(),
        });
    }
    Ok(y.iter().zip(&record.scale).map(|(v, s)| v / s).collect())
}

/// Storage level per interval for a physical charge vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Level after each interval; starts from an empty store.
    pub levels: Vec<f64>,
    /// Intervals whose level leaves `[0, capacity]` beyond the tolerance.
    pub violations: Vec<usize>,
    pub tolerance: f64,
}

impl Trajectory {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn end_level(&self) -> f64 {
        *self.levels.last().expect("nonempty trajectory")
    }
}

/// Runs the level recurrence `level_i = q·level_{i-1} + x_i - d_i - l_i`
/// and flags intervals where the level leaves `[0, capacity]`.
///
/// An infeasible charge vector is not an error here; the violations are
/// reported on the returned trajectory.
pub fn storage_trajectory(scenario: &StorageScenario, x: &[f64]) -> Result<Trajectory> {
    if x.len() != scenario.n() {
        return Err(Error::LengthMismatch {
            name: "x",
            expected: scenario.n(),
            found: x.len(),
        });
    }
    let q = scenario.retention;
    let mut levels = Vec::with_capacity(scenario.n());
    let mut level = 0.0;
    for i in 0..scenario.n() {
        level = q * level + x[i] - scenario.demand[i];
        if let Some(losses) = &scenario.standby_loss {
            level -= losses[i];
        }
        levels.push(level);
    }
    let span = levels
        .iter()
        .fold(scenario.capacity.max(1.0), |m, &v| m.max(v.abs()));
    let tolerance = 1e-9 * span;
    let violations = levels
        .iter()
        .enumerate()
        .filter(|(_, &v)| v < -tolerance || v > scenario.capacity + tolerance)
        .map(|(i, _)| i)
        .collect();
    Ok(Trajectory {
        levels,
        violations,
        tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{solve, ZeroPricePolicy};

    fn scenario(d: &[f64], c: &[f64], cap: f64, s: f64) -> StorageScenario {
        StorageScenario::new(d.to_vec(), c.to_vec(), cap, s).unwrap()
    }

    #[test]
    fn lossless_bounds() {
        let sc = scenario(&[1.0, 2.0], &[0.1, 0.2], 5.0, 3.0);
        let (p, rec) = build_lossless(&sc).unwrap();
        assert_eq!(p.cum_lower(), &[1.0, 3.0]);
        assert_eq!(p.cum_upper(), &[4.0, 6.0]);
        assert_eq!(p.step_cap(), &[5.0, 5.0]);
        assert_eq!(rec.scale, vec![1.0, 1.0]);
        assert_eq!(rec.kind, TransformKind::Lossless);
    }

    #[test]
    fn lossless_zero_demand() {
        let sc = scenario(&[0.0, 0.0, 0.0], &[0.1, 0.2, 0.3], 1.0, 2.0);
        let (p, _) = build_lossless(&sc).unwrap();
        assert_eq!(p.cum_lower(), &[0.0, 0.0, 0.0]);
        assert_eq!(p.cum_upper(), &[2.0, 2.0, 2.0]);
    }

    #[test]
    fn lossless_zero_capacity_forces_exact_charging() {
        let sc = scenario(&[3.0], &[1.0], 3.0, 0.0);
        let (p, _) = build_lossless(&sc).unwrap();
        assert_eq!(p.cum_lower(), &[3.0]);
        assert_eq!(p.cum_upper(), &[3.0]);
        let s = solve(&p, ZeroPricePolicy::default()).unwrap();
        assert_eq!(s.x, vec![3.0]);
    }

    #[test]
    fn lossless_rejects_lossy_scenario() {
        let sc = scenario(&[1.0], &[1.0], 1.0, 1.0)
            .with_retention(0.9)
            .unwrap();
        assert!(matches!(build_lossless(&sc), Err(Error::WrongBuilder(_))));
        let sc = scenario(&[1.0], &[1.0], 1.0, 1.0)
            .with_standby_loss(vec![0.1])
            .unwrap();
        assert!(matches!(build_lossless(&sc), Err(Error::WrongBuilder(_))));
    }

    #[test]
    fn constant_loss_adds_to_demand() {
        let sc = scenario(&[1.0, 1.0], &[0.1, 0.2], 5.0, 2.0)
            .with_standby_loss(vec![0.5, 0.5])
            .unwrap();
        let (p, rec) = build_constant_loss(&sc).unwrap();
        assert_eq!(p.cum_lower(), &[1.5, 3.0]);
        assert_eq!(p.cum_upper(), &[3.5, 5.0]);
        assert_eq!(rec.kind, TransformKind::ConstantLoss);
    }

    #[test]
    fn constant_loss_with_zero_losses_matches_lossless() {
        let sc = scenario(&[1.0, 2.0], &[0.1, 0.2], 5.0, 3.0);
        let lossy = sc.clone().with_standby_loss(vec![0.0, 0.0]).unwrap();
        let (p_lossless, _) = build_lossless(&sc).unwrap();
        let (p_const, _) = build_constant_loss(&lossy).unwrap();
        assert_eq!(p_lossless, p_const);
    }

    #[test]
    fn constant_loss_forces_charging_at_zero_demand() {
        let sc = scenario(&[0.0], &[1.0], 2.0, 1.0)
            .with_standby_loss(vec![1.0])
            .unwrap();
        let (p, _) = build_constant_loss(&sc).unwrap();
        assert_eq!(p.cum_lower(), &[1.0]);
        assert_eq!(p.cum_upper(), &[2.0]);
    }

    #[test]
    fn constant_loss_requires_losses() {
        let sc = scenario(&[1.0], &[1.0], 1.0, 1.0);
        assert!(matches!(
            build_constant_loss(&sc),
            Err(Error::WrongBuilder(_))
        ));
    }

    #[test]
    fn decay_hand_applied_two_intervals() {
        let sc = scenario(&[1.0, 1.0], &[0.3, 0.7], 2.0, 4.0)
            .with_retention(0.5)
            .unwrap();
        let (p, rec) = build_decay_loss(&sc).unwrap();
        // Decayed demand D = [1, 1.5]; factors q^(n-j) = [0.5, 1].
        assert_eq!(p.cum_lower(), &[0.5, 1.5]);
        assert_eq!(p.cum_upper(), &[2.5, 5.5]);
        assert_eq!(p.step_cap(), &[1.0, 2.0]);
        assert_eq!(p.price(), &[0.6, 0.7]);
        assert_eq!(rec.scale, vec![0.5, 1.0]);
    }

    #[test]
    fn decay_at_full_retention_is_identical_to_lossless() {
        let sc = scenario(&[0.3, 1.7, 0.9], &[0.1, -0.2, 0.3], 2.0, 3.0);
        let lossy = sc.clone().with_retention(1.0).unwrap();
        let (p_lossless, _) = build_lossless(&sc).unwrap();
        let (p_decay, rec) = build_decay_loss(&lossy).unwrap();
        assert_eq!(p_lossless, p_decay);
        assert_eq!(rec.scale, vec![1.0; 3]);
    }

    #[test]
    fn decay_underflow_is_rejected() {
        let n = 200;
        let sc = scenario(&vec![0.1; n], &vec![0.1; n], 1.0, 1.0)
            .with_retention(0.01)
            .unwrap();
        assert!(matches!(
            build_decay_loss(&sc),
            Err(Error::NumericalRange(_))
        ));
    }

    #[test]
    fn recover_identity_and_division() {
        let rec = TransformRecord {
            kind: TransformKind::Lossless,
            scale: vec![1.0, 1.0],
        };
        assert_eq!(recover_charges(&[0.3, 0.4], &rec).unwrap(), vec![0.3, 0.4]);
        let rec = TransformRecord {
            kind: TransformKind::Decay,
            scale: vec![0.5],
        };
        assert_eq!(recover_charges(&[0.5], &rec).unwrap(), vec![1.0]);
    }

    #[test]
    fn recovered_objective_matches_transformed_objective() {
        let sc = scenario(
            &[0.4, 1.1, 0.0, 0.8],
            &[0.04, -0.02, 0.05, 0.01],
            1.5,
            2.0,
        )
        .with_retention(0.93)
        .unwrap();
        let (p, rec) = build_decay_loss(&sc).unwrap();
        let sol = solve(&p, ZeroPricePolicy::default()).unwrap();
        let x = recover_charges(&sol.x, &rec).unwrap();
        let physical: f64 = sc.price().iter().zip(&x).map(|(c, v)| c * v).sum();
        let scale: f64 = sc.price().iter().zip(&x).map(|(c, v)| (c * v).abs()).sum();
        assert!((physical - sol.objective).abs() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn trajectory_prefix_sums_when_lossless() {
        let sc = scenario(&[1.0, 1.0], &[0.1, 0.1], 5.0, 2.0);
        let t = storage_trajectory(&sc, &[2.0, 0.0]).unwrap();
        assert_eq!(t.levels, vec![1.0, 0.0]);
        assert!(t.is_feasible());
    }

    #[test]
    fn trajectory_decay_recurrence() {
        let sc = scenario(&[0.0, 0.0], &[0.1, 0.1], 5.0, 4.0)
            .with_retention(0.5)
            .unwrap();
        let t = storage_trajectory(&sc, &[2.0, 0.0]).unwrap();
        assert_eq!(t.levels, vec![2.0, 1.0]);
    }

    #[test]
    fn trajectory_flags_violations() {
        let sc = scenario(&[1.0, 1.0], &[0.1, 0.1], 5.0, 2.0);
        let t = storage_trajectory(&sc, &[0.0, 0.0]).unwrap();
        assert_eq!(t.violations, vec![0, 1]);
        assert_eq!(t.end_level(), -2.0);
    }

    #[test]
    fn solver_output_stays_within_capacity() {
        let sc = scenario(
            &[0.5, 1.5, 0.2, 0.9, 0.0, 1.2],
            &[0.05, -0.01, 0.03, 0.08, -0.02, 0.04],
            2.0,
            3.0,
        )
        .with_retention(0.97)
        .unwrap();
        let (p, rec) = build(&sc).unwrap();
        let sol = solve(&p, ZeroPricePolicy::default()).unwrap();
        let x = recover_charges(&sol.x, &rec).unwrap();
        let t = storage_trajectory(&sc, &x).unwrap();
        assert!(t.is_feasible(), "violations at {:?}", t.violations);
    }

    #[test]
    fn combined_build_applies_both_loss_types() {
        let sc = scenario(&[1.0, 1.0], &[0.3, 0.7], 2.0, 4.0)
            .with_retention(0.5)
            .unwrap()
            .with_standby_loss(vec![0.2, 0.2])
            .unwrap();
        let (p, rec) = build(&sc).unwrap();
        assert_eq!(rec.kind, TransformKind::Combined);
        // Effective demand [1.2, 1.2]; D = [1.2, 1.8], scaled by [0.5, 1].
        assert!((p.cum_lower()[0] - 0.6).abs() < 1e-12);
        assert!((p.cum_lower()[1] - 1.8).abs() < 1e-12);
    }
}
