//! System-sizing sensitivity analysis over converter power and storage
//! capacity.
//!
//! Each grid cell solves the full charging problem for one `(power,
//! capacity)` combination and adds annualized hardware costs; the result is
//! a cost surface with its minimum and the surrounding level sets. Cells
//! are independent, so the sweep runs in parallel; assembly is by index and
//! therefore deterministic.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::loss::DecayModel;
use crate::solver::{solve, ZeroPricePolicy};
use crate::transforms::{build, storage_trajectory, StorageScenario};

/// Annualized converter cost offset that is reported but never enters the
/// optimization: a constant shifts every cell equally.
pub const CONVERTER_COST_OFFSET_EUR: f64 = 130.0;

/// Linear annualized hardware cost model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    pub converter_eur_per_kw: f64,
    pub storage_eur_per_kwh: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        Self {
            converter_eur_per_kw: 0.47,
            storage_eur_per_kwh: 0.95,
        }
    }
}

impl CostModel {
    pub fn new(converter_eur_per_kw: f64, storage_eur_per_kwh: f64) -> Result<Self> {
        if converter_eur_per_kw < 0.0 || storage_eur_per_kwh < 0.0 {
            return Err(Error::Domain(
                "cost slopes must be nonnegative".into(),
            ));
        }
        Ok(Self {
            converter_eur_per_kw,
            storage_eur_per_kwh,
        })
    }
}

/// Whether grid cells use lossless storage or capacity-dependent retention.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossMode {
    Lossless,
    /// Per-cell hourly retention from a fitted [`DecayModel`]; the
    /// zero-capacity cell stays lossless since retention is undefined there.
    CapacityDependent,
}

/// The `(power, capacity)` combinations to evaluate.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    charge_caps_kw: Vec<f64>,
    capacities_kwh: Vec<f64>,
    losses: LossMode,
    /// Level-set fractions above the minimum, e.g. 0.05 for the 5 % set.
    levels: Vec<f64>,
}

impl GridSpec {
    pub fn new(
        charge_caps_kw: Vec<f64>,
        capacities_kwh: Vec<f64>,
        losses: LossMode,
    ) -> Result<Self> {
        if charge_caps_kw.is_empty() || capacities_kwh.is_empty() {
            return Err(Error::Domain("grid axes must be nonempty".into()));
        }
        if !charge_caps_kw.windows(2).all(|w| w[0] < w[1])
            || charge_caps_kw.iter().any(|&c| !(c > 0.0))
        {
            return Err(Error::Domain(
                "charge powers must be positive and strictly ascending".into(),
            ));
        }
        if !capacities_kwh.windows(2).all(|w| w[0] < w[1])
            || capacities_kwh.iter().any(|&s| !(s >= 0.0))
        {
            return Err(Error::Domain(
                "capacities must be nonnegative and strictly ascending".into(),
            ));
        }
        Ok(Self {
            charge_caps_kw,
            capacities_kwh,
            losses,
            levels: vec![0.05, 0.10],
        })
    }

    /// Evenly stepped axes, the usual way a sweep is specified.
    pub fn from_ranges(
        c_min: f64,
        c_max: f64,
        c_step: f64,
        s_min: f64,
        s_max: f64,
        s_step: f64,
        losses: LossMode,
    ) -> Result<Self> {
        if !(c_step > 0.0) || !(s_step > 0.0) {
            return Err(Error::Domain("grid steps must be positive".into()));
        }
        let axis = |min: f64, max: f64, step: f64| -> Vec<f64> {
            let mut out = Vec::new();
            let mut k = 0u32;
            loop {
                let v = min + step * k as f64;
                if v > max + 1e-12 * step {
                    break;
                }
                out.push(v);
                k += 1;
            }
            out
        };
        Self::new(axis(c_min, c_max, c_step), axis(s_min, s_max, s_step), losses)
    }

    pub fn with_levels(mut self, levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() || !levels.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Domain(
                "level fractions must be ascending and nonempty".into(),
            ));
        }
        if levels.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::Domain("level fractions must be nonnegative".into()));
        }
        self.levels = levels;
        Ok(self)
    }

    pub fn charge_caps_kw(&self) -> &[f64] {
        &self.charge_caps_kw
    }

    pub fn capacities_kwh(&self) -> &[f64] {
        &self.capacities_kwh
    }

    pub fn losses(&self) -> LossMode {
        self.losses
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }
}

/// Minimizing cell of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArgMin {
    pub c_index: usize,
    pub s_index: usize,
    pub charge_cap_kw: f64,
    pub capacity_kwh: f64,
    pub total_cost: f64,
}

/// Cells whose cost stays within a fraction of the minimum.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSet {
    pub fraction: f64,
    pub threshold: f64,
    /// `(c_index, s_index)` pairs, row-major.
    pub cells: Vec<(usize, usize)>,
}

/// Full cost surface of a sweep. Infeasible cells are `NaN`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchResult {
    pub charge_caps_kw: Vec<f64>,
    pub capacities_kwh: Vec<f64>,
    /// `surface[ci][si]` is the total cost of the cell, `NaN` if infeasible.
    pub surface: Vec<Vec<f64>>,
    pub argmin: ArgMin,
    pub level_sets: Vec<LevelSet>,
}

impl GridSearchResult {
    pub fn cost(&self, c_index: usize, s_index: usize) -> f64 {
        self.surface[c_index][s_index]
    }
}

/// Total annualized cost of one configuration: hardware slopes plus the
/// optimal electricity acquisition cost over the horizon.
///
/// Intervals are hours, so the charge energy cap in kWh doubles as the
/// converter power in kW.
pub fn total_cost(scenario: &StorageScenario, cost_model: &CostModel) -> Result<f64> {
    let (problem, _) = build(scenario)?;
    let acquisition = solve(&problem, ZeroPricePolicy::default())?.objective;
    Ok(cost_model.converter_eur_per_kw * scenario.charge_cap()
        + cost_model.storage_eur_per_kwh * scenario.capacity()
        + acquisition)
}

fn cell_scenario(
    demand: &[f64],
    price: &[f64],
    charge_cap: f64,
    capacity: f64,
    losses: LossMode,
    model: Option<&DecayModel>,
) -> Result<StorageScenario> {
    let scenario = StorageScenario::new(demand.to_vec(), price.to_vec(), charge_cap, capacity)?;
    match losses {
        LossMode::Lossless => Ok(scenario),
        LossMode::CapacityDependent => {
            if capacity == 0.0 {
                // No store, nothing to lose.
                return Ok(scenario);
            }
            let model = model.ok_or_else(|| {
                Error::Domain("capacity-dependent losses need a fitted decay model".into())
            })?;
            scenario.with_retention(model.hourly_retention(capacity)?)
        }
    }
}

/// Evaluates [`total_cost`] on every grid cell.
///
/// Cells whose configuration cannot cover the demand (or whose retention is
/// undefined) are marked `NaN` instead of failing the sweep; the sweep only
/// errors when every cell is infeasible or an input is structurally broken.
pub fn grid_search(
    demand: &[f64],
    price: &[f64],
    spec: &GridSpec,
    cost_model: &CostModel,
    model: Option<&DecayModel>,
) -> Result<GridSearchResult> {
    if spec.losses == LossMode::CapacityDependent && model.is_none() {
        return Err(Error::Domain(
            "capacity-dependent losses need a fitted decay model".into(),
        ));
    }

    let cells: Vec<(usize, usize)> = (0..spec.charge_caps_kw.len())
        .flat_map(|ci| (0..spec.capacities_kwh.len()).map(move |si| (ci, si)))
        .collect();

    let costs: Vec<f64> = cells
        .par_iter()
        .map(|&(ci, si)| -> Result<f64> {
            let scenario = cell_scenario(
                demand,
                price,
                spec.charge_caps_kw[ci],
                spec.capacities_kwh[si],
                spec.losses,
                model,
            );
            match scenario.and_then(|sc| total_cost(&sc, cost_model)) {
                Ok(cost) => Ok(cost),
                Err(Error::Infeasible { .. })
                | Err(Error::Domain(_))
                | Err(Error::NumericalRange(_)) => Ok(f64::NAN),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<f64>>>()?;

    let ns = spec.capacities_kwh.len();
    let surface: Vec<Vec<f64>> = costs.chunks(ns).map(|row| row.to_vec()).collect();

    let mut argmin: Option<ArgMin> = None;
    for (ci, row) in surface.iter().enumerate() {
        for (si, &cost) in row.iter().enumerate() {
            if cost.is_nan() {
                continue;
            }
            if argmin.map_or(true, |m| cost < m.total_cost) {
                argmin = Some(ArgMin {
                    c_index: ci,
                    s_index: si,
                    charge_cap_kw: spec.charge_caps_kw[ci],
                    capacity_kwh: spec.capacities_kwh[si],
                    total_cost: cost,
                });
            }
        }
    }
    let argmin = argmin.ok_or(Error::EmptyGrid)?;

    // Threshold grows away from the minimum by a fraction of its magnitude,
    // which keeps the sets nested even for negative optima.
    let level_sets = spec
        .levels
        .iter()
        .map(|&fraction| {
            let threshold = argmin.total_cost + fraction * argmin.total_cost.abs();
            let cells = surface
                .iter()
                .enumerate()
                .flat_map(|(ci, row)| {
                    row.iter()
                        .enumerate()
                        .filter(move |(_, &cost)| !cost.is_nan() && cost <= threshold)
                        .map(move |(si, _)| (ci, si))
                })
                .collect();
            LevelSet {
                fraction,
                threshold,
                cells,
            }
        })
        .collect();

    Ok(GridSearchResult {
        charge_caps_kw: spec.charge_caps_kw.clone(),
        capacities_kwh: spec.capacities_kwh.clone(),
        surface,
        argmin,
        level_sets,
    })
}

/// Charge-value statistics of a solution.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionDiagnostics {
    pub zero_charges: usize,
    /// Charges at the cap, within a relative tolerance of 1e-9.
    pub max_power_charges: usize,
    pub partial_charges: usize,
    pub total_charged_kwh: f64,
    pub end_level_kwh: f64,
    /// Counts over equal-width bins spanning `[0, charge_cap]`.
    pub histogram: Vec<usize>,
    pub feasible: bool,
}

/// Classifies every charge value and summarizes the storage trajectory.
/// Zero, maximum and partial counts always partition the horizon.
pub fn solution_diagnostics(
    scenario: &StorageScenario,
    x: &[f64],
    bins: usize,
) -> Result<SolutionDiagnostics> {
    if bins == 0 {
        return Err(Error::Domain("histogram needs at least one bin".into()));
    }
    if x.len() != scenario.n() {
        return Err(Error::LengthMismatch {
            name: "x",
            expected: scenario.n(),
            found: x.len(),
        });
    }
    let cap = scenario.charge_cap();
    let zero_cut = cap * 1e-9;
    let max_cut = cap * (1.0 - 1e-9);
    let mut zero_charges = 0;
    let mut max_power_charges = 0;
    let mut partial_charges = 0;
    let mut histogram = vec![0usize; bins];
    for &v in x {
        if v <= zero_cut {
            zero_charges += 1;
        } else if v >= max_cut {
            max_power_charges += 1;
        } else {
            partial_charges += 1;
        }
        let bin = ((v / cap * bins as f64).floor() as isize).clamp(0, bins as isize - 1);
        histogram[bin as usize] += 1;
    }
    let trajectory = storage_trajectory(scenario, x)?;
    Ok(SolutionDiagnostics {
        zero_charges,
        max_power_charges,
        partial_charges,
        total_charged_kwh: x.iter().sum(),
        end_level_kwh: trajectory.end_level(),
        histogram,
        feasible: trajectory.is_feasible(),
    })
}
