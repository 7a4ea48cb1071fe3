//! Exponential standby-loss regression for thermal storage units.
//!
//! Manufacturer data relates storage capacity to daily standby losses; the
//! two are linearly correlated in log-log space, so a least-squares line fit
//! on the logarithms yields a power law `loss(c) = alpha · c^beta`. The
//! hourly retention factor of a store with capacity `c` is then the 24th
//! root of the surviving fraction, `((c - alpha·c^beta) / c)^(1/24)`.

use crate::error::{Error, Result};

/// Specific heat capacity of water, J/(kg·K).
pub const WATER_SPECIFIC_HEAT_J_PER_KG_K: f64 = 4200.0;

/// Maximum usable temperature swing of the storage medium, K.
pub const MAX_TEMPERATURE_DELTA_K: f64 = 60.0;

/// Specific energy capacity of water over the usable swing, kWh/m³.
/// (4200 J/(kg·K) · 60 K · 1000 kg/m³ = 2.52e8 J/m³ = 70 kWh/m³.)
pub const ENERGY_DENSITY_KWH_PER_M3: f64 = 70.0;

/// kWh stored per liter of medium.
pub const KWH_PER_LITER: f64 = ENERGY_DENSITY_KWH_PER_M3 / 1000.0;

/// One manufacturer data point: capacity and its daily standby loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossDataPoint {
    pub capacity_kwh: f64,
    pub daily_loss_kwh: f64,
}

impl LossDataPoint {
    pub fn new(capacity_kwh: f64, daily_loss_kwh: f64) -> Result<Self> {
        if !(capacity_kwh > 0.0) || !(daily_loss_kwh > 0.0) {
            return Err(Error::Fit(format!(
                "capacity {capacity_kwh} and daily loss {daily_loss_kwh} must be positive"
            )));
        }
        if daily_loss_kwh >= capacity_kwh {
            return Err(Error::Fit(format!(
                "daily loss {daily_loss_kwh} must be smaller than capacity {capacity_kwh}"
            )));
        }
        Ok(Self {
            capacity_kwh,
            daily_loss_kwh,
        })
    }

    /// Converts a liter-denominated capacity before constructing the point.
    pub fn from_liters(capacity_liters: f64, daily_loss_kwh: f64) -> Result<Self> {
        Self::new(capacity_liters * KWH_PER_LITER, daily_loss_kwh)
    }
}

/// Fitted power-law coefficients of the daily-loss model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayModel {
    alpha: f64,
    beta: f64,
}

impl DecayModel {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::Fit(format!("alpha {alpha} must be positive")));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::Fit(format!("beta {beta} must lie in (0, 1)")));
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Predicted daily standby loss at the given capacity, kWh per 24 h.
    pub fn daily_loss(&self, capacity_kwh: f64) -> f64 {
        self.alpha * capacity_kwh.powf(self.beta)
    }

    /// Hourly retention factor at the given capacity.
    ///
    /// Undefined when the predicted daily loss reaches the capacity.
    pub fn hourly_retention(&self, capacity_kwh: f64) -> Result<f64> {
        if !(capacity_kwh > 0.0) {
            return Err(Error::Domain(format!(
                "capacity {capacity_kwh} must be positive"
            )));
        }
        let loss = self.daily_loss(capacity_kwh);
        if loss >= capacity_kwh {
            return Err(Error::Domain(format!(
                "predicted daily loss {loss} reaches capacity {capacity_kwh}; \
                 retention is undefined"
            )));
        }
        Ok(((capacity_kwh - loss) / capacity_kwh).powf(1.0 / 24.0))
    }
}

/// Least-squares line fit on `(ln capacity, ln daily_loss)`.
///
/// `alpha` is the exponential of the intercept, `beta` the slope. Fitting
/// in log space reproduces the observed linear correlation directly.
pub fn fit_decay_model(points: &[LossDataPoint]) -> Result<DecayModel> {
    if points.len() < 2 {
        return Err(Error::Fit(format!(
            "need at least 2 data points, got {}",
            points.len()
        )));
    }
    for p in points {
        if !(p.capacity_kwh > 0.0) || !(p.daily_loss_kwh > 0.0) {
            return Err(Error::Fit(format!(
                "non-positive data point ({}, {})",
                p.capacity_kwh, p.daily_loss_kwh
            )));
        }
    }
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            if a.capacity_kwh == b.capacity_kwh {
                return Err(Error::Fit(format!(
                    "duplicate capacity {} in data",
                    a.capacity_kwh
                )));
            }
        }
    }

    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.capacity_kwh.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.daily_loss_kwh.ln()).collect();
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - x_mean) * (y - y_mean);
        sxx += (x - x_mean) * (x - x_mean);
    }
    let beta = sxy / sxx;
    let alpha = (y_mean - beta * x_mean).exp();
    let model = DecayModel::new(alpha, beta)?;

    // The model must stay physical over the range it was fitted on.
    for p in points {
        if model.daily_loss(p.capacity_kwh) >= p.capacity_kwh {
            return Err(Error::Fit(format!(
                "fitted loss exceeds capacity at {} kWh",
                p.capacity_kwh
            )));
        }
    }
    Ok(model)
}

/// Manufacturer catalogue points used throughout the tests: capacities in
/// kWh against daily standby losses in kWh/24h.
pub const CATALOGUE_POINTS: [(f64, f64); 7] = [
    (3.5, 0.54),
    (5.6, 0.66),
    (7.0, 0.79),
    (8.4, 0.92),
    (14.0, 1.4),
    (21.0, 1.6),
    (28.0, 1.8),
];

/// [`CATALOGUE_POINTS`] as constructed data points.
pub fn catalogue_points() -> Vec<LossDataPoint> {
    CATALOGUE_POINTS
        .iter()
        .map(|&(c, l)| LossDataPoint::new(c, l).expect("catalogue data is valid"))
        .collect()
}
