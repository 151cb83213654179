//! Perfectly mixed tank model of recirculation flushing.
//!
//! Strong recirculation keeps the flushed volume homogeneous, so the outlet
//! carries the same oil fraction as the volume itself. With a constant
//! injection rate `Q` into a volume `V` the oil fraction obeys
//! `dα/dt = -(Q/V)·α`, which integrates to `α(t) = α₀·exp(-Q·t/V)`.
//! Densities of the two liquids cancel out of the balance and are not inputs.

use serde::{Deserialize, Serialize};

use crate::error::{require_non_negative, require_positive, FlushError, Result};
use crate::units::m3h_to_m3s;

/// The volume being flushed and its initial/target oil content.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlushSystem {
    pub total_volume_m3: f64,
    pub initial_oil_fraction: f64,
    pub target_oil_fraction: f64,
}

impl FlushSystem {
    pub fn new(total_volume_m3: f64, initial_oil_fraction: f64, target_oil_fraction: f64) -> Self {
        Self {
            total_volume_m3,
            initial_oil_fraction,
            target_oil_fraction,
        }
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("system.total_volume_m3", self.total_volume_m3)?;
        let a0 = self.initial_oil_fraction;
        if !(a0.is_finite() && a0 > 0.0 && a0 <= 1.0) {
            return Err(FlushError::invalid(
                "system.initial_oil_fraction",
                format!("must be in (0, 1], got {a0}"),
            ));
        }
        let target = self.target_oil_fraction;
        if !(target.is_finite() && (0.0..=a0).contains(&target)) {
            return Err(FlushError::invalid(
                "system.target_oil_fraction",
                format!("must be in [0, initial_oil_fraction = {a0}], got {target}"),
            ));
        }
        Ok(())
    }

    /// `ln(α₀/α_target)`: the dimensionless time needed to reach the target.
    pub fn target_tau(&self) -> Result<f64> {
        self.validate()?;
        if self.target_oil_fraction == 0.0 {
            return Err(FlushError::UnreachableTarget {
                target: self.target_oil_fraction,
            });
        }
        Ok((self.initial_oil_fraction / self.target_oil_fraction).ln())
    }
}

/// Constant-rate injection held for `duration_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlushSchedule {
    pub injection_rate_m3_per_h: f64,
    pub duration_s: f64,
}

impl FlushSchedule {
    pub fn new(injection_rate_m3_per_h: f64, duration_s: f64) -> Self {
        Self {
            injection_rate_m3_per_h,
            duration_s,
        }
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("schedule.injection_rate_m3_per_h", self.injection_rate_m3_per_h)?;
        require_non_negative("schedule.duration_s", self.duration_s)
    }
}

/// Injected volume in units of the flushed volume, `τ = Q·t/V`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct DimensionlessTime(f64);

impl DimensionlessTime {
    pub fn new(tau: f64) -> Result<Self> {
        require_non_negative("tau", tau)?;
        Ok(Self(tau))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Leftover fraction `α₀·e^(-τ)`.
    pub fn oil_fraction(self, initial_oil_fraction: f64) -> f64 {
        initial_oil_fraction * (-self.0).exp()
    }
}

pub fn dimensionless_time(system: &FlushSystem, schedule: &FlushSchedule) -> Result<DimensionlessTime> {
    system.validate()?;
    schedule.validate()?;
    let tau = m3h_to_m3s(schedule.injection_rate_m3_per_h) * schedule.duration_s / system.total_volume_m3;
    Ok(DimensionlessTime(tau))
}

/// Oil fraction left in the system after running `schedule`.
pub fn oil_fraction_at(system: &FlushSystem, schedule: &FlushSchedule) -> Result<f64> {
    let tau = dimensionless_time(system, schedule)?;
    Ok(tau.oil_fraction(system.initial_oil_fraction))
}

/// Seconds of injection at `injection_rate_m3_per_h` needed to bring the oil
/// fraction down to the system's target.
pub fn time_to_target(system: &FlushSystem, injection_rate_m3_per_h: f64) -> Result<f64> {
    require_positive("injection_rate_m3_per_h", injection_rate_m3_per_h)?;
    let tau = system.target_tau()?;
    Ok(tau * system.total_volume_m3 / m3h_to_m3s(injection_rate_m3_per_h))
}

/// Injected volume `V·ln(α₀/α_target)` needed to reach the target. It does
/// not depend on the injection rate.
pub fn required_flush_volume(system: &FlushSystem) -> Result<f64> {
    Ok(system.target_tau()? * system.total_volume_m3)
}

/// Samples `α(t)` on `0, step, 2·step, ...` up to and including `duration_s`.
pub fn oil_fraction_series(
    system: &FlushSystem,
    injection_rate_m3_per_h: f64,
    duration_s: f64,
    step_s: f64,
) -> Result<Vec<(f64, f64)>> {
    require_positive("step_s", step_s)?;
    FlushSchedule::new(injection_rate_m3_per_h, duration_s).validate()?;
    // Round so that 600 s in 10 s steps gives 61 points, not 60 or 62.
    let n = (duration_s / step_s + 1e-9).floor() as usize;
    (0..=n)
        .map(|i| {
            let t = (i as f64 * step_s).min(duration_s);
            let alpha = oil_fraction_at(system, &FlushSchedule::new(injection_rate_m3_per_h, t))?;
            Ok((t, alpha))
        })
        .collect()
}
