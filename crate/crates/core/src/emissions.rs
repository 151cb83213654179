//! CO2 released by the power generation behind the deck pump, and the
//! breakeven between single-pass and recirculation flushing.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{require_efficiency, require_non_negative, Result};
use crate::model::FlushSystem;
use crate::units::{m3h_to_m3s, JOULES_PER_MWH};

/// Relative tolerance under which two injected volumes count as equal.
pub const EQUALITY_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmissionFactor {
    pub t_co2_per_mwh: f64,
}

impl Default for EmissionFactor {
    fn default() -> Self {
        // Gas turbines and diesel gensets sit around 0.5–0.7 tCO2/MWh.
        Self { t_co2_per_mwh: 0.6 }
    }
}

impl EmissionFactor {
    pub fn validate(&self) -> Result<()> {
        require_non_negative("emission.t_co2_per_mwh", self.t_co2_per_mwh)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpingDuty {
    pub dp_pa: f64,
    pub q_m3_per_h: f64,
    pub efficiency: f64,
    pub duration_s: f64,
}

impl PumpingDuty {
    pub fn validate(&self) -> Result<()> {
        require_non_negative("duty.dp_pa", self.dp_pa)?;
        require_non_negative("duty.q_m3_per_h", self.q_m3_per_h)?;
        require_efficiency("duty.efficiency", self.efficiency)?;
        require_non_negative("duty.duration_s", self.duration_s)
    }

    pub fn power_w(&self) -> f64 {
        self.dp_pa * m3h_to_m3s(self.q_m3_per_h) / self.efficiency
    }

    pub fn energy_mwh(&self) -> f64 {
        self.power_w() * self.duration_s / JOULES_PER_MWH
    }

    pub fn injected_volume_m3(&self) -> f64 {
        m3h_to_m3s(self.q_m3_per_h) * self.duration_s
    }
}

/// Tonnes of CO2 for running `duty`: `(ΔP·Q/η)·t·F`.
pub fn pumping_co2(duty: &PumpingDuty, factor: &EmissionFactor) -> Result<f64> {
    duty.validate()?;
    factor.validate()?;
    Ok(duty.energy_mwh() * factor.t_co2_per_mwh)
}

/// Tonnes of CO2 for drawing `power_w` for `duration_s`.
pub fn co2_for_power(power_w: f64, duration_s: f64, factor: &EmissionFactor) -> f64 {
    power_w * duration_s / JOULES_PER_MWH * factor.t_co2_per_mwh
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BreakevenVerdict {
    /// Recirculation flushing emits less CO2.
    NewMethodLower,
    /// Both methods inject the same volume and emit the same CO2.
    Equal,
    TraditionalLower,
}

impl fmt::Display for BreakevenVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BreakevenVerdict::NewMethodLower => "recirculation emits less",
            BreakevenVerdict::Equal => "equal emissions",
            BreakevenVerdict::TraditionalLower => "single-pass emits less",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreakevenReport {
    /// `Q_trad·t_trad`
    pub traditional_volume_m3: f64,
    /// `ln(α₀/α_target)` for the system's target.
    pub threshold_tau: f64,
    /// `ln(α₀/α_target)·V`, the volume recirculation flushing must inject.
    pub threshold_volume_m3: f64,
    /// The same threshold for a 1 % leftover, `ln(α₀/0.01)·V`.
    pub one_percent_threshold_volume_m3: f64,
    pub verdict: BreakevenVerdict,
    /// True when single-pass CO2 ≥ recirculation CO2.
    pub new_method_emits_less_or_equal: bool,
}

/// Compares a single-pass duty against recirculation flushing to the
/// system's target, assuming the deck pump delivers the same pressure boost
/// in both methods. Under that assumption CO2 is proportional to injected
/// volume, so only volumes are compared.
pub fn breakeven_new_vs_traditional(trad: &PumpingDuty, system: &FlushSystem) -> Result<BreakevenReport> {
    trad.validate()?;
    let threshold_tau = system.target_tau()?;
    let v = system.total_volume_m3;
    let threshold = threshold_tau * v;
    let trad_volume = trad.injected_volume_m3();
    let scale = trad_volume.abs().max(threshold.abs()).max(f64::MIN_POSITIVE);
    let verdict = if (trad_volume - threshold).abs() <= EQUALITY_RTOL * scale {
        BreakevenVerdict::Equal
    } else if trad_volume > threshold {
        BreakevenVerdict::NewMethodLower
    } else {
        BreakevenVerdict::TraditionalLower
    };
    let one_percent = if system.initial_oil_fraction > 0.01 {
        (system.initial_oil_fraction / 0.01).ln() * v
    } else {
        0.0
    };
    Ok(BreakevenReport {
        traditional_volume_m3: trad_volume,
        threshold_tau,
        threshold_volume_m3: threshold,
        one_percent_threshold_volume_m3: one_percent,
        verdict,
        new_method_emits_less_or_equal: verdict != BreakevenVerdict::TraditionalLower,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn duty_from_power(power_w: f64, hours: f64) -> PumpingDuty {
        // 1 m³/h at dp = 3600·P delivers P watts.
        PumpingDuty {
            dp_pa: power_w * 3600.0,
            q_m3_per_h: 1.0,
            efficiency: 1.0,
            duration_s: hours * 3600.0,
        }
    }

    #[test]
    fn zero_duration_emits_nothing() {
        let d = PumpingDuty {
            duration_s: 0.0,
            ..duty_from_power(700e3, 1.0)
        };
        assert_eq!(pumping_co2(&d, &EmissionFactor::default()).unwrap(), 0.0);
    }

    #[test]
    fn single_pass_and_recirculation_anchors() {
        let f = EmissionFactor { t_co2_per_mwh: 0.7 };
        let single = pumping_co2(&duty_from_power(700e3, 2.0), &f).unwrap();
        let recirc = pumping_co2(&duty_from_power(250e3, 4.0), &f).unwrap();
        assert!((single - 0.98).abs() < 1e-9);
        assert!((recirc - 0.70).abs() < 1e-9);
        let reduction = 1.0 - recirc / single;
        assert!((reduction - 0.2857).abs() < 1e-3);
    }

    #[test]
    fn co2_for_power_agrees_with_duty() {
        let f = EmissionFactor { t_co2_per_mwh: 0.55 };
        let d = PumpingDuty {
            dp_pa: 3.0e7,
            q_m3_per_h: 12.0,
            efficiency: 0.8,
            duration_s: 5400.0,
        };
        let a = pumping_co2(&d, &f).unwrap();
        let b = co2_for_power(d.power_w(), d.duration_s, &f);
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn breakeven_boundary_is_exact() {
        let v = 1.0;
        let system = FlushSystem::new(v, 1.0, 0.01);
        let tau = 100f64.ln();
        // 1 m³/h for ln(100)·V hours.
        let trad = PumpingDuty {
            dp_pa: 1e7,
            q_m3_per_h: 1.0,
            efficiency: 1.0,
            duration_s: tau * v * 3600.0,
        };
        let r = breakeven_new_vs_traditional(&trad, &system).unwrap();
        assert_eq!(r.verdict, BreakevenVerdict::Equal);
        assert!(r.new_method_emits_less_or_equal);
        assert!((r.threshold_volume_m3 - 4.6).abs() < 0.01);
    }

    #[test]
    fn breakeven_clear_win() {
        let system = FlushSystem::new(2.0, 1.0, 0.01);
        let trad = PumpingDuty {
            dp_pa: 1e7,
            q_m3_per_h: 20.0,
            efficiency: 1.0,
            duration_s: 3600.0, // 20 m³ = 10·V
        };
        let r = breakeven_new_vs_traditional(&trad, &system).unwrap();
        assert_eq!(r.verdict, BreakevenVerdict::NewMethodLower);
    }

    #[test]
    fn generalized_threshold() {
        let system = FlushSystem::new(3.0, 1.0, 0.1);
        let trad = duty_from_power(1.0, 1.0);
        let r = breakeven_new_vs_traditional(&trad, &system).unwrap();
        assert!((r.threshold_tau - 10f64.ln()).abs() < 1e-12);
        assert!((r.threshold_volume_m3 - 2.303 * 3.0).abs() < 1e-2);
        assert!((r.one_percent_threshold_volume_m3 - 100f64.ln() * 3.0).abs() < 1e-12);
        assert_eq!(r.verdict, BreakevenVerdict::TraditionalLower);
    }

    #[test]
    fn zero_target_is_rejected() {
        let system = FlushSystem::new(1.0, 1.0, 0.0);
        assert!(breakeven_new_vs_traditional(&duty_from_power(1.0, 1.0), &system).is_err());
    }
}
