//! Flow-split sweeps, single-pass vs recirculation comparison, and fitting
//! the mixed-tank model to measured curves.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::emissions::{
    breakeven_new_vs_traditional, co2_for_power, BreakevenReport, EmissionFactor, PumpingDuty,
};
use crate::equipment::{pressure_feasibility, ConduitProduct, Feasibility};
use crate::error::{require_positive, FlushError, Result};
use crate::hydraulics::{
    deck_pump_power, solve_loop_with, subsea_pump_power, FlowCase, FluidProperties, LoopDimensions,
    MachineEfficiencies, SolverSettings,
};
use crate::model::{time_to_target, FlushSystem};
use crate::units::{m3h_to_m3s, pa_to_bar};

/// Injection rates of the reference flow-split study, in m³/h; each is
/// topped up to 25 m³/h by recirculation.
pub const REFERENCE_Q1_M3_PER_H: [f64; 14] = [
    5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0, 22.0, 24.0, 25.0,
];
pub const REFERENCE_INJECTION_IDS_IN: [f64; 4] = [1.5, 2.0, 3.0, 4.0];

/// The `[sweep]` block of a run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSettings {
    /// Q3, the rate through the flushed component.
    pub total_rate_m3_per_h: f64,
    pub q1_values_m3_per_h: Vec<f64>,
    pub injection_ids_in: Vec<f64>,
    /// Assumed duration of single-pass flushing, which has no decay model.
    pub single_pass_duration_s: f64,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            total_rate_m3_per_h: 25.0,
            q1_values_m3_per_h: REFERENCE_Q1_M3_PER_H.to_vec(),
            injection_ids_in: REFERENCE_INJECTION_IDS_IN.to_vec(),
            single_pass_duration_s: 7200.0,
        }
    }
}

impl SweepSettings {
    pub fn validate(&self) -> Result<()> {
        require_positive("sweep.total_rate_m3_per_h", self.total_rate_m3_per_h)?;
        if self.q1_values_m3_per_h.is_empty() {
            return Err(FlushError::invalid("sweep.q1_values_m3_per_h", "must not be empty"));
        }
        if self.injection_ids_in.is_empty() {
            return Err(FlushError::invalid("sweep.injection_ids_in", "must not be empty"));
        }
        for (i, &q1) in self.q1_values_m3_per_h.iter().enumerate() {
            let field = format!("sweep.q1_values_m3_per_h[{i}]");
            require_positive(&field, q1)?;
            if q1 > self.total_rate_m3_per_h {
                return Err(FlushError::invalid(
                    field,
                    format!("{q1} exceeds total_rate_m3_per_h = {}", self.total_rate_m3_per_h),
                ));
            }
        }
        for (i, &id) in self.injection_ids_in.iter().enumerate() {
            require_positive(&format!("sweep.injection_ids_in[{i}]"), id)?;
        }
        require_positive("sweep.single_pass_duration_s", self.single_pass_duration_s)
    }

    /// Flow cases in the order given, with `Q2 = Q3 - Q1`.
    pub fn cases(&self) -> Result<Vec<FlowCase>> {
        self.q1_values_m3_per_h
            .iter()
            .map(|&q1| FlowCase::new(q1, (self.total_rate_m3_per_h - q1).max(0.0)))
            .collect()
    }
}

/// Everything a sweep needs, resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepDefinition {
    pub sweep: SweepSettings,
    pub dimensions: LoopDimensions,
    pub fluid: FluidProperties,
    pub efficiencies: MachineEfficiencies,
    pub solver: SolverSettings,
    pub system: FlushSystem,
    pub emission: EmissionFactor,
    pub catalog: Vec<ConduitProduct>,
}

impl SweepDefinition {
    pub fn validate(&self) -> Result<()> {
        self.sweep.validate()?;
        self.dimensions.validate()?;
        self.fluid.validate()?;
        self.efficiencies.validate()?;
        self.system.validate()?;
        self.system.target_tau()?;
        self.emission.validate()
    }

    pub fn assumptions(&self) -> Assumptions {
        Assumptions {
            fluid: self.fluid.clone(),
            roughness_m: self.dimensions.roughness_m,
            water_depth_m: self.dimensions.water_depth_m,
            tee_branch_k: self.dimensions.tee_branch_k,
            efficiencies: self.efficiencies,
            t_co2_per_mwh: self.emission.t_co2_per_mwh,
            total_rate_m3_per_h: self.sweep.total_rate_m3_per_h,
            single_pass_duration_s: self.sweep.single_pass_duration_s,
            system: self.system,
        }
    }
}

/// Resolved assumptions echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assumptions {
    pub fluid: FluidProperties,
    pub roughness_m: f64,
    pub water_depth_m: f64,
    pub tee_branch_k: f64,
    pub efficiencies: MachineEfficiencies,
    pub t_co2_per_mwh: f64,
    pub total_rate_m3_per_h: f64,
    pub single_pass_duration_s: f64,
    pub system: FlushSystem,
}

impl Assumptions {
    /// `key=value` lines, used as `#` comment headers in CSV output.
    pub fn lines(&self) -> Vec<String> {
        vec![
            format!("fluid.name={}", self.fluid.name),
            format!("fluid.density_kg_m3={}", self.fluid.density_kg_m3),
            format!("fluid.dynamic_viscosity_pa_s={}", self.fluid.dynamic_viscosity_pa_s),
            format!("geometry.roughness_m={}", self.roughness_m),
            format!("geometry.water_depth_m={}", self.water_depth_m),
            format!("geometry.tee_branch_k={}", self.tee_branch_k),
            format!("efficiencies.deck_pump={}", self.efficiencies.deck_pump),
            format!("efficiencies.subsea_pump={}", self.efficiencies.subsea_pump),
            format!("efficiencies.subsea_motor={}", self.efficiencies.subsea_motor),
            format!("emission.t_co2_per_mwh={}", self.t_co2_per_mwh),
            format!("sweep.total_rate_m3_per_h={}", self.total_rate_m3_per_h),
            format!("sweep.single_pass_duration_s={}", self.single_pass_duration_s),
            format!("system.total_volume_m3={}", self.system.total_volume_m3),
            format!("system.initial_oil_fraction={}", self.system.initial_oil_fraction),
            format!("system.target_oil_fraction={}", self.system.target_oil_fraction),
        ]
    }
}

/// One (flow case, injection conduit) evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioResult {
    pub case: FlowCase,
    pub injection_id_in: f64,
    /// `None` when the hydraulic solve succeeded.
    pub failure: Option<String>,
    pub deck_dp_pa: Option<f64>,
    pub deck_power_w: Option<f64>,
    pub subsea_dp_pa: Option<f64>,
    pub subsea_power_w: Option<f64>,
    pub motor_dp_pa: Option<f64>,
    pub iterations: Option<usize>,
    /// Time to the system's target. `None` for single pass, which has no
    /// decay model.
    pub flushing_time_to_target_s: Option<f64>,
    /// Injected flushing fluid: to target for recirculation, over the assumed
    /// duration for single pass.
    pub injected_volume_m3: f64,
    /// Deck pump emissions over the flushing duration.
    pub co2_t: Option<f64>,
    pub feasibility: Vec<Feasibility>,
}

impl ScenarioResult {
    pub fn is_failed(&self) -> bool {
        self.failure.is_some()
    }

    /// Seconds of deck pumping this case implies.
    pub fn pumping_duration_s(&self, sweep: &SweepSettings) -> f64 {
        self.flushing_time_to_target_s
            .unwrap_or(sweep.single_pass_duration_s)
    }
}

fn same_bore(a_in: f64, b_in: f64) -> bool {
    (a_in - b_in).abs() < 1e-6
}

fn evaluate_case(def: &SweepDefinition, case: FlowCase, injection_id_in: f64) -> ScenarioResult {
    let geometry = def.dimensions.geometry(injection_id_in);
    let (flushing_time, injected_volume) = if case.is_single_pass() {
        let t = def.sweep.single_pass_duration_s;
        (None, m3h_to_m3s(case.q1()) * t)
    } else {
        // Validated up front, so the target is reachable.
        let t = time_to_target(&def.system, case.q1()).unwrap_or(f64::NAN);
        (Some(t), m3h_to_m3s(case.q1()) * t)
    };
    let duration = flushing_time.unwrap_or(def.sweep.single_pass_duration_s);
    let mut result = ScenarioResult {
        case,
        injection_id_in,
        failure: None,
        deck_dp_pa: None,
        deck_power_w: None,
        subsea_dp_pa: None,
        subsea_power_w: None,
        motor_dp_pa: None,
        iterations: None,
        flushing_time_to_target_s: flushing_time,
        injected_volume_m3: injected_volume,
        co2_t: None,
        feasibility: Vec::new(),
    };
    match solve_loop_with(&geometry, &case, &def.fluid, &def.efficiencies, &def.solver) {
        Ok(map) => {
            let deck_power = deck_pump_power(map.deck_pump_dp_pa, case.q1(), &def.efficiencies);
            result.deck_dp_pa = Some(map.deck_pump_dp_pa);
            result.deck_power_w = Some(deck_power);
            result.subsea_dp_pa = Some(map.subsea_pump_dp_pa);
            result.subsea_power_w = Some(subsea_pump_power(
                map.subsea_pump_dp_pa,
                case.q2(),
                &def.efficiencies,
            ));
            result.motor_dp_pa = Some(map.subsea_motor_dp_pa);
            result.iterations = Some(map.iterations);
            result.co2_t = Some(co2_for_power(deck_power, duration, &def.emission));
            result.feasibility = def
                .catalog
                .iter()
                .filter(|p| same_bore(p.internal_diameter_in, injection_id_in))
                .map(|p| pressure_feasibility(p, map.deck_pump_dp_pa))
                .collect();
        }
        Err(e) => result.failure = Some(e.to_string()),
    }
    result
}

/// Evaluates every flow case on every injection conduit, ordered by conduit
/// then by case as listed. Cases that fail to solve are kept and flagged.
pub fn run_sweep(def: &SweepDefinition) -> Result<Vec<ScenarioResult>> {
    def.validate()?;
    let cases = def.sweep.cases()?;
    let jobs: Vec<(f64, FlowCase)> = def
        .sweep
        .injection_ids_in
        .iter()
        .flat_map(|&id| cases.iter().map(move |&c| (id, c)))
        .collect();
    Ok(jobs
        .into_par_iter()
        .map(|(id, case)| evaluate_case(def, case, id))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    SinglePass,
    Recirculation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub method: Method,
    pub injection_id_in: f64,
    pub q1_m3_per_h: f64,
    pub q2_m3_per_h: f64,
    pub failure: Option<String>,
    pub deck_dp_pa: Option<f64>,
    pub deck_power_w: Option<f64>,
    pub subsea_power_w: Option<f64>,
    pub time_to_target_s: Option<f64>,
    pub pumping_duration_s: f64,
    pub injected_volume_m3: f64,
    /// CO2 with this row's own solved deck pressure.
    pub co2_actual_dp_t: Option<f64>,
    /// CO2 if the deck pump delivered the single-pass pressure for this
    /// conduit, the basis of the volume breakeven.
    pub co2_equal_dp_t: Option<f64>,
    pub feasibility: Vec<Feasibility>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub assumptions: Assumptions,
    pub rows: Vec<ComparisonRow>,
    /// Single-pass at Q3 for the assumed duration vs recirculation to target.
    pub breakeven: BreakevenReport,
}

/// Single-pass flushing at Q3 against every recirculation split, per
/// conduit. Equal-ΔP CO2 uses the conduit's single-pass deck pressure for
/// every row; actual-ΔP CO2 uses each row's own solution.
pub fn compare_methods(
    def: &SweepDefinition,
    system: &FlushSystem,
    factor: &EmissionFactor,
) -> Result<ComparisonReport> {
    let mut def = def.clone();
    def.system = *system;
    def.emission = *factor;
    def.validate()?;

    let q3 = def.sweep.total_rate_m3_per_h;
    let mut q1s: Vec<f64> = def
        .sweep
        .q1_values_m3_per_h
        .iter()
        .copied()
        .filter(|&q| q < q3)
        .collect();
    q1s.insert(0, q3);
    let mut sweep_def = def.clone();
    sweep_def.sweep.q1_values_m3_per_h = q1s;
    let results = run_sweep(&sweep_def)?;

    let mut rows = Vec::with_capacity(results.len());
    let per_id = sweep_def.sweep.q1_values_m3_per_h.len();
    for chunk in results.chunks(per_id) {
        let reference_dp = chunk[0].deck_dp_pa;
        for r in chunk {
            let duration = r.pumping_duration_s(&def.sweep);
            let co2_equal_dp = reference_dp.map(|dp| {
                let power = deck_pump_power(dp, r.case.q1(), &def.efficiencies);
                co2_for_power(power, duration, factor)
            });
            rows.push(ComparisonRow {
                method: if r.case.is_single_pass() {
                    Method::SinglePass
                } else {
                    Method::Recirculation
                },
                injection_id_in: r.injection_id_in,
                q1_m3_per_h: r.case.q1(),
                q2_m3_per_h: r.case.q2(),
                failure: r.failure.clone(),
                deck_dp_pa: r.deck_dp_pa,
                deck_power_w: r.deck_power_w,
                subsea_power_w: r.subsea_power_w,
                time_to_target_s: r.flushing_time_to_target_s,
                pumping_duration_s: duration,
                injected_volume_m3: r.injected_volume_m3,
                co2_actual_dp_t: r.co2_t,
                co2_equal_dp_t: co2_equal_dp,
                feasibility: r.feasibility.clone(),
            });
        }
    }

    let trad = PumpingDuty {
        dp_pa: 0.0,
        q_m3_per_h: q3,
        efficiency: def.efficiencies.deck_pump,
        duration_s: def.sweep.single_pass_duration_s,
    };
    let breakeven = breakeven_new_vs_traditional(&trad, system)?;
    Ok(ComparisonReport {
        assumptions: def.assumptions(),
        rows,
        breakeven,
    })
}

/// Measured leftover-fraction curve from a flushing test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasuredCurve {
    /// `(time_s, oil_fraction)` pairs.
    pub points: Vec<(f64, f64)>,
    pub injection_rate_m3_per_h: f64,
    /// Overrides the system volume when known for this test.
    pub system_volume_m3: Option<f64>,
}

#[derive(Debug, Deserialize)]
struct CurveRow {
    time_s: f64,
    oil_fraction: f64,
}

impl MeasuredCurve {
    /// Reads a CSV with header `time_s,oil_fraction`.
    pub fn from_csv<R: Read>(
        reader: R,
        injection_rate_m3_per_h: f64,
        system_volume_m3: Option<f64>,
    ) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let points = rdr
            .deserialize::<CurveRow>()
            .map(|r| {
                r.map(|r| (r.time_s, r.oil_fraction))
                    .map_err(|source| FlushError::Csv {
                        context: "measured curve".to_string(),
                        source,
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        let curve = Self {
            points,
            injection_rate_m3_per_h,
            system_volume_m3,
        };
        curve.validate()?;
        Ok(curve)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("curve.injection_rate_m3_per_h", self.injection_rate_m3_per_h)?;
        if let Some(v) = self.system_volume_m3 {
            require_positive("curve.system_volume_m3", v)?;
        }
        if self.points.len() < 3 {
            return Err(FlushError::invalid(
                "curve.points",
                format!("need at least 3 points, got {}", self.points.len()),
            ));
        }
        for (i, &(t, a)) in self.points.iter().enumerate() {
            if !t.is_finite() || t < 0.0 {
                return Err(FlushError::invalid(
                    format!("curve.points[{i}].time_s"),
                    format!("must be finite and >= 0, got {t}"),
                ));
            }
            if !(0.0..=1.0).contains(&a) {
                return Err(FlushError::invalid(
                    format!("curve.points[{i}].oil_fraction"),
                    format!("must be in [0, 1], got {a}"),
                ));
            }
        }
        for (i, w) in self.points.windows(2).enumerate() {
            if !(w[1].0 > w[0].0) {
                return Err(FlushError::invalid(
                    format!("curve.points[{}].time_s", i + 1),
                    format!("times must be strictly increasing ({} after {})", w[1].0, w[0].0),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitPoint {
    pub time_s: f64,
    pub measured: f64,
    pub model: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub injection_rate_m3_per_h: f64,
    pub volume_m3: f64,
    pub initial_oil_fraction: f64,
    pub points: Vec<FitPoint>,
    pub rmse: f64,
    pub max_abs_error: f64,
    pub model_terminal_fraction: f64,
    /// Least-squares volume from `ln(α/α₀) = -(Q/V)·t`; `None` when no
    /// point carries decay information.
    pub fitted_volume_m3: Option<f64>,
    pub fitted_rmse: Option<f64>,
}

fn model_errors(points: &[(f64, f64)], alpha0: f64, rate_per_s: f64) -> (Vec<FitPoint>, f64, f64) {
    let fit: Vec<FitPoint> = points
        .iter()
        .map(|&(t, a)| FitPoint {
            time_s: t,
            measured: a,
            model: alpha0 * (-rate_per_s * t).exp(),
        })
        .collect();
    let sq: f64 = fit.iter().map(|p| (p.model - p.measured).powi(2)).sum();
    let rmse = (sq / fit.len() as f64).sqrt();
    let max = fit
        .iter()
        .map(|p| (p.model - p.measured).abs())
        .fold(0.0, f64::max);
    (fit, rmse, max)
}

/// Compares the mixed-tank model against a measured curve and estimates
/// the effective flushed volume.
pub fn fit_model_to_curve(curve: &MeasuredCurve, system: &FlushSystem) -> Result<FitReport> {
    curve.validate()?;
    system.validate()?;
    let alpha0 = system.initial_oil_fraction;
    let volume = curve.system_volume_m3.unwrap_or(system.total_volume_m3);
    let q = m3h_to_m3s(curve.injection_rate_m3_per_h);
    let (points, rmse, max_abs_error) = model_errors(&curve.points, alpha0, q / volume);

    // Regression through the origin on points that can be logged.
    let (num, den) = curve
        .points
        .iter()
        .filter(|&&(t, a)| t > 0.0 && a > 0.0)
        .fold((0.0, 0.0), |(n, d), &(t, a)| (n - t * (a / alpha0).ln(), d + t * t));
    let decay_rate = if den > 0.0 { num / den } else { 0.0 };
    let (fitted_volume, fitted_rmse) = if decay_rate > 0.0 {
        let v = q / decay_rate;
        let (_, r, _) = model_errors(&curve.points, alpha0, decay_rate);
        (Some(v), Some(r))
    } else {
        (None, None)
    };

    Ok(FitReport {
        injection_rate_m3_per_h: curve.injection_rate_m3_per_h,
        volume_m3: volume,
        initial_oil_fraction: alpha0,
        model_terminal_fraction: points.last().map(|p| p.model).unwrap_or(alpha0),
        points,
        rmse,
        max_abs_error,
        fitted_volume_m3: fitted_volume,
        fitted_rmse,
    })
}

/// Flat CSV row for [`ScenarioResult`]. Column order is part of the output
/// format.
#[derive(Debug, Serialize)]
struct ResultRow<'a> {
    injection_id_in: f64,
    q1_m3_per_h: f64,
    q2_m3_per_h: f64,
    q3_m3_per_h: f64,
    status: &'a str,
    deck_dp_pa: Option<f64>,
    deck_power_w: Option<f64>,
    subsea_dp_pa: Option<f64>,
    subsea_power_w: Option<f64>,
    motor_dp_pa: Option<f64>,
    flushing_time_to_target_s: Option<f64>,
    injected_volume_m3: f64,
    co2_t: Option<f64>,
    feasibility: String,
    failure: &'a str,
}

fn feasibility_summary(list: &[Feasibility]) -> String {
    list.iter()
        .map(|f| format!("{}:{}", f.product, f.verdict))
        .collect::<Vec<_>>()
        .join(";")
}

fn csv_error(source: csv::Error) -> FlushError {
    FlushError::Csv {
        context: "writing results".to_string(),
        source,
    }
}

fn write_comment_header<W: Write>(writer: &mut W, assumptions: &Assumptions) -> std::io::Result<()> {
    for line in assumptions.lines() {
        writeln!(writer, "# {line}")?;
    }
    Ok(())
}

/// Writes the full result table, preceded by `# key=value` assumption lines.
pub fn write_results_csv<W: Write>(
    results: &[ScenarioResult],
    assumptions: &Assumptions,
    mut writer: W,
) -> Result<()> {
    write_comment_header(&mut writer, assumptions).map_err(|e| csv_error(e.into()))?;
    let mut wtr = csv::Writer::from_writer(writer);
    for r in results {
        wtr.serialize(ResultRow {
            injection_id_in: r.injection_id_in,
            q1_m3_per_h: r.case.q1(),
            q2_m3_per_h: r.case.q2(),
            q3_m3_per_h: r.case.q3(),
            status: if r.is_failed() { "failed" } else { "ok" },
            deck_dp_pa: r.deck_dp_pa,
            deck_power_w: r.deck_power_w,
            subsea_dp_pa: r.subsea_dp_pa,
            subsea_power_w: r.subsea_power_w,
            motor_dp_pa: r.motor_dp_pa,
            flushing_time_to_target_s: r.flushing_time_to_target_s,
            injected_volume_m3: r.injected_volume_m3,
            co2_t: r.co2_t,
            feasibility: feasibility_summary(&r.feasibility),
            failure: r.failure.as_deref().unwrap_or(""),
        })
        .map_err(csv_error)?;
    }
    wtr.flush().map_err(|e| csv_error(e.into()))
}

#[derive(Debug, Serialize)]
pub struct CurvePoint {
    pub q1_m3_per_h: f64,
    pub q2_m3_per_h: f64,
    pub deck_dp_pa: Option<f64>,
    pub deck_dp_bar: Option<f64>,
    pub deck_power_w: Option<f64>,
    pub deck_power_kw: Option<f64>,
}

/// Q1 against deck pressure and power for one injection conduit.
pub fn deck_curve(results: &[ScenarioResult], injection_id_in: f64) -> Vec<CurvePoint> {
    results
        .iter()
        .filter(|r| same_bore(r.injection_id_in, injection_id_in))
        .map(|r| CurvePoint {
            q1_m3_per_h: r.case.q1(),
            q2_m3_per_h: r.case.q2(),
            deck_dp_pa: r.deck_dp_pa,
            deck_dp_bar: r.deck_dp_pa.map(pa_to_bar),
            deck_power_w: r.deck_power_w,
            deck_power_kw: r.deck_power_w.map(|w| w / 1000.0),
        })
        .collect()
}

pub fn write_curve_csv<W: Write>(
    points: &[CurvePoint],
    assumptions: &Assumptions,
    mut writer: W,
) -> Result<()> {
    write_comment_header(&mut writer, assumptions).map_err(|e| csv_error(e.into()))?;
    let mut wtr = csv::Writer::from_writer(writer);
    for p in points {
        wtr.serialize(p).map_err(csv_error)?;
    }
    wtr.flush().map_err(|e| csv_error(e.into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equipment::{builtin_catalog, Verdict};

    fn definition() -> SweepDefinition {
        SweepDefinition {
            sweep: SweepSettings::default(),
            dimensions: LoopDimensions::default(),
            fluid: FluidProperties::default(),
            efficiencies: MachineEfficiencies::default(),
            solver: SolverSettings::default(),
            system: FlushSystem::new(1.0, 1.0, 0.01),
            emission: EmissionFactor::default(),
            catalog: builtin_catalog(),
        }
    }

    #[test]
    fn default_cases_match_reference_split() {
        let cases = SweepSettings::default().cases().unwrap();
        let q2: Vec<f64> = cases.iter().map(|c| c.q2()).collect();
        assert_eq!(
            q2,
            vec![20.0, 19.0, 18.0, 17.0, 16.0, 15.0, 13.0, 11.0, 9.0, 7.0, 5.0, 3.0, 1.0, 0.0]
        );
        assert!(cases.iter().all(|c| c.q3() == 25.0));
    }

    #[test]
    fn default_sweep_has_56_results() {
        let results = run_sweep(&definition()).unwrap();
        assert_eq!(results.len(), 56);
        assert!(results.iter().all(|r| !r.is_failed()));
        assert_eq!(results[0].injection_id_in, 1.5);
        assert_eq!(results[0].case.q1(), 5.0);
        assert_eq!(results[55].injection_id_in, 4.0);
        assert_eq!(results[55].case.q1(), 25.0);
    }

    #[test]
    fn single_pass_row_has_no_subsea_power_or_decay_time() {
        let results = run_sweep(&definition()).unwrap();
        let single = results.iter().find(|r| r.case.q1() == 25.0).unwrap();
        assert_eq!(single.subsea_power_w, Some(0.0));
        assert_eq!(single.flushing_time_to_target_s, None);
        assert!((single.injected_volume_m3 - 25.0 * 2.0).abs() < 1e-9);
    }

    #[test]
    fn recirculation_lowers_deck_pressure_on_small_line() {
        let mut def = definition();
        def.sweep.q1_values_m3_per_h.push(15.0);
        let results = run_sweep(&def).unwrap();
        let dp = |q1: f64| {
            results
                .iter()
                .find(|r| r.injection_id_in == 1.5 && r.case.q1() == q1)
                .and_then(|r| r.deck_dp_pa)
                .unwrap()
        };
        assert!(dp(15.0) < dp(25.0));
        for w in REFERENCE_Q1_M3_PER_H.windows(2) {
            assert!(dp(w[0]) <= dp(w[1]));
        }
    }

    #[test]
    fn twelve_plus_thirteen_fits_hv70() {
        let results = run_sweep(&definition()).unwrap();
        let r = results
            .iter()
            .find(|r| r.injection_id_in == 1.5 && r.case.q1() == 12.0)
            .unwrap();
        let hv70 = r.feasibility.iter().find(|f| f.product == "HV-70").unwrap();
        assert_eq!(hv70.verdict, Verdict::Pass);
    }

    #[test]
    fn empty_q1_list_is_rejected() {
        let mut def = definition();
        def.sweep.q1_values_m3_per_h.clear();
        let err = run_sweep(&def).unwrap_err();
        assert!(err.to_string().contains("q1_values"));
        let mut def = definition();
        def.sweep.q1_values_m3_per_h = vec![30.0];
        assert!(run_sweep(&def).is_err());
    }

    #[test]
    fn unsolvable_cases_are_flagged_not_dropped() {
        let mut def = definition();
        def.solver.max_iterations = 2;
        let results = run_sweep(&def).unwrap();
        assert_eq!(results.len(), 56);
        assert!(results.iter().all(|r| r.is_failed() && r.deck_dp_pa.is_none()));
        let mut buf = Vec::new();
        write_results_csv(&results, &def.assumptions(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().filter(|l| l.contains(",failed,")).count(), 56);
    }

    #[test]
    fn equal_volume_gives_equal_co2_under_equal_dp() {
        let def = definition();
        let system = FlushSystem::new(1.0, 1.0, 0.01);
        // Single-pass volume 25 m³/h · t equal to ln(100)·V.
        let mut def2 = def.clone();
        def2.sweep.single_pass_duration_s = 100f64.ln() * 1.0 / 25.0 * 3600.0;
        let report = compare_methods(&def2, &system, &EmissionFactor { t_co2_per_mwh: 0.7 }).unwrap();
        assert_eq!(report.breakeven.verdict, crate::emissions::BreakevenVerdict::Equal);
        for id_rows in report.rows.chunks(14) {
            let single = id_rows[0].co2_equal_dp_t.unwrap();
            assert_eq!(id_rows[0].method, Method::SinglePass);
            for row in &id_rows[1..] {
                let c = row.co2_equal_dp_t.unwrap();
                assert!((c - single).abs() <= 1e-9 * single, "{c} vs {single}");
            }
        }
    }

    #[test]
    fn fit_recovers_volume_from_half_life_points() {
        let v = 0.165;
        let q = 5.0;
        let half = v / (q / 3600.0) * 2f64.ln();
        let curve = MeasuredCurve {
            points: vec![(0.0, 1.0), (half, 0.5), (2.0 * half, 0.25)],
            injection_rate_m3_per_h: q,
            system_volume_m3: None,
        };
        let report = fit_model_to_curve(&curve, &FlushSystem::new(v, 1.0, 0.01)).unwrap();
        assert!(report.rmse < 1e-12);
        assert!((report.fitted_volume_m3.unwrap() - v).abs() / v < 1e-6);
    }

    #[test]
    fn fit_rejects_bad_curves() {
        let system = FlushSystem::new(0.2, 1.0, 0.01);
        let mk = |points: Vec<(f64, f64)>| MeasuredCurve {
            points,
            injection_rate_m3_per_h: 5.0,
            system_volume_m3: None,
        };
        assert!(fit_model_to_curve(&mk(vec![(0.0, 1.0), (10.0, 0.5)]), &system).is_err());
        let err = fit_model_to_curve(&mk(vec![(0.0, 1.0), (10.0, 0.5), (5.0, 0.4)]), &system)
            .unwrap_err();
        assert!(err.to_string().contains("strictly increasing"));
        assert!(fit_model_to_curve(&mk(vec![(0.0, 1.0), (10.0, 1.5), (20.0, 0.4)]), &system).is_err());
    }

    #[test]
    fn curve_csv_parsing() {
        let text = "time_s,oil_fraction\n0,1.0\n100,0.6\n200,0.35\n";
        let curve = MeasuredCurve::from_csv(text.as_bytes(), 5.0, Some(0.2)).unwrap();
        assert_eq!(curve.points.len(), 3);
        assert_eq!(curve.system_volume_m3, Some(0.2));
        let bad = "t,alpha\n0,1\n";
        assert!(MeasuredCurve::from_csv(bad.as_bytes(), 5.0, None).is_err());
    }
}
