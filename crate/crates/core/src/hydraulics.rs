//! Steady-state pressure solver for the recirculation flushing loop.
//!
//! Node layout (flow direction in brackets):
//!
//! ```text
//!  A deck pump outlet ──[Q1, injection line, down WD]──> B motor inlet
//!  B ──[motor M2]──> C ═ D ═ I   (motor outlet, pump outlet and mixing point)
//!  D ──[Q3, 2-in recirc discharge]──> E ──[2"→7" expansion]──┐
//!  ┌─────────────────────────────────────────────────────────┘
//!  └─[Q3, 7-in production line]──> F (tee) ──[Q1, 7-in]──> J ──[riser]──> K (1 atm)
//!                                  F ──[tee, 7"→2"]──> G ──[Q2, 2-in suction]──> H ──[pump P2]──> I
//! ```
//!
//! Pressures are marched from the surface return point K back towards the
//! deck pump. The branch pressure at G is found by bisection so that the
//! pressure reached by walking the branch back to the tee matches the tee
//! pressure of the main line. All pressures are absolute, in Pa.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{require_efficiency, require_non_negative, require_positive, FlushError, Result};
use crate::units::{inches_to_m, m3h_to_m3s, pa_to_bar, ATMOSPHERE_PA, STANDARD_GRAVITY};

pub const LAMINAR_RE: f64 = 2300.0;
pub const TURBULENT_RE: f64 = 4000.0;

/// Working fluid. The default is MEG at 1110 kg/m³ and 16 mPa·s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluidProperties {
    pub name: String,
    pub density_kg_m3: f64,
    pub dynamic_viscosity_pa_s: f64,
}

impl Default for FluidProperties {
    fn default() -> Self {
        Self {
            name: "MEG".to_string(),
            density_kg_m3: 1110.0,
            dynamic_viscosity_pa_s: 0.016,
        }
    }
}

impl FluidProperties {
    pub fn validate(&self) -> Result<()> {
        require_positive("fluid.density_kg_m3", self.density_kg_m3)?;
        require_positive("fluid.dynamic_viscosity_pa_s", self.dynamic_viscosity_pa_s)
    }
}

/// A straight run of pipe. `elevation_change_m` is positive when the flow
/// goes downwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConduitSegment {
    pub label: String,
    pub internal_diameter_m: f64,
    pub length_m: f64,
    pub roughness_m: f64,
    pub elevation_change_m: f64,
}

impl ConduitSegment {
    pub fn horizontal(label: &str, internal_diameter_m: f64, length_m: f64, roughness_m: f64) -> Self {
        Self {
            label: label.to_string(),
            internal_diameter_m,
            length_m,
            roughness_m,
            elevation_change_m: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let field = |name: &str| format!("segment {}.{name}", self.label);
        require_positive(&field("internal_diameter_m"), self.internal_diameter_m)?;
        require_non_negative(&field("length_m"), self.length_m)?;
        require_non_negative(&field("roughness_m"), self.roughness_m)?;
        if !self.elevation_change_m.is_finite() {
            return Err(FlushError::invalid(field("elevation_change_m"), "must be finite"));
        }
        Ok(())
    }
}

/// A sudden change of bore along the flow direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiameterTransition {
    pub from_id_m: f64,
    pub to_id_m: f64,
}

/// Conduits and fittings of the flushing loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopGeometry {
    pub water_depth_m: f64,
    /// A→B, vertical, carries Q1.
    pub injection_line: ConduitSegment,
    /// D→E, carries Q3.
    pub recirc_discharge: ConduitSegment,
    /// E→F, carries Q3.
    pub production_upstream_tee: ConduitSegment,
    /// F→J, carries Q1 towards the return riser.
    pub production_downstream_tee: ConduitSegment,
    /// G→H, carries Q2.
    pub recirc_suction: ConduitSegment,
    /// Bore change at E (recirculation line into production line), Q3.
    pub discharge_transition: DiameterTransition,
    /// Bore change between the tee and G (production line into recirculation line), Q2.
    pub suction_transition: DiameterTransition,
    /// Tee branch loss coefficient on the recirculation-line velocity head.
    pub tee_branch_k: f64,
}

/// Dimensions of the reference flushing layout (2000 m water depth, 2-in
/// recirculation line, 7-in production line), parameterised by
/// the injection conduit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LoopDimensions {
    pub water_depth_m: f64,
    pub roughness_m: f64,
    pub recirc_id_in: f64,
    pub production_id_in: f64,
    pub recirc_discharge_length_m: f64,
    pub recirc_suction_length_m: f64,
    pub production_upstream_length_m: f64,
    pub production_downstream_length_m: f64,
    pub tee_branch_k: f64,
}

impl Default for LoopDimensions {
    fn default() -> Self {
        Self {
            water_depth_m: 2000.0,
            roughness_m: 4.5e-5,
            recirc_id_in: 2.0,
            production_id_in: 7.0,
            recirc_discharge_length_m: 5.0,
            recirc_suction_length_m: 10.0,
            production_upstream_length_m: 10.0,
            production_downstream_length_m: 20.0,
            tee_branch_k: 1.0,
        }
    }
}

impl LoopDimensions {
    pub fn validate(&self) -> Result<()> {
        require_positive("geometry.water_depth_m", self.water_depth_m)?;
        require_non_negative("geometry.roughness_m", self.roughness_m)?;
        require_positive("geometry.recirc_id_in", self.recirc_id_in)?;
        require_positive("geometry.production_id_in", self.production_id_in)?;
        require_non_negative("geometry.recirc_discharge_length_m", self.recirc_discharge_length_m)?;
        require_non_negative("geometry.recirc_suction_length_m", self.recirc_suction_length_m)?;
        require_non_negative("geometry.production_upstream_length_m", self.production_upstream_length_m)?;
        require_non_negative("geometry.production_downstream_length_m", self.production_downstream_length_m)?;
        require_non_negative("geometry.tee_branch_k", self.tee_branch_k)
    }

    /// Builds the loop with an injection line of `injection_id_in` running
    /// straight down the water column.
    pub fn geometry(&self, injection_id_in: f64) -> LoopGeometry {
        let recirc = inches_to_m(self.recirc_id_in);
        let production = inches_to_m(self.production_id_in);
        let eps = self.roughness_m;
        LoopGeometry {
            water_depth_m: self.water_depth_m,
            injection_line: ConduitSegment {
                label: "A-B".to_string(),
                internal_diameter_m: inches_to_m(injection_id_in),
                length_m: self.water_depth_m,
                roughness_m: eps,
                elevation_change_m: self.water_depth_m,
            },
            recirc_discharge: ConduitSegment::horizontal("D-E", recirc, self.recirc_discharge_length_m, eps),
            production_upstream_tee: ConduitSegment::horizontal(
                "E-F",
                production,
                self.production_upstream_length_m,
                eps,
            ),
            production_downstream_tee: ConduitSegment::horizontal(
                "F-J",
                production,
                self.production_downstream_length_m,
                eps,
            ),
            recirc_suction: ConduitSegment::horizontal("G-H", recirc, self.recirc_suction_length_m, eps),
            discharge_transition: DiameterTransition {
                from_id_m: recirc,
                to_id_m: production,
            },
            suction_transition: DiameterTransition {
                from_id_m: production,
                to_id_m: recirc,
            },
            tee_branch_k: self.tee_branch_k,
        }
    }
}

impl LoopGeometry {
    pub fn validate(&self) -> Result<()> {
        require_positive("geometry.water_depth_m", self.water_depth_m)?;
        for seg in [
            &self.injection_line,
            &self.recirc_discharge,
            &self.production_upstream_tee,
            &self.production_downstream_tee,
            &self.recirc_suction,
        ] {
            seg.validate()?;
        }
        for (name, t) in [
            ("geometry.discharge_transition", &self.discharge_transition),
            ("geometry.suction_transition", &self.suction_transition),
        ] {
            require_positive(&format!("{name}.from_id_m"), t.from_id_m)?;
            require_positive(&format!("{name}.to_id_m"), t.to_id_m)?;
        }
        require_non_negative("geometry.tee_branch_k", self.tee_branch_k)
    }
}

/// Injection rate Q1 and recirculation rate Q2. The rate through the
/// flushed component is always `q1 + q2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowCase {
    pub q1_injection_m3_per_h: f64,
    pub q2_recirculation_m3_per_h: f64,
}

impl FlowCase {
    pub fn new(q1_injection_m3_per_h: f64, q2_recirculation_m3_per_h: f64) -> Result<Self> {
        let case = Self {
            q1_injection_m3_per_h,
            q2_recirculation_m3_per_h,
        };
        case.validate()?;
        Ok(case)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("case.q1_injection_m3_per_h", self.q1_injection_m3_per_h)?;
        require_non_negative("case.q2_recirculation_m3_per_h", self.q2_recirculation_m3_per_h)
    }

    pub fn q1(&self) -> f64 {
        self.q1_injection_m3_per_h
    }

    pub fn q2(&self) -> f64 {
        self.q2_recirculation_m3_per_h
    }

    pub fn q3(&self) -> f64 {
        self.q1_injection_m3_per_h + self.q2_recirculation_m3_per_h
    }

    pub fn is_single_pass(&self) -> bool {
        self.q2_recirculation_m3_per_h == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MachineEfficiencies {
    pub deck_pump: f64,
    pub subsea_pump: f64,
    pub subsea_motor: f64,
}

impl Default for MachineEfficiencies {
    fn default() -> Self {
        Self {
            deck_pump: 1.0,
            subsea_pump: 1.0,
            subsea_motor: 1.0,
        }
    }
}

impl MachineEfficiencies {
    pub fn validate(&self) -> Result<()> {
        require_efficiency("efficiencies.deck_pump", self.deck_pump)?;
        require_efficiency("efficiencies.subsea_pump", self.subsea_pump)?;
        require_efficiency("efficiencies.subsea_motor", self.subsea_motor)
    }
}

/// Loop nodes, in the order they are reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Node {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    H,
    I,
    J,
    K,
}

impl Node {
    pub const ALL: [Node; 11] = [
        Node::A,
        Node::B,
        Node::C,
        Node::D,
        Node::E,
        Node::F,
        Node::G,
        Node::H,
        Node::I,
        Node::J,
        Node::K,
    ];

    pub fn letter(self) -> char {
        (b'A' + self as u8) as char
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Solved loop state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodePressureMap {
    pressure_pa: [f64; 11],
    /// Discharge minus suction pressure of the deck pump (suction at 1 atm).
    pub deck_pump_dp_pa: f64,
    /// `P_I - P_H`; zero when the recirculation branch carries no flow.
    pub subsea_pump_dp_pa: f64,
    /// Pressure given up by the injected stream across the subsea motor.
    pub subsea_motor_dp_pa: f64,
    /// Tee closure residual at the returned `P_G`.
    pub residual_pa: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// One line of the tabular node report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NodeRecord {
    pub node: char,
    pub pressure_pa: f64,
    pub pressure_bar: f64,
}

impl NodePressureMap {
    pub fn pressure(&self, node: Node) -> f64 {
        self.pressure_pa[node as usize]
    }

    pub fn records(&self) -> Vec<NodeRecord> {
        Node::ALL
            .iter()
            .map(|&n| NodeRecord {
                node: n.letter(),
                pressure_pa: self.pressure(n),
                pressure_bar: pa_to_bar(self.pressure(n)),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSettings {
    pub tolerance_pa: f64,
    pub max_iterations: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tolerance_pa: 100.0,
            max_iterations: 200,
        }
    }
}

/// Mean velocity in m/s of `q_m3_per_h` through a bore of `id_m`.
pub fn mean_velocity(q_m3_per_h: f64, id_m: f64) -> f64 {
    debug_assert!(id_m > 0.0);
    m3h_to_m3s(q_m3_per_h) / (PI * id_m * id_m / 4.0)
}

pub fn reynolds_number(q_m3_per_h: f64, id_m: f64, fluid: &FluidProperties) -> f64 {
    fluid.density_kg_m3 * mean_velocity(q_m3_per_h, id_m) * id_m / fluid.dynamic_viscosity_pa_s
}

/// Swamee–Jain explicit approximation of the Colebrook equation.
pub fn swamee_jain(re: f64, relative_roughness: f64) -> f64 {
    let log = (relative_roughness / 3.7 + 5.74 / re.powf(0.9)).log10();
    0.25 / (log * log)
}

/// Darcy friction factor: `64/Re` below Re 2300, Swamee–Jain from Re 4000,
/// linear in Re between the two.
pub fn darcy_friction_factor(re: f64, relative_roughness: f64) -> f64 {
    if re <= 0.0 {
        0.0
    } else if re < LAMINAR_RE {
        64.0 / re
    } else if re >= TURBULENT_RE {
        swamee_jain(re, relative_roughness)
    } else {
        let lo = 64.0 / LAMINAR_RE;
        let hi = swamee_jain(TURBULENT_RE, relative_roughness);
        let w = (re - LAMINAR_RE) / (TURBULENT_RE - LAMINAR_RE);
        lo + w * (hi - lo)
    }
}

/// Darcy–Weisbach frictional loss along `segment` (Pa, never negative).
pub fn friction_dp(segment: &ConduitSegment, q_m3_per_h: f64, fluid: &FluidProperties) -> f64 {
    if q_m3_per_h <= 0.0 || segment.length_m == 0.0 {
        return 0.0;
    }
    let d = segment.internal_diameter_m;
    let v = mean_velocity(q_m3_per_h, d);
    let re = fluid.density_kg_m3 * v * d / fluid.dynamic_viscosity_pa_s;
    let f = darcy_friction_factor(re, segment.roughness_m / d);
    f * (segment.length_m / d) * 0.5 * fluid.density_kg_m3 * v * v
}

/// Pressure lost going from the start to the end of `segment`: friction
/// minus the hydrostatic gain of any descent.
pub fn segment_dp(segment: &ConduitSegment, q_m3_per_h: f64, fluid: &FluidProperties) -> f64 {
    friction_dp(segment, q_m3_per_h, fluid)
        - fluid.density_kg_m3 * STANDARD_GRAVITY * segment.elevation_change_m
}

/// Sudden expansion (Borda–Carnot, `K = (1-β²)²`) or sudden contraction
/// (`K = 0.5·(1-β²)`) loss, both on the velocity head of the smaller bore.
pub fn transition_dp(q_m3_per_h: f64, from_id_m: f64, to_id_m: f64, fluid: &FluidProperties) -> f64 {
    if q_m3_per_h <= 0.0 || from_id_m == to_id_m {
        return 0.0;
    }
    let small = from_id_m.min(to_id_m);
    let large = from_id_m.max(to_id_m);
    let beta2 = (small / large).powi(2);
    let k = if to_id_m > from_id_m {
        (1.0 - beta2).powi(2)
    } else {
        0.5 * (1.0 - beta2)
    };
    let v = mean_velocity(q_m3_per_h, small);
    k * 0.5 * fluid.density_kg_m3 * v * v
}

/// Branch loss of the tee with coefficient `k` on the velocity head in `id_m`.
pub fn tee_branch_dp(q_m3_per_h: f64, id_m: f64, k: f64, fluid: &FluidProperties) -> f64 {
    if q_m3_per_h <= 0.0 {
        return 0.0;
    }
    let v = mean_velocity(q_m3_per_h, id_m);
    k * 0.5 * fluid.density_kg_m3 * v * v
}

/// Deck pump shaft power in W.
pub fn deck_pump_power(dp_pa: f64, q1_m3_per_h: f64, eff: &MachineEfficiencies) -> f64 {
    dp_pa * m3h_to_m3s(q1_m3_per_h) / eff.deck_pump
}

/// Subsea recirculation pump power in W.
pub fn subsea_pump_power(dp_pa: f64, q2_m3_per_h: f64, eff: &MachineEfficiencies) -> f64 {
    dp_pa * m3h_to_m3s(q2_m3_per_h) / eff.subsea_pump
}

/// Main-line pressures, fixed by the return to the surface.
struct MainLine {
    p_k: f64,
    p_j: f64,
    p_f: f64,
    p_e: f64,
    p_d: f64,
}

fn march_main_line(geom: &LoopGeometry, case: &FlowCase, fluid: &FluidProperties) -> MainLine {
    let rho = fluid.density_kg_m3;
    let p_k = ATMOSPHERE_PA;
    // Return riser losses are neglected.
    let p_j = p_k + rho * STANDARD_GRAVITY * geom.water_depth_m;
    let v_j = mean_velocity(case.q1(), geom.production_downstream_tee.internal_diameter_m);
    let v_f = mean_velocity(case.q3(), geom.production_upstream_tee.internal_diameter_m);
    let p_f = p_j
        + 0.5 * rho * (v_j * v_j - v_f * v_f)
        + segment_dp(&geom.production_downstream_tee, case.q1(), fluid);
    let t = geom.discharge_transition;
    let p_e = p_f
        + segment_dp(&geom.production_upstream_tee, case.q3(), fluid)
        + transition_dp(case.q3(), t.from_id_m, t.to_id_m, fluid);
    let p_d = p_e + segment_dp(&geom.recirc_discharge, case.q3(), fluid);
    MainLine { p_k, p_j, p_f, p_e, p_d }
}

/// Pressure lost between the tee and G.
fn branch_entry_dp(geom: &LoopGeometry, case: &FlowCase, fluid: &FluidProperties) -> f64 {
    let t = geom.suction_transition;
    tee_branch_dp(
        case.q2(),
        geom.recirc_suction.internal_diameter_m,
        geom.tee_branch_k,
        fluid,
    ) + transition_dp(case.q2(), t.from_id_m, t.to_id_m, fluid)
}

/// Marches every node pressure for a given `P_G` and reports the tee closure
/// residual. Used by [`solve_loop`] and to re-check a returned solution.
pub fn evaluate_loop(
    geom: &LoopGeometry,
    case: &FlowCase,
    fluid: &FluidProperties,
    eff: &MachineEfficiencies,
    p_g: f64,
) -> NodePressureMap {
    let main = march_main_line(geom, case, fluid);
    let residual = p_g + branch_entry_dp(geom, case, fluid) - main.p_f;
    let p_h = p_g - segment_dp(&geom.recirc_suction, case.q2(), fluid);
    let p_i = main.p_d;
    let p_c = main.p_d;
    let pump_dp = if case.q2() > 0.0 { p_i - p_h } else { 0.0 };
    let motor_dp = (case.q2() / case.q1()) * pump_dp / (eff.subsea_motor * eff.subsea_pump);
    let p_b = p_c + motor_dp;
    let p_a = p_b + segment_dp(&geom.injection_line, case.q1(), fluid);
    let pressure_pa = [p_a, p_b, p_c, main.p_d, main.p_e, main.p_f, p_g, p_h, p_i, main.p_j, main.p_k];
    NodePressureMap {
        pressure_pa,
        deck_pump_dp_pa: p_a - ATMOSPHERE_PA,
        subsea_pump_dp_pa: pump_dp,
        subsea_motor_dp_pa: motor_dp,
        residual_pa: residual,
        converged: false,
        iterations: 0,
    }
}

/// Solves the loop with the default tolerance (100 Pa) and iteration cap (200).
pub fn solve_loop(
    geom: &LoopGeometry,
    case: &FlowCase,
    fluid: &FluidProperties,
    eff: &MachineEfficiencies,
) -> Result<NodePressureMap> {
    solve_loop_with(geom, case, fluid, eff, &SolverSettings::default())
}

pub fn solve_loop_with(
    geom: &LoopGeometry,
    case: &FlowCase,
    fluid: &FluidProperties,
    eff: &MachineEfficiencies,
    settings: &SolverSettings,
) -> Result<NodePressureMap> {
    geom.validate()?;
    case.validate()?;
    fluid.validate()?;
    eff.validate()?;

    let main = march_main_line(geom, case, fluid);
    let residual = |p_g: f64| p_g + branch_entry_dp(geom, case, fluid) - main.p_f;

    let mut lo = main.p_k;
    if residual(lo) > 0.0 {
        // The branch drops below atmospheric; allow down to vacuum.
        lo = 0.0;
        if residual(lo) > 0.0 {
            return Err(FlushError::Infeasible {
                node: Node::G.letter(),
                pressure_pa: main.p_f - branch_entry_dp(geom, case, fluid),
            });
        }
    }
    let p_a_estimate = main.p_d + segment_dp(&geom.injection_line, case.q1(), fluid);
    let mut hi = p_a_estimate.max(main.p_f);

    let mut solution = None;
    let mut last = f64::NAN;
    for iteration in 1..=settings.max_iterations {
        let mid = 0.5 * (lo + hi);
        last = residual(mid);
        if last.abs() < settings.tolerance_pa {
            solution = Some((mid, iteration));
            break;
        }
        if last > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let Some((p_g, iterations)) = solution else {
        return Err(FlushError::NonConvergence {
            iterations: settings.max_iterations,
            residual_pa: last,
        });
    };

    let mut map = evaluate_loop(geom, case, fluid, eff, p_g);
    map.converged = true;
    map.iterations = iterations;
    for node in Node::ALL {
        let p = map.pressure(node);
        if !(p > 0.0) {
            return Err(FlushError::Infeasible {
                node: node.letter(),
                pressure_pa: p,
            });
        }
    }
    Ok(map)
}
