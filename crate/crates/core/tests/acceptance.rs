//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero when any
//! criterion fails.

use std::fs;
use std::time::Instant;

use subsea_flush::cli::cmd_sweep;
use subsea_flush::config::{OutputFormat, RunConfig};
use subsea_flush::emissions::{
    breakeven_new_vs_traditional, pumping_co2, BreakevenVerdict, EmissionFactor, PumpingDuty,
};
use subsea_flush::equipment::{
    builtin_catalog, builtin_reels, find_product, size_reel, ReelResult, STEEL_DENSITY_KG_M3,
};
use subsea_flush::hydraulics::{
    evaluate_loop, solve_loop, FlowCase, FluidProperties, LoopDimensions, MachineEfficiencies,
    Node,
};
use subsea_flush::model::{DimensionlessTime, FlushSystem};
use subsea_flush::scenario::{
    fit_model_to_curve, run_sweep, MeasuredCurve, SweepDefinition, SweepSettings,
};
use subsea_flush::units::PA_PER_BAR;

struct Report {
    failures: usize,
}

impl Report {
    fn check(&mut self, id: &str, pass: bool, detail: String) {
        if !pass {
            self.failures += 1;
        }
        println!("[{}] {id}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn default_definition() -> SweepDefinition {
    SweepDefinition {
        sweep: SweepSettings::default(),
        dimensions: LoopDimensions::default(),
        fluid: FluidProperties::default(),
        efficiencies: MachineEfficiencies::default(),
        solver: Default::default(),
        system: FlushSystem::new(1.0, 1.0, 0.01),
        emission: EmissionFactor::default(),
        catalog: builtin_catalog(),
    }
}

/// Fourth-order Runge-Kutta on dα/dτ = -α.
fn rk4_tau(alpha0: f64, tau_end: f64, h: f64) -> f64 {
    let n = (tau_end / h).round() as usize;
    let h = if n == 0 { 0.0 } else { tau_end / n as f64 };
    let mut a = alpha0;
    for _ in 0..n {
        let k1 = -a;
        let k2 = -(a + 0.5 * h * k1);
        let k3 = -(a + 0.5 * h * k2);
        let k4 = -(a + h * k3);
        a += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    a
}

fn criterion_1(r: &mut Report) {
    let tau = -(0.01f64.ln());
    let alpha = DimensionlessTime::new(tau).unwrap().oil_fraction(1.0);
    let anchor = (alpha - 0.0100).abs() < 1e-6;
    let mut worst: f64 = 0.0;
    for i in 0..=100 {
        let t = i as f64 * 0.1;
        let closed = DimensionlessTime::new(t).unwrap().oil_fraction(1.0);
        worst = worst.max(rel(closed, rk4_tau(1.0, t, 1e-3)));
    }
    r.check(
        "1 mixing model",
        anchor && worst < 1e-6,
        format!(
            "alpha(tau={tau:.5}) = {alpha:.8} (|err| {:.2e}); worst rel diff vs RK4 on [0,10] = {worst:.2e}",
            (alpha - 0.01).abs()
        ),
    );
}

fn reel_rows(names: &[&str]) -> Vec<ReelResult> {
    let catalog = builtin_catalog();
    let reels = builtin_reels();
    names
        .iter()
        .map(|n| {
            let product = find_product(&catalog, n).unwrap();
            let drum = reels.iter().find(|r| r.product == *n).unwrap().drum();
            size_reel(product, &drum, STEEL_DENSITY_KG_M3).unwrap()
        })
        .collect()
}

fn reel_table(
    r: &mut Report,
    id: &str,
    names: &[&str],
    capacity: [f64; 4],
    volume: [f64; 4],
    mass: [f64; 4],
) {
    let rows = reel_rows(names);
    let mut pass = true;
    let mut detail = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let ec = rel(row.capacity_m, capacity[i]);
        let ev = rel(row.spool_volume_m3, volume[i]);
        let em = rel(row.total_mass_t, mass[i]);
        let ok = ec <= 0.01 && ev <= 0.02 && em <= 0.05;
        pass &= ok;
        detail.push(format!(
            "{} cap {:.1}/{} ({:+.2}%) vol {:.2}/{} ({:+.2}%) mass {:.1}/{} ({:+.1}%){}",
            row.product,
            row.capacity_m,
            capacity[i],
            100.0 * (row.capacity_m / capacity[i] - 1.0),
            row.spool_volume_m3,
            volume[i],
            100.0 * (row.spool_volume_m3 / volume[i] - 1.0),
            row.total_mass_t,
            mass[i],
            100.0 * (row.total_mass_t / mass[i] - 1.0),
            if ok { "" } else { " <-" },
        ));
    }
    r.check(id, pass, detail.join("; "));
}

fn criterion_4(r: &mut Report) {
    let geom = LoopDimensions::default().geometry(1.5);
    let map = solve_loop(
        &geom,
        &FlowCase::new(12.0, 13.0).unwrap(),
        &FluidProperties::default(),
        &MachineEfficiencies::default(),
    )
    .unwrap();
    let dp_bar = (map.pressure(Node::J) - map.pressure(Node::K)) / PA_PER_BAR;
    r.check(
        "4 hydrostatic anchor",
        (dp_bar - 217.8).abs() <= 0.1,
        format!("P_J - P_K = {dp_bar:.3} bar (target 217.8 +/- 0.1)"),
    );
}

fn criterion_5(r: &mut Report) {
    let mut def = default_definition();
    def.sweep.q1_values_m3_per_h.push(15.0);
    let start = Instant::now();
    let results = run_sweep(&def).unwrap();
    let elapsed = start.elapsed().as_secs_f64();

    let mut worst: f64 = 0.0;
    for res in &results {
        let (dp, p) = (res.deck_dp_pa.unwrap(), res.deck_power_w.unwrap());
        let expected = dp * res.case.q1() / 3600.0 / def.efficiencies.deck_pump;
        if expected != 0.0 {
            worst = worst.max(rel(p, expected));
        }
    }
    r.check(
        "5a energy consistency",
        worst <= 1e-9 && elapsed < 1.0,
        format!("worst rel error {worst:.2e} over {} cases; sweep took {elapsed:.3} s", results.len()),
    );

    let dp = |id: f64, q1: f64| {
        results
            .iter()
            .find(|x| x.injection_id_in == id && x.case.q1() == q1)
            .and_then(|x| x.deck_dp_pa)
            .unwrap()
    };
    let (d15, d25) = (dp(1.5, 15.0), dp(1.5, 25.0));
    r.check(
        "5b recirculation lowers deck dp",
        d15 < d25,
        format!(
            "1.5-in: Q1=15/Q2=10 {:.1} bar < Q1=25/Q2=0 {:.1} bar",
            d15 / PA_PER_BAR,
            d25 / PA_PER_BAR
        ),
    );

    let mut monotone = true;
    let mut detail = Vec::new();
    for &id in &def.sweep.injection_ids_in {
        let mut pts: Vec<(f64, f64)> = results
            .iter()
            .filter(|x| x.injection_id_in == id)
            .map(|x| (x.case.q1(), x.deck_dp_pa.unwrap()))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let ok = pts.windows(2).all(|w| w[1].1 >= w[0].1);
        monotone &= ok;
        detail.push(format!(
            "{id}-in {:.1}..{:.1} bar {}",
            pts[0].1 / PA_PER_BAR,
            pts[pts.len() - 1].1 / PA_PER_BAR,
            if ok { "ok" } else { "NOT monotone" }
        ));
    }
    r.check("5c deck dp monotone in Q1", monotone, detail.join("; "));

    let hv70 = |q1: f64| {
        results
            .iter()
            .find(|x| x.injection_id_in == 1.5 && x.case.q1() == q1)
            .unwrap()
            .feasibility
            .iter()
            .find(|f| f.product == "HV-70")
            .unwrap()
            .clone()
    };
    let single = hv70(25.0);
    let passing: Vec<f64> = def
        .sweep
        .q1_values_m3_per_h
        .iter()
        .copied()
        .filter(|&q| q < 25.0 && hv70(q).passes())
        .collect();
    r.check(
        "5d HV-70 single-pass fails, recirculation passes",
        !single.passes() && !passing.is_empty(),
        format!(
            "single-pass 1.5-in deck dp {:.1} bar vs 510 bar rating ({}); recirculation cases passing: {:?}",
            single.required_pa / PA_PER_BAR,
            single.verdict,
            passing
        ),
    );
}

fn criterion_6(r: &mut Report) {
    let def = default_definition();
    let results = run_sweep(&def).unwrap();
    let mut worst_residual: f64 = 0.0;
    let mut worst_recheck: f64 = 0.0;
    let mut converged = 0;
    for res in results.iter().filter(|x| !x.is_failed()) {
        converged += 1;
        let geom = def.dimensions.geometry(res.injection_id_in);
        let map = solve_loop(&geom, &res.case, &def.fluid, &def.efficiencies).unwrap();
        worst_residual = worst_residual.max(map.residual_pa.abs());
        let again = evaluate_loop(&geom, &res.case, &def.fluid, &def.efficiencies, map.pressure(Node::G));
        for node in Node::ALL {
            worst_recheck = worst_recheck.max((again.pressure(node) - map.pressure(node)).abs());
        }
    }
    let mut worst_jump: f64 = 0.0;
    for &id in &def.sweep.injection_ids_in {
        let geom = def.dimensions.geometry(id);
        let at_zero =
            solve_loop(&geom, &FlowCase::new(25.0, 0.0).unwrap(), &def.fluid, &def.efficiencies)
                .unwrap();
        let near_zero =
            solve_loop(&geom, &FlowCase::new(25.0, 1e-6).unwrap(), &def.fluid, &def.efficiencies)
                .unwrap();
        for node in Node::ALL {
            worst_jump = worst_jump.max((at_zero.pressure(node) - near_zero.pressure(node)).abs());
        }
    }
    r.check(
        "6 loop closure",
        converged == results.len() && worst_residual < 100.0 && worst_recheck < 1.0 && worst_jump < 100.0,
        format!(
            "{converged}/{} converged; max residual {worst_residual:.2} Pa; max re-evaluation diff {worst_recheck:.3} Pa; max q2->0 jump {worst_jump:.3} Pa",
            results.len()
        ),
    );
}

fn criterion_7(r: &mut Report) {
    let factor = EmissionFactor { t_co2_per_mwh: 0.7 };
    // Q = 1 m³/h at ΔP = 3600·P delivers P watts.
    let duty = |kw: f64, h: f64| PumpingDuty {
        dp_pa: kw * 1e3 * 3600.0,
        q_m3_per_h: 1.0,
        efficiency: 1.0,
        duration_s: h * 3600.0,
    };
    let single = pumping_co2(&duty(700.0, 2.0), &factor).unwrap();
    let recirc = pumping_co2(&duty(250.0, 4.0), &factor).unwrap();
    let v = 1.0;
    let system = FlushSystem::new(v, 1.0, 0.01);
    let tau = -(0.01f64.ln());
    let boundary = PumpingDuty {
        dp_pa: 1e7,
        q_m3_per_h: 1.0,
        efficiency: 1.0,
        duration_s: tau * v * 3600.0,
    };
    let verdict = breakeven_new_vs_traditional(&boundary, &system).unwrap().verdict;
    r.check(
        "7 emissions",
        (single - 0.98).abs() <= 0.01 && (recirc - 0.70).abs() <= 0.01 && verdict == BreakevenVerdict::Equal,
        format!(
            "{single:.4} tCO2 and {recirc:.4} tCO2 ({:.1}% reduction); Q*t = {tau:.5}*V -> {verdict}",
            100.0 * (1.0 - recirc / single)
        ),
    );
}

fn criterion_8(r: &mut Report) {
    let config = RunConfig::default();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut identical = true;
    let mut count = 0;
    for format in [OutputFormat::Csv, OutputFormat::Json] {
        let a = cmd_sweep(&config, &dirs[0].path().join("x"), format).unwrap();
        let b = cmd_sweep(&config, &dirs[1].path().join("x"), format).unwrap();
        for (fa, fb) in a.files.iter().zip(&b.files) {
            count += 1;
            identical &= fs::read(fa).unwrap() == fs::read(fb).unwrap();
        }
        identical &= a.files.len() == b.files.len();
    }
    r.check(
        "8 determinism",
        identical && count == 10,
        format!("{count} files compared across two runs (csv and json)"),
    );
}

fn criterion_9(r: &mut Report) {
    let v = 0.165;
    let q = 5.0;
    let system = FlushSystem::new(v, 1.0, 0.01);
    let rate = q / 3600.0 / v;
    let synthetic = MeasuredCurve {
        points: (0..=60).map(|i| {
            let t = i as f64 * 10.0;
            (t, (-rate * t).exp())
        })
        .collect(),
        injection_rate_m3_per_h: q,
        system_volume_m3: None,
    };
    let self_fit = fit_model_to_curve(&synthetic, &system).unwrap();
    let half = 2f64.ln() / rate;
    let constructed = MeasuredCurve {
        points: vec![(0.0, 1.0), (half, 0.5), (2.0 * half, 0.25)],
        injection_rate_m3_per_h: q,
        system_volume_m3: None,
    };
    let fitted = fit_model_to_curve(&constructed, &FlushSystem::new(1.0, 1.0, 0.01))
        .unwrap()
        .fitted_volume_m3
        .unwrap();
    r.check(
        "9 fit self-consistency",
        self_fit.rmse < 1e-12 && rel(fitted, v) <= 1e-6,
        format!(
            "synthetic rmse {:.2e}; half-life fitted V {fitted:.9} vs {v} (rel {:.2e})",
            self_fit.rmse,
            rel(fitted, v)
        ),
    );
}

fn main() {
    let mut r = Report { failures: 0 };
    criterion_1(&mut r);
    reel_table(
        &mut r,
        "2 coiled tubing reels",
        &["HV-70", "HS-70", "CT-3.0x3.5", "CT-4.0x4.5"],
        [2444.6, 2457.0, 2444.6, 2441.9],
        [6.4, 10.5, 25.7, 38.3],
        [7.9, 16.3, 31.6, 41.3],
    );
    reel_table(
        &mut r,
        "3 flexible steel pipe reels",
        &["Coflexip-1.5-5k", "Coflexip-2.0-5k", "Coflexip-3.0-5k", "Coflexip-4.0-5k"],
        [2420.3, 2457.2, 2409.7, 2399.3],
        [21.8, 33.2, 54.1, 93.1],
        [53.2, 76.8, 119.8, 208.2],
    );
    criterion_4(&mut r);
    criterion_5(&mut r);
    criterion_6(&mut r);
    criterion_7(&mut r);
    criterion_8(&mut r);
    criterion_9(&mut r);
    println!("{} criteria failed", r.failures);
    if r.failures > 0 {
        std::process::exit(1);
    }
}
