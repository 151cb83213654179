//! Command handlers behind the `subsea-flush` binary.
//!
//! Each `cmd_*` function computes a report and leaves presentation to
//! [`run`], which prints the human summary (bar, kW, tonnes) and writes the
//! machine-readable files (SI units) to the output directory.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::config::{OutputFormat, RunConfig};
use crate::equipment::{builtin_reels, find_product, size_reel, DrumGeometry, ReelResult};
use crate::error::{FlushError, Result};
use crate::model::{oil_fraction_series, required_flush_volume, time_to_target, FlushSystem};
use crate::scenario::{
    compare_methods, deck_curve, fit_model_to_curve, run_sweep, write_curve_csv,
    write_results_csv, Assumptions, ComparisonReport, FitReport, MeasuredCurve, ScenarioResult,
};
use crate::units::{pa_to_bar, SECONDS_PER_HOUR};

#[derive(Debug, Parser)]
#[command(name = "subsea-flush", version, about = "Recirculation flushing planner")]
pub struct Cli {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, overriding `output.dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    /// Dotted-path override such as `fluid.dynamic_viscosity_pa_s=0.02`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Oil fraction decay for one injection rate.
    Flush {
        #[arg(long)]
        rate: f64,
        /// Series length in seconds; defaults to the time to target.
        #[arg(long)]
        duration: Option<f64>,
        #[arg(long, default_value_t = 60.0)]
        step: f64,
    },
    /// Deck and subsea pump duty over every flow split and injection line.
    Sweep,
    /// Reel capacity and stored mass.
    Reel {
        /// Catalog products; all products with a built-in drum when omitted.
        #[arg(long = "product")]
        products: Vec<String>,
        #[arg(long)]
        water_depth: Option<f64>,
        /// Inline drum, used instead of the built-in one.
        #[arg(long, requires_all = ["width_in", "stack_in"])]
        core_in: Option<f64>,
        #[arg(long)]
        width_in: Option<f64>,
        #[arg(long)]
        stack_in: Option<f64>,
    },
    /// Single-pass against recirculation flushing.
    Compare,
    /// Fit the decay model to a measured curve.
    Fit {
        /// CSV with header `time_s,oil_fraction`.
        #[arg(long)]
        curve: PathBuf,
        #[arg(long)]
        rate: f64,
        /// Flushed volume for this test; the system volume otherwise.
        #[arg(long)]
        volume: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlushReport {
    pub system: FlushSystem,
    pub injection_rate_m3_per_h: f64,
    pub duration_s: f64,
    pub step_s: f64,
    /// `None` when the target is zero.
    pub time_to_target_s: Option<f64>,
    pub injected_volume_to_target_m3: Option<f64>,
    pub series: Vec<(f64, f64)>,
}

pub fn cmd_flush(
    config: &RunConfig,
    rate: f64,
    duration: Option<f64>,
    step: f64,
) -> Result<FlushReport> {
    let system = config.system;
    let reachable = system.target_oil_fraction > 0.0;
    let time_to_target_s = if reachable {
        Some(time_to_target(&system, rate)?)
    } else {
        None
    };
    let duration_s = match (duration, time_to_target_s) {
        (Some(d), _) => d,
        (None, Some(t)) => t,
        (None, None) => {
            return Err(FlushError::invalid(
                "duration",
                "required when the target oil fraction is zero",
            ))
        }
    };
    let series = oil_fraction_series(&system, rate, duration_s, step)?;
    Ok(FlushReport {
        system,
        injection_rate_m3_per_h: rate,
        duration_s,
        step_s: step,
        time_to_target_s,
        injected_volume_to_target_m3: if reachable {
            Some(required_flush_volume(&system)?)
        } else {
            None
        },
        series,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub assumptions: Assumptions,
    pub results: Vec<ScenarioResult>,
    pub files: Vec<PathBuf>,
}

impl SweepOutcome {
    pub fn failed_cases(&self) -> usize {
        self.results.iter().filter(|r| r.is_failed()).count()
    }
}

fn create(path: &Path) -> Result<fs::File> {
    fs::File::create(path).map_err(|e| FlushError::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut file = create(path)?;
    serde_json::to_writer_pretty(&mut file, value)
        .map_err(|e| FlushError::io(path, e.into()))?;
    writeln!(file).map_err(|e| FlushError::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| FlushError::io(dir, e))
}

fn id_label(id_in: f64) -> String {
    format!("{id_in}in")
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    assumptions: &'a Assumptions,
    #[serde(flatten)]
    body: T,
}

/// Runs the sweep and writes one deck curve per injection line plus the full
/// result table into `out_dir`.
pub fn cmd_sweep(config: &RunConfig, out_dir: &Path, format: OutputFormat) -> Result<SweepOutcome> {
    let def = config.sweep_definition()?;
    let results = run_sweep(&def)?;
    let assumptions = def.assumptions();
    ensure_dir(out_dir)?;
    let mut files = Vec::new();
    for &id in &def.sweep.injection_ids_in {
        let curve = deck_curve(&results, id);
        let path = match format {
            OutputFormat::Csv => {
                let path = out_dir.join(format!("deck_curve_{}.csv", id_label(id)));
                write_curve_csv(&curve, &assumptions, create(&path)?)?;
                path
            }
            OutputFormat::Json => {
                let path = out_dir.join(format!("deck_curve_{}.json", id_label(id)));
                #[derive(Serialize)]
                struct Body<'a, C: Serialize> {
                    injection_id_in: f64,
                    points: &'a C,
                }
                write_json(
                    &path,
                    &Document {
                        assumptions: &assumptions,
                        body: Body {
                            injection_id_in: id,
                            points: &curve,
                        },
                    },
                )?;
                path
            }
        };
        files.push(path);
    }
    let table = match format {
        OutputFormat::Csv => {
            let path = out_dir.join("sweep_results.csv");
            write_results_csv(&results, &assumptions, create(&path)?)?;
            path
        }
        OutputFormat::Json => {
            let path = out_dir.join("sweep_results.json");
            #[derive(Serialize)]
            struct Body<'a> {
                results: &'a [ScenarioResult],
            }
            write_json(
                &path,
                &Document {
                    assumptions: &assumptions,
                    body: Body { results: &results },
                },
            )?;
            path
        }
    };
    files.push(table);
    Ok(SweepOutcome {
        assumptions,
        results,
        files,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReelRow {
    #[serde(flatten)]
    pub reel: ReelResult,
    pub required_length_m: f64,
    pub short: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReelTable {
    pub material_density_kg_m3: f64,
    pub water_depth_m: f64,
    pub length_margin_m: f64,
    pub rows: Vec<ReelRow>,
}

/// Sizes each product on its built-in drum, or on `inline_drum` when given.
pub fn cmd_reel(
    config: &RunConfig,
    products: &[String],
    water_depth_m: Option<f64>,
    inline_drum: Option<DrumGeometry>,
) -> Result<ReelTable> {
    let catalog = config.catalog()?;
    let reels = builtin_reels();
    let water_depth_m = water_depth_m.unwrap_or(config.geometry.water_depth_m);
    let required = water_depth_m + config.reel.length_margin_m;
    let names: Vec<String> = if products.is_empty() {
        reels.iter().map(|r| r.product.clone()).collect()
    } else {
        products.to_vec()
    };
    let mut rows = Vec::with_capacity(names.len());
    for name in &names {
        let product = find_product(&catalog, name)?;
        let drum = match inline_drum {
            Some(d) => d,
            None => reels
                .iter()
                .find(|r| r.product.eq_ignore_ascii_case(&product.name))
                .map(|r| r.drum())
                .ok_or_else(|| {
                    FlushError::invalid(
                        format!("reel[{name}]"),
                        "no built-in drum; pass --core-in, --width-in and --stack-in",
                    )
                })?,
        };
        let reel = size_reel(product, &drum, config.reel.material_density_kg_m3)?;
        rows.push(ReelRow {
            short: reel.capacity_m < required,
            required_length_m: required,
            reel,
        });
    }
    Ok(ReelTable {
        material_density_kg_m3: config.reel.material_density_kg_m3,
        water_depth_m,
        length_margin_m: config.reel.length_margin_m,
        rows,
    })
}

pub fn cmd_compare(config: &RunConfig) -> Result<ComparisonReport> {
    let def = config.sweep_definition()?;
    compare_methods(&def, &config.system, &config.emission)
}

pub fn cmd_fit(
    config: &RunConfig,
    curve_path: &Path,
    rate: f64,
    volume: Option<f64>,
) -> Result<FitReport> {
    let file = fs::File::open(curve_path).map_err(|e| FlushError::io(curve_path, e))?;
    let curve = MeasuredCurve::from_csv(file, rate, volume)?;
    fit_model_to_curve(&curve, &config.system)
}

fn opt_bar(pa: Option<f64>) -> String {
    pa.map(|p| format!("{:.1}", pa_to_bar(p)))
        .unwrap_or_else(|| "-".into())
}

fn opt_kw(w: Option<f64>) -> String {
    w.map(|w| format!("{:.1}", w / 1000.0))
        .unwrap_or_else(|| "-".into())
}

fn print_assumptions(a: &Assumptions) {
    println!("assumptions:");
    for line in a.lines() {
        println!("  {line}");
    }
}

fn print_flush(r: &FlushReport) {
    println!(
        "system: V = {} m3, alpha0 = {}, target = {}",
        r.system.total_volume_m3, r.system.initial_oil_fraction, r.system.target_oil_fraction
    );
    println!("injection rate: {} m3/h", r.injection_rate_m3_per_h);
    match (r.time_to_target_s, r.injected_volume_to_target_m3) {
        (Some(t), Some(v)) => {
            println!(
                "time to target: {:.1} s ({:.3} h)",
                t,
                t / SECONDS_PER_HOUR
            );
            println!("injected volume to target: {v:.4} m3");
        }
        _ => println!("time to target: never (zero target)"),
    }
    println!("time_s,oil_fraction");
    for (t, a) in &r.series {
        println!("{t},{a}");
    }
}

fn write_flush(r: &FlushReport, dir: &Path, format: OutputFormat) -> Result<PathBuf> {
    match format {
        OutputFormat::Json => {
            let path = dir.join("flush.json");
            write_json(&path, r)?;
            Ok(path)
        }
        OutputFormat::Csv => {
            let path = dir.join("flush.csv");
            let mut file = create(&path)?;
            let io = |e| FlushError::io(&path, e);
            writeln!(file, "# system.total_volume_m3={}", r.system.total_volume_m3).map_err(io)?;
            writeln!(file, "# system.initial_oil_fraction={}", r.system.initial_oil_fraction)
                .map_err(io)?;
            writeln!(file, "# system.target_oil_fraction={}", r.system.target_oil_fraction)
                .map_err(io)?;
            writeln!(file, "# injection_rate_m3_per_h={}", r.injection_rate_m3_per_h).map_err(io)?;
            if let Some(t) = r.time_to_target_s {
                writeln!(file, "# time_to_target_s={t}").map_err(io)?;
            }
            writeln!(file, "time_s,oil_fraction").map_err(io)?;
            for (t, a) in &r.series {
                writeln!(file, "{t},{a}").map_err(io)?;
            }
            Ok(path)
        }
    }
}

fn print_sweep(o: &SweepOutcome) {
    print_assumptions(&o.assumptions);
    println!(
        "{:>6} {:>6} {:>6} {:>12} {:>12} {:>12}  feasibility",
        "ID_in", "Q1", "Q2", "deck_bar", "deck_kW", "subsea_kW"
    );
    for r in &o.results {
        let feas: Vec<String> = r
            .feasibility
            .iter()
            .map(|f| format!("{}:{}", f.product, f.verdict))
            .collect();
        println!(
            "{:>6} {:>6} {:>6} {:>12} {:>12} {:>12}  {}{}",
            r.injection_id_in,
            r.case.q1(),
            r.case.q2(),
            opt_bar(r.deck_dp_pa),
            opt_kw(r.deck_power_w),
            opt_kw(r.subsea_power_w),
            feas.join(" "),
            r.failure
                .as_deref()
                .map(|f| format!(" FAILED: {f}"))
                .unwrap_or_default(),
        );
    }
    for f in &o.files {
        println!("wrote {}", f.display());
    }
}

fn print_reel(t: &ReelTable) {
    println!(
        "water depth {} m + margin {} m; material density {} kg/m3",
        t.water_depth_m, t.length_margin_m, t.material_density_kg_m3
    );
    println!(
        "{:<20} {:>6} {:>6} {:>8} {:>10} {:>10} {:>9} {:>9}",
        "product", "ID_in", "OD_in", "K", "cap_m", "volume_m3", "mass_t", "length"
    );
    for r in &t.rows {
        println!(
            "{:<20} {:>6} {:>6} {:>8.4} {:>10.1} {:>10.2} {:>9.1} {:>9}",
            r.reel.product,
            r.reel.internal_diameter_in,
            r.reel.outside_diameter_in,
            r.reel.k_factor,
            r.reel.capacity_m,
            r.reel.spool_volume_m3,
            r.reel.total_mass_t,
            if r.short { "SHORT" } else { "ok" },
        );
    }
}

fn write_reel(t: &ReelTable, dir: &Path, format: OutputFormat) -> Result<PathBuf> {
    match format {
        OutputFormat::Json => {
            let path = dir.join("reels.json");
            write_json(&path, t)?;
            Ok(path)
        }
        OutputFormat::Csv => {
            #[derive(Serialize)]
            struct Row<'a> {
                product: &'a str,
                internal_diameter_in: f64,
                outside_diameter_in: f64,
                k_factor: f64,
                core_diameter_in: f64,
                drum_width_in: f64,
                stack_height_in: f64,
                capacity_ft: f64,
                capacity_m: f64,
                spool_volume_m3: f64,
                linear_mass_kg_m: f64,
                total_mass_t: f64,
                required_length_m: f64,
                short: bool,
            }
            let path = dir.join("reels.csv");
            let mut wtr = csv::Writer::from_writer(create(&path)?);
            let wrap = |source| FlushError::Csv {
                context: path.display().to_string(),
                source,
            };
            for r in &t.rows {
                wtr.serialize(Row {
                    product: &r.reel.product,
                    internal_diameter_in: r.reel.internal_diameter_in,
                    outside_diameter_in: r.reel.outside_diameter_in,
                    k_factor: r.reel.k_factor,
                    core_diameter_in: r.reel.core_diameter_in,
                    drum_width_in: r.reel.drum_width_in,
                    stack_height_in: r.reel.stack_height_in,
                    capacity_ft: r.reel.capacity_ft,
                    capacity_m: r.reel.capacity_m,
                    spool_volume_m3: r.reel.spool_volume_m3,
                    linear_mass_kg_m: r.reel.linear_mass_kg_m,
                    total_mass_t: r.reel.total_mass_t,
                    required_length_m: r.required_length_m,
                    short: r.short,
                })
                .map_err(wrap)?;
            }
            wtr.flush().map_err(|e| FlushError::io(&path, e))?;
            Ok(path)
        }
    }
}

fn print_compare(r: &ComparisonReport) {
    print_assumptions(&r.assumptions);
    println!(
        "{:<14} {:>6} {:>6} {:>6} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "method", "ID_in", "Q1", "Q2", "deck_bar", "deck_kW", "time_h", "MEG_m3", "CO2_t", "CO2_eqdp"
    );
    for row in &r.rows {
        let method = match row.method {
            crate::scenario::Method::SinglePass => "single-pass",
            crate::scenario::Method::Recirculation => "recirculation",
        };
        println!(
            "{:<14} {:>6} {:>6} {:>6} {:>10} {:>10} {:>10} {:>10.3} {:>10} {:>10}",
            method,
            row.injection_id_in,
            row.q1_m3_per_h,
            row.q2_m3_per_h,
            opt_bar(row.deck_dp_pa),
            opt_kw(row.deck_power_w),
            row.time_to_target_s
                .map(|t| format!("{:.3}", t / SECONDS_PER_HOUR))
                .unwrap_or_else(|| "n/m".into()),
            row.injected_volume_m3,
            row.co2_actual_dp_t
                .map(|c| format!("{c:.4}"))
                .unwrap_or_else(|| "-".into()),
            row.co2_equal_dp_t
                .map(|c| format!("{c:.4}"))
                .unwrap_or_else(|| "-".into()),
        );
    }
    let b = &r.breakeven;
    println!(
        "breakeven (equal pressure boost): single-pass injects {:.3} m3, recirculation needs {:.3} m3 (tau {:.4}): {}",
        b.traditional_volume_m3, b.threshold_volume_m3, b.threshold_tau, b.verdict
    );
    println!("n/m: single-pass time to target is not modeled; CO2_eqdp uses the single-pass deck pressure for every row");
}

fn write_compare(r: &ComparisonReport, dir: &Path, format: OutputFormat) -> Result<PathBuf> {
    match format {
        OutputFormat::Json => {
            let path = dir.join("compare.json");
            write_json(&path, r)?;
            Ok(path)
        }
        OutputFormat::Csv => {
            #[derive(Serialize)]
            struct Row<'a> {
                method: &'a str,
                injection_id_in: f64,
                q1_m3_per_h: f64,
                q2_m3_per_h: f64,
                deck_dp_pa: Option<f64>,
                deck_power_w: Option<f64>,
                subsea_power_w: Option<f64>,
                time_to_target_s: Option<f64>,
                pumping_duration_s: f64,
                injected_volume_m3: f64,
                co2_actual_dp_t: Option<f64>,
                co2_equal_dp_t: Option<f64>,
                failure: &'a str,
            }
            let path = dir.join("compare.csv");
            let mut file = create(&path)?;
            for line in r.assumptions.lines() {
                writeln!(file, "# {line}").map_err(|e| FlushError::io(&path, e))?;
            }
            writeln!(
                file,
                "# breakeven.verdict={}\n# breakeven.threshold_volume_m3={}",
                r.breakeven.verdict, r.breakeven.threshold_volume_m3
            )
            .map_err(|e| FlushError::io(&path, e))?;
            let mut wtr = csv::Writer::from_writer(file);
            for row in &r.rows {
                wtr.serialize(Row {
                    method: match row.method {
                        crate::scenario::Method::SinglePass => "single-pass",
                        crate::scenario::Method::Recirculation => "recirculation",
                    },
                    injection_id_in: row.injection_id_in,
                    q1_m3_per_h: row.q1_m3_per_h,
                    q2_m3_per_h: row.q2_m3_per_h,
                    deck_dp_pa: row.deck_dp_pa,
                    deck_power_w: row.deck_power_w,
                    subsea_power_w: row.subsea_power_w,
                    time_to_target_s: row.time_to_target_s,
                    pumping_duration_s: row.pumping_duration_s,
                    injected_volume_m3: row.injected_volume_m3,
                    co2_actual_dp_t: row.co2_actual_dp_t,
                    co2_equal_dp_t: row.co2_equal_dp_t,
                    failure: row.failure.as_deref().unwrap_or(""),
                })
                .map_err(|source| FlushError::Csv {
                    context: path.display().to_string(),
                    source,
                })?;
            }
            wtr.flush().map_err(|e| FlushError::io(&path, e))?;
            Ok(path)
        }
    }
}

fn print_fit(r: &FitReport) {
    println!(
        "rate {} m3/h, V {} m3, alpha0 {}",
        r.injection_rate_m3_per_h, r.volume_m3, r.initial_oil_fraction
    );
    println!("rmse {:.6e}, max abs error {:.6e}", r.rmse, r.max_abs_error);
    println!("model terminal fraction {:.6}", r.model_terminal_fraction);
    match (r.fitted_volume_m3, r.fitted_rmse) {
        (Some(v), Some(e)) => println!("fitted V {v:.6} m3 (rmse {e:.6e})"),
        _ => println!("fitted V: no decay in the data"),
    }
}

fn write_fit(r: &FitReport, dir: &Path, format: OutputFormat) -> Result<PathBuf> {
    match format {
        OutputFormat::Json => {
            let path = dir.join("fit.json");
            write_json(&path, r)?;
            Ok(path)
        }
        OutputFormat::Csv => {
            let path = dir.join("fit.csv");
            let mut wtr = csv::Writer::from_writer(create(&path)?);
            for p in &r.points {
                wtr.serialize(p).map_err(|source| FlushError::Csv {
                    context: path.display().to_string(),
                    source,
                })?;
            }
            wtr.flush().map_err(|e| FlushError::io(&path, e))?;
            Ok(path)
        }
    }
}

/// Executes a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> Result<i32> {
    let config = RunConfig::load(cli.config.as_deref(), &cli.overrides)?;
    let out_dir = cli.out.clone().unwrap_or_else(|| config.output.dir.clone());
    let format = cli.format.unwrap_or(config.output.format);
    let written = match cli.command {
        Command::Flush {
            rate,
            duration,
            step,
        } => {
            let r = cmd_flush(&config, rate, duration, step)?;
            print_flush(&r);
            ensure_dir(&out_dir)?;
            write_flush(&r, &out_dir, format)?
        }
        Command::Sweep => {
            let outcome = cmd_sweep(&config, &out_dir, format)?;
            print_sweep(&outcome);
            let failed = outcome.failed_cases();
            if failed > 0 {
                eprintln!("{failed} case(s) failed to solve");
                return Ok(2);
            }
            return Ok(0);
        }
        Command::Reel {
            products,
            water_depth,
            core_in,
            width_in,
            stack_in,
        } => {
            let inline = core_in.map(|c| DrumGeometry {
                core_diameter_in: c,
                drum_width_in: width_in.unwrap_or(0.0),
                stack_height_in: stack_in.unwrap_or(0.0),
            });
            let t = cmd_reel(&config, &products, water_depth, inline)?;
            print_reel(&t);
            ensure_dir(&out_dir)?;
            write_reel(&t, &out_dir, format)?
        }
        Command::Compare => {
            let r = cmd_compare(&config)?;
            print_compare(&r);
            ensure_dir(&out_dir)?;
            write_compare(&r, &out_dir, format)?
        }
        Command::Fit {
            curve,
            rate,
            volume,
        } => {
            let r = cmd_fit(&config, &curve, rate, volume)?;
            print_fit(&r);
            ensure_dir(&out_dir)?;
            write_fit(&r, &out_dir, format)?
        }
    };
    println!("wrote {}", written.display());
    Ok(0)
}
