//! Subcommand implementations. Experiments run through the library; this
//! module handles argument resolution, file output, and console summaries.
//! All file writes happen sequentially from this single module so outputs
//! land in a stable order.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use hetnet_core::calibration::{
    balanced_threshold_csv, find_balanced_threshold, grid_range, sweep_load_energy,
    sweep_r_handoff, sweep_threshold, BalancedThreshold, ScenarioConfig, SweepResult,
};
use hetnet_core::ctmc::{
    build_generator, build_state_space_with_ceiling, evaluate_metrics, solve_steady_state,
    ChainMetrics, TrafficModel,
};
use hetnet_core::deployment::TriggerSamples;
use hetnet_core::des::{self, ArrivalKind, AssignmentMode, SimConfig, SimStats};
use hetnet_core::policy::{PerClass, PolicyKind};
use hetnet_core::radio::rss_macro;

use crate::config::{ExperimentConfig, Manifest};
use crate::reference;
use crate::{ArrivalArg, CliError, FormatArg, SweepKind};

pub struct Context {
    pub config: ExperimentConfig,
    pub out_dir: PathBuf,
    pub format: FormatArg,
}

impl Context {
    fn ensure_out(&self) -> Result<(), CliError> {
        fs::create_dir_all(&self.out_dir).map_err(CliError::io)
    }

    fn write(&self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        let path = self.out_dir.join(name);
        fs::write(&path, contents).map_err(CliError::io)?;
        Ok(path)
    }

    fn finish_manifest(
        &self,
        mut manifest: Manifest,
        name: &str,
        outputs: &[&Path],
    ) -> Result<(), CliError> {
        manifest.outputs = outputs
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        let path = self.write(name, &manifest.to_json())?;
        println!("manifest: {}", path.display());
        Ok(())
    }
}

fn arg_list(pairs: &[(&str, String)]) -> Vec<String> {
    pairs
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect()
}

/// Balanced-threshold search over one radius or the configured grid.
pub fn calibrate(ctx: &Context, radius: Option<f64>, tol_db: Option<f64>) -> Result<(), CliError> {
    let scenario = ctx.config.scenario()?;
    let tol = tol_db.unwrap_or(ctx.config.sweep.balanced_tol_db);
    let radii = match radius {
        Some(r) => {
            if r <= 0.0 || r >= scenario.macro_radius_m {
                return Err(CliError::config(format!(
                    "radius {r} m must lie in (0, {}) m",
                    scenario.macro_radius_m
                )));
            }
            vec![r]
        }
        None => grid_range(
            ctx.config.sweep.calibrate_r_start_m,
            ctx.config.sweep.calibrate_r_stop_m,
            ctx.config.sweep.calibrate_r_step_m,
        )?,
    };

    ctx.ensure_out()?;
    let mut rows: Vec<BalancedThreshold> = Vec::with_capacity(radii.len());
    println!(
        "{:>10} {:>16} {:>8} {:>11} {:>11}",
        "radius_m", "threshold_dbm", "clamped", "macro_load", "femto_load"
    );
    for &r in &radii {
        let row = find_balanced_threshold(r, &scenario, tol)?;
        println!(
            "{:>10} {:>16.2} {:>8} {:>11.4} {:>11.4}",
            r, row.threshold_dbm, row.clamped, row.macro_load, row.femto_load
        );
        for w in &row.warnings {
            eprintln!("warning: R={r}: {w}");
        }
        rows.push(row);
    }

    let mut outputs: Vec<PathBuf> = Vec::new();
    if ctx.format.csv() {
        outputs.push(ctx.write("calibrate.csv", &balanced_threshold_csv(&rows))?);
    }
    if ctx.format.json() {
        outputs.push(ctx.write(
            "calibrate.json",
            &serde_json::to_string_pretty(&rows).expect("rows serialize"),
        )?);
    }
    for p in &outputs {
        println!("wrote: {}", p.display());
    }
    let manifest = Manifest::new(
        "calibrate",
        arg_list(&[
            ("radius", format!("{radius:?}")),
            ("tol_db", format!("{tol}")),
        ]),
        &ctx.config,
    );
    ctx.finish_manifest(
        manifest,
        "calibrate.manifest.json",
        &outputs.iter().map(|p| p.as_path()).collect::<Vec<_>>(),
    )
}

fn run_sweep(
    ctx: &Context,
    kind: SweepKind,
    radius: Option<f64>,
    threshold: Option<f64>,
) -> Result<(SweepResult, &'static str), CliError> {
    let scenario = ctx.config.scenario()?;
    let sweep_cfg = &ctx.config.sweep;
    match kind {
        SweepKind::Threshold => {
            let r = radius.unwrap_or(scenario.exclusion_radius_m);
            let grid = grid_range(
                sweep_cfg.threshold_start_dbm,
                sweep_cfg.threshold_stop_dbm,
                sweep_cfg.threshold_step_db,
            )?;
            Ok((sweep_threshold(r, &grid, &scenario)?, "threshold_sweep"))
        }
        SweepKind::Radius => {
            let grid = grid_range(sweep_cfg.r_start_m, sweep_cfg.r_stop_m, sweep_cfg.r_step_m)?;
            let thr = threshold.unwrap_or(scenario.radio.macro_rss_threshold_dbm);
            Ok((
                sweep_r_handoff(&grid, &PolicyKind::ALL, thr, &scenario)?,
                "radius_sweep",
            ))
        }
        SweepKind::Load => Ok((
            sweep_load_energy(&sweep_cfg.rho_grid, &PolicyKind::ALL, &scenario)?,
            "load_sweep",
        )),
    }
}

pub fn sweep(
    ctx: &Context,
    kind: SweepKind,
    radius: Option<f64>,
    threshold: Option<f64>,
) -> Result<(), CliError> {
    ctx.ensure_out()?;
    let (result, name) = run_sweep(ctx, kind, radius, threshold)?;

    let failed = result.rows.iter().filter(|r| r.error.is_some()).count();
    println!(
        "{name}: {} grid points, {} rows, {failed} failed",
        result.grid.len(),
        result.rows.len()
    );
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }

    let mut outputs: Vec<PathBuf> = Vec::new();
    if ctx.format.csv() {
        outputs.push(ctx.write(&format!("{name}.csv"), &result.to_csv())?);
    }
    if ctx.format.json() {
        outputs.push(ctx.write(
            &format!("{name}.json"),
            &serde_json::to_string_pretty(&result).expect("sweep serializes"),
        )?);
    }
    for p in &outputs {
        println!("wrote: {}", p.display());
    }

    let manifest = Manifest::new(
        "sweep",
        arg_list(&[
            ("kind", format!("{kind:?}").to_lowercase()),
            ("radius", format!("{radius:?}")),
            ("threshold", format!("{threshold:?}")),
        ]),
        &ctx.config,
    );
    ctx.finish_manifest(
        manifest,
        &format!("{name}.manifest.json"),
        &outputs.iter().map(|p| p.as_path()).collect::<Vec<_>>(),
    )
}

/// Estimated per-class handoff fractions for the configured scenario.
fn handoff_fractions(scenario: &ScenarioConfig) -> Result<PerClass<f64>, CliError> {
    let deployment = scenario
        .deployment_for(scenario.exclusion_radius_m)
        .map_err(|e| CliError::config(e.to_string()))?;
    let samples = TriggerSamples::generate(
        &deployment,
        &scenario.radio,
        &scenario.velocity,
        scenario.n_samples,
        scenario.seed,
    );
    Ok(samples.fractions_per_class(&scenario.radio, &scenario.policy))
}

fn solve_chain(
    scenario: &ScenarioConfig,
    traffic: &TrafficModel,
) -> Result<ChainMetrics, CliError> {
    let space = build_state_space_with_ceiling(
        scenario.capacities,
        &scenario.policy,
        scenario.solver.state_ceiling,
    )
    .map_err(|e| CliError::config(e.to_string()))?;
    let q = build_generator(&space, traffic).map_err(|e| CliError::numeric(e.to_string()))?;
    let ss =
        solve_steady_state(&q, &scenario.solver).map_err(|e| CliError::numeric(e.to_string()))?;
    Ok(evaluate_metrics(&space, traffic, &ss))
}

pub fn simulate(
    ctx: &Context,
    arrivals: ArrivalArg,
    horizon: Option<f64>,
    warmup: Option<f64>,
    geometric: bool,
    trace: bool,
) -> Result<(), CliError> {
    let scenario = ctx.config.scenario()?;
    let horizon = horizon.unwrap_or(ctx.config.simulate.horizon);
    let mut warmup = warmup.unwrap_or(ctx.config.simulate.warmup);
    if warmup == 0.0 {
        warmup = horizon * 0.1;
    }
    if !(horizon > warmup && warmup > 0.0) {
        return Err(CliError::config(format!(
            "horizon ({horizon}) must exceed warmup ({warmup}), both positive"
        )));
    }

    let arrival_kind = match arrivals {
        ArrivalArg::Exponential => ArrivalKind::Exponential,
        ArrivalArg::Pareto => {
            let shape = ctx.config.simulate.pareto_shape;
            if shape <= 1.0 {
                return Err(CliError::config(format!(
                    "Pareto shape must exceed 1 for a finite mean, got {shape}"
                )));
            }
            ArrivalKind::Pareto { shape_alpha: shape }
        }
    };

    let p_ho = handoff_fractions(&scenario)?;
    let traffic = TrafficModel::new(
        PerClass::uniform(scenario.arrival_rate),
        PerClass::uniform(scenario.service_rate),
        p_ho,
    )
    .map_err(|e| CliError::config(e.to_string()))?;

    let assignment = if geometric {
        AssignmentMode::Geometric {
            deployment: scenario
                .deployment_for(scenario.exclusion_radius_m)
                .map_err(|e| CliError::config(e.to_string()))?,
            radio: scenario.radio,
            policy: scenario.policy,
            velocity: scenario.velocity,
        }
    } else {
        AssignmentMode::Probability
    };

    let sim_config = SimConfig {
        capacities: scenario.capacities,
        traffic,
        arrivals: arrival_kind,
        assignment,
        horizon,
        warmup,
        seed: scenario.seed,
    };

    ctx.ensure_out()?;
    let mut outputs: Vec<PathBuf> = Vec::new();
    let stats = if trace {
        let trace_path = ctx.out_dir.join("simulate_trace.jsonl");
        let mut file = std::io::BufWriter::new(fs::File::create(&trace_path).map_err(CliError::io)?);
        let stats = des::simulate_traced(&sim_config, &mut |rec| {
            let line = serde_json::to_string(&rec).expect("trace serializes");
            let _ = writeln!(file, "{line}");
        })?;
        file.flush().map_err(CliError::io)?;
        outputs.push(trace_path);
        stats
    } else {
        des::simulate(&sim_config)?
    };

    println!("events: {}", stats.events);
    println!(
        "E[n_h] = {:.4} +- {:.4}",
        stats.n_h.mean, stats.n_h.half_width
    );
    println!(
        "macro load = {:.4} +- {:.4}, femto load = {:.4} +- {:.4}",
        stats.macro_load.mean,
        stats.macro_load.half_width,
        stats.femto_load.mean,
        stats.femto_load.half_width
    );

    print_chain_comparison(&scenario, &traffic_of(&sim_config), &stats, arrivals)?;

    outputs.push(ctx.write("simulate_stats.json", &stats.to_json())?);
    for p in &outputs {
        println!("wrote: {}", p.display());
    }
    let manifest = Manifest::new(
        "simulate",
        arg_list(&[
            ("arrivals", format!("{arrivals:?}").to_lowercase()),
            ("horizon", format!("{horizon}")),
            ("warmup", format!("{warmup}")),
            ("geometric", format!("{geometric}")),
        ]),
        &ctx.config,
    );
    ctx.finish_manifest(
        manifest,
        "simulate.manifest.json",
        &outputs.iter().map(|p| p.as_path()).collect::<Vec<_>>(),
    )
}

fn traffic_of(config: &SimConfig) -> TrafficModel {
    config.traffic
}

/// Print the analytical-vs-simulated table. With exponential arrivals the
/// two must agree; with Pareto arrivals the deltas quantify how far the
/// heavy-tailed assumption moves the metrics (reported, not asserted).
fn print_chain_comparison(
    scenario: &ScenarioConfig,
    traffic: &TrafficModel,
    stats: &SimStats,
    arrivals: ArrivalArg,
) -> Result<(), CliError> {
    let metrics = solve_chain(scenario, traffic)?;
    let label = match arrivals {
        ArrivalArg::Exponential => "chain vs simulation (same model; deltas are noise)",
        ArrivalArg::Pareto => "chain vs Pareto simulation (deviation from the Markov model)",
    };
    println!("\n{label}:");
    println!(
        "{:>12} {:>12} {:>12} {:>9}",
        "metric", "chain", "simulated", "delta%"
    );
    let row = |name: &str, a: f64, b: f64| {
        let delta = if a.abs() > 1e-12 {
            100.0 * (b - a) / a
        } else {
            0.0
        };
        println!("{name:>12} {a:>12.5} {b:>12.5} {delta:>8.2}%");
    };
    row("E[n_h]", metrics.ho_prob, stats.n_h.mean);
    row("macro_load", metrics.macro_load, stats.macro_load.mean);
    row("femto_load", metrics.femto_load, stats.femto_load.mean);
    row("occupancy", metrics.expected_occupancy, stats.occupancy.mean);
    Ok(())
}

pub fn energy(ctx: &Context) -> Result<(), CliError> {
    ctx.ensure_out()?;
    let scenario = ctx.config.scenario()?;
    let result = sweep_load_energy(&ctx.config.sweep.rho_grid, &PolicyKind::ALL, &scenario)?;

    println!(
        "monthly femto energy, conventional mode: {:.5} kWh",
        hetnet_core::energy::monthly_energy_conventional(&scenario.energy)
    );
    println!(
        "largest possible active-idle savings with these powers: {:.1}%",
        scenario.energy.max_savings_percent()
    );
    println!(
        "\n{:>6} {:>14} {:>18} {:>12} {:>14} {:>16}",
        "rho", "policy", "e_active_idle_kwh", "savings_%", "domestic_cost", "commercial_cost"
    );
    for row in &result.rows {
        if let Some(e) = &row.energy {
            println!(
                "{:>6} {:>14} {:>18.5} {:>12.2} {:>14.5} {:>16.5}{}",
                row.value,
                row.policy.name(),
                e.e_active_idle_kwh,
                e.savings_percent,
                e.domestic_cost,
                e.commercial_cost,
                if e.prob_active_clamped {
                    "  (active probability clamped)"
                } else {
                    ""
                }
            );
        }
    }

    let mut outputs: Vec<PathBuf> = Vec::new();
    if ctx.format.csv() {
        outputs.push(ctx.write("energy.csv", &result.to_csv())?);
    }
    if ctx.format.json() {
        outputs.push(ctx.write(
            "energy.json",
            &serde_json::to_string_pretty(&result).expect("sweep serializes"),
        )?);
    }
    for p in &outputs {
        println!("wrote: {}", p.display());
    }
    let manifest = Manifest::new("energy", Vec::new(), &ctx.config);
    ctx.finish_manifest(
        manifest,
        "energy.manifest.json",
        &outputs.iter().map(|p| p.as_path()).collect::<Vec<_>>(),
    )
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

#[derive(Debug, serde::Serialize)]
struct ReportCheck {
    name: String,
    status: &'static str, // "pass" | "fail" | "info"
    details: String,
}

#[derive(Debug, serde::Serialize)]
struct Report {
    checks: Vec<ReportCheck>,
    balanced_thresholds: Vec<BalancedThreshold>,
    savings_by_policy: Vec<(String, Vec<(f64, f64)>)>,
    pareto_deviation_percent: Option<f64>,
}

fn push_check(checks: &mut Vec<ReportCheck>, name: &str, pass: bool, details: String) {
    let status = if pass { "pass" } else { "fail" };
    println!("[{status}] {name}: {details}");
    checks.push(ReportCheck {
        name: name.to_string(),
        status,
        details,
    });
}

fn push_info(checks: &mut Vec<ReportCheck>, name: &str, details: String) {
    println!("[info] {name}: {details}");
    checks.push(ReportCheck {
        name: name.to_string(),
        status: "info",
        details,
    });
}

/// Full study: radio reference points, balanced-threshold table, threshold
/// saturation, policy orderings, energy trends, and the simulator
/// cross-check, each compared against the published reference values.
pub fn report(ctx: &Context) -> Result<(), CliError> {
    ctx.ensure_out()?;
    let scenario = ctx.config.scenario()?;
    let mut checks: Vec<ReportCheck> = Vec::new();

    println!("== radio model ==");
    let edge = rss_macro(&scenario.radio, scenario.macro_radius_m)
        .map_err(|e| CliError::config(e.to_string()))?;
    push_check(
        &mut checks,
        "macro edge RSS",
        (edge - reference::EDGE_RSS_DBM).abs() <= 0.1,
        format!(
            "computed {edge:.2} dBm at {} m vs reference {} dBm",
            scenario.macro_radius_m,
            reference::EDGE_RSS_DBM
        ),
    );
    let saturation = rss_macro(&scenario.radio, scenario.exclusion_radius_m)
        .map_err(|e| CliError::config(e.to_string()))?;
    push_info(
        &mut checks,
        "saturation threshold discrepancy",
        format!(
            "analytic macro RSS at the {} m exclusion radius is {saturation:.2} dBm; \
             the reference text placed load saturation at {} dBm ({:.1} dB apart). \
             The analytic value is authoritative here.",
            scenario.exclusion_radius_m,
            reference::SATURATION_THRESHOLD_DBM,
            (saturation - reference::SATURATION_THRESHOLD_DBM).abs()
        ),
    );

    println!("\n== balanced thresholds ==");
    let at_100 = find_balanced_threshold(100.0, &scenario, ctx.config.sweep.balanced_tol_db)?;
    push_info(
        &mut checks,
        "balanced threshold R=100",
        format!(
            "computed {:.2} dBm vs reference {} dBm (delta {:+.2} dB)",
            at_100.threshold_dbm,
            reference::BALANCED_THRESHOLD_100M_DBM,
            at_100.threshold_dbm - reference::BALANCED_THRESHOLD_100M_DBM
        ),
    );
    let radii = grid_range(
        ctx.config.sweep.calibrate_r_start_m,
        ctx.config.sweep.calibrate_r_stop_m,
        ctx.config.sweep.calibrate_r_step_m,
    )?;
    let mut balanced: Vec<BalancedThreshold> = Vec::new();
    for &r in &radii {
        balanced.push(find_balanced_threshold(
            r,
            &scenario,
            ctx.config.sweep.balanced_tol_db,
        )?);
    }
    for (row, (ref_r, ref_thr)) in balanced.iter().zip(reference::BALANCED_THRESHOLDS) {
        if row.exclusion_radius_m == ref_r {
            let delta = row.threshold_dbm - ref_thr;
            let within = delta.abs() <= reference::BALANCED_THRESHOLD_TOL_DB;
            push_info(
                &mut checks,
                &format!("balanced threshold R={ref_r}"),
                format!(
                    "computed {:.2} dBm vs reference {ref_thr} dBm (delta {delta:+.2} dB{}{})",
                    row.threshold_dbm,
                    if within { ", within tolerance" } else { "" },
                    if row.clamped { ", clamped to edge RSS" } else { "" }
                ),
            );
        }
    }
    let unclamped: Vec<&BalancedThreshold> =
        balanced.iter().filter(|b| !b.clamped).collect();
    let monotone = unclamped
        .windows(2)
        .all(|w| w[1].threshold_dbm <= w[0].threshold_dbm + 1e-9);
    push_check(
        &mut checks,
        "balanced threshold monotone in radius",
        monotone,
        format!(
            "{} unclamped radii, thresholds {:?}",
            unclamped.len(),
            unclamped
                .iter()
                .map(|b| (b.threshold_dbm * 100.0).round() / 100.0)
                .collect::<Vec<_>>()
        ),
    );
    for &r in &reference::CLAMPED_RADII_M {
        if let Some(row) = balanced.iter().find(|b| b.exclusion_radius_m == r) {
            push_check(
                &mut checks,
                &format!("clamp at R={r}"),
                row.clamped && (row.threshold_dbm - edge).abs() < 1e-9,
                format!(
                    "clamped={} threshold {:.2} dBm (edge RSS {:.2} dBm)",
                    row.clamped, row.threshold_dbm, edge
                ),
            );
        }
    }

    println!("\n== threshold sweep (saturation) ==");
    let thr_grid = grid_range(
        ctx.config.sweep.threshold_start_dbm,
        ctx.config.sweep.threshold_stop_dbm,
        ctx.config.sweep.threshold_step_db,
    )?;
    let thr_sweep = sweep_threshold(scenario.exclusion_radius_m, &thr_grid, &scenario)?;
    let fl_at = |thr: f64| -> Option<f64> {
        thr_sweep
            .rows
            .iter()
            .find(|r| (r.value - thr).abs() < 1e-9)
            .and_then(|r| r.metrics.as_ref())
            .map(|m| m.femto_load)
    };
    if let Some(fl) = fl_at(-100.0) {
        push_check(
            &mut checks,
            "zero femto load at -100 dBm",
            fl == 0.0,
            format!("femto load {fl}"),
        );
    }
    let saturated: Vec<f64> = thr_sweep
        .rows
        .iter()
        .filter(|r| r.value > saturation)
        .filter_map(|r| r.metrics.as_ref().map(|m| m.femto_load))
        .collect();
    if saturated.len() >= 2 {
        let spread = saturated.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - saturated.iter().cloned().fold(f64::INFINITY, f64::min);
        push_check(
            &mut checks,
            "load saturation above the exclusion-radius RSS",
            spread < 0.01,
            format!(
                "femto load spread {spread:.5} across {} thresholds above {saturation:.1} dBm",
                saturated.len()
            ),
        );
    }

    println!("\n== handoff policy comparison ==");
    let r_grid = grid_range(
        ctx.config.sweep.r_start_m,
        ctx.config.sweep.r_stop_m,
        ctx.config.sweep.r_step_m,
    )?;
    let r_sweep = sweep_r_handoff(&r_grid, &PolicyKind::ALL, -70.0, &scenario)?;
    let ho = |r: f64, kind: PolicyKind| -> Option<f64> {
        r_sweep
            .rows
            .iter()
            .find(|row| row.value == r && row.policy == kind)
            .and_then(|row| row.metrics.as_ref())
            .map(|m| m.ho_prob)
    };
    let mut ordered = true;
    let mut nonincreasing = true;
    for &r in &r_grid {
        let (c, s, h) = (
            ho(r, PolicyKind::Conventional).unwrap_or(f64::NAN),
            ho(r, PolicyKind::SoftQos).unwrap_or(f64::NAN),
            ho(r, PolicyKind::HardQos).unwrap_or(f64::NAN),
        );
        if !(h <= s + 1e-12 && s <= c + 1e-12) {
            ordered = false;
        }
    }
    for kind in PolicyKind::ALL {
        let curve: Vec<f64> = r_grid.iter().filter_map(|&r| ho(r, kind)).collect();
        if curve.windows(2).any(|w| w[1] > w[0] + 1e-9) {
            nonincreasing = false;
        }
    }
    push_check(
        &mut checks,
        "handoff ordering hard <= soft <= conventional",
        ordered,
        format!("checked {} radii at -70 dBm", r_grid.len()),
    );
    push_check(
        &mut checks,
        "handoff metric nonincreasing in radius",
        nonincreasing,
        format!("grid {:?} m", r_grid),
    );

    println!("\n== energy model ==");
    let load_sweep = sweep_load_energy(&ctx.config.sweep.rho_grid, &PolicyKind::ALL, &scenario)?;
    let e_conv = hetnet_core::energy::monthly_energy_conventional(&scenario.energy);
    push_check(
        &mut checks,
        "conventional monthly energy",
        (e_conv - 0.072).abs() < 1e-9 || scenario.energy.p_active_mw != 100.0,
        format!("{e_conv:.5} kWh/month"),
    );
    let e_idle = hetnet_core::energy::monthly_energy_active_idle(&scenario.energy, 0.0);
    push_info(
        &mut checks,
        "idle-floor monthly energy",
        format!("{e_idle:.5} kWh/month at zero activity"),
    );
    let max_savings = scenario.energy.max_savings_percent();
    let max_reference = reference::SAVINGS_HARD
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    push_info(
        &mut checks,
        "savings bound discrepancy",
        format!(
            "the energy equations bound savings at {max_savings:.1}% for the configured powers, \
             yet the reference table reports up to {max_reference}%; those published figures \
             cannot arise from the stated model, so only orderings and trends are reproduced"
        ),
    );

    let mut savings_by_policy: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    let mut orderings_ok = true;
    let mut trend_ok = true;
    for kind in PolicyKind::ALL {
        let series: Vec<(f64, f64)> = load_sweep
            .rows
            .iter()
            .filter(|row| row.policy == kind)
            .filter_map(|row| row.energy.as_ref().map(|e| (row.value, e.savings_percent)))
            .collect();
        if series.windows(2).any(|w| w[1].1 > w[0].1 + 1e-9) {
            trend_ok = false;
        }
        let reference_row: &[f64; 5] = match kind {
            PolicyKind::Conventional => &reference::SAVINGS_ACTIVE_IDLE,
            PolicyKind::SoftQos => &reference::SAVINGS_SOFT,
            PolicyKind::HardQos => &reference::SAVINGS_HARD,
        };
        let comparison: Vec<String> = series
            .iter()
            .filter_map(|&(rho, s)| {
                reference::SAVINGS_RHO_GRID
                    .iter()
                    .position(|&g| (g - rho).abs() < 1e-9)
                    .map(|i| format!("rho {rho}: {s:.1}% vs reference {}%", reference_row[i]))
            })
            .collect();
        push_info(
            &mut checks,
            &format!("savings vs reference ({})", kind.name()),
            comparison.join("; "),
        );
        savings_by_policy.push((kind.name().to_string(), series));
    }
    for &rho in &ctx.config.sweep.rho_grid {
        let s = |kind: PolicyKind| -> f64 {
            load_sweep
                .rows
                .iter()
                .find(|row| row.value == rho && row.policy == kind)
                .and_then(|row| row.energy.as_ref())
                .map(|e| e.savings_percent)
                .unwrap_or(f64::NAN)
        };
        if !(s(PolicyKind::HardQos) >= s(PolicyKind::SoftQos) - 1e-9
            && s(PolicyKind::SoftQos) >= s(PolicyKind::Conventional) - 1e-9)
        {
            orderings_ok = false;
        }
    }
    push_check(
        &mut checks,
        "savings ordering hard >= soft >= plain active-idle",
        orderings_ok,
        format!("checked load grid {:?}", ctx.config.sweep.rho_grid),
    );
    push_check(
        &mut checks,
        "savings nonincreasing in offered load",
        trend_ok,
        "per-policy savings decline as the load grows".to_string(),
    );

    println!("\n== simulator cross-check ==");
    let p_ho = handoff_fractions(&scenario)?;
    let traffic = TrafficModel::new(
        PerClass::uniform(scenario.arrival_rate),
        PerClass::uniform(scenario.service_rate),
        p_ho,
    )
    .map_err(|e| CliError::config(e.to_string()))?;
    let metrics = solve_chain(&scenario, &traffic)?;
    let sim_exp = des::simulate(&SimConfig {
        capacities: scenario.capacities,
        traffic,
        arrivals: ArrivalKind::Exponential,
        assignment: AssignmentMode::Probability,
        horizon: ctx.config.simulate.horizon,
        warmup: ctx.config.simulate.horizon * 0.1,
        seed: scenario.seed,
    })?;
    let rel = |a: f64, b: f64| (b - a).abs() / a.abs().max(1e-12);
    let agree = rel(metrics.ho_prob, sim_exp.n_h.mean) < 0.02
        && rel(metrics.macro_load, sim_exp.macro_load.mean) < 0.02
        && rel(metrics.femto_load, sim_exp.femto_load.mean) < 0.02;
    push_check(
        &mut checks,
        "chain vs exponential simulation within 2%",
        agree,
        format!(
            "E[n_h] {:.4}/{:.4}, macro {:.4}/{:.4}, femto {:.4}/{:.4} over {} events",
            metrics.ho_prob,
            sim_exp.n_h.mean,
            metrics.macro_load,
            sim_exp.macro_load.mean,
            metrics.femto_load,
            sim_exp.femto_load.mean,
            sim_exp.events
        ),
    );

    let sim_pareto = des::simulate(&SimConfig {
        capacities: scenario.capacities,
        traffic,
        arrivals: ArrivalKind::Pareto {
            shape_alpha: ctx.config.simulate.pareto_shape,
        },
        assignment: AssignmentMode::Probability,
        horizon: ctx.config.simulate.horizon,
        warmup: ctx.config.simulate.horizon * 0.1,
        seed: scenario.seed,
    })?;
    let pareto_dev = 100.0 * rel(metrics.ho_prob, sim_pareto.n_h.mean);
    push_info(
        &mut checks,
        "Pareto arrival deviation",
        format!(
            "with shape {} the heavy-tailed arrivals move E[n_h] by {pareto_dev:.2}% \
             relative to the Markov model (reported, not asserted)",
            ctx.config.simulate.pareto_shape
        ),
    );

    let failed = checks.iter().filter(|c| c.status == "fail").count();
    println!(
        "\nreport: {} checks, {failed} failed",
        checks.iter().filter(|c| c.status != "info").count()
    );

    let report = Report {
        checks,
        balanced_thresholds: balanced,
        savings_by_policy,
        pareto_deviation_percent: Some(pareto_dev),
    };
    let mut outputs: Vec<PathBuf> = Vec::new();
    outputs.push(ctx.write(
        "report.json",
        &serde_json::to_string_pretty(&report).expect("report serializes"),
    )?);
    if ctx.format.csv() {
        outputs.push(ctx.write("report_threshold_sweep.csv", &thr_sweep.to_csv())?);
        outputs.push(ctx.write("report_radius_sweep.csv", &r_sweep.to_csv())?);
        outputs.push(ctx.write("report_load_sweep.csv", &load_sweep.to_csv())?);
        outputs.push(ctx.write(
            "report_calibrate.csv",
            &balanced_threshold_csv(&report.balanced_thresholds),
        )?);
    }
    for p in &outputs {
        println!("wrote: {}", p.display());
    }
    let manifest = Manifest::new("report", Vec::new(), &ctx.config);
    ctx.finish_manifest(
        manifest,
        "report.manifest.json",
        &outputs.iter().map(|p| p.as_path()).collect::<Vec<_>>(),
    )?;

    if failed > 0 {
        return Err(CliError::numeric(format!("{failed} report checks failed")));
    }
    Ok(())
}
