//! Threshold sweeps, the balanced-threshold search, and the load/energy
//! study. Each sweep re-estimates the per-class handoff fractions, rebuilds
//! the chain, and records the stationary metrics per grid point.
//!
//! All Monte Carlo estimates within one sweep reuse a single sample table
//! (common random numbers), so the estimated handoff fraction is exactly
//! nondecreasing in the RSS threshold and bisection on the load gap is
//! well posed.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ctmc::{
    build_generator, build_state_space_with_ceiling, evaluate_metrics, solve_steady_state_with_guess,
    ChainMetrics, CtmcError, SolverOptions, StateSpace, TrafficModel,
};
use crate::deployment::{
    deploy_femtos, Deployment, DeploymentError, TriggerSamples, VelocityModel,
};
use crate::energy::{
    monthly_cost, monthly_energy_active_idle, monthly_energy_active_idle_raw_mws,
    monthly_energy_conventional, prob_active, savings_percent, EnergyError, EnergyParams,
    TariffCategory, TariffSchedule,
};
use crate::policy::{PerClass, Policy, PolicyKind};
use crate::radio::{rss_macro, RadioError, RadioParams};

#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error(transparent)]
    Radio(#[from] RadioError),
    #[error(transparent)]
    Deployment(#[from] DeploymentError),
    #[error(transparent)]
    Chain(#[from] CtmcError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error("invalid sweep grid: {0}")]
    InvalidGrid(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Full scenario description shared by every experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub radio: RadioParams,
    pub macro_radius_m: f64,
    pub exclusion_radius_m: f64,
    pub femto_radius_m: f64,
    /// Fixed femto count. When unset the count is proportional to the
    /// deployable annulus area via `area_per_femto_km2`.
    pub femto_count: Option<usize>,
    pub area_per_femto_km2: f64,
    pub capacities: [u32; 4],
    /// Arrival rate per class.
    pub arrival_rate: f64,
    /// Service rate per class.
    pub service_rate: f64,
    pub policy: Policy,
    pub velocity: VelocityModel,
    pub energy: EnergyParams,
    pub domestic_tariff: TariffSchedule,
    pub commercial_tariff: TariffSchedule,
    pub n_samples: usize,
    pub seed: u64,
    pub solver: SolverOptions,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            radio: RadioParams::default(),
            macro_radius_m: 1200.0,
            exclusion_radius_m: 100.0,
            femto_radius_m: 30.0,
            femto_count: Some(1000),
            area_per_femto_km2: 0.004,
            capacities: [3; 4],
            arrival_rate: 0.2,
            service_rate: 0.2,
            policy: Policy::conventional(),
            velocity: VelocityModel::default(),
            energy: EnergyParams::default(),
            domestic_tariff: TariffSchedule::flat(TariffCategory::Domestic, 5.0),
            commercial_tariff: TariffSchedule::flat(TariffCategory::Commercial, 7.5),
            n_samples: 100_000,
            seed: 7,
            solver: SolverOptions::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), CalibrationError> {
        self.radio.validate()?;
        self.energy.validate()?;
        self.domestic_tariff.validate()?;
        self.commercial_tariff.validate()?;
        if !(self.macro_radius_m > 0.0) {
            return Err(CalibrationError::InvalidConfig(format!(
                "macro radius must be positive, got {}",
                self.macro_radius_m
            )));
        }
        if self.exclusion_radius_m >= self.macro_radius_m || self.exclusion_radius_m < 0.0 {
            return Err(CalibrationError::InvalidConfig(format!(
                "exclusion radius {} m must lie in [0, {}) m",
                self.exclusion_radius_m, self.macro_radius_m
            )));
        }
        if !(self.arrival_rate > 0.0 && self.service_rate > 0.0) {
            return Err(CalibrationError::InvalidConfig(
                "arrival and service rates must be positive".into(),
            ));
        }
        if self.n_samples == 0 {
            return Err(CalibrationError::InvalidConfig(
                "n_samples must be at least 1".into(),
            ));
        }
        if !(self.area_per_femto_km2 > 0.0) {
            return Err(CalibrationError::InvalidConfig(
                "area_per_femto_km2 must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Femto count for a given exclusion radius: the fixed count when one is
    /// configured, otherwise proportional to the annulus area.
    pub fn femto_count_for(&self, exclusion_radius_m: f64) -> usize {
        match self.femto_count {
            Some(n) => n,
            None => {
                let annulus_km2 = std::f64::consts::PI
                    * (self.macro_radius_m * self.macro_radius_m
                        - exclusion_radius_m * exclusion_radius_m)
                    / 1.0e6;
                (annulus_km2 / self.area_per_femto_km2).round().max(0.0) as usize
            }
        }
    }

    pub fn deployment_for(
        &self,
        exclusion_radius_m: f64,
    ) -> Result<Deployment, DeploymentError> {
        let mut d = deploy_femtos(
            self.seed,
            self.macro_radius_m,
            exclusion_radius_m,
            self.femto_count_for(exclusion_radius_m),
        )?;
        d.femto_radius_m = self.femto_radius_m;
        Ok(d)
    }

    pub fn policy_with(&self, kind: PolicyKind) -> Policy {
        Policy {
            kind,
            velocity_threshold_kmh: self.policy.velocity_threshold_kmh,
        }
    }

    pub fn traffic_with(&self, p_ho: PerClass<f64>) -> Result<TrafficModel, CtmcError> {
        TrafficModel::new(
            PerClass::uniform(self.arrival_rate),
            PerClass::uniform(self.service_rate),
            p_ho,
        )
    }
}

/// Energy and cost figures attached to load-sweep rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyRow {
    pub prob_active: f64,
    pub prob_active_clamped: bool,
    pub e_active_idle_kwh: f64,
    pub e_conventional_kwh: f64,
    pub e_active_idle_raw_mws: f64,
    pub savings_percent: f64,
    pub domestic_cost: f64,
    pub domestic_cost_conventional: f64,
    pub domestic_profit_percent: f64,
    pub commercial_cost: f64,
    pub commercial_cost_conventional: f64,
    pub commercial_profit_percent: f64,
}

/// One grid point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub policy: PolicyKind,
    pub p_ho: Option<PerClass<f64>>,
    pub metrics: Option<ChainMetrics>,
    pub energy: Option<EnergyRow>,
    pub error: Option<String>,
}

/// Scenario echo recorded with every sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMeta {
    pub scenario: ScenarioConfig,
    pub exclusion_radius_m: f64,
    pub femto_count: usize,
    pub policies: Vec<PolicyKind>,
    pub fixed_threshold_dbm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// Name of the independent variable ("threshold_dbm", "exclusion_radius_m",
    /// or "rho").
    pub variable: String,
    pub grid: Vec<f64>,
    pub rows: Vec<SweepRow>,
    pub meta: SweepMeta,
    pub warnings: Vec<String>,
}

/// Stable CSV schema shared by every sweep kind; columns that do not apply
/// to a given sweep stay empty.
pub const SWEEP_CSV_HEADER: &str = "variable,value,policy,p_ho_ugs,p_ho_rtps,p_ho_nrtps,p_ho_be,\
ho_prob,macro_load,femto_load,empty_prob,blocking_ugs,blocking_rtps,blocking_nrtps,blocking_be,\
prob_active,prob_active_clamped,e_active_idle_kwh,e_conventional_kwh,e_active_idle_raw_mws,\
savings_percent,domestic_cost,domestic_cost_conventional,domestic_profit_percent,\
commercial_cost,commercial_cost_conventional,commercial_profit_percent,error";

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(SWEEP_CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!("{},{},{}", self.variable, row.value, row.policy));
            match &row.p_ho {
                Some(p) => {
                    for v in p.0 {
                        out.push_str(&format!(",{v}"));
                    }
                }
                None => out.push_str(",,,,"),
            }
            match &row.metrics {
                Some(m) => {
                    out.push_str(&format!(
                        ",{},{},{},{}",
                        m.ho_prob, m.macro_load, m.femto_load, m.empty_prob
                    ));
                    for b in m.blocking.0 {
                        out.push_str(&format!(",{b}"));
                    }
                }
                None => out.push_str(",,,,,,,,"),
            }
            match &row.energy {
                Some(e) => out.push_str(&format!(
                    ",{},{},{},{},{},{},{},{},{},{},{},{}",
                    e.prob_active,
                    e.prob_active_clamped,
                    e.e_active_idle_kwh,
                    e.e_conventional_kwh,
                    e.e_active_idle_raw_mws,
                    e.savings_percent,
                    e.domestic_cost,
                    e.domestic_cost_conventional,
                    e.domestic_profit_percent,
                    e.commercial_cost,
                    e.commercial_cost_conventional,
                    e.commercial_profit_percent
                )),
                None => out.push_str(",,,,,,,,,,,,"),
            }
            match &row.error {
                Some(e) => out.push_str(&format!(",{}", e.replace(',', ";"))),
                None => out.push(','),
            }
            out.push('\n');
        }
        out
    }
}

fn check_grid(grid: &[f64], what: &str) -> Result<(), CalibrationError> {
    if grid.is_empty() {
        return Err(CalibrationError::InvalidGrid(format!("{what} grid is empty")));
    }
    let ascending = grid.windows(2).all(|w| w[1] > w[0]);
    let descending = grid.windows(2).all(|w| w[1] < w[0]);
    if !(ascending || descending) {
        return Err(CalibrationError::InvalidGrid(format!(
            "{what} grid must be strictly monotone"
        )));
    }
    Ok(())
}

/// Inclusive arithmetic grid.
pub fn grid_range(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, CalibrationError> {
    if !(step > 0.0) || stop < start {
        return Err(CalibrationError::InvalidGrid(format!(
            "bad range {start}..{stop} step {step}"
        )));
    }
    let mut grid = Vec::new();
    let n = ((stop - start) / step).round() as usize + 1;
    for i in 0..n {
        let v = start + i as f64 * step;
        if v <= stop + 1e-9 {
            grid.push(v);
        }
    }
    Ok(grid)
}

/// Everything needed to evaluate one chain: fractions from the sample table,
/// then the stationary solve. Returns the fractions and metrics, enforcing
/// the load-conservation identity on every solve.
fn evaluate_point(
    config: &ScenarioConfig,
    space: &StateSpace,
    samples: &TriggerSamples,
    radio: &RadioParams,
    policy: &Policy,
    arrival_rate: f64,
    warm_start: Option<&[f64]>,
) -> Result<(PerClass<f64>, ChainMetrics, Vec<f64>), CalibrationError> {
    let p_ho = samples.fractions_per_class(radio, policy);
    let traffic = TrafficModel::new(
        PerClass::uniform(arrival_rate),
        PerClass::uniform(config.service_rate),
        p_ho,
    )?;
    let q = build_generator(space, &traffic)?;
    let ss = solve_steady_state_with_guess(&q, &config.solver, warm_start)?;
    let metrics = evaluate_metrics(space, &traffic, &ss);
    let conservation =
        (metrics.macro_load + metrics.femto_load + metrics.empty_prob - 1.0).abs();
    if conservation > 1e-9 {
        return Err(CalibrationError::InvalidConfig(format!(
            "load conservation violated by {conservation:e}"
        )));
    }
    Ok((p_ho, metrics, ss.pi))
}

/// Sweep the macro RSS threshold at a fixed exclusion radius, recording the
/// macro and femto load at every grid point.
pub fn sweep_threshold(
    exclusion_radius_m: f64,
    threshold_grid: &[f64],
    config: &ScenarioConfig,
) -> Result<SweepResult, CalibrationError> {
    config.validate()?;
    check_grid(threshold_grid, "threshold")?;
    if threshold_grid
        .iter()
        .any(|&t| !(-110.0..=-30.0).contains(&t))
    {
        return Err(CalibrationError::InvalidGrid(
            "thresholds must lie within [-110, -30] dBm".into(),
        ));
    }

    let deployment = config.deployment_for(exclusion_radius_m)?;
    let samples = TriggerSamples::generate(
        &deployment,
        &config.radio,
        &config.velocity,
        config.n_samples,
        config.seed,
    );
    let space = build_state_space_with_ceiling(config.capacities, &config.policy, config.solver.state_ceiling)?;

    let mut rows = Vec::with_capacity(threshold_grid.len());
    let mut warm: Option<Vec<f64>> = None;
    for &thr in threshold_grid {
        let radio = config.radio.with_threshold(thr);
        match evaluate_point(
            config,
            &space,
            &samples,
            &radio,
            &config.policy,
            config.arrival_rate,
            warm.as_deref(),
        ) {
            Ok((p_ho, metrics, pi)) => {
                warm = Some(pi);
                rows.push(SweepRow {
                    value: thr,
                    policy: config.policy.kind,
                    p_ho: Some(p_ho),
                    metrics: Some(metrics),
                    energy: None,
                    error: None,
                });
            }
            Err(e) => rows.push(SweepRow {
                value: thr,
                policy: config.policy.kind,
                p_ho: None,
                metrics: None,
                energy: None,
                error: Some(e.to_string()),
            }),
        }
    }

    let mut warnings = Vec::new();
    let loads: Vec<(f64, f64, f64)> = rows
        .iter()
        .filter_map(|r| r.metrics.as_ref().map(|m| (r.value, m.macro_load, m.femto_load)))
        .collect();
    for w in loads.windows(2) {
        let ((t0, ml0, fl0), (t1, ml1, fl1)) = (w[0], w[1]);
        if ml1 > ml0 + 1e-9 {
            warnings.push(format!("macro load rose from {ml0} to {ml1} between thresholds {t0} and {t1}"));
        }
        if fl1 < fl0 - 1e-9 {
            warnings.push(format!("femto load fell from {fl0} to {fl1} between thresholds {t0} and {t1}"));
        }
    }

    Ok(SweepResult {
        variable: "threshold_dbm".into(),
        grid: threshold_grid.to_vec(),
        rows,
        meta: SweepMeta {
            scenario: config.clone(),
            exclusion_radius_m,
            femto_count: deployment.femto_positions.len(),
            policies: vec![config.policy.kind],
            fixed_threshold_dbm: None,
        },
        warnings,
    })
}

/// Result of the balanced-threshold search for one exclusion radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalancedThreshold {
    pub exclusion_radius_m: f64,
    /// Threshold where macro and femto load meet, or the clamp floor.
    pub threshold_dbm: f64,
    /// Set when the load curves never cross and the search clamps to the
    /// macro-edge RSS.
    pub clamped: bool,
    pub macro_load: f64,
    pub femto_load: f64,
    /// Search bracket: RSS at the macro edge and at the exclusion radius.
    pub lower_bound_dbm: f64,
    pub upper_bound_dbm: f64,
    pub solver_evaluations: usize,
    pub warnings: Vec<String>,
}

/// Bisection on the load gap `g(thr) = ML(thr) - FL(thr)` over the bracket
/// `[rss_macro(macro radius), rss_macro(R)]`. The gap is positive at the
/// bottom of the bracket (no femto supply); if it stays positive at the top
/// the femto supply cannot match the macro load for any threshold, and the
/// search returns the macro-edge RSS with the clamp flag set.
pub fn find_balanced_threshold(
    exclusion_radius_m: f64,
    config: &ScenarioConfig,
    tol_db: f64,
) -> Result<BalancedThreshold, CalibrationError> {
    config.validate()?;
    if !(tol_db > 0.0) {
        return Err(CalibrationError::InvalidConfig(format!(
            "tolerance must be positive, got {tol_db} dB"
        )));
    }
    if exclusion_radius_m >= config.macro_radius_m || exclusion_radius_m <= 0.0 {
        return Err(CalibrationError::InvalidConfig(format!(
            "exclusion radius {exclusion_radius_m} m must lie in (0, {}) m",
            config.macro_radius_m
        )));
    }

    let lower = rss_macro(&config.radio, config.macro_radius_m)?;
    let upper = rss_macro(&config.radio, exclusion_radius_m)?;

    let deployment = config.deployment_for(exclusion_radius_m)?;
    let samples = TriggerSamples::generate(
        &deployment,
        &config.radio,
        &config.velocity,
        config.n_samples,
        config.seed,
    );
    let space = build_state_space_with_ceiling(config.capacities, &config.policy, config.solver.state_ceiling)?;

    let mut evaluations = 0usize;
    let mut warm: Option<Vec<f64>> = None;
    let mut gap_at = |thr: f64, warm: &mut Option<Vec<f64>>| -> Result<(f64, f64, f64), CalibrationError> {
        let radio = config.radio.with_threshold(thr);
        let (_, metrics, pi) = evaluate_point(
            config,
            &space,
            &samples,
            &radio,
            &config.policy,
            config.arrival_rate,
            warm.as_deref(),
        )?;
        *warm = Some(pi);
        evaluations += 1;
        Ok((
            metrics.macro_load - metrics.femto_load,
            metrics.macro_load,
            metrics.femto_load,
        ))
    };

    let mut warnings = Vec::new();
    let (g_lo, _, fl_lo) = gap_at(lower, &mut warm)?;
    if g_lo < 0.0 {
        warnings.push(format!(
            "load gap already negative ({g_lo}) at the macro-edge threshold; \
             femto load {fl_lo} exceeds macro load at the bottom of the bracket"
        ));
    }
    let (g_hi, ml_hi, fl_hi) = gap_at(upper, &mut warm)?;

    if g_hi > 0.0 {
        // No crossing: femto supply insufficient for FL to reach ML.
        return Ok(BalancedThreshold {
            exclusion_radius_m,
            threshold_dbm: lower,
            clamped: true,
            macro_load: ml_hi,
            femto_load: fl_hi,
            lower_bound_dbm: lower,
            upper_bound_dbm: upper,
            solver_evaluations: evaluations,
            warnings,
        });
    }

    let (mut lo, mut hi) = (lower, upper);
    while hi - lo > tol_db {
        let mid = 0.5 * (lo + hi);
        let (g_mid, _, _) = gap_at(mid, &mut warm)?;
        if g_mid > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let solution = 0.5 * (lo + hi);
    let (gap, ml, fl) = gap_at(solution, &mut warm)?;
    if gap.abs() > 0.05 {
        warnings.push(format!(
            "load gap {gap} at the returned threshold exceeds the expected \
             bisection resolution; the gap may be non-monotone at this geometry"
        ));
    }

    Ok(BalancedThreshold {
        exclusion_radius_m,
        threshold_dbm: solution,
        clamped: false,
        macro_load: ml,
        femto_load: fl,
        lower_bound_dbm: lower,
        upper_bound_dbm: upper,
        solver_evaluations: evaluations,
        warnings,
    })
}

/// CSV for a balanced-threshold table, one row per exclusion radius.
pub fn balanced_threshold_csv(rows: &[BalancedThreshold]) -> String {
    let mut out = String::from(
        "exclusion_radius_m,balanced_threshold_dbm,clamped,macro_load,femto_load,\
lower_bound_dbm,upper_bound_dbm\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.exclusion_radius_m,
            r.threshold_dbm,
            r.clamped,
            r.macro_load,
            r.femto_load,
            r.lower_bound_dbm,
            r.upper_bound_dbm
        ));
    }
    out
}

/// Handoff metric versus exclusion radius at a fixed threshold, one curve
/// per policy.
pub fn sweep_r_handoff(
    r_grid: &[f64],
    policies: &[PolicyKind],
    fixed_threshold_dbm: f64,
    config: &ScenarioConfig,
) -> Result<SweepResult, CalibrationError> {
    config.validate()?;
    check_grid(r_grid, "exclusion radius")?;
    if policies.is_empty() {
        return Err(CalibrationError::InvalidConfig("no policies given".into()));
    }
    if !(-110.0..=-30.0).contains(&fixed_threshold_dbm) {
        return Err(CalibrationError::InvalidGrid(
            "threshold must lie within [-110, -30] dBm".into(),
        ));
    }
    if r_grid
        .iter()
        .any(|&r| r <= 0.0 || r >= config.macro_radius_m)
    {
        return Err(CalibrationError::InvalidGrid(format!(
            "exclusion radii must lie in (0, {}) m",
            config.macro_radius_m
        )));
    }

    let radio = config.radio.with_threshold(fixed_threshold_dbm);
    let mut rows = Vec::with_capacity(r_grid.len() * policies.len());
    let mut femto_count = 0usize;
    for &r in r_grid {
        let deployment = config.deployment_for(r)?;
        femto_count = deployment.femto_positions.len();
        let samples = TriggerSamples::generate(
            &deployment,
            &radio,
            &config.velocity,
            config.n_samples,
            config.seed,
        );
        for &kind in policies {
            let policy = config.policy_with(kind);
            let space = build_state_space_with_ceiling(config.capacities, &policy, config.solver.state_ceiling)?;
            match evaluate_point(
                config,
                &space,
                &samples,
                &radio,
                &policy,
                config.arrival_rate,
                None,
            ) {
                Ok((p_ho, metrics, _)) => rows.push(SweepRow {
                    value: r,
                    policy: kind,
                    p_ho: Some(p_ho),
                    metrics: Some(metrics),
                    energy: None,
                    error: None,
                }),
                Err(e) => rows.push(SweepRow {
                    value: r,
                    policy: kind,
                    p_ho: None,
                    metrics: None,
                    energy: None,
                    error: Some(e.to_string()),
                }),
            }
        }
    }

    Ok(SweepResult {
        variable: "exclusion_radius_m".into(),
        grid: r_grid.to_vec(),
        rows,
        meta: SweepMeta {
            scenario: config.clone(),
            exclusion_radius_m: f64::NAN,
            femto_count,
            policies: policies.to_vec(),
            fixed_threshold_dbm: Some(fixed_threshold_dbm),
        },
        warnings: Vec::new(),
    })
}

/// Energy and cost versus offered load, one set of rows per policy. The
/// geometry (and so the handoff fractions) is fixed; the arrival rates scale
/// as `rho * mu`.
pub fn sweep_load_energy(
    rho_grid: &[f64],
    policies: &[PolicyKind],
    config: &ScenarioConfig,
) -> Result<SweepResult, CalibrationError> {
    config.validate()?;
    check_grid(rho_grid, "rho")?;
    if rho_grid.iter().any(|&r| !(r > 0.0)) {
        return Err(CalibrationError::InvalidGrid(
            "offered load values must be positive".into(),
        ));
    }
    if policies.is_empty() {
        return Err(CalibrationError::InvalidConfig("no policies given".into()));
    }

    let deployment = config.deployment_for(config.exclusion_radius_m)?;
    let samples = TriggerSamples::generate(
        &deployment,
        &config.radio,
        &config.velocity,
        config.n_samples,
        config.seed,
    );

    let e_conv = monthly_energy_conventional(&config.energy);
    let domestic_conv = monthly_cost(e_conv, &config.domestic_tariff);
    let commercial_conv = monthly_cost(e_conv, &config.commercial_tariff);

    let mut rows = Vec::with_capacity(rho_grid.len() * policies.len());
    for &kind in policies {
        let policy = config.policy_with(kind);
        let space = build_state_space_with_ceiling(config.capacities, &policy, config.solver.state_ceiling)?;
        let mut warm: Option<Vec<f64>> = None;
        for &rho in rho_grid {
            let arrival_rate = rho * config.service_rate;
            match evaluate_point(
                config,
                &space,
                &samples,
                &config.radio,
                &policy,
                arrival_rate,
                warm.as_deref(),
            ) {
                Ok((p_ho, metrics, pi)) => {
                    warm = Some(pi);
                    let pa = prob_active(rho, metrics.ho_prob);
                    let e_ai = monthly_energy_active_idle(&config.energy, pa.value);
                    let row = EnergyRow {
                        prob_active: pa.value,
                        prob_active_clamped: pa.clamped,
                        e_active_idle_kwh: e_ai,
                        e_conventional_kwh: e_conv,
                        e_active_idle_raw_mws: monthly_energy_active_idle_raw_mws(
                            &config.energy,
                            pa.value,
                        ),
                        savings_percent: savings_percent(e_ai, e_conv)?,
                        domestic_cost: monthly_cost(e_ai, &config.domestic_tariff),
                        domestic_cost_conventional: domestic_conv,
                        domestic_profit_percent: 100.0
                            * (1.0 - monthly_cost(e_ai, &config.domestic_tariff) / domestic_conv),
                        commercial_cost: monthly_cost(e_ai, &config.commercial_tariff),
                        commercial_cost_conventional: commercial_conv,
                        commercial_profit_percent: 100.0
                            * (1.0
                                - monthly_cost(e_ai, &config.commercial_tariff) / commercial_conv),
                    };
                    rows.push(SweepRow {
                        value: rho,
                        policy: kind,
                        p_ho: Some(p_ho),
                        metrics: Some(metrics),
                        energy: Some(row),
                        error: None,
                    });
                }
                Err(e) => rows.push(SweepRow {
                    value: rho,
                    policy: kind,
                    p_ho: None,
                    metrics: None,
                    energy: None,
                    error: Some(e.to_string()),
                }),
            }
        }
    }

    Ok(SweepResult {
        variable: "rho".into(),
        grid: rho_grid.to_vec(),
        rows,
        meta: SweepMeta {
            scenario: config.clone(),
            exclusion_radius_m: config.exclusion_radius_m,
            femto_count: deployment.femto_positions.len(),
            policies: policies.to_vec(),
            fixed_threshold_dbm: Some(config.radio.macro_rss_threshold_dbm),
        },
        warnings: Vec::new(),
    })
}
