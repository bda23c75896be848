//! Experiment configuration: a sectioned TOML file whose defaults reproduce
//! the reference simulation setup. Unknown keys are rejected and the
//! resolved configuration round-trips losslessly.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use hetnet_core::calibration::ScenarioConfig;
use hetnet_core::ctmc::SolverOptions;
use hetnet_core::deployment::VelocityModel;
use hetnet_core::energy::{EnergyParams, TariffCategory, TariffSchedule};
use hetnet_core::policy::{Policy, PolicyKind};
use hetnet_core::radio::RadioParams;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub radio: RadioSection,
    pub deployment: DeploymentSection,
    pub traffic: TrafficSection,
    pub policy: PolicySection,
    pub energy: EnergySection,
    pub tariff: TariffSection,
    pub solver: SolverSection,
    pub sampling: SamplingSection,
    pub sweep: SweepSection,
    pub simulate: SimulateSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 7,
            radio: RadioSection::default(),
            deployment: DeploymentSection::default(),
            traffic: TrafficSection::default(),
            policy: PolicySection::default(),
            energy: EnergySection::default(),
            tariff: TariffSection::default(),
            solver: SolverSection::default(),
            sampling: SamplingSection::default(),
            sweep: SweepSection::default(),
            simulate: SimulateSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadioSection {
    pub macro_tx_power_dbm: f64,
    pub femto_tx_power_dbm: f64,
    pub wall_loss_db: f64,
    pub hysteresis_db: f64,
    pub macro_rss_threshold_dbm: f64,
}

impl Default for RadioSection {
    fn default() -> Self {
        let r = RadioParams::default();
        RadioSection {
            macro_tx_power_dbm: r.macro_tx_power_dbm,
            femto_tx_power_dbm: r.femto_tx_power_dbm,
            wall_loss_db: r.wall_loss_db,
            hysteresis_db: r.hysteresis_db,
            macro_rss_threshold_dbm: r.macro_rss_threshold_dbm,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeploymentSection {
    pub macro_radius_m: f64,
    pub exclusion_radius_m: f64,
    pub femto_radius_m: f64,
    /// Fixed femto count; unset derives the count from `area_per_femto_km2`.
    pub femto_count: Option<usize>,
    pub area_per_femto_km2: f64,
}

impl Default for DeploymentSection {
    fn default() -> Self {
        DeploymentSection {
            macro_radius_m: 1200.0,
            exclusion_radius_m: 100.0,
            femto_radius_m: 30.0,
            femto_count: Some(1000),
            area_per_femto_km2: 0.004,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrafficSection {
    /// Arrival rate per class.
    pub arrival_rate: f64,
    /// Service rate per class.
    pub service_rate: f64,
    pub capacity_per_class: u32,
    pub velocity_max_kmh: f64,
}

impl Default for TrafficSection {
    fn default() -> Self {
        TrafficSection {
            arrival_rate: 0.2,
            service_rate: 0.2,
            capacity_per_class: 3,
            velocity_max_kmh: 60.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PolicySection {
    pub kind: PolicyKind,
    pub velocity_threshold_kmh: f64,
}

impl Default for PolicySection {
    fn default() -> Self {
        PolicySection {
            kind: PolicyKind::Conventional,
            velocity_threshold_kmh: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnergySection {
    pub p_active_mw: f64,
    pub p_idle_mw: f64,
    pub p_sniff_mw: f64,
}

impl Default for EnergySection {
    fn default() -> Self {
        let e = EnergyParams::default();
        EnergySection {
            p_active_mw: e.p_active_mw,
            p_idle_mw: e.p_idle_mw,
            p_sniff_mw: e.p_sniff_mw,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TariffSection {
    /// Path to a JSON slab file; unset falls back to the flat price below.
    pub domestic_file: Option<String>,
    pub commercial_file: Option<String>,
    pub domestic_flat_price: f64,
    pub commercial_flat_price: f64,
}

impl Default for TariffSection {
    fn default() -> Self {
        TariffSection {
            domestic_file: None,
            commercial_file: None,
            domestic_flat_price: 5.0,
            commercial_flat_price: 7.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub tolerance: f64,
    pub dense_cutoff: usize,
    pub max_iterations: usize,
    pub state_ceiling: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        let s = SolverOptions::default();
        SolverSection {
            tolerance: s.tolerance,
            dense_cutoff: s.dense_cutoff,
            max_iterations: s.max_iterations,
            state_ceiling: s.state_ceiling,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingSection {
    pub n_samples: usize,
}

impl Default for SamplingSection {
    fn default() -> Self {
        SamplingSection { n_samples: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub threshold_start_dbm: f64,
    pub threshold_stop_dbm: f64,
    pub threshold_step_db: f64,
    pub r_start_m: f64,
    pub r_stop_m: f64,
    pub r_step_m: f64,
    pub calibrate_r_start_m: f64,
    pub calibrate_r_stop_m: f64,
    pub calibrate_r_step_m: f64,
    pub rho_grid: Vec<f64>,
    pub balanced_tol_db: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            threshold_start_dbm: -100.0,
            threshold_stop_dbm: -40.0,
            threshold_step_db: 2.0,
            r_start_m: 400.0,
            r_stop_m: 1100.0,
            r_step_m: 100.0,
            calibrate_r_start_m: 200.0,
            calibrate_r_stop_m: 1100.0,
            calibrate_r_step_m: 100.0,
            rho_grid: vec![0.2, 0.4, 0.6, 0.8, 1.0],
            balanced_tol_db: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateSection {
    pub horizon: f64,
    /// Zero selects the default of one tenth of the horizon.
    pub warmup: f64,
    pub pareto_shape: f64,
}

impl Default for SimulateSection {
    fn default() -> Self {
        SimulateSection {
            horizon: 700_000.0,
            warmup: 0.0,
            pareto_shape: 1.5,
        }
    }
}

impl ExperimentConfig {
    /// Load from a TOML file, or recover the embedded config from a JSON
    /// experiment manifest.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            let manifest: Manifest = serde_json::from_str(&text).map_err(|e| {
                CliError::config(format!("cannot parse manifest {}: {e}", path.display()))
            })?;
            return Ok(manifest.config);
        }
        toml::from_str(&text)
            .map_err(|e| CliError::config(format!("cannot parse {}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    fn load_tariff(
        &self,
        category: TariffCategory,
        file: &Option<String>,
        flat_price: f64,
    ) -> Result<TariffSchedule, CliError> {
        match file {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::config(format!("cannot read tariff {path}: {e}")))?;
                TariffSchedule::from_json_slabs(category, &text)
                    .map_err(|e| CliError::config(format!("tariff {path}: {e}")))
            }
            None => Ok(TariffSchedule::flat(category, flat_price)),
        }
    }

    /// Resolve into the scenario the library modules consume.
    pub fn scenario(&self) -> Result<ScenarioConfig, CliError> {
        let scenario = ScenarioConfig {
            radio: RadioParams {
                macro_tx_power_dbm: self.radio.macro_tx_power_dbm,
                femto_tx_power_dbm: self.radio.femto_tx_power_dbm,
                wall_loss_db: self.radio.wall_loss_db,
                hysteresis_db: self.radio.hysteresis_db,
                macro_rss_threshold_dbm: self.radio.macro_rss_threshold_dbm,
            },
            macro_radius_m: self.deployment.macro_radius_m,
            exclusion_radius_m: self.deployment.exclusion_radius_m,
            femto_radius_m: self.deployment.femto_radius_m,
            femto_count: self.deployment.femto_count,
            area_per_femto_km2: self.deployment.area_per_femto_km2,
            capacities: [self.traffic.capacity_per_class; 4],
            arrival_rate: self.traffic.arrival_rate,
            service_rate: self.traffic.service_rate,
            policy: Policy {
                kind: self.policy.kind,
                velocity_threshold_kmh: self.policy.velocity_threshold_kmh,
            },
            velocity: VelocityModel {
                max_kmh: self.traffic.velocity_max_kmh,
            },
            energy: EnergyParams {
                p_active_mw: self.energy.p_active_mw,
                p_idle_mw: self.energy.p_idle_mw,
                p_sniff_mw: self.energy.p_sniff_mw,
            },
            domestic_tariff: self.load_tariff(
                TariffCategory::Domestic,
                &self.tariff.domestic_file,
                self.tariff.domestic_flat_price,
            )?,
            commercial_tariff: self.load_tariff(
                TariffCategory::Commercial,
                &self.tariff.commercial_file,
                self.tariff.commercial_flat_price,
            )?,
            n_samples: self.sampling.n_samples,
            seed: self.seed,
            solver: SolverOptions {
                tolerance: self.solver.tolerance,
                dense_cutoff: self.solver.dense_cutoff,
                max_iterations: self.solver.max_iterations,
                state_ceiling: self.solver.state_ceiling,
            },
        };
        scenario
            .validate()
            .map_err(|e| CliError::config(e.to_string()))?;
        Ok(scenario)
    }

    pub fn sha256_hex(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Experiment manifest written alongside every output file: the resolved
/// configuration, its content hash, and the command that produced it. A
/// manifest can be passed back via `--config` to replay the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub command: String,
    pub args: Vec<String>,
    pub config_sha256: String,
    pub outputs: Vec<String>,
    pub config: ExperimentConfig,
}

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

impl Manifest {
    pub fn new(command: &str, args: Vec<String>, config: &ExperimentConfig) -> Self {
        Manifest {
            schema_version: MANIFEST_SCHEMA_VERSION,
            command: command.to_string(),
            args,
            config_sha256: config.sha256_hex(),
            outputs: Vec::new(),
            config: config.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let config = ExperimentConfig::default();
        let text = config.to_toml();
        let back: ExperimentConfig = toml::from_str(&text).unwrap();
        assert_eq!(config, back);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = toml::from_str::<ExperimentConfig>("[radio]\nmacro_tx = 46.0\n");
        assert!(err.is_err());
        let err = toml::from_str::<ExperimentConfig>("unknown_top = 1\n");
        assert!(err.is_err());
    }

    #[test]
    fn partial_config_fills_defaults() {
        let config: ExperimentConfig =
            toml::from_str("seed = 11\n[policy]\nkind = \"hard\"\n").unwrap();
        assert_eq!(config.seed, 11);
        assert_eq!(config.policy.kind, PolicyKind::HardQos);
        assert_eq!(config.radio.macro_tx_power_dbm, 46.0);
        assert_eq!(config.traffic.capacity_per_class, 3);
    }

    #[test]
    fn scenario_resolution_validates() {
        let mut config = ExperimentConfig::default();
        config.scenario().unwrap();
        config.deployment.exclusion_radius_m = 2000.0;
        assert!(config.scenario().is_err());
    }

    #[test]
    fn config_hash_tracks_content() {
        let a = ExperimentConfig::default();
        let mut b = ExperimentConfig::default();
        assert_eq!(a.sha256_hex(), b.sha256_hex());
        b.seed = 8;
        assert_ne!(a.sha256_hex(), b.sha256_hex());
    }
}
