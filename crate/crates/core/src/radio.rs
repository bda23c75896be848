//! Deterministic pathloss and received-signal-strength computation for the
//! macro and femto tiers, plus the RSS-comparison handoff trigger.
//!
//! Macro-tier loss follows `15.3 + 37.6*log10(D) + wall_loss` and femto-tier
//! loss follows `38.46 + 20*log10(d) + 0.7*d`, both with distances in meters.
//! All arithmetic stays in the logarithmic (dB/dBm) domain.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RadioError {
    #[error("distance must be positive, got {0} m")]
    NonPositiveDistance(f64),
    #[error("invalid radio parameters: {0}")]
    InvalidParams(String),
}

/// Transmit powers and trigger parameters of the two-tier network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioParams {
    /// Macro BS transmit power, dBm.
    pub macro_tx_power_dbm: f64,
    /// Femto BS transmit power, dBm.
    pub femto_tx_power_dbm: f64,
    /// Extra penetration loss on the macro link, dB.
    pub wall_loss_db: f64,
    /// Margin the femto RSS must exceed over the macro RSS, dB.
    pub hysteresis_db: f64,
    /// Macro RSS level below which a handoff may trigger, dBm.
    pub macro_rss_threshold_dbm: f64,
}

impl RadioParams {
    pub fn validate(&self) -> Result<(), RadioError> {
        if self.macro_tx_power_dbm <= self.femto_tx_power_dbm {
            return Err(RadioError::InvalidParams(format!(
                "macro tx power ({} dBm) must exceed femto tx power ({} dBm)",
                self.macro_tx_power_dbm, self.femto_tx_power_dbm
            )));
        }
        if self.wall_loss_db < 0.0 {
            return Err(RadioError::InvalidParams(format!(
                "wall loss must be nonnegative, got {} dB",
                self.wall_loss_db
            )));
        }
        if self.hysteresis_db < 0.0 {
            return Err(RadioError::InvalidParams(format!(
                "hysteresis must be nonnegative, got {} dB",
                self.hysteresis_db
            )));
        }
        Ok(())
    }

    /// With a different macro RSS threshold; used by threshold sweeps.
    pub fn with_threshold(mut self, threshold_dbm: f64) -> Self {
        self.macro_rss_threshold_dbm = threshold_dbm;
        self
    }
}

impl Default for RadioParams {
    /// 46 dBm macro / 20 dBm femto, 10 dB wall loss, zero hysteresis,
    /// -70 dBm macro threshold.
    fn default() -> Self {
        RadioParams {
            macro_tx_power_dbm: 46.0,
            femto_tx_power_dbm: 20.0,
            wall_loss_db: 10.0,
            hysteresis_db: 0.0,
            macro_rss_threshold_dbm: -70.0,
        }
    }
}

fn check_distance(distance_m: f64) -> Result<(), RadioError> {
    if !(distance_m > 0.0) {
        return Err(RadioError::NonPositiveDistance(distance_m));
    }
    Ok(())
}

/// Macro-tier pathloss in dB at the given distance in meters.
pub fn macro_pathloss(params: &RadioParams, distance_m: f64) -> Result<f64, RadioError> {
    check_distance(distance_m)?;
    Ok(15.3 + 37.6 * distance_m.log10() + params.wall_loss_db)
}

/// Femto-tier pathloss in dB at the given distance in meters. The linear
/// 0.7 dB/m term makes femto coverage fall off within tens of meters.
pub fn femto_pathloss(distance_m: f64) -> Result<f64, RadioError> {
    check_distance(distance_m)?;
    Ok(38.46 + 20.0 * distance_m.log10() + 0.7 * distance_m)
}

/// RSS from the macro BS in dBm at the given distance in meters.
pub fn rss_macro(params: &RadioParams, distance_m: f64) -> Result<f64, RadioError> {
    Ok(params.macro_tx_power_dbm - macro_pathloss(params, distance_m)?)
}

/// RSS from a femto BS in dBm at the given distance in meters.
pub fn rss_femto(params: &RadioParams, distance_m: f64) -> Result<f64, RadioError> {
    Ok(params.femto_tx_power_dbm - femto_pathloss(distance_m)?)
}

/// The RSS-comparison handoff trigger: fires when the macro RSS has dropped
/// below the threshold and the femto RSS beats the macro RSS by at least the
/// hysteresis margin.
pub fn handoff_trigger(params: &RadioParams, rss_m_dbm: f64, rss_f_dbm: f64) -> bool {
    rss_m_dbm < params.macro_rss_threshold_dbm
        && rss_f_dbm > rss_m_dbm + params.hysteresis_db
}
