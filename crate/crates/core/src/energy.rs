//! Femto BS energy model (active/idle with a sniffer) and slab-tariff cost
//! computation.
//!
//! A femto BS is active with probability `(1 - e^{-rho}) * HO`, where `rho`
//! is the offered load and `HO` the chain's expected femto-resident call
//! count. Because `HO` is an expectation that can exceed 1, the product is
//! clamped to [0, 1] and the clamp is flagged. Monthly energy is reported in
//! true kWh (watts x 720 h / 1000); the raw mW-seconds figure that results
//! from multiplying milliwatts by the seconds in a month is kept alongside
//! for traceability.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hours in the 30-day accounting month.
pub const HOURS_PER_MONTH: f64 = 720.0;
/// Seconds in the 30-day accounting month.
pub const SECONDS_PER_MONTH: f64 = 3600.0 * 24.0 * 30.0;

#[derive(Debug, Error, PartialEq)]
pub enum EnergyError {
    #[error("invalid energy parameters: {0}")]
    InvalidParams(String),
    #[error("conventional energy must be positive to compute savings, got {0}")]
    NonPositiveBaseline(f64),
    #[error("invalid tariff schedule: {0}")]
    InvalidTariff(String),
}

/// Femto BS power draw in each mode, milliwatts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyParams {
    pub p_active_mw: f64,
    pub p_idle_mw: f64,
    pub p_sniff_mw: f64,
}

impl Default for EnergyParams {
    fn default() -> Self {
        EnergyParams {
            p_active_mw: 100.0,
            p_idle_mw: 60.0,
            p_sniff_mw: 3.0,
        }
    }
}

impl EnergyParams {
    pub fn validate(&self) -> Result<(), EnergyError> {
        if !(self.p_idle_mw + self.p_sniff_mw > 0.0) {
            return Err(EnergyError::InvalidParams(format!(
                "idle + sniffer power must be positive, got {} mW",
                self.p_idle_mw + self.p_sniff_mw
            )));
        }
        if self.p_active_mw <= self.p_idle_mw + self.p_sniff_mw {
            return Err(EnergyError::InvalidParams(format!(
                "active power ({} mW) must exceed idle + sniffer power ({} mW), \
                 otherwise idle mode saves nothing",
                self.p_active_mw,
                self.p_idle_mw + self.p_sniff_mw
            )));
        }
        Ok(())
    }

    /// Largest possible savings fraction of idle mode, in percent.
    pub fn max_savings_percent(&self) -> f64 {
        100.0 * (1.0 - (self.p_idle_mw + self.p_sniff_mw) / self.p_active_mw)
    }
}

/// The femto-active probability with its clamp flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActiveProbability {
    pub value: f64,
    /// Set when the raw product `(1 - e^{-rho}) * ho` fell outside [0, 1].
    pub clamped: bool,
}

/// Probability that a femto BS is active: `(1 - e^{-rho}) * ho_prob`,
/// clamped to [0, 1].
pub fn prob_active(rho: f64, ho_prob: f64) -> ActiveProbability {
    let raw = (1.0 - (-rho).exp()) * ho_prob;
    if raw > 1.0 {
        ActiveProbability {
            value: 1.0,
            clamped: true,
        }
    } else if raw < 0.0 {
        ActiveProbability {
            value: 0.0,
            clamped: true,
        }
    } else {
        ActiveProbability {
            value: raw,
            clamped: false,
        }
    }
}

fn average_power_mw(params: &EnergyParams, prob_active: f64) -> f64 {
    params.p_active_mw * prob_active + (params.p_idle_mw + params.p_sniff_mw) * (1.0 - prob_active)
}

/// Monthly energy of one femto BS running the active/idle scheme, kWh.
pub fn monthly_energy_active_idle(params: &EnergyParams, prob_active: f64) -> f64 {
    average_power_mw(params, prob_active) / 1.0e6 * HOURS_PER_MONTH
}

/// Monthly energy of one always-active femto BS, kWh.
pub fn monthly_energy_conventional(params: &EnergyParams) -> f64 {
    params.p_active_mw / 1.0e6 * HOURS_PER_MONTH
}

/// The same monthly energies in raw milliwatt-seconds (power times the
/// seconds in a month, no unit conversion).
pub fn monthly_energy_active_idle_raw_mws(params: &EnergyParams, prob_active: f64) -> f64 {
    average_power_mw(params, prob_active) * SECONDS_PER_MONTH
}

pub fn monthly_energy_conventional_raw_mws(params: &EnergyParams) -> f64 {
    params.p_active_mw * SECONDS_PER_MONTH
}

/// Percentage of energy saved relative to the always-active baseline.
pub fn savings_percent(e_active_idle: f64, e_conventional: f64) -> Result<f64, EnergyError> {
    if !(e_conventional > 0.0) {
        return Err(EnergyError::NonPositiveBaseline(e_conventional));
    }
    Ok(100.0 * (1.0 - e_active_idle / e_conventional))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TariffCategory {
    Domestic,
    Commercial,
}

impl std::fmt::Display for TariffCategory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TariffCategory::Domestic => f.write_str("domestic"),
            TariffCategory::Commercial => f.write_str("commercial"),
        }
    }
}

/// One billing slab: consumption up to `upto_kwh` (cumulative) is billed at
/// `price_per_kwh`. A `null` upper bound terminates the schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TariffSlab {
    pub upto_kwh: Option<f64>,
    pub price_per_kwh: f64,
}

/// An ordered slab-progressive tariff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TariffSchedule {
    pub category: TariffCategory,
    pub slabs: Vec<TariffSlab>,
}

impl TariffSchedule {
    pub fn new(category: TariffCategory, slabs: Vec<TariffSlab>) -> Result<Self, EnergyError> {
        let schedule = TariffSchedule { category, slabs };
        schedule.validate()?;
        Ok(schedule)
    }

    /// A single unbounded slab.
    pub fn flat(category: TariffCategory, price_per_kwh: f64) -> Self {
        TariffSchedule {
            category,
            slabs: vec![TariffSlab {
                upto_kwh: None,
                price_per_kwh,
            }],
        }
    }

    pub fn validate(&self) -> Result<(), EnergyError> {
        if self.slabs.is_empty() {
            return Err(EnergyError::InvalidTariff("schedule has no slabs".into()));
        }
        let mut last_bound = 0.0f64;
        for (i, slab) in self.slabs.iter().enumerate() {
            if slab.price_per_kwh < 0.0 {
                return Err(EnergyError::InvalidTariff(format!(
                    "slab {i} has negative price {}",
                    slab.price_per_kwh
                )));
            }
            match slab.upto_kwh {
                Some(bound) => {
                    if bound <= last_bound {
                        return Err(EnergyError::InvalidTariff(format!(
                            "slab {i} bound {bound} kWh does not increase past {last_bound} kWh"
                        )));
                    }
                    last_bound = bound;
                }
                None => {
                    if i + 1 != self.slabs.len() {
                        return Err(EnergyError::InvalidTariff(format!(
                            "unbounded slab {i} must terminate the schedule"
                        )));
                    }
                }
            }
        }
        if self.slabs.last().unwrap().upto_kwh.is_some() {
            return Err(EnergyError::InvalidTariff(
                "schedule must end with an unbounded slab".into(),
            ));
        }
        Ok(())
    }

    /// Parse the slab list from a JSON array of
    /// `{"upto_kwh": number|null, "price_per_kwh": number}` entries.
    pub fn from_json_slabs(category: TariffCategory, json: &str) -> Result<Self, EnergyError> {
        let slabs: Vec<TariffSlab> = serde_json::from_str(json)
            .map_err(|e| EnergyError::InvalidTariff(format!("parse error: {e}")))?;
        TariffSchedule::new(category, slabs)
    }
}

/// Slab-progressive monthly bill: each slab's span is billed at its price
/// until the consumed total is covered.
pub fn monthly_cost(energy_kwh: f64, tariff: &TariffSchedule) -> f64 {
    let mut remaining = energy_kwh.max(0.0);
    let mut billed_upto = 0.0f64;
    let mut cost = 0.0f64;
    for slab in &tariff.slabs {
        let span = match slab.upto_kwh {
            Some(bound) => (bound - billed_upto).max(0.0),
            None => f64::INFINITY,
        };
        let here = remaining.min(span);
        cost += here * slab.price_per_kwh;
        remaining -= here;
        if let Some(bound) = slab.upto_kwh {
            billed_upto = bound;
        }
        if remaining <= 0.0 {
            break;
        }
    }
    cost
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn prob_active_reference_points() {
        assert_eq!(prob_active(0.0, 0.7).value, 0.0);
        assert!(!prob_active(0.0, 0.7).clamped);

        let mid = prob_active(1.0, 0.5);
        assert_abs_diff_eq!(mid.value, (1.0 - (-1.0f64).exp()) * 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(mid.value, 0.3161, epsilon = 1e-4);
        assert!(!mid.clamped);

        let heavy = prob_active(2.0, 3.0);
        assert_eq!(heavy.value, 1.0);
        assert!(heavy.clamped);
    }

    #[test]
    fn monthly_energy_reference_points() {
        let p = EnergyParams::default();
        assert_abs_diff_eq!(monthly_energy_active_idle(&p, 0.0), 0.04536, epsilon = 1e-12);
        assert_abs_diff_eq!(monthly_energy_active_idle(&p, 1.0), 0.072, epsilon = 1e-12);
        assert_abs_diff_eq!(monthly_energy_active_idle(&p, 0.5), 0.05868, epsilon = 1e-12);
        assert_abs_diff_eq!(monthly_energy_conventional(&p), 0.072, epsilon = 1e-12);
    }

    #[test]
    fn conventional_energy_is_linear_in_active_power() {
        let mut p = EnergyParams::default();
        let base = monthly_energy_conventional(&p);
        p.p_active_mw *= 2.0;
        assert_abs_diff_eq!(monthly_energy_conventional(&p), 2.0 * base, epsilon = 1e-15);
        p.p_active_mw = 0.0;
        assert_eq!(monthly_energy_conventional(&p), 0.0);
    }

    #[test]
    fn raw_energy_tracks_the_kwh_figure() {
        let p = EnergyParams::default();
        let kwh = monthly_energy_active_idle(&p, 0.25);
        let raw = monthly_energy_active_idle_raw_mws(&p, 0.25);
        // 1 kWh = 3.6e9 mW s
        assert_abs_diff_eq!(raw, kwh * 3.6e9, epsilon = 1e-3);
        assert_abs_diff_eq!(
            monthly_energy_conventional_raw_mws(&p),
            100.0 * SECONDS_PER_MONTH,
            epsilon = 1e-9
        );
    }

    #[test]
    fn savings_reference_points() {
        let p = EnergyParams::default();
        let conv = monthly_energy_conventional(&p);
        assert_abs_diff_eq!(
            savings_percent(monthly_energy_active_idle(&p, 0.0), conv).unwrap(),
            37.0,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            savings_percent(monthly_energy_active_idle(&p, 1.0), conv).unwrap(),
            0.0,
            epsilon = 1e-9
        );
        assert_eq!(p.max_savings_percent(), 37.0);
        assert!(savings_percent(0.05, 0.0).is_err());
    }

    #[test]
    fn flat_tariff_is_a_plain_product() {
        let t = TariffSchedule::flat(TariffCategory::Domestic, 5.0);
        assert_eq!(monthly_cost(0.0, &t), 0.0);
        assert_abs_diff_eq!(monthly_cost(0.072, &t), 0.36, epsilon = 1e-12);
    }

    #[test]
    fn progressive_billing_reference_point() {
        let t = TariffSchedule::new(
            TariffCategory::Commercial,
            vec![
                TariffSlab {
                    upto_kwh: Some(0.05),
                    price_per_kwh: 4.0,
                },
                TariffSlab {
                    upto_kwh: None,
                    price_per_kwh: 8.0,
                },
            ],
        )
        .unwrap();
        assert_abs_diff_eq!(monthly_cost(0.072, &t), 0.376, epsilon = 1e-12);
        // Below the first bound only the first slab bills.
        assert_abs_diff_eq!(monthly_cost(0.04, &t), 0.16, epsilon = 1e-12);
    }

    #[test]
    fn tariff_validation_rejects_bad_schedules() {
        assert!(TariffSchedule::new(TariffCategory::Domestic, vec![]).is_err());
        // Non-increasing bounds.
        assert!(TariffSchedule::new(
            TariffCategory::Domestic,
            vec![
                TariffSlab {
                    upto_kwh: Some(2.0),
                    price_per_kwh: 1.0
                },
                TariffSlab {
                    upto_kwh: Some(1.0),
                    price_per_kwh: 2.0
                },
                TariffSlab {
                    upto_kwh: None,
                    price_per_kwh: 3.0
                },
            ],
        )
        .is_err());
        // Bounded final slab.
        assert!(TariffSchedule::new(
            TariffCategory::Domestic,
            vec![TariffSlab {
                upto_kwh: Some(1.0),
                price_per_kwh: 1.0
            }],
        )
        .is_err());
        // Negative price.
        assert!(TariffSchedule::new(
            TariffCategory::Domestic,
            vec![TariffSlab {
                upto_kwh: None,
                price_per_kwh: -1.0
            }],
        )
        .is_err());
    }

    #[test]
    fn tariff_json_round_trip() {
        let json = r#"[
            {"upto_kwh": 25.0, "price_per_kwh": 4.0},
            {"upto_kwh": null, "price_per_kwh": 7.5}
        ]"#;
        let t = TariffSchedule::from_json_slabs(TariffCategory::Domestic, json).unwrap();
        assert_eq!(t.slabs.len(), 2);
        assert_abs_diff_eq!(monthly_cost(30.0, &t), 25.0 * 4.0 + 5.0 * 7.5, epsilon = 1e-9);
    }

    #[test]
    fn default_params_validate_and_degenerate_ones_do_not() {
        EnergyParams::default().validate().unwrap();
        let bad = EnergyParams {
            p_active_mw: 50.0,
            p_idle_mw: 60.0,
            p_sniff_mw: 3.0,
        };
        assert!(bad.validate().is_err());
    }

    proptest! {
        #[test]
        fn savings_bounded_by_idle_gap(pa in 0.0f64..=1.0) {
            let p = EnergyParams::default();
            let s = savings_percent(
                monthly_energy_active_idle(&p, pa),
                monthly_energy_conventional(&p),
            ).unwrap();
            prop_assert!(s >= -1e-9 && s <= 37.0 + 1e-9);
        }

        #[test]
        fn savings_strictly_decrease_with_activity(
            pa in 0.0f64..0.99,
            delta in 0.001f64..0.01,
        ) {
            let p = EnergyParams::default();
            let conv = monthly_energy_conventional(&p);
            let s1 = savings_percent(monthly_energy_active_idle(&p, pa), conv).unwrap();
            let s2 = savings_percent(monthly_energy_active_idle(&p, (pa + delta).min(1.0)), conv).unwrap();
            prop_assert!(s2 < s1);
        }

        #[test]
        fn cost_is_nondecreasing_and_continuous_across_slabs(kwh in 0.0f64..100.0) {
            let t = TariffSchedule::new(
                TariffCategory::Domestic,
                vec![
                    TariffSlab { upto_kwh: Some(10.0), price_per_kwh: 2.0 },
                    TariffSlab { upto_kwh: Some(40.0), price_per_kwh: 5.0 },
                    TariffSlab { upto_kwh: None, price_per_kwh: 9.0 },
                ],
            ).unwrap();
            let eps = 1e-6;
            let c0 = monthly_cost(kwh, &t);
            let c1 = monthly_cost(kwh + eps, &t);
            prop_assert!(c1 >= c0);
            prop_assert!(c1 - c0 <= 9.0 * eps + 1e-12);
        }

        #[test]
        fn prob_active_stays_in_unit_interval(rho in 0.0f64..10.0, ho in 0.0f64..20.0) {
            let pa = prob_active(rho, ho);
            prop_assert!((0.0..=1.0).contains(&pa.value));
            let raw = (1.0 - (-rho).exp()) * ho;
            prop_assert_eq!(pa.clamped, raw > 1.0);
        }
    }
}
