//! Geometry of the macro disk with randomly deployed femtocells outside an
//! exclusion radius, and Monte Carlo estimation of the per-class
//! handoff-eligibility fraction that feeds the Markov chain.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::policy::{Policy, ServiceClass};
use crate::radio::{self, RadioParams};

#[derive(Debug, Error, PartialEq)]
pub enum DeploymentError {
    #[error("exclusion radius {exclusion_m} m must be smaller than macro radius {macro_m} m")]
    ExclusionTooLarge { exclusion_m: f64, macro_m: f64 },
    #[error("femto radius must be positive, got {0} m")]
    NonPositiveFemtoRadius(f64),
    #[error("femto at ({x}, {y}) lies at {dist} m, outside [{lo}, {hi}]")]
    FemtoOutOfAnnulus {
        x: f64,
        y: f64,
        dist: f64,
        lo: f64,
        hi: f64,
    },
}

/// A point in the plane, meters, macro BS at the origin.
pub type Point = [f64; 2];

fn norm(p: Point) -> f64 {
    (p[0] * p[0] + p[1] * p[1]).sqrt()
}

fn dist(a: Point, b: Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    (dx * dx + dy * dy).sqrt()
}

/// A macro cell with femto BSs placed in the annulus between the exclusion
/// radius and the macro radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deployment {
    pub macro_radius_m: f64,
    pub exclusion_radius_m: f64,
    pub femto_radius_m: f64,
    pub femto_positions: Vec<Point>,
    pub seed: u64,
}

impl Deployment {
    pub fn validate(&self) -> Result<(), DeploymentError> {
        if self.exclusion_radius_m >= self.macro_radius_m {
            return Err(DeploymentError::ExclusionTooLarge {
                exclusion_m: self.exclusion_radius_m,
                macro_m: self.macro_radius_m,
            });
        }
        if !(self.femto_radius_m > 0.0) {
            return Err(DeploymentError::NonPositiveFemtoRadius(self.femto_radius_m));
        }
        // Allow a hair of slack for round-tripped floats.
        let tol = 1e-9 * self.macro_radius_m;
        for &p in &self.femto_positions {
            let d = norm(p);
            if d < self.exclusion_radius_m - tol || d > self.macro_radius_m + tol {
                return Err(DeploymentError::FemtoOutOfAnnulus {
                    x: p[0],
                    y: p[1],
                    dist: d,
                    lo: self.exclusion_radius_m,
                    hi: self.macro_radius_m,
                });
            }
        }
        Ok(())
    }

    /// Index and distance of the femto BS closest to `position`, or `None`
    /// for an empty deployment. Under the femto pathloss model the nearest
    /// femto is the strongest, so it is the only handoff candidate.
    pub fn nearest_femto(&self, position: Point) -> Option<(usize, f64)> {
        self.femto_positions
            .iter()
            .enumerate()
            .map(|(i, &f)| (i, dist(position, f)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("deployment serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// Place `femto_count` femto BSs uniformly by area over the annulus between
/// `exclusion_radius_m` and `macro_radius_m`. Deterministic for a fixed seed;
/// the first k positions are identical across calls that differ only in
/// count, which keeps sweeps over deployment parameters coupled.
pub fn deploy_femtos(
    seed: u64,
    macro_radius_m: f64,
    exclusion_radius_m: f64,
    femto_count: usize,
) -> Result<Deployment, DeploymentError> {
    if exclusion_radius_m >= macro_radius_m {
        return Err(DeploymentError::ExclusionTooLarge {
            exclusion_m: exclusion_radius_m,
            macro_m: macro_radius_m,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r2_lo = exclusion_radius_m * exclusion_radius_m;
    let r2_hi = macro_radius_m * macro_radius_m;
    let mut femto_positions = Vec::with_capacity(femto_count);
    for _ in 0..femto_count {
        let u: f64 = rng.gen();
        let theta: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
        let r = (r2_lo + u * (r2_hi - r2_lo)).sqrt();
        femto_positions.push([r * theta.cos(), r * theta.sin()]);
    }
    Ok(Deployment {
        macro_radius_m,
        exclusion_radius_m,
        femto_radius_m: 30.0,
        femto_positions,
        seed,
    })
}

/// Velocity distribution of newly arriving users: uniform on [0, max].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityModel {
    pub max_kmh: f64,
}

impl Default for VelocityModel {
    fn default() -> Self {
        VelocityModel { max_kmh: 60.0 }
    }
}

impl VelocityModel {
    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        rng.gen::<f64>() * self.max_kmh
    }
}

/// One randomly drawn user: position uniform by area over the macro disk,
/// velocity from the velocity model, and the service class of its call.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserSample {
    pub position: Point,
    pub velocity_kmh: f64,
    pub service_class: ServiceClass,
}

/// Draw a user position uniformly by area over the macro disk.
pub fn sample_disk_position(rng: &mut impl Rng, macro_radius_m: f64) -> Point {
    let r = macro_radius_m * rng.gen::<f64>().sqrt();
    let theta: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
    [r * theta.cos(), r * theta.sin()]
}

pub fn sample_user(
    rng: &mut impl Rng,
    macro_radius_m: f64,
    velocity: &VelocityModel,
    service_class: ServiceClass,
) -> UserSample {
    UserSample {
        position: sample_disk_position(rng, macro_radius_m),
        velocity_kmh: velocity.sample(rng),
        service_class,
    }
}

/// Monte Carlo estimate of a probability: value plus its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HandoffEstimate {
    pub probability: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

/// Precomputed per-user trigger inputs, independent of the macro RSS
/// threshold and of the policy. Reusing one table across threshold values
/// gives common random numbers: the estimated handoff fraction is then
/// exactly nondecreasing in the threshold, which keeps the bisection in the
/// calibration module sound.
#[derive(Debug, Clone)]
pub struct TriggerSamples {
    /// (macro RSS, femto RSS at the nearest femto or -inf, velocity km/h).
    samples: Vec<(f64, f64, f64)>,
}

const SAMPLE_CHUNK: usize = 4096;

impl TriggerSamples {
    /// Draw `n_samples` users over the macro disk. Sampling is partitioned
    /// into fixed-size chunks with seeds derived from the chunk index and the
    /// partial results merged in chunk order, so the table is bit-identical
    /// regardless of how many worker threads run.
    pub fn generate(
        deployment: &Deployment,
        radio_params: &RadioParams,
        velocity: &VelocityModel,
        n_samples: usize,
        seed: u64,
    ) -> Self {
        let n_chunks = n_samples.div_ceil(SAMPLE_CHUNK);
        let samples: Vec<(f64, f64, f64)> = (0..n_chunks)
            .into_par_iter()
            .map(|chunk| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(chunk as u64 + 1);
                let count = SAMPLE_CHUNK.min(n_samples - chunk * SAMPLE_CHUNK);
                let mut out = Vec::with_capacity(count);
                for _ in 0..count {
                    let pos = sample_disk_position(&mut rng, deployment.macro_radius_m);
                    let v = velocity.sample(&mut rng);
                    let d_macro = norm(pos).max(1e-6);
                    let rss_m = radio::rss_macro(radio_params, d_macro)
                        .expect("positive macro distance");
                    let rss_f = match deployment.nearest_femto(pos) {
                        Some((_, d)) => radio::rss_femto(radio_params, d.max(1e-6))
                            .expect("positive femto distance"),
                        None => f64::NEG_INFINITY,
                    };
                    out.push((rss_m, rss_f, v));
                }
                out
            })
            .collect::<Vec<_>>()
            .concat();
        TriggerSamples { samples }
    }

    /// Fraction of sampled users whose call of `class` would be assigned to
    /// a femto BS: the RSS trigger holds at the nearest femto and the policy
    /// permits the handoff.
    pub fn fraction(
        &self,
        radio_params: &RadioParams,
        policy: &Policy,
        class: ServiceClass,
    ) -> HandoffEstimate {
        let n = self.samples.len();
        let hits = self
            .samples
            .iter()
            .filter(|&&(rss_m, rss_f, v)| {
                radio::handoff_trigger(radio_params, rss_m, rss_f)
                    && policy.permits_handoff(class, v).unwrap_or(false)
            })
            .count();
        let p = if n == 0 { 0.0 } else { hits as f64 / n as f64 };
        let std_error = if n == 0 {
            0.0
        } else {
            (p * (1.0 - p) / n as f64).sqrt()
        };
        HandoffEstimate {
            probability: p,
            std_error,
            n_samples: n,
        }
    }

    /// Per-class handoff fractions under the given policy and threshold.
    pub fn fractions_per_class(
        &self,
        radio_params: &RadioParams,
        policy: &Policy,
    ) -> crate::policy::PerClass<f64> {
        crate::policy::PerClass([
            self.fraction(radio_params, policy, ServiceClass::Ugs).probability,
            self.fraction(radio_params, policy, ServiceClass::Rtps).probability,
            self.fraction(radio_params, policy, ServiceClass::Nrtps).probability,
            self.fraction(radio_params, policy, ServiceClass::Be).probability,
        ])
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Monte Carlo estimate of the probability that a newly originated call of
/// `class` is assigned to a femto BS.
#[allow(clippy::too_many_arguments)]
pub fn estimate_handoff_fraction(
    deployment: &Deployment,
    radio_params: &RadioParams,
    policy: &Policy,
    class: ServiceClass,
    velocity: &VelocityModel,
    n_samples: usize,
    seed: u64,
) -> HandoffEstimate {
    TriggerSamples::generate(deployment, radio_params, velocity, n_samples, seed)
        .fraction(radio_params, policy, class)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::PolicyKind;

    fn radio() -> RadioParams {
        RadioParams::default()
    }

    #[test]
    fn femtos_land_in_the_annulus() {
        let d = deploy_femtos(7, 1200.0, 1100.0, 50).unwrap();
        assert_eq!(d.femto_positions.len(), 50);
        for &p in &d.femto_positions {
            let r = norm(p);
            assert!(r >= 1100.0 && r <= 1200.0, "femto at {r} m");
        }
        d.validate().unwrap();
    }

    #[test]
    fn deployment_is_deterministic_for_a_seed() {
        let a = deploy_femtos(7, 1200.0, 100.0, 200).unwrap();
        let b = deploy_femtos(7, 1200.0, 100.0, 200).unwrap();
        assert_eq!(a, b);
        let c = deploy_femtos(8, 1200.0, 100.0, 200).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn prefix_positions_are_stable_across_counts() {
        let small = deploy_femtos(7, 1200.0, 100.0, 50).unwrap();
        let large = deploy_femtos(7, 1200.0, 100.0, 200).unwrap();
        assert_eq!(small.femto_positions[..], large.femto_positions[..50]);
    }

    #[test]
    fn exclusion_radius_must_fit_inside_macro() {
        assert!(matches!(
            deploy_femtos(7, 1200.0, 1200.0, 10),
            Err(DeploymentError::ExclusionTooLarge { .. })
        ));
    }

    #[test]
    fn nearest_femto_cases() {
        let mut d = deploy_femtos(1, 1200.0, 100.0, 0).unwrap();
        assert_eq!(d.nearest_femto([400.0, 0.0]), None);

        d.femto_positions = vec![[500.0, 0.0]];
        let (idx, dist) = d.nearest_femto([400.0, 0.0]).unwrap();
        assert_eq!(idx, 0);
        assert!((dist - 100.0).abs() < 1e-12);

        d.femto_positions = vec![[500.0, 0.0], [-500.0, 0.0]];
        let (idx, dist) = d.nearest_femto([100.0, 0.0]).unwrap();
        assert_eq!(idx, 0);
        assert!((dist - 400.0).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let d = deploy_femtos(7, 1200.0, 100.0, 20).unwrap();
        let back = Deployment::from_json(&d.to_json()).unwrap();
        assert_eq!(d, back);
        back.validate().unwrap();
    }

    #[test]
    fn empty_deployment_gives_zero_fraction() {
        let d = deploy_femtos(7, 1200.0, 100.0, 0).unwrap();
        let policy = Policy::conventional();
        for class in ServiceClass::ALL {
            let est = estimate_handoff_fraction(
                &d,
                &radio(),
                &policy,
                class,
                &VelocityModel::default(),
                5_000,
                3,
            );
            assert_eq!(est.probability, 0.0);
        }
    }

    #[test]
    fn threshold_below_edge_rss_gives_zero_fraction() {
        // With the threshold at -100 dBm no user inside the disk satisfies
        // the macro clause, so the femto load source term vanishes.
        let d = deploy_femtos(7, 1200.0, 100.0, 500).unwrap();
        let params = radio().with_threshold(-100.0);
        let est = estimate_handoff_fraction(
            &d,
            &params,
            &Policy::conventional(),
            ServiceClass::Be,
            &VelocityModel::default(),
            20_000,
            3,
        );
        assert_eq!(est.probability, 0.0);
    }

    #[test]
    fn hard_policy_gives_zero_for_realtime_classes() {
        let d = deploy_femtos(7, 1200.0, 100.0, 500).unwrap();
        let policy = Policy::new(PolicyKind::HardQos, 10.0).unwrap();
        for class in [ServiceClass::Ugs, ServiceClass::Rtps] {
            let est = estimate_handoff_fraction(
                &d,
                &radio(),
                &policy,
                class,
                &VelocityModel::default(),
                10_000,
                3,
            );
            assert_eq!(est.probability, 0.0);
        }
    }

    #[test]
    fn fraction_is_nondecreasing_in_threshold() {
        let d = deploy_femtos(7, 1200.0, 100.0, 500).unwrap();
        let samples =
            TriggerSamples::generate(&d, &radio(), &VelocityModel::default(), 20_000, 3);
        let policy = Policy::conventional();
        let mut last = 0.0;
        for thr in [-100.0, -90.0, -80.0, -70.0, -60.0, -50.0, -40.0] {
            let p = samples
                .fraction(&radio().with_threshold(thr), &policy, ServiceClass::Be)
                .probability;
            assert!(p >= last, "fraction dropped at threshold {thr}");
            last = p;
        }
    }

    #[test]
    fn edge_exclusion_with_low_threshold_clamps_to_zero() {
        // Femtos confined near the cell edge plus a threshold at the edge RSS
        // leave almost no trigger region.
        let d = deploy_femtos(7, 1200.0, 900.0, 300).unwrap();
        let est = estimate_handoff_fraction(
            &d,
            &radio().with_threshold(-95.0),
            &Policy::conventional(),
            ServiceClass::Be,
            &VelocityModel::default(),
            50_000,
            3,
        );
        assert!(est.probability < 0.01, "got {}", est.probability);
    }

    #[test]
    fn disjoint_seeds_agree_within_three_standard_errors() {
        let d = deploy_femtos(7, 1200.0, 100.0, 500).unwrap();
        let policy = Policy::conventional();
        let a = estimate_handoff_fraction(
            &d,
            &radio(),
            &policy,
            ServiceClass::Be,
            &VelocityModel::default(),
            50_000,
            11,
        );
        let b = estimate_handoff_fraction(
            &d,
            &radio(),
            &policy,
            ServiceClass::Be,
            &VelocityModel::default(),
            50_000,
            12,
        );
        let combined = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
        assert!(
            (a.probability - b.probability).abs() <= 3.0 * combined,
            "estimates {} vs {} differ by more than 3 SE ({})",
            a.probability,
            b.probability,
            combined
        );
    }

    #[test]
    fn soft_policy_fraction_scales_with_slow_user_share() {
        // Velocities are uniform on [0, 60] with the threshold at 10, so the
        // soft fraction should be close to one sixth of the conventional one.
        let d = deploy_femtos(7, 1200.0, 100.0, 500).unwrap();
        let samples =
            TriggerSamples::generate(&d, &radio(), &VelocityModel::default(), 100_000, 3);
        let conv = samples
            .fraction(&radio(), &Policy::conventional(), ServiceClass::Be)
            .probability;
        let soft = samples
            .fraction(
                &radio(),
                &Policy::new(PolicyKind::SoftQos, 10.0).unwrap(),
                ServiceClass::Be,
            )
            .probability;
        assert!(conv > 0.0);
        let ratio = soft / conv;
        assert!((ratio - 1.0 / 6.0).abs() < 0.02, "ratio {ratio}");
    }
}
