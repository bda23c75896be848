//! Discrete-event simulator of the macro/femto system.
//!
//! Serves two purposes: an independent oracle for the analytical chain
//! (exponential arrivals must reproduce its stationary metrics), and the
//! vehicle for heavy-tailed Pareto interarrivals, which have no place in a
//! Markov chain. A single run is strictly sequential; the event queue orders
//! simultaneous events by insertion sequence so runs are reproducible.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Pareto};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ctmc::TrafficModel;
use crate::deployment::{sample_user, Deployment, VelocityModel};
use crate::policy::{PerClass, Policy, ServiceClass};
use crate::radio::{self, RadioParams};

#[derive(Debug, Error, PartialEq)]
pub enum DesError {
    #[error("horizon ({horizon}) must exceed warmup ({warmup}) and warmup must be positive")]
    InvalidWindow { horizon: f64, warmup: f64 },
    #[error("Pareto shape must exceed 1 for a finite mean, got {0}")]
    InvalidParetoShape(f64),
    #[error("interarrival mean must be positive, got {0}")]
    InvalidMean(f64),
    #[error("invalid traffic model: {0}")]
    InvalidTraffic(String),
}

/// Interarrival-time family used for every class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum ArrivalKind {
    Exponential,
    /// Heavy-tailed arrivals; `shape_alpha` must exceed 1 so the mean
    /// interarrival time exists and can be matched to the configured rate.
    Pareto { shape_alpha: f64 },
}

/// How an admitted call is assigned to the macro or femto tier.
#[derive(Debug, Clone)]
pub enum AssignmentMode {
    /// Bernoulli per arrival with the per-class probability from the traffic
    /// model.
    Probability,
    /// Sample a user position and velocity, then evaluate the RSS trigger at
    /// the nearest femto plus the policy filter.
    Geometric {
        deployment: Deployment,
        radio: RadioParams,
        policy: Policy,
        velocity: VelocityModel,
    },
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub capacities: [u32; 4],
    pub traffic: TrafficModel,
    pub arrivals: ArrivalKind,
    pub assignment: AssignmentMode,
    /// End of simulated time.
    pub horizon: f64,
    /// Measurements start here; everything earlier is discarded.
    pub warmup: f64,
    pub seed: u64,
}

/// A point estimate with its 95% confidence half-width from batch means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub half_width: f64,
}

impl Estimate {
    pub fn overlaps(&self, other: &Estimate) -> bool {
        (self.mean - other.mean).abs() <= self.half_width + other.half_width
    }
}

/// Time-averaged metrics over the post-warmup window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimStats {
    pub horizon: f64,
    pub warmup: f64,
    pub seed: u64,
    pub events: u64,
    pub batches: usize,
    pub admitted: PerClass<u64>,
    pub blocked: PerClass<u64>,
    pub handed_off: PerClass<u64>,
    /// Expected femto-resident call count.
    pub n_h: Estimate,
    pub occupancy: Estimate,
    pub macro_load: Estimate,
    pub femto_load: Estimate,
    /// Time-average resident calls per class.
    pub per_class_occupancy: PerClass<f64>,
    /// Fraction of time the system held no calls at all.
    pub empty_fraction: f64,
}

impl SimStats {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("stats serialize")
    }
}

/// Pareto interarrival sampler with the scale chosen so the mean matches
/// `mean`: `x_m = mean * (alpha - 1) / alpha`.
#[derive(Debug, Clone)]
pub struct ParetoInterarrivals {
    dist: Pareto<f64>,
    rng: ChaCha8Rng,
    scale: f64,
}

impl ParetoInterarrivals {
    pub fn new(shape_alpha: f64, mean: f64, seed: u64) -> Result<Self, DesError> {
        if !(shape_alpha > 1.0) {
            return Err(DesError::InvalidParetoShape(shape_alpha));
        }
        if !(mean > 0.0) {
            return Err(DesError::InvalidMean(mean));
        }
        let scale = mean * (shape_alpha - 1.0) / shape_alpha;
        Ok(ParetoInterarrivals {
            dist: Pareto::new(scale, shape_alpha).expect("validated parameters"),
            rng: ChaCha8Rng::seed_from_u64(seed),
            scale,
        })
    }

    /// Smallest value the sampler can produce.
    pub fn scale(&self) -> f64 {
        self.scale
    }
}

impl Iterator for ParetoInterarrivals {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        Some(self.dist.sample(&mut self.rng))
    }
}

// Event queue ordering: earliest time first, ties by insertion sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
struct QueuedEvent {
    time: f64,
    seq: u64,
    kind: EventKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EventKind {
    Arrival(ServiceClass),
    Departure { class: ServiceClass, femto: bool },
}

impl Eq for QueuedEvent {}

impl Ord for QueuedEvent {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap, we need the earliest event.
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for QueuedEvent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// One record of the optional event trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRecord {
    pub time: f64,
    pub event: &'static str,
    pub class: ServiceClass,
    pub femto: bool,
}

enum InterarrivalSampler {
    Exponential(Exp<f64>, ChaCha8Rng),
    Pareto(ParetoInterarrivals),
}

impl InterarrivalSampler {
    fn next(&mut self) -> f64 {
        match self {
            InterarrivalSampler::Exponential(d, rng) => d.sample(rng),
            InterarrivalSampler::Pareto(p) => p.next().unwrap(),
        }
    }
}

// Per-batch accumulator for one time-averaged metric.
struct BatchAverages {
    start: f64,
    batch_span: f64,
    sums: Vec<f64>,
}

const BATCH_COUNT: usize = 20;
// Student t quantile at 97.5% with BATCH_COUNT - 1 degrees of freedom.
const T_CRIT: f64 = 2.093;

impl BatchAverages {
    fn new(start: f64, end: f64) -> Self {
        BatchAverages {
            start,
            batch_span: (end - start) / BATCH_COUNT as f64,
            sums: vec![0.0; BATCH_COUNT],
        }
    }

    /// Add `value` integrated over [t0, t1), splitting across batch bounds.
    fn add(&mut self, mut t0: f64, t1: f64, value: f64) {
        while t0 < t1 {
            let idx = (((t0 - self.start) / self.batch_span) as usize).min(BATCH_COUNT - 1);
            let batch_end = self.start + (idx + 1) as f64 * self.batch_span;
            let seg_end = t1.min(batch_end);
            self.sums[idx] += value * (seg_end - t0);
            if seg_end <= t0 {
                break; // numeric corner: zero-length segment
            }
            t0 = seg_end;
        }
    }

    fn estimate(&self) -> Estimate {
        let means: Vec<f64> = self.sums.iter().map(|s| s / self.batch_span).collect();
        let mean = means.iter().sum::<f64>() / BATCH_COUNT as f64;
        let var = means
            .iter()
            .map(|m| (m - mean) * (m - mean))
            .sum::<f64>()
            / (BATCH_COUNT - 1) as f64;
        Estimate {
            mean,
            half_width: T_CRIT * (var / BATCH_COUNT as f64).sqrt(),
        }
    }
}

/// Run the simulation. Deterministic for a fixed seed.
pub fn simulate(config: &SimConfig) -> Result<SimStats, DesError> {
    simulate_traced(config, &mut |_| {})
}

/// Run the simulation, invoking `trace` for every admitted or departing call.
pub fn simulate_traced(
    config: &SimConfig,
    trace: &mut dyn FnMut(TraceRecord),
) -> Result<SimStats, DesError> {
    if !(config.warmup > 0.0) || config.horizon <= config.warmup {
        return Err(DesError::InvalidWindow {
            horizon: config.horizon,
            warmup: config.warmup,
        });
    }
    config
        .traffic
        .validate()
        .map_err(|e| DesError::InvalidTraffic(e.to_string()))?;

    // Independent, stream-separated random sources per concern keep the run
    // reproducible regardless of event interleaving.
    let stream_rng = |stream: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(stream);
        rng
    };

    let mut interarrivals: Vec<InterarrivalSampler> = Vec::with_capacity(4);
    for class in ServiceClass::ALL {
        let rate = config.traffic.lambda.get(class);
        let sampler = match config.arrivals {
            ArrivalKind::Exponential => InterarrivalSampler::Exponential(
                Exp::new(rate).expect("positive rate"),
                stream_rng(1000 + class.index() as u64),
            ),
            ArrivalKind::Pareto { shape_alpha } => {
                InterarrivalSampler::Pareto(ParetoInterarrivals::new(
                    shape_alpha,
                    1.0 / rate,
                    config
                        .seed
                        .wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(1 + class.index() as u64)),
                )?)
            }
        };
        interarrivals.push(sampler);
    }
    let mut service_rngs: Vec<ChaCha8Rng> = ServiceClass::ALL
        .iter()
        .map(|c| stream_rng(2000 + c.index() as u64))
        .collect();
    let mut assign_rng = stream_rng(3000);

    let mut heap: BinaryHeap<QueuedEvent> = BinaryHeap::new();
    let mut seq: u64 = 0;
    let push = |heap: &mut BinaryHeap<QueuedEvent>, seq: &mut u64, time: f64, kind: EventKind| {
        heap.push(QueuedEvent {
            time,
            seq: *seq,
            kind,
        });
        *seq += 1;
    };

    for class in ServiceClass::ALL {
        let t = interarrivals[class.index()].next();
        push(&mut heap, &mut seq, t, EventKind::Arrival(class));
    }

    let mut n = [0u32; 4];
    let mut n_h: u32 = 0;
    let mut n_femto = [0u32; 4];

    let mut admitted = PerClass::uniform(0u64);
    let mut blocked = PerClass::uniform(0u64);
    let mut handed_off = PerClass::uniform(0u64);
    let mut events: u64 = 0;

    let mut acc_nh = BatchAverages::new(config.warmup, config.horizon);
    let mut acc_occ = BatchAverages::new(config.warmup, config.horizon);
    let mut acc_ml = BatchAverages::new(config.warmup, config.horizon);
    let mut acc_fl = BatchAverages::new(config.warmup, config.horizon);
    let mut acc_empty = 0.0f64;
    let mut acc_class = [0.0f64; 4];

    let mut now = 0.0f64;

    while let Some(ev) = heap.pop() {
        let t_next = ev.time.min(config.horizon);
        // Integrate the state over [now, t_next) where it overlaps the
        // measurement window.
        let t0 = now.max(config.warmup);
        if t_next > t0 {
            let total: u32 = n.iter().sum();
            acc_nh.add(t0, t_next, n_h as f64);
            acc_occ.add(t0, t_next, total as f64);
            if total > 0 {
                acc_ml.add(t0, t_next, (total - n_h) as f64 / total as f64);
                acc_fl.add(t0, t_next, n_h as f64 / total as f64);
            } else {
                acc_empty += t_next - t0;
            }
            for c in 0..4 {
                acc_class[c] += n[c] as f64 * (t_next - t0);
            }
        }
        if ev.time > config.horizon {
            break;
        }
        now = ev.time;
        events += 1;

        match ev.kind {
            EventKind::Arrival(class) => {
                let ci = class.index();
                // Next arrival of this class.
                let dt = interarrivals[ci].next();
                push(&mut heap, &mut seq, now + dt, EventKind::Arrival(class));

                if n[ci] >= config.capacities[ci] {
                    if now >= config.warmup {
                        blocked.0[ci] += 1;
                    }
                    continue;
                }

                let femto = match &config.assignment {
                    AssignmentMode::Probability => {
                        let p = config.traffic.p_ho.get(class);
                        p > 0.0 && assign_rng.gen::<f64>() < p
                    }
                    AssignmentMode::Geometric {
                        deployment,
                        radio: radio_params,
                        policy,
                        velocity,
                    } => {
                        let user = sample_user(
                            &mut assign_rng,
                            deployment.macro_radius_m,
                            velocity,
                            class,
                        );
                        let d_macro = (user.position[0] * user.position[0]
                            + user.position[1] * user.position[1])
                            .sqrt()
                            .max(1e-6);
                        let rss_m =
                            radio::rss_macro(radio_params, d_macro).expect("positive distance");
                        let triggered = match deployment.nearest_femto(user.position) {
                            Some((_, d)) => {
                                let rss_f = radio::rss_femto(radio_params, d.max(1e-6))
                                    .expect("positive distance");
                                radio::handoff_trigger(radio_params, rss_m, rss_f)
                            }
                            None => false,
                        };
                        triggered
                            && policy
                                .permits_handoff(class, user.velocity_kmh)
                                .unwrap_or(false)
                    }
                };

                n[ci] += 1;
                if femto {
                    n_h += 1;
                    n_femto[ci] += 1;
                }
                if now >= config.warmup {
                    admitted.0[ci] += 1;
                    if femto {
                        handed_off.0[ci] += 1;
                    }
                }
                trace(TraceRecord {
                    time: now,
                    event: "arrival",
                    class,
                    femto,
                });

                let mu = config.traffic.mu.get(class);
                let hold = Exp::new(mu).expect("positive rate").sample(&mut service_rngs[ci]);
                push(
                    &mut heap,
                    &mut seq,
                    now + hold,
                    EventKind::Departure { class, femto },
                );
            }
            EventKind::Departure { class, femto } => {
                let ci = class.index();
                n[ci] -= 1;
                if femto {
                    n_h -= 1;
                    n_femto[ci] -= 1;
                }
                trace(TraceRecord {
                    time: now,
                    event: "departure",
                    class,
                    femto,
                });
            }
        }
    }

    let window = config.horizon - config.warmup;
    Ok(SimStats {
        horizon: config.horizon,
        warmup: config.warmup,
        seed: config.seed,
        events,
        batches: BATCH_COUNT,
        admitted,
        blocked,
        handed_off,
        n_h: acc_nh.estimate(),
        occupancy: acc_occ.estimate(),
        macro_load: acc_ml.estimate(),
        femto_load: acc_fl.estimate(),
        per_class_occupancy: PerClass([
            acc_class[0] / window,
            acc_class[1] / window,
            acc_class[2] / window,
            acc_class[3] / window,
        ]),
        empty_fraction: acc_empty / window,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::PerClass;

    fn traffic(lambda: f64, mu: f64, p_ho: f64) -> TrafficModel {
        TrafficModel::new(
            PerClass::uniform(lambda),
            PerClass::uniform(mu),
            PerClass::uniform(p_ho),
        )
        .unwrap()
    }

    fn base_config() -> SimConfig {
        SimConfig {
            capacities: [3; 4],
            traffic: traffic(0.2, 0.2, 0.5),
            arrivals: ArrivalKind::Exponential,
            assignment: AssignmentMode::Probability,
            horizon: 20_000.0,
            warmup: 2_000.0,
            seed: 42,
        }
    }

    #[test]
    fn pareto_sampler_scale_and_support() {
        let sampler = ParetoInterarrivals::new(1.5, 5.0, 7).unwrap();
        let x_m = 5.0 / 3.0;
        assert!((sampler.scale() - x_m).abs() < 1e-12);
        for x in sampler.take(10_000) {
            assert!(x >= x_m);
        }
    }

    #[test]
    fn pareto_sampler_mean_converges() {
        let sampler = ParetoInterarrivals::new(1.5, 5.0, 7).unwrap();
        let n = 1_000_000;
        let mean = sampler.take(n).sum::<f64>() / n as f64;
        assert!((mean - 5.0).abs() < 0.2, "sample mean {mean}");
    }

    #[test]
    fn pareto_sampler_is_deterministic() {
        let a: Vec<f64> = ParetoInterarrivals::new(1.5, 5.0, 9).unwrap().take(100).collect();
        let b: Vec<f64> = ParetoInterarrivals::new(1.5, 5.0, 9).unwrap().take(100).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn infinite_mean_shape_is_rejected() {
        assert_eq!(
            ParetoInterarrivals::new(1.0, 5.0, 7).unwrap_err(),
            DesError::InvalidParetoShape(1.0)
        );
        assert_eq!(
            ParetoInterarrivals::new(0.9, 5.0, 7).unwrap_err(),
            DesError::InvalidParetoShape(0.9)
        );
    }

    #[test]
    fn invalid_window_is_rejected() {
        let mut config = base_config();
        config.horizon = 100.0;
        config.warmup = 100.0;
        assert!(matches!(
            simulate(&config),
            Err(DesError::InvalidWindow { .. })
        ));
        config.warmup = 0.0;
        assert!(matches!(
            simulate(&config),
            Err(DesError::InvalidWindow { .. })
        ));
    }

    #[test]
    fn runs_are_deterministic_for_a_seed() {
        let config = base_config();
        let a = simulate(&config).unwrap();
        let b = simulate(&config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_handoff_fraction_keeps_femtos_empty() {
        let mut config = base_config();
        config.traffic = traffic(0.2, 0.2, 0.0);
        let stats = simulate(&config).unwrap();
        assert_eq!(stats.n_h.mean, 0.0);
        assert_eq!(stats.femto_load.mean, 0.0);
        assert_eq!(stats.handed_off.0.iter().sum::<u64>(), 0);
    }

    #[test]
    fn vanishing_arrival_rate_leaves_the_system_empty() {
        let mut config = base_config();
        config.traffic = traffic(1e-4, 0.2, 0.5);
        config.horizon = 50_000.0;
        config.warmup = 1_000.0;
        let stats = simulate(&config).unwrap();
        assert!(stats.empty_fraction > 0.99, "empty {}", stats.empty_fraction);
    }

    #[test]
    fn littles_law_holds_per_class() {
        let config = base_config();
        let stats = simulate(&config).unwrap();
        let window = config.horizon - config.warmup;
        for c in 0..4 {
            let rate = stats.admitted.0[c] as f64 / window;
            let expected = rate / 0.2; // L = lambda_eff / mu
            let observed = stats.per_class_occupancy.0[c];
            let rel = (observed - expected).abs() / expected;
            assert!(rel < 0.05, "class {c}: L {observed} vs lambda/mu {expected}");
        }
    }

    #[test]
    fn blocking_appears_at_capacity() {
        let mut config = base_config();
        config.capacities = [1; 4];
        config.traffic = traffic(0.4, 0.2, 0.0);
        let stats = simulate(&config).unwrap();
        // M/M/1/1 with a = 2: blocking 2/3.
        for c in 0..4 {
            let total = stats.admitted.0[c] + stats.blocked.0[c];
            let b = stats.blocked.0[c] as f64 / total as f64;
            assert!((b - 2.0 / 3.0).abs() < 0.03, "class {c} blocking {b}");
        }
    }

    #[test]
    fn loads_are_complementary() {
        let stats = simulate(&base_config()).unwrap();
        let total = stats.macro_load.mean + stats.femto_load.mean + stats.empty_fraction;
        assert!((total - 1.0).abs() < 1e-9, "partition {total}");
    }

    #[test]
    fn geometric_mode_matches_probability_mode_fraction() {
        use crate::deployment::deploy_femtos;
        let deployment = deploy_femtos(7, 1200.0, 100.0, 800).unwrap();
        let radio = RadioParams::default();
        let policy = Policy::conventional();
        let velocity = VelocityModel::default();

        // Estimate the geometric fraction first, then check the simulator's
        // handed-off share against it.
        let est = crate::deployment::estimate_handoff_fraction(
            &deployment,
            &radio,
            &policy,
            ServiceClass::Be,
            &velocity,
            100_000,
            5,
        );

        let mut config = base_config();
        config.assignment = AssignmentMode::Geometric {
            deployment,
            radio,
            policy,
            velocity,
        };
        config.horizon = 50_000.0;
        config.warmup = 2_000.0;
        let stats = simulate(&config).unwrap();
        let admitted: u64 = stats.admitted.0.iter().sum();
        let handed: u64 = stats.handed_off.0.iter().sum();
        let share = handed as f64 / admitted as f64;
        assert!(
            (share - est.probability).abs() < 0.02,
            "geometric femto share {share} vs Monte Carlo estimate {}",
            est.probability
        );
    }

    #[test]
    fn trace_reports_arrivals_and_departures() {
        let mut config = base_config();
        config.horizon = 100.0;
        config.warmup = 10.0;
        let mut arrivals = 0u32;
        let mut departures = 0u32;
        simulate_traced(&config, &mut |rec| match rec.event {
            "arrival" => arrivals += 1,
            "departure" => departures += 1,
            _ => unreachable!(),
        })
        .unwrap();
        assert!(arrivals > 0);
        assert!(departures > 0);
        assert!(departures <= arrivals);
    }
}
