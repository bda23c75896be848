//! Stationary performance metrics of the solved chain.

use serde::{Deserialize, Serialize};

use crate::policy::PerClass;

use super::solver::SteadyState;
use super::space::StateSpace;
use super::TrafficModel;

/// Expected number of femto-resident calls, `sum_s n_h(s) * pi(s)`.
///
/// This is the chain's handoff metric. It is an expectation, not a
/// probability: under heavy load it exceeds 1.
pub fn handoff_probability(space: &StateSpace, ss: &SteadyState) -> f64 {
    space
        .states
        .iter()
        .zip(&ss.pi)
        .map(|(s, &p)| s.n_h as f64 * p)
        .sum()
}

/// Stationary mean share of resident calls served by the macro BS,
/// `sum_{s: T(s)>0} ((T(s) - n_h(s)) / T(s)) * pi(s)`. The empty state
/// contributes nothing.
pub fn macro_load(space: &StateSpace, ss: &SteadyState) -> f64 {
    space
        .states
        .iter()
        .zip(&ss.pi)
        .filter(|(s, _)| s.total() > 0)
        .map(|(s, &p)| (s.total() - s.n_h as u32) as f64 / s.total() as f64 * p)
        .sum()
}

/// Stationary mean share of resident calls served by femto BSs,
/// `sum_{s: T(s)>0} (n_h(s) / T(s)) * pi(s)`.
pub fn femto_load(space: &StateSpace, ss: &SteadyState) -> f64 {
    space
        .states
        .iter()
        .zip(&ss.pi)
        .filter(|(s, _)| s.total() > 0)
        .map(|(s, &p)| s.n_h as f64 / s.total() as f64 * p)
        .sum()
}

/// Per-class probability that an arriving call is lost: the macro stream is
/// blocked when the class is at capacity; the femto stream is additionally
/// blocked when incrementing `n_h` would leave the state space.
pub fn blocking_probability(
    space: &StateSpace,
    traffic: &TrafficModel,
    ss: &SteadyState,
) -> PerClass<f64> {
    let mut blocking = [0.0f64; 4];
    for (s, &p) in space.states.iter().zip(&ss.pi) {
        let eligible_count = s.eligible_total(space.eligible);
        for c in 0..4 {
            let at_capacity = s.n[c] as u32 >= space.capacities[c];
            let femto_blocked = at_capacity
                || (!space.eligible[c] && u32::from(s.n_h) >= eligible_count);
            let p_ho = traffic.p_ho.0[c];
            let lost_share = (1.0 - p_ho) * f64::from(at_capacity) + p_ho * f64::from(femto_blocked);
            blocking[c] += p * lost_share;
        }
    }
    PerClass(blocking)
}

/// Bundle of the stationary metrics reported for one solved chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainMetrics {
    pub states: usize,
    /// Expected femto-resident call count (the handoff metric; may exceed 1).
    pub ho_prob: f64,
    pub macro_load: f64,
    pub femto_load: f64,
    pub empty_prob: f64,
    pub expected_occupancy: f64,
    pub blocking: PerClass<f64>,
    pub residual: f64,
}

pub fn evaluate_metrics(
    space: &StateSpace,
    traffic: &TrafficModel,
    ss: &SteadyState,
) -> ChainMetrics {
    ChainMetrics {
        states: space.len(),
        ho_prob: handoff_probability(space, ss),
        macro_load: macro_load(space, ss),
        femto_load: femto_load(space, ss),
        empty_prob: ss.pi[space.empty_index()],
        expected_occupancy: space
            .states
            .iter()
            .zip(&ss.pi)
            .map(|(s, &p)| s.total() as f64 * p)
            .sum(),
        blocking: blocking_probability(space, traffic, ss),
        residual: ss.residual,
    }
}

/// Render the stationary distribution as CSV, one row per state.
pub fn distribution_csv(space: &StateSpace, ss: &SteadyState) -> String {
    let mut out = String::from("n_u,n_r,n_n,n_b,n_h,probability\n");
    for (s, &p) in space.states.iter().zip(&ss.pi) {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            s.n[0], s.n[1], s.n[2], s.n[3], s.n_h, p
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctmc::{build_generator, build_state_space, solve_steady_state, SolverOptions};
    use crate::policy::Policy;

    fn solve(
        capacities: [u32; 4],
        traffic: &TrafficModel,
    ) -> (StateSpace, SteadyState) {
        let space = build_state_space(capacities, &Policy::conventional()).unwrap();
        let q = build_generator(&space, traffic).unwrap();
        let ss = solve_steady_state(&q, &SolverOptions::default()).unwrap();
        (space, ss)
    }

    fn traffic(p_ho: [f64; 4]) -> TrafficModel {
        TrafficModel::new(
            PerClass::uniform(0.2),
            PerClass::uniform(0.2),
            PerClass(p_ho),
        )
        .unwrap()
    }

    #[test]
    fn loads_partition_the_non_empty_mass() {
        let t = traffic([0.3, 0.5, 0.2, 0.8]);
        let (space, ss) = solve([2; 4], &t);
        let ml = macro_load(&space, &ss);
        let fl = femto_load(&space, &ss);
        let empty = ss.pi[space.empty_index()];
        assert!((ml + fl + empty - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_handoff_fraction_means_zero_femto_metrics() {
        let t = traffic([0.0; 4]);
        let (space, ss) = solve([2; 4], &t);
        assert_eq!(handoff_probability(&space, &ss), 0.0);
        assert_eq!(femto_load(&space, &ss), 0.0);
        let ml = macro_load(&space, &ss);
        let empty = ss.pi[space.empty_index()];
        assert!((ml - (1.0 - empty)).abs() < 1e-12);
    }

    #[test]
    fn full_handoff_makes_every_resident_call_femto() {
        let t = traffic([1.0; 4]);
        let (space, ss) = solve([1; 4], &t);
        let ho = handoff_probability(&space, &ss);
        let occupancy: f64 = space
            .states
            .iter()
            .zip(&ss.pi)
            .map(|(s, &p)| s.total() as f64 * p)
            .sum();
        assert!((ho - occupancy).abs() < 1e-12);
    }

    #[test]
    fn symmetric_traffic_is_permutation_invariant() {
        let t = traffic([0.5; 4]);
        let (space, ss) = solve([2; 4], &t);
        for (s, &p) in space.states.iter().zip(&ss.pi) {
            // Swap UGS with BE and rtPS with nrtPS.
            let permuted = crate::ctmc::CtmcState {
                n: [s.n[3], s.n[2], s.n[1], s.n[0]],
                n_h: s.n_h,
            };
            let pi_perm = ss.pi[space.index_of(&permuted).unwrap()];
            assert!(
                (p - pi_perm).abs() < 1e-12,
                "state {s:?} p={p} vs permuted {pi_perm}"
            );
        }
    }

    #[test]
    fn femto_load_is_nondecreasing_in_handoff_fraction() {
        let mut last_fl = -1.0;
        let mut last_ml = 2.0;
        for p in [0.0, 0.2, 0.4, 0.6, 0.8, 1.0] {
            let t = traffic([p; 4]);
            let (space, ss) = solve([2; 4], &t);
            let fl = femto_load(&space, &ss);
            let ml = macro_load(&space, &ss);
            assert!(fl >= last_fl - 1e-12, "FL dropped at p={p}");
            assert!(ml <= last_ml + 1e-12, "ML rose at p={p}");
            last_fl = fl;
            last_ml = ml;
        }
    }

    #[test]
    fn erlang_b_marginals_with_no_handoff() {
        // With p_ho = 0 the classes decouple into independent M/M/C/C queues,
        // so each class marginal is the truncated-Erlang distribution.
        let lambda = 0.25;
        let mu = 0.2;
        let cap = 3u32;
        let t = TrafficModel::new(
            PerClass::uniform(lambda),
            PerClass::uniform(mu),
            PerClass::uniform(0.0),
        )
        .unwrap();
        let (space, ss) = solve([cap; 4], &t);

        let a = lambda / mu;
        let mut weights = Vec::new();
        let mut fact = 1.0;
        for k in 0..=cap {
            if k > 0 {
                fact *= k as f64;
            }
            weights.push(a.powi(k as i32) / fact);
        }
        let norm: f64 = weights.iter().sum();

        for class in 0..4 {
            for k in 0..=cap {
                let marginal: f64 = space
                    .states
                    .iter()
                    .zip(&ss.pi)
                    .filter(|(s, _)| s.n[class] as u32 == k)
                    .map(|(_, &p)| p)
                    .sum();
                let expected = weights[k as usize] / norm;
                assert!(
                    (marginal - expected).abs() < 1e-9,
                    "class {class} occupancy {k}: {marginal} vs Erlang {expected}"
                );
            }
        }
    }

    #[test]
    fn blocking_matches_erlang_b_when_independent() {
        let lambda = 0.4;
        let mu = 0.2;
        let cap = 2u32;
        let t = TrafficModel::new(
            PerClass::uniform(lambda),
            PerClass::uniform(mu),
            PerClass::uniform(0.0),
        )
        .unwrap();
        let (space, ss) = solve([cap; 4], &t);
        let blocking = blocking_probability(&space, &t, &ss);

        let a = lambda / mu; // 2.0
        let denom = 1.0 + a + a * a / 2.0;
        let erlang_b = (a * a / 2.0) / denom;
        for c in 0..4 {
            assert!(
                (blocking.0[c] - erlang_b).abs() < 1e-9,
                "class {c}: {} vs {erlang_b}",
                blocking.0[c]
            );
        }
    }

    #[test]
    fn distribution_csv_has_one_row_per_state() {
        let t = traffic([0.5; 4]);
        let (space, ss) = solve([1; 4], &t);
        let csv = distribution_csv(&space, &ss);
        assert_eq!(csv.lines().count(), space.len() + 1);
        assert!(csv.starts_with("n_u,n_r,n_n,n_b,n_h,probability\n"));
    }
}
