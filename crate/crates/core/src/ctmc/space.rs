//! Enumeration of the reachable chain states under the per-class capacities
//! and the femto-eligibility constraint of the active policy.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::policy::Policy;

use super::CtmcError;

/// Default cap on the enumerated state count.
pub const DEFAULT_STATE_CEILING: usize = 2_000_000;

/// One chain state: per-class resident call counts plus the femto-resident
/// call count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CtmcState {
    /// Resident calls per class, indexed by `ServiceClass::index()`.
    pub n: [u16; 4],
    /// Calls currently served by femto BSs.
    pub n_h: u16,
}

impl CtmcState {
    pub fn total(&self) -> u32 {
        self.n.iter().map(|&c| c as u32).sum()
    }

    /// Number of femto-eligible calls in this state, given which classes the
    /// policy allows onto femtos.
    pub fn eligible_total(&self, eligible: [bool; 4]) -> u32 {
        self.n
            .iter()
            .zip(eligible)
            .filter(|&(_, e)| e)
            .map(|(&c, _)| c as u32)
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0 && self.n_h == 0
    }
}

/// The enumerated state space with its index map.
#[derive(Debug, Clone)]
pub struct StateSpace {
    pub capacities: [u32; 4],
    /// Which classes may ever reside on a femto BS under the active policy.
    pub eligible: [bool; 4],
    pub states: Vec<CtmcState>,
    index: HashMap<CtmcState, usize>,
}

impl StateSpace {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, state: &CtmcState) -> Option<usize> {
        self.index.get(state).copied()
    }

    /// Index of the all-empty state (always the first in enumeration order).
    pub fn empty_index(&self) -> usize {
        0
    }

    /// Whether a state satisfies the capacity and eligibility constraints.
    pub fn contains(&self, state: &CtmcState) -> bool {
        self.index.contains_key(state)
    }
}

/// Enumerate every state with `n_c <= C_c` per class and
/// `n_h <= ` (femto-eligible call count). States are ordered
/// lexicographically by `(n_u, n_r, n_n, n_b, n_h)`, so the empty state is
/// index 0.
pub fn build_state_space(capacities: [u32; 4], policy: &Policy) -> Result<StateSpace, CtmcError> {
    build_state_space_with_ceiling(capacities, policy, DEFAULT_STATE_CEILING)
}

pub fn build_state_space_with_ceiling(
    capacities: [u32; 4],
    policy: &Policy,
    ceiling: usize,
) -> Result<StateSpace, CtmcError> {
    if capacities.iter().any(|&c| c == 0) {
        return Err(CtmcError::ZeroCapacity(capacities));
    }
    let eligible = [
        policy.class_eligible(crate::policy::ServiceClass::Ugs),
        policy.class_eligible(crate::policy::ServiceClass::Rtps),
        policy.class_eligible(crate::policy::ServiceClass::Nrtps),
        policy.class_eligible(crate::policy::ServiceClass::Be),
    ];

    // Closed-form count first so oversize configurations fail fast.
    let mut count: usize = 0;
    for n_u in 0..=capacities[0] {
        for n_r in 0..=capacities[1] {
            for n_n in 0..=capacities[2] {
                for n_b in 0..=capacities[3] {
                    let e = CtmcState {
                        n: [n_u as u16, n_r as u16, n_n as u16, n_b as u16],
                        n_h: 0,
                    }
                    .eligible_total(eligible);
                    count += e as usize + 1;
                    if count > ceiling {
                        return Err(CtmcError::SizeExceeded { count, ceiling });
                    }
                }
            }
        }
    }

    let mut states = Vec::with_capacity(count);
    let mut index = HashMap::with_capacity(count);
    for n_u in 0..=capacities[0] as u16 {
        for n_r in 0..=capacities[1] as u16 {
            for n_n in 0..=capacities[2] as u16 {
                for n_b in 0..=capacities[3] as u16 {
                    let base = CtmcState {
                        n: [n_u, n_r, n_n, n_b],
                        n_h: 0,
                    };
                    let e = base.eligible_total(eligible) as u16;
                    for n_h in 0..=e {
                        let s = CtmcState {
                            n: base.n,
                            n_h,
                        };
                        index.insert(s, states.len());
                        states.push(s);
                    }
                }
            }
        }
    }
    debug_assert_eq!(states.len(), count);

    Ok(StateSpace {
        capacities,
        eligible,
        states,
        index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::{Policy, PolicyKind};

    // Independent brute-force enumeration used as the oracle for counts.
    fn brute_force_count(cap: u32, eligible: [bool; 4]) -> usize {
        let mut count = 0;
        for n_u in 0..=cap {
            for n_r in 0..=cap {
                for n_n in 0..=cap {
                    for n_b in 0..=cap {
                        let counts = [n_u, n_r, n_n, n_b];
                        let e: u32 = counts
                            .iter()
                            .zip(eligible)
                            .filter(|&(_, el)| el)
                            .map(|(&c, _)| c)
                            .sum();
                        for n_h in 0..=e {
                            let _ = n_h;
                            count += 1;
                        }
                    }
                }
            }
        }
        count
    }

    #[test]
    fn conventional_unit_capacities_enumerate_48_states() {
        let space = build_state_space([1; 4], &Policy::conventional()).unwrap();
        assert_eq!(space.len(), 48);
        assert_eq!(space.len(), brute_force_count(1, [true; 4]));
    }

    #[test]
    fn hard_qos_unit_capacities_enumerate_32_states() {
        // Real-time classes cannot reside on femtos, so n_h is capped by
        // n_n + n_b. Brute-force enumeration of n_c in {0,1} with that cap
        // yields 32 states.
        let policy = Policy::new(PolicyKind::HardQos, 10.0).unwrap();
        let space = build_state_space([1; 4], &policy).unwrap();
        assert_eq!(space.len(), brute_force_count(1, [false, false, true, true]));
        assert_eq!(space.len(), 32);
    }

    #[test]
    fn desk_scale_count_matches_brute_force() {
        let space = build_state_space([3; 4], &Policy::conventional()).unwrap();
        assert_eq!(space.len(), brute_force_count(3, [true; 4]));
        let hard = build_state_space([3; 4], &Policy::new(PolicyKind::HardQos, 10.0).unwrap())
            .unwrap();
        assert_eq!(hard.len(), brute_force_count(3, [false, false, true, true]));
    }

    #[test]
    fn zero_capacity_is_rejected() {
        assert!(matches!(
            build_state_space([1, 0, 1, 1], &Policy::conventional()),
            Err(CtmcError::ZeroCapacity(_))
        ));
    }

    #[test]
    fn ceiling_is_enforced_with_offending_count() {
        match build_state_space_with_ceiling([3; 4], &Policy::conventional(), 100) {
            Err(CtmcError::SizeExceeded { count, ceiling }) => {
                assert!(count > 100);
                assert_eq!(ceiling, 100);
            }
            other => panic!("expected size error, got {other:?}"),
        }
    }

    #[test]
    fn index_map_is_a_bijection() {
        let space = build_state_space([2; 4], &Policy::conventional()).unwrap();
        for (i, s) in space.states.iter().enumerate() {
            assert_eq!(space.index_of(s), Some(i));
        }
        assert!(space.states[space.empty_index()].is_empty());
    }

    #[test]
    fn invalid_states_are_excluded() {
        let policy = Policy::new(PolicyKind::HardQos, 10.0).unwrap();
        let space = build_state_space([2; 4], &policy).unwrap();
        // A femto-resident UGS call is impossible under hard QoS.
        assert!(!space.contains(&CtmcState {
            n: [1, 0, 0, 0],
            n_h: 1
        }));
        assert!(space.contains(&CtmcState {
            n: [1, 0, 1, 0],
            n_h: 1
        }));
    }
}
