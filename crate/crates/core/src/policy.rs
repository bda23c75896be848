//! Handoff decision policies: which calls are allowed to move from the macro
//! BS onto a femto BS, as a function of user velocity and service class.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The four service classes carried by the network. UGS and rtPS are
/// real-time; nrtPS and BE are not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ServiceClass {
    Ugs,
    Rtps,
    Nrtps,
    Be,
}

impl ServiceClass {
    pub const ALL: [ServiceClass; 4] = [
        ServiceClass::Ugs,
        ServiceClass::Rtps,
        ServiceClass::Nrtps,
        ServiceClass::Be,
    ];

    pub fn is_realtime(self) -> bool {
        matches!(self, ServiceClass::Ugs | ServiceClass::Rtps)
    }

    /// Stable index used to address per-class arrays.
    pub fn index(self) -> usize {
        match self {
            ServiceClass::Ugs => 0,
            ServiceClass::Rtps => 1,
            ServiceClass::Nrtps => 2,
            ServiceClass::Be => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ServiceClass::Ugs => "ugs",
            ServiceClass::Rtps => "rtps",
            ServiceClass::Nrtps => "nrtps",
            ServiceClass::Be => "be",
        }
    }
}

impl fmt::Display for ServiceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-class value container indexed by [`ServiceClass`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerClass<T>(pub [T; 4]);

impl<T: Copy> PerClass<T> {
    pub fn uniform(value: T) -> Self {
        PerClass([value; 4])
    }

    pub fn get(&self, class: ServiceClass) -> T {
        self.0[class.index()]
    }

    pub fn set(&mut self, class: ServiceClass, value: T) {
        self.0[class.index()] = value;
    }

    pub fn map<U: Copy>(&self, f: impl Fn(T) -> U) -> PerClass<U> {
        PerClass([f(self.0[0]), f(self.0[1]), f(self.0[2]), f(self.0[3])])
    }
}

/// How aggressively handoff is suppressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    /// Pure RSS comparison; every call may hand off.
    Conventional,
    /// Fast-moving users stay on the macro BS.
    #[serde(rename = "soft")]
    SoftQos,
    /// Fast-moving users and all real-time calls stay on the macro BS.
    #[serde(rename = "hard")]
    HardQos,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 3] = [
        PolicyKind::Conventional,
        PolicyKind::SoftQos,
        PolicyKind::HardQos,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Conventional => "conventional",
            PolicyKind::SoftQos => "soft",
            PolicyKind::HardQos => "hard",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = PolicyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "conventional" => Ok(PolicyKind::Conventional),
            "soft" => Ok(PolicyKind::SoftQos),
            "hard" => Ok(PolicyKind::HardQos),
            other => Err(PolicyError::UnknownKind(other.to_string())),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum PolicyError {
    #[error("unknown policy kind {0:?}, expected one of: conventional, soft, hard")]
    UnknownKind(String),
    #[error("velocity must be nonnegative, got {0}")]
    NegativeVelocity(f64),
    #[error("velocity threshold must be positive, got {0}")]
    NonPositiveThreshold(f64),
}

/// A handoff decision policy: a kind plus the velocity threshold that the
/// soft and hard variants filter on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub kind: PolicyKind,
    pub velocity_threshold_kmh: f64,
}

impl Policy {
    pub fn new(kind: PolicyKind, velocity_threshold_kmh: f64) -> Result<Self, PolicyError> {
        if !(velocity_threshold_kmh > 0.0) {
            return Err(PolicyError::NonPositiveThreshold(velocity_threshold_kmh));
        }
        Ok(Policy {
            kind,
            velocity_threshold_kmh,
        })
    }

    pub fn conventional() -> Self {
        Policy {
            kind: PolicyKind::Conventional,
            velocity_threshold_kmh: 10.0,
        }
    }

    /// Whether a call of the given class moving at the given velocity is
    /// allowed to hand off to a femto BS. A velocity exactly at the threshold
    /// is slow enough to hand off.
    pub fn permits_handoff(
        &self,
        class: ServiceClass,
        velocity_kmh: f64,
    ) -> Result<bool, PolicyError> {
        if velocity_kmh < 0.0 {
            return Err(PolicyError::NegativeVelocity(velocity_kmh));
        }
        Ok(match self.kind {
            PolicyKind::Conventional => true,
            PolicyKind::SoftQos => velocity_kmh <= self.velocity_threshold_kmh,
            PolicyKind::HardQos => {
                velocity_kmh <= self.velocity_threshold_kmh && !class.is_realtime()
            }
        })
    }

    /// Whether calls of this class can ever reside on a femto BS under this
    /// policy. Velocity filtering still applies per call; this is the
    /// class-level structural constraint the state space enforces.
    pub fn class_eligible(&self, class: ServiceClass) -> bool {
        match self.kind {
            PolicyKind::Conventional | PolicyKind::SoftQos => true,
            PolicyKind::HardQos => !class.is_realtime(),
        }
    }
}

impl Default for Policy {
    fn default() -> Self {
        Policy::conventional()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn policy(kind: PolicyKind) -> Policy {
        Policy::new(kind, 10.0).unwrap()
    }

    #[test]
    fn conventional_never_filters() {
        assert!(policy(PolicyKind::Conventional)
            .permits_handoff(ServiceClass::Ugs, 120.0)
            .unwrap());
    }

    #[test]
    fn soft_filters_fast_users() {
        assert!(!policy(PolicyKind::SoftQos)
            .permits_handoff(ServiceClass::Be, 15.0)
            .unwrap());
        assert!(policy(PolicyKind::SoftQos)
            .permits_handoff(ServiceClass::Be, 5.0)
            .unwrap());
    }

    #[test]
    fn hard_filters_realtime_even_when_slow() {
        assert!(!policy(PolicyKind::HardQos)
            .permits_handoff(ServiceClass::Rtps, 5.0)
            .unwrap());
        assert!(policy(PolicyKind::HardQos)
            .permits_handoff(ServiceClass::Be, 5.0)
            .unwrap());
    }

    #[test]
    fn threshold_boundary_is_inclusive() {
        for kind in [PolicyKind::SoftQos, PolicyKind::HardQos] {
            assert!(policy(kind)
                .permits_handoff(ServiceClass::Be, 10.0)
                .unwrap());
            assert!(!policy(kind)
                .permits_handoff(ServiceClass::Be, 10.0 + 1e-9)
                .unwrap());
        }
    }

    #[test]
    fn hard_never_permits_realtime() {
        for v in [0.0, 1.0, 9.99, 10.0] {
            assert!(!policy(PolicyKind::HardQos)
                .permits_handoff(ServiceClass::Ugs, v)
                .unwrap());
            assert!(!policy(PolicyKind::HardQos)
                .permits_handoff(ServiceClass::Rtps, v)
                .unwrap());
        }
    }

    #[test]
    fn negative_velocity_is_an_error() {
        assert_eq!(
            policy(PolicyKind::Conventional).permits_handoff(ServiceClass::Be, -1.0),
            Err(PolicyError::NegativeVelocity(-1.0))
        );
    }

    #[test]
    fn kind_parses_from_cli_strings() {
        assert_eq!(
            "conventional".parse::<PolicyKind>().unwrap(),
            PolicyKind::Conventional
        );
        assert_eq!("soft".parse::<PolicyKind>().unwrap(), PolicyKind::SoftQos);
        assert_eq!("hard".parse::<PolicyKind>().unwrap(), PolicyKind::HardQos);
        assert!("best-effort".parse::<PolicyKind>().is_err());
    }

    proptest! {
        // Stricter policies permit a subset of what looser policies permit.
        #[test]
        fn dominance_hard_implies_soft_implies_conventional(
            class_idx in 0usize..4,
            velocity in 0.0f64..200.0,
            threshold in 0.1f64..50.0,
        ) {
            let class = ServiceClass::ALL[class_idx];
            let hard = Policy::new(PolicyKind::HardQos, threshold).unwrap()
                .permits_handoff(class, velocity).unwrap();
            let soft = Policy::new(PolicyKind::SoftQos, threshold).unwrap()
                .permits_handoff(class, velocity).unwrap();
            let conv = Policy::new(PolicyKind::Conventional, threshold).unwrap()
                .permits_handoff(class, velocity).unwrap();
            prop_assert!(!hard || soft);
            prop_assert!(!soft || conv);
        }
    }
}
