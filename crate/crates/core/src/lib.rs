//! Analytical and simulation toolkit for hierarchical macro/femto cellular
//! networks: RSS-based handoff triggering, QoS-aware handoff policies, a
//! multi-class continuous-time Markov chain performance model, a discrete
//! event simulator used as a cross-check, femto base-station energy and
//! tariff cost models, and the load-balancing calibration built on top.

pub mod calibration;
pub mod ctmc;
pub mod deployment;
pub mod des;
pub mod energy;
pub mod policy;
pub mod radio;
