//! Multi-class Markov chain model of the hierarchical network.
//!
//! The chain state is the 5-tuple `(n_u, n_r, n_n, n_b, n_h)`: the number of
//! resident calls of each service class plus the number of those calls
//! currently served by femto BSs. Arrivals are Poisson per class and split
//! between the macro BS and the femto tier by the per-class handoff fraction;
//! service times are exponential per class; per-class capacities bound the
//! space, with blocked arrivals lost.

mod generator;
mod metrics;
mod solver;
mod space;

pub use generator::{build_generator, Generator};
pub use metrics::{
    blocking_probability, distribution_csv, evaluate_metrics, femto_load, handoff_probability,
    macro_load, ChainMetrics,
};
pub use solver::{solve_steady_state, solve_steady_state_with_guess, SolverOptions, SteadyState};
pub use space::{build_state_space, build_state_space_with_ceiling, CtmcState, StateSpace, DEFAULT_STATE_CEILING};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::policy::PerClass;

#[derive(Debug, Error, PartialEq)]
pub enum CtmcError {
    #[error("per-class capacities must be at least 1, got {0:?}")]
    ZeroCapacity([u32; 4]),
    #[error("state space would hold {count} states, exceeding the ceiling of {ceiling}")]
    SizeExceeded { count: usize, ceiling: usize },
    #[error("invalid traffic model: {0}")]
    InvalidTraffic(String),
    #[error("negative transition rate {rate} from state {from} to {to}")]
    NegativeRate { from: usize, to: usize, rate: f64 },
    #[error("transition out of state {from} targets a state outside the space")]
    MissingTarget { from: usize },
    #[error("steady-state solve did not converge: residual {residual} > tolerance {tolerance}")]
    NotConverged { residual: f64, tolerance: f64 },
    #[error("steady-state vector has an entry {value} at state {state}, below zero")]
    NegativeProbability { state: usize, value: f64 },
}

/// Per-class arrival rates, service rates, and femto-assignment fractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrafficModel {
    /// Arrival rate per class (calls per unit time).
    pub lambda: PerClass<f64>,
    /// Service rate per class (inverse mean holding time).
    pub mu: PerClass<f64>,
    /// Probability that a new call of each class is assigned to a femto BS.
    pub p_ho: PerClass<f64>,
}

impl TrafficModel {
    pub fn new(
        lambda: PerClass<f64>,
        mu: PerClass<f64>,
        p_ho: PerClass<f64>,
    ) -> Result<Self, CtmcError> {
        let model = TrafficModel { lambda, mu, p_ho };
        model.validate()?;
        Ok(model)
    }

    /// Uniform rates across classes with arrival rate `rho * mu` per class.
    pub fn uniform_with_load(rho: f64, mu: f64, p_ho: PerClass<f64>) -> Result<Self, CtmcError> {
        TrafficModel::new(
            PerClass::uniform(rho * mu),
            PerClass::uniform(mu),
            p_ho,
        )
    }

    pub fn validate(&self) -> Result<(), CtmcError> {
        for i in 0..4 {
            if !(self.lambda.0[i] > 0.0) {
                return Err(CtmcError::InvalidTraffic(format!(
                    "arrival rate for class {i} must be positive, got {}",
                    self.lambda.0[i]
                )));
            }
            if !(self.mu.0[i] > 0.0) {
                return Err(CtmcError::InvalidTraffic(format!(
                    "service rate for class {i} must be positive, got {}",
                    self.mu.0[i]
                )));
            }
            if !(0.0..=1.0).contains(&self.p_ho.0[i]) {
                return Err(CtmcError::InvalidTraffic(format!(
                    "handoff fraction for class {i} must lie in [0, 1], got {}",
                    self.p_ho.0[i]
                )));
            }
        }
        Ok(())
    }

    /// Aggregate offered load: total arrival rate over total service rate.
    pub fn aggregate_rho(&self) -> f64 {
        let l: f64 = self.lambda.0.iter().sum();
        let m: f64 = self.mu.0.iter().sum();
        l / m
    }
}
