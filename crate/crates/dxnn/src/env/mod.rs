//! Fitness environments: XOR and double pole balancing.

mod cartpole;
mod dpb;
mod xor;

pub use cartpole::{cartpole_derivatives, rk4_step, system_energy, CartPoleState, Derivatives};
pub use dpb::{DoublePole, DpbConfig, FitnessKind, FORCE_MAX, FORCE_MIN};
pub use xor::Xor;

use crate::genome::{ActuatorSpec, SensorSpec};
use crate::phenotype::{CycleError, Phenotype};

/// Outcome of one episode: the fitness assigned to the network, whether the
/// environment's success condition was reached, and how many control steps
/// the episode ran.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub fitness: f64,
    pub solved: bool,
    pub control_steps: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("network interface does not fit the environment: {0}")]
    Input(#[from] CycleError),
    #[error("network produced {actual} output vectors, environment expects {expected}")]
    ActuatorCount { expected: usize, actual: usize },
    #[error("actuator vector has length {actual}, environment expects {expected}")]
    ActuatorLength { expected: usize, actual: usize },
}

/// A fitness environment. Stateless between evaluations: each `evaluate`
/// call owns its episode, so evaluations may run concurrently on separate
/// phenotypes.
pub trait Environment: Send + Sync {
    /// Sensor programs this environment feeds.
    fn sensors(&self) -> Vec<SensorSpec>;
    /// Actuator programs this environment reads.
    fn actuators(&self) -> Vec<ActuatorSpec>;
    /// Runs one episode and scores it. Fitness is always >= 0.
    fn evaluate(&self, phenotype: &mut Phenotype) -> Result<EvalResult, EvalError>;
}
