//! XOR benchmark in the +-1 encoding.

use super::{EvalError, EvalResult, Environment};
use crate::genome::{ActuatorSpec, SensorSpec};
use crate::phenotype::Phenotype;

pub const SENSOR_TAG: &str = "xor_pair";
pub const ACTUATOR_TAG: &str = "xor_answer";

/// The four cases with inputs and targets mapped from {0,1} to {-1,+1}.
const CASES: [([f64; 2], f64); 4] = [
    ([-1.0, -1.0], -1.0),
    ([-1.0, 1.0], 1.0),
    ([1.0, -1.0], 1.0),
    ([1.0, 1.0], -1.0),
];

/// Error magnitude under which a sign-correct answer counts as solved.
const SOLVED_MARGIN: f64 = 0.2;

/// XOR over a length-2 sensor and a length-1 actuator. Each case runs on a
/// freshly reset network, so recurrent state never leaks between cases.
/// The per-case score `1 - |target - output|` is floored at zero, which both
/// keeps fitness non-negative and leaves purely antisymmetric networks (any
/// bias-free tanh net) a usable gradient.
#[derive(Debug, Clone, Default)]
pub struct Xor;

impl Environment for Xor {
    fn sensors(&self) -> Vec<SensorSpec> {
        vec![SensorSpec::new(SENSOR_TAG, 2)]
    }

    fn actuators(&self) -> Vec<ActuatorSpec> {
        vec![ActuatorSpec::new(ACTUATOR_TAG, 1)]
    }

    fn evaluate(&self, phenotype: &mut Phenotype) -> Result<EvalResult, EvalError> {
        let mut fitness = 0.0;
        let mut solved = true;
        for (input, target) in CASES {
            phenotype.reset();
            let outputs = phenotype.cycle(&[(SENSOR_TAG, input.as_slice())])?;
            if outputs.len() != 1 {
                return Err(EvalError::ActuatorCount { expected: 1, actual: outputs.len() });
            }
            if outputs[0].len() != 1 {
                return Err(EvalError::ActuatorLength { expected: 1, actual: outputs[0].len() });
            }
            let out = outputs[0][0];
            let err = (target - out).abs();
            fitness += (1.0 - err).max(0.0);
            solved &= out * target > 0.0 && err < SOLVED_MARGIN;
        }
        Ok(EvalResult { fitness, solved, control_steps: 4 })
    }
}
