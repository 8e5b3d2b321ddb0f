//! Double pole balancing environment, with and without velocity inputs.

use std::io::Write;

use super::cartpole::{rk4_step, CartPoleState};
use super::{EvalError, EvalResult, Environment};
use crate::genome::{ActuatorSpec, SensorSpec};
use crate::phenotype::Phenotype;

pub const STATE_TAG: &str = "cart_pole_state";
pub const FORCE_TAG: &str = "push_force";

/// Force range, N.
pub const FORCE_MAX: f64 = 10.0;
/// Minimum force magnitude, N: (1/256) * 10.
pub const FORCE_MIN: f64 = FORCE_MAX / 256.0;

/// Cart must stay within this distance of the track center, m.
pub const TRACK_LIMIT: f64 = 2.4;
/// Poles must stay within this angle of vertical, rad (36 degrees).
pub const ANGLE_LIMIT: f64 = 36.0 * std::f64::consts::PI / 180.0;

/// Input scaling denominators, bringing sensor values roughly into (-1, 1).
const X_SCALE: f64 = TRACK_LIMIT;
const X_DOT_SCALE: f64 = 10.0;
const THETA_SCALE: f64 = ANGLE_LIMIT;
const THETA_DOT_SCALE: f64 = 5.0;

/// Number of consecutive final steps entering the damped score's
/// oscillation penalty.
const DAMPING_WINDOW: usize = 100;

/// How an episode is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitnessKind {
    /// Survival time: one point per balanced control step.
    Undamped,
    /// Blend `0.1 f1 + 0.9 f2` where `f1 = t / 1000` and `f2` rewards low
    /// cart and long-pole motion over the final hundred steps.
    Damped,
}

#[derive(Debug, Clone)]
pub struct DpbConfig {
    /// Feed velocities (6 inputs) or positions only (3 inputs).
    pub with_velocities: bool,
    pub fitness: FitnessKind,
    /// Balanced control steps required to pass.
    pub success_steps: u64,
    /// Runge-Kutta step size, s.
    pub integration_step: f64,
    /// Integration substeps per network action (the control period is
    /// `substeps_per_action * integration_step`).
    pub substeps_per_action: u32,
}

impl DpbConfig {
    pub fn with_velocities() -> Self {
        DpbConfig {
            with_velocities: true,
            fitness: FitnessKind::Undamped,
            success_steps: 100_000,
            integration_step: 0.01,
            substeps_per_action: 2,
        }
    }

    pub fn without_velocities(fitness: FitnessKind) -> Self {
        DpbConfig { with_velocities: false, ..DpbConfig::with_velocities().with_fitness(fitness) }
    }

    fn with_fitness(mut self, fitness: FitnessKind) -> Self {
        self.fitness = fitness;
        self
    }
}

/// Maps a network output to the applied force: scaled to [-10, 10] N with
/// magnitude floored at (1/256) * 10 N, preserving sign (a zero output pushes
/// with the minimum positive force).
pub fn output_to_force(o: f64) -> f64 {
    let f = (FORCE_MAX * o).clamp(-FORCE_MAX, FORCE_MAX);
    if f >= 0.0 {
        f.max(FORCE_MIN)
    } else {
        f.min(-FORCE_MIN)
    }
}

fn within_bounds(s: &CartPoleState) -> bool {
    s.x.abs() <= TRACK_LIMIT && s.theta[0].abs() <= ANGLE_LIMIT && s.theta[1].abs() <= ANGLE_LIMIT
}

/// The double pole balancing task.
#[derive(Debug, Clone)]
pub struct DoublePole {
    pub config: DpbConfig,
}

impl DoublePole {
    pub fn new(config: DpbConfig) -> Self {
        DoublePole { config }
    }

    fn scaled_inputs(&self, s: &CartPoleState, buf: &mut Vec<f64>) {
        buf.clear();
        if self.config.with_velocities {
            buf.extend_from_slice(&[
                s.x / X_SCALE,
                s.x_dot / X_DOT_SCALE,
                s.theta[0] / THETA_SCALE,
                s.theta_dot[0] / THETA_DOT_SCALE,
                s.theta[1] / THETA_SCALE,
                s.theta_dot[1] / THETA_DOT_SCALE,
            ]);
        } else {
            buf.extend_from_slice(&[
                s.x / X_SCALE,
                s.theta[0] / THETA_SCALE,
                s.theta[1] / THETA_SCALE,
            ]);
        }
    }

    /// Runs one episode, optionally dumping the trajectory as CSV.
    pub fn evaluate_traced(
        &self,
        phenotype: &mut Phenotype,
        mut trace: Option<&mut dyn Write>,
    ) -> Result<EvalResult, EvalError> {
        phenotype.reset();
        let mut state = CartPoleState::initial();
        let mut inputs = Vec::with_capacity(6);
        // Circular window of |x| + |x'| + |theta1| + |theta1'| over the most
        // recent balanced steps.
        let mut window = [0.0f64; DAMPING_WINDOW];
        let mut window_at = 0usize;

        if let Some(w) = trace.as_deref_mut() {
            let _ = writeln!(w, "step,x,x_dot,theta1,theta1_dot,theta2,theta2_dot,force");
        }

        while state.steps < self.config.success_steps {
            self.scaled_inputs(&state, &mut inputs);
            let outputs = phenotype.cycle(&[(STATE_TAG, inputs.as_slice())])?;
            if outputs.len() != 1 {
                return Err(EvalError::ActuatorCount { expected: 1, actual: outputs.len() });
            }
            if outputs[0].len() != 1 {
                return Err(EvalError::ActuatorLength { expected: 1, actual: outputs[0].len() });
            }
            let force = output_to_force(outputs[0][0]);

            if let Some(w) = trace.as_deref_mut() {
                let _ = writeln!(
                    w,
                    "{},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
                    state.steps,
                    state.x,
                    state.x_dot,
                    state.theta[0],
                    state.theta_dot[0],
                    state.theta[1],
                    state.theta_dot[1],
                    force
                );
            }

            for _ in 0..self.config.substeps_per_action {
                state = rk4_step(&state, force, self.config.integration_step);
            }
            if !state.is_finite() || !within_bounds(&state) {
                break;
            }
            state.steps += 1;
            window[window_at] = state.x.abs()
                + state.x_dot.abs()
                + state.theta[0].abs()
                + state.theta_dot[0].abs();
            window_at = (window_at + 1) % DAMPING_WINDOW;
        }

        let t = state.steps;
        let solved = t >= self.config.success_steps;
        let fitness = match self.config.fitness {
            FitnessKind::Undamped => t as f64,
            FitnessKind::Damped => {
                let f1 = t as f64 / 1000.0;
                let f2 = if t < DAMPING_WINDOW as u64 {
                    0.0
                } else {
                    0.75 / window.iter().sum::<f64>()
                };
                0.1 * f1 + 0.9 * f2
            }
        };
        Ok(EvalResult { fitness, solved, control_steps: t })
    }
}

impl Environment for DoublePole {
    fn sensors(&self) -> Vec<SensorSpec> {
        let len = if self.config.with_velocities { 6 } else { 3 };
        vec![SensorSpec::new(STATE_TAG, len)]
    }

    fn actuators(&self) -> Vec<ActuatorSpec> {
        vec![ActuatorSpec::new(FORCE_TAG, 1)]
    }

    fn evaluate(&self, phenotype: &mut Phenotype) -> Result<EvalResult, EvalError> {
        self.evaluate_traced(phenotype, None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genome::{
        ActivationKind, ActuatorBinding, CoreGene, DxnnId, Genome, InputSource, LearningKind,
        LinkRoute, LinkSpec, NeuronGene, NodeId, SensorBinding, SubCoreGene, SubCoreKind,
    };
    use crate::phenotype::compile;

    /// One tanh neuron reading the whole state vector with fixed weights.
    fn linear_genome(weights: Vec<f64>) -> Genome {
        let (core, sc, n) = (NodeId(1), NodeId(2), NodeId(3));
        let len = weights.len();
        Genome {
            dxnn_id: DxnnId(1),
            core: CoreGene {
                id: core,
                sensor_list: vec![SensorBinding { subcore: sc, tag: STATE_TAG.into() }],
                actuator_list: vec![ActuatorBinding { subcore: sc, tag: FORCE_TAG.into() }],
                parameters: Vec::new(),
                supervised: vec![sc],
                generation: 0,
                history: Vec::new(),
            },
            subcores: vec![SubCoreGene {
                id: sc,
                input_list: vec![InputSource { from: core, len }],
                output_list: vec![core],
                to_links: vec![LinkSpec { to: n, route: LinkRoute::Block { from: core } }],
                from_list: vec![n],
                kind: SubCoreKind::Neural,
                parameters: Vec::new(),
                supervised: vec![n],
                generation: 0,
            }],
            neurons: vec![NeuronGene {
                id: n,
                input_list: vec![InputSource { from: sc, len }],
                output_list: vec![sc],
                activation: ActivationKind::Tanh,
                learning: LearningKind::None,
                weights: vec![weights],
                bias: None,
                parameters: Vec::new(),
                generation: 0,
            }],
        }
    }

    #[test]
    fn force_mapping_honors_range_and_minimum() {
        assert_eq!(output_to_force(0.0), FORCE_MIN);
        assert_eq!(output_to_force(0.5), 5.0);
        assert_eq!(output_to_force(-0.001), -FORCE_MIN);
        assert_eq!(output_to_force(1.0), FORCE_MAX);
        assert_eq!(output_to_force(-3.0), -FORCE_MAX);
        for i in -100..=100 {
            let f = output_to_force(i as f64 / 100.0);
            assert!((FORCE_MIN..=FORCE_MAX).contains(&f.abs()));
        }
    }

    #[test]
    fn zero_weight_network_fails_early() {
        let env = DoublePole::new(DpbConfig::with_velocities());
        let mut p = compile(&linear_genome(vec![0.0; 6])).unwrap();
        let r = env.evaluate(&mut p).unwrap();
        assert!(!r.solved);
        assert!(r.control_steps > 0);
        assert!(r.control_steps < 1000, "fell after {} steps", r.control_steps);
    }

    #[test]
    fn stabilizing_controller_reaches_success_threshold() {
        // Gains from a quadratic-regulator design on the linearized model,
        // mapped through the input scaling.
        let weights = vec![
            -0.16970562748477233,
            -1.948949268749491,
            -3.740769287363636,
            -7.865978024461519,
            2.98735306254047,
            2.0174652929289003,
        ];
        let mut cfg = DpbConfig::with_velocities();
        cfg.success_steps = 2000;
        let env = DoublePole::new(cfg);
        let mut p = compile(&linear_genome(weights)).unwrap();
        let r = env.evaluate(&mut p).unwrap();
        assert!(r.solved);
        assert_eq!(r.control_steps, 2000);
        assert_eq!(r.fitness, 2000.0);
    }

    #[test]
    fn without_velocities_feeds_three_inputs() {
        let env = DoublePole::new(DpbConfig::without_velocities(FitnessKind::Undamped));
        assert_eq!(env.sensors()[0].len, 3);
        let mut p = compile(&linear_genome(vec![0.3, 1.0, -0.5])).unwrap();
        let r = env.evaluate(&mut p).unwrap();
        assert!(!r.solved);
    }

    #[test]
    fn damped_fitness_blends_survival_and_smoothness() {
        let env = DoublePole::new(DpbConfig::without_velocities(FitnessKind::Damped));
        let mut p = compile(&linear_genome(vec![0.0, 0.0, 0.0])).unwrap();
        let r = env.evaluate(&mut p).unwrap();
        let t = r.control_steps;
        if t < 100 {
            assert_eq!(r.fitness, 0.1 * t as f64 / 1000.0);
        } else {
            assert!(r.fitness > 0.1 * t as f64 / 1000.0);
        }
    }

    #[test]
    fn evaluation_is_deterministic() {
        let env = DoublePole::new(DpbConfig::with_velocities());
        let g = linear_genome(vec![0.4, -1.0, 2.0, 0.3, -0.2, 0.1]);
        let a = env.evaluate(&mut compile(&g).unwrap()).unwrap();
        let b = env.evaluate(&mut compile(&g).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn trace_emits_one_row_per_control_step() {
        let env = DoublePole::new(DpbConfig::with_velocities());
        let mut p = compile(&linear_genome(vec![0.0; 6])).unwrap();
        let mut buf = Vec::new();
        let r = env.evaluate_traced(&mut p, Some(&mut buf)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "step,x,x_dot,theta1,theta1_dot,theta2,theta2_dot,force"
        );
        // One row per attempted control step; the final failing step is
        // logged even though it does not count as survived.
        assert_eq!(text.lines().count() as u64, r.control_steps + 2);
    }
}
