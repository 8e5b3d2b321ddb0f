//! A modular topology-and-weight-evolving neural network (TWEANN) engine.
//!
//! Networks are organized in three levels: a `Core` that owns sensor and
//! actuator bindings, `SubCore`s that route input vectors into neuron
//! clusters, and `Neuron`s that produce scalar outputs. Evolution alternates
//! a weight-tuning phase (stochastic hill climbing targeted at recently
//! mutated neurons) with a selection phase (complexity-priced offspring
//! allotment) and a topological mutation phase.
//!
//! The [`harness`] module drives whole experiments against the benchmark
//! environments in [`env`] (XOR and double pole balancing), with seeded,
//! reproducible runs.

pub mod env;
pub mod genome;
pub mod harness;
pub mod mutation;
pub mod phenotype;
pub mod rng;
pub mod selection;
pub mod tuning;

pub use genome::{Genome, Population};

