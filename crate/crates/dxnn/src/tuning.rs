//! The tuning phase: targeted weight search over the most recently mutated
//! neurons.
//!
//! Perturbations are random-intensity: a uniformly drawn number of target
//! neurons each perturb a uniformly drawn number of their own weights, so the
//! search ranges from single-weight nudges to broad jumps. A strictly better
//! fitness keeps the new weights; anything else reverts exactly. The phase
//! ends after a run of consecutive failures sized to the amount of new
//! weight structure, capped at a hard limit.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::env::{Environment, EvalError};
use crate::genome::{Genome, NodeId};
use crate::phenotype::{compile, WEIGHT_LIMIT};

/// Rounds to the nearest integer (half away from zero) and floors at one.
/// Applied uniformly to every square-root-derived count.
pub(crate) fn sqrt_count(n: usize) -> usize {
    ((n as f64).sqrt().round() as usize).max(1)
}

#[derive(Debug, Clone)]
pub struct TuningConfig {
    /// Base number of consecutive failed perturbations tolerated.
    pub base_max_attempts: u32,
    /// Hard cap on the attempt budget regardless of network size.
    pub max_attempts_cap: u32,
    /// Perturbations are drawn from `(-weight_limit/2, +weight_limit/2)`.
    pub weight_limit: f64,
    /// Clamp perturbed weights into `[-weight_limit, +weight_limit]`.
    pub clamp_weights: bool,
}

impl Default for TuningConfig {
    fn default() -> Self {
        TuningConfig {
            base_max_attempts: 10,
            max_attempts_cap: 100,
            weight_limit: WEIGHT_LIMIT,
            clamp_weights: true,
        }
    }
}

impl TuningConfig {
    pub fn with_base(base_max_attempts: u32) -> Self {
        TuningConfig { base_max_attempts, ..TuningConfig::default() }
    }
}

/// Builds the tuning target set: ids of neurons from the two most recent
/// generations present in the genome, plus the square root (rounded) of the
/// remaining ids, most recent first. Ties inside a generation break by
/// ascending id, so the result is deterministic.
pub fn build_ngn(g: &Genome) -> Vec<NodeId> {
    let mut by_recency: Vec<(u64, NodeId)> = g.neurons.iter().map(|n| (n.generation, n.id)).collect();
    by_recency.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));

    let mut generations: Vec<u64> = by_recency.iter().map(|(g, _)| *g).collect();
    generations.dedup();
    let cutoff: &[u64] = &generations[..generations.len().min(2)];
    let current: Vec<NodeId> =
        by_recency.iter().filter(|(g, _)| cutoff.contains(g)).map(|(_, id)| *id).collect();
    let remaining: Vec<NodeId> =
        by_recency.iter().filter(|(g, _)| !cutoff.contains(g)).map(|(_, id)| *id).collect();

    let mut ngn = current;
    if !remaining.is_empty() {
        let take = ((remaining.len() as f64).sqrt().round() as usize).min(remaining.len());
        ngn.extend_from_slice(&remaining[..take]);
    }
    ngn
}

/// Total tunable weights (bias included) across the given neurons.
pub fn ngn_weight_total(g: &Genome, ngn: &[NodeId]) -> usize {
    ngn.iter().filter_map(|id| g.neuron(*id)).map(|n| n.weight_count()).sum()
}

/// Attempt budget: `base + round(sqrt(total NGN weights))`, hard capped.
pub fn max_attempts(cfg: &TuningConfig, ngn_weight_total: usize) -> u32 {
    let grown = cfg.base_max_attempts as u64
        + (ngn_weight_total as f64).sqrt().round() as u64;
    grown.min(cfg.max_attempts_cap as u64) as u32
}

/// Position of one weight within a neuron gene.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightSlot {
    Vector { input: usize, index: usize },
    Bias,
}

/// One weight edit, invertible.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightChange {
    pub neuron: NodeId,
    pub slot: WeightSlot,
    pub old: f64,
    pub new: f64,
}

/// A set of weight edits that can be applied and reverted exactly.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PerturbationDelta {
    pub changes: Vec<WeightChange>,
}

impl PerturbationDelta {
    fn write(&self, g: &mut Genome, use_new: bool) {
        for c in &self.changes {
            let n = g.neuron_mut(c.neuron).expect("delta neuron exists");
            let value = if use_new { c.new } else { c.old };
            match c.slot {
                WeightSlot::Vector { input, index } => n.weights[input][index] = value,
                WeightSlot::Bias => n.bias = Some(value),
            }
        }
    }

    pub fn apply_to(&self, g: &mut Genome) {
        self.write(g, true);
    }

    pub fn revert_in(&self, g: &mut Genome) {
        self.write(g, false);
    }
}

/// Selects a random-intensity weight perturbation over the target neurons:
/// `k ~ U{1..round(sqrt(|ngn|))}` neurons, each perturbing
/// `m ~ U{1..round(sqrt(own weights))}` distinct weights by
/// `U(-weight_limit/2, +weight_limit/2)`.
pub fn perturb<R: Rng>(
    g: &Genome,
    ngn: &[NodeId],
    cfg: &TuningConfig,
    rng: &mut R,
) -> PerturbationDelta {
    assert!(!ngn.is_empty(), "perturb requires a non-empty target set");
    let k = rng.gen_range(1..=sqrt_count(ngn.len()));
    let mut picks: Vec<NodeId> = ngn.to_vec();
    picks.partial_shuffle(rng, k);
    picks.truncate(k);

    let mut changes = Vec::new();
    for id in picks {
        let n = g.neuron(id).expect("ngn neuron exists");
        let total = n.weight_count();
        if total == 0 {
            continue;
        }
        let m = rng.gen_range(1..=sqrt_count(total));
        let mut slots: Vec<WeightSlot> = n
            .weights
            .iter()
            .enumerate()
            .flat_map(|(i, ws)| (0..ws.len()).map(move |j| WeightSlot::Vector { input: i, index: j }))
            .collect();
        if n.bias.is_some() {
            slots.push(WeightSlot::Bias);
        }
        slots.partial_shuffle(rng, m);
        slots.truncate(m);
        for slot in slots {
            let old = match slot {
                WeightSlot::Vector { input, index } => n.weights[input][index],
                WeightSlot::Bias => n.bias.unwrap(),
            };
            let half = cfg.weight_limit / 2.0;
            let mut new = old + rng.gen_range(-half..half);
            if cfg.clamp_weights {
                new = new.clamp(-cfg.weight_limit, cfg.weight_limit);
            }
            changes.push(WeightChange { neuron: id, slot, old, new });
        }
    }
    PerturbationDelta { changes }
}

/// One scored attempt in the hill-climbing loop.
#[derive(Debug, Clone, PartialEq)]
pub struct Attempt {
    pub fitness: f64,
    pub accepted: bool,
}

/// Result of tuning one genome.
#[derive(Debug, Clone)]
pub struct TuningOutcome {
    pub best_fitness: f64,
    /// The genome with its weights frozen at the best configuration found.
    pub best_genome: Genome,
    /// Every fitness assignment made, baseline included.
    pub evaluations_used: u64,
    pub attempts_history: Vec<Attempt>,
    /// The environment reported its success condition during tuning.
    pub solved: bool,
}

/// Hill-climbs the genome's NGN weights against the environment.
///
/// Evaluates the baseline, then repeats perturb-evaluate-accept/revert until
/// the consecutive-failure budget is spent, the environment reports solved,
/// or `budget` evaluations have been used. Only strictly greater fitness is
/// accepted; a rejected attempt reverts the weights bit-exactly.
pub fn tune<R: Rng>(
    genome: &Genome,
    env: &dyn Environment,
    cfg: &TuningConfig,
    rng: &mut R,
    budget: u64,
) -> Result<TuningOutcome, EvalError> {
    assert!(budget >= 1, "tuning needs at least one evaluation");
    let mut current = genome.clone();
    let mut phenotype = compile(&current).expect("tuned genome is valid");
    let baseline = env.evaluate(&mut phenotype)?;
    let mut best = baseline.fitness;
    let mut evals = 1u64;
    let mut history = Vec::new();

    if baseline.solved {
        return Ok(TuningOutcome {
            best_fitness: best,
            best_genome: current,
            evaluations_used: evals,
            attempts_history: history,
            solved: true,
        });
    }

    let ngn = build_ngn(&current);
    let allowed_failures = max_attempts(cfg, ngn_weight_total(&current, &ngn));
    let mut consecutive_failures = 0u32;
    let mut solved = false;

    while consecutive_failures < allowed_failures && evals < budget {
        let delta = perturb(&current, &ngn, cfg, rng);
        delta.apply_to(&mut current);
        let mut phenotype = compile(&current).expect("perturbed genome is valid");
        let result = env.evaluate(&mut phenotype)?;
        evals += 1;
        if result.solved {
            history.push(Attempt { fitness: result.fitness, accepted: true });
            best = best.max(result.fitness);
            solved = true;
            break;
        }
        if result.fitness > best {
            best = result.fitness;
            consecutive_failures = 0;
            history.push(Attempt { fitness: result.fitness, accepted: true });
        } else {
            delta.revert_in(&mut current);
            consecutive_failures += 1;
            history.push(Attempt { fitness: result.fitness, accepted: false });
        }
    }

    Ok(TuningOutcome {
        best_fitness: best,
        best_genome: current,
        evaluations_used: evals,
        attempts_history: history,
        solved,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{EvalResult, Xor};
    use crate::genome::{
        new_minimal_genome, ActivationKind, ActuatorSpec, DxnnId, LearningKind, SensorSpec,
    };
    use crate::phenotype::Phenotype;
    use crate::rng::stream;

    fn seed_genome(seed: u64) -> Genome {
        new_minimal_genome(
            DxnnId(1),
            &[SensorSpec::new("xor_pair", 2)],
            &[ActuatorSpec::new("xor_answer", 1)],
            ActivationKind::Tanh,
            LearningKind::None,
            &mut stream(seed),
        )
        .unwrap()
    }

    /// A genome with many single-weight neurons at chosen generations, for
    /// NGN selection tests (structure beyond neurons is irrelevant there).
    fn neurons_with_generations(gens: &[u64]) -> Genome {
        let mut g = seed_genome(1);
        let template = g.neurons[0].clone();
        g.neurons = gens
            .iter()
            .enumerate()
            .map(|(i, &generation)| {
                let mut n = template.clone();
                n.id = NodeId(10 + i as u64);
                n.generation = generation;
                n
            })
            .collect();
        g.core.generation = gens.iter().copied().max().unwrap_or(0);
        g
    }

    struct FnEnv<F: Fn(&mut Phenotype) -> EvalResult + Send + Sync>(F);

    impl<F: Fn(&mut Phenotype) -> EvalResult + Send + Sync> Environment for FnEnv<F> {
        fn sensors(&self) -> Vec<SensorSpec> {
            vec![SensorSpec::new("xor_pair", 2)]
        }
        fn actuators(&self) -> Vec<ActuatorSpec> {
            vec![ActuatorSpec::new("xor_answer", 1)]
        }
        fn evaluate(&self, p: &mut Phenotype) -> Result<EvalResult, EvalError> {
            Ok(self.0(p))
        }
    }

    #[test]
    fn ngn_of_a_fresh_seed_is_the_whole_network() {
        let g = seed_genome(2);
        assert_eq!(build_ngn(&g), vec![g.neurons[0].id]);
        let all_same = neurons_with_generations(&[3, 3, 3, 3]);
        assert_eq!(build_ngn(&all_same).len(), 4);
    }

    #[test]
    fn ngn_takes_two_generations_plus_sqrt_of_the_rest() {
        let g = neurons_with_generations(&[7, 7, 6, 4, 4, 3, 2, 0]);
        let ngn = build_ngn(&g);
        // Three ids at generations {7, 6}, then round(sqrt(5)) = 2 of the
        // remaining, most recent first: the two generation-4 ids.
        assert_eq!(ngn.len(), 5);
        let gens: Vec<u64> =
            ngn.iter().map(|id| g.neuron(*id).unwrap().generation).collect();
        assert_eq!(gens, vec![7, 7, 6, 4, 4]);
    }

    #[test]
    fn max_attempts_follows_the_growth_formula() {
        let cfg = TuningConfig::with_base(10);
        assert_eq!(max_attempts(&cfg, 25), 15);
        assert_eq!(max_attempts(&TuningConfig::with_base(20), 4), 22);
        assert_eq!(max_attempts(&cfg, 10_000), 100);
    }

    #[test]
    fn single_weight_perturbation_is_forced_and_bounded() {
        let mut g = seed_genome(3);
        // Force a single-weight neuron regardless of the seed's link type.
        g.neurons[0].weights = vec![vec![0.25]];
        g.neurons[0].input_list[0].len = 1;
        let cfg = TuningConfig::default();
        let ngn = build_ngn(&g);
        for s in 0..50 {
            let delta = perturb(&g, &ngn, &cfg, &mut stream(s));
            assert_eq!(delta.changes.len(), 1);
            let c = &delta.changes[0];
            assert_eq!(c.neuron, g.neurons[0].id);
            assert!((c.new - c.old).abs() < cfg.weight_limit / 2.0);
        }
    }

    #[test]
    fn neuron_count_is_uniform_up_to_sqrt_bound() {
        let g = neurons_with_generations(&[1; 9]);
        let ngn = build_ngn(&g);
        assert_eq!(ngn.len(), 9);
        let cfg = TuningConfig::default();
        let mut rng = stream(42);
        let mut counts = [0usize; 4];
        let samples = 3000;
        for _ in 0..samples {
            let delta = perturb(&g, &ngn, &cfg, &mut rng);
            let mut touched: Vec<NodeId> = delta.changes.iter().map(|c| c.neuron).collect();
            touched.dedup();
            let k = touched.len();
            assert!((1..=3).contains(&k), "k = {k} outside {{1,2,3}}");
            counts[k] += 1;
        }
        for k in 1..=3 {
            let freq = counts[k] as f64 / samples as f64;
            assert!((freq - 1.0 / 3.0).abs() < 0.05, "k={k} freq {freq}");
        }
    }

    #[test]
    fn perturbation_targets_stay_inside_the_ngn() {
        let g = neurons_with_generations(&[9, 9, 5, 5, 5, 5, 1, 1, 1, 1, 1]);
        let ngn = build_ngn(&g);
        let cfg = TuningConfig::default();
        let mut rng = stream(7);
        for _ in 0..500 {
            let delta = perturb(&g, &ngn, &cfg, &mut rng);
            for c in &delta.changes {
                assert!(ngn.contains(&c.neuron), "perturbed {} outside NGN", c.neuron);
            }
        }
    }

    #[test]
    fn apply_then_revert_restores_the_genome_exactly() {
        let g = seed_genome(5);
        let cfg = TuningConfig::default();
        let ngn = build_ngn(&g);
        let mut rng = stream(11);
        for _ in 0..100 {
            let mut working = g.clone();
            let delta = perturb(&working, &ngn, &cfg, &mut rng);
            delta.apply_to(&mut working);
            delta.revert_in(&mut working);
            assert_eq!(working, g);
        }
    }

    #[test]
    fn constant_fitness_spends_exactly_max_attempts_plus_baseline() {
        let g = seed_genome(6);
        let cfg = TuningConfig::with_base(7);
        let env = FnEnv(|_: &mut Phenotype| EvalResult {
            fitness: 1.0,
            solved: false,
            control_steps: 0,
        });
        let expected_attempts =
            max_attempts(&cfg, ngn_weight_total(&g, &build_ngn(&g))) as u64;
        let out = tune(&g, &env, &cfg, &mut stream(0), u64::MAX).unwrap();
        assert_eq!(out.evaluations_used, expected_attempts + 1);
        assert_eq!(out.attempts_history.len() as u64, expected_attempts);
        assert_eq!(out.best_fitness, 1.0);
        assert!(out.attempts_history.iter().all(|a| !a.accepted));
        // A fully rejected tuning leaves the genome bit-identical.
        assert_eq!(out.best_genome, g);
    }

    #[test]
    fn one_dimensional_hill_climb_converges() {
        let mut g = seed_genome(8);
        g.neurons[0].weights = vec![vec![0.0]];
        g.neurons[0].input_list[0].len = 1;
        let nid = g.neurons[0].id;
        let env = FnEnv(move |p: &mut Phenotype| {
            let w = p.weights_of(nid).unwrap()[0];
            EvalResult { fitness: -(w - 0.7).abs(), solved: false, control_steps: 0 }
        });
        let cfg = TuningConfig::with_base(100);
        let mut converged = 0;
        for s in 0..100 {
            let out = tune(&g, &env, &cfg, &mut stream(s), 200).unwrap();
            assert!(out.evaluations_used <= 200);
            let w = out.best_genome.neurons[0].weights[0][0];
            if (w - 0.7).abs() <= 0.1 {
                converged += 1;
            }
        }
        assert!(converged >= 95, "only {converged}/100 runs converged");
    }

    #[test]
    fn best_fitness_is_monotone_and_reproducible() {
        let g = seed_genome(12);
        let env = Xor;
        let out = tune(&g, &env, &TuningConfig::default(), &mut stream(3), 500).unwrap();
        let mut best = f64::NEG_INFINITY;
        for a in &out.attempts_history {
            if a.accepted {
                assert!(a.fitness > best || out.solved);
            }
            best = best.max(a.fitness);
        }
        // Re-evaluating the returned genome reproduces its recorded best.
        let mut p = compile(&out.best_genome).unwrap();
        let again = env.evaluate(&mut p).unwrap();
        assert_eq!(again.fitness, out.best_fitness);
    }

    #[test]
    fn solved_environment_exits_immediately() {
        let g = seed_genome(13);
        let env =
            FnEnv(|_: &mut Phenotype| EvalResult { fitness: 5.0, solved: true, control_steps: 0 });
        let out = tune(&g, &env, &TuningConfig::default(), &mut stream(0), u64::MAX).unwrap();
        assert!(out.solved);
        assert_eq!(out.evaluations_used, 1);
        assert!(out.attempts_history.is_empty());
    }

    #[test]
    fn budget_caps_evaluations() {
        let g = seed_genome(14);
        let env = FnEnv(|_: &mut Phenotype| EvalResult {
            fitness: 1.0,
            solved: false,
            control_steps: 0,
        });
        let out = tune(&g, &env, &TuningConfig::with_base(100), &mut stream(0), 5).unwrap();
        assert_eq!(out.evaluations_used, 5);
    }
}
