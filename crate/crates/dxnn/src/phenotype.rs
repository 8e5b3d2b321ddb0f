//! Compiles a genome into an executable network and runs sense-process-act
//! cycles.
//!
//! Evaluation order is topological over feed-forward links, at the subcore
//! level and within each subcore's neuron cluster. Links that point backwards
//! in that order (including self-loops) are recurrent and read the sender's
//! previous-cycle output, which starts at zero.

use std::collections::BTreeSet;

use crate::genome::{
    ActivationKind, Genome, InputSource, LearningKind, LinkRoute, LinkSpec, NodeId,
    ValidationReport,
};

/// Bound on weight magnitude: perturbations and learning keep every weight
/// inside `[-WEIGHT_LIMIT, +WEIGHT_LIMIT]`.
pub const WEIGHT_LIMIT: f64 = std::f64::consts::PI;

/// Step size of the hebbian weight update.
pub const HEBBIAN_RATE: f64 = 0.1;

#[derive(Debug, thiserror::Error)]
#[error("genome failed validation:\n{report}")]
pub struct CompileError {
    pub report: ValidationReport,
}

#[derive(Debug, thiserror::Error)]
pub enum CycleError {
    #[error("missing sensor vector for {tag}")]
    MissingSensor { tag: String },
    #[error("sensor {tag} delivered {actual} values, the genome expects {expected}")]
    SensorLength { tag: String, expected: usize, actual: usize },
}

#[derive(Debug, thiserror::Error)]
pub enum RouteError {
    #[error("route names unknown source {from}")]
    UnknownSource { from: NodeId },
    #[error("single-type index {index} out of range for source {from} of length {len}")]
    IndexOutOfRange { from: NodeId, index: usize, len: usize },
}

/// Applies one routing rule to a subcore's ordered, named input vectors.
pub fn route(inputs: &[(NodeId, &[f64])], spec: &LinkSpec) -> Result<Vec<f64>, RouteError> {
    let find = |from: NodeId| {
        inputs
            .iter()
            .find(|(id, _)| *id == from)
            .map(|(_, v)| *v)
            .ok_or(RouteError::UnknownSource { from })
    };
    match &spec.route {
        LinkRoute::Single { from, index } => {
            let src = find(*from)?;
            if *index < 1 || *index > src.len() {
                return Err(RouteError::IndexOutOfRange {
                    from: *from,
                    index: *index,
                    len: src.len(),
                });
            }
            Ok(vec![src[*index - 1]])
        }
        LinkRoute::Block { from } => Ok(find(*from)?.to_vec()),
        LinkRoute::All => Ok(inputs.iter().flat_map(|(_, v)| v.iter().copied()).collect()),
    }
}

/// A compiled neuron: flat weight vector (bias last, when present) plus its
/// activation and learning behavior.
#[derive(Debug, Clone)]
pub struct NeuronUnit {
    pub id: NodeId,
    pub activation: ActivationKind,
    pub learning: LearningKind,
    pub weights: Vec<f64>,
    pub has_bias: bool,
    inputs: Vec<NeuronInput>,
}

impl NeuronUnit {
    /// Applies the learning method to one input vector. The input includes
    /// the implicit bias value of 1 as its final entry when the neuron has a
    /// bias, so its length always equals the weight count.
    pub fn step(&mut self, input: &[f64]) -> f64 {
        assert_eq!(
            input.len(),
            self.weights.len(),
            "neuron {} fed {} values for {} weights",
            self.id,
            input.len(),
            self.weights.len()
        );
        let dot: f64 = self.weights.iter().zip(input).map(|(w, x)| w * x).sum();
        let out = self.activation.apply(dot);
        if self.learning == LearningKind::Hebbian {
            for (w, x) in self.weights.iter_mut().zip(input) {
                *w = (*w + HEBBIAN_RATE * out * x).clamp(-WEIGHT_LIMIT, WEIGHT_LIMIT);
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
enum NeuronInput {
    /// Slices of the owning subcore's input vectors, pre-resolved to
    /// (source slot, element) pairs.
    Routed(Vec<(usize, usize)>),
    /// Output of a sibling neuron, by global index.
    FromNeuron { index: usize, recurrent: bool },
}

#[derive(Debug, Clone, Copy)]
enum SourceRef {
    /// Index into the sensor binding table.
    Sensor(usize),
    /// Index into the compiled subcore table.
    SubCore { index: usize, recurrent: bool },
}

#[derive(Debug, Clone)]
struct CompiledSubCore {
    sources: Vec<SourceRef>,
    /// Global neuron indices in evaluation order.
    schedule: Vec<usize>,
    /// Global neuron indices whose outputs form the output vector.
    out_neurons: Vec<usize>,
}

#[derive(Debug, Clone)]
struct SensorSlot {
    tag: String,
    expected_len: usize,
}

#[derive(Debug, Clone)]
struct ActuatorSlot {
    tag: String,
    subcore: usize,
}

/// An executable network. Owns all mutable evaluation state; a fresh compile
/// (or [`Phenotype::reset`]) starts every recurrent memory at zero.
#[derive(Debug, Clone)]
pub struct Phenotype {
    neurons: Vec<NeuronUnit>,
    pristine_weights: Vec<Vec<f64>>,
    subcores: Vec<CompiledSubCore>,
    /// Subcore evaluation order (indices into `subcores`).
    sc_order: Vec<usize>,
    sensors: Vec<SensorSlot>,
    actuators: Vec<ActuatorSlot>,
    prev_neuron_out: Vec<f64>,
    curr_neuron_out: Vec<f64>,
    prev_sc_out: Vec<Vec<f64>>,
    curr_sc_out: Vec<Vec<f64>>,
    actuator_out: Vec<Vec<f64>>,
    scratch: Vec<f64>,
}

/// Kahn's algorithm with a smallest-id tie break. When only cycles remain,
/// the smallest-id node is scheduled anyway; its unmet edges become
/// recurrent by position.
fn schedule_order(ids: &[NodeId], edges: &[(NodeId, NodeId)]) -> Vec<NodeId> {
    let index_of = |id: NodeId| ids.iter().position(|&i| i == id).unwrap();
    let mut in_deg = vec![0usize; ids.len()];
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); ids.len()];
    for (from, to) in edges {
        if from == to {
            continue;
        }
        let (f, t) = (index_of(*from), index_of(*to));
        out[f].push(t);
        in_deg[t] += 1;
    }
    let mut ready: BTreeSet<NodeId> = ids
        .iter()
        .enumerate()
        .filter(|(i, _)| in_deg[*i] == 0)
        .map(|(_, id)| *id)
        .collect();
    let mut scheduled = vec![false; ids.len()];
    let mut order = Vec::with_capacity(ids.len());
    while order.len() < ids.len() {
        let next = match ready.iter().next().copied() {
            Some(id) => {
                ready.remove(&id);
                id
            }
            // Only cycles remain: force the smallest unscheduled id.
            None => *ids
                .iter()
                .filter(|id| !scheduled[index_of(**id)])
                .min()
                .expect("unscheduled node exists"),
        };
        let ni = index_of(next);
        if scheduled[ni] {
            continue;
        }
        scheduled[ni] = true;
        order.push(next);
        for &t in &out[ni] {
            if in_deg[t] > 0 {
                in_deg[t] -= 1;
            }
            if in_deg[t] == 0 && !scheduled[t] {
                ready.insert(ids[t]);
            }
        }
    }
    order
}

/// Resolves a routing spec to (source slot, element index) pairs over the
/// subcore's ordered input list.
fn resolve_route(inputs: &[InputSource], spec: &LinkSpec) -> Vec<(usize, usize)> {
    match &spec.route {
        LinkRoute::Single { from, index } => {
            let slot = inputs.iter().position(|s| s.from == *from).expect("validated source");
            vec![(slot, index - 1)]
        }
        LinkRoute::Block { from } => {
            let slot = inputs.iter().position(|s| s.from == *from).expect("validated source");
            (0..inputs[slot].len).map(|i| (slot, i)).collect()
        }
        LinkRoute::All => inputs
            .iter()
            .enumerate()
            .flat_map(|(slot, s)| (0..s.len).map(move |i| (slot, i)))
            .collect(),
    }
}

/// Compiles a validated genome into an executable phenotype. Deterministic:
/// the same genome always yields the same schedules and state layout.
pub fn compile(g: &Genome) -> Result<Phenotype, CompileError> {
    let report = crate::genome::validate(g);
    if !report.is_valid() {
        return Err(CompileError { report });
    }

    let sc_ids: Vec<NodeId> = g.subcores.iter().map(|s| s.id).collect();
    let sc_index = |id: NodeId| sc_ids.iter().position(|&i| i == id).unwrap();
    let neuron_ids: Vec<NodeId> = g.neurons.iter().map(|n| n.id).collect();
    let neuron_index = |id: NodeId| neuron_ids.iter().position(|&i| i == id).unwrap();

    // Subcore evaluation order.
    let mut sc_edges = Vec::new();
    for sc in &g.subcores {
        for src in &sc.input_list {
            if src.from != g.core.id {
                sc_edges.push((src.from, sc.id));
            }
        }
    }
    let sc_order_ids = schedule_order(&sc_ids, &sc_edges);
    let sc_pos = |id: NodeId| sc_order_ids.iter().position(|&i| i == id).unwrap();

    let mut subcores = Vec::with_capacity(g.subcores.len());
    let mut neurons: Vec<Option<NeuronUnit>> = vec![None; g.neurons.len()];

    for sc in &g.subcores {
        let sources = sc
            .input_list
            .iter()
            .map(|src| {
                if src.from == g.core.id {
                    let sensor = g
                        .core
                        .sensor_list
                        .iter()
                        .position(|b| b.subcore == sc.id)
                        .expect("validated sensor binding");
                    SourceRef::Sensor(sensor)
                } else {
                    SourceRef::SubCore {
                        index: sc_index(src.from),
                        recurrent: sc_pos(src.from) >= sc_pos(sc.id),
                    }
                }
            })
            .collect();

        // Neuron evaluation order within this cluster.
        let local_ids: Vec<NodeId> = sc.supervised.clone();
        let mut n_edges = Vec::new();
        for &nid in &local_ids {
            let n = g.neuron(nid).expect("validated supervision");
            for src in &n.input_list {
                if src.from != sc.id {
                    n_edges.push((src.from, nid));
                }
            }
        }
        let local_order = schedule_order(&local_ids, &n_edges);
        let local_pos = |id: NodeId| local_order.iter().position(|&i| i == id).unwrap();

        for &nid in &local_ids {
            let n = g.neuron(nid).expect("validated supervision");
            let mut specs = sc.to_links.iter().filter(|s| s.to == nid);
            let inputs = n
                .input_list
                .iter()
                .map(|src| {
                    if src.from == sc.id {
                        let spec = specs.next().expect("validated route pairing");
                        NeuronInput::Routed(resolve_route(&sc.input_list, spec))
                    } else {
                        NeuronInput::FromNeuron {
                            index: neuron_index(src.from),
                            recurrent: local_pos(src.from) >= local_pos(nid),
                        }
                    }
                })
                .collect();
            let mut weights: Vec<f64> = n.weights.iter().flatten().copied().collect();
            if let Some(b) = n.bias {
                weights.push(b);
            }
            neurons[neuron_index(nid)] = Some(NeuronUnit {
                id: nid,
                activation: n.activation,
                learning: n.learning,
                weights,
                has_bias: n.bias.is_some(),
                inputs,
            });
        }

        subcores.push(CompiledSubCore {
            sources,
            schedule: local_order.iter().map(|&id| neuron_index(id)).collect(),
            out_neurons: sc.from_list.iter().map(|&id| neuron_index(id)).collect(),
        });
    }

    let neurons: Vec<NeuronUnit> =
        neurons.into_iter().map(|n| n.expect("every neuron is supervised")).collect();
    let pristine_weights = neurons.iter().map(|n| n.weights.clone()).collect();

    let sensors = g
        .core
        .sensor_list
        .iter()
        .map(|b| {
            let sc = g.subcore(b.subcore).expect("validated binding");
            let expected_len = sc
                .input_list
                .iter()
                .find(|s| s.from == g.core.id)
                .expect("validated sensor entry")
                .len;
            SensorSlot { tag: b.tag.clone(), expected_len }
        })
        .collect();
    let actuators: Vec<ActuatorSlot> = g
        .core
        .actuator_list
        .iter()
        .map(|b| ActuatorSlot { tag: b.tag.clone(), subcore: sc_index(b.subcore) })
        .collect();

    let sc_out_zero: Vec<Vec<f64>> = g.subcores.iter().map(|s| vec![0.0; s.output_len()]).collect();
    let actuator_out = actuators.iter().map(|a| sc_out_zero[a.subcore].clone()).collect();

    Ok(Phenotype {
        prev_neuron_out: vec![0.0; neurons.len()],
        curr_neuron_out: vec![0.0; neurons.len()],
        prev_sc_out: sc_out_zero.clone(),
        curr_sc_out: sc_out_zero,
        actuator_out,
        scratch: Vec::new(),
        sc_order: sc_order_ids.iter().map(|&id| sc_index(id)).collect(),
        neurons,
        pristine_weights,
        subcores,
        sensors,
        actuators,
    })
}

impl Phenotype {
    pub fn neuron_count(&self) -> usize {
        self.neurons.len()
    }

    /// Actuator tags, in the order `cycle` returns their vectors.
    pub fn actuator_tags(&self) -> Vec<&str> {
        self.actuators.iter().map(|a| a.tag.as_str()).collect()
    }

    /// Flat weight vector (bias last) of a neuron, for inspection.
    pub fn weights_of(&self, id: NodeId) -> Option<&[f64]> {
        self.neurons.iter().find(|n| n.id == id).map(|n| n.weights.as_slice())
    }

    /// Clears all recurrent memories and restores compiled weights.
    pub fn reset(&mut self) {
        for v in &mut self.prev_neuron_out {
            *v = 0.0;
        }
        for v in &mut self.curr_neuron_out {
            *v = 0.0;
        }
        for sc in self.prev_sc_out.iter_mut().chain(self.curr_sc_out.iter_mut()) {
            for v in sc {
                *v = 0.0;
            }
        }
        for (n, w) in self.neurons.iter_mut().zip(&self.pristine_weights) {
            n.weights.clone_from(w);
        }
    }

    /// Runs one full pass: sensors fan out to subcores, neuron clusters fire
    /// in schedule order, and subcore output vectors assemble into one
    /// vector per actuator binding. The returned slices live until the next
    /// call; they pair positionally with [`Phenotype::actuator_tags`].
    pub fn cycle(&mut self, sensor_inputs: &[(&str, &[f64])]) -> Result<&[Vec<f64>], CycleError> {
        // Resolve sensor vectors by tag.
        let mut sensor_vecs: Vec<&[f64]> = Vec::with_capacity(self.sensors.len());
        for slot in &self.sensors {
            let found = sensor_inputs
                .iter()
                .find(|(tag, _)| *tag == slot.tag)
                .map(|(_, v)| *v)
                .ok_or_else(|| CycleError::MissingSensor { tag: slot.tag.clone() })?;
            if found.len() != slot.expected_len {
                return Err(CycleError::SensorLength {
                    tag: slot.tag.clone(),
                    expected: slot.expected_len,
                    actual: found.len(),
                });
            }
            sensor_vecs.push(found);
        }

        for &sci in &self.sc_order {
            for pos in 0..self.subcores[sci].schedule.len() {
                let ni = self.subcores[sci].schedule[pos];
                self.scratch.clear();
                for k in 0..self.neurons[ni].inputs.len() {
                    match &self.neurons[ni].inputs[k] {
                        NeuronInput::Routed(gather) => {
                            for &(slot, idx) in gather {
                                let v = match self.subcores[sci].sources[slot] {
                                    SourceRef::Sensor(s) => sensor_vecs[s][idx],
                                    SourceRef::SubCore { index, recurrent } => {
                                        if recurrent {
                                            self.prev_sc_out[index][idx]
                                        } else {
                                            self.curr_sc_out[index][idx]
                                        }
                                    }
                                };
                                self.scratch.push(v);
                            }
                        }
                        NeuronInput::FromNeuron { index, recurrent } => {
                            let v = if *recurrent {
                                self.prev_neuron_out[*index]
                            } else {
                                self.curr_neuron_out[*index]
                            };
                            self.scratch.push(v);
                        }
                    }
                }
                if self.neurons[ni].has_bias {
                    self.scratch.push(1.0);
                }
                let scratch = std::mem::take(&mut self.scratch);
                let out = self.neurons[ni].step(&scratch);
                self.scratch = scratch;
                self.curr_neuron_out[ni] = out;
            }

            // Assemble this subcore's output vector.
            for k in 0..self.subcores[sci].out_neurons.len() {
                let ni = self.subcores[sci].out_neurons[k];
                self.curr_sc_out[sci][k] = self.curr_neuron_out[ni];
            }
        }

        for (a, out) in self.actuators.iter().zip(&mut self.actuator_out) {
            out.clone_from(&self.curr_sc_out[a.subcore]);
        }

        std::mem::swap(&mut self.prev_neuron_out, &mut self.curr_neuron_out);
        std::mem::swap(&mut self.prev_sc_out, &mut self.curr_sc_out);
        Ok(&self.actuator_out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genome::{
        new_minimal_genome, ActuatorBinding, ActuatorSpec, CoreGene, DxnnId, Genome, NeuronGene,
        SensorBinding, SensorSpec, SubCoreGene, SubCoreKind,
    };
    use crate::rng::stream;

    fn xor_seed(seed: u64) -> Genome {
        new_minimal_genome(
            DxnnId(1),
            &[SensorSpec::new("pair", 2)],
            &[ActuatorSpec::new("answer", 1)],
            ActivationKind::Tanh,
            LearningKind::None,
            &mut stream(seed),
        )
        .unwrap()
    }

    /// One subcore, one tanh neuron with a block link over the sensor plus an
    /// optional self-loop.
    fn tiny_genome(sensor_len: usize, weights: Vec<f64>, self_loop: Option<f64>) -> Genome {
        let core_id = NodeId(1);
        let sc_id = NodeId(2);
        let n_id = NodeId(3);
        let mut input_list = vec![InputSource { from: sc_id, len: sensor_len }];
        let mut weight_list = vec![weights];
        if let Some(w) = self_loop {
            input_list.push(InputSource { from: n_id, len: 1 });
            weight_list.push(vec![w]);
        }
        let mut output_list = vec![sc_id];
        if self_loop.is_some() {
            output_list.push(n_id);
        }
        Genome {
            dxnn_id: DxnnId(1),
            core: CoreGene {
                id: core_id,
                sensor_list: vec![SensorBinding { subcore: sc_id, tag: "in".into() }],
                actuator_list: vec![ActuatorBinding { subcore: sc_id, tag: "out".into() }],
                parameters: Vec::new(),
                supervised: vec![sc_id],
                generation: 0,
                history: Vec::new(),
            },
            subcores: vec![SubCoreGene {
                id: sc_id,
                input_list: vec![InputSource { from: core_id, len: sensor_len }],
                output_list: vec![core_id],
                to_links: vec![LinkSpec { to: n_id, route: LinkRoute::Block { from: core_id } }],
                from_list: vec![n_id],
                kind: SubCoreKind::Neural,
                parameters: Vec::new(),
                supervised: vec![n_id],
                generation: 0,
            }],
            neurons: vec![NeuronGene {
                id: n_id,
                input_list,
                output_list,
                activation: ActivationKind::Tanh,
                learning: LearningKind::None,
                weights: weight_list,
                bias: None,
                parameters: Vec::new(),
                generation: 0,
            }],
        }
    }

    #[test]
    fn route_single_picks_the_indexed_value() {
        let inputs = [(NodeId(1), [0.1, 0.2, 0.3].as_slice())];
        let spec =
            LinkSpec { to: NodeId(9), route: LinkRoute::Single { from: NodeId(1), index: 3 } };
        assert_eq!(route(&inputs, &spec).unwrap(), vec![0.3]);
    }

    #[test]
    fn route_block_passes_the_vector_unchanged() {
        let inputs = [(NodeId(1), [0.1, 0.2, 0.3].as_slice()), (NodeId(2), [0.4, 0.5].as_slice())];
        let spec = LinkSpec { to: NodeId(9), route: LinkRoute::Block { from: NodeId(2) } };
        assert_eq!(route(&inputs, &spec).unwrap(), vec![0.4, 0.5]);
    }

    #[test]
    fn route_all_concatenates_in_declared_order() {
        let inputs = [(NodeId(1), [0.1, 0.2, 0.3].as_slice()), (NodeId(2), [0.4, 0.5].as_slice())];
        let spec = LinkSpec { to: NodeId(9), route: LinkRoute::All };
        let out = route(&inputs, &spec).unwrap();
        assert_eq!(out, vec![0.1, 0.2, 0.3, 0.4, 0.5]);
        assert_eq!(out.len(), 5);
    }

    #[test]
    fn route_index_out_of_range_is_an_error() {
        let inputs = [(NodeId(1), [0.1].as_slice())];
        let spec =
            LinkSpec { to: NodeId(9), route: LinkRoute::Single { from: NodeId(1), index: 2 } };
        assert!(matches!(route(&inputs, &spec), Err(RouteError::IndexOutOfRange { .. })));
    }

    fn bare_unit(weights: Vec<f64>, lm: LearningKind) -> NeuronUnit {
        NeuronUnit {
            id: NodeId(1),
            activation: ActivationKind::Tanh,
            learning: lm,
            weights,
            has_bias: false,
            inputs: Vec::new(),
        }
    }

    #[test]
    fn step_with_zero_weights_outputs_zero() {
        let mut n = bare_unit(vec![0.0], LearningKind::None);
        assert_eq!(n.step(&[123.0]), 0.0);
        assert_eq!(n.weights, vec![0.0]);
    }

    #[test]
    fn step_applies_tanh_to_the_dot_product() {
        let mut n = bare_unit(vec![1.0], LearningKind::None);
        let out = n.step(&[0.5]);
        assert!((out - 0.5f64.tanh()).abs() < 1e-15);
        assert!((out - 0.4621).abs() < 1e-4);
    }

    #[test]
    fn hebbian_step_updates_weights() {
        let mut n = bare_unit(vec![1.0], LearningKind::Hebbian);
        let out = n.step(&[1.0]);
        assert!((out - 1.0f64.tanh()).abs() < 1e-15);
        let expected = 1.0 + HEBBIAN_RATE * 1.0f64.tanh();
        assert!((n.weights[0] - expected).abs() < 1e-15);
        assert!((n.weights[0] - 1.0762).abs() < 1e-4);
    }

    #[test]
    fn hebbian_weights_stay_clamped() {
        let mut n = bare_unit(vec![3.0, 3.0], LearningKind::Hebbian);
        for _ in 0..1000 {
            n.step(&[5.0, 5.0]);
            for w in &n.weights {
                assert!(w.abs() <= WEIGHT_LIMIT);
            }
        }
    }

    #[test]
    fn xor_seed_with_zero_weights_outputs_zero() {
        let mut g = xor_seed(5);
        for w in g.neurons[0].weights.iter_mut().flatten() {
            *w = 0.0;
        }
        let mut p = compile(&g).unwrap();
        let out = p.cycle(&[("pair", [1.0, -1.0].as_slice())]).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0], vec![0.0]);
    }

    #[test]
    fn compiles_seed_with_one_route() {
        let g = xor_seed(7);
        let p = compile(&g).unwrap();
        assert_eq!(p.neuron_count(), 1);
        assert_eq!(p.actuator_tags(), vec!["answer"]);
    }

    #[test]
    fn self_recurrent_first_cycle_reads_zero() {
        let g = tiny_genome(1, vec![0.7], Some(0.9));
        let mut p = compile(&g).unwrap();
        let first = p.cycle(&[("in", [0.5].as_slice())]).unwrap()[0][0];
        // First cycle: recurrent input is 0, so output is tanh(0.7 * 0.5).
        assert!((first - (0.7f64 * 0.5).tanh()).abs() < 1e-15);
        let second = p.cycle(&[("in", [0.5].as_slice())]).unwrap()[0][0];
        let expected = (0.7f64 * 0.5 + 0.9 * first).tanh();
        assert!((second - expected).abs() < 1e-15);
        assert_ne!(first, second);
    }

    #[test]
    fn missing_sensor_is_an_input_error() {
        let g = tiny_genome(1, vec![0.4], None);
        let mut p = compile(&g).unwrap();
        assert!(matches!(
            p.cycle(&[("wrong", [0.5].as_slice())]),
            Err(CycleError::MissingSensor { .. })
        ));
        assert!(matches!(
            p.cycle(&[("in", [0.5, 0.6].as_slice())]),
            Err(CycleError::SensorLength { .. })
        ));
    }

    #[test]
    fn cycle_is_deterministic_from_a_fresh_compile() {
        let g = tiny_genome(2, vec![0.3, -1.2], Some(0.8));
        let inputs = [[0.2, -0.4], [0.9, 0.1], [-0.5, -0.5]];
        let run = |mut p: Phenotype| {
            let mut outs = Vec::new();
            for x in &inputs {
                outs.push(p.cycle(&[("in", x.as_slice())]).unwrap()[0][0]);
            }
            outs
        };
        let a = run(compile(&g).unwrap());
        let b = run(compile(&g).unwrap());
        assert_eq!(a, b);
        // Reset also restores the initial state exactly.
        let mut p = compile(&g).unwrap();
        let _ = p.cycle(&[("in", [1.0, 1.0].as_slice())]).unwrap();
        p.reset();
        assert_eq!(run(p), a);
    }

    #[test]
    fn invalid_genome_fails_to_compile_with_violations() {
        let mut g = xor_seed(9);
        g.neurons[0].weights[0].push(99.0);
        let err = compile(&g).unwrap_err();
        assert!(!err.report.is_valid());
    }

    #[test]
    fn tanh_outputs_stay_in_unit_interval() {
        // tanh rounds to exactly +-1.0 in f64 once the argument saturates,
        // so the open interval is only checkable away from saturation.
        let g = tiny_genome(2, vec![3.0, 3.0], Some(3.0));
        let mut p = compile(&g).unwrap();
        for i in 0..100 {
            let x = [(i as f64).sin() * 5.0, (i as f64).cos() * 5.0];
            let out = p.cycle(&[("in", x.as_slice())]).unwrap()[0][0];
            assert!((-1.0..=1.0).contains(&out));
        }
        let mut q = compile(&tiny_genome(1, vec![1.5], None)).unwrap();
        let out = q.cycle(&[("in", [0.9].as_slice())]).unwrap()[0][0];
        assert!(out > -1.0 && out < 1.0);
    }
}
