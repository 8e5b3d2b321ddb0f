//! The topological mutation phase: operator catalog, random-intensity
//! operator counts, subcore-level operator gating, and sensor/actuator
//! discovery.
//!
//! Every operator maps a valid genome to a new valid genome. Operators that
//! lengthen a subcore's output vector propagate the change into every
//! consumer: recorded input lengths grow and the weight vectors of block-
//! and all-routed neurons gain fresh seed weights at the matching positions.

use rand::Rng;

use crate::genome::seed::{add_random_routed_link, seed_weight};
use crate::genome::{
    ActivationKind, ActuatorBinding, ActuatorSpec, DxnnId, Genome, HistoryEntry, InputSource,
    LearningKind, LinkRoute, MutationOp, NeuronGene, NodeId, SensorBinding, SensorSpec,
    SubCoreGene, SubCoreKind,
};

/// Everything an operator may draw on: the discoverable interface, the
/// subcore-level gating ratio, and the trait catalogs for new neurons.
#[derive(Debug, Clone)]
pub struct MutationContext {
    pub available_sensors: Vec<SensorSpec>,
    pub available_actuators: Vec<ActuatorSpec>,
    /// Subcore-level operators unlock once neurons/subcores exceeds this.
    pub k_ratio: f64,
    pub af_catalog: Vec<ActivationKind>,
    pub lm_catalog: Vec<LearningKind>,
}

impl MutationContext {
    pub fn new(sensors: Vec<SensorSpec>, actuators: Vec<ActuatorSpec>) -> Self {
        MutationContext {
            available_sensors: sensors,
            available_actuators: actuators,
            k_ratio: 5.0,
            af_catalog: vec![ActivationKind::Tanh],
            lm_catalog: vec![LearningKind::None],
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MutationError {
    /// The drawn operator has nothing to do on this genome; redraw.
    #[error("operator {0} is not applicable to this genome")]
    NotApplicable(MutationOp),
    /// Every redraw came up inapplicable; the offspring would be a bare clone.
    #[error("no mutation operator could be applied")]
    NoOperatorApplied,
}

/// Number of operators applied to one offspring: uniform in
/// `[1, round(sqrt(parent neurons))]`.
pub fn mo_count<R: Rng>(parent: &Genome, rng: &mut R) -> usize {
    rng.gen_range(1..=crate::tuning::sqrt_count(parent.neuron_count()))
}

/// Operators currently drawable: the neuron-level catalog, plus the
/// subcore-level operators once the neuron/subcore ratio exceeds the gate.
pub fn available_operators(g: &Genome, ctx: &MutationContext) -> Vec<MutationOp> {
    let ratio = g.neuron_count() as f64 / g.subcores.len() as f64;
    MutationOp::ALL
        .into_iter()
        .filter(|op| !op.is_subcore_level() || ratio > ctx.k_ratio)
        .collect()
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

fn pick<'a, T, R: Rng>(items: &'a [T], rng: &mut R) -> &'a T {
    &items[rng.gen_range(0..items.len())]
}

/// Marks an element (and its supervising subcore) as mutated this phase.
fn touch_neuron(g: &mut Genome, id: NodeId) {
    let generation = g.core.generation;
    let sc_id = g.supervisor_of(id).map(|s| s.id);
    if let Some(n) = g.neuron_mut(id) {
        n.generation = generation;
    }
    if let Some(sc_id) = sc_id {
        if let Some(sc) = g.subcore_mut(sc_id) {
            sc.generation = generation;
        }
    }
}

fn touch_subcore(g: &mut Genome, id: NodeId) {
    let generation = g.core.generation;
    if let Some(sc) = g.subcore_mut(id) {
        sc.generation = generation;
    }
}

fn push_history(g: &mut Genome, operator: MutationOp, element: NodeId, info: String) {
    g.core.history.push(HistoryEntry { operator, element, info });
}

fn fresh_neuron<R: Rng>(g: &Genome, ctx: &MutationContext, rng: &mut R) -> NeuronGene {
    NeuronGene {
        id: g.next_node_id(),
        input_list: Vec::new(),
        output_list: Vec::new(),
        activation: *pick(&ctx.af_catalog, rng),
        learning: *pick(&ctx.lm_catalog, rng),
        weights: Vec::new(),
        bias: None,
        parameters: Vec::new(),
        generation: g.core.generation,
    }
}

/// The input-list position in `target` that pairs with its `nth`
/// subcore-sourced routing spec.
fn routed_entry_position(target: &NeuronGene, supervisor: NodeId, nth: usize) -> usize {
    target
        .input_list
        .iter()
        .enumerate()
        .filter(|(_, s)| s.from == supervisor)
        .nth(nth)
        .map(|(i, _)| i)
        .expect("spec pairs with a routed entry")
}

/// A subcore's output vector grew by one value (appended at its end):
/// update what `consumer` has on record for that source and extend the
/// weights of every neuron the change reaches through block or all routes.
fn grow_source_in_consumer<R: Rng>(
    g: &mut Genome,
    consumer_id: NodeId,
    source_id: NodeId,
    rng: &mut R,
    touched: &mut Vec<NodeId>,
) {
    let consumer = g.subcore(consumer_id).expect("consumer exists");
    let entry_pos = consumer
        .input_list
        .iter()
        .position(|s| s.from == source_id)
        .expect("consumer records the source");
    let old_len = consumer.input_list[entry_pos].len;
    let offset_before: usize =
        consumer.input_list[..entry_pos].iter().map(|s| s.len).sum();

    // (target, entry position, insert position) for every affected route.
    let mut edits: Vec<(NodeId, usize, usize)> = Vec::new();
    let mut per_target_counts: Vec<(NodeId, usize)> = Vec::new();
    for spec in &consumer.to_links {
        let nth = {
            let slot = per_target_counts.iter_mut().find(|(id, _)| *id == spec.to);
            match slot {
                Some((_, c)) => {
                    let n = *c;
                    *c += 1;
                    n
                }
                None => {
                    per_target_counts.push((spec.to, 1));
                    0
                }
            }
        };
        if spec.to == consumer.id {
            continue;
        }
        let insert_at = match &spec.route {
            LinkRoute::All => offset_before + old_len,
            LinkRoute::Block { from } if *from == source_id => old_len,
            _ => continue,
        };
        let target = g.neuron(spec.to).expect("route target exists");
        let entry = routed_entry_position(target, consumer.id, nth);
        edits.push((spec.to, entry, insert_at));
    }

    for (target_id, entry, insert_at) in edits {
        let target = g.neuron_mut(target_id).expect("route target exists");
        target.weights[entry].insert(insert_at, seed_weight(rng));
        target.input_list[entry].len += 1;
        touched.push(target_id);
    }
    let consumer = g.subcore_mut(consumer_id).expect("consumer exists");
    consumer.input_list[entry_pos].len += 1;
    touched.push(consumer_id);
}

/// Appends `neuron` to the subcore's output vector and propagates the longer
/// vector to every consumer. Only valid when the subcore does not feed an
/// actuator (actuator vector lengths are fixed by the environment).
fn join_output_vector<R: Rng>(
    g: &mut Genome,
    sc_id: NodeId,
    neuron_id: NodeId,
    rng: &mut R,
    touched: &mut Vec<NodeId>,
) {
    let consumers: Vec<NodeId> = {
        let sc = g.subcore_mut(sc_id).expect("subcore exists");
        sc.from_list.push(neuron_id);
        sc.output_list.clone()
    };
    g.neuron_mut(neuron_id).expect("neuron exists").output_list.push(sc_id);
    touched.push(neuron_id);
    touched.push(sc_id);
    for c in consumers {
        grow_source_in_consumer(g, c, sc_id, rng, touched);
    }
}

fn feeds_actuator(g: &Genome, sc_id: NodeId) -> bool {
    g.core.actuator_list.iter().any(|b| b.subcore == sc_id)
}

fn apply_touches(g: &mut Genome, touched: Vec<NodeId>) {
    for id in touched {
        if g.neuron(id).is_some() {
            touch_neuron(g, id);
        } else if g.subcore(id).is_some() {
            touch_subcore(g, id);
        }
    }
}

// ---------------------------------------------------------------------------
// Neuron-level operators
// ---------------------------------------------------------------------------

fn op_add_neuron<R: Rng>(
    g: &mut Genome,
    ctx: &MutationContext,
    rng: &mut R,
) -> Result<(), MutationError> {
    let sc_id = pick(&g.core.supervised.clone(), rng).to_owned();
    let mut neuron = fresh_neuron(g, ctx, rng);
    let nid = neuron.id;
    let mut touched = vec![nid, sc_id];

    // Incoming side: a random sibling, or a fresh routed link from the
    // subcore.
    let siblings = g.subcore(sc_id).expect("subcore exists").supervised.clone();
    let from_subcore = siblings.is_empty() || rng.gen_bool(0.5);
    if from_subcore {
        let sc = g.subcore_mut(sc_id).expect("subcore exists");
        add_random_routed_link(sc, &mut neuron, rng);
    } else {
        let u = *pick(&siblings, rng);
        neuron.input_list.push(InputSource { from: u, len: 1 });
        neuron.weights.push(vec![seed_weight(rng)]);
        g.neuron_mut(u).expect("sibling exists").output_list.push(nid);
        touched.push(u);
    }

    // Outgoing side: a random sibling, or joining the subcore's output
    // vector when that vector's length is not pinned by an actuator.
    let can_join = !feeds_actuator(g, sc_id);
    let to_subcore = (siblings.is_empty() || rng.gen_bool(0.5)) && can_join;
    let info;
    g.subcore_mut(sc_id).expect("subcore exists").supervised.push(nid);
    if to_subcore {
        g.neurons.push(neuron);
        join_output_vector(g, sc_id, nid, rng, &mut touched);
        info = format!("into subcore {sc_id}, feeding its output vector");
    } else if siblings.is_empty() {
        // A subcore briefly without output targets cannot occur: every
        // subcore supervises at least one neuron.
        unreachable!("subcores always supervise at least one neuron");
    } else {
        let v = *pick(&siblings, rng);
        neuron.output_list.push(v);
        g.neurons.push(neuron);
        let target = g.neuron_mut(v).expect("sibling exists");
        target.input_list.push(InputSource { from: nid, len: 1 });
        target.weights.push(vec![seed_weight(rng)]);
        touched.push(v);
        info = format!("into subcore {sc_id}, feeding neuron {v}");
    }

    apply_touches(g, touched);
    push_history(g, MutationOp::AddNeuron, nid, info);
    Ok(())
}

enum LinkAction {
    FromNeuron(NodeId),
    FromSubcore,
    ToNeuron(NodeId),
    ToSubcore,
}

fn op_add_link<R: Rng>(
    g: &mut Genome,
    _ctx: &MutationContext,
    rng: &mut R,
) -> Result<(), MutationError> {
    let neuron_ids: Vec<NodeId> = g.neurons.iter().map(|n| n.id).collect();
    let nid = *pick(&neuron_ids, rng);
    let sc = g.supervisor_of(nid).expect("neuron is supervised");
    let sc_id = sc.id;
    let siblings = sc.supervised.clone();
    let n = g.neuron(nid).expect("neuron exists");

    let mut actions = Vec::new();
    for &u in &siblings {
        if !n.input_list.iter().any(|s| s.from == u) {
            actions.push(LinkAction::FromNeuron(u));
        }
    }
    actions.push(LinkAction::FromSubcore);
    for &v in &siblings {
        if v != nid {
            let reads = g
                .neuron(v)
                .map(|t| t.input_list.iter().any(|s| s.from == nid))
                .unwrap_or(true);
            if !reads {
                actions.push(LinkAction::ToNeuron(v));
            }
        }
    }
    let sc_ref = g.subcore(sc_id).expect("subcore exists");
    if !feeds_actuator(g, sc_id) && !sc_ref.from_list.contains(&nid) {
        actions.push(LinkAction::ToSubcore);
    }

    let mut touched = vec![nid];
    let info;
    match actions.remove(rng.gen_range(0..actions.len())) {
        LinkAction::FromNeuron(u) => {
            let n = g.neuron_mut(nid).expect("neuron exists");
            n.input_list.push(InputSource { from: u, len: 1 });
            n.weights.push(vec![seed_weight(rng)]);
            g.neuron_mut(u).expect("sibling exists").output_list.push(nid);
            touched.push(u);
            info = format!("from neuron {u} to neuron {nid}");
        }
        LinkAction::FromSubcore => {
            let mut n = g.neuron_mut(nid).expect("neuron exists").clone();
            let sc = g.subcore_mut(sc_id).expect("subcore exists");
            add_random_routed_link(sc, &mut n, rng);
            *g.neuron_mut(nid).expect("neuron exists") = n;
            touched.push(sc_id);
            info = format!("routed from subcore {sc_id} to neuron {nid}");
        }
        LinkAction::ToNeuron(v) => {
            g.neuron_mut(nid).expect("neuron exists").output_list.push(v);
            let t = g.neuron_mut(v).expect("sibling exists");
            t.input_list.push(InputSource { from: nid, len: 1 });
            t.weights.push(vec![seed_weight(rng)]);
            touched.push(v);
            info = format!("from neuron {nid} to neuron {v}");
        }
        LinkAction::ToSubcore => {
            join_output_vector(g, sc_id, nid, rng, &mut touched);
            info = format!("from neuron {nid} into subcore {sc_id} output");
        }
    }

    apply_touches(g, touched);
    push_history(g, MutationOp::AddLink, nid, info);
    Ok(())
}

fn op_splice_neuron<R: Rng>(
    g: &mut Genome,
    ctx: &MutationContext,
    rng: &mut R,
) -> Result<(), MutationError> {
    // Every neuron-to-neuron edge u -> v with u != v.
    let mut edges = Vec::new();
    for v in &g.neurons {
        for src in &v.input_list {
            if src.from != v.id && g.neuron(src.from).is_some() {
                edges.push((src.from, v.id));
            }
        }
    }
    if edges.is_empty() {
        return Err(MutationError::NotApplicable(MutationOp::SpliceNeuron));
    }
    let (u, v) = *pick(&edges, rng);

    let mut middle = fresh_neuron(g, ctx, rng);
    let mid = middle.id;
    middle.input_list.push(InputSource { from: u, len: 1 });
    middle.weights.push(vec![seed_weight(rng)]);
    middle.output_list.push(v);
    let sc_id = g.supervisor_of(u).expect("supervised").id;
    g.subcore_mut(sc_id).expect("subcore exists").supervised.push(mid);
    g.neurons.push(middle);

    // Rewire u -> v into u -> mid -> v, keeping v's weight for the entry.
    let sender = g.neuron_mut(u).expect("edge endpoint exists");
    let out = sender.output_list.iter_mut().find(|t| **t == v).expect("edge recorded");
    *out = mid;
    let receiver = g.neuron_mut(v).expect("edge endpoint exists");
    let entry = receiver.input_list.iter_mut().find(|s| s.from == u).expect("edge recorded");
    entry.from = mid;

    apply_touches(g, vec![u, v, mid]);
    push_history(g, MutationOp::SpliceNeuron, mid, format!("between {u} and {v}"));
    Ok(())
}

fn op_change_af<R: Rng>(
    g: &mut Genome,
    ctx: &MutationContext,
    rng: &mut R,
) -> Result<(), MutationError> {
    let candidates: Vec<(NodeId, Vec<ActivationKind>)> = g
        .neurons
        .iter()
        .map(|n| {
            let alts: Vec<ActivationKind> =
                ctx.af_catalog.iter().copied().filter(|a| *a != n.activation).collect();
            (n.id, alts)
        })
        .filter(|(_, alts)| !alts.is_empty())
        .collect();
    if candidates.is_empty() {
        return Err(MutationError::NotApplicable(MutationOp::ChangeAf));
    }
    let (nid, alts) = pick(&candidates, rng);
    let new = *pick(alts, rng);
    let nid = *nid;
    g.neuron_mut(nid).expect("candidate exists").activation = new;
    apply_touches(g, vec![nid]);
    push_history(g, MutationOp::ChangeAf, nid, format!("now {}", new.tag()));
    Ok(())
}

fn op_change_lm<R: Rng>(
    g: &mut Genome,
    ctx: &MutationContext,
    rng: &mut R,
) -> Result<(), MutationError> {
    let candidates: Vec<(NodeId, Vec<LearningKind>)> = g
        .neurons
        .iter()
        .map(|n| {
            let alts: Vec<LearningKind> =
                ctx.lm_catalog.iter().copied().filter(|l| *l != n.learning).collect();
            (n.id, alts)
        })
        .filter(|(_, alts)| !alts.is_empty())
        .collect();
    if candidates.is_empty() {
        return Err(MutationError::NotApplicable(MutationOp::ChangeLm));
    }
    let (nid, alts) = pick(&candidates, rng);
    let new = *pick(alts, rng);
    let nid = *nid;
    g.neuron_mut(nid).expect("candidate exists").learning = new;
    apply_touches(g, vec![nid]);
    push_history(g, MutationOp::ChangeLm, nid, format!("now {}", new.tag()));
    Ok(())
}

fn op_add_bias<R: Rng>(
    g: &mut Genome,
    _ctx: &MutationContext,
    rng: &mut R,
) -> Result<(), MutationError> {
    let candidates: Vec<NodeId> =
        g.neurons.iter().filter(|n| n.bias.is_none()).map(|n| n.id).collect();
    if candidates.is_empty() {
        return Err(MutationError::NotApplicable(MutationOp::AddBias));
    }
    let nid = *pick(&candidates, rng);
    g.neuron_mut(nid).expect("candidate exists").bias = Some(seed_weight(rng));
    apply_touches(g, vec![nid]);
    push_history(g, MutationOp::AddBias, nid, String::new());
    Ok(())
}

// ---------------------------------------------------------------------------
// Subcore-level operators
// ---------------------------------------------------------------------------

fn unused_sensors(g: &Genome, ctx: &MutationContext) -> Vec<SensorSpec> {
    ctx.available_sensors
        .iter()
        .filter(|s| !g.core.sensor_list.iter().any(|b| b.tag == s.tag))
        .cloned()
        .collect()
}

fn unused_actuators(g: &Genome, ctx: &MutationContext) -> Vec<ActuatorSpec> {
    ctx.available_actuators
        .iter()
        .filter(|a| !g.core.actuator_list.iter().any(|b| b.tag == a.tag))
        .cloned()
        .collect()
}

/// Fills a new subcore with one layer of `count` neurons, each taking one
/// randomly typed routed link over the subcore's inputs.
fn populate_subcore<R: Rng>(
    g: &mut Genome,
    mut sc: SubCoreGene,
    count: usize,
    ctx: &MutationContext,
    rng: &mut R,
) -> Vec<NodeId> {
    let mut ids = Vec::new();
    for _ in 0..count {
        let mut n = fresh_neuron(g, ctx, rng);
        // next_node_id must see previously created neurons.
        n.id = NodeId(g.next_node_id().0.max(sc.id.0 + 1));
        add_random_routed_link(&mut sc, &mut n, rng);
        n.output_list.push(sc.id);
        sc.from_list.push(n.id);
        sc.supervised.push(n.id);
        ids.push(n.id);
        g.neurons.push(n);
    }
    g.subcores.push(sc);
    ids
}

enum NewInput {
    FromSubcore(NodeId),
    FromSensor(SensorSpec),
}

enum NewOutput {
    ToSubcore(NodeId),
    ToActuator(ActuatorSpec),
}

fn op_add_subcore<R: Rng>(
    g: &mut Genome,
    ctx: &MutationContext,
    rng: &mut R,
) -> Result<(), MutationError> {
    let existing: Vec<NodeId> = g.subcores.iter().map(|s| s.id).collect();
    let mut inputs: Vec<NewInput> = existing.iter().map(|&id| NewInput::FromSubcore(id)).collect();
    inputs.extend(unused_sensors(g, ctx).into_iter().map(NewInput::FromSensor));
    let mut outputs: Vec<NewOutput> =
        existing.iter().map(|&id| NewOutput::ToSubcore(id)).collect();
    outputs.extend(unused_actuators(g, ctx).into_iter().map(NewOutput::ToActuator));
    if inputs.is_empty() || outputs.is_empty() {
        return Err(MutationError::NotApplicable(MutationOp::AddSubcore));
    }

    let input = inputs.remove(rng.gen_range(0..inputs.len()));
    let output = outputs.remove(rng.gen_range(0..outputs.len()));

    let sc_id = g.next_node_id();
    let mut sc = SubCoreGene {
        id: sc_id,
        input_list: Vec::new(),
        output_list: Vec::new(),
        to_links: Vec::new(),
        from_list: Vec::new(),
        kind: SubCoreKind::Neural,
        parameters: Vec::new(),
        supervised: Vec::new(),
        generation: g.core.generation,
    };
    let mut touched = vec![sc_id];
    let mut info_parts = Vec::new();

    match &input {
        NewInput::FromSubcore(a) => {
            let src = g.subcore(*a).expect("source exists");
            sc.input_list.push(InputSource { from: *a, len: src.output_len() });
            info_parts.push(format!("input from subcore {a}"));
        }
        NewInput::FromSensor(spec) => {
            sc.input_list.push(InputSource { from: g.core.id, len: spec.len });
            info_parts.push(format!("input from sensor {}", spec.tag));
        }
    }
    let neuron_count = match &output {
        NewOutput::ToSubcore(b) => {
            sc.output_list.push(*b);
            info_parts.push(format!("output to subcore {b}"));
            1
        }
        NewOutput::ToActuator(spec) => {
            sc.output_list.push(g.core.id);
            info_parts.push(format!("output to actuator {}", spec.tag));
            spec.len
        }
    };

    let neuron_ids = populate_subcore(g, sc, neuron_count, ctx, rng);
    touched.extend(neuron_ids);
    g.core.supervised.push(sc_id);

    match input {
        NewInput::FromSubcore(a) => {
            g.subcore_mut(a).expect("source exists").output_list.push(sc_id);
            touched.push(a);
        }
        NewInput::FromSensor(spec) => {
            g.core.sensor_list.push(SensorBinding { subcore: sc_id, tag: spec.tag });
        }
    }
    match output {
        NewOutput::ToSubcore(b) => {
            let len = g.subcore(sc_id).expect("new subcore").output_len();
            let consumer = g.subcore_mut(b).expect("consumer exists");
            consumer.input_list.push(InputSource { from: sc_id, len });
            // A brand-new trailing source only lengthens all-type routes.
            grow_all_routes_for_new_source(g, b, sc_id, len, rng, &mut touched);
            touched.push(b);
        }
        NewOutput::ToActuator(spec) => {
            g.core.actuator_list.push(ActuatorBinding { subcore: sc_id, tag: spec.tag });
        }
    }

    apply_touches(g, touched);
    push_history(g, MutationOp::AddSubcore, sc_id, info_parts.join(", "));
    Ok(())
}

/// A consumer gained a new input source of length `len` (appended at the end
/// of its input list): every all-type route through it lengthens by `len`.
fn grow_all_routes_for_new_source<R: Rng>(
    g: &mut Genome,
    consumer_id: NodeId,
    _source_id: NodeId,
    len: usize,
    rng: &mut R,
    touched: &mut Vec<NodeId>,
) {
    let consumer = g.subcore(consumer_id).expect("consumer exists");
    let mut edits: Vec<(NodeId, usize)> = Vec::new();
    let mut per_target_counts: Vec<(NodeId, usize)> = Vec::new();
    for spec in &consumer.to_links {
        let nth = {
            match per_target_counts.iter_mut().find(|(id, _)| *id == spec.to) {
                Some((_, c)) => {
                    let n = *c;
                    *c += 1;
                    n
                }
                None => {
                    per_target_counts.push((spec.to, 1));
                    0
                }
            }
        };
        if spec.to == consumer.id || !matches!(spec.route, LinkRoute::All) {
            continue;
        }
        let target = g.neuron(spec.to).expect("route target exists");
        let entry = routed_entry_position(target, consumer.id, nth);
        edits.push((spec.to, entry));
    }
    for (target_id, entry) in edits {
        let target = g.neuron_mut(target_id).expect("route target exists");
        for _ in 0..len {
            target.weights[entry].push(seed_weight(rng));
        }
        target.input_list[entry].len += len;
        touched.push(target_id);
    }
}

fn op_add_subcore_link<R: Rng>(
    g: &mut Genome,
    ctx: &MutationContext,
    rng: &mut R,
) -> Result<(), MutationError> {
    enum Action {
        FromSubcore(NodeId, NodeId),
        FromSensor(NodeId, SensorSpec),
        ToSubcore(NodeId, NodeId),
        ToActuator(NodeId, ActuatorSpec),
    }

    let mut actions = Vec::new();
    for s in &g.subcores {
        for a in &g.subcores {
            if a.id != s.id && !s.input_list.iter().any(|e| e.from == a.id) {
                actions.push(Action::FromSubcore(a.id, s.id));
            }
        }
        let has_core_input = s.input_list.iter().any(|e| e.from == g.core.id);
        if !has_core_input {
            for spec in unused_sensors(g, ctx) {
                actions.push(Action::FromSensor(s.id, spec));
            }
        }
        if !s.output_list.contains(&g.core.id) {
            for spec in unused_actuators(g, ctx) {
                if spec.len == s.output_len() {
                    actions.push(Action::ToActuator(s.id, spec));
                }
            }
        }
        for b in &g.subcores {
            if b.id != s.id && !b.input_list.iter().any(|e| e.from == s.id) {
                actions.push(Action::ToSubcore(s.id, b.id));
            }
        }
    }
    if actions.is_empty() {
        return Err(MutationError::NotApplicable(MutationOp::AddSubcoreLink));
    }

    let mut touched = Vec::new();
    let (element, info) = match actions.remove(rng.gen_range(0..actions.len())) {
        Action::FromSubcore(a, s) | Action::ToSubcore(a, s) => {
            let len = g.subcore(a).expect("sender exists").output_len();
            g.subcore_mut(a).expect("sender exists").output_list.push(s);
            g.subcore_mut(s)
                .expect("receiver exists")
                .input_list
                .push(InputSource { from: a, len });
            grow_all_routes_for_new_source(g, s, a, len, rng, &mut touched);
            touched.push(a);
            touched.push(s);
            (s, format!("subcore {a} now feeds subcore {s}"))
        }
        Action::FromSensor(s, spec) => {
            let core_id = g.core.id;
            g.core.sensor_list.push(SensorBinding { subcore: s, tag: spec.tag.clone() });
            g.subcore_mut(s)
                .expect("receiver exists")
                .input_list
                .push(InputSource { from: core_id, len: spec.len });
            grow_all_routes_for_new_source(g, s, core_id, spec.len, rng, &mut touched);
            touched.push(s);
            (s, format!("subcore {s} acquired sensor {}", spec.tag))
        }
        Action::ToActuator(s, spec) => {
            let core_id = g.core.id;
            g.core.actuator_list.push(ActuatorBinding { subcore: s, tag: spec.tag.clone() });
            g.subcore_mut(s).expect("sender exists").output_list.push(core_id);
            touched.push(s);
            (s, format!("subcore {s} acquired actuator {}", spec.tag))
        }
    };

    apply_touches(g, touched);
    push_history(g, MutationOp::AddSubcoreLink, element, info);
    Ok(())
}

fn op_splice_subcore<R: Rng>(
    g: &mut Genome,
    ctx: &MutationContext,
    rng: &mut R,
) -> Result<(), MutationError> {
    enum Edge {
        Between(NodeId, NodeId),
        Sensor(usize),
        Actuator(usize),
    }

    let mut edges = Vec::new();
    for sc in &g.subcores {
        for e in &sc.input_list {
            if e.from != g.core.id && e.from != sc.id {
                edges.push(Edge::Between(e.from, sc.id));
            }
        }
    }
    for (i, _) in g.core.sensor_list.iter().enumerate() {
        edges.push(Edge::Sensor(i));
    }
    for (i, _) in g.core.actuator_list.iter().enumerate() {
        edges.push(Edge::Actuator(i));
    }
    if edges.is_empty() {
        return Err(MutationError::NotApplicable(MutationOp::SpliceSubcore));
    }

    let sc_id = g.next_node_id();
    let make_subcore = |g: &Genome, input: InputSource, output: NodeId| SubCoreGene {
        id: sc_id,
        input_list: vec![input],
        output_list: vec![output],
        to_links: Vec::new(),
        from_list: Vec::new(),
        kind: SubCoreKind::Neural,
        parameters: Vec::new(),
        supervised: Vec::new(),
        generation: g.core.generation,
    };

    let mut touched = vec![sc_id];
    let info;
    match edges.remove(rng.gen_range(0..edges.len())) {
        Edge::Between(a, b) => {
            // a -> b becomes a -> new -> b; the new subcore reproduces a's
            // output length so b's routes keep their shapes.
            let len = g.subcore(a).expect("edge endpoint").output_len();
            let sc = make_subcore(g, InputSource { from: a, len }, b);
            let ids = populate_subcore(g, sc, len, ctx, rng);
            touched.extend(ids);
            let sender = g.subcore_mut(a).expect("edge endpoint");
            *sender.output_list.iter_mut().find(|t| **t == b).expect("edge recorded") = sc_id;
            let receiver = g.subcore_mut(b).expect("edge endpoint");
            receiver
                .input_list
                .iter_mut()
                .find(|e| e.from == a)
                .expect("edge recorded")
                .from = sc_id;
            for spec in &mut receiver.to_links {
                match &mut spec.route {
                    LinkRoute::Single { from, .. } | LinkRoute::Block { from } if *from == a => {
                        *from = sc_id;
                    }
                    _ => {}
                }
            }
            touched.push(a);
            touched.push(b);
            info = format!("between subcores {a} and {b}");
        }
        Edge::Sensor(i) => {
            let core_id = g.core.id;
            let b = g.core.sensor_list[i].subcore;
            let tag = g.core.sensor_list[i].tag.clone();
            let receiver = g.subcore(b).expect("bound subcore");
            let len = receiver
                .input_list
                .iter()
                .find(|e| e.from == core_id)
                .expect("sensor entry")
                .len;
            let sc = make_subcore(g, InputSource { from: core_id, len }, b);
            let ids = populate_subcore(g, sc, len, ctx, rng);
            touched.extend(ids);
            g.core.sensor_list[i].subcore = sc_id;
            let receiver = g.subcore_mut(b).expect("bound subcore");
            receiver
                .input_list
                .iter_mut()
                .find(|e| e.from == core_id)
                .expect("sensor entry")
                .from = sc_id;
            for spec in &mut receiver.to_links {
                match &mut spec.route {
                    LinkRoute::Single { from, .. } | LinkRoute::Block { from }
                        if *from == core_id =>
                    {
                        *from = sc_id;
                    }
                    _ => {}
                }
            }
            touched.push(b);
            info = format!("on the {tag} sensor path into subcore {b}");
        }
        Edge::Actuator(i) => {
            let core_id = g.core.id;
            let a = g.core.actuator_list[i].subcore;
            let tag = g.core.actuator_list[i].tag.clone();
            let len = g.subcore(a).expect("bound subcore").output_len();
            let sc = make_subcore(g, InputSource { from: a, len }, core_id);
            let ids = populate_subcore(g, sc, len, ctx, rng);
            touched.extend(ids);
            g.core.actuator_list[i].subcore = sc_id;
            let sender = g.subcore_mut(a).expect("bound subcore");
            *sender
                .output_list
                .iter_mut()
                .find(|t| **t == core_id)
                .expect("actuator edge recorded") = sc_id;
            touched.push(a);
            info = format!("on the {tag} actuator path out of subcore {a}");
        }
    }

    g.core.supervised.push(sc_id);
    apply_touches(g, touched);
    push_history(g, MutationOp::SpliceSubcore, sc_id, info);
    Ok(())
}

// ---------------------------------------------------------------------------
// Entry points
// ---------------------------------------------------------------------------

fn dispatch<R: Rng>(
    g: &mut Genome,
    op: MutationOp,
    ctx: &MutationContext,
    rng: &mut R,
) -> Result<(), MutationError> {
    match op {
        MutationOp::AddNeuron => op_add_neuron(g, ctx, rng),
        MutationOp::AddLink => op_add_link(g, ctx, rng),
        MutationOp::SpliceNeuron => op_splice_neuron(g, ctx, rng),
        MutationOp::ChangeAf => op_change_af(g, ctx, rng),
        MutationOp::ChangeLm => op_change_lm(g, ctx, rng),
        MutationOp::AddBias => op_add_bias(g, ctx, rng),
        MutationOp::AddSubcore => op_add_subcore(g, ctx, rng),
        MutationOp::AddSubcoreLink => op_add_subcore_link(g, ctx, rng),
        MutationOp::SpliceSubcore => op_splice_subcore(g, ctx, rng),
    }
}

/// Applies one operator to a copy of the genome. Touched elements and their
/// supervisors take the core's current generation; a history entry records
/// the operation. Inapplicable operators report a retriable signal.
pub fn apply_operator<R: Rng>(
    g: &Genome,
    op: MutationOp,
    ctx: &MutationContext,
    rng: &mut R,
) -> Result<Genome, MutationError> {
    let mut out = g.clone();
    dispatch(&mut out, op, ctx, rng)?;
    Ok(out)
}

/// Redraws per operator slot when the drawn operator is inapplicable.
const REDRAWS_PER_SLOT: usize = 10;

/// Produces one offspring: a clone under a fresh id, its core generation
/// bumped once, and `mo_count` operators applied with bounded redraws on
/// inapplicable draws.
pub fn mutate_offspring<R: Rng>(
    parent: &Genome,
    ctx: &MutationContext,
    rng: &mut R,
    new_id: DxnnId,
) -> Result<Genome, MutationError> {
    let mut child = parent.clone();
    child.dxnn_id = new_id;
    child.core.generation += 1;

    let ops = mo_count(parent, rng);
    let mut applied = 0usize;
    for _ in 0..ops {
        for _ in 0..REDRAWS_PER_SLOT {
            let available = available_operators(&child, ctx);
            let op = *pick(&available, rng);
            match dispatch(&mut child, op, ctx, rng) {
                Ok(()) => {
                    applied += 1;
                    break;
                }
                Err(MutationError::NotApplicable(_)) => continue,
                Err(e) => return Err(e),
            }
        }
    }
    if applied == 0 {
        return Err(MutationError::NoOperatorApplied);
    }
    debug_assert!(
        crate::genome::validate(&child).is_valid(),
        "offspring failed validation:\n{}",
        crate::genome::validate(&child)
    );
    Ok(child)
}
