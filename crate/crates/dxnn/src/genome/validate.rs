//! Structural validation: every invariant of the genome data model, reported
//! as data rather than errors.

use std::collections::BTreeSet;
use std::fmt;

use super::{Genome, NodeId, Population, SubCoreKind};

/// One broken invariant, naming the elements involved.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    DuplicateElementId { id: NodeId },
    DuplicateDxnnId { id: u64 },
    NoSensors,
    NoActuators,
    SupervisedMismatch { core: NodeId, detail: String },
    SensorBinding { subcore: NodeId, detail: String },
    ActuatorBinding { subcore: NodeId, detail: String },
    GenerationAboveCore { element: NodeId, generation: u64, core_generation: u64 },
    UnsupportedKind { subcore: NodeId },
    UnknownSource { node: NodeId, from: NodeId },
    DuplicateSource { node: NodeId, from: NodeId },
    SourceLengthMismatch { node: NodeId, from: NodeId, recorded: usize, actual: usize },
    MissingBackLink { node: NodeId, target: NodeId },
    LinkTarget { subcore: NodeId, to: NodeId },
    BadRoute { subcore: NodeId, to: NodeId, detail: String },
    RouteCountMismatch { neuron: NodeId, specs: usize, entries: usize },
    RoutedLengthMismatch { neuron: NodeId, position: usize, expected: usize, actual: usize },
    WeightArity { neuron: NodeId, entry: usize, expected: usize, actual: usize },
    WeightListArity { neuron: NodeId, entries: usize, weight_vectors: usize },
    NonFiniteWeight { neuron: NodeId },
    EmptyInput { neuron: NodeId },
    EmptyFromList { subcore: NodeId },
    FromListEntry { subcore: NodeId, neuron: NodeId, detail: String },
    Unsupervised { neuron: NodeId },
    MultiplySupervised { neuron: NodeId },
    UnknownSupervised { subcore: NodeId, id: NodeId },
    DanglingOutput { node: NodeId, target: NodeId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            DuplicateElementId { id } => write!(f, "element id {id} used more than once"),
            DuplicateDxnnId { id } => write!(f, "dxnn id {id} used more than once"),
            NoSensors => write!(f, "genome has no sensor bindings"),
            NoActuators => write!(f, "genome has no actuator bindings"),
            SupervisedMismatch { core, detail } => {
                write!(f, "core {core} supervised list inconsistent: {detail}")
            }
            SensorBinding { subcore, detail } => {
                write!(f, "sensor binding on subcore {subcore}: {detail}")
            }
            ActuatorBinding { subcore, detail } => {
                write!(f, "actuator binding on subcore {subcore}: {detail}")
            }
            GenerationAboveCore { element, generation, core_generation } => write!(
                f,
                "element {element} generation {generation} exceeds core generation {core_generation}"
            ),
            UnsupportedKind { subcore } => {
                write!(f, "subcore {subcore} has unsupported kind: substrate")
            }
            UnknownSource { node, from } => {
                write!(f, "node {node} lists unknown or invalid source {from}")
            }
            DuplicateSource { node, from } => {
                write!(f, "node {node} lists source {from} more than once")
            }
            SourceLengthMismatch { node, from, recorded, actual } => write!(
                f,
                "node {node} records length {recorded} from {from}, which produces {actual}"
            ),
            MissingBackLink { node, target } => {
                write!(f, "node {node} feeds {target} but is missing from its output list")
            }
            LinkTarget { subcore, to } => {
                write!(f, "subcore {subcore} routes to {to}, which it does not supervise")
            }
            BadRoute { subcore, to, detail } => {
                write!(f, "subcore {subcore} route to {to} is invalid: {detail}")
            }
            RouteCountMismatch { neuron, specs, entries } => write!(
                f,
                "neuron {neuron} has {entries} subcore-sourced entries but {specs} routing specs"
            ),
            RoutedLengthMismatch { neuron, position, expected, actual } => write!(
                f,
                "neuron {neuron} routed entry {position} records length {actual}, route delivers {expected}"
            ),
            WeightArity { neuron, entry, expected, actual } => write!(
                f,
                "neuron {neuron} weight vector {entry} has {actual} weights, input needs {expected}"
            ),
            WeightListArity { neuron, entries, weight_vectors } => write!(
                f,
                "neuron {neuron} has {weight_vectors} weight vectors for {entries} input entries"
            ),
            NonFiniteWeight { neuron } => write!(f, "neuron {neuron} carries a non-finite weight"),
            EmptyInput { neuron } => write!(f, "neuron {neuron} has no inputs"),
            EmptyFromList { subcore } => {
                write!(f, "subcore {subcore} assembles an empty output vector")
            }
            FromListEntry { subcore, neuron, detail } => {
                write!(f, "subcore {subcore} output entry {neuron}: {detail}")
            }
            Unsupervised { neuron } => write!(f, "neuron {neuron} is not supervised by any subcore"),
            MultiplySupervised { neuron } => {
                write!(f, "neuron {neuron} is supervised by more than one subcore")
            }
            UnknownSupervised { subcore, id } => {
                write!(f, "subcore {subcore} supervises unknown neuron {id}")
            }
            DanglingOutput { node, target } => {
                write!(f, "node {node} outputs to {target}, which does not read from it")
            }
        }
    }
}

/// The result of validating one genome: empty means valid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks every structural invariant of `g` and returns the full list of
/// violations.
pub fn validate(g: &Genome) -> ValidationReport {
    let mut out = Vec::new();
    let core = &g.core;

    // Element id uniqueness.
    let mut seen = BTreeSet::new();
    for id in std::iter::once(core.id)
        .chain(g.subcores.iter().map(|s| s.id))
        .chain(g.neurons.iter().map(|n| n.id))
    {
        if !seen.insert(id) {
            out.push(Violation::DuplicateElementId { id });
        }
    }

    let subcore_ids: BTreeSet<NodeId> = g.subcores.iter().map(|s| s.id).collect();
    let neuron_ids: BTreeSet<NodeId> = g.neurons.iter().map(|n| n.id).collect();

    // Core-level interface.
    if core.sensor_list.is_empty() {
        out.push(Violation::NoSensors);
    }
    if core.actuator_list.is_empty() {
        out.push(Violation::NoActuators);
    }
    let supervised_set: BTreeSet<NodeId> = core.supervised.iter().copied().collect();
    if supervised_set.len() != core.supervised.len() {
        out.push(Violation::SupervisedMismatch {
            core: core.id,
            detail: "duplicate entries".into(),
        });
    }
    if supervised_set != subcore_ids {
        out.push(Violation::SupervisedMismatch {
            core: core.id,
            detail: "supervised ids do not match the genome's subcores".into(),
        });
    }
    for b in &core.sensor_list {
        if !subcore_ids.contains(&b.subcore) {
            out.push(Violation::SensorBinding {
                subcore: b.subcore,
                detail: "bound subcore does not exist".into(),
            });
        }
    }
    for b in &core.actuator_list {
        if !subcore_ids.contains(&b.subcore) {
            out.push(Violation::ActuatorBinding {
                subcore: b.subcore,
                detail: "bound subcore does not exist".into(),
            });
        }
    }
    for (i, b) in core.sensor_list.iter().enumerate() {
        if core.sensor_list[..i].iter().any(|p| p.subcore == b.subcore) {
            out.push(Violation::SensorBinding {
                subcore: b.subcore,
                detail: "more than one sensor bound to the same subcore".into(),
            });
        }
    }
    for (i, b) in core.actuator_list.iter().enumerate() {
        if core.actuator_list[..i].iter().any(|p| p.subcore == b.subcore) {
            out.push(Violation::ActuatorBinding {
                subcore: b.subcore,
                detail: "more than one actuator bound to the same subcore".into(),
            });
        }
    }

    // Generations never exceed the core's.
    for (id, gen) in g
        .subcores
        .iter()
        .map(|s| (s.id, s.generation))
        .chain(g.neurons.iter().map(|n| (n.id, n.generation)))
    {
        if gen > core.generation {
            out.push(Violation::GenerationAboveCore {
                element: id,
                generation: gen,
                core_generation: core.generation,
            });
        }
    }

    // Neuron supervision: each neuron in exactly one subcore.
    for n in &g.neurons {
        let count = g.subcores.iter().filter(|s| s.supervised.contains(&n.id)).count();
        match count {
            0 => out.push(Violation::Unsupervised { neuron: n.id }),
            1 => {}
            _ => out.push(Violation::MultiplySupervised { neuron: n.id }),
        }
    }

    for sc in &g.subcores {
        if sc.kind == SubCoreKind::Substrate {
            out.push(Violation::UnsupportedKind { subcore: sc.id });
        }
        for id in &sc.supervised {
            if !neuron_ids.contains(id) {
                out.push(Violation::UnknownSupervised { subcore: sc.id, id: *id });
            }
        }
        if sc.from_list.is_empty() {
            out.push(Violation::EmptyFromList { subcore: sc.id });
        }
        for (i, nid) in sc.from_list.iter().enumerate() {
            if sc.from_list[..i].contains(nid) {
                out.push(Violation::FromListEntry {
                    subcore: sc.id,
                    neuron: *nid,
                    detail: "listed more than once".into(),
                });
            }
            if !sc.supervised.contains(nid) {
                out.push(Violation::FromListEntry {
                    subcore: sc.id,
                    neuron: *nid,
                    detail: "not supervised by this subcore".into(),
                });
            } else if let Some(n) = g.neuron(*nid) {
                if !n.output_list.contains(&sc.id) {
                    out.push(Violation::MissingBackLink { node: *nid, target: sc.id });
                }
            }
        }

        // Input entries: unique sources, resolvable, length-consistent.
        for (i, src) in sc.input_list.iter().enumerate() {
            if sc.input_list[..i].iter().any(|p| p.from == src.from) {
                out.push(Violation::DuplicateSource { node: sc.id, from: src.from });
            }
            if src.from == core.id {
                if !core.sensor_list.iter().any(|b| b.subcore == sc.id) {
                    out.push(Violation::SensorBinding {
                        subcore: sc.id,
                        detail: "core-sourced input without a sensor binding".into(),
                    });
                }
            } else if let Some(sender) = g.subcore(src.from) {
                if sender.output_len() != src.len {
                    out.push(Violation::SourceLengthMismatch {
                        node: sc.id,
                        from: src.from,
                        recorded: src.len,
                        actual: sender.output_len(),
                    });
                }
                if !sender.output_list.contains(&sc.id) {
                    out.push(Violation::MissingBackLink { node: src.from, target: sc.id });
                }
            } else {
                out.push(Violation::UnknownSource { node: sc.id, from: src.from });
            }
        }
        if core.sensor_list.iter().any(|b| b.subcore == sc.id)
            && !sc.input_list.iter().any(|s| s.from == core.id)
        {
            out.push(Violation::SensorBinding {
                subcore: sc.id,
                detail: "sensor bound but no core-sourced input entry".into(),
            });
        }

        // Output entries resolve and are mirrored on the receiving side.
        for (i, target) in sc.output_list.iter().enumerate() {
            if sc.output_list[..i].contains(target) {
                out.push(Violation::DuplicateSource { node: sc.id, from: *target });
            }
            if *target == core.id {
                if !core.actuator_list.iter().any(|b| b.subcore == sc.id) {
                    out.push(Violation::ActuatorBinding {
                        subcore: sc.id,
                        detail: "outputs to core without an actuator binding".into(),
                    });
                }
            } else if let Some(receiver) = g.subcore(*target) {
                if !receiver.input_list.iter().any(|s| s.from == sc.id) {
                    out.push(Violation::DanglingOutput { node: sc.id, target: *target });
                }
            } else {
                out.push(Violation::DanglingOutput { node: sc.id, target: *target });
            }
        }
        if core.actuator_list.iter().any(|b| b.subcore == sc.id)
            && !sc.output_list.contains(&core.id)
        {
            out.push(Violation::ActuatorBinding {
                subcore: sc.id,
                detail: "actuator bound but core missing from output list".into(),
            });
        }

        // Routing specs: targets supervised (or the subcore itself), sources
        // resolvable, single indices in range.
        for spec in &sc.to_links {
            if spec.to != sc.id && !sc.supervised.contains(&spec.to) {
                out.push(Violation::LinkTarget { subcore: sc.id, to: spec.to });
                continue;
            }
            if spec.delivered_len(&sc.input_list).is_none() {
                out.push(Violation::BadRoute {
                    subcore: sc.id,
                    to: spec.to,
                    detail: "source missing or single index out of range".into(),
                });
            }
        }
    }

    // Neuron-level checks.
    for n in &g.neurons {
        let supervisor = g.supervisor_of(n.id);
        if n.input_list.is_empty() {
            out.push(Violation::EmptyInput { neuron: n.id });
        }
        if n.weights.len() != n.input_list.len() {
            out.push(Violation::WeightListArity {
                neuron: n.id,
                entries: n.input_list.len(),
                weight_vectors: n.weights.len(),
            });
        }
        for (i, (src, w)) in n.input_list.iter().zip(&n.weights).enumerate() {
            if w.len() != src.len {
                out.push(Violation::WeightArity {
                    neuron: n.id,
                    entry: i,
                    expected: src.len,
                    actual: w.len(),
                });
            }
        }
        if n.weights.iter().flatten().chain(n.bias.iter()).any(|w| !w.is_finite()) {
            out.push(Violation::NonFiniteWeight { neuron: n.id });
        }

        let Some(sc) = supervisor else { continue };

        // Non-subcore sources must be sibling neurons delivering one value.
        for src in &n.input_list {
            if src.from == sc.id {
                continue;
            }
            let sibling = sc.supervised.contains(&src.from);
            if !sibling {
                out.push(Violation::UnknownSource { node: n.id, from: src.from });
                continue;
            }
            if src.len != 1 {
                out.push(Violation::SourceLengthMismatch {
                    node: n.id,
                    from: src.from,
                    recorded: src.len,
                    actual: 1,
                });
            }
            if let Some(sender) = g.neuron(src.from) {
                if !sender.output_list.contains(&n.id) {
                    out.push(Violation::MissingBackLink { node: src.from, target: n.id });
                }
            }
        }

        // Routed entries pair positionally with the subcore's specs.
        let specs: Vec<_> = sc.to_links.iter().filter(|s| s.to == n.id).collect();
        let entries: Vec<_> = n.input_list.iter().filter(|s| s.from == sc.id).collect();
        if specs.len() != entries.len() {
            out.push(Violation::RouteCountMismatch {
                neuron: n.id,
                specs: specs.len(),
                entries: entries.len(),
            });
        } else {
            for (i, (spec, entry)) in specs.iter().zip(&entries).enumerate() {
                if let Some(expected) = spec.delivered_len(&sc.input_list) {
                    if expected != entry.len {
                        out.push(Violation::RoutedLengthMismatch {
                            neuron: n.id,
                            position: i,
                            expected,
                            actual: entry.len,
                        });
                    }
                }
            }
        }

        // Output entries: sibling neurons that read from us, or the
        // supervising subcore when we feed its output vector.
        for (i, target) in n.output_list.iter().enumerate() {
            if n.output_list[..i].contains(target) {
                out.push(Violation::DuplicateSource { node: n.id, from: *target });
            }
            if *target == sc.id {
                if !sc.from_list.contains(&n.id) {
                    out.push(Violation::DanglingOutput { node: n.id, target: *target });
                }
            } else if sc.supervised.contains(target) {
                let reads = g
                    .neuron(*target)
                    .map(|t| t.input_list.iter().any(|s| s.from == n.id))
                    .unwrap_or(false);
                if !reads {
                    out.push(Violation::DanglingOutput { node: n.id, target: *target });
                }
            } else {
                out.push(Violation::DanglingOutput { node: n.id, target: *target });
            }
        }
    }

    ValidationReport { violations: out }
}

/// Validates every genome in a population and checks genome id uniqueness.
pub fn validate_population(p: &Population) -> ValidationReport {
    let mut out = Vec::new();
    for (i, g) in p.genomes.iter().enumerate() {
        if p.genomes[..i].iter().any(|o| o.dxnn_id == g.dxnn_id) {
            out.push(Violation::DuplicateDxnnId { id: g.dxnn_id.0 });
        }
        out.extend(validate(g).violations);
    }
    ValidationReport { violations: out }
}
