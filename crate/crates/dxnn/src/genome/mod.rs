//! Heritable data model: core, subcore, and neuron genes, minimal seed
//! construction, structural validation, and the tuple text encoding used
//! for population snapshots.

pub(crate) mod seed;
mod text;
mod validate;

pub use seed::{new_minimal_genome, ActuatorSpec, SensorSpec};
pub use text::{deserialize, serialize, EncodeError};
pub use validate::{validate, validate_population, ValidationReport, Violation};

use std::fmt;

/// Identifier of an element (core, subcore, or neuron) within one genome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u64);

/// Identifier of a genome within a population.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DxnnId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for DxnnId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One entry of a node's input list: the sending node and the length of the
/// vector it delivers. All link-type bookkeeping lives on the sender side;
/// the receiver only sees `(from, len)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputSource {
    pub from: NodeId,
    pub len: usize,
}

/// How a subcore slices its input vectors for one target neuron.
#[derive(Debug, Clone, PartialEq)]
pub enum LinkRoute {
    /// One value: element `index` (1-based) of the vector sent by `from`.
    Single { from: NodeId, index: usize },
    /// The whole vector sent by `from`, unchanged.
    Block { from: NodeId },
    /// Every input vector the subcore receives, concatenated in input-list
    /// order.
    All,
}

/// A routing rule from a subcore to one of its neurons.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkSpec {
    pub to: NodeId,
    pub route: LinkRoute,
}

impl LinkSpec {
    /// Length of the vector this rule delivers, given the subcore's ordered
    /// input sources.
    pub fn delivered_len(&self, inputs: &[InputSource]) -> Option<usize> {
        match &self.route {
            LinkRoute::Single { from, index } => {
                let src = inputs.iter().find(|i| i.from == *from)?;
                (*index >= 1 && *index <= src.len).then_some(1)
            }
            LinkRoute::Block { from } => inputs.iter().find(|i| i.from == *from).map(|i| i.len),
            LinkRoute::All => Some(inputs.iter().map(|i| i.len).sum()),
        }
    }
}

/// Scalar transfer functions available to neurons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ActivationKind {
    Tanh,
    Sigmoid,
    Gaussian,
    Sine,
}

impl ActivationKind {
    pub const ALL: [ActivationKind; 4] = [
        ActivationKind::Tanh,
        ActivationKind::Sigmoid,
        ActivationKind::Gaussian,
        ActivationKind::Sine,
    ];

    pub fn apply(self, x: f64) -> f64 {
        match self {
            ActivationKind::Tanh => x.tanh(),
            ActivationKind::Sigmoid => 1.0 / (1.0 + (-x).exp()),
            ActivationKind::Gaussian => (-x * x).exp(),
            ActivationKind::Sine => x.sin(),
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            ActivationKind::Tanh => "tanh",
            ActivationKind::Sigmoid => "sigmoid",
            ActivationKind::Gaussian => "gaussian",
            ActivationKind::Sine => "sine",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.tag() == tag)
    }
}

/// How a neuron updates its weights while the network runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LearningKind {
    /// Weights stay exactly as compiled.
    None,
    /// Hebbian update after each activation: `w_i += eta * output * input_i`.
    Hebbian,
}

impl LearningKind {
    pub const ALL: [LearningKind; 2] = [LearningKind::None, LearningKind::Hebbian];

    pub fn tag(self) -> &'static str {
        match self {
            LearningKind::None => "none",
            LearningKind::Hebbian => "hebbian",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|l| l.tag() == tag)
    }
}

/// Open key/value list carried by every element.
pub type ParameterList = Vec<(String, String)>;

/// Names of the topological mutation operators, as recorded in a core's
/// history list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MutationOp {
    AddNeuron,
    AddLink,
    SpliceNeuron,
    ChangeAf,
    ChangeLm,
    AddBias,
    AddSubcore,
    AddSubcoreLink,
    SpliceSubcore,
}

impl MutationOp {
    pub const ALL: [MutationOp; 9] = [
        MutationOp::AddNeuron,
        MutationOp::AddLink,
        MutationOp::SpliceNeuron,
        MutationOp::ChangeAf,
        MutationOp::ChangeLm,
        MutationOp::AddBias,
        MutationOp::AddSubcore,
        MutationOp::AddSubcoreLink,
        MutationOp::SpliceSubcore,
    ];

    /// True for operators that act on the subcore network rather than inside
    /// a single subcore.
    pub fn is_subcore_level(self) -> bool {
        matches!(
            self,
            MutationOp::AddSubcore | MutationOp::AddSubcoreLink | MutationOp::SpliceSubcore
        )
    }

    pub fn tag(self) -> &'static str {
        match self {
            MutationOp::AddNeuron => "add_neuron",
            MutationOp::AddLink => "add_link",
            MutationOp::SpliceNeuron => "splice_neuron",
            MutationOp::ChangeAf => "change_af",
            MutationOp::ChangeLm => "change_lm",
            MutationOp::AddBias => "add_bias",
            MutationOp::AddSubcore => "add_subcore",
            MutationOp::AddSubcoreLink => "add_subcore_link",
            MutationOp::SpliceSubcore => "splice_subcore",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.tag() == tag)
    }
}

impl fmt::Display for MutationOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// One record of an applied mutation operator.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryEntry {
    pub operator: MutationOp,
    pub element: NodeId,
    pub info: String,
}

/// A neuron gene. `weights[i]` pairs positionally with `input_list[i]` and
/// has exactly `input_list[i].len` entries. The optional bias acts as one
/// extra trailing weight with an implicit input of 1.
#[derive(Debug, Clone, PartialEq)]
pub struct NeuronGene {
    pub id: NodeId,
    pub input_list: Vec<InputSource>,
    pub output_list: Vec<NodeId>,
    pub activation: ActivationKind,
    pub learning: LearningKind,
    pub weights: Vec<Vec<f64>>,
    pub bias: Option<f64>,
    pub parameters: ParameterList,
    pub generation: u64,
}

impl NeuronGene {
    /// Total number of tunable weights, bias included.
    pub fn weight_count(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>() + usize::from(self.bias.is_some())
    }
}

/// The behavior of a subcore. Only `Neural` is evaluated; `Substrate` is
/// representable in the encoding but rejected by validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubCoreKind {
    Neural,
    Substrate,
}

impl SubCoreKind {
    pub fn tag(self) -> &'static str {
        match self {
            SubCoreKind::Neural => "neural",
            SubCoreKind::Substrate => "substrate",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "neural" => Some(SubCoreKind::Neural),
            "substrate" => Some(SubCoreKind::Substrate),
            _ => None,
        }
    }
}

/// A subcore gene: a vector router supervising one neuron cluster.
///
/// `to_links` routes the subcore's input vectors to its neurons; specs for
/// one neuron pair positionally with that neuron's subcore-sourced input
/// entries. `from_list` names the neurons whose outputs form the subcore's
/// output vector, in order; the output vector length equals its length.
#[derive(Debug, Clone, PartialEq)]
pub struct SubCoreGene {
    pub id: NodeId,
    pub input_list: Vec<InputSource>,
    pub output_list: Vec<NodeId>,
    pub to_links: Vec<LinkSpec>,
    pub from_list: Vec<NodeId>,
    pub kind: SubCoreKind,
    pub parameters: ParameterList,
    pub supervised: Vec<NodeId>,
    pub generation: u64,
}

impl SubCoreGene {
    pub fn output_len(&self) -> usize {
        self.from_list.len()
    }
}

/// Binding of a sensor program to the subcore that receives its vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorBinding {
    pub subcore: NodeId,
    pub tag: String,
}

/// Binding of an actuator program to the subcore whose output feeds it.
#[derive(Debug, Clone, PartialEq)]
pub struct ActuatorBinding {
    pub subcore: NodeId,
    pub tag: String,
}

/// The core gene: sensor/actuator interface and top-level bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct CoreGene {
    pub id: NodeId,
    pub sensor_list: Vec<SensorBinding>,
    pub actuator_list: Vec<ActuatorBinding>,
    pub parameters: ParameterList,
    pub supervised: Vec<NodeId>,
    pub generation: u64,
    pub history: Vec<HistoryEntry>,
}

/// The full heritable description of one network.
#[derive(Debug, Clone, PartialEq)]
pub struct Genome {
    pub dxnn_id: DxnnId,
    pub core: CoreGene,
    pub subcores: Vec<SubCoreGene>,
    pub neurons: Vec<NeuronGene>,
}

impl Genome {
    pub fn neuron_count(&self) -> usize {
        self.neurons.len()
    }

    pub fn subcore(&self, id: NodeId) -> Option<&SubCoreGene> {
        self.subcores.iter().find(|s| s.id == id)
    }

    pub fn subcore_mut(&mut self, id: NodeId) -> Option<&mut SubCoreGene> {
        self.subcores.iter_mut().find(|s| s.id == id)
    }

    pub fn neuron(&self, id: NodeId) -> Option<&NeuronGene> {
        self.neurons.iter().find(|n| n.id == id)
    }

    pub fn neuron_mut(&mut self, id: NodeId) -> Option<&mut NeuronGene> {
        self.neurons.iter_mut().find(|n| n.id == id)
    }

    /// Subcore that supervises the given neuron.
    pub fn supervisor_of(&self, neuron: NodeId) -> Option<&SubCoreGene> {
        self.subcores.iter().find(|s| s.supervised.contains(&neuron))
    }

    /// Smallest element id not yet in use.
    pub fn next_node_id(&self) -> NodeId {
        let max = std::iter::once(self.core.id.0)
            .chain(self.subcores.iter().map(|s| s.id.0))
            .chain(self.neurons.iter().map(|n| n.id.0))
            .max()
            .unwrap_or(0);
        NodeId(max + 1)
    }

    /// Total tunable weights across all neurons, biases included.
    pub fn total_weights(&self) -> usize {
        self.neurons.iter().map(NeuronGene::weight_count).sum()
    }
}

/// A population of genomes plus the evolution loop's generation counter.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub id: u64,
    pub genomes: Vec<Genome>,
    pub generation_counter: u64,
}

impl Population {
    pub fn new(id: u64) -> Self {
        Population { id, genomes: Vec::new(), generation_counter: 0 }
    }

    pub fn genome(&self, id: DxnnId) -> Option<&Genome> {
        self.genomes.iter().find(|g| g.dxnn_id == id)
    }

    /// Smallest genome id not yet in use.
    pub fn next_dxnn_id(&self) -> DxnnId {
        DxnnId(self.genomes.iter().map(|g| g.dxnn_id.0).max().unwrap_or(0) + 1)
    }
}

/// Errors from genome construction and snapshot decoding.
#[derive(Debug, thiserror::Error)]
pub enum GenomeError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("reference error: unknown id {id} referenced by {referrer}")]
    Reference { id: u64, referrer: String },
}
