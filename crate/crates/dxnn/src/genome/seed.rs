//! Minimal seed genome construction.

use rand::Rng;

use super::{
    ActivationKind, ActuatorBinding, CoreGene, DxnnId, Genome, GenomeError, InputSource,
    LearningKind, LinkRoute, LinkSpec, NeuronGene, NodeId, SensorBinding, SubCoreGene,
    SubCoreKind,
};

/// A sensor program: its tag and the length of the vector it produces.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorSpec {
    pub tag: String,
    pub len: usize,
}

/// An actuator program: its tag and the vector length it expects.
#[derive(Debug, Clone, PartialEq)]
pub struct ActuatorSpec {
    pub tag: String,
    pub len: usize,
}

impl SensorSpec {
    pub fn new(tag: &str, len: usize) -> Self {
        SensorSpec { tag: tag.to_string(), len }
    }
}

impl ActuatorSpec {
    pub fn new(tag: &str, len: usize) -> Self {
        ActuatorSpec { tag: tag.to_string(), len }
    }
}

/// Draws a fresh weight from the seed distribution, uniform on
/// (-pi/2, +pi/2): half the tuning phase's weight limit, so that seeds and
/// perturbations search the same scale.
pub(crate) fn seed_weight<R: Rng>(rng: &mut R) -> f64 {
    let half = std::f64::consts::FRAC_PI_2;
    rng.gen_range(-half..half)
}

/// Picks a link type uniformly and appends the routing spec plus the
/// neuron-side input entry and weights for one fresh subcore-to-neuron link.
pub(crate) fn add_random_routed_link<R: Rng>(
    sc: &mut SubCoreGene,
    neuron: &mut NeuronGene,
    rng: &mut R,
) {
    let route = match rng.gen_range(0..3u8) {
        0 => {
            let src = &sc.input_list[rng.gen_range(0..sc.input_list.len())];
            LinkRoute::Single { from: src.from, index: rng.gen_range(1..=src.len) }
        }
        1 => {
            let src = &sc.input_list[rng.gen_range(0..sc.input_list.len())];
            LinkRoute::Block { from: src.from }
        }
        _ => LinkRoute::All,
    };
    let spec = LinkSpec { to: neuron.id, route };
    let len = spec.delivered_len(&sc.input_list).expect("freshly built route resolves");
    neuron.input_list.push(InputSource { from: sc.id, len });
    neuron.weights.push((0..len).map(|_| seed_weight(rng)).collect());
    sc.to_links.push(spec);
}

fn blank_neuron(id: NodeId, af: ActivationKind, lm: LearningKind) -> NeuronGene {
    NeuronGene {
        id,
        input_list: Vec::new(),
        output_list: Vec::new(),
        activation: af,
        learning: lm,
        weights: Vec::new(),
        bias: None,
        parameters: Vec::new(),
        generation: 0,
    }
}

fn blank_subcore(id: NodeId) -> SubCoreGene {
    SubCoreGene {
        id,
        input_list: Vec::new(),
        output_list: Vec::new(),
        to_links: Vec::new(),
        from_list: Vec::new(),
        kind: SubCoreKind::Neural,
        parameters: Vec::new(),
        supervised: Vec::new(),
        generation: 0,
    }
}

/// Builds the minimal starting genome for the given sensor/actuator
/// interface.
///
/// With one sensor and one actuator the genome is a single subcore holding
/// one layer of neurons, one per actuator output value. With N sensors and
/// K actuators it is two fully interconnected subcore layers: N single-neuron
/// subcores on the sensor side, and one subcore per actuator sized to that
/// actuator's vector length. Every element starts at generation 0, neurons
/// carry no bias, and each neuron receives exactly one routed link of a
/// uniformly random link type.
pub fn new_minimal_genome<R: Rng>(
    dxnn_id: DxnnId,
    sensors: &[SensorSpec],
    actuators: &[ActuatorSpec],
    af: ActivationKind,
    lm: LearningKind,
    rng: &mut R,
) -> Result<Genome, GenomeError> {
    if sensors.is_empty() {
        return Err(GenomeError::Config("at least one sensor is required".into()));
    }
    if actuators.is_empty() {
        return Err(GenomeError::Config("at least one actuator is required".into()));
    }
    if let Some(s) = sensors.iter().find(|s| s.len == 0) {
        return Err(GenomeError::Config(format!("sensor {} has zero length", s.tag)));
    }
    if let Some(a) = actuators.iter().find(|a| a.len == 0) {
        return Err(GenomeError::Config(format!("actuator {} has zero length", a.tag)));
    }

    let core_id = NodeId(1);
    let mut next = 2u64;
    let mut alloc = || {
        let id = NodeId(next);
        next += 1;
        id
    };

    let mut subcores: Vec<SubCoreGene> = Vec::new();
    let mut neurons: Vec<NeuronGene> = Vec::new();
    let mut sensor_list = Vec::new();
    let mut actuator_list = Vec::new();

    if sensors.len() == 1 && actuators.len() == 1 {
        // Single subcore holding one neuron per actuator output value.
        let mut sc = blank_subcore(alloc());
        sc.input_list.push(InputSource { from: core_id, len: sensors[0].len });
        sc.output_list.push(core_id);
        for _ in 0..actuators[0].len {
            let mut n = blank_neuron(alloc(), af, lm);
            add_random_routed_link(&mut sc, &mut n, rng);
            n.output_list.push(sc.id);
            sc.from_list.push(n.id);
            sc.supervised.push(n.id);
            neurons.push(n);
        }
        sensor_list.push(SensorBinding { subcore: sc.id, tag: sensors[0].tag.clone() });
        actuator_list.push(ActuatorBinding { subcore: sc.id, tag: actuators[0].tag.clone() });
        subcores.push(sc);
    } else {
        // Two fully interconnected layers: N sensor-side subcores, K
        // actuator-side subcores.
        let layer1_ids: Vec<NodeId> = sensors.iter().map(|_| alloc()).collect();
        let layer2_ids: Vec<NodeId> = actuators.iter().map(|_| alloc()).collect();

        for (i, sensor) in sensors.iter().enumerate() {
            let mut sc = blank_subcore(layer1_ids[i]);
            sc.input_list.push(InputSource { from: core_id, len: sensor.len });
            sc.output_list = layer2_ids.clone();
            let mut n = blank_neuron(alloc(), af, lm);
            add_random_routed_link(&mut sc, &mut n, rng);
            n.output_list.push(sc.id);
            sc.from_list.push(n.id);
            sc.supervised.push(n.id);
            neurons.push(n);
            sensor_list.push(SensorBinding { subcore: sc.id, tag: sensor.tag.clone() });
            subcores.push(sc);
        }
        for (j, actuator) in actuators.iter().enumerate() {
            let mut sc = blank_subcore(layer2_ids[j]);
            for (i, _) in sensors.iter().enumerate() {
                let len = subcores[i].output_len();
                sc.input_list.push(InputSource { from: layer1_ids[i], len });
            }
            sc.output_list.push(core_id);
            for _ in 0..actuator.len {
                let mut n = blank_neuron(alloc(), af, lm);
                add_random_routed_link(&mut sc, &mut n, rng);
                n.output_list.push(sc.id);
                sc.from_list.push(n.id);
                sc.supervised.push(n.id);
                neurons.push(n);
            }
            actuator_list.push(ActuatorBinding { subcore: sc.id, tag: actuator.tag.clone() });
            subcores.push(sc);
        }
    }

    let core = CoreGene {
        id: core_id,
        sensor_list,
        actuator_list,
        parameters: Vec::new(),
        supervised: subcores.iter().map(|s| s.id).collect(),
        generation: 0,
        history: Vec::new(),
    };

    Ok(Genome { dxnn_id, core, subcores, neurons })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn seed(sensors: &[SensorSpec], actuators: &[ActuatorSpec]) -> Genome {
        new_minimal_genome(
            DxnnId(1),
            sensors,
            actuators,
            ActivationKind::Tanh,
            LearningKind::None,
            &mut stream(11),
        )
        .unwrap()
    }

    #[test]
    fn single_sensor_single_actuator_yields_one_subcore_one_neuron() {
        let g = seed(&[SensorSpec::new("state", 6)], &[ActuatorSpec::new("force", 1)]);
        assert_eq!(g.subcores.len(), 1);
        assert_eq!(g.neurons.len(), 1);
        assert!(g.neurons[0].bias.is_none());
        assert_eq!(g.core.generation, 0);
    }

    #[test]
    fn xor_seed_is_minimal_and_biasless() {
        let g = seed(&[SensorSpec::new("pair", 2)], &[ActuatorSpec::new("out", 1)]);
        assert_eq!(g.subcores.len(), 1);
        assert_eq!(g.neurons.len(), 1);
        assert_eq!(g.neurons.iter().filter(|n| n.bias.is_some()).count(), 0);
    }

    #[test]
    fn multi_interface_builds_two_full_layers() {
        let g = seed(
            &[SensorSpec::new("a", 3), SensorSpec::new("b", 2)],
            &[ActuatorSpec::new("x", 1), ActuatorSpec::new("y", 3)],
        );
        assert_eq!(g.subcores.len(), 4);
        // Sensor-side subcores hold one neuron each; actuator-side subcores
        // are sized to their actuator.
        assert_eq!(g.subcores[0].supervised.len(), 1);
        assert_eq!(g.subcores[1].supervised.len(), 1);
        assert_eq!(g.subcores[2].supervised.len(), 1);
        assert_eq!(g.subcores[3].supervised.len(), 3);
        assert_eq!(g.neurons.len(), 6);
        // Full interconnection between the layers.
        for sc in &g.subcores[..2] {
            assert_eq!(sc.output_list, vec![g.subcores[2].id, g.subcores[3].id]);
        }
        for sc in &g.subcores[2..] {
            let froms: Vec<_> = sc.input_list.iter().map(|i| i.from).collect();
            assert_eq!(froms, vec![g.subcores[0].id, g.subcores[1].id]);
        }
    }

    #[test]
    fn actuator_layer_size_matches_actuator_len() {
        let g = seed(&[SensorSpec::new("in", 2)], &[ActuatorSpec::new("out", 4)]);
        assert_eq!(g.subcores.len(), 1);
        assert_eq!(g.neurons.len(), 4);
        assert_eq!(g.subcores[0].output_len(), 4);
    }

    #[test]
    fn empty_interface_is_a_config_error() {
        let r = new_minimal_genome(
            DxnnId(1),
            &[],
            &[ActuatorSpec::new("out", 1)],
            ActivationKind::Tanh,
            LearningKind::None,
            &mut stream(0),
        );
        assert!(matches!(r, Err(GenomeError::Config(_))));
    }

    #[test]
    fn seed_weights_stay_below_half_pi() {
        for s in 0..20 {
            let g = new_minimal_genome(
                DxnnId(1),
                &[SensorSpec::new("in", 5)],
                &[ActuatorSpec::new("out", 2)],
                ActivationKind::Tanh,
                LearningKind::None,
                &mut stream(s),
            )
            .unwrap();
            for n in &g.neurons {
                for w in n.weights.iter().flatten() {
                    assert!(w.abs() < std::f64::consts::FRAC_PI_2);
                }
            }
        }
    }
}
