//! Competition selection: complexity-priced offspring allotment with
//! population normalization and no speciation.
//!
//! Every neuron in the population carries the same energy price (total
//! fitness over total neurons), so a genome's offspring quota is its fitness
//! divided by what its own size costs. Bloated networks must buy their size
//! with proportionally higher fitness.

use crate::genome::{DxnnId, Genome, Population};

#[derive(Debug, Clone)]
pub struct ScoredGenome {
    pub genome: Genome,
    pub fitness: f64,
    pub tot_neurons: usize,
}

impl ScoredGenome {
    pub fn new(genome: Genome, fitness: f64) -> Self {
        let tot_neurons = genome.neuron_count();
        ScoredGenome { genome, fitness, tot_neurons }
    }
}

/// Offspring quota for one surviving genome. Zero means deleted, one means
/// the genome survives childless, anything above one adds mutated clones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allotment {
    pub dxnn_id: DxnnId,
    pub offspring: u32,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SelectionError {
    #[error("selection over an empty population")]
    Empty,
    #[error("genome {id} has negative fitness {fitness}")]
    NegativeFitness { id: u64, fitness: f64 },
    #[error("every genome has zero fitness; the population is degenerate")]
    DegeneratePopulation,
}

/// Ranks the population and computes normalized offspring allotments.
///
/// The average energy cost is taken over the full population; the sort is by
/// fitness descending with more compact genomes ranking higher on ties; the
/// bottom half (`floor(n/2)` genomes) is removed; each survivor's allotment
/// is `round((fitness / avg_energy_cost) / tot_neurons)`, then rescaled by
/// `round(allotment / (total_allotments / population_limit))`.
pub fn competition_select(
    scored: &[ScoredGenome],
    population_limit: usize,
) -> Result<Vec<Allotment>, SelectionError> {
    if scored.is_empty() {
        return Err(SelectionError::Empty);
    }
    if let Some(bad) = scored.iter().find(|s| s.fitness < 0.0 || !s.fitness.is_finite()) {
        return Err(SelectionError::NegativeFitness {
            id: bad.genome.dxnn_id.0,
            fitness: bad.fitness,
        });
    }
    if scored.iter().all(|s| s.fitness == 0.0) {
        return Err(SelectionError::DegeneratePopulation);
    }

    let tot_energy: f64 = scored.iter().map(|s| s.fitness).sum();
    let tot_neurons: usize = scored.iter().map(|s| s.tot_neurons).sum();
    let avg_energy_cost = tot_energy / tot_neurons as f64;

    let mut order: Vec<usize> = (0..scored.len()).collect();
    order.sort_by(|&a, &b| {
        scored[b]
            .fitness
            .partial_cmp(&scored[a].fitness)
            .expect("fitness is finite")
            .then(scored[a].tot_neurons.cmp(&scored[b].tot_neurons))
    });

    let survivor_count = scored.len() - scored.len() / 2;
    let survivors = &order[..survivor_count];

    let allotted: Vec<f64> = survivors
        .iter()
        .map(|&i| ((scored[i].fitness / avg_energy_cost) / scored[i].tot_neurons as f64).round())
        .collect();
    let total_new: f64 = allotted.iter().sum();

    if total_new == 0.0 {
        // Some survivor always holds at least half the population's average
        // fitness share, so its quota rounds to >= 1 in exact arithmetic;
        // this branch only guards the floating-point boundary. Keep the top
        // survivor alive rather than letting the population go extinct.
        return Ok(survivors
            .iter()
            .enumerate()
            .map(|(rank, &i)| Allotment {
                dxnn_id: scored[i].genome.dxnn_id,
                offspring: u32::from(rank == 0),
            })
            .collect());
    }

    let normalizer = total_new / population_limit as f64;
    Ok(survivors
        .iter()
        .zip(&allotted)
        .map(|(&i, ao)| Allotment {
            dxnn_id: scored[i].genome.dxnn_id,
            offspring: (ao / normalizer).round() as u32,
        })
        .collect())
}

/// Builds the next generation: survivors keep their tuned weights unchanged,
/// and each allotment above one adds that many mutated clones produced by
/// `mutate`. Allotments of zero drop the genome.
pub fn apply_allotments(
    pop: &Population,
    allotments: &[Allotment],
    mut mutate: impl FnMut(&Genome) -> Genome,
) -> Population {
    let mut genomes = Vec::new();
    for a in allotments {
        if a.offspring >= 1 {
            let parent = pop.genome(a.dxnn_id).expect("allotment refers to population member");
            genomes.push(parent.clone());
        }
    }
    for a in allotments {
        if a.offspring > 1 {
            let parent = pop.genome(a.dxnn_id).expect("allotment refers to population member");
            for _ in 1..a.offspring {
                genomes.push(mutate(parent));
            }
        }
    }
    Population { id: pop.id, genomes, generation_counter: pop.generation_counter + 1 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genome::{
        new_minimal_genome, ActivationKind, ActuatorSpec, LearningKind, SensorSpec,
    };
    use crate::rng::stream;

    fn scored(specs: &[(u64, f64, usize)]) -> Vec<ScoredGenome> {
        let base = new_minimal_genome(
            DxnnId(0),
            &[SensorSpec::new("in", 2)],
            &[ActuatorSpec::new("out", 1)],
            ActivationKind::Tanh,
            LearningKind::None,
            &mut stream(1),
        )
        .unwrap();
        specs
            .iter()
            .map(|&(id, fitness, tot_neurons)| {
                let mut genome = base.clone();
                genome.dxnn_id = DxnnId(id);
                ScoredGenome { genome, fitness, tot_neurons }
            })
            .collect()
    }

    #[test]
    fn worked_example_with_four_genomes() {
        let s = scored(&[(1, 10.0, 2), (2, 8.0, 4), (3, 6.0, 1), (4, 2.0, 10)]);
        let allotments = competition_select(&s, 4).unwrap();
        // Average energy cost 26/17; bottom half removed; allotments
        // round(6.538/2) = 3 and round(5.231/4) = 1; normalizer 4/4 = 1.
        assert_eq!(
            allotments,
            vec![
                Allotment { dxnn_id: DxnnId(1), offspring: 3 },
                Allotment { dxnn_id: DxnnId(2), offspring: 1 },
            ]
        );
    }

    #[test]
    fn fitness_tie_breaks_toward_compactness() {
        let s = scored(&[(1, 6.0, 2), (2, 6.0, 1)]);
        let allotments = competition_select(&s, 2).unwrap();
        assert_eq!(allotments, vec![Allotment { dxnn_id: DxnnId(2), offspring: 2 }]);
    }

    #[test]
    fn single_genome_always_survives() {
        let s = scored(&[(1, 0.25, 3)]);
        let allotments = competition_select(&s, 1).unwrap();
        assert_eq!(allotments.len(), 1);
        assert!(allotments[0].offspring >= 1);
    }

    #[test]
    fn survivor_count_is_ceiling_of_half() {
        for n in 1..12usize {
            let specs: Vec<(u64, f64, usize)> =
                (0..n).map(|i| (i as u64, 1.0 + i as f64, 1 + i % 3)).collect();
            let s = scored(&specs);
            let allotments = competition_select(&s, 10).unwrap();
            assert_eq!(allotments.len(), n - n / 2);
        }
    }

    #[test]
    fn preconditions_are_checked() {
        assert_eq!(competition_select(&[], 5), Err(SelectionError::Empty));
        let zeroes = scored(&[(1, 0.0, 1), (2, 0.0, 2)]);
        assert_eq!(competition_select(&zeroes, 5), Err(SelectionError::DegeneratePopulation));
        let negative = scored(&[(1, -1.0, 1)]);
        assert!(matches!(
            competition_select(&negative, 5),
            Err(SelectionError::NegativeFitness { id: 1, .. })
        ));
    }

    #[test]
    fn total_allotment_never_collapses_to_zero() {
        // The best survivor's raw quota is at least half the average share,
        // so selection always produces at least one offspring slot.
        for (fits, sizes) in [
            (vec![1.0, 0.9], vec![1000usize, 1000]),
            (vec![1.1, 1.0, 1.0, 1.0], vec![100, 1, 1, 100]),
            (vec![5.0, 1.0, 1.0, 1.0], vec![1, 1, 1, 17]),
        ] {
            let specs: Vec<(u64, f64, usize)> = fits
                .iter()
                .zip(&sizes)
                .enumerate()
                .map(|(i, (&f, &n))| (i as u64 + 1, f, n))
                .collect();
            let allotments = competition_select(&scored(&specs), 4).unwrap();
            assert!(allotments.iter().map(|a| a.offspring).sum::<u32>() >= 1);
        }
    }

    #[test]
    fn apply_allotments_builds_survivors_then_clones() {
        let s = scored(&[(1, 10.0, 2), (2, 8.0, 4), (3, 6.0, 1), (4, 2.0, 10)]);
        let pop = Population {
            id: 7,
            genomes: s.iter().map(|x| x.genome.clone()).collect(),
            generation_counter: 3,
        };
        let allotments = competition_select(&s, 4).unwrap();
        let mut next_id = 100;
        let next = apply_allotments(&pop, &allotments, |parent| {
            let mut clone = parent.clone();
            clone.dxnn_id = DxnnId(next_id);
            next_id += 1;
            clone
        });
        assert_eq!(next.genomes.len(), 4);
        let ids: Vec<u64> = next.genomes.iter().map(|g| g.dxnn_id.0).collect();
        assert_eq!(ids, vec![1, 2, 100, 101]);
        assert_eq!(next.generation_counter, 4);
    }

    #[test]
    fn childless_survivors_reproduce_nothing() {
        let s = scored(&[(1, 5.0, 1), (2, 5.0, 1)]);
        let pop = Population {
            id: 1,
            genomes: s.iter().map(|x| x.genome.clone()).collect(),
            generation_counter: 0,
        };
        let allotments =
            vec![Allotment { dxnn_id: DxnnId(1), offspring: 1 }, Allotment {
                dxnn_id: DxnnId(2),
                offspring: 1,
            }];
        let next = apply_allotments(&pop, &allotments, |_| unreachable!("no clones expected"));
        assert_eq!(next.genomes.len(), 2);
    }

    #[test]
    fn zero_allotments_never_survive() {
        let s = scored(&[(1, 10.0, 1), (2, 1.0, 50)]);
        let pop = Population {
            id: 1,
            genomes: s.iter().map(|x| x.genome.clone()).collect(),
            generation_counter: 0,
        };
        let allotments = competition_select(&s, 2).unwrap();
        let next = apply_allotments(&pop, &allotments, |g| g.clone());
        for a in &allotments {
            if a.offspring == 0 {
                assert!(next.genomes.iter().all(|g| g.dxnn_id != a.dxnn_id));
            }
        }
    }

    #[test]
    fn equal_fitness_smaller_genome_never_gets_fewer_offspring() {
        for limit in [1usize, 2, 5, 10] {
            let s = scored(&[(1, 4.0, 3), (2, 4.0, 2), (3, 1.0, 4), (4, 1.0, 9)]);
            let allotments = competition_select(&s, limit).unwrap();
            let of = |id: u64| {
                allotments.iter().find(|a| a.dxnn_id == DxnnId(id)).map(|a| a.offspring)
            };
            if let (Some(small), Some(large)) = (of(2), of(1)) {
                assert!(small >= large);
            }
        }
    }
}
