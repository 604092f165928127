//! NSGA-II: elitist (μ+λ) selection by non-domination rank and crowding distance.

use super::dominance::{crowding_distance, fast_non_dominated_sort};
use super::operators::{binary_tournament, Individual};
use super::run::Engine;
use crate::netmodel::ObjectiveVector;

/// Keeps `size` members of `pool` by rank, breaking the last front by crowding.
/// Returns the survivors and their crowding distances.
fn survive(pool: Vec<Individual>, size: usize) -> (Vec<Individual>, Vec<f64>) {
    let objs: Vec<ObjectiveVector> = pool.iter().map(|i| i.objectives).collect();
    let mut chosen: Vec<(usize, f64)> = Vec::with_capacity(size);
    for front in fast_non_dominated_sort(&objs) {
        let cd = crowding_distance(&objs, &front);
        if chosen.len() + front.len() <= size {
            chosen.extend(front.iter().copied().zip(cd));
        } else {
            let mut order: Vec<usize> = (0..front.len()).collect();
            order.sort_by(|&a, &b| cd[b].total_cmp(&cd[a]).then(front[a].cmp(&front[b])));
            let need = size - chosen.len();
            chosen.extend(order[..need].iter().map(|&k| (front[k], cd[k])));
        }
        if chosen.len() == size {
            break;
        }
    }
    let mut pool: Vec<Option<Individual>> = pool.into_iter().map(Some).collect();
    let crowd = chosen.iter().map(|c| c.1).collect();
    (chosen.into_iter().map(|(i, _)| pool[i].take().expect("chosen once")).collect(), crowd)
}

pub(super) fn run(eng: &mut Engine<'_, '_>) -> Vec<Individual> {
    let m = eng.params.population;
    let (mut pop, mut crowd) = survive(eng.init(), m);
    eng.observe(&pop);
    while eng.remaining() > 0 {
        let offspring = eng.offspring(m, |rng| {
            binary_tournament(&pop, rng, |a, b| {
                if crowd[a] == crowd[b] {
                    None
                } else {
                    Some(crowd[a] > crowd[b])
                }
            })
            .1
            .genotype
            .clone()
        });
        let mut pool = pop;
        pool.extend(offspring);
        (pop, crowd) = survive(pool, m);
        eng.observe(&pop);
    }
    pop
}
