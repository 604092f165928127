//! NSGA-III: non-domination rank, then niche preservation around
//! Das–Dennis reference directions for the last admitted front.

use rand::Rng as _;

use super::dominance::fast_non_dominated_sort;
use super::operators::{binary_tournament, Individual};
use super::run::Engine;
use crate::netmodel::ObjectiveVector;
use crate::seeding::Rng;

/// Das–Dennis directions on the 2-objective simplex: `divisions + 1` points.
pub fn reference_directions(divisions: usize) -> Vec<[f64; 2]> {
    (0..=divisions)
        .map(|i| {
            let a = i as f64 / divisions as f64;
            [a, 1.0 - a]
        })
        .collect()
}

/// Perpendicular distance from `p` to the line through the origin along `w`.
fn perpendicular(p: [f64; 2], w: [f64; 2]) -> f64 {
    let ww = w[0] * w[0] + w[1] * w[1];
    let t = (p[0] * w[0] + p[1] * w[1]) / ww;
    ((p[0] - t * w[0]).powi(2) + (p[1] - t * w[1]).powi(2)).sqrt()
}

/// Minimization-oriented, ideal-translated, intercept-scaled objectives.
fn normalize(objs: &[ObjectiveVector], members: &[usize], first_front: &[usize]) -> Vec<[f64; 2]> {
    let g = |o: &ObjectiveVector| [-o.f1, -o.f2];
    let mut ideal = [f64::INFINITY; 2];
    for &i in members {
        let v = g(&objs[i]);
        ideal[0] = ideal[0].min(v[0]);
        ideal[1] = ideal[1].min(v[1]);
    }
    let span = |set: &[usize], k: usize| set.iter().map(|&i| g(&objs[i])[k] - ideal[k]).fold(0.0, f64::max);
    let mut intercept = [0.0; 2];
    for (k, slot) in intercept.iter_mut().enumerate() {
        let mut s = span(first_front, k);
        if s <= 1e-12 {
            s = span(members, k);
        }
        *slot = if s > 1e-12 { s } else { 1.0 };
    }
    members
        .iter()
        .map(|&i| {
            let v = g(&objs[i]);
            [(v[0] - ideal[0]) / intercept[0], (v[1] - ideal[1]) / intercept[1]]
        })
        .collect()
}

fn survive(pool: Vec<Individual>, size: usize, refs: &[[f64; 2]], rng: &mut Rng) -> Vec<Individual> {
    let objs: Vec<ObjectiveVector> = pool.iter().map(|i| i.objectives).collect();
    let fronts = fast_non_dominated_sort(&objs);
    let mut admitted: Vec<usize> = Vec::new();
    let mut last: Vec<usize> = Vec::new();
    for front in &fronts {
        if admitted.len() + front.len() <= size {
            admitted.extend_from_slice(front);
            if admitted.len() == size {
                break;
            }
        } else {
            last = front.clone();
            break;
        }
    }
    let mut chosen = admitted.clone();
    if chosen.len() < size {
        let mut members = admitted.clone();
        members.extend_from_slice(&last);
        let normed = normalize(&objs, &members, &fronts[0]);
        let assoc: Vec<(usize, f64)> = normed
            .iter()
            .map(|&p| {
                refs.iter()
                    .enumerate()
                    .map(|(j, &w)| (j, perpendicular(p, w)))
                    .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
                    .expect("at least one direction")
            })
            .collect();
        let mut niche = vec![0usize; refs.len()];
        for a in &assoc[..admitted.len()] {
            niche[a.0] += 1;
        }
        // Candidates from the last front, by position in `members`.
        let mut open: Vec<usize> = (admitted.len()..members.len()).collect();
        let mut excluded = vec![false; refs.len()];
        while chosen.len() < size {
            let min = (0..refs.len()).filter(|&j| !excluded[j]).map(|j| niche[j]).min().expect("some niche left");
            let ties: Vec<usize> = (0..refs.len()).filter(|&j| !excluded[j] && niche[j] == min).collect();
            let j = ties[rng.random_range(0..ties.len())];
            let cands: Vec<usize> = open.iter().copied().filter(|&c| assoc[c].0 == j).collect();
            if cands.is_empty() {
                excluded[j] = true;
                continue;
            }
            let pick = if niche[j] == 0 {
                *cands.iter().min_by(|&&a, &&b| assoc[a].1.total_cmp(&assoc[b].1).then(a.cmp(&b))).expect("non-empty")
            } else {
                cands[rng.random_range(0..cands.len())]
            };
            open.retain(|&c| c != pick);
            niche[j] += 1;
            chosen.push(members[pick]);
        }
    }
    let mut pool: Vec<Option<Individual>> = pool.into_iter().map(Some).collect();
    chosen.into_iter().map(|i| pool[i].take().expect("chosen once")).collect()
}

pub(super) fn run(eng: &mut Engine<'_, '_>) -> Vec<Individual> {
    let m = eng.params.population;
    let refs = reference_directions(eng.params.nsga3_divisions);
    let init = eng.init();
    let mut pop = survive(init, m, &refs, &mut eng.rng);
    eng.observe(&pop);
    while eng.remaining() > 0 {
        let offspring = eng.offspring(m, |rng| binary_tournament(&pop, rng, |_, _| None).1.genotype.clone());
        let mut pool = pop;
        pool.extend(offspring);
        pop = survive(pool, m, &refs, &mut eng.rng);
        eng.observe(&pop);
    }
    pop
}
