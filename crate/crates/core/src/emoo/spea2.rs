//! SPEA2: strength/raw fitness with k-th nearest-neighbour density and a
//! fixed-size archive truncated by iterative nearest-distance removal.

use super::dominance::dominates;
use super::operators::{binary_tournament, Individual};
use super::run::Engine;
use crate::netmodel::ObjectiveVector;

/// Pairwise Euclidean distances after scaling each objective by its range.
fn distance_matrix(objs: &[ObjectiveVector]) -> Vec<Vec<f64>> {
    let range = |get: fn(&ObjectiveVector) -> f64| {
        let lo = objs.iter().map(get).fold(f64::INFINITY, f64::min);
        let hi = objs.iter().map(get).fold(f64::NEG_INFINITY, f64::max);
        if hi > lo {
            hi - lo
        } else {
            1.0
        }
    };
    let r1 = range(|o| o.f1);
    let r2 = range(|o| o.f2);
    objs.iter()
        .map(|a| objs.iter().map(|b| (((a.f1 - b.f1) / r1).powi(2) + ((a.f2 - b.f2) / r2).powi(2)).sqrt()).collect())
        .collect()
}

/// SPEA2 fitness `raw + density`; values below 1 mark non-dominated members.
pub fn fitness(objs: &[ObjectiveVector], dist: &[Vec<f64>], k: usize) -> Vec<f64> {
    let n = objs.len();
    let strength: Vec<usize> = (0..n).map(|i| (0..n).filter(|&j| dominates(&objs[i], &objs[j])).count()).collect();
    (0..n)
        .map(|i| {
            let raw: usize = (0..n).filter(|&j| dominates(&objs[j], &objs[i])).map(|j| strength[j]).sum();
            let mut d: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| dist[i][j]).collect();
            d.sort_by(f64::total_cmp);
            let sigma = if d.is_empty() { 0.0 } else { d[(k.max(1) - 1).min(d.len() - 1)] };
            raw as f64 + 1.0 / (sigma + 2.0)
        })
        .collect()
}

/// Removes members one at a time, always the one whose sorted neighbour
/// distances are lexicographically smallest, until `size` remain.
fn truncate(members: &mut Vec<usize>, dist: &[Vec<f64>], size: usize) {
    let mut lists: Vec<Vec<(f64, usize)>> = members
        .iter()
        .map(|&i| {
            let mut l: Vec<(f64, usize)> = members.iter().filter(|&&j| j != i).map(|&j| (dist[i][j], j)).collect();
            l.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            l
        })
        .collect();
    while members.len() > size {
        let mut worst = 0;
        for c in 1..members.len() {
            let ord = lists[c]
                .iter()
                .map(|x| x.0)
                .partial_cmp(lists[worst].iter().map(|x| x.0))
                .unwrap_or(std::cmp::Ordering::Equal);
            if ord == std::cmp::Ordering::Less {
                worst = c;
            }
        }
        let gone = members.remove(worst);
        lists.remove(worst);
        for l in &mut lists {
            l.retain(|x| x.1 != gone);
        }
    }
}

fn environmental_selection(pool: Vec<Individual>, size: usize, k: usize) -> Vec<Individual> {
    let objs: Vec<ObjectiveVector> = pool.iter().map(|i| i.objectives).collect();
    let dist = distance_matrix(&objs);
    let fit = fitness(&objs, &dist, k);
    let mut next: Vec<usize> = (0..pool.len()).filter(|&i| fit[i] < 1.0).collect();
    if next.len() < size {
        let mut rest: Vec<usize> = (0..pool.len()).filter(|&i| fit[i] >= 1.0).collect();
        rest.sort_by(|&a, &b| fit[a].total_cmp(&fit[b]).then(a.cmp(&b)));
        next.extend(rest.into_iter().take(size - next.len()));
    } else if next.len() > size {
        truncate(&mut next, &dist, size);
    }
    let mut pool: Vec<Option<Individual>> = pool.into_iter().map(Some).collect();
    next.into_iter().map(|i| pool[i].take().expect("selected once")).collect()
}

pub(super) fn run(eng: &mut Engine<'_, '_>) -> Vec<Individual> {
    let m = eng.params.population;
    let k = ((2 * m) as f64).sqrt().round() as usize;
    let mut pop = eng.init();
    let mut archive: Vec<Individual> = Vec::new();
    loop {
        let mut pool = std::mem::take(&mut archive);
        pool.extend(pop);
        archive = environmental_selection(pool, m, k);
        eng.observe(&archive);
        if eng.remaining() == 0 {
            return archive;
        }
        pop = eng.offspring(m, |rng| binary_tournament(&archive, rng, |_, _| None).1.genotype.clone());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(f1: f64, f2: f64) -> ObjectiveVector {
        ObjectiveVector::new(f1, f2, 0.0)
    }

    #[test]
    fn non_dominated_members_have_fitness_below_one() {
        let objs = [v(3.0, 1.0), v(1.0, 3.0), v(1.0, 1.0), v(0.0, 0.0)];
        let dist = distance_matrix(&objs);
        let f = fitness(&objs, &dist, 1);
        assert!(f[0] < 1.0 && f[1] < 1.0);
        // (1,1) is dominated by both extremes, each of strength 2 → raw 4.
        assert!((f[2] - 4.0).abs() < 1.0);
        assert!(f[3] > f[2]);
    }

    #[test]
    fn truncation_drops_duplicates_first() {
        let objs = [v(0.0, 1.0), v(0.5, 0.5), v(0.5, 0.5), v(1.0, 0.0)];
        let dist = distance_matrix(&objs);
        let mut members = vec![0, 1, 2, 3];
        truncate(&mut members, &dist, 3);
        assert_eq!(members.len(), 3);
        assert!(members.contains(&0) && members.contains(&3));
        assert!(members.contains(&1) ^ members.contains(&2));
    }
}
