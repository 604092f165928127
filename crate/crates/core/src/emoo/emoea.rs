//! ε-MOEA: steady-state population plus an archive holding at most one
//! feasible member per ε-box of the normalized objective space.

use rand::Rng as _;

use super::dominance::{dominates, pareto_dominates};
use super::operators::{binary_tournament, Individual};
use super::run::Engine;
use crate::netmodel::ObjectiveVector;

/// Maps objectives to ε-boxes: f1 is scaled by the mean demand, f2 by the top level.
#[derive(Debug, Clone, Copy)]
pub struct BoxGrid {
    pub epsilon: f64,
    pub f1_scale: f64,
    pub f2_scale: f64,
}

impl BoxGrid {
    fn normalized(&self, o: &ObjectiveVector) -> [f64; 2] {
        [o.f1 / self.f1_scale, o.f2 / self.f2_scale]
    }

    pub fn index(&self, o: &ObjectiveVector) -> [i64; 2] {
        let y = self.normalized(o);
        [(y[0] / self.epsilon).floor() as i64, (y[1] / self.epsilon).floor() as i64]
    }

    /// Squared distance to the best (upper) corner of the member's own box.
    fn corner_distance(&self, o: &ObjectiveVector) -> f64 {
        let y = self.normalized(o);
        let b = self.index(o);
        let c = [(b[0] + 1) as f64 * self.epsilon, (b[1] + 1) as f64 * self.epsilon];
        (c[0] - y[0]).powi(2) + (c[1] - y[1]).powi(2)
    }
}

fn box_dominates(a: [i64; 2], b: [i64; 2]) -> bool {
    a[0] >= b[0] && a[1] >= b[1] && a != b
}

/// Archive update; returns whether `child` entered. Only feasible members are archived.
pub fn archive_accept(archive: &mut Vec<Individual>, child: &Individual, grid: &BoxGrid) -> bool {
    if !child.objectives.is_feasible() {
        return false;
    }
    let cb = grid.index(&child.objectives);
    if archive.iter().any(|m| box_dominates(grid.index(&m.objectives), cb)) {
        return false;
    }
    archive.retain(|m| !box_dominates(cb, grid.index(&m.objectives)));
    if let Some(pos) = archive.iter().position(|m| grid.index(&m.objectives) == cb) {
        let incumbent = &archive[pos].objectives;
        let replace = if pareto_dominates(&child.objectives, incumbent) {
            true
        } else if pareto_dominates(incumbent, &child.objectives) || *incumbent == child.objectives {
            false
        } else {
            grid.corner_distance(&child.objectives) < grid.corner_distance(incumbent)
        };
        if replace {
            archive[pos] = child.clone();
        }
        return replace;
    }
    archive.push(child.clone());
    true
}

/// Population update: replace a random dominated member, reject if dominated,
/// otherwise replace a random member.
fn population_accept(pop: &mut [Individual], child: Individual, rng: &mut crate::seeding::Rng) {
    let dominated: Vec<usize> = (0..pop.len()).filter(|&i| dominates(&child.objectives, &pop[i].objectives)).collect();
    if !dominated.is_empty() {
        let i = dominated[rng.random_range(0..dominated.len())];
        pop[i] = child;
    } else if !pop.iter().any(|p| dominates(&p.objectives, &child.objectives)) {
        let i = rng.random_range(0..pop.len());
        pop[i] = child;
    }
}

pub(super) fn run(eng: &mut Engine<'_, '_>) -> Vec<Individual> {
    let m = eng.params.population;
    let mean_demand = eng.ev.instance().mean_demand_bps();
    let grid = BoxGrid {
        epsilon: eng.params.epsilon,
        f1_scale: if mean_demand > 0.0 { mean_demand } else { 1.0 },
        f2_scale: crate::satisfaction::MAX_LEVEL as f64,
    };
    let mut pop = eng.init();
    let mut archive: Vec<Individual> = Vec::new();
    for ind in &pop {
        archive_accept(&mut archive, ind, &grid);
    }
    eng.observe(&archive);
    let mut since_report = 0;
    while eng.remaining() > 0 {
        let p1 = binary_tournament(&pop, &mut eng.rng, |_, _| None).1.genotype.clone();
        let p2 = if archive.is_empty() {
            binary_tournament(&pop, &mut eng.rng, |_, _| None).1.genotype.clone()
        } else {
            archive[eng.rng.random_range(0..archive.len())].genotype.clone()
        };
        let (c1, _) = eng.children(&p1, &p2);
        let child = eng.realize(c1);
        archive_accept(&mut archive, &child, &grid);
        population_accept(&mut pop, child, &mut eng.rng);
        since_report += 1;
        if since_report == m || eng.remaining() == 0 {
            since_report = 0;
            eng.observe(&archive);
        }
    }
    if archive.is_empty() {
        pop
    } else {
        archive
    }
}
