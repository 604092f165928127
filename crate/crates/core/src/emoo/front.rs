use serde::{Deserialize, Serialize};

use super::dominance::{non_dominated_indices, objective_order};
use super::operators::Individual;
use crate::netmodel::ObjectiveVector;

/// Mutually non-dominated individuals with distinct objective vectors, sorted
/// by f1 descending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoFront {
    pub members: Vec<Individual>,
    /// `[f1_min, f1_max, f2_min, f2_max]` over the members.
    pub bounds: [f64; 4],
}

impl ParetoFront {
    /// Non-dominated filter (feasibility first), collapsing equal objective vectors.
    pub fn from_individuals(pop: Vec<Individual>) -> Self {
        let objs: Vec<ObjectiveVector> = pop.iter().map(|i| i.objectives).collect();
        let keep = non_dominated_indices(&objs);
        let mut members: Vec<Individual> = Vec::with_capacity(keep.len());
        let mut pop: Vec<Option<Individual>> = pop.into_iter().map(Some).collect();
        for i in keep {
            let ind = pop[i].take().expect("each index once");
            if !members.iter().any(|m| m.objectives == ind.objectives) {
                members.push(ind);
            }
        }
        members.sort_by(|a, b| objective_order(&a.objectives, &b.objectives));
        let mut bounds = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
        for m in &members {
            bounds[0] = bounds[0].min(m.objectives.f1);
            bounds[1] = bounds[1].max(m.objectives.f1);
            bounds[2] = bounds[2].min(m.objectives.f2);
            bounds[3] = bounds[3].max(m.objectives.f2);
        }
        Self { members, bounds }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn objectives(&self) -> Vec<ObjectiveVector> {
        self.members.iter().map(|m| m.objectives).collect()
    }

    /// `(f1, f2)` pairs of the members.
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.members.iter().map(|m| (m.objectives.f1, m.objectives.f2)).collect()
    }

    pub fn all_feasible(&self) -> bool {
        self.members.iter().all(|m| m.objectives.is_feasible())
    }
}

/// Union of fronts reduced to its non-dominated, duplicate-free core.
pub fn build_reference_set<'a>(fronts: impl IntoIterator<Item = &'a ParetoFront>) -> ParetoFront {
    let all: Vec<Individual> = fronts.into_iter().flat_map(|f| f.members.iter().cloned()).collect();
    ParetoFront::from_individuals(all)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub individual: Individual,
    /// False when no member reached the target and the best-satisfaction member was returned.
    pub target_met: bool,
}

/// The member with the largest f1 among those with f2 ≥ `target`; otherwise the
/// member with the largest f2. `None` only for an empty front.
pub fn select_operating_point(front: &ParetoFront, target: f64) -> Option<OperatingPoint> {
    let feasible_target = front
        .members
        .iter()
        .filter(|m| m.objectives.f2 >= target)
        .max_by(|a, b| a.objectives.f1.total_cmp(&b.objectives.f1));
    if let Some(m) = feasible_target {
        return Some(OperatingPoint { individual: m.clone(), target_met: true });
    }
    front
        .members
        .iter()
        .max_by(|a, b| a.objectives.f2.total_cmp(&b.objectives.f2).then(a.objectives.f1.total_cmp(&b.objectives.f1)))
        .map(|m| OperatingPoint { individual: m.clone(), target_met: false })
}
