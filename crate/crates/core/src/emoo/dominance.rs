use std::cmp::Ordering;

use crate::netmodel::ObjectiveVector;

/// Pareto dominance under maximization of both objectives, ignoring constraints.
pub fn pareto_dominates(a: &ObjectiveVector, b: &ObjectiveVector) -> bool {
    a.f1 >= b.f1 && a.f2 >= b.f2 && (a.f1 > b.f1 || a.f2 > b.f2)
}

/// Feasibility-first dominance: feasible beats infeasible, smaller violation
/// beats larger, and two feasible vectors compare by Pareto dominance.
pub fn dominates(a: &ObjectiveVector, b: &ObjectiveVector) -> bool {
    match (a.is_feasible(), b.is_feasible()) {
        (true, false) => true,
        (false, true) => false,
        (false, false) => a.violation < b.violation,
        (true, true) => pareto_dominates(a, b),
    }
}

/// Indices of members not dominated by any other member (quadratic scan).
pub fn non_dominated_indices(points: &[ObjectiveVector]) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| !points.iter().enumerate().any(|(j, p)| j != i && dominates(p, &points[i])))
        .collect()
}

/// Fronts of the fast non-dominated sort; front 0 is non-dominated.
pub fn fast_non_dominated_sort(points: &[ObjectiveVector]) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dominated_by_me: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut dom_count = vec![0usize; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if dominates(&points[i], &points[j]) {
                dominated_by_me[i].push(j);
                dom_count[j] += 1;
            } else if dominates(&points[j], &points[i]) {
                dominated_by_me[j].push(i);
                dom_count[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dom_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by_me[i] {
                dom_count[j] -= 1;
                if dom_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::replace(&mut current, next));
    }
    fronts
}

/// Crowding distance of each member of one front (same order as `front`).
pub fn crowding_distance(points: &[ObjectiveVector], front: &[usize]) -> Vec<f64> {
    let n = front.len();
    let mut dist = vec![0.0; n];
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let getters: [fn(&ObjectiveVector) -> f64; 2] = [|v| v.f1, |v| v.f2];
    for get in getters {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| get(&points[front[a]]).total_cmp(&get(&points[front[b]])).then(a.cmp(&b)));
        let lo = get(&points[front[order[0]]]);
        let hi = get(&points[front[order[n - 1]]]);
        dist[order[0]] = f64::INFINITY;
        dist[order[n - 1]] = f64::INFINITY;
        if hi > lo {
            for w in 1..n - 1 {
                let gap = get(&points[front[order[w + 1]]]) - get(&points[front[order[w - 1]]]);
                dist[order[w]] += gap / (hi - lo);
            }
        }
    }
    dist
}

/// Total order used to make outputs deterministic: f1 descending, then f2 descending.
pub fn objective_order(a: &ObjectiveVector, b: &ObjectiveVector) -> Ordering {
    b.f1.total_cmp(&a.f1).then(b.f2.total_cmp(&a.f2)).then(a.violation.total_cmp(&b.violation))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(f1: f64, f2: f64, violation: f64) -> ObjectiveVector {
        ObjectiveVector::new(f1, f2, violation)
    }

    #[test]
    fn dominance_cases() {
        assert!(dominates(&v(2.0, 2.0, 0.0), &v(1.0, 1.0, 0.0)));
        assert!(!dominates(&v(1.0, 5.0, 0.0), &v(5.0, 1.0, 0.0)));
        assert!(!dominates(&v(5.0, 1.0, 0.0), &v(1.0, 5.0, 0.0)));
        assert!(dominates(&v(0.0, 0.0, 0.0), &v(9.0, 9.0, 1.0)));
        assert!(dominates(&v(0.0, 0.0, 1.0), &v(9.0, 9.0, 2.0)));
        assert!(!dominates(&v(1.0, 1.0, 0.0), &v(1.0, 1.0, 0.0)));
    }

    #[test]
    fn sorting_layers() {
        let pts = [v(3.0, 1.0, 0.0), v(1.0, 3.0, 0.0), v(1.0, 1.0, 0.0), v(2.0, 2.0, 0.0), v(5.0, 5.0, 1.0)];
        assert_eq!(fast_non_dominated_sort(&pts), vec![vec![0, 1, 3], vec![2], vec![4]]);
        let cd = crowding_distance(&pts, &[0, 1, 3]);
        assert!(cd[0].is_infinite() && cd[1].is_infinite());
        assert!((cd[2] - 2.0).abs() < 1e-12);
    }

    fn arb_points() -> impl Strategy<Value = Vec<ObjectiveVector>> {
        prop::collection::vec(
            (0u8..8, 0u8..8, prop_oneof![Just(0u8), 0u8..3]).prop_map(|(a, b, c)| v(a as f64, b as f64, c as f64)),
            1..40,
        )
    }

    proptest! {
        #[test]
        fn first_front_matches_quadratic_filter(pts in arb_points()) {
            let fronts = fast_non_dominated_sort(&pts);
            prop_assert_eq!(&fronts[0], &non_dominated_indices(&pts));
            let total: usize = fronts.iter().map(Vec::len).sum();
            prop_assert_eq!(total, pts.len());
            // Nobody in a later front dominates anyone in an earlier one.
            for (k, f) in fronts.iter().enumerate() {
                for later in &fronts[k + 1..] {
                    for &i in f {
                        for &j in later {
                            prop_assert!(!dominates(&pts[j], &pts[i]));
                        }
                    }
                }
            }
        }
    }
}
