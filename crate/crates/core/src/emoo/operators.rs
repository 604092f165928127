use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dominance::dominates;
use crate::netmodel::{AllocationMatrix, Evaluator, ObjectiveVector};

/// A repaired genotype with its objectives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub genotype: AllocationMatrix,
    pub objectives: ObjectiveVector,
}

/// Uniform random bits, before repair.
pub fn random_genotype<R: Rng + ?Sized>(users: usize, rbs: usize, rng: &mut R) -> AllocationMatrix {
    let bits = (0..users * rbs).map(|_| rng.random_bool(0.5)).collect();
    AllocationMatrix::from_bits(users, rbs, bits).expect("shape matches")
}

/// Repairs and evaluates one genotype (counts one evaluation).
pub fn realize<R: Rng + ?Sized>(ev: &Evaluator<'_>, mut genotype: AllocationMatrix, rng: &mut R) -> Individual {
    ev.instance().repair(&mut genotype, rng);
    let objectives = ev.evaluate(&genotype).expect("repaired genotype of matching shape");
    Individual { genotype, objectives }
}

/// `size` uniform random genotypes, repaired and evaluated.
pub fn init_population<R: Rng + ?Sized>(ev: &Evaluator<'_>, size: usize, rng: &mut R) -> Vec<Individual> {
    let inst = ev.instance();
    (0..size).map(|_| realize(ev, random_genotype(inst.users(), inst.rbs(), rng), rng)).collect()
}

/// Draws two distinct members uniformly; the dominating one wins, otherwise `tie` decides
/// (`Some(true)` picks the first) or a coin flip when `tie` returns `None`.
pub fn binary_tournament<'p, R: Rng + ?Sized>(
    pop: &'p [Individual],
    rng: &mut R,
    mut tie: impl FnMut(usize, usize) -> Option<bool>,
) -> (usize, &'p Individual) {
    if pop.len() == 1 {
        return (0, &pop[0]);
    }
    let pair = sample(rng, pop.len(), 2);
    let (a, b) = (pair.index(0), pair.index(1));
    let pick = if dominates(&pop[a].objectives, &pop[b].objectives) {
        a
    } else if dominates(&pop[b].objectives, &pop[a].objectives) {
        b
    } else {
        match tie(a, b) {
            Some(true) => a,
            Some(false) => b,
            None => {
                if rng.random_bool(0.5) {
                    a
                } else {
                    b
                }
            }
        }
    };
    (pick, &pop[pick])
}

/// Half-uniform crossover: swaps exactly half (rounded down) of the differing bits.
pub fn hux_crossover<R: Rng + ?Sized>(
    p1: &AllocationMatrix,
    p2: &AllocationMatrix,
    rng: &mut R,
) -> (AllocationMatrix, AllocationMatrix) {
    let mut c1 = p1.clone();
    let mut c2 = p2.clone();
    let differing: Vec<usize> = (0..p1.bits().len()).filter(|&i| p1.bits()[i] != p2.bits()[i]).collect();
    let h = differing.len();
    for k in sample(rng, h, h / 2).into_iter() {
        let i = differing[k];
        c1.bits_mut()[i] = p2.bits()[i];
        c2.bits_mut()[i] = p1.bits()[i];
    }
    (c1, c2)
}

/// Flips each bit independently with probability `p`.
pub fn bitflip_mutation<R: Rng + ?Sized>(geno: &mut AllocationMatrix, p: f64, rng: &mut R) {
    if p <= 0.0 {
        return;
    }
    for b in geno.bits_mut() {
        if rng.random_bool(p.min(1.0)) {
            *b = !*b;
        }
    }
}

/// Crossover with probability `pc`, then mutation of both children.
pub fn vary<R: Rng + ?Sized>(
    p1: &AllocationMatrix,
    p2: &AllocationMatrix,
    pc: f64,
    pm: f64,
    rng: &mut R,
) -> (AllocationMatrix, AllocationMatrix) {
    let (mut c1, mut c2) = if rng.random_bool(pc) { hux_crossover(p1, p2, rng) } else { (p1.clone(), p2.clone()) };
    bitflip_mutation(&mut c1, pm, rng);
    bitflip_mutation(&mut c2, pm, rng);
    (c1, c2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding;
    use proptest::prelude::*;
    use rand::Rng;

    fn geno(bits: &[u8]) -> AllocationMatrix {
        AllocationMatrix::from_bits(1, bits.len(), bits.iter().map(|b| *b == 1).collect()).unwrap()
    }

    #[test]
    fn hux_identical_parents() {
        let p = geno(&[1, 0, 1, 1]);
        let (a, b) = hux_crossover(&p, &p, &mut seeding::rng(0));
        assert_eq!(a, p);
        assert_eq!(b, p);
    }

    #[test]
    fn hux_four_differences() {
        let p1 = geno(&[1, 1, 1, 1, 0, 0]);
        let p2 = geno(&[0, 0, 0, 0, 0, 0]);
        for seed in 0..20 {
            let (c1, c2) = hux_crossover(&p1, &p2, &mut seeding::rng(seed));
            assert_eq!(c1.hamming(&p1), 2);
            assert_eq!(c2.hamming(&p2), 2);
        }
    }

    #[test]
    fn mutation_extremes() {
        let p = geno(&[1, 0, 1, 1, 0]);
        let mut a = p.clone();
        bitflip_mutation(&mut a, 0.0, &mut seeding::rng(0));
        assert_eq!(a, p);
        bitflip_mutation(&mut a, 1.0, &mut seeding::rng(0));
        assert_eq!(a, geno(&[0, 1, 0, 0, 1]));
    }

    #[test]
    fn mutation_rate_matches_binomial_mean() {
        let mut rng = seeding::rng(5);
        let base = AllocationMatrix::zeros(4, 100);
        let trials = 10_000;
        let mut flips = 0usize;
        for _ in 0..trials {
            let mut g = base.clone();
            bitflip_mutation(&mut g, 0.01, &mut rng);
            flips += g.count_ones();
        }
        let mean = flips as f64 / trials as f64;
        assert!((mean - 4.0).abs() < 0.5, "{mean}");
    }

    #[test]
    fn random_genotypes_are_half_ones() {
        let mut rng = seeding::rng(8);
        let mut ones = 0;
        let draws = 500;
        for _ in 0..draws {
            ones += random_genotype(4, 100, &mut rng).count_ones();
        }
        let frac = ones as f64 / (draws * 400) as f64;
        assert!((frac - 0.5).abs() < 0.01, "{frac}");
    }

    fn ind(f1: f64, f2: f64, viol: f64) -> Individual {
        Individual { genotype: AllocationMatrix::zeros(1, 1), objectives: ObjectiveVector::new(f1, f2, viol) }
    }

    #[test]
    fn tournament_frequency() {
        let pop = vec![ind(2.0, 2.0, 0.0), ind(1.0, 1.0, 0.0)];
        let mut rng = seeding::rng(1);
        let wins = (0..10_000).filter(|_| binary_tournament(&pop, &mut rng, |_, _| None).0 == 0).count();
        assert_eq!(wins, 10_000);
        let infeasible_first = vec![ind(9.0, 9.0, 1.0), ind(0.0, 0.0, 0.0)];
        assert_eq!(binary_tournament(&infeasible_first, &mut rng, |_, _| None).0, 1);
    }

    #[test]
    fn tournament_of_clones_is_valid() {
        let pop = vec![ind(1.0, 1.0, 0.0), ind(1.0, 1.0, 0.0)];
        let (i, w) = binary_tournament(&pop, &mut seeding::rng(3), |_, _| None);
        assert!(i < 2);
        assert_eq!(w.objectives, pop[0].objectives);
    }

    proptest! {
        #[test]
        fn hux_preserves_pair_distance(seed in 0u64..10_000) {
            let mut rng = seeding::rng(seed);
            let len = rng.random_range(1..64);
            let p1 = random_genotype(1, len, &mut rng);
            let p2 = random_genotype(1, len, &mut rng);
            let (c1, c2) = hux_crossover(&p1, &p2, &mut rng);
            prop_assert_eq!(c1.hamming(&c2), p1.hamming(&p2));
            let h = p1.hamming(&p2);
            prop_assert_eq!(c1.hamming(&p1), h / 2);
        }
    }
}
