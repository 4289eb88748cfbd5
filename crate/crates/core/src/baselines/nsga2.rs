//! Binary-coded NSGA-II on the `(cost, -ln R, -P)` triple with
//! constraint-domination: feasible beats infeasible, infeasible strings are
//! ranked by total shortfall.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{BinaryProblem, Evaluation, MultiObjective};
use crate::rng::{rng_for, SimRng};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Nsga2Config {
    pub population_size: usize,
    pub max_iterations: usize,
    pub mutation_prob: f64,
    pub crossover_prob: f64,
    pub rng_seed: u64,
    /// Recorded for completeness; real-coded operators do not apply to bitmaps.
    pub crossover_distribution_index: f64,
    pub mutation_distribution_index: f64,
}

impl Default for Nsga2Config {
    fn default() -> Self {
        Nsga2Config {
            population_size: 200,
            max_iterations: 500,
            mutation_prob: 0.10,
            crossover_prob: 0.90,
            rng_seed: 0,
            crossover_distribution_index: 20.0,
            mutation_distribution_index: 100.0,
        }
    }
}

impl Nsga2Config {
    pub fn validate(&self) -> Result<()> {
        if self.population_size == 0 || self.max_iterations == 0 {
            return Err(Error::config(
                "population size and iteration count must be at least 1",
            ));
        }
        for p in [self.mutation_prob, self.crossover_prob] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::config("probabilities must lie in [0, 1]"));
            }
        }
        Ok(())
    }
}

/// Pareto dominance for minimization.
pub fn dominates(a: &[f64; 3], b: &[f64; 3]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
}

/// Partition `0..n` into successive non-dominated fronts under `dom`.
pub fn non_dominated_sort_by(n: usize, dom: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut counts = vec![0usize; n];
    for p in 0..n {
        for q in (p + 1)..n {
            if dom(p, q) {
                dominated_by[p].push(q);
                counts[q] += 1;
            } else if dom(q, p) {
                dominated_by[q].push(p);
                counts[p] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|i| counts[*i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &p in &current {
            for &q in &dominated_by[p] {
                counts[q] -= 1;
                if counts[q] == 0 {
                    next.push(q);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

pub fn fast_non_dominated_sort(points: &[[f64; 3]]) -> Vec<Vec<usize>> {
    non_dominated_sort_by(points.len(), |a, b| dominates(&points[a], &points[b]))
}

/// Crowding distance of each member of `front`, in the same order.
/// Boundary points on any axis get infinity.
pub fn crowding_distance(points: &[[f64; 3]], front: &[usize]) -> Vec<f64> {
    let n = front.len();
    let mut dist = vec![0.0; n];
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    for axis in 0..3 {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            points[front[a]][axis]
                .partial_cmp(&points[front[b]][axis])
                .unwrap_or(Ordering::Equal)
        });
        dist[order[0]] = f64::INFINITY;
        dist[order[n - 1]] = f64::INFINITY;
        let lo = points[front[order[0]]][axis];
        let hi = points[front[order[n - 1]]][axis];
        if hi - lo <= 0.0 {
            continue;
        }
        for w in 1..n - 1 {
            let gap = points[front[order[w + 1]]][axis] - points[front[order[w - 1]]][axis];
            dist[order[w]] += gap / (hi - lo);
        }
    }
    dist
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParetoEntry {
    pub bits: Vec<bool>,
    pub objectives: [f64; 3],
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ParetoFront {
    pub entries: Vec<ParetoEntry>,
}

impl ParetoFront {
    pub fn is_mutually_non_dominated(&self) -> bool {
        self.entries.iter().all(|a| {
            self.entries
                .iter()
                .all(|b| !dominates(&a.objectives, &b.objectives))
        })
    }
}

#[derive(Clone, Debug)]
pub struct Nsga2Result<E> {
    pub front: ParetoFront,
    /// Front member with the highest scalar fitness.
    pub best_bits: Vec<bool>,
    pub best_eval: E,
    pub evaluations: usize,
    pub final_population: Vec<(Vec<bool>, E)>,
}

struct Individual<E> {
    bits: Vec<bool>,
    eval: E,
    objectives: [f64; 3],
    violation: f64,
    rank: usize,
    crowding: f64,
}

fn constrained_dominates<E>(a: &Individual<E>, b: &Individual<E>) -> bool {
    match (a.violation > 0.0, b.violation > 0.0) {
        (false, true) => true,
        (true, false) => false,
        (true, true) if a.violation != b.violation => a.violation < b.violation,
        _ => dominates(&a.objectives, &b.objectives),
    }
}

fn crowded_cmp<E>(a: &Individual<E>, b: &Individual<E>) -> Ordering {
    a.rank.cmp(&b.rank).then_with(|| {
        b.crowding
            .partial_cmp(&a.crowding)
            .unwrap_or(Ordering::Equal)
    })
}

/// Rank and crowd `pop` in place; returns the fronts.
fn assign_ranks<E>(pop: &mut [Individual<E>]) -> Vec<Vec<usize>> {
    // Converged populations are mostly copies; sort the distinct points only.
    let mut distinct: Vec<usize> = Vec::new();
    let mut group_of = Vec::with_capacity(pop.len());
    let mut index: HashMap<[u64; 4], usize> = HashMap::new();
    for (i, ind) in pop.iter().enumerate() {
        let o = ind.objectives;
        let key = [ind.violation.to_bits(), o[0].to_bits(), o[1].to_bits(), o[2].to_bits()];
        let g = *index.entry(key).or_insert_with(|| {
            distinct.push(i);
            distinct.len() - 1
        });
        group_of.push(g);
    }
    let grouped = non_dominated_sort_by(distinct.len(), |a, b| {
        constrained_dominates(&pop[distinct[a]], &pop[distinct[b]])
    });
    let mut rank_of = vec![0; distinct.len()];
    for (r, front) in grouped.iter().enumerate() {
        for &g in front {
            rank_of[g] = r;
        }
    }
    let mut fronts = vec![Vec::new(); grouped.len()];
    for (i, g) in group_of.iter().enumerate() {
        fronts[rank_of[*g]].push(i);
    }
    let points: Vec<[f64; 3]> = pop.iter().map(|i| i.objectives).collect();
    for (rank, front) in fronts.iter().enumerate() {
        let dist = crowding_distance(&points, front);
        for (&idx, d) in front.iter().zip(dist) {
            pop[idx].rank = rank;
            pop[idx].crowding = d;
        }
    }
    fronts
}

fn tournament<'p, E>(pop: &'p [Individual<E>], rng: &mut SimRng) -> &'p Individual<E> {
    let a = &pop[rng.random_range(0..pop.len())];
    let b = &pop[rng.random_range(0..pop.len())];
    if crowded_cmp(b, a) == Ordering::Less {
        b
    } else {
        a
    }
}

fn evaluate_into<P>(problem: &mut P, bits: Vec<bool>) -> std::result::Result<Individual<P::Eval>, P::Error>
where
    P: BinaryProblem,
    P::Eval: MultiObjective,
{
    let eval = problem.evaluate(&bits)?;
    Ok(Individual {
        objectives: eval.objectives(),
        violation: eval.violation(),
        eval,
        bits,
        rank: 0,
        crowding: 0.0,
    })
}

pub fn nsga2_run<P>(problem: &mut P, config: &Nsga2Config) -> std::result::Result<Nsga2Result<P::Eval>, P::Error>
where
    P: BinaryProblem,
    P::Eval: MultiObjective,
    P::Error: From<Error>,
{
    config.validate()?;
    let m = problem.num_bits();
    let n = config.population_size;
    let per_bit = if m == 0 { 0.0 } else { config.mutation_prob / m as f64 };
    let mut rng = rng_for(config.rng_seed, &[0x45A2]);
    let mut evaluations = 0;

    let mut pop = Vec::with_capacity(2 * n);
    for _ in 0..n {
        let bits: Vec<bool> = (0..m).map(|_| rng.random()).collect();
        pop.push(evaluate_into(problem, bits)?);
    }
    evaluations += n;
    assign_ranks(&mut pop);

    for _ in 0..config.max_iterations {
        let mut offspring = Vec::with_capacity(n);
        while offspring.len() < n {
            let p1 = tournament(&pop, &mut rng).bits.clone();
            let p2 = tournament(&pop, &mut rng).bits.clone();
            let (mut c1, mut c2) = (p1.clone(), p2.clone());
            if rng.random_bool(config.crossover_prob) {
                for i in 0..m {
                    if rng.random_bool(0.5) {
                        c1[i] = p2[i];
                        c2[i] = p1[i];
                    }
                }
            }
            for child in [&mut c1, &mut c2] {
                for bit in child.iter_mut() {
                    if rng.random_bool(per_bit) {
                        *bit = !*bit;
                    }
                }
            }
            offspring.push(c1);
            if offspring.len() < n {
                offspring.push(c2);
            }
        }
        for bits in offspring {
            pop.push(evaluate_into(problem, bits)?);
        }
        evaluations += n;

        let fronts = assign_ranks(&mut pop);
        let mut keep = Vec::with_capacity(n);
        for front in fronts {
            if keep.len() + front.len() <= n {
                keep.extend(front);
            } else {
                let mut rest = front;
                rest.sort_by(|&a, &b| crowded_cmp(&pop[a], &pop[b]).then(a.cmp(&b)));
                keep.extend(rest.into_iter().take(n - keep.len()));
            }
            if keep.len() == n {
                break;
            }
        }
        keep.sort_unstable();
        let mut slots: Vec<Option<Individual<P::Eval>>> = pop.into_iter().map(Some).collect();
        pop = keep.into_iter().map(|i| slots[i].take().expect("unique index")).collect();
        assign_ranks(&mut pop);
    }

    let mut seen = HashSet::new();
    let mut front = ParetoFront::default();
    let mut best: Option<&Individual<P::Eval>> = None;
    for ind in pop.iter().filter(|i| i.rank == 0) {
        if !seen.insert(ind.bits.clone()) {
            continue;
        }
        front.entries.push(ParetoEntry {
            bits: ind.bits.clone(),
            objectives: ind.objectives,
        });
        if best.is_none_or(|b| ind.eval.fitness() > b.eval.fitness()) {
            best = Some(ind);
        }
    }
    let best = best.expect("first front is never empty");
    Ok(Nsga2Result {
        front,
        best_bits: best.bits.clone(),
        best_eval: best.eval.clone(),
        evaluations,
        final_population: pop.into_iter().map(|i| (i.bits, i.eval)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::ObjectiveBreakdown;
    use crate::problem::{Evaluation, FnProblem};
    use proptest::prelude::*;

    fn brute_force_fronts(points: &[[f64; 3]]) -> Vec<Vec<usize>> {
        let mut remaining: Vec<usize> = (0..points.len()).collect();
        let mut fronts = Vec::new();
        while !remaining.is_empty() {
            let front: Vec<usize> = remaining
                .iter()
                .copied()
                .filter(|&i| !remaining.iter().any(|&j| dominates(&points[j], &points[i])))
                .collect();
            remaining.retain(|i| !front.contains(i));
            fronts.push(front);
        }
        fronts
    }

    fn sorted(mut fronts: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
        for f in &mut fronts {
            f.sort_unstable();
        }
        fronts
    }

    #[test]
    fn total_domination_gives_two_fronts() {
        let pts = [[1.0, 1.0, 1.0], [2.0, 2.0, 2.0]];
        assert_eq!(fast_non_dominated_sort(&pts), vec![vec![0], vec![1]]);
    }

    #[test]
    fn incomparable_pair_shares_a_front() {
        let pts = [[1.0, 2.0, 0.0], [2.0, 1.0, 0.0]];
        assert_eq!(sorted(fast_non_dominated_sort(&pts)), vec![vec![0, 1]]);
    }

    #[test]
    fn crowding_boundaries_are_infinite() {
        let pts = [
            [0.1, 0.9, 0.0],
            [0.3, 0.7, 0.0],
            [0.5, 0.5, 0.0],
            [0.7, 0.3, 0.0],
            [0.9, 0.1, 0.0],
        ];
        let d = crowding_distance(&pts, &[0, 1, 2, 3, 4]);
        assert!(d[0].is_infinite() && d[4].is_infinite());
        for v in &d[1..4] {
            assert!((v - 1.0).abs() < 1e-12, "{v}");
        }
        assert!(crowding_distance(&pts, &[1, 3]).iter().all(|v| v.is_infinite()));
    }

    fn breakdown(objectives: [f64; 3], shortfall: f64) -> ObjectiveBreakdown {
        ObjectiveBreakdown {
            cost: objectives[0],
            log_reliability: -objectives[1],
            reputation: -objectives[2],
            objective: objectives.iter().sum(),
            penalty: shortfall,
            fitness: -(objectives.iter().sum::<f64>() + shortfall),
            shortfall: vec![shortfall],
        }
    }

    #[test]
    fn dominating_string_is_the_whole_front() {
        // Every objective is the number of zero bits: 111 dominates all.
        let mut p = FnProblem::new(3, |bits: &[bool]| -> Result<ObjectiveBreakdown> {
            let zeros = bits.iter().filter(|b| !**b).count() as f64;
            Ok(breakdown([zeros, zeros, zeros], 0.0))
        });
        let cfg = Nsga2Config {
            population_size: 20,
            max_iterations: 30,
            rng_seed: 3,
            ..Default::default()
        };
        let res = nsga2_run(&mut p, &cfg).unwrap();
        assert_eq!(res.front.entries.len(), 1);
        assert_eq!(res.front.entries[0].bits, vec![true; 3]);
        assert_eq!(res.best_bits, vec![true; 3]);
    }

    #[test]
    fn feasible_strings_beat_infeasible_ones() {
        // Only 0000 is feasible but it is worst on every objective.
        let mut p = FnProblem::new(4, |bits: &[bool]| -> Result<ObjectiveBreakdown> {
            let ones = bits.iter().filter(|b| **b).count() as f64;
            Ok(breakdown([-ones, -ones, -ones], ones))
        });
        let cfg = Nsga2Config {
            population_size: 16,
            max_iterations: 40,
            mutation_prob: 1.0,
            rng_seed: 8,
            ..Default::default()
        };
        let res = nsga2_run(&mut p, &cfg).unwrap();
        assert_eq!(res.best_bits, vec![false; 4]);
        assert!(res.best_eval.fitness() == 0.0);
    }

    #[test]
    fn rejects_bad_probabilities() {
        let mut p = FnProblem::new(2, |_: &[bool]| -> Result<ObjectiveBreakdown> {
            Ok(breakdown([0.0; 3], 0.0))
        });
        let cfg = Nsga2Config {
            mutation_prob: 1.5,
            ..Default::default()
        };
        assert!(nsga2_run(&mut p, &cfg).is_err());
    }

    #[test]
    fn runs_are_reproducible() {
        let make = || {
            FnProblem::new(8, |bits: &[bool]| -> Result<ObjectiveBreakdown> {
                let a = bits[..4].iter().filter(|b| **b).count() as f64;
                let b = bits[4..].iter().filter(|b| **b).count() as f64;
                Ok(breakdown([a, 4.0 - a + b, 4.0 - b], 0.0))
            })
        };
        let cfg = Nsga2Config {
            population_size: 24,
            max_iterations: 20,
            rng_seed: 77,
            ..Default::default()
        };
        let a = nsga2_run(&mut make(), &cfg).unwrap();
        let b = nsga2_run(&mut make(), &cfg).unwrap();
        assert_eq!(a.front, b.front);
        assert_eq!(a.final_population, b.final_population);
        assert!(a.front.is_mutually_non_dominated());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn sort_matches_brute_force(
            points in prop::collection::vec(prop::array::uniform3(0u8..6), 20)
        ) {
            // Small integer grid so ties and duplicates actually occur.
            let pts: Vec<[f64; 3]> = points.iter().map(|p| p.map(f64::from)).collect();
            prop_assert_eq!(sorted(fast_non_dominated_sort(&pts)), brute_force_fronts(&pts));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn front_is_non_dominated(seed in any::<u64>(), w in prop::collection::vec(-3.0..3.0f64, 18)) {
            let mut p = FnProblem::new(6, |bits: &[bool]| -> Result<ObjectiveBreakdown> {
                let mut o = [0.0; 3];
                for (i, b) in bits.iter().enumerate() {
                    if *b {
                        for (k, v) in o.iter_mut().enumerate() {
                            *v += w[i * 3 + k];
                        }
                    }
                }
                Ok(breakdown(o, 0.0))
            });
            let cfg = Nsga2Config { population_size: 12, max_iterations: 8, rng_seed: seed, ..Default::default() };
            let res = nsga2_run(&mut p, &cfg).unwrap();
            prop_assert!(res.front.is_mutually_non_dominated());
        }
    }
}
