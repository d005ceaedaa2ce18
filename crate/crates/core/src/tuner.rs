//! Constrained two-objective NSGA-II over one operator's parameter space.
//!
//! Objectives, both minimized: `f1` aggregates the character-level edit
//! distance against ground truth over the document set, `f2` the negated
//! count-matched bag-of-words. Feasibility-first dominance handles the
//! odd-parity constraints; the variation operators draw parity genes from
//! odd values only, so infeasible individuals never arise from search
//! itself.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::imaging;
use crate::metrics;
use crate::ocr::OcrEngine;
use crate::params::{
    constraint_violation, random_assignment, random_gene, schema, Operator, ParamAssignment,
};
use crate::raster::Raster;

/// One genome with its evaluation and sorting state.
#[derive(Debug, Clone)]
pub struct Individual {
    pub assignment: ParamAssignment,
    /// Aggregated edit distance (minimize).
    pub f1: f64,
    /// Negated aggregated bag-of-words matches (minimize).
    pub f2: f64,
    /// Sum of constraint g-values; zero iff feasible.
    pub violation: f64,
    pub rank: usize,
    pub crowding: f64,
}

impl Individual {
    pub fn feasible(&self) -> bool {
        self.violation == 0.0
    }

    fn objectives(&self) -> [f64; 2] {
        [self.f1, self.f2]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregation {
    Sum,
    Mean,
}

#[derive(Debug, Clone)]
pub struct TunerConfig {
    /// Even and >= 4 so mating pairs fill the offspring pool exactly.
    pub population_size: usize,
    pub generations: usize,
    /// Probability that a mating pair mixes genes at all; mixing swaps each
    /// gene with probability one half.
    pub crossover_rate: f64,
    /// Per-gene reset probability; `None` means `1 / gene count`.
    pub mutation_rate: Option<f64>,
    pub seed: u64,
    pub aggregation: Aggregation,
}

impl TunerConfig {
    pub fn new(seed: u64) -> Self {
        TunerConfig {
            population_size: 24,
            generations: 30,
            crossover_rate: 0.9,
            mutation_rate: None,
            seed,
            aggregation: Aggregation::Sum,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.population_size < 4 || self.population_size % 2 != 0 {
            return Err(crate::Error::InvalidParameter(format!(
                "population_size must be even and >= 4, got {}",
                self.population_size
            )));
        }
        for (name, rate) in [
            ("crossover_rate", Some(self.crossover_rate)),
            ("mutation_rate", self.mutation_rate),
        ] {
            if let Some(rate) = rate {
                if !(0.0..=1.0).contains(&rate) {
                    return Err(crate::Error::InvalidParameter(format!(
                        "{name} must be in [0,1], got {rate}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Documents preloaded for fitness evaluation.
pub struct FitnessEnv<'a> {
    docs: Vec<LoadedDoc>,
    engine: &'a OcrEngine,
    aggregation: Aggregation,
}

struct LoadedDoc {
    id: String,
    raster: Raster,
    ground_truth: String,
}

impl<'a> FitnessEnv<'a> {
    pub fn load(
        docs: &[crate::corpus::Document],
        engine: &'a OcrEngine,
        aggregation: Aggregation,
    ) -> Result<Self> {
        if docs.is_empty() {
            return Err(crate::Error::InvalidParameter(
                "fitness evaluation needs at least one document".into(),
            ));
        }
        let docs = docs
            .iter()
            .map(|doc| {
                Ok(LoadedDoc {
                    id: doc.id.clone(),
                    raster: crate::pgm::read_p5(&doc.image_path)?,
                    ground_truth: std::fs::read_to_string(&doc.transcription_path)
                        .map_err(|e| crate::Error::io(&doc.transcription_path, e))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FitnessEnv { docs, engine, aggregation })
    }

    pub fn doc_count(&self) -> usize {
        self.docs.len()
    }
}

/// Runs preprocess -> OCR -> metrics over every document and aggregates.
/// A document whose preprocessing or recognition fails contributes the
/// worst case: its full ground-truth length as distance and zero matches.
pub fn evaluate_fitness(assignment: &ParamAssignment, env: &FitnessEnv) -> (f64, f64, f64) {
    let per_doc: Vec<(f64, f64)> = env
        .docs
        .par_iter()
        .map(|doc| {
            let recognized = imaging::apply(assignment, &doc.raster)
                .and_then(|img| env.engine.recognize(&img));
            match recognized {
                Ok(text) => {
                    let distance = metrics::levenshtein(&doc.ground_truth, &text).distance as f64;
                    let matches = metrics::bow_count_matches(&doc.ground_truth, &text) as f64;
                    (distance, matches)
                }
                Err(e) => {
                    log::warn!("document {}: {e}; scoring worst case", doc.id);
                    (doc.ground_truth.chars().count() as f64, 0.0)
                }
            }
        })
        .collect();
    let mut distance: f64 = per_doc.iter().map(|&(d, _)| d).sum();
    let mut matches: f64 = per_doc.iter().map(|&(_, m)| m).sum();
    if env.aggregation == Aggregation::Mean {
        distance /= env.docs.len() as f64;
        matches /= env.docs.len() as f64;
    }
    (distance, -matches, constraint_violation(assignment).violation())
}

/// Constraint dominance: feasible beats infeasible, lower violation beats
/// higher among infeasible, Pareto dominance on both objectives among
/// feasible.
pub fn constraint_dominates(a: &Individual, b: &Individual) -> bool {
    match (a.feasible(), b.feasible()) {
        (true, false) => true,
        (false, true) => false,
        (false, false) => a.violation < b.violation,
        (true, true) => {
            let (fa, fb) = (a.objectives(), b.objectives());
            fa.iter().zip(&fb).all(|(x, y)| x <= y) && fa.iter().zip(&fb).any(|(x, y)| x < y)
        }
    }
}

/// Deb's fast non-dominated sort; assigns ranks and returns the fronts as
/// index lists partitioning the population.
pub fn fast_nondominated_sort(pop: &mut [Individual]) -> Vec<Vec<usize>> {
    let n = pop.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut domination_count = vec![0usize; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if constraint_dominates(&pop[i], &pop[j]) {
                dominated_by[i].push(j);
                domination_count[j] += 1;
            } else if constraint_dominates(&pop[j], &pop[i]) {
                dominated_by[j].push(i);
                domination_count[i] += 1;
            }
        }
    }
    let mut fronts: Vec<Vec<usize>> = Vec::new();
    let mut current: Vec<usize> =
        (0..n).filter(|&i| domination_count[i] == 0).collect();
    let mut rank = 0;
    while !current.is_empty() {
        for &i in &current {
            pop[i].rank = rank;
        }
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by[i] {
                domination_count[j] -= 1;
                if domination_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::take(&mut current));
        current = next;
        rank += 1;
    }
    fronts
}

/// Manhattan-accumulated crowding distance within one front: boundary
/// members per objective get infinity, interior members add normalized
/// neighbor gaps; a zero objective range contributes nothing.
pub fn crowding_distance(front: &[usize], pop: &mut [Individual]) {
    for &i in front {
        pop[i].crowding = 0.0;
    }
    if front.len() <= 2 {
        for &i in front {
            pop[i].crowding = f64::INFINITY;
        }
        return;
    }
    for obj in 0..2 {
        let mut order: Vec<usize> = front.to_vec();
        order.sort_by(|&a, &b| {
            pop[a].objectives()[obj]
                .partial_cmp(&pop[b].objectives()[obj])
                .unwrap()
                .then(a.cmp(&b))
        });
        let lo = pop[order[0]].objectives()[obj];
        let hi = pop[*order.last().unwrap()].objectives()[obj];
        pop[order[0]].crowding = f64::INFINITY;
        pop[*order.last().unwrap()].crowding = f64::INFINITY;
        let range = hi - lo;
        if range == 0.0 {
            continue;
        }
        for w in order.windows(3) {
            let gap = (pop[w[2]].objectives()[obj] - pop[w[0]].objectives()[obj]) / range;
            if pop[w[1]].crowding.is_finite() {
                pop[w[1]].crowding += gap;
            }
        }
    }
}

/// Binary tournament: lower rank wins, ties fall to larger crowding, then to
/// a coin flip.
pub fn tournament_select<'a>(pop: &'a [Individual], rng: &mut impl Rng) -> &'a Individual {
    let a = &pop[rng.gen_range(0..pop.len())];
    let b = &pop[rng.gen_range(0..pop.len())];
    if a.rank != b.rank {
        return if a.rank < b.rank { a } else { b };
    }
    if a.crowding != b.crowding {
        return if a.crowding > b.crowding { a } else { b };
    }
    if rng.gen::<bool>() {
        a
    } else {
        b
    }
}

/// Uniform crossover: with probability `rate` the pair mixes, swapping each
/// gene with probability one half; otherwise the children are copies.
pub fn crossover(
    a: &ParamAssignment,
    b: &ParamAssignment,
    rate: f64,
    rng: &mut impl Rng,
) -> (ParamAssignment, ParamAssignment) {
    let op = a.algorithm();
    debug_assert_eq!(op, b.algorithm());
    let mut left = a.values().to_vec();
    let mut right = b.values().to_vec();
    if rng.gen::<f64>() < rate {
        for i in 0..left.len() {
            if rng.gen::<bool>() {
                std::mem::swap(&mut left[i], &mut right[i]);
            }
        }
    }
    (
        ParamAssignment::from_values(op, left).expect("crossover keeps ranges"),
        ParamAssignment::from_values(op, right).expect("crossover keeps ranges"),
    )
}

/// Resets each gene with probability `rate` to a fresh uniform draw in its
/// range; parity-constrained genes draw from odd values only.
pub fn mutate(x: &ParamAssignment, rate: f64, rng: &mut impl Rng) -> ParamAssignment {
    let op = x.algorithm();
    let specs = schema(op);
    let values = x
        .values()
        .iter()
        .zip(specs)
        .map(|(&v, spec)| if rng.gen::<f64>() < rate { random_gene(spec, rng) } else { v })
        .collect();
    ParamAssignment::from_values(op, values).expect("mutation keeps ranges")
}

/// One row of the evolution history.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationStat {
    pub generation: usize,
    /// Best (lowest) feasible f1; infinity if nothing feasible yet.
    pub best_f1: f64,
    /// Best aggregated match count, i.e. `-f2` of the best feasible f2.
    pub best_matches: f64,
    pub feasible_fraction: f64,
}

/// Everything a tuning run produces.
#[derive(Debug, Clone)]
pub struct TuneOutcome {
    /// Non-dominated front of the final population, duplicates removed.
    pub front: Vec<Individual>,
    pub history: Vec<GenerationStat>,
    /// Every assignment evaluated across the run, in evaluation order.
    pub evaluated: Vec<ParamAssignment>,
}

fn stats_for(generation: usize, pop: &[Individual]) -> GenerationStat {
    let feasible: Vec<&Individual> = pop.iter().filter(|i| i.feasible()).collect();
    GenerationStat {
        generation,
        best_f1: feasible.iter().map(|i| i.f1).fold(f64::INFINITY, f64::min),
        best_matches: feasible.iter().map(|i| -i.f2).fold(f64::NEG_INFINITY, f64::max),
        feasible_fraction: feasible.len() as f64 / pop.len() as f64,
    }
}

/// Full NSGA-II run for one operator over a document set. Deterministic per
/// `(inputs, config.seed)`: fitness evaluation is pure (and memoized per
/// distinct genome), and all random draws come from one seeded stream.
pub fn evolve(algorithm: Operator, env: &FitnessEnv, config: &TunerConfig) -> Result<TuneOutcome> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mutation_rate = config
        .mutation_rate
        .unwrap_or(1.0 / schema(algorithm).len() as f64);

    let mut cache: HashMap<Vec<i64>, (f64, f64, f64)> = HashMap::new();
    let mut evaluated: Vec<ParamAssignment> = Vec::new();
    let evaluate = |assignment: ParamAssignment,
                        cache: &mut HashMap<Vec<i64>, (f64, f64, f64)>,
                        evaluated: &mut Vec<ParamAssignment>|
     -> Individual {
        let key = assignment.values().to_vec();
        let (f1, f2, violation) = *cache
            .entry(key)
            .or_insert_with(|| evaluate_fitness(&assignment, env));
        evaluated.push(assignment.clone());
        Individual { assignment, f1, f2, violation, rank: 0, crowding: 0.0 }
    };

    let mut pop: Vec<Individual> = (0..config.population_size)
        .map(|_| {
            let a = random_assignment(algorithm, &mut rng);
            evaluate(a, &mut cache, &mut evaluated)
        })
        .collect();
    let fronts = fast_nondominated_sort(&mut pop);
    for front in &fronts {
        crowding_distance(front, &mut pop);
    }
    let mut history = vec![stats_for(0, &pop)];

    for generation in 1..=config.generations {
        let mut offspring = Vec::with_capacity(config.population_size);
        while offspring.len() < config.population_size {
            let p1 = tournament_select(&pop, &mut rng).assignment.clone();
            let p2 = tournament_select(&pop, &mut rng).assignment.clone();
            let (c1, c2) = crossover(&p1, &p2, config.crossover_rate, &mut rng);
            offspring.push(mutate(&c1, mutation_rate, &mut rng));
            offspring.push(mutate(&c2, mutation_rate, &mut rng));
        }
        let mut merged = pop;
        merged.extend(
            offspring
                .into_iter()
                .map(|a| evaluate(a, &mut cache, &mut evaluated)),
        );

        let fronts = fast_nondominated_sort(&mut merged);
        let mut next: Vec<Individual> = Vec::with_capacity(config.population_size);
        for front in &fronts {
            crowding_distance(front, &mut merged);
            if next.len() + front.len() <= config.population_size {
                for &i in front {
                    next.push(merged[i].clone());
                }
            } else {
                let mut order = front.clone();
                order.sort_by(|&a, &b| {
                    merged[b]
                        .crowding
                        .partial_cmp(&merged[a].crowding)
                        .unwrap()
                        .then(a.cmp(&b))
                });
                for i in order.into_iter().take(config.population_size - next.len()) {
                    next.push(merged[i].clone());
                }
            }
            if next.len() == config.population_size {
                break;
            }
        }
        pop = next;
        let fronts = fast_nondominated_sort(&mut pop);
        for front in &fronts {
            crowding_distance(front, &mut pop);
        }
        history.push(stats_for(generation, &pop));
    }

    let mut front: Vec<Individual> =
        pop.into_iter().filter(|i| i.rank == 0).collect();
    let mut seen = std::collections::HashSet::new();
    front.retain(|i| seen.insert(i.assignment.values().to_vec()));
    Ok(TuneOutcome { front, history, evaluated })
}

/// Deterministic pick from a front: minimum f1, ties to minimum f2, then the
/// lexicographically smallest assignment.
pub fn select_solution(front: &[Individual]) -> Option<&Individual> {
    front.iter().min_by(|a, b| {
        a.f1.partial_cmp(&b.f1)
            .unwrap()
            .then(a.f2.partial_cmp(&b.f2).unwrap())
            .then_with(|| a.assignment.values().cmp(b.assignment.values()))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn individual(f1: f64, f2: f64, violation: f64) -> Individual {
        Individual {
            assignment: crate::params::defaults(Operator::MedianBlur),
            f1,
            f2,
            violation,
            rank: 0,
            crowding: 0.0,
        }
    }

    #[test]
    fn sort_example_fronts() {
        let mut pop = vec![
            individual(1.0, 1.0, 0.0),
            individual(2.0, 2.0, 0.0),
            individual(0.0, 3.0, 0.0),
        ];
        let fronts = fast_nondominated_sort(&mut pop);
        assert_eq!(fronts, vec![vec![0, 2], vec![1]]);
        assert_eq!(pop[0].rank, 0);
        assert_eq!(pop[1].rank, 1);
        assert_eq!(pop[2].rank, 0);
    }

    #[test]
    fn identical_individuals_share_a_front() {
        let mut pop = vec![individual(1.0, 1.0, 0.0); 4];
        let fronts = fast_nondominated_sort(&mut pop);
        assert_eq!(fronts.len(), 1);
        assert_eq!(fronts[0].len(), 4);
    }

    #[test]
    fn feasible_dominates_infeasible() {
        let mut pop = vec![individual(100.0, 100.0, 0.0), individual(0.0, 0.0, 1.0)];
        let fronts = fast_nondominated_sort(&mut pop);
        assert_eq!(fronts, vec![vec![0], vec![1]]);
        // among infeasible, lower violation wins
        assert!(constraint_dominates(&individual(9.0, 9.0, 1.0), &individual(0.0, 0.0, 2.0)));
    }

    #[test]
    fn crowding_middle_of_collinear_triple() {
        let mut pop = vec![
            individual(0.0, 2.0, 0.0),
            individual(1.0, 1.0, 0.0),
            individual(2.0, 0.0, 0.0),
        ];
        let front: Vec<usize> = vec![0, 1, 2];
        crowding_distance(&front, &mut pop);
        assert!(pop[0].crowding.is_infinite());
        assert!(pop[2].crowding.is_infinite());
        assert_eq!(pop[1].crowding, 2.0);
    }

    #[test]
    fn crowding_small_fronts_and_identicals() {
        let mut pop = vec![individual(1.0, 1.0, 0.0), individual(2.0, 0.0, 0.0)];
        crowding_distance(&[0, 1], &mut pop);
        assert!(pop[0].crowding.is_infinite() && pop[1].crowding.is_infinite());

        let mut pop = vec![individual(1.0, 1.0, 0.0); 5];
        crowding_distance(&[0, 1, 2, 3, 4], &mut pop);
        // boundaries infinite, interiors zero (zero objective ranges)
        let infinite = pop.iter().filter(|i| i.crowding.is_infinite()).count();
        assert_eq!(infinite, 2);
        assert!(pop.iter().filter(|i| i.crowding.is_finite()).all(|i| i.crowding == 0.0));
    }

    #[test]
    fn tournament_prefers_rank_then_crowding() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        // the rank-1 member can only win when both draws pick it, i.e. in
        // about a quarter of trials; mixed draws must go to rank 0
        let mut a = individual(1.0, 1.0, 0.0);
        a.rank = 0;
        a.crowding = 0.5;
        let mut b = individual(2.0, 2.0, 0.0);
        b.rank = 1;
        b.crowding = f64::INFINITY;
        let pop = vec![a, b];
        let rank1_wins = (0..10_000)
            .filter(|_| tournament_select(&pop, &mut rng).rank == 1)
            .count();
        assert!((2_200..=2_800).contains(&rank1_wins), "rank1 won {rank1_wins}");

        // equal ranks: infinite crowding beats finite on every mixed draw
        let mut a = individual(1.0, 1.0, 0.0);
        a.crowding = f64::INFINITY;
        let mut b = individual(1.0, 1.0, 0.0);
        b.crowding = 0.5;
        let pop = vec![a, b];
        let finite_wins = (0..10_000)
            .filter(|_| tournament_select(&pop, &mut rng).crowding.is_finite())
            .count();
        assert!((2_200..=2_800).contains(&finite_wins), "finite won {finite_wins}");
    }

    #[test]
    fn tournament_coin_flip_is_balanced() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut wins = [0usize; 2];
        let a = individual(1.0, 1.0, 0.0);
        let b = individual(1.0, 1.0, 0.0);
        let pop = vec![a, b];
        // count how often each slot's address wins among equal competitors
        for _ in 0..10_000 {
            let winner = tournament_select(&pop, &mut rng);
            let idx = if std::ptr::eq(winner, &pop[0]) { 0 } else { 1 };
            wins[idx] += 1;
        }
        let ratio = wins[0] as f64 / 10_000.0;
        assert!((0.45..=0.55).contains(&ratio), "wins {wins:?}");
    }

    #[test]
    fn crossover_rate_zero_copies_parents() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = crate::params::defaults(Operator::BoxBlur);
        let b = crate::params::random_assignment(Operator::BoxBlur, &mut rng);
        let (c1, c2) = crossover(&a, &b, 0.0, &mut rng);
        assert_eq!(c1, a);
        assert_eq!(c2, b);
    }

    #[test]
    fn mutation_rate_one_is_uniform_over_range() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let base = crate::params::defaults(Operator::MedianBlur);
        let mut counts = std::collections::HashMap::new();
        let n = 16_000;
        for _ in 0..n {
            let m = mutate(&base, 1.0, &mut rng);
            *counts.entry(m.get("ksize").unwrap()).or_insert(0usize) += 1;
        }
        // 16 odd values in [1,31]; chi-square 15 dof at alpha 0.01 is 30.578
        assert_eq!(counts.len(), 16);
        let expected = n as f64 / 16.0;
        let chi2: f64 = counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        assert!(chi2 < 30.578, "chi2 {chi2}");
    }

    #[test]
    fn mutation_never_breaks_parity() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let base = crate::params::defaults(Operator::GaussianBlur);
        for _ in 0..10_000 {
            let m = mutate(&base, 1.0, &mut rng);
            assert_eq!(m.get("ksize").unwrap() % 2, 1);
        }
    }

    #[test]
    fn select_solution_rules() {
        let mut a = individual(5.0, -10.0, 0.0);
        let mut b = individual(5.0, -12.0, 0.0);
        a.assignment = ParamAssignment::from_values(Operator::MedianBlur, vec![3]).unwrap();
        b.assignment = ParamAssignment::from_values(Operator::MedianBlur, vec![5]).unwrap();
        let front = vec![a.clone(), b.clone()];
        assert_eq!(select_solution(&front).unwrap().f2, -12.0);

        let c = individual(3.0, -1.0, 0.0);
        let d = individual(4.0, -20.0, 0.0);
        let front = vec![d, c];
        assert_eq!(select_solution(&front).unwrap().f1, 3.0);

        let single = vec![individual(9.0, 9.0, 0.0)];
        assert_eq!(select_solution(&single).unwrap().f1, 9.0);
        assert!(select_solution(&[]).is_none());

        // full tie falls to the lexicographically smaller assignment
        let mut e = individual(1.0, 1.0, 0.0);
        e.assignment = ParamAssignment::from_values(Operator::MedianBlur, vec![7]).unwrap();
        let mut f = individual(1.0, 1.0, 0.0);
        f.assignment = ParamAssignment::from_values(Operator::MedianBlur, vec![3]).unwrap();
        let front = vec![e, f];
        assert_eq!(select_solution(&front).unwrap().assignment.values(), &[3]);
    }

    fn synthetic_corpus(
        dir: &std::path::Path,
        noise_p: f64,
        count: usize,
    ) -> Vec<crate::corpus::Document> {
        use crate::corpus::{generate_synthetic, SynthSpec, Typology};
        let spec = SynthSpec {
            count,
            mix: std::collections::BTreeMap::from([(Typology::Letter, 1.0)]),
            noise: crate::ocr::NoiseProfile {
                salt_pepper_p: noise_p,
                contrast_scale: 1.0,
                background: 255,
            },
            seed: 17,
        };
        generate_synthetic(dir, &spec).unwrap()
    }

    #[test]
    fn fitness_of_perfect_recognition() {
        use crate::ocr::{MockEngine, OcrEngine};
        let dir = tempfile::tempdir().unwrap();
        let docs = synthetic_corpus(dir.path(), 0.0, 4);
        let engine = OcrEngine::Mock(MockEngine::new(1));
        let env = FitnessEnv::load(&docs, &engine, Aggregation::Sum).unwrap();
        let identity = ParamAssignment::from_values(Operator::MedianBlur, vec![1]).unwrap();
        let (f1, f2, violation) = evaluate_fitness(&identity, &env);
        assert_eq!(f1, 0.0);
        let distinct_total: usize = docs
            .iter()
            .map(|d| {
                let gt = std::fs::read_to_string(&d.transcription_path).unwrap();
                gt.split_whitespace().collect::<std::collections::HashSet<_>>().len()
            })
            .sum();
        assert_eq!(f2, -(distinct_total as f64));
        assert_eq!(violation, 0.0);
        // mean aggregation divides by the document count
        let env = FitnessEnv::load(&docs, &engine, Aggregation::Mean).unwrap();
        let (f1, f2, _) = evaluate_fitness(&identity, &env);
        assert_eq!(f1, 0.0);
        assert_eq!(f2, -(distinct_total as f64) / 4.0);
    }

    #[test]
    fn engine_failure_scores_worst_case() {
        use crate::ocr::{ExternalEngine, OcrEngine};
        let dir = tempfile::tempdir().unwrap();
        let docs = synthetic_corpus(dir.path(), 0.0, 3);
        let engine = OcrEngine::External(ExternalEngine {
            binary: "/nonexistent/ocr-binary".into(),
            language: "por".into(),
            extra_args: vec![],
        });
        let env = FitnessEnv::load(&docs, &engine, Aggregation::Sum).unwrap();
        let identity = ParamAssignment::from_values(Operator::MedianBlur, vec![1]).unwrap();
        let (f1, f2, _) = evaluate_fitness(&identity, &env);
        let gt_chars: usize = docs
            .iter()
            .map(|d| std::fs::read_to_string(&d.transcription_path).unwrap().chars().count())
            .sum();
        assert_eq!(f1, gt_chars as f64);
        assert_eq!(f2, 0.0);
    }

    #[test]
    fn fitness_matches_hand_run_pipeline_on_one_document() {
        use crate::ocr::{MockEngine, OcrEngine};
        let dir = tempfile::tempdir().unwrap();
        let docs = synthetic_corpus(dir.path(), 0.25, 1);
        let mock = MockEngine::new(5);
        let engine = OcrEngine::Mock(mock);
        let env = FitnessEnv::load(&docs, &engine, Aggregation::Sum).unwrap();
        let assignment = ParamAssignment::from_values(Operator::MedianBlur, vec![3]).unwrap();
        let (f1, f2, _) = evaluate_fitness(&assignment, &env);
        // run the stages by hand
        let raster = crate::pgm::read_p5(&docs[0].image_path).unwrap();
        let gt = std::fs::read_to_string(&docs[0].transcription_path).unwrap();
        let filtered = crate::imaging::median_blur(&raster, 3).unwrap();
        let text = mock.recognize(&filtered);
        assert_eq!(f1, crate::metrics::levenshtein(&gt, &text).distance as f64);
        assert_eq!(f2, -(crate::metrics::bow_count_matches(&gt, &text) as f64));
    }

    #[test]
    fn evolve_is_deterministic_and_elitist() {
        use crate::ocr::{MockEngine, OcrEngine};
        let dir = tempfile::tempdir().unwrap();
        let docs = synthetic_corpus(dir.path(), 0.15, 6);
        let engine = OcrEngine::Mock(MockEngine::new(1));
        let env = FitnessEnv::load(&docs, &engine, Aggregation::Sum).unwrap();
        let mut config = TunerConfig::new(9);
        config.population_size = 8;
        config.generations = 6;
        let a = evolve(Operator::MedianBlur, &env, &config).unwrap();
        let b = evolve(Operator::MedianBlur, &env, &config).unwrap();
        assert_eq!(a.history, b.history);
        assert_eq!(a.evaluated, b.evaluated);
        let fronts_match = a
            .front
            .iter()
            .zip(&b.front)
            .all(|(x, y)| x.assignment == y.assignment && x.f1 == y.f1 && x.f2 == y.f2);
        assert!(fronts_match && a.front.len() == b.front.len());
        // the best feasible f1 is never lost between generations
        assert_eq!(a.history.len(), config.generations + 1);
        for pair in a.history.windows(2) {
            assert!(pair[1].best_f1 <= pair[0].best_f1, "{:?}", a.history);
        }
        // every individual of every generation stayed in range and odd
        for assignment in &a.evaluated {
            let k = assignment.get("ksize").unwrap();
            assert!((1..=31).contains(&k) && k % 2 == 1);
        }
    }

    #[test]
    fn evolve_zero_generations_returns_initial_front() {
        use crate::ocr::{MockEngine, OcrEngine};
        let dir = tempfile::tempdir().unwrap();
        let docs = synthetic_corpus(dir.path(), 0.1, 3);
        let engine = OcrEngine::Mock(MockEngine::new(1));
        let env = FitnessEnv::load(&docs, &engine, Aggregation::Sum).unwrap();
        let mut config = TunerConfig::new(4);
        config.population_size = 6;
        config.generations = 0;
        let outcome = evolve(Operator::BoxBlur, &env, &config).unwrap();
        assert_eq!(outcome.history.len(), 1);
        assert_eq!(outcome.evaluated.len(), 6);
        assert!(!outcome.front.is_empty());
        for member in &outcome.front {
            assert_eq!(member.rank, 0);
        }
    }

    #[test]
    fn config_validation() {
        let dir = tempfile::tempdir().unwrap();
        let docs = synthetic_corpus(dir.path(), 0.0, 2);
        use crate::ocr::{MockEngine, OcrEngine};
        let engine = OcrEngine::Mock(MockEngine::new(1));
        let env = FitnessEnv::load(&docs, &engine, Aggregation::Sum).unwrap();
        let mut odd_pop = TunerConfig::new(1);
        odd_pop.population_size = 7;
        assert!(evolve(Operator::MedianBlur, &env, &odd_pop).is_err());
        let mut bad_rate = TunerConfig::new(1);
        bad_rate.crossover_rate = 1.5;
        assert!(evolve(Operator::MedianBlur, &env, &bad_rate).is_err());
    }

    /// Brute-force front extraction: peel non-dominated layers repeatedly.
    fn brute_force_fronts(pop: &[Individual]) -> Vec<Vec<usize>> {
        let mut remaining: Vec<usize> = (0..pop.len()).collect();
        let mut fronts = Vec::new();
        while !remaining.is_empty() {
            let layer: Vec<usize> = remaining
                .iter()
                .copied()
                .filter(|&i| {
                    !remaining.iter().any(|&j| j != i && constraint_dominates(&pop[j], &pop[i]))
                })
                .collect();
            remaining.retain(|i| !layer.contains(i));
            fronts.push(layer);
        }
        fronts
    }

    #[test]
    fn sort_matches_brute_force_on_random_populations() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..40 {
            let size = rng.gen_range(2..=32);
            let mut pop: Vec<Individual> = (0..size)
                .map(|_| {
                    let violation = if rng.gen::<f64>() < 0.3 { rng.gen_range(1..=3) as f64 } else { 0.0 };
                    individual(
                        rng.gen_range(0..6) as f64,
                        rng.gen_range(0..6) as f64,
                        violation,
                    )
                })
                .collect();
            let expected = brute_force_fronts(&pop);
            let got = fast_nondominated_sort(&mut pop);
            assert_eq!(got, expected);
        }
    }
}
