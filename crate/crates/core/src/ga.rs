//! Genetic algorithm over rule tables.
//!
//! One generation:
//!
//! 1. score any unevaluated member,
//! 2. pick parents: the elite plus an equal number drawn from the rest,
//! 3. breed `2 * |parents|` children by crossover and score them,
//! 4. mutate every child and re-score the ones that changed,
//! 5. keep the best fraction of `children ++ members`, fill the rest at random.
//!
//! All randomness comes from one ChaCha8 stream owned by [`Evolution`] and is
//! consumed on the calling thread in a fixed order, so fitness evaluation may
//! run on any number of threads without changing the outcome.

use std::time::Instant;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ca::{random_rule, RuleTable, RULE_COUNT};
use crate::fitness::{Evaluator, FitnessValue};
use crate::grid::{BinaryGrid, GridError};

/// Smallest population the parent scheme supports.
pub const MIN_POPULATION: usize = 4;

/// Window codes with a single bit set: 2^0 ..= 2^8.
pub const BASIC_RULES: [usize; 9] = [1, 2, 4, 8, 16, 32, 64, 128, 256];

/// Pair sums zeroed per firing of [`mutate_type2`].
pub const BASIC_PAIR_DRAWS: usize = 4;

#[derive(Debug, Error)]
pub enum GaError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("member {index} has no fitness")]
    Unevaluated { index: usize },
    #[error("pool of {actual} is too small, need at least {needed}")]
    PoolTooSmall { needed: usize, actual: usize },
    #[error("offspring count {0} must be even")]
    OddOffspringCount(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossoverKind {
    OnePoint,
    TwoPoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MutationKind {
    /// Fitness-proportional zeroing, with a set-to-one push when stagnant.
    Type1,
    /// Zeroing of the single-bit codes and a few of their pair sums.
    Type2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub population_size: usize,
    pub generations: usize,
    pub passes: usize,
    pub crossover: CrossoverKind,
    pub mutation: MutationKind,
    pub elite_fraction: f64,
    pub survivor_best_fraction: f64,
    /// Probability that a mutation operator fires at all.
    pub mutation_gate: f64,
    /// Type 1: genes zeroed = ceil(normalized * zeroing_scale * 512).
    pub zeroing_scale: f64,
    /// Type 1 when stagnant: genes set = ceil(normalized * push_scale * 512).
    pub push_scale: f64,
    /// Generations without a best-fitness improvement before type 1 pushes.
    pub stagnation_window: usize,
    pub seed: u64,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            population_size: 10,
            generations: 5,
            passes: 1,
            crossover: CrossoverKind::TwoPoint,
            mutation: MutationKind::Type1,
            elite_fraction: 0.2,
            survivor_best_fraction: 0.2,
            mutation_gate: 0.5,
            zeroing_scale: 0.25,
            push_scale: 1.0,
            stagnation_window: 2,
            seed: 0,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<(), GaError> {
        let bad = |msg: String| Err(GaError::Config(msg));
        if self.population_size < MIN_POPULATION {
            return bad(format!(
                "population_size {} is below {MIN_POPULATION}",
                self.population_size
            ));
        }
        if self.generations < 1 {
            return bad("generations must be at least 1".into());
        }
        if self.passes < 1 {
            return bad("passes must be at least 1".into());
        }
        for (name, v) in [
            ("elite_fraction", self.elite_fraction),
            ("survivor_best_fraction", self.survivor_best_fraction),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return bad(format!("{name} {v} must lie in (0, 1)"));
            }
        }
        for (name, v) in [
            ("mutation_gate", self.mutation_gate),
            ("zeroing_scale", self.zeroing_scale),
            ("push_scale", self.push_scale),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} {v} must lie in [0, 1]"));
            }
        }
        if self.stagnation_window < 1 {
            return bad("stagnation_window must be at least 1".into());
        }
        if elite_count(self.elite_fraction, self.population_size) < 1 {
            return bad("elite fraction selects no parents".into());
        }
        Ok(())
    }

    fn type1(&self) -> Type1Params {
        Type1Params {
            gate: self.mutation_gate,
            zeroing_scale: self.zeroing_scale,
            push_scale: self.push_scale,
        }
    }
}

/// A rule table and, once scored, its fitness.
#[derive(Clone, Debug, PartialEq)]
pub struct Individual {
    genome: RuleTable,
    fitness: Option<FitnessValue>,
}

impl Individual {
    pub fn new(genome: RuleTable) -> Self {
        Self {
            genome,
            fitness: None,
        }
    }

    pub fn with_fitness(genome: RuleTable, fitness: FitnessValue) -> Self {
        Self {
            genome,
            fitness: Some(fitness),
        }
    }

    pub fn genome(&self) -> &RuleTable {
        &self.genome
    }

    pub fn fitness(&self) -> Option<FitnessValue> {
        self.fitness
    }

    pub fn distance(&self) -> Option<u64> {
        self.fitness.map(|f| f.distance)
    }

    pub fn set_fitness(&mut self, fitness: FitnessValue) {
        self.fitness = Some(fitness);
    }

    pub fn clear_fitness(&mut self) {
        self.fitness = None;
    }

    /// Writes `state` at every index; drops the fitness if anything changed.
    fn set_genes(&mut self, indices: impl IntoIterator<Item = usize>, state: bool) -> bool {
        let mut changed = false;
        for i in indices {
            if self.genome.get(i) != state as u8 {
                self.genome.set(i, state);
                changed = true;
            }
        }
        if changed {
            self.fitness = None;
        }
        changed
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Population {
    pub members: Vec<Individual>,
    pub generation: u64,
    pub seed: u64,
}

impl Population {
    pub fn random<R: Rng + ?Sized>(size: usize, seed: u64, rng: &mut R) -> Self {
        Self {
            members: (0..size).map(|_| Individual::new(random_rule(rng))).collect(),
            generation: 0,
            seed,
        }
    }

    /// Fresh random population drawn from a generator seeded with `seed`.
    pub fn from_seed(size: usize, seed: u64) -> Self {
        Self::random(size, seed, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Lowest-distance evaluated member, ties to the lower index.
    pub fn best(&self) -> Option<(usize, &Individual)> {
        self.members
            .iter()
            .enumerate()
            .filter(|(_, m)| m.fitness.is_some())
            .min_by_key(|(i, m)| (m.distance(), *i))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: u64,
    pub best_fitness: u64,
    pub average_fitness: f64,
    pub elapsed_seconds: f64,
}

/// `ceil(x)` that ignores floating-point noise just above an integer.
fn ceil_count(x: f64) -> usize {
    let nearest = x.round();
    if (x - nearest).abs() < 1e-9 {
        nearest as usize
    } else {
        x.ceil() as usize
    }
}

fn elite_count(fraction: f64, n: usize) -> usize {
    ceil_count(fraction * n as f64).min(n)
}

/// Indices sorted by ascending distance, ties to the lower index.
fn ranked(pool: &[Individual]) -> Result<Vec<usize>, GaError> {
    let mut keyed = Vec::with_capacity(pool.len());
    for (index, ind) in pool.iter().enumerate() {
        let d = ind.distance().ok_or(GaError::Unevaluated { index })?;
        keyed.push((d, index));
    }
    keyed.sort_unstable();
    Ok(keyed.into_iter().map(|(_, i)| i).collect())
}

/// Takes the `best` top-ranked entries, then `extra` more uniformly without
/// replacement from the remainder (in draw order).
fn elite_plus_random<R: Rng + ?Sized>(
    pool: &[Individual],
    best: usize,
    extra: usize,
    rng: &mut R,
) -> Result<Vec<Individual>, GaError> {
    let order = ranked(pool)?;
    let (elite, rest) = order.split_at(best);
    let mut out: Vec<Individual> = elite.iter().map(|&i| pool[i].clone()).collect();
    let mut rest = rest.to_vec();
    // Draws index into the rest in original pool order.
    rest.sort_unstable();
    out.extend(
        index::sample(rng, rest.len(), extra)
            .into_iter()
            .map(|j| pool[rest[j]].clone()),
    );
    Ok(out)
}

/// Elite parents (`ceil(elite_fraction * N)` best) plus the same number drawn
/// uniformly from the non-elite members, capped by how many remain.
pub fn select_parents<R: Rng + ?Sized>(
    members: &[Individual],
    elite_fraction: f64,
    rng: &mut R,
) -> Result<Vec<Individual>, GaError> {
    let n = members.len();
    let elite = elite_count(elite_fraction, n).max(1);
    if n < 2 {
        return Err(GaError::PoolTooSmall {
            needed: 2,
            actual: n,
        });
    }
    elite_plus_random(members, elite, elite.min(n - elite), rng)
}

/// Children `p1[..k] ++ p2[k..]` and `p2[..k] ++ p1[k..]`.
pub fn one_point_at(p1: &RuleTable, p2: &RuleTable, cut: usize) -> (RuleTable, RuleTable) {
    two_point_at(p1, p2, cut, RULE_COUNT)
}

/// Swaps the segment `[k1, k2)` between the parents.
pub fn two_point_at(
    p1: &RuleTable,
    p2: &RuleTable,
    k1: usize,
    k2: usize,
) -> (RuleTable, RuleTable) {
    assert!(k1 <= k2 && k2 <= RULE_COUNT);
    let (mut c1, mut c2) = (p1.clone(), p2.clone());
    for i in k1..k2 {
        c1.set(i, p2.get(i) == 1);
        c2.set(i, p1.get(i) == 1);
    }
    (c1, c2)
}

/// Cut point uniform in `1..=511`.
pub fn crossover_one_point<R: Rng + ?Sized>(
    p1: &RuleTable,
    p2: &RuleTable,
    rng: &mut R,
) -> (RuleTable, RuleTable) {
    let cut = rng.gen_range(1..RULE_COUNT);
    one_point_at(p1, p2, cut)
}

/// Two distinct cut points uniform in `1..=511`.
pub fn crossover_two_point<R: Rng + ?Sized>(
    p1: &RuleTable,
    p2: &RuleTable,
    rng: &mut R,
) -> (RuleTable, RuleTable) {
    let cuts = index::sample(rng, RULE_COUNT - 1, 2);
    let (a, b) = (cuts.index(0) + 1, cuts.index(1) + 1);
    two_point_at(p1, p2, a.min(b), a.max(b))
}

pub fn crossover<R: Rng + ?Sized>(
    kind: CrossoverKind,
    p1: &RuleTable,
    p2: &RuleTable,
    rng: &mut R,
) -> (RuleTable, RuleTable) {
    match kind {
        CrossoverKind::OnePoint => crossover_one_point(p1, p2, rng),
        CrossoverKind::TwoPoint => crossover_two_point(p1, p2, rng),
    }
}

/// `count / 2` times: two distinct parents, one crossover, both children kept.
pub fn make_offspring<R: Rng + ?Sized>(
    pool: &[Individual],
    count: usize,
    kind: CrossoverKind,
    rng: &mut R,
) -> Result<Vec<Individual>, GaError> {
    if pool.len() < 2 {
        return Err(GaError::PoolTooSmall {
            needed: 2,
            actual: pool.len(),
        });
    }
    if !count.is_multiple_of(2) {
        return Err(GaError::OddOffspringCount(count));
    }
    let mut children = Vec::with_capacity(count);
    for _ in 0..count / 2 {
        let pick = index::sample(rng, pool.len(), 2);
        let (a, b) = (&pool[pick.index(0)].genome, &pool[pick.index(1)].genome);
        let (c1, c2) = crossover(kind, a, b, rng);
        children.push(Individual::new(c1));
        children.push(Individual::new(c2));
    }
    Ok(children)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Type1Params {
    pub gate: f64,
    pub zeroing_scale: f64,
    pub push_scale: f64,
}

impl Default for Type1Params {
    fn default() -> Self {
        let c = EvolutionConfig::default();
        c.type1()
    }
}

fn sample_genes<R: Rng + ?Sized>(rng: &mut R, amount: usize) -> Vec<usize> {
    index::sample(rng, RULE_COUNT, amount.min(RULE_COUNT)).into_vec()
}

/// Fitness-adaptive mutation.
///
/// Stagnant: `ceil(normalized * push_scale * 512)` random genes are set to 1.
/// Otherwise, with probability `gate`, `ceil(normalized * zeroing_scale * 512)`
/// random genes are set to 0. Worse fitness touches more genes.
pub fn mutate_type1<R: Rng + ?Sized>(
    mut ind: Individual,
    normalized_fitness: f64,
    stagnant: bool,
    params: &Type1Params,
    rng: &mut R,
) -> Individual {
    let normalized = normalized_fitness.clamp(0.0, 1.0);
    let scale = RULE_COUNT as f64;
    if stagnant {
        let genes = sample_genes(rng, ceil_count(normalized * params.push_scale * scale));
        ind.set_genes(genes, true);
    } else if rng.gen::<f64>() < params.gate {
        let genes = sample_genes(rng, ceil_count(normalized * params.zeroing_scale * scale));
        ind.set_genes(genes, false);
    }
    ind
}

/// Basic-rule mutation: with probability `gate`, zero the nine single-bit
/// codes, then zero `2^a + 2^b` for four random distinct pairs `a != b`.
pub fn mutate_type2<R: Rng + ?Sized>(mut ind: Individual, gate: f64, rng: &mut R) -> Individual {
    if rng.gen::<f64>() >= gate {
        return ind;
    }
    ind.set_genes(BASIC_RULES, false);
    for _ in 0..BASIC_PAIR_DRAWS {
        let pick = index::sample(rng, BASIC_RULES.len(), 2);
        let code = BASIC_RULES[pick.index(0)] + BASIC_RULES[pick.index(1)];
        ind.set_genes([code], false);
    }
    ind
}

/// `ceil(best_fraction * target)` best by fitness (ties to the lower pool
/// index), then the rest of `target` uniformly without replacement.
pub fn select_survivors<R: Rng + ?Sized>(
    pool: &[Individual],
    target: usize,
    best_fraction: f64,
    rng: &mut R,
) -> Result<Vec<Individual>, GaError> {
    if pool.len() < target {
        return Err(GaError::PoolTooSmall {
            needed: target,
            actual: pool.len(),
        });
    }
    let best = elite_count(best_fraction, target).max(1).min(target);
    elite_plus_random(pool, best, target - best, rng)
}

#[derive(Clone, Debug)]
pub struct EvolutionOutcome {
    pub best: Individual,
    pub stats: Vec<GenerationStats>,
    pub population: Population,
    /// CA runs performed, excluding cache hits.
    pub evaluations: u64,
}

/// A running GA: owns the population, the evaluator and the RNG stream.
pub struct Evolution {
    config: EvolutionConfig,
    evaluator: Evaluator,
    rng: ChaCha8Rng,
    population: Population,
    best: Option<Individual>,
    last_best: Option<u64>,
    stalled: usize,
    stats: Vec<GenerationStats>,
}

impl Evolution {
    /// Seeds the generator from `config.seed` and draws a random population.
    pub fn new(
        config: EvolutionConfig,
        start: BinaryGrid,
        goal: BinaryGrid,
    ) -> Result<Self, GaError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let population = Population::random(config.population_size, config.seed, &mut rng);
        Self::build(config, start, goal, population, rng)
    }

    /// Continues from a stored population. Cached fitness values are
    /// discarded and recomputed. The generator uses `config.seed` on a stream
    /// selected by the population's generation counter.
    pub fn resume(
        config: EvolutionConfig,
        start: BinaryGrid,
        goal: BinaryGrid,
        mut population: Population,
    ) -> Result<Self, GaError> {
        config.validate()?;
        if population.len() != config.population_size {
            return Err(GaError::Config(format!(
                "population has {} members but population_size is {}",
                population.len(),
                config.population_size
            )));
        }
        population.members.iter_mut().for_each(Individual::clear_fitness);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(population.generation);
        Self::build(config, start, goal, population, rng)
    }

    fn build(
        config: EvolutionConfig,
        start: BinaryGrid,
        goal: BinaryGrid,
        population: Population,
        rng: ChaCha8Rng,
    ) -> Result<Self, GaError> {
        let evaluator = Evaluator::new(start, goal, config.passes)?;
        Ok(Self {
            config,
            evaluator,
            rng,
            population,
            best: None,
            last_best: None,
            stalled: 0,
            stats: Vec::new(),
        })
    }

    pub fn config(&self) -> &EvolutionConfig {
        &self.config
    }

    pub fn population(&self) -> &Population {
        &self.population
    }

    pub fn stats(&self) -> &[GenerationStats] {
        &self.stats
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluator.computed()
    }

    fn score_unevaluated(&mut self, inds: &mut [Individual]) {
        let pending: Vec<usize> = (0..inds.len())
            .filter(|&i| inds[i].fitness.is_none())
            .collect();
        let genomes: Vec<RuleTable> = pending.iter().map(|&i| inds[i].genome.clone()).collect();
        let scores = self.evaluator.evaluate_batch(&genomes);
        for (i, f) in pending.into_iter().zip(scores) {
            inds[i].fitness = Some(f);
        }
    }

    fn note_best(&mut self, members: &[Individual]) {
        let Some(candidate) = members
            .iter()
            .filter(|m| m.fitness.is_some())
            .min_by_key(|m| m.distance())
        else {
            return;
        };
        if self
            .best
            .as_ref()
            .is_none_or(|b| candidate.distance() < b.distance())
        {
            self.best = Some(candidate.clone());
        }
    }

    /// Runs one generation and returns its statistics.
    pub fn step(&mut self) -> Result<GenerationStats, GaError> {
        let started = Instant::now();
        let mut members = std::mem::take(&mut self.population.members);
        self.score_unevaluated(&mut members);
        self.note_best(&members);
        if self.last_best.is_none() {
            self.last_best = self.best.as_ref().and_then(Individual::distance);
        }
        let stagnant = self.stalled >= self.config.stagnation_window;

        let parents = select_parents(&members, self.config.elite_fraction, &mut self.rng)?;
        let mut offspring = make_offspring(
            &parents,
            2 * parents.len(),
            self.config.crossover,
            &mut self.rng,
        )?;
        self.score_unevaluated(&mut offspring);

        let type1 = self.config.type1();
        let mut mutated: Vec<Individual> = Vec::with_capacity(offspring.len());
        for child in offspring {
            let normalized = child.fitness.map_or(1.0, |f| f.normalized);
            mutated.push(match self.config.mutation {
                MutationKind::Type1 => {
                    mutate_type1(child, normalized, stagnant, &type1, &mut self.rng)
                }
                MutationKind::Type2 => {
                    mutate_type2(child, self.config.mutation_gate, &mut self.rng)
                }
            });
        }
        self.score_unevaluated(&mut mutated);

        mutated.extend(members);
        let survivors = select_survivors(
            &mutated,
            self.config.population_size,
            self.config.survivor_best_fraction,
            &mut self.rng,
        )?;
        self.note_best(&survivors);

        let distances: Vec<u64> = survivors.iter().filter_map(Individual::distance).collect();
        let best_fitness = *distances.iter().min().expect("non-empty population");
        let average_fitness = distances.iter().sum::<u64>() as f64 / distances.len() as f64;

        if self.last_best.is_some_and(|prev| best_fitness < prev) {
            self.stalled = 0;
        } else {
            self.stalled += 1;
        }
        self.last_best = Some(best_fitness);

        let stats = GenerationStats {
            generation: self.population.generation,
            best_fitness,
            average_fitness,
            elapsed_seconds: started.elapsed().as_secs_f64(),
        };
        self.population.members = survivors;
        self.population.generation += 1;
        self.stats.push(stats.clone());
        Ok(stats)
    }

    /// Runs the configured number of generations.
    pub fn run(mut self) -> Result<EvolutionOutcome, GaError> {
        for _ in 0..self.config.generations {
            self.step()?;
        }
        Ok(self.finish())
    }

    pub fn finish(self) -> EvolutionOutcome {
        let best = self
            .best
            .or_else(|| self.population.best().map(|(_, b)| b.clone()))
            .unwrap_or_else(|| self.population.members[0].clone());
        EvolutionOutcome {
            best,
            stats: self.stats,
            population: self.population,
            evaluations: self.evaluator.computed(),
        }
    }
}

/// Evolves a fresh random population for `config.generations` generations.
pub fn evolve(
    config: &EvolutionConfig,
    start: &BinaryGrid,
    goal: &BinaryGrid,
) -> Result<EvolutionOutcome, GaError> {
    start.check_same_shape(goal)?;
    Evolution::new(config.clone(), start.clone(), goal.clone())?.run()
}
