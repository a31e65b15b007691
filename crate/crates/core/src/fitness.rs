//! Hamming-distance fitness of a rule table against a goal image.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ca::{run, RuleTable};
use crate::grid::{hamming, BinaryGrid, GridError};

/// Distance to the goal image; lower is better.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitnessValue {
    pub distance: u64,
    pub normalized: f64,
}

impl FitnessValue {
    /// Builds a value for a grid of `cells` cells. Panics if `distance > cells`.
    pub fn new(distance: u64, cells: u64) -> Self {
        assert!(cells > 0 && distance <= cells, "distance {distance} out of range for {cells} cells");
        Self {
            distance,
            normalized: distance as f64 / cells as f64,
        }
    }
}

/// `hamming(run(start, rule, passes), goal)`.
pub fn evaluate(
    rule: &RuleTable,
    start: &BinaryGrid,
    goal: &BinaryGrid,
    passes: usize,
) -> Result<FitnessValue, GridError> {
    start.check_same_shape(goal)?;
    let result = run(start, rule, passes);
    let distance = hamming(&result, goal)?;
    Ok(FitnessValue::new(distance, goal.len() as u64))
}

/// Scores rule tables against a fixed start/goal pair.
///
/// Results are memoized by genome; the pass count is fixed per evaluator, so
/// the key is effectively `(genome, passes)`. Batches run in parallel on the
/// current rayon pool and the outcome does not depend on its size.
#[derive(Debug)]
pub struct Evaluator {
    start: BinaryGrid,
    goal: BinaryGrid,
    passes: usize,
    cache: HashMap<[u64; 8], FitnessValue>,
    computed: u64,
}

impl Evaluator {
    pub fn new(start: BinaryGrid, goal: BinaryGrid, passes: usize) -> Result<Self, GridError> {
        assert!(passes >= 1, "evaluator needs at least one pass");
        start.check_same_shape(&goal)?;
        Ok(Self {
            start,
            goal,
            passes,
            cache: HashMap::new(),
            computed: 0,
        })
    }

    pub fn start(&self) -> &BinaryGrid {
        &self.start
    }

    pub fn goal(&self) -> &BinaryGrid {
        &self.goal
    }

    pub fn passes(&self) -> usize {
        self.passes
    }

    /// Number of CA runs actually performed (cache misses).
    pub fn computed(&self) -> u64 {
        self.computed
    }

    fn score(&self, rule: &RuleTable) -> FitnessValue {
        let result = run(&self.start, rule, self.passes);
        let distance = result
            .cells()
            .iter()
            .zip(self.goal.cells())
            .filter(|(a, b)| a != b)
            .count() as u64;
        FitnessValue::new(distance, self.goal.len() as u64)
    }

    pub fn evaluate(&mut self, rule: &RuleTable) -> FitnessValue {
        self.evaluate_batch(std::slice::from_ref(rule))[0]
    }

    /// Scores every table, running cache misses in parallel.
    pub fn evaluate_batch(&mut self, rules: &[RuleTable]) -> Vec<FitnessValue> {
        let keys: Vec<[u64; 8]> = rules.iter().map(RuleTable::packed).collect();
        let mut pending: Vec<usize> = Vec::new();
        let mut queued = std::collections::HashSet::new();
        for (i, key) in keys.iter().enumerate() {
            if !self.cache.contains_key(key) && queued.insert(*key) {
                pending.push(i);
            }
        }
        let fresh: Vec<FitnessValue> = pending
            .par_iter()
            .map(|&i| self.score(&rules[i]))
            .collect();
        self.computed += fresh.len() as u64;
        for (&i, value) in pending.iter().zip(fresh) {
            self.cache.insert(keys[i], value);
        }
        keys.iter().map(|k| self.cache[k]).collect()
    }
}
