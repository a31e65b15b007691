//! Wall-clock throughput of CA passes and full GA generations.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::ca::{random_rule, step};
use crate::ga::{EvolutionConfig, GaError, Evolution};
use crate::grid::BinaryGrid;

/// Per-generation seconds at 256x256 that reports are compared against.
pub const REFERENCE_GENERATION_SECONDS: f64 = 56.1;

pub const MIN_SIDE: usize = 16;
pub const MIN_REPS: usize = 5;

/// Lower bound on the time spent per pass-timing sample, so small grids
/// are not lost in timer resolution.
const PASS_SAMPLE_SECONDS: f64 = 0.005;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("bench grids need sides of at least {MIN_SIDE}, got {width}x{height}")]
    TooSmall { width: usize, height: usize },
    #[error("bench needs at least {MIN_REPS} repetitions, got {0}")]
    TooFewReps(usize),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error(transparent)]
    Ga(#[from] GaError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub width: usize,
    pub height: usize,
    pub pop_size: usize,
    pub passes: usize,
    pub seed: u64,
    pub reps: usize,
    /// Worker threads for fitness evaluation.
    pub threads: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            width: 256,
            height: 256,
            pop_size: 10,
            passes: 1,
            seed: 0,
            reps: MIN_REPS,
            threads: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub generation_median: f64,
    pub generation_min: f64,
    pub generation_max: f64,
    /// Median seconds for one pass over the grid.
    pub pass_median: f64,
    /// CA runs per generation (cache misses).
    pub evaluations: u64,
    pub cells_per_second: f64,
}

impl BenchReport {
    /// How many times faster than [`REFERENCE_GENERATION_SECONDS`].
    pub fn speedup_vs_reference(&self) -> f64 {
        REFERENCE_GENERATION_SECONDS / self.generation_median
    }

    /// Fixed-schema single-line report.
    pub fn to_line(&self) -> String {
        let c = &self.config;
        format!(
            "width={} height={} pop={} passes={} seed={} reps={} threads={} \
             gen_median_s={:.6} gen_min_s={:.6} gen_max_s={:.6} pass_median_s={:.9} \
             evaluations={} cells_per_s={:.0} speedup_vs_56.1s={:.1}",
            c.width,
            c.height,
            c.pop_size,
            c.passes,
            c.seed,
            c.reps,
            c.threads,
            self.generation_median,
            self.generation_min,
            self.generation_max,
            self.pass_median,
            self.evaluations,
            self.cells_per_second,
            self.speedup_vs_reference(),
        )
    }
}

fn median(samples: &mut [f64]) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len();
    if n % 2 == 1 {
        samples[n / 2]
    } else {
        (samples[n / 2 - 1] + samples[n / 2]) / 2.0
    }
}

fn random_grid(rng: &mut ChaCha8Rng, w: usize, h: usize) -> BinaryGrid {
    BinaryGrid::from_fn(w, h, |_, _| rng.gen()).expect("bench dimensions validated")
}

/// Times full generations (and single passes) on a random image pair.
pub fn bench_generation(config: &BenchConfig) -> Result<BenchReport, BenchError> {
    if config.width < MIN_SIDE || config.height < MIN_SIDE {
        return Err(BenchError::TooSmall {
            width: config.width,
            height: config.height,
        });
    }
    if config.reps < MIN_REPS {
        return Err(BenchError::TooFewReps(config.reps));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads.max(1))
        .build()?;
    pool.install(|| run_bench(config))
}

fn run_bench(config: &BenchConfig) -> Result<BenchReport, BenchError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let start = random_grid(&mut rng, config.width, config.height);
    let goal = random_grid(&mut rng, config.width, config.height);
    let ga_config = EvolutionConfig {
        population_size: config.pop_size,
        generations: 1,
        passes: config.passes,
        seed: config.seed,
        ..Default::default()
    };

    let mut generation_times = Vec::with_capacity(config.reps);
    let mut evaluations = 0;
    for _ in 0..config.reps {
        let mut evolution = Evolution::new(ga_config.clone(), start.clone(), goal.clone())?;
        let t = Instant::now();
        evolution.step()?;
        generation_times.push(t.elapsed().as_secs_f64());
        evaluations = evolution.evaluations();
    }

    let rule = random_rule(&mut rng);
    let mut pass_times = Vec::with_capacity(config.reps);
    for _ in 0..config.reps {
        let t = Instant::now();
        let mut iterations = 0u32;
        loop {
            std::hint::black_box(step(std::hint::black_box(&start), &rule));
            iterations += 1;
            if t.elapsed().as_secs_f64() >= PASS_SAMPLE_SECONDS {
                break;
            }
        }
        pass_times.push(t.elapsed().as_secs_f64() / iterations as f64);
    }

    let generation_min = generation_times.iter().copied().fold(f64::INFINITY, f64::min);
    let generation_max = generation_times.iter().copied().fold(0.0, f64::max);
    let generation_median = median(&mut generation_times);
    let cells = (config.width * config.height * config.passes) as f64 * evaluations as f64;
    Ok(BenchReport {
        config: config.clone(),
        generation_median,
        generation_min,
        generation_max,
        pass_median: median(&mut pass_times),
        evaluations,
        cells_per_second: cells / generation_median,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_of_odd_and_even() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 3.0, 2.0]), 2.5);
    }

    #[test]
    fn rejects_small_grids_and_few_reps() {
        let small = BenchConfig {
            width: 8,
            ..Default::default()
        };
        assert!(matches!(bench_generation(&small), Err(BenchError::TooSmall { .. })));
        let few = BenchConfig {
            width: 16,
            height: 16,
            reps: 2,
            ..Default::default()
        };
        assert!(matches!(bench_generation(&few), Err(BenchError::TooFewReps(2))));
    }

    #[test]
    fn tiny_grid_generation_is_fast() {
        let report = bench_generation(&BenchConfig {
            width: 16,
            height: 16,
            ..Default::default()
        })
        .unwrap();
        assert!(report.generation_median < 1.0);
        assert!(report.generation_min <= report.generation_median);
        assert!(report.generation_median <= report.generation_max);
        assert!(report.evaluations > 0);
        let line = report.to_line();
        assert!(line.starts_with("width=16 height=16 pop=10 passes=1 seed=0 reps=5 threads=1 "));
        assert!(line.contains(" speedup_vs_56.1s="));
    }
}
