use std::fmt::Write as _;
use std::path::Path;

use caedge::ca::run;
use caedge::{
    load_image, save_image, Evolution, EvolutionConfig, GenerationStats, GridDims,
    PopulationFile,
};

use crate::args::Evolve;
use crate::error::CliError;

pub const STATS_HEADER: &str = "generation,best_fitness,avg_fitness,elapsed_seconds";

pub fn stats_csv(stats: &[GenerationStats], timing: bool) -> String {
    let mut out = String::from(STATS_HEADER);
    out.push('\n');
    for s in stats {
        let elapsed = if timing { s.elapsed_seconds } else { 0.0 };
        let _ = writeln!(
            out,
            "{},{},{:.6},{:.6}",
            s.generation, s.best_fitness, s.average_fitness, elapsed
        );
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path.display(), e))
}

pub fn cmd(args: &Evolve) -> Result<(), CliError> {
    match args.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| CliError::io("thread pool", e))?
            .install(|| execute(args)),
        None => execute(args),
    }
}

fn execute(args: &Evolve) -> Result<(), CliError> {
    let start = load_image(&args.start)?;
    let goal = load_image(&args.goal)?;
    start.check_same_shape(&goal)?;

    let config = EvolutionConfig {
        population_size: args.pop,
        generations: args.gens,
        passes: args.passes,
        crossover: args.xover.into(),
        mutation: args.mutation.into(),
        elite_fraction: args.elite_fraction,
        survivor_best_fraction: args.survivor_fraction,
        mutation_gate: args.mutation_gate,
        zeroing_scale: args.zeroing_scale,
        push_scale: args.push_scale,
        stagnation_window: args.stagnation_window,
        seed: args.seed,
    };
    let mut evolution = match &args.resume {
        Some(path) => {
            let stored = PopulationFile::load(path)?;
            Evolution::resume(config.clone(), start.clone(), goal.clone(), stored.population)?
        }
        None => Evolution::new(config.clone(), start.clone(), goal.clone())?,
    };

    for _ in 0..config.generations {
        let s = evolution.step()?;
        if args.timing {
            println!(
                "generation={} best_fitness={} avg_fitness={:.6} elapsed_seconds={:.6}",
                s.generation, s.best_fitness, s.average_fitness, s.elapsed_seconds
            );
        } else {
            println!(
                "generation={} best_fitness={} avg_fitness={:.6}",
                s.generation, s.best_fitness, s.average_fitness
            );
        }
    }
    let outcome = evolution.finish();

    if let Some(path) = &args.stats {
        write_file(path, &stats_csv(&outcome.stats, args.timing))?;
    }
    if let Some(path) = &args.out {
        PopulationFile {
            population: outcome.population.clone(),
            config: Some(config.clone()),
            grid: Some(GridDims {
                width: start.width(),
                height: start.height(),
            }),
        }
        .save(path)?;
    }
    if let Some(path) = &args.result {
        let image = run(&start, outcome.best.genome(), config.passes);
        save_image(&image, path, args.format.into())?;
    }
    Ok(())
}
