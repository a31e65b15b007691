use caedge::ga::MIN_POPULATION;
use caedge::{EvolutionConfig, Population, PopulationFile};

use crate::args::InitPop;
use crate::error::CliError;

pub fn cmd(args: &InitPop) -> Result<(), CliError> {
    if args.size < MIN_POPULATION {
        return Err(CliError::Usage(format!(
            "--size {} is below the minimum of {MIN_POPULATION}",
            args.size
        )));
    }
    let file = PopulationFile {
        population: Population::from_seed(args.size, args.seed),
        config: Some(EvolutionConfig {
            population_size: args.size,
            seed: args.seed,
            ..Default::default()
        }),
        grid: None,
    };
    file.save(&args.out)?;
    Ok(())
}
