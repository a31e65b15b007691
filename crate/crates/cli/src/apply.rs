use caedge::ca::run;
use caedge::{evaluate, load_image, save_image, PopulationFile};

use crate::args::Apply;
use crate::error::CliError;

pub fn cmd(args: &Apply) -> Result<(), CliError> {
    let file = PopulationFile::load(&args.pop)?;
    let image = load_image(&args.image)?;
    let passes = args
        .passes
        .or(file.config.as_ref().map(|c| c.passes))
        .unwrap_or(1);
    if passes < 1 {
        return Err(CliError::Usage("--passes must be at least 1".into()));
    }
    let members = &file.population.members;

    let index = if args.index == "best" {
        match &args.goal {
            Some(goal_path) => {
                let goal = load_image(goal_path)?;
                image.check_same_shape(&goal)?;
                let mut best: Option<(u64, usize)> = None;
                for (i, m) in members.iter().enumerate() {
                    let d = evaluate(m.genome(), &image, &goal, passes)?.distance;
                    if best.is_none_or(|(bd, _)| d < bd) {
                        best = Some((d, i));
                    }
                }
                best.map(|(_, i)| i).expect("population is non-empty")
            }
            None => {
                if members.iter().any(|m| m.fitness().is_none()) {
                    return Err(CliError::Usage(
                        "--index best needs cached fitness in the population file or --goal".into(),
                    ));
                }
                file.population.best().map(|(i, _)| i).expect("population is non-empty")
            }
        }
    } else {
        let i: usize = args
            .index
            .parse()
            .map_err(|_| CliError::Usage(format!("--index {:?} is not an integer or \"best\"", args.index)))?;
        if i >= members.len() {
            return Err(CliError::Usage(format!(
                "--index {i} out of range (population has {} members)",
                members.len()
            )));
        }
        i
    };

    let out = run(&image, members[index].genome(), passes);
    save_image(&out, &args.out, args.format.into())?;
    Ok(())
}
