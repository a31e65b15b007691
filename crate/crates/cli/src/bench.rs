use caedge::bench::{bench_generation, BenchConfig, BenchError};

use crate::args::Bench;
use crate::error::CliError;

pub fn cmd(args: &Bench) -> Result<(), CliError> {
    let threads = match args.threads {
        Some(t) => vec![t.max(1)],
        None => {
            let all = std::thread::available_parallelism().map_or(1, usize::from);
            if all > 1 {
                vec![1, all]
            } else {
                vec![1]
            }
        }
    };
    for t in threads {
        let report = bench_generation(&BenchConfig {
            width: args.width,
            height: args.height,
            pop_size: args.pop,
            passes: args.passes,
            seed: args.seed,
            reps: args.reps,
            threads: t,
        })
        .map_err(|e| match e {
            BenchError::Pool(p) => CliError::io("thread pool", p),
            BenchError::Ga(g) => g.into(),
            other => CliError::Usage(other.to_string()),
        })?;
        println!("{}", report.to_line());
    }
    Ok(())
}
