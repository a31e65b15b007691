use caedge::{hamming, load_image, FitnessValue};

use crate::args::Score;
use crate::error::CliError;

pub fn cmd(args: &Score) -> Result<(), CliError> {
    let a = load_image(&args.first)?;
    let b = load_image(&args.second)?;
    let distance = hamming(&a, &b)?;
    let fitness = FitnessValue::new(distance, a.len() as u64);
    println!("distance={} normalized={:.6}", fitness.distance, fitness.normalized);
    Ok(())
}
