use std::path::PathBuf;

use caedge::ga::{CrossoverKind, MutationKind};
use caedge::PbmFormat;
use clap::{Args, ValueEnum};

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Xover {
    #[value(name = "1pt")]
    OnePoint,
    #[value(name = "2pt")]
    TwoPoint,
}

impl From<Xover> for CrossoverKind {
    fn from(x: Xover) -> Self {
        match x {
            Xover::OnePoint => CrossoverKind::OnePoint,
            Xover::TwoPoint => CrossoverKind::TwoPoint,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Mutation {
    Type1,
    Type2,
}

impl From<Mutation> for MutationKind {
    fn from(m: Mutation) -> Self {
        match m {
            Mutation::Type1 => MutationKind::Type1,
            Mutation::Type2 => MutationKind::Type2,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ImageFormat {
    P1,
    P4,
}

impl From<ImageFormat> for PbmFormat {
    fn from(f: ImageFormat) -> Self {
        match f {
            ImageFormat::P1 => PbmFormat::P1,
            ImageFormat::P4 => PbmFormat::P4,
        }
    }
}

#[derive(Args)]
pub struct Evolve {
    /// Binary start image (PBM or PGM)
    #[arg(long)]
    pub start: PathBuf,
    /// Goal edge image, same size as the start image
    #[arg(long)]
    pub goal: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub pop: usize,
    #[arg(long, default_value_t = 5)]
    pub gens: usize,
    /// CA passes applied to the start image per evaluation
    #[arg(long, default_value_t = 1)]
    pub passes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Xover::TwoPoint)]
    pub xover: Xover,
    #[arg(long, value_enum, default_value_t = Mutation::Type1)]
    pub mutation: Mutation,
    #[arg(long, default_value_t = 0.2)]
    pub elite_fraction: f64,
    #[arg(long, default_value_t = 0.2)]
    pub survivor_fraction: f64,
    #[arg(long, default_value_t = 0.5)]
    pub mutation_gate: f64,
    #[arg(long, default_value_t = 0.25)]
    pub zeroing_scale: f64,
    #[arg(long, default_value_t = 1.0)]
    pub push_scale: f64,
    #[arg(long, default_value_t = 2)]
    pub stagnation_window: usize,
    /// Continue from a stored population instead of a random one
    #[arg(long)]
    pub resume: Option<PathBuf>,
    /// Final population file
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-generation statistics CSV
    #[arg(long)]
    pub stats: Option<PathBuf>,
    /// Image produced by the best rule table
    #[arg(long)]
    pub result: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ImageFormat::P1)]
    pub format: ImageFormat,
    /// Worker threads for fitness evaluation (output does not depend on it)
    #[arg(long)]
    pub threads: Option<usize>,
    /// Record wall-clock seconds per generation (otherwise written as 0)
    #[arg(long)]
    pub timing: bool,
}

#[derive(Args)]
pub struct Apply {
    /// Population file
    #[arg(long)]
    pub pop: PathBuf,
    /// Member index, or "best"
    #[arg(long, default_value = "best")]
    pub index: String,
    #[arg(long)]
    pub image: PathBuf,
    /// Defaults to the pass count recorded in the population file, else 1
    #[arg(long)]
    pub passes: Option<usize>,
    /// Goal image used to rank members when --index is "best"
    #[arg(long)]
    pub goal: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = ImageFormat::P1)]
    pub format: ImageFormat,
}

#[derive(Args)]
pub struct Score {
    pub first: PathBuf,
    pub second: PathBuf,
}

#[derive(Args)]
pub struct InitPop {
    #[arg(long)]
    pub size: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct Bench {
    #[arg(long, default_value_t = 256)]
    pub width: usize,
    #[arg(long, default_value_t = 256)]
    pub height: usize,
    #[arg(long, default_value_t = 10)]
    pub pop: usize,
    #[arg(long, default_value_t = 1)]
    pub passes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    /// Only this thread count; by default reports 1 thread and all threads
    #[arg(long)]
    pub threads: Option<usize>,
}
