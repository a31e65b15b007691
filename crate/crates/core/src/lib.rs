//! Evolving cellular-automaton rule tables for binary edge detection.
//!
//! A [`RuleTable`] maps each of the 512 possible 3x3 binary neighborhoods to
//! a next state. Applying it synchronously to a binary start image for a few
//! passes yields a result image; the genetic algorithm in [`ga`] searches for
//! tables whose result is as close as possible (in Hamming distance) to a
//! goal edge image.
//!
//! ```
//! use caedge::{BinaryGrid, EvolutionConfig, evolve};
//!
//! let start = BinaryGrid::from_fn(16, 16, |r, c| (4..12).contains(&r) && (4..12).contains(&c)).unwrap();
//! let goal = BinaryGrid::zeros(16, 16).unwrap();
//! let outcome = evolve(&EvolutionConfig { seed: 1, ..Default::default() }, &start, &goal).unwrap();
//! assert_eq!(outcome.stats.len(), 5);
//! ```

pub mod bench;
pub mod ca;
pub mod fitness;
pub mod ga;
pub mod grid;
pub mod persist;

pub use ca::{encode_window, random_rule, run, step, RuleTable, RULE_COUNT};
pub use fitness::{evaluate, Evaluator, FitnessValue};
pub use ga::{
    evolve, CrossoverKind, Evolution, EvolutionConfig, EvolutionOutcome, GaError,
    GenerationStats, Individual, MutationKind, Population,
};
pub use grid::{hamming, load_image, save_image, BinaryGrid, GridError, PbmFormat};
pub use persist::{load_population, save_population, GridDims, PersistError, PopulationFile};
