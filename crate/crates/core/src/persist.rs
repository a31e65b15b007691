//! Population files.
//!
//! A population is stored as one JSON document, format tag `capop/1`. Each
//! individual maps the 512 nine-character window codes (`"000000000"` ..
//! `"111111111"`, most significant bit first, same order as
//! [`encode_window`](crate::ca::encode_window)) to its next state:
//!
//! ```json
//! {
//!   "format": "capop/1",
//!   "seed": 42,
//!   "generation": 5,
//!   "grid": { "width": 16, "height": 16 },
//!   "config": { "population_size": 10, ... },
//!   "individuals": [
//!     { "fitness": { "distance": 12, "normalized": 0.046875 },
//!       "rules": { "000000000": 0, "000000001": 1, ... } }
//!   ]
//! }
//! ```
//!
//! Output is canonical: fixed field order, keys ascending, so saving the
//! same population twice gives identical bytes.

use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::ca::{RuleTable, RULE_COUNT};
use crate::fitness::FitnessValue;
use crate::ga::{EvolutionConfig, Individual, Population};

pub const FORMAT_VERSION: &str = "capop/1";

const KEY_BITS: usize = 9;

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed population document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported population format {found:?}, expected {FORMAT_VERSION:?}")]
    Version { found: String },
    #[error("individual {individual}: missing rule key {key:?}")]
    MissingKey { individual: usize, key: String },
    #[error("individual {individual}: duplicate rule key {key:?}")]
    DuplicateKey { individual: usize, key: String },
    #[error(
        "individual {individual}: rule key {key:?} has 8 bits; keys encode a 3x3 window and need 9"
    )]
    EightBitKey { individual: usize, key: String },
    #[error("individual {individual}: rule key {key:?} is not a 9-character binary string")]
    BadKey { individual: usize, key: String },
    #[error("individual {individual}: rule {key:?} has value {value}, expected 0 or 1")]
    NonBinaryValue {
        individual: usize,
        key: String,
        value: String,
    },
    #[error("individual {individual}: invalid cached fitness ({reason})")]
    BadFitness { individual: usize, reason: String },
    #[error("population needs at least one individual")]
    Empty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridDims {
    pub width: usize,
    pub height: usize,
}

/// A population together with its run metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct PopulationFile {
    pub population: Population,
    /// Configuration the population was produced with, if recorded.
    pub config: Option<EvolutionConfig>,
    /// Dimensions of the images cached fitness values refer to.
    pub grid: Option<GridDims>,
}

/// Window code rendered as a 9-character binary key, MSB first.
pub fn rule_key(code: usize) -> String {
    format!("{code:0width$b}", width = KEY_BITS)
}

struct RulesOut<'a>(&'a RuleTable);

impl Serialize for RulesOut<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(RULE_COUNT))?;
        for (code, &state) in self.0.entries().iter().enumerate() {
            map.serialize_entry(&rule_key(code), &state)?;
        }
        map.end()
    }
}

/// Rule entries as written, duplicates included, validated afterwards.
struct RawRules(Vec<(String, serde_json::Value)>);

impl<'de> Deserialize<'de> for RawRules {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct PairVisitor;

        impl<'de> Visitor<'de> for PairVisitor {
            type Value = RawRules;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object mapping window codes to 0 or 1")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<RawRules, A::Error> {
                let mut pairs = Vec::with_capacity(map.size_hint().unwrap_or(RULE_COUNT));
                while let Some(pair) = map.next_entry()? {
                    pairs.push(pair);
                }
                Ok(RawRules(pairs))
            }
        }

        deserializer.deserialize_map(PairVisitor)
    }
}

impl RawRules {
    fn into_table(self, individual: usize) -> Result<RuleTable, PersistError> {
        let mut entries: [Option<u8>; RULE_COUNT] = [None; RULE_COUNT];
        for (key, value) in self.0 {
            if key.len() == KEY_BITS - 1 && key.bytes().all(|b| b == b'0' || b == b'1') {
                return Err(PersistError::EightBitKey { individual, key });
            }
            if key.len() != KEY_BITS || !key.bytes().all(|b| b == b'0' || b == b'1') {
                return Err(PersistError::BadKey { individual, key });
            }
            let code = usize::from_str_radix(&key, 2).expect("validated binary key");
            let state = match value.as_u64() {
                Some(v @ (0 | 1)) => v as u8,
                _ => {
                    return Err(PersistError::NonBinaryValue {
                        individual,
                        key,
                        value: value.to_string(),
                    })
                }
            };
            if entries[code].replace(state).is_some() {
                return Err(PersistError::DuplicateKey { individual, key });
            }
        }
        let mut table = RuleTable::zeros();
        for (code, e) in entries.iter().enumerate() {
            match e {
                Some(state) => table.set(code, *state == 1),
                None => {
                    return Err(PersistError::MissingKey {
                        individual,
                        key: rule_key(code),
                    })
                }
            }
        }
        Ok(table)
    }
}

#[derive(Serialize)]
struct DocOut<'a> {
    format: &'static str,
    seed: u64,
    generation: u64,
    grid: Option<GridDims>,
    config: Option<&'a EvolutionConfig>,
    individuals: Vec<IndividualOut<'a>>,
}

#[derive(Serialize)]
struct IndividualOut<'a> {
    fitness: Option<FitnessValue>,
    rules: RulesOut<'a>,
}

#[derive(Deserialize)]
struct DocIn {
    seed: u64,
    generation: u64,
    #[serde(default)]
    grid: Option<GridDims>,
    #[serde(default)]
    config: Option<EvolutionConfig>,
    individuals: Vec<IndividualIn>,
}

#[derive(Deserialize)]
struct IndividualIn {
    #[serde(default)]
    fitness: Option<FitnessValue>,
    rules: RawRules,
}

impl PopulationFile {
    pub fn new(population: Population) -> Self {
        Self {
            population,
            config: None,
            grid: None,
        }
    }

    /// Canonical JSON text, newline-terminated.
    pub fn to_json(&self) -> String {
        let doc = DocOut {
            format: FORMAT_VERSION,
            seed: self.population.seed,
            generation: self.population.generation,
            grid: self.grid,
            config: self.config.as_ref(),
            individuals: self
                .population
                .members
                .iter()
                .map(|m| IndividualOut {
                    fitness: m.fitness(),
                    rules: RulesOut(m.genome()),
                })
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("population serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, PersistError> {
        #[derive(Deserialize)]
        struct Header {
            format: Option<String>,
        }
        let header: Header = serde_json::from_str(text)?;
        match header.format.as_deref() {
            Some(FORMAT_VERSION) => {}
            other => {
                return Err(PersistError::Version {
                    found: other.unwrap_or("<missing>").to_string(),
                })
            }
        }
        let doc: DocIn = serde_json::from_str(text)?;
        if doc.individuals.is_empty() {
            return Err(PersistError::Empty);
        }
        let mut members = Vec::with_capacity(doc.individuals.len());
        for (i, ind) in doc.individuals.into_iter().enumerate() {
            let genome = ind.rules.into_table(i)?;
            members.push(match ind.fitness {
                Some(f) => {
                    check_fitness(i, &f, doc.grid)?;
                    Individual::with_fitness(genome, f)
                }
                None => Individual::new(genome),
            });
        }
        Ok(Self {
            population: Population {
                members,
                generation: doc.generation,
                seed: doc.seed,
            },
            config: doc.config,
            grid: doc.grid,
        })
    }

    /// Writes through a temporary file in the target directory and renames
    /// it into place.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), PersistError> {
        let path = path.as_ref();
        let io_err = |source| PersistError::Io {
            path: path.display().to_string(),
            source,
        };
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
        tmp.write_all(self.to_json().as_bytes()).map_err(io_err)?;
        tmp.as_file().sync_all().map_err(io_err)?;
        tmp.persist(path).map_err(|e| io_err(e.error))?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PersistError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| PersistError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }
}

fn check_fitness(
    individual: usize,
    f: &FitnessValue,
    grid: Option<GridDims>,
) -> Result<(), PersistError> {
    let bad = |reason: String| Err(PersistError::BadFitness { individual, reason });
    if !(0.0..=1.0).contains(&f.normalized) {
        return bad(format!("normalized {} outside [0, 1]", f.normalized));
    }
    if let Some(g) = grid {
        let cells = (g.width * g.height) as u64;
        if f.distance > cells {
            return bad(format!("distance {} exceeds {cells} cells", f.distance));
        }
    }
    Ok(())
}

pub fn save_population(
    population: &Population,
    config: Option<&EvolutionConfig>,
    grid: Option<GridDims>,
    path: impl AsRef<Path>,
) -> Result<(), PersistError> {
    PopulationFile {
        population: population.clone(),
        config: config.cloned(),
        grid,
    }
    .save(path)
}

pub fn load_population(path: impl AsRef<Path>) -> Result<PopulationFile, PersistError> {
    PopulationFile::load(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ca::random_rule;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample_file() -> PopulationFile {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut population = Population::random(5, 17, &mut rng);
        population.generation = 3;
        population.members[1].set_fitness(FitnessValue::new(7, 64));
        PopulationFile {
            population,
            config: Some(EvolutionConfig {
                seed: 17,
                ..Default::default()
            }),
            grid: Some(GridDims {
                width: 8,
                height: 8,
            }),
        }
    }

    fn single(rule: &RuleTable) -> String {
        PopulationFile::new(Population {
            members: vec![Individual::new(rule.clone())],
            generation: 0,
            seed: 0,
        })
        .to_json()
    }

    #[test]
    fn keys_are_nine_bit_msb_first() {
        assert_eq!(rule_key(0), "000000000");
        assert_eq!(rule_key(273), "100010001");
        assert_eq!(rule_key(511), "111111111");
    }

    #[test]
    fn zero_table_writes_all_zero_values() {
        let text = single(&RuleTable::zeros());
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let rules = v["individuals"][0]["rules"].as_object().unwrap();
        assert_eq!(rules.len(), 512);
        assert!(rules.values().all(|x| x == 0));
    }

    #[test]
    fn entry_273_maps_to_its_key() {
        let mut rule = RuleTable::zeros();
        rule.set(273, true);
        let v: serde_json::Value = serde_json::from_str(&single(&rule)).unwrap();
        assert_eq!(v["individuals"][0]["rules"]["100010001"], 1);
        assert_eq!(v["individuals"][0]["rules"]["100010000"], 0);
    }

    #[test]
    fn keys_are_written_in_ascending_order() {
        let text = single(&random_rule(&mut ChaCha8Rng::seed_from_u64(1)));
        let first = text.find("\"000000000\"").unwrap();
        let second = text.find("\"000000001\"").unwrap();
        let last = text.find("\"111111111\"").unwrap();
        assert!(first < second && second < last);
    }

    #[test]
    fn round_trip_and_canonical_bytes() {
        let file = sample_file();
        let text = file.to_json();
        let back = PopulationFile::from_json(&text).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.to_json(), text);
    }

    fn without_key(key: &str) -> String {
        let text = single(&RuleTable::zeros());
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["individuals"][0]["rules"]
            .as_object_mut()
            .unwrap()
            .remove(key);
        v.to_string()
    }

    #[test]
    fn missing_key_is_named() {
        match PopulationFile::from_json(&without_key("000101010")) {
            Err(PersistError::MissingKey { individual, key }) => {
                assert_eq!((individual, key.as_str()), (0, "000101010"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_binary_value_reports_key_and_value() {
        let text = single(&RuleTable::zeros()).replace("\"000000111\": 0", "\"000000111\": 2");
        match PopulationFile::from_json(&text) {
            Err(PersistError::NonBinaryValue { key, value, .. }) => {
                assert_eq!((key.as_str(), value.as_str()), ("000000111", "2"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_key_is_rejected() {
        let text = single(&RuleTable::zeros())
            .replace("\"000000011\": 0", "\"000000010\": 0");
        assert!(matches!(
            PopulationFile::from_json(&text),
            Err(PersistError::DuplicateKey { key, .. }) if key == "000000010"
        ));
    }

    #[test]
    fn eight_bit_keys_are_rejected_with_explanation() {
        let text = single(&RuleTable::zeros()).replace("\"000000011\"", "\"00000011\"");
        let err = PopulationFile::from_json(&text).unwrap_err();
        assert!(matches!(err, PersistError::EightBitKey { .. }));
        assert!(err.to_string().contains("need 9"));
    }

    #[test]
    fn bad_key_is_rejected() {
        let text = single(&RuleTable::zeros()).replace("\"000000011\"", "\"00000001x\"");
        assert!(matches!(
            PopulationFile::from_json(&text),
            Err(PersistError::BadKey { .. })
        ));
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let text = single(&RuleTable::zeros()).replace("capop/1", "capop/2");
        assert!(matches!(
            PopulationFile::from_json(&text),
            Err(PersistError::Version { found }) if found == "capop/2"
        ));
        assert!(matches!(
            PopulationFile::from_json("{\"individuals\": []}"),
            Err(PersistError::Version { .. })
        ));
    }

    #[test]
    fn out_of_range_fitness_is_rejected() {
        let mut file = sample_file();
        file.population.members[0].set_fitness(FitnessValue {
            distance: 65,
            normalized: 0.5,
        });
        assert!(matches!(
            PopulationFile::from_json(&file.to_json()),
            Err(PersistError::BadFitness { individual: 0, .. })
        ));
    }

    #[test]
    fn save_and_load_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pop.capop");
        let file = sample_file();
        file.save(&path).unwrap();
        let first = std::fs::read(&path).unwrap();
        let loaded = load_population(&path).unwrap();
        assert_eq!(loaded, file);
        loaded.save(&path).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), first);
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let file = sample_file();
        assert!(matches!(
            file.save("/nonexistent-dir/x/pop.capop"),
            Err(PersistError::Io { .. })
        ));
    }
}
