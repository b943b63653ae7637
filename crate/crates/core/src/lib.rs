//! Ecological neural architecture search.
//!
//! A genetic search over feed-forward binary classifiers in which every
//! candidate also carries four *ecological* genes: mutation rate, population
//! size, cloning rate and maximum generation count. In [`Mode::Enas`] the
//! fittest candidate's ecological genes are promoted to the live global
//! parameters after every generation, so the population can grow, shrink
//! (culling its weakest members) or halt the run altogether. [`Mode::NasPlus`]
//! is the static-parameter baseline that keeps its parameters fixed.
//!
//! The crate is organised bottom-up:
//!
//! - [`dataset`]: CSV loading, label encoding, min-max scaling, shuffling and
//!   k-fold partitioning.
//! - [`nn`]: a small dense network with Glorot initialisation, binary
//!   cross-entropy, four optimizers and patience-based early stopping.
//! - [`genome`]: the candidate phenotype, its sampling priors, crossover and
//!   mutation.
//! - [`fitness`]: F-measure and cross-validated fitness evaluation.
//! - [`evolution`]: the generational loop for both modes.
//! - [`experiment`]: repeated paired runs, summary tables, efficiency reports
//!   and audit of the emitted artifacts.
//!
//! ```no_run
//! use enas::dataset::{load_csv, LabelColumn, LabelMapping};
//! use enas::evolution::{Evolution, EvolutionConfig, Mode};
//! use enas::fitness::CrossValidation;
//!
//! let mapping = LabelMapping::from_pairs([("M", 0), ("R", 1)]);
//! let sonar = load_csv("data/sonar.csv", &LabelColumn::Last, &mapping)?.normalize_min_max();
//! let data = sonar.shuffle(7);
//! let split = data.kfold_split(5, 7)?;
//! let evaluator = CrossValidation::new(&data, &split)?;
//! let engine = Evolution::new(EvolutionConfig::desk(), &evaluator)?;
//! let result = engine.run(Mode::Enas, 7)?;
//! println!("best F1 {:.3}", result.best_f1());
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod dataset;
pub mod evolution;
pub mod experiment;
pub mod fitness;
pub mod genome;
pub mod matrix;
pub mod nn;
pub mod seed;

pub use dataset::{Dataset, FoldSplit};
pub use evolution::{Evolution, EvolutionConfig, EvolutionState, Individual, LiveParams, Mode, RunResult};
pub use fitness::{Evaluator, FitnessRecord};
pub use genome::{Genome, SearchSpace};
pub use matrix::Matrix;
pub use nn::{Activation, MlpConfig, Optimizer, TrainedModel};
