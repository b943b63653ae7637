//! Fitness: mean F-measure of a genome's networks over k-fold cross-validation.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Dataset, DatasetError, FoldSplit};
use crate::genome::Genome;
use crate::matrix::Matrix;
use crate::nn::{self, Optimizer};
use crate::seed;

#[derive(Debug, Error, PartialEq)]
pub enum FitnessError {
    #[error("{predictions} predictions but {labels} labels")]
    LengthMismatch { predictions: usize, labels: usize },
    #[error("F-measure of an empty vector")]
    Empty,
    #[error("value {0} is not a binary label")]
    NotBinary(u8),
}

/// F1 score of `predictions` against `labels` with label 1 as the positive
/// class. Zero when precision and recall are both zero.
pub fn f_measure(predictions: &[u8], labels: &[u8]) -> Result<f64, FitnessError> {
    if predictions.len() != labels.len() {
        return Err(FitnessError::LengthMismatch { predictions: predictions.len(), labels: labels.len() });
    }
    if labels.is_empty() {
        return Err(FitnessError::Empty);
    }
    let (mut tp, mut fp, mut fn_) = (0u64, 0u64, 0u64);
    for (&p, &y) in predictions.iter().zip(labels) {
        if p > 1 {
            return Err(FitnessError::NotBinary(p));
        }
        if y > 1 {
            return Err(FitnessError::NotBinary(y));
        }
        match (p, y) {
            (1, 1) => tp += 1,
            (1, 0) => fp += 1,
            (0, 1) => fn_ += 1,
            _ => {}
        }
    }
    // 2PR/(P+R) simplifies to 2TP/(2TP+FP+FN); both are zero together.
    let denom = 2 * tp + fp + fn_;
    Ok(if denom == 0 { 0.0 } else { (2 * tp) as f64 / denom as f64 })
}

/// Outcome of evaluating one genome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitnessRecord {
    pub mean_f_measure: f64,
    pub per_fold: Vec<f64>,
    pub models_trained: usize,
    /// Not part of equality: it is the only non-deterministic field.
    pub wall_time_secs: f64,
    /// Folds whose training diverged and were scored 0.
    #[serde(default)]
    pub diverged_folds: Vec<usize>,
}

impl PartialEq for FitnessRecord {
    fn eq(&self, other: &Self) -> bool {
        self.mean_f_measure == other.mean_f_measure
            && self.per_fold == other.per_fold
            && self.models_trained == other.models_trained
            && self.diverged_folds == other.diverged_folds
    }
}

impl FitnessRecord {
    pub fn from_folds(per_fold: Vec<f64>, models_trained: usize, wall_time_secs: f64, diverged_folds: Vec<usize>) -> Self {
        let mean_f_measure = if per_fold.is_empty() { 0.0 } else { per_fold.iter().sum::<f64>() / per_fold.len() as f64 };
        Self { mean_f_measure, per_fold, models_trained, wall_time_secs, diverged_folds }
    }
}

/// Anything that can score a genome. Implementations must be deterministic in
/// `(genome, seed)` and free of shared mutable state, since evaluations run
/// concurrently.
pub trait Evaluator: Sync {
    fn evaluate(&self, genome: &Genome, seed: u64) -> FitnessRecord;
}

impl<E: Evaluator + ?Sized> Evaluator for &E {
    fn evaluate(&self, genome: &Genome, seed: u64) -> FitnessRecord {
        (**self).evaluate(genome, seed)
    }
}

struct Fold {
    train_x: Matrix,
    train_y: Vec<u8>,
    test_x: Matrix,
    test_y: Vec<u8>,
}

/// k-fold cross-validation on a fixed dataset and split: one network per fold,
/// trained on the other folds and scored on the held-out one.
pub struct CrossValidation {
    folds: Vec<Fold>,
}

impl CrossValidation {
    pub fn new(dataset: &Dataset, split: &FoldSplit) -> Result<Self, DatasetError> {
        if split.instance_count() != dataset.instance_count() {
            return Err(DatasetError::LengthMismatch {
                features: dataset.instance_count(),
                labels: split.instance_count(),
            });
        }
        let folds = (0..split.k())
            .map(|f| {
                let train = dataset.subset(&split.train_indices(f));
                let test = dataset.subset(split.test_indices(f));
                Fold {
                    train_x: train.features().clone(),
                    train_y: train.labels().to_vec(),
                    test_x: test.features().clone(),
                    test_y: test.labels().to_vec(),
                }
            })
            .collect();
        Ok(Self { folds })
    }

    pub fn k(&self) -> usize {
        self.folds.len()
    }
}

impl Evaluator for CrossValidation {
    fn evaluate(&self, genome: &Genome, eval_seed: u64) -> FitnessRecord {
        let started = Instant::now();
        let mut per_fold = Vec::with_capacity(self.folds.len());
        let mut diverged = Vec::new();
        for (f, fold) in self.folds.iter().enumerate() {
            let config = genome.mlp_config(seed::derive(eval_seed, &[f as u64]));
            let score = nn::train(&config, &fold.train_x, &fold.train_y)
                .ok()
                .filter(|model| !model.diverged)
                .and_then(|model| model.predict(&fold.test_x).ok())
                .and_then(|pred| f_measure(&pred, &fold.test_y).ok());
            match score {
                Some(s) => per_fold.push(s),
                None => {
                    diverged.push(f);
                    per_fold.push(0.0);
                }
            }
        }
        FitnessRecord::from_folds(per_fold, self.folds.len(), started.elapsed().as_secs_f64(), diverged)
    }
}

/// Cross-validated fitness of `genome` on `(dataset, split)`.
pub fn evaluate(genome: &Genome, dataset: &Dataset, split: &FoldSplit, seed: u64) -> Result<FitnessRecord, DatasetError> {
    Ok(CrossValidation::new(dataset, split)?.evaluate(genome, seed))
}

/// Closed-form stand-in for cross-validated training, for exercising the
/// search mechanics quickly. The score peaks for two hidden layers of about
/// 48 nodes trained with Adam or Adamax for many epochs; each of the
/// `folds` per-fold scores adds seeded uniform noise of width `noise`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticLandscape {
    pub folds: usize,
    pub noise: f64,
}

impl Default for SyntheticLandscape {
    fn default() -> Self {
        Self { folds: 5, noise: 0.02 }
    }
}

impl SyntheticLandscape {
    pub fn noiseless_score(genome: &Genome) -> f64 {
        let layers = 1.0 - 0.08 * (genome.hidden_layers as f64 - 2.0).abs();
        let nodes = 1.0 - 0.06 * (genome.nodes as f64 / 48.0).log2().abs();
        let optimizer = match genome.optimizer {
            Optimizer::Adam | Optimizer::Adamax => 1.0,
            Optimizer::Rmsprop => 0.95,
            Optimizer::Sgd => 0.85,
        };
        let epochs = 1.0 - 0.3 * (-(genome.epochs as f64) / 15.0).exp();
        let batch = if genome.batch_size > 16 { 0.97 } else { 1.0 };
        (0.95 * layers * nodes * optimizer * epochs * batch).clamp(0.0, 1.0)
    }
}

impl Evaluator for SyntheticLandscape {
    fn evaluate(&self, genome: &Genome, eval_seed: u64) -> FitnessRecord {
        let base = Self::noiseless_score(genome);
        let mut rng = seed::rng(eval_seed);
        let per_fold = (0..self.folds.max(1))
            .map(|_| {
                let jitter = if self.noise > 0.0 { rng.random_range(-self.noise..=self.noise) } else { 0.0 };
                (base + jitter).clamp(0.0, 1.0)
            })
            .collect();
        FitnessRecord::from_folds(per_fold, self.folds.max(1), 0.0, Vec::new())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genome::{sample_genome, SearchSpace};

    #[test]
    fn examples() {
        assert_eq!(f_measure(&[1, 0, 1, 1], &[1, 0, 1, 1]).unwrap(), 1.0);
        // TP=2, FP=1, FN=1.
        let f = f_measure(&[1, 1, 1, 0, 0], &[1, 1, 0, 1, 0]).unwrap();
        assert!((f - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(f_measure(&[0, 0, 0], &[0, 1, 0]).unwrap(), 0.0);
        assert_eq!(f_measure(&[0, 0], &[0, 0]).unwrap(), 0.0);
    }

    #[test]
    fn errors() {
        assert_eq!(f_measure(&[1], &[1, 0]), Err(FitnessError::LengthMismatch { predictions: 1, labels: 2 }));
        assert_eq!(f_measure(&[], &[]), Err(FitnessError::Empty));
        assert_eq!(f_measure(&[2], &[1]), Err(FitnessError::NotBinary(2)));
    }

    #[test]
    fn record_mean_is_arithmetic_mean() {
        let r = FitnessRecord::from_folds(vec![0.2, 0.4, 0.9], 3, 0.0, vec![]);
        assert_eq!(r.mean_f_measure, (0.2 + 0.4 + 0.9) / 3.0);
    }

    #[test]
    fn synthetic_landscape_is_deterministic_and_bounded() {
        let space = SearchSpace::default();
        let land = SyntheticLandscape::default();
        let mut rng = seed::rng(1);
        for i in 0..500 {
            let g = sample_genome(&space, &mut rng);
            let a = land.evaluate(&g, i);
            assert_eq!(a, land.evaluate(&g, i));
            assert!((0.0..=1.0).contains(&a.mean_f_measure));
            assert_eq!(a.per_fold.len(), 5);
            assert_eq!(a.models_trained, 5);
        }
    }
}
