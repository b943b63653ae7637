//! Candidate phenotype: architecture genes plus four ecological genes.
//!
//! The JSON form uses the exact key names of the original candidate layout:
//!
//! ```json
//! { "hidden_layers": 2, "nodes": 40,
//!   "activation functions": ["relu", "relu", "relu", "sigmoid"],
//!   "optimiser": "Adam", "number of epochs": 50, "batch size": 2,
//!   "mutation rate": 0.1, "population size": 10,
//!   "cloning rate": 0.6, "max generations": 100 }
//! ```
//!
//! Every gene, ecological or architectural, is handled the same way by
//! [`crossover`] and [`mutate`].

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nn::{Activation, MlpConfig, Optimizer};

/// Hard limits on the population-size gene.
pub const POPULATION_SIZE_LIMITS: IntRange = IntRange { min: 3, max: 50 };
/// Hard limits on the max-generations gene.
pub const MAX_GENERATIONS_LIMITS: IntRange = IntRange { min: 1, max: 500 };

#[derive(Debug, Error, PartialEq)]
pub enum GenomeError {
    #[error("gene {gene}: {value} outside [{min}, {max}]")]
    OutOfRange { gene: &'static str, value: String, min: String, max: String },
    #[error("gene {gene}: {value} is not an allowed choice")]
    NotAllowed { gene: &'static str, value: String },
    #[error("{found} activation functions for {hidden} hidden layers (need hidden_layers + 2)")]
    ActivationCount { hidden: usize, found: usize },
    #[error("output activation must be sigmoid")]
    OutputActivation,
    #[error("invalid search space: {0}")]
    InvalidSpace(String),
}

/// Inclusive integer range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntRange {
    pub min: usize,
    pub max: usize,
}

impl IntRange {
    pub const fn new(min: usize, max: usize) -> Self {
        Self { min, max }
    }

    pub fn contains(&self, v: usize) -> bool {
        (self.min..=self.max).contains(&v)
    }

    pub fn clamp(&self, v: usize) -> usize {
        v.clamp(self.min, self.max)
    }

    pub fn len(&self) -> usize {
        self.max + 1 - self.min
    }

    pub fn is_empty(&self) -> bool {
        self.max < self.min
    }

    pub fn is_within(&self, outer: &IntRange) -> bool {
        outer.min <= self.min && self.max <= outer.max
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        rng.random_range(self.min..=self.max)
    }
}

/// Beta-distributed prior on a rate in `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaPrior {
    pub alpha: f64,
    pub beta: f64,
}

impl BetaPrior {
    /// Mean 0.1 with a usable upper tail.
    pub const MUTATION_RATE: BetaPrior = BetaPrior { alpha: 2.0, beta: 18.0 };
    /// Mean 0.3.
    pub const CLONING_RATE: BetaPrior = BetaPrior { alpha: 3.0, beta: 7.0 };

    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }

    /// A draw strictly inside `(0, 1)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let dist = Beta::new(self.alpha, self.beta).expect("beta prior parameters are validated");
        open_unit(dist.sample(rng))
    }
}

fn open_unit(v: f64) -> f64 {
    v.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

pub fn sample_mutation_rate<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    BetaPrior::MUTATION_RATE.sample(rng)
}

pub fn sample_cloning_rate<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    BetaPrior::CLONING_RATE.sample(rng)
}

/// Bounds and priors for every gene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub hidden_layers: IntRange,
    pub nodes: IntRange,
    pub epochs: IntRange,
    pub batch_sizes: Vec<usize>,
    pub optimizers: Vec<Optimizer>,
    /// Choices for every non-output layer; the output is always sigmoid.
    pub activations: Vec<Activation>,
    pub mutation_rate: BetaPrior,
    pub cloning_rate: BetaPrior,
    pub population_size: IntRange,
    pub max_generations: IntRange,
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self {
            hidden_layers: IntRange::new(1, 4),
            nodes: IntRange::new(2, 128),
            epochs: IntRange::new(1, 100),
            batch_sizes: vec![1, 2, 4, 8, 16, 32],
            optimizers: Optimizer::ALL.to_vec(),
            activations: Activation::ALL.to_vec(),
            mutation_rate: BetaPrior::MUTATION_RATE,
            cloning_rate: BetaPrior::CLONING_RATE,
            population_size: POPULATION_SIZE_LIMITS,
            max_generations: MAX_GENERATIONS_LIMITS,
        }
    }
}

impl SearchSpace {
    pub fn validate(&self) -> Result<(), GenomeError> {
        let bad = |msg: &str| Err(GenomeError::InvalidSpace(msg.to_string()));
        for (name, r) in [
            ("hidden_layers", self.hidden_layers),
            ("nodes", self.nodes),
            ("epochs", self.epochs),
            ("population_size", self.population_size),
            ("max_generations", self.max_generations),
        ] {
            if r.is_empty() {
                return bad(&format!("{name} range is empty"));
            }
        }
        if self.hidden_layers.min == 0 || self.nodes.min == 0 || self.epochs.min == 0 {
            return bad("architecture ranges must start at 1 or above");
        }
        if self.batch_sizes.is_empty() || self.optimizers.is_empty() || self.activations.is_empty() {
            return bad("choice sets must be non-empty");
        }
        if self.batch_sizes.contains(&0) {
            return bad("batch sizes must be positive");
        }
        if !self.population_size.is_within(&POPULATION_SIZE_LIMITS) {
            return bad("population_size bounds must lie within [3, 50]");
        }
        if !self.max_generations.is_within(&MAX_GENERATIONS_LIMITS) {
            return bad("max_generations bounds must lie within [1, 500]");
        }
        for prior in [self.mutation_rate, self.cloning_rate] {
            if !(prior.alpha > 0.0 && prior.beta > 0.0 && prior.alpha.is_finite() && prior.beta.is_finite()) {
                return bad("beta prior parameters must be positive and finite");
            }
        }
        Ok(())
    }

    fn sample_activation<R: Rng + ?Sized>(&self, rng: &mut R) -> Activation {
        *self.activations.choose(rng).expect("non-empty activation set")
    }

    fn sample_activations<R: Rng + ?Sized>(&self, hidden_layers: usize, rng: &mut R) -> Vec<Activation> {
        let mut acts: Vec<Activation> = (0..=hidden_layers).map(|_| self.sample_activation(rng)).collect();
        acts.push(Activation::Sigmoid);
        acts
    }
}

/// The four genes that steer the search itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EcoGenes {
    pub mutation_rate: f64,
    pub population_size: usize,
    pub cloning_rate: f64,
    pub max_generations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Genome {
    pub hidden_layers: usize,
    pub nodes: usize,
    #[serde(rename = "activation functions")]
    pub activations: Vec<Activation>,
    #[serde(rename = "optimiser")]
    pub optimizer: Optimizer,
    #[serde(rename = "number of epochs")]
    pub epochs: usize,
    #[serde(rename = "batch size")]
    pub batch_size: usize,
    #[serde(rename = "mutation rate")]
    pub mutation_rate: f64,
    #[serde(rename = "population size")]
    pub population_size: usize,
    #[serde(rename = "cloning rate")]
    pub cloning_rate: f64,
    #[serde(rename = "max generations")]
    pub max_generations: usize,
}

/// Scalar genes, in their canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gene {
    HiddenLayers,
    Nodes,
    Optimizer,
    Epochs,
    BatchSize,
    MutationRate,
    PopulationSize,
    CloningRate,
    MaxGenerations,
}

impl Gene {
    pub const SCALAR: [Gene; 9] = [
        Gene::HiddenLayers,
        Gene::Nodes,
        Gene::Optimizer,
        Gene::Epochs,
        Gene::BatchSize,
        Gene::MutationRate,
        Gene::PopulationSize,
        Gene::CloningRate,
        Gene::MaxGenerations,
    ];

    pub const ECOLOGICAL: [Gene; 4] = [Gene::MutationRate, Gene::PopulationSize, Gene::CloningRate, Gene::MaxGenerations];
}

/// A gene's value, comparable across genomes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeneValue {
    Int(usize),
    Real(f64),
    Optimizer(Optimizer),
}

impl Genome {
    pub fn gene(&self, gene: Gene) -> GeneValue {
        match gene {
            Gene::HiddenLayers => GeneValue::Int(self.hidden_layers),
            Gene::Nodes => GeneValue::Int(self.nodes),
            Gene::Optimizer => GeneValue::Optimizer(self.optimizer),
            Gene::Epochs => GeneValue::Int(self.epochs),
            Gene::BatchSize => GeneValue::Int(self.batch_size),
            Gene::MutationRate => GeneValue::Real(self.mutation_rate),
            Gene::PopulationSize => GeneValue::Int(self.population_size),
            Gene::CloningRate => GeneValue::Real(self.cloning_rate),
            Gene::MaxGenerations => GeneValue::Int(self.max_generations),
        }
    }

    fn copy_gene(&mut self, gene: Gene, from: &Genome) {
        match gene {
            Gene::HiddenLayers => self.hidden_layers = from.hidden_layers,
            Gene::Nodes => self.nodes = from.nodes,
            Gene::Optimizer => self.optimizer = from.optimizer,
            Gene::Epochs => self.epochs = from.epochs,
            Gene::BatchSize => self.batch_size = from.batch_size,
            Gene::MutationRate => self.mutation_rate = from.mutation_rate,
            Gene::PopulationSize => self.population_size = from.population_size,
            Gene::CloningRate => self.cloning_rate = from.cloning_rate,
            Gene::MaxGenerations => self.max_generations = from.max_generations,
        }
    }

    fn resample_gene<R: Rng + ?Sized>(&mut self, gene: Gene, space: &SearchSpace, rng: &mut R) {
        match gene {
            Gene::HiddenLayers => self.hidden_layers = space.hidden_layers.sample(rng),
            Gene::Nodes => self.nodes = space.nodes.sample(rng),
            Gene::Optimizer => self.optimizer = *space.optimizers.choose(rng).expect("non-empty"),
            Gene::Epochs => self.epochs = space.epochs.sample(rng),
            Gene::BatchSize => self.batch_size = *space.batch_sizes.choose(rng).expect("non-empty"),
            Gene::MutationRate => self.mutation_rate = space.mutation_rate.sample(rng),
            Gene::PopulationSize => self.population_size = space.population_size.sample(rng),
            Gene::CloningRate => self.cloning_rate = space.cloning_rate.sample(rng),
            Gene::MaxGenerations => self.max_generations = space.max_generations.sample(rng),
        }
    }

    pub fn eco(&self) -> EcoGenes {
        EcoGenes {
            mutation_rate: self.mutation_rate,
            population_size: self.population_size,
            cloning_rate: self.cloning_rate,
            max_generations: self.max_generations,
        }
    }

    /// Network configuration for these architecture genes.
    pub fn mlp_config(&self, seed: u64) -> MlpConfig {
        MlpConfig::new(
            self.hidden_layers,
            self.nodes,
            self.activations.clone(),
            self.optimizer,
            self.epochs,
            self.batch_size,
            seed,
        )
    }

    pub fn validate(&self, space: &SearchSpace) -> Result<(), GenomeError> {
        fn int(gene: &'static str, v: usize, r: IntRange) -> Result<(), GenomeError> {
            if r.contains(v) {
                Ok(())
            } else {
                Err(GenomeError::OutOfRange { gene, value: v.to_string(), min: r.min.to_string(), max: r.max.to_string() })
            }
        }
        fn rate(gene: &'static str, v: f64) -> Result<(), GenomeError> {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(GenomeError::OutOfRange { gene, value: v.to_string(), min: "0 (open)".into(), max: "1 (open)".into() })
            }
        }
        int("hidden_layers", self.hidden_layers, space.hidden_layers)?;
        int("nodes", self.nodes, space.nodes)?;
        int("number of epochs", self.epochs, space.epochs)?;
        int("population size", self.population_size, POPULATION_SIZE_LIMITS)?;
        int("population size", self.population_size, space.population_size)?;
        int("max generations", self.max_generations, MAX_GENERATIONS_LIMITS)?;
        int("max generations", self.max_generations, space.max_generations)?;
        rate("mutation rate", self.mutation_rate)?;
        rate("cloning rate", self.cloning_rate)?;
        if !space.batch_sizes.contains(&self.batch_size) {
            return Err(GenomeError::NotAllowed { gene: "batch size", value: self.batch_size.to_string() });
        }
        if !space.optimizers.contains(&self.optimizer) {
            return Err(GenomeError::NotAllowed { gene: "optimiser", value: self.optimizer.to_string() });
        }
        if self.activations.len() != self.hidden_layers + 2 {
            return Err(GenomeError::ActivationCount { hidden: self.hidden_layers, found: self.activations.len() });
        }
        let (output, hidden) = self.activations.split_last().expect("length checked above");
        if *output != Activation::Sigmoid {
            return Err(GenomeError::OutputActivation);
        }
        if let Some(a) = hidden.iter().find(|a| !space.activations.contains(a)) {
            return Err(GenomeError::NotAllowed { gene: "activation functions", value: a.to_string() });
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("genome serialises")
    }

    /// Parses and validates a genome document.
    pub fn from_json(text: &str, space: &SearchSpace) -> Result<Genome, Box<dyn std::error::Error + Send + Sync>> {
        let genome: Genome = serde_json::from_str(text)?;
        genome.validate(space)?;
        Ok(genome)
    }
}

/// Draws every gene from its prior.
pub fn sample_genome<R: Rng + ?Sized>(space: &SearchSpace, rng: &mut R) -> Genome {
    let hidden_layers = space.hidden_layers.sample(rng);
    let nodes = space.nodes.sample(rng);
    let activations = space.sample_activations(hidden_layers, rng);
    let optimizer = *space.optimizers.choose(rng).expect("non-empty");
    let epochs = space.epochs.sample(rng);
    let batch_size = *space.batch_sizes.choose(rng).expect("non-empty");
    Genome {
        hidden_layers,
        nodes,
        activations,
        optimizer,
        epochs,
        batch_size,
        mutation_rate: space.mutation_rate.sample(rng),
        population_size: space.population_size.sample(rng),
        cloning_rate: space.cloning_rate.sample(rng),
        max_generations: space.max_generations.sample(rng),
    }
}

/// Uniform per-gene crossover. The activation list comes from one parent and
/// is truncated, or extended from the other parent, to `hidden_layers + 2`
/// entries with the sigmoid output kept last.
pub fn crossover<R: Rng + ?Sized>(a: &Genome, b: &Genome, rng: &mut R) -> Genome {
    let mut child = a.clone();
    for gene in Gene::SCALAR {
        if rng.random_bool(0.5) {
            child.copy_gene(gene, b);
        }
    }
    let (donor, other) = if rng.random_bool(0.5) { (b, a) } else { (a, b) };
    child.activations = rebuild_activations(&donor.activations, &other.activations, child.hidden_layers);
    child
}

fn rebuild_activations(donor: &[Activation], other: &[Activation], hidden_layers: usize) -> Vec<Activation> {
    let wanted = hidden_layers + 1;
    let donor_hidden = &donor[..donor.len() - 1];
    let other_hidden = &other[..other.len() - 1];
    let mut acts: Vec<Activation> = donor_hidden.iter().copied().take(wanted).collect();
    while acts.len() < wanted {
        let next = other_hidden
            .get(acts.len())
            .or_else(|| acts.last())
            .copied()
            .unwrap_or(Activation::Relu);
        acts.push(next);
    }
    acts.push(Activation::Sigmoid);
    acts
}

/// Resamples each gene from its prior with probability `rate`. Each hidden
/// activation entry counts as its own gene; when `hidden_layers` changes the
/// list is truncated or extended with fresh draws.
pub fn mutate<R: Rng + ?Sized>(genome: &Genome, rate: f64, space: &SearchSpace, rng: &mut R) -> Genome {
    let rate = rate.clamp(0.0, 1.0);
    let mut child = genome.clone();
    for gene in Gene::SCALAR {
        if rng.random_bool(rate) {
            child.resample_gene(gene, space, rng);
        }
    }
    let mut hidden: Vec<Activation> = child.activations[..child.activations.len() - 1].to_vec();
    hidden.truncate(child.hidden_layers + 1);
    for act in hidden.iter_mut() {
        if rng.random_bool(rate) {
            *act = space.sample_activation(rng);
        }
    }
    while hidden.len() < child.hidden_layers + 1 {
        hidden.push(space.sample_activation(rng));
    }
    hidden.push(Activation::Sigmoid);
    child.activations = hidden;
    child
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    const EXAMPLE_DOCUMENT: &str = r#"{ "hidden_layers": 2,
  "nodes": 40,
  "activation functions" : ["relu", "relu", "relu", "sigmoid"],
  "optimiser" : "Adam",
  "number of epochs" : 50,
  "batch size" : 2,
  "mutation rate" : 0.1,
  "population size" : 10,
  "cloning rate" : 0.6,
  "max generations" : 100
}"#;

    #[test]
    fn example_document_parses_and_round_trips() {
        let space = SearchSpace::default();
        let g = Genome::from_json(EXAMPLE_DOCUMENT, &space).unwrap();
        assert_eq!(g.hidden_layers, 2);
        assert_eq!(g.activations.len(), 4);
        assert_eq!(g.optimizer, Optimizer::Adam);
        assert_eq!(g.eco(), EcoGenes { mutation_rate: 0.1, population_size: 10, cloning_rate: 0.6, max_generations: 100 });
        let json = g.to_json();
        for key in [
            "\"hidden_layers\"",
            "\"nodes\"",
            "\"activation functions\"",
            "\"optimiser\"",
            "\"number of epochs\"",
            "\"batch size\"",
            "\"mutation rate\"",
            "\"population size\"",
            "\"cloning rate\"",
            "\"max generations\"",
        ] {
            assert!(json.contains(key), "{key}");
        }
        assert_eq!(Genome::from_json(&json, &space).unwrap(), g);
    }

    #[test]
    fn invalid_documents_rejected() {
        let space = SearchSpace::default();
        let bad_pop = EXAMPLE_DOCUMENT.replace("\"population size\" : 10", "\"population size\" : 51");
        assert!(Genome::from_json(&bad_pop, &space).is_err());
        let bad_out = EXAMPLE_DOCUMENT.replace("\"relu\", \"sigmoid\"]", "\"relu\", \"relu\"]");
        assert!(Genome::from_json(&bad_out, &space).is_err());
        let bad_rate = EXAMPLE_DOCUMENT.replace("0.6", "1.0");
        assert!(Genome::from_json(&bad_rate, &space).is_err());
    }

    #[test]
    fn identical_parents_give_identical_child() {
        let space = SearchSpace::default();
        let mut rng = seed::rng(5);
        for _ in 0..100 {
            let a = sample_genome(&space, &mut rng);
            assert_eq!(crossover(&a, &a, &mut rng), a);
        }
    }

    #[test]
    fn activation_rebuild_by_hand() {
        use Activation::*;
        // One hidden layer (3 entries) donor, three hidden layers (5 entries) other.
        let short = [Tanh, Relu, Sigmoid];
        let long = [Linear, Linear, Sigmoid, Relu, Sigmoid];
        assert_eq!(rebuild_activations(&short, &long, 3), vec![Tanh, Relu, Sigmoid, Relu, Sigmoid]);
        assert_eq!(rebuild_activations(&long, &short, 1), vec![Linear, Linear, Sigmoid]);
    }

    #[test]
    fn zero_rate_mutation_is_identity() {
        let space = SearchSpace::default();
        let mut rng = seed::rng(8);
        for _ in 0..100 {
            let g = sample_genome(&space, &mut rng);
            assert_eq!(mutate(&g, 0.0, &space, &mut rng), g);
        }
    }

    #[test]
    fn space_validation() {
        let mut space = SearchSpace::default();
        assert!(space.validate().is_ok());
        space.population_size = IntRange::new(2, 20);
        assert!(space.validate().is_err());
        let mut space = SearchSpace::default();
        space.optimizers.clear();
        assert!(space.validate().is_err());
    }

    #[test]
    fn mutation_prior_has_an_upper_tail() {
        let mut rng = seed::rng(17);
        let mut above = 0;
        for _ in 0..1_000_000 {
            let r = sample_mutation_rate(&mut rng);
            assert!(r > 0.0 && r < 1.0);
            above += usize::from(r > 0.5);
        }
        assert!(above > 0);
    }

    #[test]
    fn cloning_prior_median_below_half() {
        let mut rng = seed::rng(18);
        let mut draws: Vec<f64> = (0..100_000).map(|_| sample_cloning_rate(&mut rng)).collect();
        draws.sort_by(f64::total_cmp);
        let median = draws[draws.len() / 2];
        assert!(median < 0.5);
        assert!((median - 0.287).abs() < 0.01);
    }
}
