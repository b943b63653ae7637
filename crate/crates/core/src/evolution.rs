//! The generational loop.
//!
//! Each generation runs in a fixed order:
//!
//! 1. every unevaluated individual is evaluated (concurrently; each gets the
//!    seed `derive(run_seed, &[generation, id])`, so results do not depend on
//!    the size of the evaluator pool);
//! 2. in [`Mode::Enas`], the fittest individual's ecological genes are copied
//!    into the live parameters. The run halts if the generation counter now
//!    exceeds the promoted maximum; otherwise the population is resized to
//!    the promoted size, spawning fresh random individuals or culling the
//!    weakest ones;
//! 3. the next population is bred: elites first, then clones picked by
//!    tournament, then offspring (tournament parents, crossover, mutation).
//!
//! Fitness is computed once per individual and cached. Elites and clones carry
//! their record forward, so the best fitness never decreases while
//! `elitism_size >= 1`.

use std::cmp::Ordering;
use std::time::Instant;

use rand::seq::index;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fitness::{Evaluator, FitnessRecord};
use crate::genome::{self, Genome, GenomeError, IntRange, SearchSpace, MAX_GENERATIONS_LIMITS};
use crate::seed;

#[derive(Debug, Error)]
pub enum EvolutionError {
    #[error("invalid evolution configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Space(#[from] GenomeError),
    #[error("cannot build evaluator pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Static parameters fixed before the run.
    NasPlus,
    /// Ecological genes of the fittest individual drive the parameters.
    Enas,
}

impl Mode {
    pub const BOTH: [Mode; 2] = [Mode::NasPlus, Mode::Enas];

    /// File-name friendly identifier.
    pub fn slug(self) -> &'static str {
        match self {
            Mode::NasPlus => "nas_plus",
            Mode::Enas => "enas",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Mode::NasPlus => "NAS+",
            Mode::Enas => "ENAS",
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "nas+" | "nas_plus" | "nasplus" | "nas-plus" => Ok(Mode::NasPlus),
            "enas" => Ok(Mode::Enas),
            other => Err(format!("unknown mode {other:?} (expected nas_plus or enas)")),
        }
    }
}

/// The global evolutionary parameters in force for the current generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiveParams {
    pub mutation_rate: f64,
    pub population_size: usize,
    pub cloning_rate: f64,
    pub max_generations: usize,
    pub crossover_rate: f64,
    pub tournament_size: usize,
    pub elitism_size: usize,
}

impl LiveParams {
    /// Baseline parameters of the full-scale experiments. The cloning rate is
    /// the ecological prior's mean.
    pub fn full_scale() -> Self {
        Self {
            mutation_rate: 0.2,
            population_size: 100,
            cloning_rate: 0.3,
            max_generations: 500,
            crossover_rate: 0.9,
            tournament_size: 4,
            elitism_size: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    /// NAS+ parameters. In ENAS mode only crossover rate, tournament size and
    /// elitism size are taken from here; the other four come from genes.
    pub static_params: LiveParams,
    pub space: SearchSpace,
    /// Upper bound applied to the live generation limit in both modes.
    pub max_generations_cap: usize,
    /// Evaluator pool size; 0 lets the pool pick one thread per core.
    #[serde(default)]
    pub jobs: usize,
}

impl EvolutionConfig {
    pub fn full_scale() -> Self {
        Self { static_params: LiveParams::full_scale(), space: SearchSpace::default(), max_generations_cap: 500, jobs: 0 }
    }

    /// Desk-scale setting: ENAS population bounds `[3, 20]`, 60 generations at
    /// most, and a 20-strong NAS+ baseline.
    pub fn desk() -> Self {
        let mut config = Self::full_scale();
        config.space.population_size = IntRange::new(3, 20);
        config.static_params.population_size = 20;
        config.static_params.max_generations = 60;
        config.max_generations_cap = 60;
        config
    }

    pub fn validate(&self) -> Result<(), EvolutionError> {
        self.space.validate()?;
        let p = &self.static_params;
        let bad = |msg: String| Err(EvolutionError::Config(msg));
        for (name, rate) in [("mutation_rate", p.mutation_rate), ("cloning_rate", p.cloning_rate), ("crossover_rate", p.crossover_rate)] {
            if !(0.0..=1.0).contains(&rate) {
                return bad(format!("{name} {rate} outside [0, 1]"));
            }
        }
        if p.population_size == 0 || p.tournament_size == 0 {
            return bad("population and tournament sizes must be positive".into());
        }
        if !MAX_GENERATIONS_LIMITS.contains(p.max_generations) || !MAX_GENERATIONS_LIMITS.contains(self.max_generations_cap) {
            return bad("generation limits must lie in [1, 500]".into());
        }
        if p.elitism_size >= self.space.population_size.min || p.elitism_size >= p.population_size {
            return bad(format!("elitism size {} leaves no room for offspring", p.elitism_size));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub id: u64,
    pub genome: Genome,
    pub fitness: Option<FitnessRecord>,
    pub birth_generation: usize,
}

impl Individual {
    /// Cached mean F-measure, or `-inf` before evaluation.
    pub fn f1(&self) -> f64 {
        self.fitness.as_ref().map_or(f64::NEG_INFINITY, |f| f.mean_f_measure)
    }
}

/// Descending fitness, ties to the lower id.
fn fitter(a: &Individual, b: &Individual) -> Ordering {
    b.f1().total_cmp(&a.f1()).then(a.id.cmp(&b.id))
}

/// Culling order: ascending fitness, then older birth, then lower id.
fn weaker(a: &Individual, b: &Individual) -> Ordering {
    a.f1().total_cmp(&b.f1()).then(a.birth_generation.cmp(&b.birth_generation)).then(a.id.cmp(&b.id))
}

/// One row of a run's history, describing the population at the end of a
/// generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best_f1: f64,
    pub mean_f1: f64,
    pub mutation_rate: f64,
    pub population_size: usize,
    pub cloning_rate: f64,
    pub max_generations: usize,
    pub models_trained_cumulative: usize,
}

/// Log entry emitted for every fitness evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationEvent {
    pub generation: usize,
    pub individual_id: u64,
    pub genome: Genome,
    pub per_fold: Vec<f64>,
    pub mean_f_measure: f64,
    pub wall_time_secs: f64,
}

#[derive(Debug, Clone)]
pub struct EvolutionState {
    pub mode: Mode,
    pub run_seed: u64,
    pub generation: usize,
    pub live: LiveParams,
    pub population: Vec<Individual>,
    pub history: Vec<GenerationRecord>,
    pub models_trained: usize,
    pub evaluations: Vec<EvaluationEvent>,
    rng: ChaCha8Rng,
    next_id: u64,
}

impl EvolutionState {
    /// Fittest individual (ties to the lower id).
    pub fn fittest(&self) -> Option<&Individual> {
        self.population.iter().min_by(|a, b| fitter(a, b))
    }

    pub fn mean_f1(&self) -> f64 {
        if self.population.is_empty() {
            return 0.0;
        }
        self.population.iter().map(Individual::f1).sum::<f64>() / self.population.len() as f64
    }

    fn record(&self) -> GenerationRecord {
        GenerationRecord {
            generation: self.generation,
            best_f1: self.fittest().map_or(0.0, Individual::f1),
            mean_f1: self.mean_f1(),
            mutation_rate: self.live.mutation_rate,
            population_size: self.live.population_size,
            cloning_rate: self.live.cloning_rate,
            max_generations: self.live.max_generations,
            models_trained_cumulative: self.models_trained,
        }
    }

    fn refresh_history(&mut self) {
        let record = self.record();
        match self.history.last_mut() {
            Some(last) if last.generation == record.generation => *last = record,
            _ => self.history.push(record),
        }
    }

    fn new_id(&mut self) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }
}

/// Picks `min(tournament_size, population.len())` distinct individuals
/// uniformly and returns the index of the fittest (ties to the lower id).
///
/// Panics on an empty population.
pub fn tournament_select<R: Rng + ?Sized>(population: &[Individual], tournament_size: usize, rng: &mut R) -> usize {
    assert!(!population.is_empty(), "tournament on an empty population");
    let size = tournament_size.clamp(1, population.len());
    index::sample(rng, population.len(), size)
        .into_iter()
        .min_by(|&a, &b| fitter(&population[a], &population[b]))
        .expect("non-empty tournament")
}

/// Clones beyond the elite: the total clone count is
/// `round_half_up(cloning_rate * population_size)`, floored at
/// `elitism_size`, and the elite counts toward it.
pub fn clone_count(population_size: usize, cloning_rate: f64, elitism_size: usize) -> usize {
    let total = ((cloning_rate * population_size as f64) + 0.5).floor().max(0.0) as usize;
    total.max(elitism_size).min(population_size).saturating_sub(elitism_size)
}

/// What [`Evolution::resize_population`] did.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResizeOutcome {
    pub spawned: Vec<u64>,
    pub culled: Vec<Individual>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EcoOutcome {
    Continue(ResizeOutcome),
    Halt,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub halted: bool,
    pub resize: Option<ResizeOutcome>,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub mode: Mode,
    pub run_seed: u64,
    pub history: Vec<GenerationRecord>,
    pub best: Individual,
    pub models_trained: usize,
    pub wall_time_secs: f64,
    /// Stopped because the generation counter exceeded the promoted limit.
    pub halted: bool,
    pub generations: usize,
    pub evaluations: Vec<EvaluationEvent>,
}

impl RunResult {
    pub fn best_f1(&self) -> f64 {
        self.best.f1()
    }
}

/// Drives runs for one evaluator.
pub struct Evolution<'e, E: Evaluator + ?Sized> {
    config: EvolutionConfig,
    evaluator: &'e E,
    pool: rayon::ThreadPool,
}

impl<'e, E: Evaluator + ?Sized> Evolution<'e, E> {
    pub fn new(config: EvolutionConfig, evaluator: &'e E) -> Result<Self, EvolutionError> {
        config.validate()?;
        let pool = rayon::ThreadPoolBuilder::new().num_threads(config.jobs).build()?;
        Ok(Self { config, evaluator, pool })
    }

    pub fn config(&self) -> &EvolutionConfig {
        &self.config
    }

    fn evaluate_pending(&self, state: &mut EvolutionState) {
        let pending: Vec<(usize, u64)> = state
            .population
            .iter()
            .enumerate()
            .filter(|(_, ind)| ind.fitness.is_none())
            .map(|(i, ind)| (i, seed::derive(state.run_seed, &[state.generation as u64, ind.id])))
            .collect();
        if pending.is_empty() {
            return;
        }
        let population = &state.population;
        let evaluator = self.evaluator;
        let records: Vec<FitnessRecord> = self.pool.install(|| {
            pending.par_iter().map(|&(i, s)| evaluator.evaluate(&population[i].genome, s)).collect()
        });
        for ((i, _), record) in pending.into_iter().zip(records) {
            let ind = &mut state.population[i];
            state.models_trained += record.models_trained;
            state.evaluations.push(EvaluationEvent {
                generation: state.generation,
                individual_id: ind.id,
                genome: ind.genome.clone(),
                per_fold: record.per_fold.clone(),
                mean_f_measure: record.mean_f_measure,
                wall_time_secs: record.wall_time_secs,
            });
            ind.fitness = Some(record);
        }
    }

    fn spawn(&self, state: &mut EvolutionState, count: usize) -> Vec<u64> {
        let mut ids = Vec::with_capacity(count);
        for _ in 0..count {
            let genome = genome::sample_genome(&self.config.space, &mut state.rng);
            let id = state.new_id();
            state.population.push(Individual { id, genome, fitness: None, birth_generation: state.generation });
            ids.push(id);
        }
        ids
    }

    /// Random, fully evaluated initial population (generation 0). In ENAS
    /// mode the initial size is drawn from the population-size prior and the
    /// fittest individual's genes are applied straight away.
    pub fn init(&self, mode: Mode, run_seed: u64) -> Result<EvolutionState, EvolutionError> {
        let cap = self.config.max_generations_cap;
        let mut live = self.config.static_params;
        live.max_generations = live.max_generations.min(cap);
        let mut rng = seed::rng(run_seed);
        if mode == Mode::Enas {
            live.population_size = self.config.space.population_size.sample(&mut rng);
            live.max_generations = cap;
            live.tournament_size = live.tournament_size.min(live.population_size);
        } else if live.population_size < live.tournament_size {
            return Err(EvolutionError::Config(format!(
                "population of {} is smaller than the tournament size {}",
                live.population_size, live.tournament_size
            )));
        }
        let mut state = EvolutionState {
            mode,
            run_seed,
            generation: 0,
            live,
            population: Vec::with_capacity(live.population_size),
            history: Vec::new(),
            models_trained: 0,
            evaluations: Vec::new(),
            rng,
            next_id: 0,
        };
        self.spawn(&mut state, live.population_size);
        self.evaluate_pending(&mut state);
        state.refresh_history();
        if mode == Mode::Enas {
            self.apply_eco_genes(&mut state);
        }
        Ok(state)
    }

    /// Breeds, evaluates and records generation `g + 1`.
    pub fn next_generation(&self, state: &mut EvolutionState) {
        let live = state.live;
        let target = live.population_size;
        let mut ranked: Vec<usize> = (0..state.population.len()).collect();
        ranked.sort_by(|&a, &b| fitter(&state.population[a], &state.population[b]));

        let elites = live.elitism_size.min(target).min(ranked.len());
        let mut next: Vec<Individual> = ranked[..elites].iter().map(|&i| state.population[i].clone()).collect();
        let clones = clone_count(target, live.cloning_rate, live.elitism_size).min(target - elites);
        let birth = state.generation + 1;
        for _ in 0..clones {
            let i = tournament_select(&state.population, live.tournament_size, &mut state.rng);
            let parent = &state.population[i];
            let (genome, fitness) = (parent.genome.clone(), parent.fitness.clone());
            let id = state.new_id();
            next.push(Individual { id, genome, fitness, birth_generation: birth });
        }
        while next.len() < target {
            let a = tournament_select(&state.population, live.tournament_size, &mut state.rng);
            let b = tournament_select(&state.population, live.tournament_size, &mut state.rng);
            let child = if state.rng.random_bool(live.crossover_rate) {
                genome::crossover(&state.population[a].genome, &state.population[b].genome, &mut state.rng)
            } else {
                state.population[a].genome.clone()
            };
            let child = genome::mutate(&child, live.mutation_rate, &self.config.space, &mut state.rng);
            let id = state.new_id();
            next.push(Individual { id, genome: child, fitness: None, birth_generation: birth });
        }

        state.population = next;
        state.generation += 1;
        self.evaluate_pending(state);
        state.refresh_history();
    }

    /// Promotes the fittest individual's ecological genes to the live
    /// parameters, then halts or resizes the population.
    pub fn apply_eco_genes(&self, state: &mut EvolutionState) -> EcoOutcome {
        let Some(fittest) = state.fittest() else {
            return EcoOutcome::Halt;
        };
        let eco = fittest.genome.eco();
        state.live.mutation_rate = eco.mutation_rate;
        state.live.cloning_rate = eco.cloning_rate;
        state.live.max_generations = eco.max_generations.min(self.config.max_generations_cap);
        if state.generation > state.live.max_generations {
            state.refresh_history();
            return EcoOutcome::Halt;
        }
        let resize = self.resize_population(state, eco.population_size);
        state.live.tournament_size = self.config.static_params.tournament_size.min(state.population.len());
        state.refresh_history();
        EcoOutcome::Continue(resize)
    }

    /// Grows the population with fresh random (evaluated) individuals or
    /// culls the `n` weakest. Sizes outside the configured bounds are clamped.
    pub fn resize_population(&self, state: &mut EvolutionState, new_size: usize) -> ResizeOutcome {
        let bounds = self.config.space.population_size;
        let size = bounds.clamp(new_size);
        if size != new_size {
            log::warn!("population size {new_size} outside [{}, {}], using {size}", bounds.min, bounds.max);
        }
        let current = state.population.len();
        let mut outcome = ResizeOutcome::default();
        match size.cmp(&current) {
            Ordering::Greater => {
                outcome.spawned = self.spawn(state, size - current);
                self.evaluate_pending(state);
            }
            Ordering::Less => {
                let n = current - size;
                let mut order: Vec<usize> = (0..current).collect();
                order.sort_by(|&a, &b| weaker(&state.population[a], &state.population[b]));
                let mut doomed = vec![false; current];
                for &i in &order[..n] {
                    doomed[i] = true;
                }
                let mut survivors = Vec::with_capacity(size);
                for (ind, gone) in std::mem::take(&mut state.population).into_iter().zip(doomed) {
                    if gone {
                        outcome.culled.push(ind);
                    } else {
                        survivors.push(ind);
                    }
                }
                state.population = survivors;
            }
            Ordering::Equal => {}
        }
        state.live.population_size = size;
        outcome
    }

    /// One generation: breed, then (ENAS) apply the ecological genes.
    pub fn step(&self, state: &mut EvolutionState) -> StepReport {
        self.next_generation(state);
        if state.mode == Mode::NasPlus {
            return StepReport { halted: false, resize: None };
        }
        match self.apply_eco_genes(state) {
            EcoOutcome::Halt => StepReport { halted: true, resize: None },
            EcoOutcome::Continue(resize) => StepReport { halted: false, resize: Some(resize) },
        }
    }

    pub fn run(&self, mode: Mode, run_seed: u64) -> Result<RunResult, EvolutionError> {
        let started = Instant::now();
        let mut state = self.init(mode, run_seed)?;
        let mut halted = false;
        while state.generation < state.live.max_generations {
            let report = self.step(&mut state);
            if let Some(h) = state.history.last() {
                log::debug!(
                    "{mode} generation {}: best {:.4}, mean {:.4}, population {}, models {}",
                    h.generation,
                    h.best_f1,
                    h.mean_f1,
                    h.population_size,
                    h.models_trained_cumulative
                );
            }
            if report.halted {
                halted = true;
                break;
            }
        }
        let best = state.fittest().cloned().expect("population is never empty");
        Ok(RunResult {
            mode,
            run_seed,
            best,
            models_trained: state.models_trained,
            wall_time_secs: started.elapsed().as_secs_f64(),
            halted,
            generations: state.generation,
            history: state.history,
            evaluations: state.evaluations,
        })
    }
}
