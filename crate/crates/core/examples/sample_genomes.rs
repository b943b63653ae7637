//! Draws genomes from the priors, breeds two of them and prints the result
//! as JSON.
//!
//!     cargo run --example sample_genomes

use enas::genome::{crossover, mutate, sample_genome, BetaPrior, SearchSpace};
use enas::seed;

fn main() {
    let space = SearchSpace::default();
    let mut rng = seed::rng(9);
    let draws: Vec<_> = (0..10_000).map(|_| sample_genome(&space, &mut rng)).collect();
    let mean = |f: &dyn Fn(&enas::Genome) -> f64| draws.iter().map(f).sum::<f64>() / draws.len() as f64;
    println!("mutation rate mean {:.4} (prior {:.4})", mean(&|g| g.mutation_rate), BetaPrior::MUTATION_RATE.mean());
    println!("cloning rate mean  {:.4} (prior {:.4})", mean(&|g| g.cloning_rate), BetaPrior::CLONING_RATE.mean());
    println!("population mean    {:.2}", mean(&|g| g.population_size as f64));
    println!("generation mean    {:.1}", mean(&|g| g.max_generations as f64));

    let child = crossover(&draws[0], &draws[1], &mut rng);
    let child = mutate(&child, child.mutation_rate, &space, &mut rng);
    println!("{}", child.to_json());
}
