//! One ENAS run on the synthetic fitness landscape, printing how the live
//! parameters move from generation to generation.
//!
//!     cargo run --release --example enas_run -- [seed]

use enas::evolution::{Evolution, EvolutionConfig, Mode};
use enas::fitness::SyntheticLandscape;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(1);
    let landscape = SyntheticLandscape::default();
    let engine = Evolution::new(EvolutionConfig::desk(), &landscape)?;
    let result = engine.run(Mode::Enas, seed)?;
    println!("gen  best    mean    mut    pop  clone  max_gen  models");
    for h in &result.history {
        println!(
            "{:>3}  {:.4}  {:.4}  {:.3}  {:>3}  {:.3}  {:>7}  {:>6}",
            h.generation,
            h.best_f1,
            h.mean_f1,
            h.mutation_rate,
            h.population_size,
            h.cloning_rate,
            h.max_generations,
            h.models_trained_cumulative
        );
    }
    println!(
        "{} after {} generations, best {:.4}",
        if result.halted { "halted" } else { "reached the cap" },
        result.generations,
        result.best_f1()
    );
    println!("{}", result.best.genome.to_json());
    Ok(())
}
