//! Cross-validated fitness of a few random genomes on Sonar.
//!
//!     cargo run --release --example evaluate_fitness -- [count]

use std::path::Path;

use enas::dataset::{load_csv, LabelColumn, LabelMapping};
use enas::fitness::{CrossValidation, Evaluator};
use enas::genome::{sample_genome, SearchSpace};
use enas::seed;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let count: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(5);
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/sonar.csv");
    let mapping = LabelMapping::from_pairs([("M", 0), ("R", 1)]);
    let data = load_csv(&path, &LabelColumn::Last, &mapping)?.normalize_min_max().shuffle(1);
    let split = data.kfold_split(5, 1)?;
    let cv = CrossValidation::new(&data, &split)?;

    let space = SearchSpace::default();
    let mut rng = seed::rng(11);
    for i in 0..count {
        let genome = sample_genome(&space, &mut rng);
        let record = cv.evaluate(&genome, i as u64);
        println!(
            "{} layers x {:>3} nodes, {:<7} {:>3} epochs, batch {:>2}: F1 {:.3} ({:.2}s)",
            genome.hidden_layers,
            genome.nodes,
            genome.optimizer.name(),
            genome.epochs,
            genome.batch_size,
            record.mean_f_measure,
            record.wall_time_secs
        );
    }
    Ok(())
}
