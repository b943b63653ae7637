//! Loads the four bundled datasets, scales them and prints fold sizes.
//!
//!     cargo run --example load_dataset

use std::path::Path;

use enas::dataset::load_csv;
use enas::experiment::ExperimentConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data");
    for spec in ExperimentConfig::bundled_datasets(&data_dir) {
        let data = load_csv(&spec.path, &spec.label_column, &spec.label_mapping)?.normalize_min_max();
        let positives = data.labels().iter().filter(|&&y| y == 1).count();
        let split = data.shuffle(0).kfold_split(5, 0)?;
        let sizes: Vec<usize> = split.folds().iter().map(Vec::len).collect();
        println!(
            "{:<6} {:>4} instances x {:>2} attributes, {:>3} positive, folds {:?}",
            spec.name,
            data.instance_count(),
            data.attribute_count(),
            positives,
            sizes
        );
    }
    Ok(())
}
