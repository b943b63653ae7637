//! ENAS on Sonar at desk scale: population bounds [3, 20], at most 60
//! generations, 5-fold cross-validation, five independent runs.
//!
//!     cargo run --release --example sonar_desk -- [runs] [out_dir]

use std::path::Path;
use std::time::Instant;

use enas::experiment::{run_experiment, ExperimentConfig};
use enas::Mode;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let mut args = std::env::args().skip(1);
    let runs: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(5);
    let out = args.next().unwrap_or_else(|| "results/sonar_desk".into());

    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data");
    let mut config = ExperimentConfig::desk(&data, out);
    config.datasets.retain(|d| d.name == "sonar");
    config.modes = vec![Mode::Enas];
    config.runs = runs;

    let started = Instant::now();
    let report = run_experiment(&config)?;
    for r in &report.runs {
        println!(
            "run {}: best F1 {:.4} after {} generations, {} models",
            r.run, r.best_f1, r.generations, r.models_trained
        );
    }
    let above = report.runs.iter().filter(|r| r.best_f1 >= 0.80).count();
    println!("{above}/{} runs reached F1 >= 0.80 in {:.0}s", report.runs.len(), started.elapsed().as_secs_f64());
    Ok(())
}
