//! Runs a NAS+ / ENAS comparison described by a JSON config.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use enas::experiment::{self, ExperimentConfig};
use enas::genome::IntRange;
use enas::Mode;

#[derive(Debug, Parser)]
#[command(name = "enas", version, about = "Evolve MLP architectures with NAS+ and ENAS")]
struct Args {
    /// Experiment config (JSON). Defaults to the bundled desk setup under ./data.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Only run these datasets (by name). Repeatable.
    #[arg(long = "dataset")]
    datasets: Vec<String>,
    /// Only run these modes: nas_plus, enas. Repeatable.
    #[arg(long = "mode")]
    modes: Vec<Mode>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// ENAS population size bounds, as MIN,MAX.
    #[arg(long, value_parser = parse_bounds)]
    pop_bounds: Option<IntRange>,
    #[arg(long)]
    max_generations_cap: Option<usize>,
    /// Evaluation threads; 0 uses every core.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    folds: Option<usize>,
    /// Print the resolved config and exit.
    #[arg(long)]
    print_config: bool,
}

fn parse_bounds(s: &str) -> Result<IntRange, String> {
    let (lo, hi) = s.split_once(',').ok_or("expected MIN,MAX")?;
    let lo: usize = lo.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: usize = hi.trim().parse().map_err(|e| format!("{e}"))?;
    if lo > hi {
        return Err(format!("{lo} > {hi}"));
    }
    Ok(IntRange::new(lo, hi))
}

fn resolve(args: &Args) -> Result<ExperimentConfig, String> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::from_file(path).map_err(|e| e.to_string())?,
        None => ExperimentConfig::desk("data".as_ref(), "results"),
    };
    if !args.datasets.is_empty() {
        for name in &args.datasets {
            if !config.datasets.iter().any(|d| &d.name == name) {
                return Err(format!("unknown dataset {name}"));
            }
        }
        config.datasets.retain(|d| args.datasets.contains(&d.name));
    }
    if !args.modes.is_empty() {
        config.modes = args.modes.clone();
    }
    if let Some(runs) = args.runs {
        config.runs = runs;
    }
    if let Some(seed) = args.seed {
        config.base_seed = seed;
    }
    if let Some(out) = &args.out {
        config.output_dir = out.clone();
    }
    if let Some(bounds) = args.pop_bounds {
        config.evolution.space.population_size = bounds;
    }
    if let Some(cap) = args.max_generations_cap {
        config.evolution.max_generations_cap = cap;
        config.evolution.static_params.max_generations = config.evolution.static_params.max_generations.min(cap);
    }
    if let Some(jobs) = args.jobs {
        config.evolution.jobs = jobs;
    }
    if let Some(folds) = args.folds {
        config.folds = folds;
    }
    Ok(config)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    let config = match resolve(&args) {
        Ok(c) => c,
        Err(e) => {
            log::error!("{e}");
            return ExitCode::FAILURE;
        }
    };
    if args.print_config {
        println!("{}", serde_json::to_string_pretty(&config).expect("config serializes"));
        return ExitCode::SUCCESS;
    }
    let report = match experiment::run_experiment(&config) {
        Ok(r) => r,
        Err(e) => {
            log::error!("{e}");
            return ExitCode::FAILURE;
        }
    };
    print!("{}", report.summary.render());
    if let Some(eff) = report.efficiency.as_ref().and_then(|e| e.overall()) {
        println!(
            "ENAS vs NAS+: models {:+.1}%, wall time {:+.1}%, ENAS fewer in {:.0}% of pairs",
            eff.models_delta_pct,
            eff.wall_delta_pct,
            100.0 * eff.enas_fewer_fraction
        );
    }
    println!("artifacts in {}", report.output_dir.display());
    ExitCode::SUCCESS
}
