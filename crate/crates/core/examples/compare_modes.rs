//! Paired NAS+ and ENAS runs on the synthetic landscape, with the resulting
//! efficiency report.
//!
//!     cargo run --release --example compare_modes -- [pairs]

use enas::evolution::{Evolution, EvolutionConfig, Mode};
use enas::experiment::{summarize_efficiency, RunSummary, SummaryTable};
use enas::fitness::SyntheticLandscape;
use enas::seed;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let pairs: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(10);
    let landscape = SyntheticLandscape::default();
    let engine = Evolution::new(EvolutionConfig::desk(), &landscape)?;
    let mut runs = Vec::new();
    for r in 0..pairs {
        let run_seed = seed::derive(99, &[r as u64, seed::RUN]);
        for mode in Mode::BOTH {
            runs.push(RunSummary::from_result("synthetic", r, &engine.run(mode, run_seed)?));
        }
    }
    print!("{}", SummaryTable::from_runs(&runs).render());
    for row in summarize_efficiency(&runs)?.rows.iter().filter(|r| r.dataset == "all") {
        println!(
            "models: NAS+ {:.1}, ENAS {:.1} ({:+.1}%); ENAS fewer in {:.0}% of {} pairs",
            row.nas_plus_mean_models,
            row.enas_mean_models,
            row.models_delta_pct,
            100.0 * row.enas_fewer_fraction,
            row.pairs
        );
    }
    Ok(())
}
