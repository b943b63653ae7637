//! Repeated paired runs over several datasets, and the artifacts they leave.
//!
//! For every dataset and run index `r`, the dataset is shuffled and split
//! with seeds derived from `(base_seed, dataset_index, r)`, then each
//! configured mode runs on that same split with the same run seed. The output
//! directory receives:
//!
//! | file                                       | content                                   |
//! |--------------------------------------------|-------------------------------------------|
//! | `history_<dataset>_<mode>_<r>.csv`         | one row per generation, with model counts |
//! | `plot_<dataset>_<mode>_<r>.csv`            | fitness and parameter trajectories        |
//! | `best_genome_<dataset>_<mode>_<r>.json`    | fittest genome of the run                 |
//! | `folds_<dataset>_<r>.csv`                  | `instance_index,fold_id`                  |
//! | `runs.csv`                                 | per-run totals                            |
//! | `summary.csv`, `summary.txt`               | fittest / average / range per cell        |
//! | `efficiency.csv`                           | NAS+ vs ENAS model counts and wall time   |
//! | `events.jsonl`                             | one JSON record per event                 |
//!
//! [`audit`] recomputes the summary and efficiency tables from the history
//! and run files and reports any difference.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::dataset::{self, Dataset, DatasetError, LabelColumn, LabelMapping};
use crate::evolution::{Evolution, EvolutionConfig, EvolutionError, GenerationRecord, Mode, RunResult};
use crate::fitness::CrossValidation;
use crate::seed;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment configuration: {0}")]
    Config(String),
    #[error("dataset {name}: {source}")]
    Dataset {
        name: String,
        #[source]
        source: DatasetError,
    },
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("cannot write plot data for an empty history")]
    EmptyHistory,
    #[error("runs are not paired: {0}")]
    Unpaired(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub name: String,
    pub path: PathBuf,
    #[serde(default)]
    pub label_column: LabelColumn,
    pub label_mapping: LabelMapping,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub datasets: Vec<DatasetSpec>,
    #[serde(default = "both_modes")]
    pub modes: Vec<Mode>,
    pub runs: usize,
    pub base_seed: u64,
    #[serde(default = "default_folds")]
    pub folds: usize,
    pub evolution: EvolutionConfig,
    pub output_dir: PathBuf,
}

fn both_modes() -> Vec<Mode> {
    Mode::BOTH.to_vec()
}

fn default_folds() -> usize {
    5
}

impl ExperimentConfig {
    /// The four bundled datasets under `data_dir`.
    pub fn bundled_datasets(data_dir: &Path) -> Vec<DatasetSpec> {
        let spec = |name: &str, file: &str, pairs: [(&str, u8); 2]| DatasetSpec {
            name: name.to_string(),
            path: data_dir.join(file),
            label_column: LabelColumn::Last,
            label_mapping: LabelMapping::from_pairs(pairs),
        };
        vec![
            spec("heart", "heart.csv", [("1", 0), ("2", 1)]),
            spec("sonar", "sonar.csv", [("M", 0), ("R", 1)]),
            spec("wdbc", "wdbc.csv", [("B", 0), ("M", 1)]),
            spec("pima", "pima.csv", [("tested_negative", 0), ("tested_positive", 1)]),
        ]
    }

    /// Desk-scale comparison of both modes on the bundled datasets.
    pub fn desk(data_dir: &Path, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            datasets: Self::bundled_datasets(data_dir),
            modes: both_modes(),
            runs: 5,
            base_seed: 2024,
            folds: 5,
            evolution: EvolutionConfig::desk(),
            output_dir: output_dir.into(),
        }
    }

    /// Reads a JSON config. Relative dataset paths and the output directory
    /// are resolved against the config file's directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ExperimentError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let mut config: Self = serde_json::from_str(&text)
            .map_err(|e| ExperimentError::Parse { path: path.to_path_buf(), message: e.to_string() })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        for d in &mut config.datasets {
            if d.path.is_relative() {
                d.path = base.join(&d.path);
            }
        }
        if config.output_dir.is_relative() {
            config.output_dir = base.join(&config.output_dir);
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |msg: String| Err(ExperimentError::Config(msg));
        if self.runs == 0 {
            return bad("runs must be at least 1".into());
        }
        if self.folds < 2 {
            return bad("folds must be at least 2".into());
        }
        if self.datasets.is_empty() || self.modes.is_empty() {
            return bad("need at least one dataset and one mode".into());
        }
        let mut names: Vec<&str> = self.datasets.iter().map(|d| d.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        if names.len() != self.datasets.len() {
            return bad("dataset names must be unique".into());
        }
        for d in &self.datasets {
            if !d.path.is_file() {
                return bad(format!("dataset file {} does not exist", d.path.display()));
            }
        }
        self.evolution.validate()?;
        Ok(())
    }
}

/// Totals of one completed run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub dataset: String,
    pub mode: Mode,
    pub run: usize,
    pub best_f1: f64,
    pub models_trained: usize,
    pub wall_time_secs: f64,
    pub generations: usize,
    pub halted: bool,
}

impl RunSummary {
    pub fn from_result(dataset: &str, run: usize, result: &RunResult) -> Self {
        Self {
            dataset: dataset.to_string(),
            mode: result.mode,
            run,
            best_f1: result.best_f1(),
            models_trained: result.models_trained,
            wall_time_secs: result.wall_time_secs,
            generations: result.generations,
            halted: result.halted,
        }
    }
}

/// Run-level statistics of one (dataset, mode) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub dataset: String,
    pub mode: Mode,
    pub runs: usize,
    pub fittest: f64,
    pub average: f64,
    pub min: f64,
    pub range: f64,
    pub models_trained: usize,
    pub wall_time_secs: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub rows: Vec<SummaryRow>,
}

impl SummaryTable {
    /// Groups runs by (dataset, mode) in order of first appearance.
    pub fn from_runs(runs: &[RunSummary]) -> Self {
        let mut keys: Vec<(String, Mode)> = Vec::new();
        for r in runs {
            let key = (r.dataset.clone(), r.mode);
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
        let rows = keys
            .into_iter()
            .map(|(dataset, mode)| {
                let cell: Vec<&RunSummary> = runs.iter().filter(|r| r.dataset == dataset && r.mode == mode).collect();
                let fittest = cell.iter().map(|r| r.best_f1).fold(f64::NEG_INFINITY, f64::max);
                let min = cell.iter().map(|r| r.best_f1).fold(f64::INFINITY, f64::min);
                let average = cell.iter().map(|r| r.best_f1).sum::<f64>() / cell.len() as f64;
                SummaryRow {
                    dataset,
                    mode,
                    runs: cell.len(),
                    fittest,
                    average,
                    min,
                    range: fittest - min,
                    models_trained: cell.iter().map(|r| r.models_trained).sum(),
                    wall_time_secs: cell.iter().map(|r| r.wall_time_secs).sum(),
                }
            })
            .collect();
        Self { rows }
    }

    pub fn row(&self, dataset: &str, mode: Mode) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.dataset == dataset && r.mode == mode)
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), ExperimentError> {
        let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
        let mut out = String::from("dataset,mode,runs,fittest,average,min,range,models_trained,wall_time_secs\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                r.dataset,
                r.mode.slug(),
                r.runs,
                r.fittest,
                r.average,
                r.min,
                r.range,
                r.models_trained,
                r.wall_time_secs
            ));
        }
        w.write_all(out.as_bytes()).and_then(|_| w.flush()).map_err(io_err(path))
    }

    /// Side-by-side table: one line per dataset, fittest / average / range
    /// for each mode.
    pub fn render(&self) -> String {
        let mut datasets: Vec<&str> = Vec::new();
        let mut modes: Vec<Mode> = Vec::new();
        for r in &self.rows {
            if !datasets.contains(&r.dataset.as_str()) {
                datasets.push(&r.dataset);
            }
            if !modes.contains(&r.mode) {
                modes.push(r.mode);
            }
        }
        modes.sort();
        let mut out = format!("{:<10}", "Dataset");
        for m in &modes {
            out.push_str(&format!(" | {:^26}", m.label()));
        }
        out.push('\n');
        out.push_str(&format!("{:<10}", ""));
        for _ in &modes {
            out.push_str(&format!(" | {:>8} {:>8} {:>8}", "Fittest", "Avg.", "Range"));
        }
        out.push('\n');
        for d in datasets {
            out.push_str(&format!("{d:<10}"));
            for &m in &modes {
                match self.row(d, m) {
                    Some(r) => out.push_str(&format!(" | {:>8.3} {:>8.3} {:>8.3}", r.fittest, r.average, r.range)),
                    None => out.push_str(&format!(" | {:>26}", "-")),
                }
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyRow {
    /// Dataset name, or `all` for the pooled row.
    pub dataset: String,
    pub pairs: usize,
    pub nas_plus_mean_models: f64,
    pub enas_mean_models: f64,
    /// `100 * (enas - nas_plus) / nas_plus`; negative means ENAS trained fewer.
    pub models_delta_pct: f64,
    pub nas_plus_mean_wall_secs: f64,
    pub enas_mean_wall_secs: f64,
    pub wall_delta_pct: f64,
    /// Share of pairs in which ENAS trained strictly fewer models.
    pub enas_fewer_fraction: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyReport {
    pub rows: Vec<EfficiencyRow>,
}

impl EfficiencyReport {
    pub fn overall(&self) -> Option<&EfficiencyRow> {
        self.rows.iter().find(|r| r.dataset == "all")
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), ExperimentError> {
        let mut out = String::from(
            "dataset,pairs,nas_plus_mean_models,enas_mean_models,models_delta_pct,\
             nas_plus_mean_wall_secs,enas_mean_wall_secs,wall_delta_pct,enas_fewer_fraction\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                r.dataset,
                r.pairs,
                r.nas_plus_mean_models,
                r.enas_mean_models,
                r.models_delta_pct,
                r.nas_plus_mean_wall_secs,
                r.enas_mean_wall_secs,
                r.wall_delta_pct,
                r.enas_fewer_fraction
            ));
        }
        fs::write(path, out).map_err(io_err(path))
    }
}

fn pct_delta(baseline: f64, other: f64) -> f64 {
    if baseline == other {
        0.0
    } else if baseline == 0.0 {
        f64::INFINITY.copysign(other)
    } else {
        100.0 * (other - baseline) / baseline
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

type PairSlot<'a> = (Option<&'a RunSummary>, Option<&'a RunSummary>);

/// Pairs every NAS+ run with the ENAS run of the same dataset and run index
/// and compares their cost, per dataset and pooled.
pub fn summarize_efficiency(runs: &[RunSummary]) -> Result<EfficiencyReport, ExperimentError> {
    let mut pairs: BTreeMap<(String, usize), PairSlot> = BTreeMap::new();
    let mut order: Vec<String> = Vec::new();
    for r in runs {
        if !order.contains(&r.dataset) {
            order.push(r.dataset.clone());
        }
        let slot = pairs.entry((r.dataset.clone(), r.run)).or_default();
        let side = match r.mode {
            Mode::NasPlus => &mut slot.0,
            Mode::Enas => &mut slot.1,
        };
        if side.replace(r).is_some() {
            return Err(ExperimentError::Unpaired(format!("duplicate {} run {} on {}", r.mode, r.run, r.dataset)));
        }
    }
    let mut matched: Vec<(&RunSummary, &RunSummary)> = Vec::new();
    for ((dataset, run), (nas, enas)) in &pairs {
        match (nas, enas) {
            (Some(n), Some(e)) => matched.push((n, e)),
            _ => return Err(ExperimentError::Unpaired(format!("run {run} on {dataset} lacks a partner"))),
        }
    }
    if matched.is_empty() {
        return Err(ExperimentError::Unpaired("no runs".into()));
    }
    let row = |dataset: &str, set: &[&(&RunSummary, &RunSummary)]| {
        let nas_models = mean(set.iter().map(|(n, _)| n.models_trained as f64));
        let enas_models = mean(set.iter().map(|(_, e)| e.models_trained as f64));
        let nas_wall = mean(set.iter().map(|(n, _)| n.wall_time_secs));
        let enas_wall = mean(set.iter().map(|(_, e)| e.wall_time_secs));
        let fewer = set.iter().filter(|(n, e)| e.models_trained < n.models_trained).count();
        EfficiencyRow {
            dataset: dataset.to_string(),
            pairs: set.len(),
            nas_plus_mean_models: nas_models,
            enas_mean_models: enas_models,
            models_delta_pct: pct_delta(nas_models, enas_models),
            nas_plus_mean_wall_secs: nas_wall,
            enas_mean_wall_secs: enas_wall,
            wall_delta_pct: pct_delta(nas_wall, enas_wall),
            enas_fewer_fraction: fewer as f64 / set.len() as f64,
        }
    };
    let mut rows = Vec::new();
    for d in &order {
        let set: Vec<&(&RunSummary, &RunSummary)> = matched.iter().filter(|(n, _)| &n.dataset == d).collect();
        rows.push(row(d, &set));
    }
    let all: Vec<&(&RunSummary, &RunSummary)> = matched.iter().collect();
    rows.push(row("all", &all));
    Ok(EfficiencyReport { rows })
}

const HISTORY_HEADER: &str =
    "generation,best_f1,mean_f1,mutation_rate,population_size,cloning_rate,max_generations,models_trained_cumulative";
const PLOT_HEADER: &str = "generation,best_f1,mean_f1,mutation_rate,population_size,cloning_rate,max_generations";

/// Fitness and parameter trajectories, one row per generation.
pub fn emit_plot_data(history: &[GenerationRecord], path: &Path) -> Result<(), ExperimentError> {
    if history.is_empty() {
        return Err(ExperimentError::EmptyHistory);
    }
    let mut out = String::with_capacity(64 * (history.len() + 1));
    out.push_str(PLOT_HEADER);
    out.push('\n');
    for h in history {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            h.generation, h.best_f1, h.mean_f1, h.mutation_rate, h.population_size, h.cloning_rate, h.max_generations
        ));
    }
    fs::write(path, out).map_err(io_err(path))
}

/// Full history including the cumulative model count.
pub fn write_history_csv(history: &[GenerationRecord], path: &Path) -> Result<(), ExperimentError> {
    let mut out = String::with_capacity(72 * (history.len() + 1));
    out.push_str(HISTORY_HEADER);
    out.push('\n');
    for h in history {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            h.generation,
            h.best_f1,
            h.mean_f1,
            h.mutation_rate,
            h.population_size,
            h.cloning_rate,
            h.max_generations,
            h.models_trained_cumulative
        ));
    }
    fs::write(path, out).map_err(io_err(path))
}

pub fn read_history_csv(path: &Path) -> Result<Vec<GenerationRecord>, ExperimentError> {
    let parse_err = |message: String| ExperimentError::Parse { path: path.to_path_buf(), message };
    let mut reader = csv::Reader::from_path(path).map_err(|e| parse_err(e.to_string()))?;
    let headers = reader.headers().map_err(|e| parse_err(e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>().join(",") != HISTORY_HEADER {
        return Err(parse_err("unexpected history header".into()));
    }
    reader
        .deserialize::<GenerationRecord>()
        .map(|r| r.map_err(|e| parse_err(e.to_string())))
        .collect()
}

pub fn history_file(dir: &Path, dataset: &str, mode: Mode, run: usize) -> PathBuf {
    dir.join(format!("history_{dataset}_{}_{run}.csv", mode.slug()))
}

pub fn plot_file(dir: &Path, dataset: &str, mode: Mode, run: usize) -> PathBuf {
    dir.join(format!("plot_{dataset}_{}_{run}.csv", mode.slug()))
}

pub fn best_genome_file(dir: &Path, dataset: &str, mode: Mode, run: usize) -> PathBuf {
    dir.join(format!("best_genome_{dataset}_{}_{run}.json", mode.slug()))
}

fn write_runs_csv(runs: &[RunSummary], path: &Path) -> Result<(), ExperimentError> {
    let mut out = String::from("dataset,mode,run,best_f1,models_trained,wall_time_secs,generations,halted\n");
    for r in runs {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.dataset,
            r.mode.slug(),
            r.run,
            r.best_f1,
            r.models_trained,
            r.wall_time_secs,
            r.generations,
            r.halted
        ));
    }
    fs::write(path, out).map_err(io_err(path))
}

pub fn read_runs_csv(path: &Path) -> Result<Vec<RunSummary>, ExperimentError> {
    let parse_err = |message: String| ExperimentError::Parse { path: path.to_path_buf(), message };
    let mut reader = csv::Reader::from_path(path).map_err(|e| parse_err(e.to_string()))?;
    reader.deserialize::<RunSummary>().map(|r| r.map_err(|e| parse_err(e.to_string()))).collect()
}

/// Everything [`run_experiment`] produced.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub summary: SummaryTable,
    pub efficiency: Option<EfficiencyReport>,
    pub runs: Vec<RunSummary>,
    pub output_dir: PathBuf,
}

struct EventLog {
    path: PathBuf,
    out: BufWriter<File>,
}

impl EventLog {
    fn create(path: PathBuf) -> Result<Self, ExperimentError> {
        let file = File::create(&path).map_err(io_err(&path))?;
        Ok(Self { out: BufWriter::new(file), path })
    }

    fn emit(&mut self, value: serde_json::Value) -> Result<(), ExperimentError> {
        writeln!(self.out, "{value}").map_err(io_err(&self.path))
    }
}

/// Runs every (dataset, run, mode) combination and writes all artifacts.
/// Every dataset is loaded before the first run starts.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    config.validate()?;
    let datasets: Vec<Dataset> = config
        .datasets
        .iter()
        .map(|spec| {
            dataset::load_csv(&spec.path, &spec.label_column, &spec.label_mapping)
                .map(|d| d.normalize_min_max())
                .map_err(|source| ExperimentError::Dataset { name: spec.name.clone(), source })
        })
        .collect::<Result<_, _>>()?;
    for (spec, data) in config.datasets.iter().zip(&datasets) {
        if data.instance_count() < config.folds {
            return Err(ExperimentError::Config(format!("{} has fewer instances than folds", spec.name)));
        }
    }

    let dir = &config.output_dir;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut events = EventLog::create(dir.join("events.jsonl"))?;
    events.emit(json!({ "event": "experiment_start", "config": config }))?;

    let mut runs = Vec::new();
    for (di, (spec, data)) in config.datasets.iter().zip(&datasets).enumerate() {
        for r in 0..config.runs {
            let tags = |kind| seed::derive(config.base_seed, &[di as u64, r as u64, kind]);
            let shuffled = data.shuffle(tags(seed::SHUFFLE));
            let split = shuffled
                .kfold_split(config.folds, tags(seed::SPLIT))
                .map_err(|source| ExperimentError::Dataset { name: spec.name.clone(), source })?;
            let folds_path = dir.join(format!("folds_{}_{r}.csv", spec.name));
            split.write_assignments_csv(&folds_path).map_err(io_err(&folds_path))?;
            let evaluator = CrossValidation::new(&shuffled, &split)
                .map_err(|source| ExperimentError::Dataset { name: spec.name.clone(), source })?;
            let engine = Evolution::new(config.evolution.clone(), &evaluator)?;
            let run_seed = tags(seed::RUN);

            for &mode in &config.modes {
                log::info!("{}: {} run {r}", spec.name, mode);
                let result = engine.run(mode, run_seed)?;
                write_history_csv(&result.history, &history_file(dir, &spec.name, mode, r))?;
                emit_plot_data(&result.history, &plot_file(dir, &spec.name, mode, r))?;
                let genome_path = best_genome_file(dir, &spec.name, mode, r);
                fs::write(&genome_path, result.best.genome.to_json()).map_err(io_err(&genome_path))?;

                for e in &result.evaluations {
                    events.emit(json!({ "event": "evaluation", "dataset": spec.name, "mode": mode, "run": r, "record": e }))?;
                }
                for h in &result.history {
                    events.emit(json!({ "event": "generation", "dataset": spec.name, "mode": mode, "run": r, "record": h }))?;
                }
                let summary = RunSummary::from_result(&spec.name, r, &result);
                events.emit(json!({ "event": "run_complete", "summary": summary }))?;
                runs.push(summary);
            }
        }
    }

    write_runs_csv(&runs, &dir.join("runs.csv"))?;
    let summary = SummaryTable::from_runs(&runs);
    summary.write_csv(&dir.join("summary.csv"))?;
    let rendered = summary.render();
    fs::write(dir.join("summary.txt"), &rendered).map_err(io_err(&dir.join("summary.txt")))?;
    let efficiency = if config.modes.contains(&Mode::NasPlus) && config.modes.contains(&Mode::Enas) {
        let report = summarize_efficiency(&runs)?;
        report.write_csv(&dir.join("efficiency.csv"))?;
        Some(report)
    } else {
        None
    };
    events.emit(json!({ "event": "experiment_complete", "summary": summary, "efficiency": efficiency }))?;
    events.out.flush().map_err(io_err(&events.path))?;
    Ok(ExperimentReport { summary, efficiency, runs, output_dir: dir.clone() })
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AuditReport {
    pub values_checked: usize,
    pub mismatches: Vec<String>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }

    fn check<T: PartialEq + std::fmt::Debug>(&mut self, what: String, written: T, recomputed: T) {
        self.values_checked += 1;
        if written != recomputed {
            self.mismatches.push(format!("{what}: written {written:?}, recomputed {recomputed:?}"));
        }
    }
}

/// Recomputes `summary.csv` (and `efficiency.csv` when present) from the
/// per-run history files and `runs.csv`, comparing every value exactly.
pub fn audit(dir: &Path) -> Result<AuditReport, ExperimentError> {
    let listed = read_runs_csv(&dir.join("runs.csv"))?;
    let mut recomputed_runs = Vec::with_capacity(listed.len());
    let mut report = AuditReport::default();
    for r in &listed {
        let history = read_history_csv(&history_file(dir, &r.dataset, r.mode, r.run))?;
        let last = history.last().ok_or(ExperimentError::EmptyHistory)?;
        let what = format!("{} {} run {}", r.dataset, r.mode, r.run);
        report.check(format!("{what} best_f1"), r.best_f1, last.best_f1);
        report.check(format!("{what} models_trained"), r.models_trained, last.models_trained_cumulative);
        report.check(format!("{what} generations"), r.generations, last.generation);
        recomputed_runs.push(RunSummary {
            best_f1: last.best_f1,
            models_trained: last.models_trained_cumulative,
            generations: last.generation,
            ..r.clone()
        });
    }

    let summary_path = dir.join("summary.csv");
    let mut reader = csv::Reader::from_path(&summary_path)
        .map_err(|e| ExperimentError::Parse { path: summary_path.clone(), message: e.to_string() })?;
    let written: Vec<SummaryRow> = reader
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| ExperimentError::Parse { path: summary_path.clone(), message: e.to_string() })?;
    let recomputed = SummaryTable::from_runs(&recomputed_runs);
    report.check("summary row count".into(), written.len(), recomputed.rows.len());
    for w in &written {
        let what = format!("summary {} {}", w.dataset, w.mode);
        let Some(r) = recomputed.row(&w.dataset, w.mode) else {
            report.mismatches.push(format!("{what}: no runs found"));
            continue;
        };
        report.check(format!("{what} runs"), w.runs, r.runs);
        report.check(format!("{what} fittest"), w.fittest, r.fittest);
        report.check(format!("{what} average"), w.average, r.average);
        report.check(format!("{what} min"), w.min, r.min);
        report.check(format!("{what} range"), w.range, r.range);
        report.check(format!("{what} models_trained"), w.models_trained, r.models_trained);
        report.check(format!("{what} wall_time_secs"), w.wall_time_secs, r.wall_time_secs);
    }

    let efficiency_path = dir.join("efficiency.csv");
    if efficiency_path.is_file() {
        let mut reader = csv::Reader::from_path(&efficiency_path)
            .map_err(|e| ExperimentError::Parse { path: efficiency_path.clone(), message: e.to_string() })?;
        let written: Vec<EfficiencyRow> = reader
            .deserialize()
            .collect::<Result<_, _>>()
            .map_err(|e| ExperimentError::Parse { path: efficiency_path.clone(), message: e.to_string() })?;
        let recomputed = summarize_efficiency(&recomputed_runs)?;
        report.check("efficiency row count".into(), written.len(), recomputed.rows.len());
        for (w, r) in written.iter().zip(&recomputed.rows) {
            report.check(format!("efficiency {}", w.dataset), w, r);
        }
    }
    Ok(report)
}
