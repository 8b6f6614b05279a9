//! Result emission and re-ingestion.
//!
//! `runs.csv` holds one row per run; `curves.csv` is the long-format
//! `(run_id, step, value)` companion where `run_id` is the row index in
//! `runs.csv`. `summary.json` mirrors the sweep summary together with the
//! config hash and the design-decision flags. Each CSV starts with a `#`
//! comment line carrying the same provenance.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::metrics::{aggregate, RunResult, SweepSummary};

use super::config::ExperimentConfig;

/// Conventions baked into the implementation, embedded in every output
/// file so results stay interpretable.
pub fn design_flags() -> serde_json::Value {
    json!({
        "auc": "mean per-step RMSPBE (curve mean)",
        "curve_includes_step_zero": true,
        "stationary_distribution": "restart chain (termination redirected through start_dist)",
        "boyan_features": "4-dimensional interpolating corners at states 12/8/4/0",
        "boyan_rewards": "-3 per step, -2 on the final step",
        "baird_init": "[1,1,1,1,1,1,1,10]",
        "baird_start_dist": "uniform",
        "random_walk_features": "tabular | inverted | dependent, unit-norm rows",
        "divergence_weight_threshold": 1e10,
        "curve_cap": 1e10,
        "mountain_car_episode_cap": 5000,
        "control_curve": "steps-to-goal written at terminations, held constant, cap before first",
        "control_stepsize": "alpha divided by active feature count",
        "tile_coder": "dense grid, tiling i offset by i/n_tilings of a tile width per dimension",
        "eta_placement": "pre-scales the raw secondary update before optimizer accumulators",
        "adagrad": "accumulate before step, epsilon outside the square root",
        "rng": "counter-based splitmix64 streams keyed by (seed_base, run, purpose)",
        "best_selection": "minimum mean AUC, ties toward smaller alpha",
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitFormat {
    Csv,
    Json,
    Both,
}

#[derive(Debug, Clone, Default)]
pub struct EmittedPaths {
    pub runs_csv: Option<PathBuf>,
    pub curves_csv: Option<PathBuf>,
    pub summary_json: Option<PathBuf>,
}

const RUN_HEADERS: [&str; 9] = [
    "environment",
    "algorithm",
    "optimizer",
    "alpha",
    "eta",
    "beta",
    "seed",
    "auc",
    "diverged",
];

/// Write run results under `dir` with the given base name.
pub fn emit(
    cfg: &ExperimentConfig,
    results: &[RunResult],
    dir: &Path,
    base: &str,
    format: EmitFormat,
) -> Result<EmittedPaths> {
    fs::create_dir_all(dir)?;
    let hash = cfg.config_hash();
    let mut paths = EmittedPaths::default();

    if matches!(format, EmitFormat::Csv | EmitFormat::Both) {
        let runs_path = dir.join(format!("{base}_runs.csv"));
        write_runs_csv(&runs_path, cfg, results, &hash)?;
        let curves_path = dir.join(format!("{base}_curves.csv"));
        write_curves_csv(&curves_path, results, &hash)?;
        paths.runs_csv = Some(runs_path);
        paths.curves_csv = Some(curves_path);
    }

    if matches!(format, EmitFormat::Json | EmitFormat::Both) {
        let summary_path = dir.join(format!("{base}_summary.json"));
        let summary = if results.is_empty() {
            None
        } else {
            Some(aggregate(results)?)
        };
        write_summary_json(&summary_path, cfg, &summary, &hash)?;
        paths.summary_json = Some(summary_path);
    }
    Ok(paths)
}

fn provenance_line(hash: &str) -> String {
    format!("# config_hash={hash} design_flags={}\n", design_flags())
}

fn write_runs_csv(
    path: &Path,
    cfg: &ExperimentConfig,
    results: &[RunResult],
    hash: &str,
) -> Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(provenance_line(hash).as_bytes())?;
    let mut writer = csv::Writer::from_writer(file);
    writer.write_record(RUN_HEADERS)?;
    for r in results {
        writer.write_record([
            cfg.environment.as_str(),
            cfg.algorithm.as_str(),
            r.optimizer.as_str(),
            &r.alpha.to_string(),
            &r.eta.to_string(),
            &r.beta.to_string(),
            &r.seed.to_string(),
            &r.auc.to_string(),
            &r.diverged.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

fn write_curves_csv(path: &Path, results: &[RunResult], hash: &str) -> Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(provenance_line(hash).as_bytes())?;
    let mut writer = csv::Writer::from_writer(file);
    writer.write_record(["run_id", "step", "value"])?;
    for (run_id, r) in results.iter().enumerate() {
        for (step, v) in r.curve.iter().enumerate() {
            writer.write_record([&run_id.to_string(), &step.to_string(), &v.to_string()])?;
        }
    }
    writer.flush()?;
    Ok(())
}

fn write_summary_json(
    path: &Path,
    cfg: &ExperimentConfig,
    summary: &Option<SweepSummary>,
    hash: &str,
) -> Result<()> {
    let doc = json!({
        "config_hash": hash,
        "environment": cfg.environment,
        "algorithm": cfg.algorithm,
        "protocol": cfg.protocol,
        "design_flags": design_flags(),
        "summary": summary,
    });
    fs::write(path, serde_json::to_string_pretty(&doc)?)?;
    Ok(())
}

/// Write any serializable protocol summary (batch, reward-scale, report).
pub fn write_json<T: Serialize>(path: &Path, cfg_hash: &str, payload: &T) -> Result<()> {
    let doc = json!({
        "config_hash": cfg_hash,
        "design_flags": design_flags(),
        "result": payload,
    });
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, serde_json::to_string_pretty(&doc)?)?;
    Ok(())
}

/// One parsed `runs.csv` row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRow {
    pub environment: String,
    pub algorithm: String,
    pub optimizer: String,
    pub alpha: f64,
    pub eta: f64,
    pub beta: f64,
    pub seed: u64,
    pub auc: f64,
    pub diverged: bool,
}

fn csv_reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    Ok(csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)?)
}

pub fn read_runs_csv(path: &Path) -> Result<Vec<RunRow>> {
    let mut reader = csv_reader(path)?;
    let mut rows = Vec::new();
    for record in reader.deserialize() {
        rows.push(record?);
    }
    Ok(rows)
}

/// Rebuild full run results from a `runs.csv`/`curves.csv` pair, inverse
/// of [`emit`] with the CSV format.
pub fn read_results(runs_path: &Path, curves_path: &Path) -> Result<Vec<RunResult>> {
    let rows = read_runs_csv(runs_path)?;
    let mut curves: Vec<Vec<f64>> = vec![Vec::new(); rows.len()];
    let mut reader = csv_reader(curves_path)?;
    for record in reader.deserialize() {
        let (run_id, _step, value): (usize, usize, f64) = record?;
        if run_id >= curves.len() {
            return Err(Error::Config(format!(
                "curve row references run {run_id} beyond {} runs",
                curves.len()
            )));
        }
        curves[run_id].push(value);
    }
    Ok(rows
        .into_iter()
        .zip(curves)
        .map(|(row, curve)| {
            RunResult::new(
                curve,
                row.seed,
                row.alpha,
                row.eta,
                row.beta,
                row.optimizer,
                row.diverged,
            )
        })
        .collect())
}
