//! Summary-table rendering: mean ± standard error of the best
//! configuration per algorithm × environment, rebuilt from emitted run
//! files.

use std::path::Path;

use crate::error::Result;

use super::emit::{read_runs_csv, RunRow};

struct Cell {
    mean: f64,
    stderr: f64,
}

fn best_cell(rows: &[&RunRow]) -> Cell {
    // Group by hyperparameter point, pick the lowest mean AUC with ties
    // toward smaller alpha.
    let mut keys: Vec<(u64, u64, u64, String)> = Vec::new();
    for r in rows {
        let k = (
            r.alpha.to_bits(),
            r.eta.to_bits(),
            r.beta.to_bits(),
            r.optimizer.clone(),
        );
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    let mut best: Option<(f64, f64, Cell)> = None;
    for k in keys {
        let aucs: Vec<f64> = rows
            .iter()
            .filter(|r| {
                (
                    r.alpha.to_bits(),
                    r.eta.to_bits(),
                    r.beta.to_bits(),
                    r.optimizer.clone(),
                ) == k
            })
            .map(|r| r.auc)
            .collect();
        let n = aucs.len();
        let mean = aucs.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = aucs.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        let alpha = f64::from_bits(k.0);
        match &best {
            Some((m, a, _)) if (mean, alpha) >= (*m, *a) => {}
            _ => best = Some((mean, alpha, Cell { mean, stderr })),
        }
    }
    best.map(|(_, _, c)| c).unwrap()
}

/// Render the mean ± stderr table (algorithms × environments) from one
/// or more emitted `runs.csv` files.
pub fn render_table(paths: &[impl AsRef<Path>]) -> Result<String> {
    let mut rows: Vec<RunRow> = Vec::new();
    for p in paths {
        rows.extend(read_runs_csv(p.as_ref())?);
    }
    let mut envs: Vec<String> = Vec::new();
    let mut algs: Vec<String> = Vec::new();
    for r in &rows {
        if !envs.contains(&r.environment) {
            envs.push(r.environment.clone());
        }
        if !algs.contains(&r.algorithm) {
            algs.push(r.algorithm.clone());
        }
    }

    let mut out = String::new();
    let col = 22;
    out.push_str(&format!("{:<10}", "method"));
    for e in &envs {
        out.push_str(&format!("{e:>col$}"));
    }
    out.push('\n');
    for a in &algs {
        out.push_str(&format!("{a:<10}"));
        for e in &envs {
            let group: Vec<&RunRow> = rows
                .iter()
                .filter(|r| &r.algorithm == a && &r.environment == e)
                .collect();
            if group.is_empty() {
                out.push_str(&format!("{:>col$}", "--"));
            } else {
                let cell = best_cell(&group);
                out.push_str(&format!(
                    "{:>col$}",
                    format!("{:.3} ± {:.3}", cell.mean, cell.stderr)
                ));
            }
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{ExperimentConfig, Protocol};
    use crate::harness::emit::{emit, EmitFormat};
    use crate::metrics::RunResult;

    #[test]
    fn table_shows_best_configuration_per_cell() {
        let mut cfg = ExperimentConfig::new("randomwalk-tabular", "td", Protocol::Online);
        cfg.grid.alpha = vec![0.25, 0.5];
        let runs = vec![
            RunResult::new(vec![0.9; 3], 0, 0.25, 1.0, 0.0, "adagrad".into(), false),
            RunResult::new(vec![0.9; 3], 1, 0.25, 1.0, 0.0, "adagrad".into(), false),
            RunResult::new(vec![0.2; 3], 0, 0.5, 1.0, 0.0, "adagrad".into(), false),
            RunResult::new(vec![0.4; 3], 1, 0.5, 1.0, 0.0, "adagrad".into(), false),
        ];
        let dir = std::env::temp_dir().join(format!("gtd-table-{}", std::process::id()));
        let paths = emit(&cfg, &runs, &dir, "t", EmitFormat::Csv).unwrap();
        let table = render_table(&[paths.runs_csv.unwrap()]).unwrap();
        assert!(table.contains("td"));
        // Best is alpha = 0.5 with mean 0.3 and stderr 0.1.
        assert!(table.contains("0.300 ± 0.100"), "table was:\n{table}");
        std::fs::remove_dir_all(&dir).ok();
    }
}
