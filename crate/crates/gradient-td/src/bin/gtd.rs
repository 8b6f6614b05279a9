//! Experiment harness CLI: seeded runs, sweeps, stability analysis, and
//! table rendering.

use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use gradient_td::env::PredictionEnv;
use gradient_td::harness::{
    emit, render_table, run_batch, run_control, run_online, run_reward_scale, EmitFormat,
    ExperimentConfig, MdpFile, Protocol,
};
use gradient_td::mdp::{expectation_matrices, expectation_matrices_with};
use gradient_td::stability::analyze;

#[derive(Parser)]
#[command(
    name = "gtd",
    about = "Gradient-TD prediction and control experiments with exact MSPBE evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single configuration (every grid list must have one entry).
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the full hyperparameter grid of a configuration.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Stability report for an MDP file or a built-in environment.
    Analyze {
        /// MDP text file (TOML) with transitions, policies, and features.
        #[arg(long, conflicts_with = "env")]
        mdp: Option<PathBuf>,
        /// Built-in environment name instead of a file.
        #[arg(long)]
        env: Option<String>,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Mean ± stderr of the best configuration per algorithm × environment.
    Table {
        /// One or more runs.csv files produced by run/sweep.
        files: Vec<PathBuf>,
    },
    /// Batch protocol: budget sweep over minibatch updates.
    Batch {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Reward-scale study over (scale, beta) cells.
    RewardScale {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn main() -> anyhow::Result<()> {
    if let Ok(workers) = std::env::var("GTD_WORKERS") {
        let n: usize = workers.parse().context("GTD_WORKERS must be an integer")?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .ok();
    }
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, output } => run_or_sweep(config, output, false),
        Command::Sweep { config, output } => run_or_sweep(config, output, true),
        Command::Analyze {
            mdp,
            env,
            eta,
            beta,
            output,
        } => analyze_command(mdp, env, eta, beta, output),
        Command::Table { files } => {
            if files.is_empty() {
                bail!("table needs at least one runs.csv file");
            }
            print!("{}", render_table(&files)?);
            Ok(())
        }
        Command::Batch { config, output } => batch_command(config, output),
        Command::RewardScale { config, output } => reward_scale_command(config, output),
    }
}

fn output_dir(cfg: &ExperimentConfig, flag: Option<PathBuf>) -> PathBuf {
    if let Ok(dir) = std::env::var("GTD_OUTPUT_DIR") {
        return PathBuf::from(dir);
    }
    flag.or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("results"))
}

fn run_or_sweep(config: PathBuf, output: Option<PathBuf>, sweep: bool) -> anyhow::Result<()> {
    let mut cfg = ExperimentConfig::from_path(&config)
        .with_context(|| format!("loading {}", config.display()))?
        .normalized();
    if !sweep {
        let singleton = |name: &str, len: usize| -> anyhow::Result<()> {
            if len != 1 {
                bail!("`run` needs exactly one {name} value (got {len}); use `sweep` for grids");
            }
            Ok(())
        };
        singleton("alpha", cfg.grid.alpha.len())?;
        singleton("eta", cfg.grid.eta.len())?;
        singleton("beta", cfg.grid.beta.len())?;
    }
    let dir = output_dir(&cfg, output);
    cfg.output = Some(dir.clone());

    let base = format!("{}_{}", cfg.environment, cfg.algorithm);
    match cfg.protocol {
        Protocol::Online => {
            let results = run_online(&cfg)?;
            let paths = emit(&cfg, &results, &dir, &base, EmitFormat::Both)?;
            report_paths(&paths);
        }
        Protocol::Control | Protocol::ActorCritic => {
            let results = run_control(&cfg)?;
            let paths = emit(&cfg, &results, &dir, &base, EmitFormat::Both)?;
            report_paths(&paths);
        }
        Protocol::Batch => return batch_emit(&cfg, &dir),
        Protocol::RewardScale => return reward_scale_emit(&cfg, &dir),
    }
    Ok(())
}

fn report_paths(paths: &gradient_td::harness::emit::EmittedPaths) {
    for p in [&paths.runs_csv, &paths.curves_csv, &paths.summary_json]
        .into_iter()
        .flatten()
    {
        println!("wrote {}", p.display());
    }
}

fn batch_command(config: PathBuf, output: Option<PathBuf>) -> anyhow::Result<()> {
    let cfg = ExperimentConfig::from_path(&config)?.normalized();
    if cfg.protocol != Protocol::Batch {
        bail!("config protocol must be \"batch\"");
    }
    let dir = output_dir(&cfg, output);
    batch_emit(&cfg, &dir)
}

fn batch_emit(cfg: &ExperimentConfig, dir: &PathBuf) -> anyhow::Result<()> {
    let sweep = run_batch(cfg)?;
    let path = dir.join(format!("{}_{}_batch.json", cfg.environment, cfg.algorithm));
    gradient_td::harness::emit::write_json(&path, &cfg.config_hash(), &sweep)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn reward_scale_command(config: PathBuf, output: Option<PathBuf>) -> anyhow::Result<()> {
    let cfg = ExperimentConfig::from_path(&config)?.normalized();
    if cfg.protocol != Protocol::RewardScale {
        bail!("config protocol must be \"reward-scale\"");
    }
    let dir = output_dir(&cfg, output);
    reward_scale_emit(&cfg, &dir)
}

fn reward_scale_emit(cfg: &ExperimentConfig, dir: &PathBuf) -> anyhow::Result<()> {
    let grid = run_reward_scale(cfg)?;
    let path = dir.join(format!("{}_reward_scale.json", cfg.environment));
    gradient_td::harness::emit::write_json(&path, &cfg.config_hash(), &grid)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn analyze_command(
    mdp: Option<PathBuf>,
    env: Option<String>,
    eta: Option<f64>,
    beta: Option<f64>,
    output: Option<PathBuf>,
) -> anyhow::Result<()> {
    let (model, default_eta, default_beta) = match (mdp, env) {
        (Some(path), None) => {
            let loaded = MdpFile::from_path(&path)
                .with_context(|| format!("loading {}", path.display()))?
                .build()?;
            let model = match &loaded.stationary_override {
                Some(d) => {
                    expectation_matrices_with(&loaded.mdp, &loaded.target, &loaded.features, d)?
                }
                None => expectation_matrices(
                    &loaded.mdp,
                    &loaded.behavior,
                    &loaded.target,
                    &loaded.features,
                )?,
            };
            (model, loaded.eta, loaded.beta)
        }
        (None, Some(name)) => {
            let env = PredictionEnv::by_name(&name)?;
            (env.model, 1.0, 1.0)
        }
        _ => bail!("analyze needs exactly one of --mdp FILE or --env NAME"),
    };
    let report = analyze(&model, eta.unwrap_or(default_eta), beta.unwrap_or(default_beta));
    let text = serde_json::to_string_pretty(&report)?;
    match output {
        Some(path) => {
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            std::fs::write(&path, text)?;
            println!("wrote {}", path.display());
        }
        None => println!("{text}"),
    }
    Ok(())
}
