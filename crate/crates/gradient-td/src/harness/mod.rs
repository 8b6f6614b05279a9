//! Experiment orchestration: configs, protocol runners, result emission,
//! and table rendering.

pub mod config;
pub mod emit;
pub mod runner;
pub mod table;

pub use config::{
    pow2_range, BatchConfig, ExperimentConfig, HyperGrid, MdpFile, OptimizerSpec, Protocol,
    RewardScaleConfig,
};
pub use emit::{design_flags, emit, read_results, read_runs_csv, EmitFormat, RunRow};
pub use runner::{
    generate_dataset, grid_points, run_batch, run_batch_on, run_control, run_online,
    run_prediction_sweep, run_reward_scale, run_reward_scale_on, BatchCell, BatchSweep, Dataset,
    GridPoint, RewardScaleCell, RewardScaleGrid, CONTROL_EPSILON, CONTROL_GAMMA, EPISODE_CAP,
};
pub use table::render_table;
