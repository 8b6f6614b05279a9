//! Experiment configuration and the MDP text format, both TOML.

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agents::{ControlVariant, CriticKind, PredictionAlg};
use crate::error::{Error, Result};
use crate::mdp::{FeatureMap, MdpSpec, Policy, Tensor3};
use crate::optim::{OptimizerConfig, OptimizerKind};

/// Powers of two from `2^lo` to `2^hi` inclusive.
pub fn pow2_range(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|e| 2f64.powi(e)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    Online,
    Batch,
    RewardScale,
    Control,
    ActorCritic,
}

/// Optimizer settings minus the stepsize, which always comes from the grid.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OptimizerSpec {
    pub kind: OptimizerKind,
    #[serde(default = "d_beta1")]
    pub adam_beta1: f64,
    #[serde(default = "d_beta2")]
    pub adam_beta2: f64,
    #[serde(default = "d_eps")]
    pub epsilon: f64,
}

fn d_beta1() -> f64 {
    0.9
}
fn d_beta2() -> f64 {
    0.999
}
fn d_eps() -> f64 {
    1e-8
}

impl Default for OptimizerSpec {
    fn default() -> Self {
        OptimizerSpec {
            kind: OptimizerKind::Adagrad,
            adam_beta1: d_beta1(),
            adam_beta2: d_beta2(),
            epsilon: d_eps(),
        }
    }
}

impl OptimizerSpec {
    pub fn constant() -> Self {
        OptimizerSpec {
            kind: OptimizerKind::Constant,
            ..Default::default()
        }
    }

    pub fn adam() -> Self {
        OptimizerSpec {
            kind: OptimizerKind::Adam,
            ..Default::default()
        }
    }

    pub fn with_alpha(&self, alpha: f64) -> OptimizerConfig {
        OptimizerConfig {
            kind: self.kind,
            alpha,
            adam_beta1: self.adam_beta1,
            adam_beta2: self.adam_beta2,
            epsilon: self.epsilon,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            OptimizerKind::Constant => "constant",
            OptimizerKind::Adagrad => "adagrad",
            OptimizerKind::Adam => "adam",
        }
    }
}

/// Hyperparameter grids; empty lists are filled with the protocol and
/// algorithm defaults on normalization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HyperGrid {
    #[serde(default)]
    pub alpha: Vec<f64>,
    #[serde(default)]
    pub eta: Vec<f64>,
    #[serde(default)]
    pub beta: Vec<f64>,
    #[serde(default = "d_clip")]
    pub clip: f64,
    /// Adam moment decays are sweepable as paired lists.
    #[serde(default)]
    pub adam_beta1: Vec<f64>,
    #[serde(default)]
    pub adam_beta2: Vec<f64>,
}

fn d_clip() -> f64 {
    1.0
}

impl Default for HyperGrid {
    fn default() -> Self {
        HyperGrid {
            alpha: Vec::new(),
            eta: Vec::new(),
            beta: Vec::new(),
            clip: d_clip(),
            adam_beta1: Vec::new(),
            adam_beta2: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatchConfig {
    #[serde(default = "d_dataset_size")]
    pub dataset_size: usize,
    #[serde(default = "d_minibatch")]
    pub minibatch_size: usize,
    #[serde(default = "d_budgets")]
    pub update_budgets: Vec<usize>,
    #[serde(default = "d_datasets")]
    pub n_datasets: usize,
}

fn d_dataset_size() -> usize {
    100_000
}
fn d_minibatch() -> usize {
    8
}
fn d_budgets() -> Vec<usize> {
    (0..=13).map(|e| 1usize << e).collect()
}
fn d_datasets() -> usize {
    500
}

impl Default for BatchConfig {
    fn default() -> Self {
        BatchConfig {
            dataset_size: d_dataset_size(),
            minibatch_size: d_minibatch(),
            update_budgets: d_budgets(),
            n_datasets: d_datasets(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RewardScaleConfig {
    #[serde(default = "d_scales")]
    pub scales: Vec<f64>,
    #[serde(default = "d_rs_beta")]
    pub beta: Vec<f64>,
}

fn d_scales() -> Vec<f64> {
    vec![1e-2, 1e-1, 1e0, 1e1, 1e2, 1e3]
}
fn d_rs_beta() -> Vec<f64> {
    pow2_range(-5, 4)
}

impl Default for RewardScaleConfig {
    fn default() -> Self {
        RewardScaleConfig {
            scales: d_scales(),
            beta: d_rs_beta(),
        }
    }
}

/// Everything one experiment needs: environment, algorithm, optimizer,
/// grids, run counts, and seeding.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub environment: String,
    pub algorithm: String,
    pub protocol: Protocol,
    #[serde(default = "d_runs")]
    pub n_runs: usize,
    #[serde(default = "d_steps")]
    pub n_steps: usize,
    #[serde(default = "d_env_steps")]
    pub n_env_steps: usize,
    #[serde(default)]
    pub seed_base: u64,
    #[serde(default)]
    pub optimizer: OptimizerSpec,
    #[serde(default)]
    pub grid: HyperGrid,
    #[serde(default)]
    pub batch: Option<BatchConfig>,
    #[serde(default)]
    pub reward_scale: Option<RewardScaleConfig>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn d_runs() -> usize {
    200
}
fn d_steps() -> usize {
    3000
}
fn d_env_steps() -> usize {
    50_000
}

impl ExperimentConfig {
    pub fn new(environment: &str, algorithm: &str, protocol: Protocol) -> Self {
        ExperimentConfig {
            environment: environment.to_string(),
            algorithm: algorithm.to_string(),
            protocol,
            n_runs: d_runs(),
            n_steps: d_steps(),
            n_env_steps: d_env_steps(),
            seed_base: 0,
            optimizer: OptimizerSpec::default(),
            grid: HyperGrid::default(),
            batch: None,
            reward_scale: None,
            output: None,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_runs == 0 {
            return Err(Error::Config("n_runs must be at least 1".into()));
        }
        match self.protocol {
            Protocol::Online | Protocol::Batch | Protocol::RewardScale => {
                self.prediction_algorithm()?;
            }
            Protocol::Control => {
                ControlVariant::parse(&self.algorithm)?;
                if self.environment != "mountaincar" {
                    return Err(Error::Config(format!(
                        "control protocol needs mountaincar, got {}",
                        self.environment
                    )));
                }
            }
            Protocol::ActorCritic => {
                CriticKind::parse(&self.algorithm)?;
                if self.environment != "mountaincar" {
                    return Err(Error::Config(format!(
                        "actor-critic protocol needs mountaincar, got {}",
                        self.environment
                    )));
                }
            }
        }
        for &a in &self.grid.alpha {
            if !(a > 0.0) {
                return Err(Error::Config(format!("alpha {a} must be positive")));
            }
        }
        for &b in &self.grid.beta {
            if b < 0.0 {
                return Err(Error::Config(format!("beta {b} must be non-negative")));
            }
        }
        for &e in &self.grid.eta {
            if e < 0.0 {
                return Err(Error::Config(format!("eta {e} must be non-negative")));
            }
        }
        if !(self.grid.clip > 0.0) {
            return Err(Error::Config("clip must be positive".into()));
        }
        Ok(())
    }

    pub fn prediction_algorithm(&self) -> Result<PredictionAlg> {
        PredictionAlg::parse(&self.algorithm)
    }

    /// Fill empty grid lists with the conventional defaults for this
    /// protocol and algorithm.
    pub fn normalized(mut self) -> Self {
        if self.grid.alpha.is_empty() {
            self.grid.alpha = match self.protocol {
                Protocol::Online => pow2_range(-7, 0),
                Protocol::Batch => pow2_range(-5, 0),
                Protocol::RewardScale => pow2_range(-5, -1),
                Protocol::Control | Protocol::ActorCritic => pow2_range(-8, -1),
            };
        }
        if self.grid.eta.is_empty() {
            self.grid.eta = match PredictionAlg::parse(&self.algorithm) {
                Ok(PredictionAlg::Tdc) | Ok(PredictionAlg::Htd) => pow2_range(0, 6),
                Ok(PredictionAlg::Gtd2) => pow2_range(-6, 6),
                _ => vec![1.0],
            };
        }
        if self.grid.beta.is_empty() {
            self.grid.beta = vec![1.0];
        }
        if self.grid.adam_beta1.is_empty() {
            self.grid.adam_beta1 = vec![self.optimizer.adam_beta1];
        }
        if self.grid.adam_beta2.is_empty() {
            self.grid.adam_beta2 = vec![self.optimizer.adam_beta2];
        }
        if self.protocol == Protocol::Batch && self.batch.is_none() {
            self.batch = Some(BatchConfig::default());
        }
        if self.protocol == Protocol::RewardScale && self.reward_scale.is_none() {
            self.reward_scale = Some(RewardScaleConfig::default());
        }
        self
    }

    /// SHA-256 of the canonical TOML form, embedded in every output file.
    pub fn config_hash(&self) -> String {
        let canonical = toml::to_string(self).unwrap_or_default();
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// The MDP text format consumed by `analyze`: state/action counts, sparse
/// `(s, a, s', p, r, γ)` transition tuples, policy matrices, and a dense
/// feature matrix.
#[derive(Debug, Clone, Deserialize)]
pub struct MdpFile {
    pub n_states: usize,
    pub n_actions: usize,
    pub transitions: Vec<(usize, usize, usize, f64, f64, f64)>,
    pub start_dist: Vec<f64>,
    pub policies: PoliciesSection,
    pub features: FeaturesSection,
    #[serde(default)]
    pub stationary_override: Option<Vec<f64>>,
    #[serde(default)]
    pub analysis: Option<AnalysisSection>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct PoliciesSection {
    pub behavior: Vec<Vec<f64>>,
    pub target: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct FeaturesSection {
    pub matrix: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
pub struct AnalysisSection {
    #[serde(default = "d_one")]
    pub eta: f64,
    #[serde(default = "d_one")]
    pub beta: f64,
}

fn d_one() -> f64 {
    1.0
}

pub struct LoadedMdp {
    pub mdp: MdpSpec,
    pub behavior: Policy,
    pub target: Policy,
    pub features: FeatureMap,
    pub stationary_override: Option<DVector<f64>>,
    pub eta: f64,
    pub beta: f64,
}

impl MdpFile {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn build(&self) -> Result<LoadedMdp> {
        let n = self.n_states;
        let na = self.n_actions;
        let mut p = Tensor3::zeros(n, na);
        let mut r = Tensor3::zeros(n, na);
        let mut g = Tensor3::zeros(n, na);
        for &(s, a, s2, prob, reward, gamma) in &self.transitions {
            if s >= n || a >= na || s2 >= n {
                return Err(Error::Config(format!(
                    "transition ({s},{a},{s2}) out of range for {n} states, {na} actions"
                )));
            }
            p.set(s, a, s2, prob);
            r.set(s, a, s2, reward);
            g.set(s, a, s2, gamma);
        }
        let start = DVector::from_vec(self.start_dist.clone());
        let mdp = MdpSpec::new(n, na, p, r, g, start)?;

        let to_matrix = |rows: &Vec<Vec<f64>>, what: &str| -> Result<DMatrix<f64>> {
            if rows.len() != n {
                return Err(Error::Config(format!("{what} needs {n} rows")));
            }
            let cols = rows[0].len();
            if rows.iter().any(|row| row.len() != cols) {
                return Err(Error::Config(format!("{what} rows have uneven lengths")));
            }
            Ok(DMatrix::from_fn(n, cols, |i, j| rows[i][j]))
        };
        let behavior = Policy::new(to_matrix(&self.policies.behavior, "behavior policy")?)?;
        let target = Policy::new(to_matrix(&self.policies.target, "target policy")?)?;
        let features = FeatureMap::new(to_matrix(&self.features.matrix, "feature matrix")?)?;

        let stationary_override = self
            .stationary_override
            .as_ref()
            .map(|v| DVector::from_vec(v.clone()));
        let analysis = self.analysis.unwrap_or(AnalysisSection { eta: 1.0, beta: 1.0 });

        Ok(LoadedMdp {
            mdp,
            behavior,
            target,
            features,
            stationary_override,
            eta: analysis.eta,
            beta: analysis.beta,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip_and_defaults() {
        let text = r#"
            environment = "baird"
            algorithm = "tdrc"
            protocol = "online"
            n_runs = 25
            n_steps = 3000
            seed_base = 7

            [optimizer]
            kind = "adagrad"
        "#;
        let cfg = ExperimentConfig::from_toml_str(text).unwrap().normalized();
        assert_eq!(cfg.grid.alpha, pow2_range(-7, 0));
        assert_eq!(cfg.grid.eta, vec![1.0]);
        assert_eq!(cfg.grid.beta, vec![1.0]);
        assert_eq!(cfg.n_runs, 25);
        assert_eq!(cfg.config_hash().len(), 64);
    }

    #[test]
    fn eta_defaults_depend_on_algorithm() {
        let mut cfg = ExperimentConfig::new("baird", "tdc", Protocol::Online).normalized();
        assert_eq!(cfg.grid.eta, pow2_range(0, 6));
        cfg = ExperimentConfig::new("baird", "gtd2", Protocol::Online).normalized();
        assert_eq!(cfg.grid.eta, pow2_range(-6, 6));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = ExperimentConfig::new("baird", "nonsense", Protocol::Online);
        assert!(cfg.validate().is_err());
        cfg = ExperimentConfig::new("boyan", "qlearning", Protocol::Control);
        assert!(cfg.validate().is_err());
        cfg = ExperimentConfig::new("baird", "td", Protocol::Online);
        cfg.grid.alpha = vec![-0.5];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn mdp_file_builds_a_model() {
        let text = r#"
            n_states = 2
            n_actions = 1
            start_dist = [1.0, 0.0]
            transitions = [
                [0, 0, 1, 1.0, 0.5, 1.0],
                [1, 0, 0, 1.0, 0.0, 0.0],
            ]

            [policies]
            behavior = [[1.0], [1.0]]
            target = [[1.0], [1.0]]

            [features]
            matrix = [[1.0, 0.0], [0.0, 1.0]]

            [analysis]
            beta = 0.5
        "#;
        let loaded = MdpFile::from_toml_str(text).unwrap().build().unwrap();
        assert_eq!(loaded.mdp.n_states, 2);
        assert_eq!(loaded.features.n_features(), 2);
        assert_eq!(loaded.beta, 0.5);
        assert_eq!(loaded.eta, 1.0);
        let model = crate::mdp::expectation_matrices(
            &loaded.mdp,
            &loaded.behavior,
            &loaded.target,
            &loaded.features,
        )
        .unwrap();
        assert_eq!(model.n_features(), 2);
    }
}
