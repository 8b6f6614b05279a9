//! Stepsize machinery shared by all agents: constant scalar, Adagrad with
//! per-parameter accumulators, and Adam.
//!
//! Raw updates coming out of the agents are ascent directions (already
//! negated gradients); `apply` turns one into a weight delta.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Constant,
    Adagrad,
    Adam,
}

impl OptimizerKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "constant" => Ok(OptimizerKind::Constant),
            "adagrad" => Ok(OptimizerKind::Adagrad),
            "adam" => Ok(OptimizerKind::Adam),
            other => Err(Error::UnknownName(format!("optimizer {other}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    /// Base stepsize, strictly positive.
    pub alpha: f64,
    #[serde(default = "default_beta1")]
    pub adam_beta1: f64,
    #[serde(default = "default_beta2")]
    pub adam_beta2: f64,
    /// Stabilizer added outside the square root.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

fn default_beta1() -> f64 {
    0.9
}
fn default_beta2() -> f64 {
    0.999
}
fn default_epsilon() -> f64 {
    1e-8
}

impl OptimizerConfig {
    pub fn constant(alpha: f64) -> Self {
        OptimizerConfig {
            kind: OptimizerKind::Constant,
            alpha,
            adam_beta1: default_beta1(),
            adam_beta2: default_beta2(),
            epsilon: default_epsilon(),
        }
    }

    pub fn adagrad(alpha: f64) -> Self {
        OptimizerConfig {
            kind: OptimizerKind::Adagrad,
            ..OptimizerConfig::constant(alpha)
        }
    }

    pub fn adam(alpha: f64, beta1: f64, beta2: f64) -> Self {
        OptimizerConfig {
            kind: OptimizerKind::Adam,
            adam_beta1: beta1,
            adam_beta2: beta2,
            ..OptimizerConfig::constant(alpha)
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(Error::Config(format!("alpha = {} must be > 0", self.alpha)));
        }
        for (name, v) in [("adam_beta1", self.adam_beta1), ("adam_beta2", self.adam_beta2)] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::Config(format!("{name} = {v} out of [0, 1)")));
            }
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Config("epsilon must be positive".into()));
        }
        Ok(())
    }
}

/// Per-parameter-vector optimizer state. Accumulators start at zero; the
/// Adagrad accumulator is updated before the step is taken.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    pub config: OptimizerConfig,
    accumulator: DVector<f64>,
    first_moment: DVector<f64>,
    second_moment: DVector<f64>,
    t: u64,
}

impl OptimizerState {
    pub fn new(config: OptimizerConfig, dim: usize) -> Self {
        OptimizerState {
            config,
            accumulator: DVector::zeros(dim),
            first_moment: DVector::zeros(dim),
            second_moment: DVector::zeros(dim),
            t: 0,
        }
    }

    /// Turn a raw update into a weight delta, advancing the internal state.
    pub fn apply(&mut self, raw: &DVector<f64>) -> DVector<f64> {
        let mut delta = raw.clone();
        self.apply_in_place(&mut delta);
        delta
    }

    /// Apply and accumulate into `params` without the intermediate vector.
    pub fn step(&mut self, raw: &DVector<f64>, params: &mut DVector<f64>) {
        match self.config.kind {
            OptimizerKind::Constant => {
                params.axpy(self.config.alpha, raw, 1.0);
            }
            _ => {
                let delta = self.apply(raw);
                *params += delta;
            }
        }
    }

    fn apply_in_place(&mut self, delta: &mut DVector<f64>) {
        let cfg = &self.config;
        match cfg.kind {
            OptimizerKind::Constant => {
                *delta *= cfg.alpha;
            }
            OptimizerKind::Adagrad => {
                for i in 0..delta.len() {
                    let g = delta[i];
                    self.accumulator[i] += g * g;
                    delta[i] = cfg.alpha * g / (self.accumulator[i].sqrt() + cfg.epsilon);
                }
            }
            OptimizerKind::Adam => {
                self.t += 1;
                let b1 = cfg.adam_beta1;
                let b2 = cfg.adam_beta2;
                let bias1 = 1.0 - b1.powi(self.t as i32);
                let bias2 = 1.0 - b2.powi(self.t as i32);
                for i in 0..delta.len() {
                    let g = delta[i];
                    self.first_moment[i] = b1 * self.first_moment[i] + (1.0 - b1) * g;
                    self.second_moment[i] = b2 * self.second_moment[i] + (1.0 - b2) * g * g;
                    let m_hat = self.first_moment[i] / bias1;
                    let v_hat = self.second_moment[i] / bias2;
                    delta[i] = cfg.alpha * m_hat / (v_hat.sqrt() + cfg.epsilon);
                }
            }
        }
    }

    /// Sparse fast path for constant and Adagrad, whose per-coordinate
    /// semantics are unaffected by untouched coordinates (a zero gradient
    /// contributes nothing to either). Adam needs the dense path because
    /// its moments decay even on zero updates.
    pub fn step_sparse(&mut self, raw: &[(usize, f64)], params: &mut DVector<f64>) {
        let cfg = self.config;
        match cfg.kind {
            OptimizerKind::Constant => {
                for &(i, g) in raw {
                    params[i] += cfg.alpha * g;
                }
            }
            OptimizerKind::Adagrad => {
                for &(i, g) in raw {
                    self.accumulator[i] += g * g;
                    params[i] += cfg.alpha * g / (self.accumulator[i].sqrt() + cfg.epsilon);
                }
            }
            OptimizerKind::Adam => {
                let mut dense = DVector::zeros(params.len());
                for &(i, g) in raw {
                    dense[i] += g;
                }
                self.step(&dense, params);
            }
        }
    }
}
