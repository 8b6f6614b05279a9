//! One-step actor-critic with a linear-softmax policy and a TD, TDC, or
//! TDRC critic over the same features.
//!
//! The actor ascends `δ ∇ ln π(A|S)`; the discount-power factor on the
//! actor update is dropped, as is conventional. Recovering the plain
//! actor-critic corresponds to `η = 0` (the critic's secondary weights
//! never move from zero), and a TDC critic corresponds to `β = 0`.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::optim::{OptimizerConfig, OptimizerState};
use crate::rng::CounterRng;

/// Parameters of the linear-softmax action-preference function, stacked as
/// per-action blocks like the control agents.
#[derive(Debug, Clone)]
pub struct PolicyParams {
    pub theta: DVector<f64>,
    pub n_actions: usize,
    pub n_features: usize,
}

impl PolicyParams {
    pub fn zeros(n_actions: usize, n_features: usize) -> Self {
        PolicyParams {
            theta: DVector::zeros(n_actions * n_features),
            n_actions,
            n_features,
        }
    }

    fn preference(&self, active: &[usize], action: usize) -> f64 {
        let base = action * self.n_features;
        active.iter().map(|&i| self.theta[base + i]).sum()
    }

    /// Softmax action probabilities at a state.
    pub fn probs(&self, active: &[usize]) -> Vec<f64> {
        let prefs: Vec<f64> = (0..self.n_actions)
            .map(|a| self.preference(active, a))
            .collect();
        let max = prefs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = prefs.iter().map(|p| (p - max).exp()).collect();
        let total: f64 = exps.iter().sum();
        exps.into_iter().map(|e| e / total).collect()
    }

    /// `∇_θ ln π(a|s)`: the features land on block `a` with weight
    /// `1 − π(a|s)` and on every other block with weight `−π(a'|s)`.
    pub fn log_policy_gradient(&self, active: &[usize], action: usize) -> DVector<f64> {
        let probs = self.probs(active);
        let mut grad = DVector::zeros(self.theta.len());
        for (a, &pi_a) in probs.iter().enumerate() {
            let weight = if a == action { 1.0 - pi_a } else { -pi_a };
            let base = a * self.n_features;
            for &i in active {
                grad[base + i] += weight;
            }
        }
        grad
    }

    pub fn sample(&self, active: &[usize], rng: &mut CounterRng) -> usize {
        rng.next_weighted(&self.probs(active))
    }
}

/// Critic flavor within the shared actor-critic loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticKind {
    Td,
    Tdc,
    Tdrc,
}

impl CriticKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "ac-td" => Ok(CriticKind::Td),
            "ac-tdc" => Ok(CriticKind::Tdc),
            "ac-tdrc" => Ok(CriticKind::Tdrc),
            other => Err(Error::UnknownName(format!("actor-critic algorithm {other}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CriticKind::Td => "ac-td",
            CriticKind::Tdc => "ac-tdc",
            CriticKind::Tdrc => "ac-tdrc",
        }
    }

    /// (η, β) realizing this critic within the TDRC update form.
    pub fn hypers(&self) -> (f64, f64) {
        match self {
            CriticKind::Td => (0.0, 0.0),
            CriticKind::Tdc => (1.0, 0.0),
            CriticKind::Tdrc => (1.0, 1.0),
        }
    }
}

/// Raw `(Δw, Δh, Δθ)` for one on-policy step. Features are binary tile
/// activations shared by actor and critic.
#[allow(clippy::too_many_arguments)]
pub fn actor_critic_update(
    w: &DVector<f64>,
    h: &DVector<f64>,
    policy: &PolicyParams,
    eta: f64,
    beta: f64,
    active: &[usize],
    action: usize,
    reward: f64,
    active_next: &[usize],
    gamma_next: f64,
) -> (DVector<f64>, DVector<f64>, DVector<f64>) {
    let n = w.len();
    let v: f64 = active.iter().map(|&i| w[i]).sum();
    let v_next: f64 = active_next.iter().map(|&i| w[i]).sum();
    let delta = reward + gamma_next * v_next - v;
    let hx: f64 = active.iter().map(|&i| h[i]).sum();

    let mut dw = DVector::zeros(n);
    for &i in active {
        dw[i] += delta;
    }
    if gamma_next != 0.0 {
        let coeff = -gamma_next * hx;
        for &i in active_next {
            dw[i] += coeff;
        }
    }

    let mut dh = DVector::zeros(n);
    if eta != 0.0 {
        let err = delta - hx;
        for &i in active {
            dh[i] += err;
        }
        dh.axpy(-beta, h, 1.0);
        dh *= eta;
    }

    let dtheta = policy.log_policy_gradient(active, action) * delta;
    (dw, dh, dtheta)
}

/// Actor plus critic weights with their optimizer states.
#[derive(Debug, Clone)]
pub struct ActorCriticAgent {
    pub kind: CriticKind,
    pub w: DVector<f64>,
    pub h: DVector<f64>,
    pub policy: PolicyParams,
    eta: f64,
    beta: f64,
    opt_w: OptimizerState,
    opt_h: OptimizerState,
    opt_theta: OptimizerState,
}

impl ActorCriticAgent {
    pub fn new(
        kind: CriticKind,
        n_actions: usize,
        n_features: usize,
        optimizer: OptimizerConfig,
    ) -> Self {
        let (eta, beta) = kind.hypers();
        ActorCriticAgent {
            kind,
            w: DVector::zeros(n_features),
            h: DVector::zeros(n_features),
            policy: PolicyParams::zeros(n_actions, n_features),
            eta,
            beta,
            opt_w: OptimizerState::new(optimizer, n_features),
            opt_h: OptimizerState::new(optimizer, n_features),
            opt_theta: OptimizerState::new(optimizer, n_actions * n_features),
        }
    }

    pub fn select_action(&self, active: &[usize], rng: &mut CounterRng) -> usize {
        self.policy.sample(active, rng)
    }

    pub fn update(
        &mut self,
        active: &[usize],
        action: usize,
        reward: f64,
        active_next: &[usize],
        gamma_next: f64,
    ) {
        let (dw, dh, dtheta) = actor_critic_update(
            &self.w,
            &self.h,
            &self.policy,
            self.eta,
            self.beta,
            active,
            action,
            reward,
            active_next,
            gamma_next,
        );
        self.opt_w.step(&dw, &mut self.w);
        if self.eta != 0.0 {
            self.opt_h.step(&dh, &mut self.h);
        }
        self.opt_theta.step(&dtheta, &mut self.policy.theta);
    }
}
