//! Greedy action-value control: Q-learning and its gradient-corrected
//! variants QC and QRC.
//!
//! Action values are linear over per-action feature blocks:
//! `q(s, a) = w_aᵀ x(s)` with all blocks stacked in one parameter vector.
//! The TD error bootstraps off the greedy action, `δ = R + γ max_a q(s', a)
//! − q(s, A)`, so no importance ratios appear. Secondary weights exist per
//! action and only the taken action's block is updated.

use nalgebra::DVector;

use crate::env::Transition;
use crate::error::{Error, Result};
use crate::optim::{OptimizerConfig, OptimizerState};
use crate::rng::CounterRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlVariant {
    QLearning,
    Qc,
    Qrc,
}

impl ControlVariant {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "qlearning" => Ok(ControlVariant::QLearning),
            "qc" => Ok(ControlVariant::Qc),
            "qrc" => Ok(ControlVariant::Qrc),
            other => Err(Error::UnknownName(format!("control algorithm {other}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ControlVariant::QLearning => "qlearning",
            ControlVariant::Qc => "qc",
            ControlVariant::Qrc => "qrc",
        }
    }
}

/// Sparse raw updates: (stacked index, value) pairs for `w` and `h`.
#[derive(Debug, Clone, Default)]
pub struct ControlUpdate {
    pub dw: Vec<(usize, f64)>,
    pub dh: Vec<(usize, f64)>,
}

#[inline]
fn block_dot(params: &DVector<f64>, block: usize, n_features: usize, active: &[usize]) -> f64 {
    let base = block * n_features;
    active.iter().map(|&i| params[base + i]).sum()
}

/// Greedy value and first-maximizing action over binary active features.
fn greedy(
    w: &DVector<f64>,
    n_actions: usize,
    n_features: usize,
    active: &[usize],
) -> (usize, f64) {
    let mut best = 0;
    let mut best_q = block_dot(w, 0, n_features, active);
    for a in 1..n_actions {
        let q = block_dot(w, a, n_features, active);
        if q > best_q {
            best = a;
            best_q = q;
        }
    }
    (best, best_q)
}

/// Raw update for one control transition over binary tile features given
/// by their active indices. `gamma_next = 0` marks a terminal transition,
/// which drops both the bootstrap and the correction term.
pub fn q_update_sparse(
    variant: ControlVariant,
    w: &DVector<f64>,
    h: &DVector<f64>,
    beta: f64,
    n_actions: usize,
    n_features: usize,
    active: &[usize],
    action: usize,
    reward: f64,
    active_next: &[usize],
    gamma_next: f64,
) -> ControlUpdate {
    let q_taken = block_dot(w, action, n_features, active);
    let (greedy_next, q_next) = greedy(w, n_actions, n_features, active_next);
    let delta = reward + gamma_next * q_next - q_taken;

    let mut update = ControlUpdate::default();
    let base = action * n_features;
    for &i in active {
        update.dw.push((base + i, delta));
    }

    if variant == ControlVariant::QLearning {
        return update;
    }

    // Correction: −γ ĥ(s, A) ∇q(s', a') with ĥ(s, A) = h_Aᵀ x. Terminal
    // transitions and a zero estimate contribute nothing.
    let h_estimate = block_dot(h, action, n_features, active);
    if gamma_next != 0.0 && h_estimate != 0.0 {
        let next_base = greedy_next * n_features;
        let coeff = -gamma_next * h_estimate;
        for &i in active_next {
            update.dw.push((next_base + i, coeff));
        }
    }

    // Secondary weights: regression toward δ on the taken action's block
    // only; QRC adds the ridge decay over the whole block.
    let err = delta - h_estimate;
    match variant {
        ControlVariant::Qc => {
            for &i in active {
                update.dh.push((base + i, err));
            }
        }
        ControlVariant::Qrc => {
            let mut block_vals = vec![0.0; n_features];
            for &i in active {
                block_vals[i] = err;
            }
            for (i, v) in block_vals.iter().enumerate() {
                update.dh.push((base + i, v - beta * h[base + i]));
            }
        }
        ControlVariant::QLearning => unreachable!(),
    }
    update
}

/// Dense-transition form of the control update; extracts the active
/// indices from the binary feature vectors and defers to the sparse path.
pub fn q_update(
    variant: ControlVariant,
    w: &DVector<f64>,
    h: &DVector<f64>,
    beta: f64,
    n_actions: usize,
    t: &Transition,
) -> ControlUpdate {
    let n_features = t.x.len();
    let active: Vec<usize> = (0..n_features).filter(|&i| t.x[i] != 0.0).collect();
    let active_next: Vec<usize> = (0..n_features).filter(|&i| t.x_next[i] != 0.0).collect();
    q_update_sparse(
        variant,
        w,
        h,
        beta,
        n_actions,
        n_features,
        &active,
        t.action,
        t.reward,
        &active_next,
        t.gamma_next,
    )
}

/// Linear control agent over stacked per-action blocks.
#[derive(Debug, Clone)]
pub struct ControlAgent {
    pub variant: ControlVariant,
    pub n_actions: usize,
    pub n_features: usize,
    pub beta: f64,
    pub w: DVector<f64>,
    pub h: DVector<f64>,
    opt_w: OptimizerState,
    opt_h: OptimizerState,
}

impl ControlAgent {
    pub fn new(
        variant: ControlVariant,
        n_actions: usize,
        n_features: usize,
        beta: f64,
        optimizer: OptimizerConfig,
    ) -> Self {
        let dim = n_actions * n_features;
        ControlAgent {
            variant,
            n_actions,
            n_features,
            beta,
            w: DVector::zeros(dim),
            h: DVector::zeros(dim),
            opt_w: OptimizerState::new(optimizer, dim),
            opt_h: OptimizerState::new(optimizer, dim),
        }
    }

    pub fn q(&self, active: &[usize], action: usize) -> f64 {
        block_dot(&self.w, action, self.n_features, active)
    }

    /// ε-greedy with uniform tie-breaking among maximizing actions.
    pub fn select_action(&self, active: &[usize], epsilon: f64, rng: &mut CounterRng) -> usize {
        if epsilon > 0.0 && rng.next_f64() < epsilon {
            return rng.next_index(self.n_actions);
        }
        let qs: Vec<f64> = (0..self.n_actions).map(|a| self.q(active, a)).collect();
        let best = qs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let ties: Vec<usize> = (0..self.n_actions).filter(|&a| qs[a] == best).collect();
        if ties.len() == 1 {
            ties[0]
        } else {
            ties[rng.next_index(ties.len())]
        }
    }

    pub fn update(
        &mut self,
        active: &[usize],
        action: usize,
        reward: f64,
        active_next: &[usize],
        gamma_next: f64,
    ) {
        let up = q_update_sparse(
            self.variant,
            &self.w,
            &self.h,
            self.beta,
            self.n_actions,
            self.n_features,
            active,
            action,
            reward,
            active_next,
            gamma_next,
        );
        self.opt_w.step_sparse(&up.dw, &mut self.w);
        if self.variant != ControlVariant::QLearning {
            self.opt_h.step_sparse(&up.dh, &mut self.h);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn apply(update: &[(usize, f64)], dim: usize) -> DVector<f64> {
        let mut v = DVector::zeros(dim);
        for &(i, val) in update {
            v[i] += val;
        }
        v
    }

    #[test]
    fn zero_h_makes_qc_and_qrc_match_q_learning() {
        let (na, nf) = (3, 4);
        let mut w = DVector::zeros(na * nf);
        for (i, v) in w.iter_mut().enumerate() {
            *v = (i as f64) * 0.1 - 0.5;
        }
        let h = DVector::zeros(na * nf);
        let active = vec![0, 2];
        let next = vec![1, 3];
        for variant in [ControlVariant::Qc, ControlVariant::Qrc] {
            let a = q_update_sparse(variant, &w, &h, 1.0, na, nf, &active, 1, -1.0, &next, 0.99);
            let b = q_update_sparse(
                ControlVariant::QLearning,
                &w,
                &h,
                0.0,
                na,
                nf,
                &active,
                1,
                -1.0,
                &next,
                0.99,
            );
            assert_eq!(apply(&a.dw, na * nf), apply(&b.dw, na * nf));
        }
    }

    #[test]
    fn qrc_with_beta_zero_is_qc() {
        let (na, nf) = (2, 3);
        let w = DVector::from_vec(vec![0.1, -0.2, 0.3, 0.5, 0.0, -0.1]);
        let h = DVector::from_vec(vec![0.2, 0.1, -0.3, 0.0, 0.4, 0.2]);
        let active = vec![0, 1];
        let next = vec![2];
        let a = q_update_sparse(ControlVariant::Qrc, &w, &h, 0.0, na, nf, &active, 0, 1.0, &next, 0.9);
        let b = q_update_sparse(ControlVariant::Qc, &w, &h, 0.0, na, nf, &active, 0, 1.0, &next, 0.9);
        assert_eq!(apply(&a.dw, na * nf), apply(&b.dw, na * nf));
        assert_eq!(apply(&a.dh, na * nf), apply(&b.dh, na * nf));
    }

    #[test]
    fn terminal_transitions_use_no_bootstrap_and_no_correction() {
        let (na, nf) = (2, 2);
        let w = DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]);
        let h = DVector::from_vec(vec![0.5, 0.5, 0.5, 0.5]);
        let active = vec![0];
        let next = vec![1];
        let up = q_update_sparse(ControlVariant::Qc, &w, &h, 0.0, na, nf, &active, 0, -1.0, &next, 0.0);
        // δ = −1 − q(s, 0) = −1 − 1 = −2, only the taken block moves.
        let dw = apply(&up.dw, na * nf);
        assert_eq!(dw, DVector::from_vec(vec![-2.0, 0.0, 0.0, 0.0]));
    }

    #[test]
    fn two_action_bandit_converges_to_reward_means() {
        // Single state (constant feature), γ = 0, rewards 0 and 1: all three
        // variants learn q(a) = mean reward under a constant stepsize.
        for variant in [ControlVariant::QLearning, ControlVariant::Qc, ControlVariant::Qrc] {
            let mut agent = ControlAgent::new(variant, 2, 1, 1.0, OptimizerConfig::constant(0.1));
            let active = vec![0usize];
            let mut rng = CounterRng::keyed(&[31, variant as u64]);
            for _ in 0..4000 {
                let a = agent.select_action(&active, 0.5, &mut rng);
                let reward = if a == 1 { 1.0 } else { 0.0 };
                agent.update(&active, a, reward, &active, 0.0);
            }
            assert_abs_diff_eq!(agent.q(&active, 0), 0.0, epsilon = 1e-6);
            assert_abs_diff_eq!(agent.q(&active, 1), 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn greedy_tie_break_is_uniform() {
        let agent = ControlAgent::new(ControlVariant::QLearning, 3, 1, 0.0, OptimizerConfig::constant(0.1));
        let mut rng = CounterRng::keyed(&[77]);
        let mut counts = [0usize; 3];
        for _ in 0..30_000 {
            counts[agent.select_action(&[0], 0.0, &mut rng)] += 1;
        }
        for c in counts {
            let frac = c as f64 / 30_000.0;
            assert!((frac - 1.0 / 3.0).abs() < 0.02, "tie fraction {frac}");
        }
    }
}
