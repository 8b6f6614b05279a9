//! Linear prediction updates: TD, clipped-ratio TD, the gradient-correction
//! family (TDC, GTD2, TDRC, TDC++), and the hybrid HTD.
//!
//! Every update consumes one [`Transition`] and returns raw update vectors
//! `(Δw, Δh)` — ascent directions before any stepsize. The TD error is
//! `δ = R + γ wᵀx' − wᵀx` with γ taken from the transition, so episodic
//! termination needs no special casing.

use nalgebra::DVector;

use crate::env::Transition;
use crate::error::{Error, Result};
use crate::optim::{OptimizerConfig, OptimizerState};

/// Secondary-weight hyperparameters shared across the family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyper {
    /// Stepsize multiplier for the secondary weights.
    pub eta: f64,
    /// Ridge strength on the secondary weights.
    pub beta: f64,
    /// Importance-ratio cap for the clipped update.
    pub clip: f64,
}

impl Default for Hyper {
    fn default() -> Self {
        Hyper {
            eta: 1.0,
            beta: 1.0,
            clip: 1.0,
        }
    }
}

#[inline]
pub fn td_error(w: &DVector<f64>, t: &Transition) -> f64 {
    t.reward + t.gamma_next * w.dot(&t.x_next) - w.dot(&t.x)
}

/// `ρδx − ργ(hᵀx)x'`, the primary update shared by TDC, TDRC, and TDC++.
#[inline]
fn corrected_primary(t: &Transition, delta: f64, hx: f64) -> DVector<f64> {
    let mut dw = &t.x * (t.rho * delta);
    dw.axpy(-(t.rho * t.gamma_next * hx), &t.x_next, 1.0);
    dw
}

/// `η([err]x − βh)`, the ridge-regression secondary update shared by the
/// family (β = 0 recovers the plain regression step).
#[inline]
fn ridge_secondary(t: &Transition, err: f64, h: &DVector<f64>, beta: f64, eta: f64) -> DVector<f64> {
    let mut dh = &t.x * err;
    dh.axpy(-beta, h, 1.0);
    dh * eta
}

/// Off-policy TD(0): `Δw = ρδx`.
pub fn td_update(w: &DVector<f64>, t: &Transition) -> DVector<f64> {
    &t.x * (t.rho * td_error(w, t))
}

/// TD with the importance ratio capped: `Δw = min(ρ, clip) δx`.
pub fn vtrace_update(w: &DVector<f64>, clip: f64, t: &Transition) -> DVector<f64> {
    &t.x * (t.rho.min(clip) * td_error(w, t))
}

/// TD with gradient corrections.
pub fn tdc_update(
    w: &DVector<f64>,
    h: &DVector<f64>,
    eta: f64,
    t: &Transition,
) -> (DVector<f64>, DVector<f64>) {
    let delta = td_error(w, t);
    let hx = h.dot(&t.x);
    let dw = corrected_primary(t, delta, hx);
    let dh = ridge_secondary(t, t.rho * delta - hx, h, 0.0, eta);
    (dw, dh)
}

/// Saddle-point gradient TD: `Δw = ρ(x − γx')(hᵀx)`, same `Δh` as TDC.
pub fn gtd2_update(
    w: &DVector<f64>,
    h: &DVector<f64>,
    eta: f64,
    t: &Transition,
) -> (DVector<f64>, DVector<f64>) {
    let delta = td_error(w, t);
    let hx = h.dot(&t.x);
    let mut dw = &t.x * (t.rho * hx);
    dw.axpy(-(t.rho * t.gamma_next * hx), &t.x_next, 1.0);
    let dh = ridge_secondary(t, t.rho * delta - hx, h, 0.0, eta);
    (dw, dh)
}

/// TDC with an ℓ₂ regularizer on the secondary weights. The primary update
/// is TDC's; the secondary adds `−βh`, giving TD in the large-β limit and
/// TDC at β = 0.
pub fn tdrc_update(
    w: &DVector<f64>,
    h: &DVector<f64>,
    eta: f64,
    beta: f64,
    t: &Transition,
) -> (DVector<f64>, DVector<f64>) {
    let delta = td_error(w, t);
    let hx = h.dot(&t.x);
    let dw = corrected_primary(t, delta, hx);
    let dh = ridge_secondary(t, t.rho * delta - hx, h, beta, eta);
    (dw, dh)
}

/// The TDC-like update derived from the objective with regularized
/// feature covariance `C + βI`: TDC plus an extra `−βh` on the primary
/// weights. The ratio placement mirrors TDRC's for off-policy use.
pub fn tdcpp_update(
    w: &DVector<f64>,
    h: &DVector<f64>,
    eta: f64,
    beta: f64,
    t: &Transition,
) -> (DVector<f64>, DVector<f64>) {
    let delta = td_error(w, t);
    let hx = h.dot(&t.x);
    let mut dw = corrected_primary(t, delta, hx);
    dw.axpy(-beta, h, 1.0);
    let dh = ridge_secondary(t, t.rho * delta - hx, h, beta, eta);
    (dw, dh)
}

/// Hybrid TD: gradient corrections scaled by `(1 − ρ)`, so the correction
/// vanishes identically on-policy and the primary update is exactly TD's.
/// The secondary weights regress toward the behavior-policy solution
/// `A_b⁻¹ E[ρδx]` using the full bootstrapped feature difference.
pub fn htd_update(
    w: &DVector<f64>,
    h: &DVector<f64>,
    t: &Transition,
) -> (DVector<f64>, DVector<f64>) {
    let delta = td_error(w, t);
    let hx = h.dot(&t.x);
    let mut dw = &t.x * (t.rho * delta);
    let coeff = (1.0 - t.rho) * hx;
    dw.axpy(coeff, &t.x, 1.0);
    dw.axpy(-(coeff * t.gamma_next), &t.x_next, 1.0);
    let bootstrap_h = hx - t.gamma_next * h.dot(&t.x_next);
    let dh = &t.x * (t.rho * delta - bootstrap_h);
    (dw, dh)
}

/// The prediction algorithms addressable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictionAlg {
    Td,
    Vtrace,
    Tdc,
    Gtd2,
    Htd,
    Tdrc,
    TdcPlusPlus,
}

impl PredictionAlg {
    pub const ALL: [PredictionAlg; 7] = [
        PredictionAlg::Td,
        PredictionAlg::Vtrace,
        PredictionAlg::Tdc,
        PredictionAlg::Gtd2,
        PredictionAlg::Htd,
        PredictionAlg::Tdrc,
        PredictionAlg::TdcPlusPlus,
    ];

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "td" => Ok(PredictionAlg::Td),
            "vtrace" => Ok(PredictionAlg::Vtrace),
            "tdc" => Ok(PredictionAlg::Tdc),
            "gtd2" => Ok(PredictionAlg::Gtd2),
            "htd" => Ok(PredictionAlg::Htd),
            "tdrc" => Ok(PredictionAlg::Tdrc),
            "tdcpp" => Ok(PredictionAlg::TdcPlusPlus),
            other => Err(Error::UnknownName(format!("prediction algorithm {other}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PredictionAlg::Td => "td",
            PredictionAlg::Vtrace => "vtrace",
            PredictionAlg::Tdc => "tdc",
            PredictionAlg::Gtd2 => "gtd2",
            PredictionAlg::Htd => "htd",
            PredictionAlg::Tdrc => "tdrc",
            PredictionAlg::TdcPlusPlus => "tdcpp",
        }
    }

    pub fn uses_eta(&self) -> bool {
        matches!(
            self,
            PredictionAlg::Tdc | PredictionAlg::Gtd2 | PredictionAlg::Htd | PredictionAlg::TdcPlusPlus
        )
    }

    pub fn uses_beta(&self) -> bool {
        matches!(self, PredictionAlg::Tdrc | PredictionAlg::TdcPlusPlus)
    }

    pub fn uses_clip(&self) -> bool {
        matches!(self, PredictionAlg::Vtrace)
    }

    pub fn uses_secondary_weights(&self) -> bool {
        !matches!(self, PredictionAlg::Td | PredictionAlg::Vtrace)
    }

    /// Raw `(Δw, Δh)` for one transition.
    pub fn raw_update(
        &self,
        hyper: &Hyper,
        w: &DVector<f64>,
        h: &DVector<f64>,
        t: &Transition,
    ) -> (DVector<f64>, DVector<f64>) {
        let n = w.len();
        match self {
            PredictionAlg::Td => (td_update(w, t), DVector::zeros(n)),
            PredictionAlg::Vtrace => (vtrace_update(w, hyper.clip, t), DVector::zeros(n)),
            PredictionAlg::Tdc => tdc_update(w, h, hyper.eta, t),
            PredictionAlg::Gtd2 => gtd2_update(w, h, hyper.eta, t),
            PredictionAlg::Htd => htd_update(w, h, t),
            PredictionAlg::Tdrc => tdrc_update(w, h, hyper.eta, hyper.beta, t),
            PredictionAlg::TdcPlusPlus => tdcpp_update(w, h, hyper.eta, hyper.beta, t),
        }
    }
}

/// Weight threshold past which a run is flagged as diverged. The run keeps
/// going; divergence is a recorded metric, not a crash.
pub const DIVERGENCE_THRESHOLD: f64 = 1e10;

/// Primary and secondary weights with their optimizer accumulators.
#[derive(Debug, Clone)]
pub struct PredictionAgent {
    pub alg: PredictionAlg,
    pub hyper: Hyper,
    pub w: DVector<f64>,
    pub h: DVector<f64>,
    opt_w: OptimizerState,
    opt_h: OptimizerState,
}

impl PredictionAgent {
    pub fn new(
        alg: PredictionAlg,
        hyper: Hyper,
        initial_w: DVector<f64>,
        optimizer: OptimizerConfig,
    ) -> Self {
        let n = initial_w.len();
        PredictionAgent {
            alg,
            hyper,
            w: initial_w,
            h: DVector::zeros(n),
            opt_w: OptimizerState::new(optimizer, n),
            opt_h: OptimizerState::new(optimizer, n),
        }
    }

    pub fn step(&mut self, t: &Transition) {
        let (dw, dh) = self.alg.raw_update(&self.hyper, &self.w, &self.h, t);
        self.opt_w.step(&dw, &mut self.w);
        if self.alg.uses_secondary_weights() {
            self.opt_h.step(&dh, &mut self.h);
        }
    }

    pub fn diverged(&self) -> bool {
        let runaway = |v: &f64| !v.is_finite() || v.abs() > DIVERGENCE_THRESHOLD;
        self.w.iter().any(runaway) || self.h.iter().any(runaway)
    }
}
