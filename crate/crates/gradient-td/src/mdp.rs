//! Finite MDPs, policies, linear features, and the exact expectation
//! matrices behind the MSPBE.
//!
//! For stationary distribution `d` over states, features `x(s)`, and
//! per-transition discount `γ`, the matrices are
//!
//! ```text
//! A = E[x (x − γ x')ᵀ]    b = E[R x]    C = E[x xᵀ]
//! ```
//!
//! with the action expectation taken under the target policy and the state
//! expectation under the behavior policy's stationary distribution (the
//! excursion setting). Episodic termination is encoded by `γ = 0` on the
//! terminating transition, which both removes the bootstrap term from `A`
//! and routes the chain through the start distribution when computing `d`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const PROB_TOL: f64 = 1e-12;

/// Dense rank-3 tensor indexed by (state, action, next state).
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    data: Vec<f64>,
    n_states: usize,
    n_actions: usize,
}

impl Tensor3 {
    pub fn zeros(n_states: usize, n_actions: usize) -> Self {
        Tensor3 {
            data: vec![0.0; n_states * n_actions * n_states],
            n_states,
            n_actions,
        }
    }

    pub fn filled(n_states: usize, n_actions: usize, value: f64) -> Self {
        Tensor3 {
            data: vec![value; n_states * n_actions * n_states],
            n_states,
            n_actions,
        }
    }

    #[inline]
    pub fn get(&self, s: usize, a: usize, s2: usize) -> f64 {
        self.data[(s * self.n_actions + a) * self.n_states + s2]
    }

    #[inline]
    pub fn set(&mut self, s: usize, a: usize, s2: usize, value: f64) {
        self.data[(s * self.n_actions + a) * self.n_states + s2] = value;
    }
}

/// A finite MDP with per-transition rewards and discounts, plus the start
/// distribution used for episodic restarts.
#[derive(Debug, Clone)]
pub struct MdpSpec {
    pub n_states: usize,
    pub n_actions: usize,
    /// `P[s][a][s']`, rows summing to one for every (s, a).
    pub transition: Tensor3,
    /// Expected reward on each (s, a, s') transition.
    pub reward: Tensor3,
    /// Discount applied on each (s, a, s'); zero marks termination.
    pub discount: Tensor3,
    pub start_dist: DVector<f64>,
}

impl MdpSpec {
    pub fn new(
        n_states: usize,
        n_actions: usize,
        transition: Tensor3,
        reward: Tensor3,
        discount: Tensor3,
        start_dist: DVector<f64>,
    ) -> Result<Self> {
        let mdp = MdpSpec {
            n_states,
            n_actions,
            transition,
            reward,
            discount,
            start_dist,
        };
        mdp.validate()?;
        Ok(mdp)
    }

    pub fn validate(&self) -> Result<()> {
        if self.start_dist.len() != self.n_states {
            return Err(Error::DimensionMismatch(format!(
                "start_dist has {} entries for {} states",
                self.start_dist.len(),
                self.n_states
            )));
        }
        for s in 0..self.n_states {
            for a in 0..self.n_actions {
                let mut total = 0.0;
                for s2 in 0..self.n_states {
                    let p = self.transition.get(s, a, s2);
                    let g = self.discount.get(s, a, s2);
                    if !(0.0..=1.0).contains(&p) {
                        return Err(Error::InvalidModel(format!(
                            "P[{s}][{a}][{s2}] = {p} out of [0,1]"
                        )));
                    }
                    if !(0.0..=1.0).contains(&g) {
                        return Err(Error::InvalidModel(format!(
                            "discount[{s}][{a}][{s2}] = {g} out of [0,1]"
                        )));
                    }
                    total += p;
                }
                if (total - 1.0).abs() > PROB_TOL {
                    return Err(Error::InvalidModel(format!(
                        "P[{s}][{a}] sums to {total}"
                    )));
                }
            }
        }
        let start_sum: f64 = self.start_dist.iter().sum();
        if (start_sum - 1.0).abs() > PROB_TOL || self.start_dist.iter().any(|&p| p < 0.0) {
            return Err(Error::InvalidModel(format!(
                "start_dist sums to {start_sum} or has negative entries"
            )));
        }
        Ok(())
    }

    /// Behavior state chain with termination redirected through the start
    /// distribution: mass on a `γ = 0` transition restarts the chain.
    pub fn restart_chain(&self, behavior: &Policy) -> DMatrix<f64> {
        let n = self.n_states;
        let mut chain = DMatrix::zeros(n, n);
        for s in 0..n {
            for a in 0..self.n_actions {
                let pa = behavior.probs[(s, a)];
                if pa == 0.0 {
                    continue;
                }
                for s2 in 0..n {
                    let p = self.transition.get(s, a, s2);
                    if p == 0.0 {
                        continue;
                    }
                    if self.discount.get(s, a, s2) == 0.0 {
                        for (s_new, &ps) in self.start_dist.iter().enumerate() {
                            chain[(s, s_new)] += pa * p * ps;
                        }
                    } else {
                        chain[(s, s2)] += pa * p;
                    }
                }
            }
        }
        chain
    }
}

/// Row-stochastic action probabilities, one row per state.
#[derive(Debug, Clone)]
pub struct Policy {
    pub probs: DMatrix<f64>,
}

impl Policy {
    pub fn new(probs: DMatrix<f64>) -> Result<Self> {
        for s in 0..probs.nrows() {
            let row_sum: f64 = probs.row(s).iter().sum();
            if (row_sum - 1.0).abs() > PROB_TOL {
                return Err(Error::InvalidModel(format!(
                    "policy row {s} sums to {row_sum}"
                )));
            }
            if probs.row(s).iter().any(|&p| p < 0.0) {
                return Err(Error::InvalidModel(format!(
                    "policy row {s} has a negative entry"
                )));
            }
        }
        Ok(Policy { probs })
    }

    /// Same action probabilities in every state.
    pub fn uniform_rows(n_states: usize, action_probs: &[f64]) -> Result<Self> {
        let na = action_probs.len();
        Policy::new(DMatrix::from_fn(n_states, na, |_, a| action_probs[a]))
    }

    #[inline]
    pub fn prob(&self, s: usize, a: usize) -> f64 {
        self.probs[(s, a)]
    }
}

/// State-to-feature-vector map for a finite MDP, stored as the
/// `n_states × n_features` matrix whose rows are `x(s)ᵀ`.
#[derive(Debug, Clone)]
pub struct FeatureMap {
    pub matrix: DMatrix<f64>,
}

impl FeatureMap {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.ncols() == 0 {
            return Err(Error::InvalidModel("feature dimension is zero".into()));
        }
        if matrix.iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidModel("all-zero feature matrix".into()));
        }
        Ok(FeatureMap { matrix })
    }

    pub fn n_features(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn n_states(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn row(&self, s: usize) -> DVector<f64> {
        self.matrix.row(s).transpose()
    }
}

/// The exact expectations `A`, `b`, `C` together with the stationary
/// distribution they were taken under and the discounted next-feature
/// cross moment `E[γ x' xᵀ]` (so `A = C − E[γ x' xᵀ]ᵀ`).
#[derive(Debug, Clone)]
pub struct ExpectationModel {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: DMatrix<f64>,
    pub stationary: DVector<f64>,
    /// `E[γ x' xᵀ]` under the target policy; the discount as folded into A.
    pub gamma_cross: DMatrix<f64>,
}

impl ExpectationModel {
    pub fn n_features(&self) -> usize {
        self.a.nrows()
    }

    /// `E[δ x] = b − A w`.
    pub fn expected_td_update(&self, w: &DVector<f64>) -> DVector<f64> {
        &self.b - &self.a * w
    }

    /// `C + βI`, non-singular by construction for β > 0.
    pub fn c_beta(&self, beta: f64) -> DMatrix<f64> {
        let n = self.c.nrows();
        &self.c + DMatrix::identity(n, n) * beta
    }

    /// Ridge solution `h_β = C_β⁻¹ (b − A w)` estimated by the regularized
    /// secondary weights.
    pub fn h_beta(&self, w: &DVector<f64>, beta: f64) -> DVector<f64> {
        self.c_beta(beta)
            .lu()
            .solve(&self.expected_td_update(w))
            .expect("C + beta I is invertible for beta >= 0 with PSD C")
    }

    /// Restriction of the model to the feature row space.
    ///
    /// Overcomplete features (more columns than independent state rows,
    /// as in the star counterexample) leave `C` and `A` rank-deficient.
    /// The null directions of the feature matrix are value-invisible and
    /// structurally frozen by the updates — every raw update lives in the
    /// span of observed feature vectors — so restricting `A`, `b`, `C` to
    /// an orthonormal basis of the row space yields an equivalent model
    /// with non-singular `C`. Returns the reduced model and the number of
    /// dropped dimensions (zero means `self` is returned unchanged).
    pub fn reduced(&self) -> (ExpectationModel, usize) {
        let n = self.n_features();
        let eig = self.c.clone().symmetric_eigen();
        let max = eig.eigenvalues.max().max(f64::MIN_POSITIVE);
        let tol = max * n as f64 * f64::EPSILON * 64.0;
        let keep: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > tol).collect();
        if keep.len() == n {
            return (self.clone(), 0);
        }
        let mut basis = DMatrix::zeros(n, keep.len());
        for (j, &i) in keep.iter().enumerate() {
            basis.set_column(j, &eig.eigenvectors.column(i));
        }
        let reduced = ExpectationModel {
            a: basis.transpose() * &self.a * &basis,
            b: basis.transpose() * &self.b,
            c: basis.transpose() * &self.c * &basis,
            stationary: self.stationary.clone(),
            gamma_cross: basis.transpose() * &self.gamma_cross * &basis,
        };
        (reduced, n - keep.len())
    }
}

/// Stationary distribution of the behavior state chain, with episodic
/// restart applied where `γ = 0`.
///
/// Solves `(Pᵀ − I) d = 0, Σ d = 1` directly, which also covers periodic
/// chains; falls back to power iteration when the solve is inconclusive.
pub fn stationary_distribution(mdp: &MdpSpec, behavior: &Policy) -> Result<DVector<f64>> {
    let chain = mdp.restart_chain(behavior);
    let n = mdp.n_states;

    if let Some(d) = stationary_by_solve(&chain) {
        return Ok(d);
    }
    stationary_by_power(&chain).ok_or_else(|| {
        Error::NonErgodicChain(format!(
            "neither direct solve nor power iteration (cap 10^6, tol 1e-12) \
             found a fixed point of the {n}-state behavior chain; the chain \
             is likely reducible — supply an explicit distribution override"
        ))
    })
}

fn stationary_by_solve(chain: &DMatrix<f64>) -> Option<DVector<f64>> {
    let n = chain.nrows();
    // Rows of (Pᵀ − I) with the last replaced by the normalization Σ d = 1.
    let mut m = chain.transpose() - DMatrix::identity(n, n);
    for j in 0..n {
        m[(n - 1, j)] = 1.0;
    }
    let mut rhs = DVector::zeros(n);
    rhs[n - 1] = 1.0;
    let d = m.lu().solve(&rhs)?;
    check_stationary(chain, d)
}

fn stationary_by_power(chain: &DMatrix<f64>) -> Option<DVector<f64>> {
    let n = chain.nrows();
    let mut d = DVector::from_element(n, 1.0 / n as f64);
    let pt = chain.transpose();
    for _ in 0..1_000_000 {
        let mut next = &pt * &d;
        let total: f64 = next.iter().sum();
        next /= total;
        let diff = (&next - &d).abs().max();
        d = next;
        if diff < 1e-12 {
            return check_stationary(chain, d);
        }
    }
    None
}

fn check_stationary(chain: &DMatrix<f64>, mut d: DVector<f64>) -> Option<DVector<f64>> {
    if d.iter().any(|&v| v < -1e-9 || !v.is_finite()) {
        return None;
    }
    for v in d.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let total: f64 = d.iter().sum();
    d /= total;
    let residual = (chain.transpose() * &d - &d).abs().max();
    (residual <= 1e-10).then_some(d)
}

/// Exact `A`, `b`, `C` for the given behavior/target policies and features.
///
/// The action expectation uses the target policy directly, which is
/// algebraically identical to the ρ-weighted behavior expectation but free
/// of Monte-Carlo noise.
pub fn expectation_matrices(
    mdp: &MdpSpec,
    behavior: &Policy,
    target: &Policy,
    features: &FeatureMap,
) -> Result<ExpectationModel> {
    let d = stationary_distribution(mdp, behavior)?;
    expectation_matrices_with(mdp, target, features, &d)
}

/// Same as [`expectation_matrices`] but with an explicit state distribution,
/// for callers that need an override when the chain solve fails.
pub fn expectation_matrices_with(
    mdp: &MdpSpec,
    target: &Policy,
    features: &FeatureMap,
    stationary: &DVector<f64>,
) -> Result<ExpectationModel> {
    let n = features.n_features();
    if features.n_states() != mdp.n_states {
        return Err(Error::DimensionMismatch(format!(
            "feature map covers {} states, MDP has {}",
            features.n_states(),
            mdp.n_states
        )));
    }
    if target.probs.nrows() != mdp.n_states || target.probs.ncols() != mdp.n_actions {
        return Err(Error::DimensionMismatch(format!(
            "target policy is {}x{}, MDP needs {}x{}",
            target.probs.nrows(),
            target.probs.ncols(),
            mdp.n_states,
            mdp.n_actions
        )));
    }
    if stationary.len() != mdp.n_states {
        return Err(Error::DimensionMismatch(format!(
            "distribution has {} entries for {} states",
            stationary.len(),
            mdp.n_states
        )));
    }

    let mut a = DMatrix::zeros(n, n);
    let mut b = DVector::zeros(n);
    let mut c = DMatrix::zeros(n, n);
    let mut gamma_cross = DMatrix::zeros(n, n);

    for s in 0..mdp.n_states {
        let ds = stationary[s];
        if ds == 0.0 {
            continue;
        }
        let x = features.row(s);
        c.ger(ds, &x, &x, 1.0);
        for act in 0..mdp.n_actions {
            let pa = target.prob(s, act);
            if pa == 0.0 {
                continue;
            }
            for s2 in 0..mdp.n_states {
                let p = mdp.transition.get(s, act, s2);
                if p == 0.0 {
                    continue;
                }
                let weight = ds * pa * p;
                let gamma = mdp.discount.get(s, act, s2);
                let x2 = features.row(s2);
                // A += weight · x (x − γ x')ᵀ
                let bootstrap = &x - &x2 * gamma;
                a.ger(weight, &x, &bootstrap, 1.0);
                gamma_cross.ger(weight * gamma, &x2, &x, 1.0);
                b.axpy(weight * mdp.reward.get(s, act, s2), &x, 1.0);
            }
        }
    }

    Ok(ExpectationModel {
        a,
        b,
        c,
        stationary: stationary.clone(),
        gamma_cross,
    })
}

/// Exact state values under a policy, from the Bellman solve
/// `(I − P_γ) v = r̄` with the per-transition discount folded into `P_γ`.
pub fn exact_values(mdp: &MdpSpec, policy: &Policy) -> Result<DVector<f64>> {
    let n = mdp.n_states;
    let mut p_gamma = DMatrix::zeros(n, n);
    let mut r_bar = DVector::zeros(n);
    for s in 0..n {
        for a in 0..mdp.n_actions {
            let pa = policy.prob(s, a);
            if pa == 0.0 {
                continue;
            }
            for s2 in 0..n {
                let p = mdp.transition.get(s, a, s2);
                if p == 0.0 {
                    continue;
                }
                p_gamma[(s, s2)] += pa * p * mdp.discount.get(s, a, s2);
                r_bar[s] += pa * p * mdp.reward.get(s, a, s2);
            }
        }
    }
    (DMatrix::identity(n, n) - p_gamma)
        .lu()
        .solve(&r_bar)
        .ok_or_else(|| Error::InvalidModel("Bellman system is singular".into()))
}

/// Weights solving `A w = b`, the TD fixed point, with the condition number
/// of `A` reported alongside.
#[derive(Debug, Clone)]
pub struct TdFixedPoint {
    pub weights: DVector<f64>,
    pub condition_number: f64,
}

pub fn td_fixed_point(model: &ExpectationModel) -> Result<TdFixedPoint> {
    let n = model.n_features();
    let svd = model.a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let rank_tol = smax * n as f64 * f64::EPSILON * 16.0;
    let rank = svd.singular_values.iter().filter(|&&s| s > rank_tol).count();
    if rank < n {
        let v_t = svd.v_t.as_ref().expect("requested V^T");
        let nullspace = (0..n)
            .filter(|&i| svd.singular_values[i] <= rank_tol)
            .map(|i| v_t.row(i).transpose())
            .collect();
        return Err(Error::SingularSystem {
            rank,
            dim: n,
            nullspace,
        });
    }
    let weights = model
        .a
        .clone()
        .lu()
        .solve(&model.b)
        .ok_or_else(|| Error::InvalidModel("LU solve failed on full-rank A".into()))?;
    // One step of iterative refinement keeps the residual near machine
    // precision relative to ‖b‖.
    let residual = &model.b - &model.a * &weights;
    let weights = match model.a.clone().lu().solve(&residual) {
        Some(correction) => weights + correction,
        None => weights,
    };
    Ok(TdFixedPoint {
        weights,
        condition_number: smax / smin,
    })
}
