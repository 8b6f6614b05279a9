//! Computable convergence analysis for the regularized-correction update.
//!
//! Stacking the secondary and primary weights as `[h; w]`, the expected
//! update follows the linear ODE `ż = G z + g` with
//!
//! ```text
//! G = [ −η C_β   −η A ]        g = [ η b ]
//!     [ Aᵀ − C    −A  ]            [   b ]
//! ```
//!
//! for `C_β = C + βI`. Convergence of the stochastic iterates reduces to
//! `G` being Hurwitz (every eigenvalue in the open left half-plane). When
//! `A` is positive definite any `η, β ≥ 0` works; otherwise admissibility
//! is `β < −λ_max(H⁻¹AAᵀ)` and `η > −λ_min(C⁻¹H)` with `H = (A + Aᵀ)/2`,
//! both guaranteed positive in that case. A singular `C` needs the sampled
//! per-direction bounds instead.

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{td_fixed_point, ExpectationModel};
use crate::rng::{stream, CounterRng};

/// Eigenvalue real parts must sit strictly below this to count as stable.
pub const HURWITZ_TOL: f64 = -1e-10;

/// Threshold on the minimum eigenvalue of `H` for declaring `A` positive
/// definite.
pub const PD_TOL: f64 = 1e-10;

/// The stacked ODE matrix and drift vector for the supplied (η, β).
pub fn build_g(model: &ExpectationModel, eta: f64, beta: f64) -> (DMatrix<f64>, DVector<f64>) {
    let n = model.n_features();
    let c_beta = model.c_beta(beta);
    let mut g = DMatrix::zeros(2 * n, 2 * n);
    g.view_mut((0, 0), (n, n)).copy_from(&(&c_beta * -eta));
    g.view_mut((0, n), (n, n)).copy_from(&(&model.a * -eta));
    g.view_mut((n, 0), (n, n))
        .copy_from(&(model.a.transpose() - &model.c));
    g.view_mut((n, n), (n, n)).copy_from(&(&model.a * -1.0));

    let mut drift = DVector::zeros(2 * n);
    drift.rows_mut(0, n).copy_from(&(&model.b * eta));
    drift.rows_mut(n, n).copy_from(&model.b);
    (g, drift)
}

pub fn g_spectrum(g: &DMatrix<f64>) -> Vec<Complex<f64>> {
    g.clone().complex_eigenvalues().iter().cloned().collect()
}

pub fn is_hurwitz(spectrum: &[Complex<f64>]) -> bool {
    spectrum.iter().all(|l| l.re < HURWITZ_TOL)
}

/// `det(G) = η^d det(Aᵀ + βI) det(A)`, the identity behind uniqueness of
/// the stacked fixed point. Returns `(det G, predicted, relative error)`.
/// When both sides sit below the determinants' floating-point noise floor
/// (a singular `A` makes both exactly zero in real arithmetic) the
/// relative error is reported as zero.
pub fn det_g_identity(model: &ExpectationModel, eta: f64, beta: f64) -> (f64, f64, f64) {
    let n = model.n_features();
    let (g, _) = build_g(model, eta, beta);
    let det_g = g.determinant();
    let a_beta_t = model.a.transpose() + DMatrix::identity(n, n) * beta;
    let predicted = eta.powi(n as i32) * a_beta_t.determinant() * model.a.determinant();

    let noise_g = det_noise_floor(&g);
    let noise_pred =
        eta.powi(n as i32).abs() * det_noise_floor(&a_beta_t) * hadamard_bound(&model.a)
            + eta.powi(n as i32).abs() * hadamard_bound(&a_beta_t) * det_noise_floor(&model.a);
    let rel = if det_g.abs() <= noise_g && predicted.abs() <= noise_pred {
        0.0
    } else {
        (det_g - predicted).abs() / det_g.abs().max(predicted.abs()).max(f64::MIN_POSITIVE)
    };
    (det_g, predicted, rel)
}

fn hadamard_bound(m: &DMatrix<f64>) -> f64 {
    (0..m.nrows()).map(|i| m.row(i).norm()).product()
}

fn det_noise_floor(m: &DMatrix<f64>) -> f64 {
    hadamard_bound(m) * m.nrows() as f64 * f64::EPSILON * 64.0
}

/// Admissibility region from the convergence theorem.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Theorem1Bounds {
    /// Minimum eigenvalue of `H = (A + Aᵀ)/2`.
    pub h_min_eigenvalue: f64,
    pub a_positive_definite: bool,
    /// Tightest `−λ` over the negative eigenvalues of the pencil
    /// `AAᵀ z = λ H z` — the `−λ_max(H⁻¹AAᵀ)` bound, evaluated on the
    /// branch of directions with negative H-curvature where the proof's
    /// constraints actually bind. `None` under condition (i), where any
    /// β ≥ 0 is admissible.
    pub beta_max: Option<f64>,
    /// `−λ_min(C⁻¹H)`; `None` under condition (i).
    pub eta_min: Option<f64>,
}

/// Bounds on (η, β) guaranteeing a Hurwitz `G`, requiring non-singular `C`.
///
/// Both eigenproblems are solved as symmetric generalized pencils
/// (whitening by a Cholesky factor) rather than by explicit inversion.
pub fn theorem1_bounds(model: &ExpectationModel) -> Result<Theorem1Bounds> {
    let h = (&model.a + model.a.transpose()) * 0.5;
    let h_min = h.symmetric_eigenvalues().min();
    if h_min > PD_TOL {
        return Ok(Theorem1Bounds {
            h_min_eigenvalue: h_min,
            a_positive_definite: true,
            beta_max: None,
            eta_min: None,
        });
    }

    let c_chol = nalgebra::Cholesky::new(model.c.clone())
        .ok_or_else(|| Error::InvalidModel("C is singular; use the sampled bounds".into()))?;

    // Pencil AAᵀ z = λ H z via the flip H z = μ AAᵀ z, μ = 1/λ: whitening
    // with the Cholesky factor of AAᵀ makes it an ordinary symmetric
    // eigenproblem. Directions with z*Hz < 0 are exactly the negative-μ
    // branch, and the binding β constraint there is z*AAᵀz / (−z*Hz),
    // minimized at −1/μ_min.
    let aat = &model.a * model.a.transpose();
    let aat_chol = nalgebra::Cholesky::new(symmetrize(&aat))
        .ok_or_else(|| Error::InvalidModel("AAᵀ is singular; reduce the model first".into()))?;
    let mu_min = whitened_spectrum(&aat_chol.l(), &h)?.min();
    if mu_min >= 0.0 {
        return Err(Error::InvalidModel(
            "H has no negative directions despite an indefinite minimum eigenvalue".into(),
        ));
    }
    let beta_max = -1.0 / mu_min;

    // λ(C⁻¹H) through the Cholesky whitening L⁻¹ H L⁻ᵀ.
    let eta_min = -whitened_spectrum(&c_chol.l(), &h)?.min();

    Ok(Theorem1Bounds {
        h_min_eigenvalue: h_min,
        a_positive_definite: false,
        beta_max: Some(beta_max),
        eta_min: Some(eta_min),
    })
}

/// Eigenvalues of `L⁻¹ M L⁻ᵀ` for a lower-triangular `L` and symmetric `M`.
fn whitened_spectrum(l: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<DVector<f64>> {
    let y = l
        .solve_lower_triangular(m)
        .ok_or_else(|| Error::InvalidModel("triangular solve failed".into()))?;
    let k = l
        .solve_lower_triangular(&y.transpose())
        .ok_or_else(|| Error::InvalidModel("triangular solve failed".into()))?;
    Ok(symmetrize(&k).symmetric_eigenvalues())
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Monte-Carlo estimate of the per-direction admissibility bounds that
/// replace the theorem when `C` is singular. Sampled over complex unit
/// vectors with local refinement; an estimate, not a certificate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampledBounds {
    pub beta: f64,
    /// Tightest sampled `−b_a / λ_r` over directions with `λ_r < 0`.
    pub beta_max_estimate: Option<f64>,
    /// Worst sampled η lower bound at the supplied β. `None` either when
    /// no negative-curvature direction was sampled (no constraint binds)
    /// or when β itself is inadmissible; `beta_admissible` separates the
    /// two cases.
    pub eta_min_estimate: Option<f64>,
    /// False when some sampled direction rejects this β outright, so no η
    /// stabilizes it.
    pub beta_admissible: bool,
    pub n_samples: usize,
}

struct Direction {
    lambda_r: f64,
    lambda_c: f64,
    b_a: f64,
}

fn direction_quantities(model: &ExpectationModel, re: &DVector<f64>, im: &DVector<f64>) -> Direction {
    // z = re + i·im, assumed unit norm. For real A:
    //   z*Az = (reᵀA re + imᵀA im) + i(reᵀA im − imᵀA re)
    //   z*AAᵀz = ‖Aᵀre‖² + ‖Aᵀim‖²  (cross terms cancel by symmetry)
    let a = &model.a;
    let a_re = a * re;
    let a_im = a * im;
    let lambda_r = re.dot(&a_re) + im.dot(&a_im);
    let lambda_c = re.dot(&a_im) - im.dot(&a_re);
    let at_re = a.transpose() * re;
    let at_im = a.transpose() * im;
    let b_a = at_re.norm_squared() + at_im.norm_squared();
    Direction {
        lambda_r,
        lambda_c,
        b_a,
    }
}

/// η lower bound implied by one direction at regularization β, valid for
/// `λ_r < 0` and `β λ_r + b_a > 0`; infinite when β already violates the
/// direction's own β bound.
fn eta_bound_for(dir: &Direction, beta: f64) -> Option<f64> {
    if dir.lambda_r >= 0.0 {
        return None;
    }
    let denom = beta * dir.lambda_r + dir.b_a;
    if denom <= 0.0 {
        return Some(f64::INFINITY);
    }
    let inner = -beta * dir.lambda_c * dir.lambda_c * dir.lambda_r / denom;
    Some((inner.sqrt() - dir.lambda_r) / beta)
}

pub fn singular_c_bounds(model: &ExpectationModel, beta: f64, n_samples: usize) -> SampledBounds {
    assert!(beta > 0.0, "sampled bounds need beta > 0");
    let n = model.n_features();
    let mut rng = CounterRng::keyed(&[0xB0_u64, stream::ANALYSIS]);

    let sample_unit = |rng: &mut CounterRng| {
        let mut re = DVector::from_fn(n, |_, _| rng.next_normal());
        let mut im = DVector::from_fn(n, |_, _| rng.next_normal());
        let norm = (re.norm_squared() + im.norm_squared()).sqrt();
        re /= norm;
        im /= norm;
        (re, im)
    };

    let mut beta_best: Option<(f64, DVector<f64>, DVector<f64>)> = None;
    let mut eta_candidates: Vec<(f64, DVector<f64>, DVector<f64>)> = Vec::new();

    for _ in 0..n_samples {
        let (re, im) = sample_unit(&mut rng);
        let dir = direction_quantities(model, &re, &im);
        if dir.lambda_r < 0.0 {
            let bound = -dir.b_a / dir.lambda_r;
            if beta_best.as_ref().map_or(true, |(b, _, _)| bound < *b) {
                beta_best = Some((bound, re.clone(), im.clone()));
            }
        }
        if let Some(eta) = eta_bound_for(&dir, beta) {
            eta_candidates.push((eta, re, im));
        }
    }

    eta_candidates.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    eta_candidates.truncate(100);

    // Local refinement: projected gradient ascent on the per-direction η
    // bound from each of the worst sampled directions.
    let beta_admissible = eta_candidates.iter().all(|(e, _, _)| e.is_finite());
    let mut eta_min_estimate = None;
    if beta_admissible {
        let mut worst = eta_candidates.first().map(|(e, _, _)| *e);
        for (_, re, im) in &eta_candidates {
            let refined = refine_eta_bound(model, beta, re.clone(), im.clone());
            if refined.is_finite() && refined > worst.unwrap_or(f64::NEG_INFINITY) {
                worst = Some(refined);
            }
        }
        eta_min_estimate = worst;
    }

    // Refine the β bound from its own worst start by minimizing.
    let beta_max_estimate = beta_best.map(|(bound, re, im)| {
        let refined = refine_beta_bound(model, re, im);
        refined.min(bound)
    });

    SampledBounds {
        beta,
        beta_max_estimate,
        eta_min_estimate,
        beta_admissible,
        n_samples,
    }
}

fn objective_eta(model: &ExpectationModel, beta: f64, re: &DVector<f64>, im: &DVector<f64>) -> f64 {
    let norm = (re.norm_squared() + im.norm_squared()).sqrt();
    let dir = direction_quantities(model, &(re / norm), &(im / norm));
    eta_bound_for(&dir, beta).unwrap_or(f64::NEG_INFINITY)
}

fn objective_beta(model: &ExpectationModel, re: &DVector<f64>, im: &DVector<f64>) -> f64 {
    let norm = (re.norm_squared() + im.norm_squared()).sqrt();
    let dir = direction_quantities(model, &(re / norm), &(im / norm));
    if dir.lambda_r < 0.0 {
        -dir.b_a / dir.lambda_r
    } else {
        f64::INFINITY
    }
}

fn refine_eta_bound(
    model: &ExpectationModel,
    beta: f64,
    mut re: DVector<f64>,
    mut im: DVector<f64>,
) -> f64 {
    let n = re.len();
    let mut best = objective_eta(model, beta, &re, &im);
    let mut step = 0.05;
    for _ in 0..200 {
        let eps = 1e-7;
        let mut grad_re = DVector::zeros(n);
        let mut grad_im = DVector::zeros(n);
        for i in 0..n {
            let mut p = re.clone();
            p[i] += eps;
            grad_re[i] = (objective_eta(model, beta, &p, &im) - best) / eps;
            let mut q = im.clone();
            q[i] += eps;
            grad_im[i] = (objective_eta(model, beta, &re, &q) - best) / eps;
        }
        let gnorm = (grad_re.norm_squared() + grad_im.norm_squared()).sqrt();
        if !gnorm.is_finite() || gnorm < 1e-14 {
            break;
        }
        let cand_re = &re + &grad_re * (step / gnorm);
        let cand_im = &im + &grad_im * (step / gnorm);
        let cand = objective_eta(model, beta, &cand_re, &cand_im);
        if cand > best && cand.is_finite() {
            let norm = (cand_re.norm_squared() + cand_im.norm_squared()).sqrt();
            re = cand_re / norm;
            im = cand_im / norm;
            best = cand;
        } else {
            step *= 0.5;
            if step < 1e-10 {
                break;
            }
        }
    }
    best
}

fn refine_beta_bound(model: &ExpectationModel, mut re: DVector<f64>, mut im: DVector<f64>) -> f64 {
    let n = re.len();
    let mut best = objective_beta(model, &re, &im);
    let mut step = 0.05;
    for _ in 0..200 {
        let eps = 1e-7;
        let mut grad_re = DVector::zeros(n);
        let mut grad_im = DVector::zeros(n);
        for i in 0..n {
            let mut p = re.clone();
            p[i] += eps;
            grad_re[i] = (objective_beta(model, &p, &im) - best) / eps;
            let mut q = im.clone();
            q[i] += eps;
            grad_im[i] = (objective_beta(model, &re, &q) - best) / eps;
        }
        let gnorm = (grad_re.norm_squared() + grad_im.norm_squared()).sqrt();
        if !gnorm.is_finite() || gnorm < 1e-14 {
            break;
        }
        // Descend: the β bound is a minimum over directions.
        let cand_re = &re - &grad_re * (step / gnorm);
        let cand_im = &im - &grad_im * (step / gnorm);
        let cand = objective_beta(model, &cand_re, &cand_im);
        if cand < best {
            let norm = (cand_re.norm_squared() + cand_im.norm_squared()).sqrt();
            re = cand_re / norm;
            im = cand_im / norm;
            best = cand;
        } else {
            step *= 0.5;
            if step < 1e-10 {
                break;
            }
        }
    }
    best
}

/// `‖(A + βI)ᵀ C_β⁻¹ (b − Aw)‖₂`: zero exactly at fixed points of the
/// regularized expected update, which coincide with TD's whenever
/// `A + βI` is full rank.
pub fn fixed_point_residual(w: &DVector<f64>, model: &ExpectationModel, beta: f64) -> f64 {
    let n = model.n_features();
    let err = model.expected_td_update(w);
    let solved = model
        .c_beta(beta)
        .lu()
        .solve(&err)
        .expect("C_beta invertible");
    let a_beta_t = model.a.transpose() + DMatrix::identity(n, n) * beta;
    (a_beta_t * solved).norm()
}

/// Rank deficiency of `A + βI`: positive values mean the regularized
/// update admits fixed points beyond TD's.
pub fn fixed_point_rank_drop(model: &ExpectationModel, beta: f64) -> usize {
    let n = model.n_features();
    let a_beta = &model.a + DMatrix::identity(n, n) * beta;
    let svd = a_beta.svd(false, false);
    let smax = svd.singular_values.max();
    let tol = smax.max(1.0) * n as f64 * f64::EPSILON * 16.0;
    n - svd.singular_values.iter().filter(|&&s| s > tol).count()
}

/// Everything the `analyze` command reports for one model and one (η, β).
///
/// When the feature matrix is overcomplete the analysis runs on the
/// row-space restriction ([`ExpectationModel::reduced`]): the dropped
/// directions are value-invisible and frozen by the updates, so the
/// reduced spectrum carries the convergence question. The count of
/// dropped dimensions is reported, and the per-direction sampled bounds
/// of the unreduced model are attached for reference.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityReport {
    pub eta: f64,
    pub beta: f64,
    pub n_features: usize,
    /// Feature dimensions dropped by the row-space restriction.
    pub reduced_features: usize,
    pub a_positive_definite: bool,
    pub h_min_eigenvalue: f64,
    pub beta_max: Option<f64>,
    pub eta_min: Option<f64>,
    /// (re, im) pairs of the analyzed stacked-system eigenvalues at (η, β).
    pub g_spectrum: Vec<(f64, f64)>,
    pub hurwitz: bool,
    /// Residual of the regularized fixed-point map at the TD fixed point;
    /// absent when `A` is singular even after reduction.
    pub fixed_point_residual: Option<f64>,
    pub a_condition_number: Option<f64>,
    pub det_g: f64,
    pub det_identity_relative_error: f64,
    /// True when the original (unreduced) C was singular.
    pub c_singular: bool,
    /// Sampled per-direction bounds on the unreduced model, present when
    /// `C` was singular.
    pub sampled_bounds: Option<SampledBounds>,
}

/// Full stability report for the supplied (η, β).
pub fn analyze(model: &ExpectationModel, eta: f64, beta: f64) -> StabilityReport {
    let (reduced, dropped) = model.reduced();
    let (g, _) = build_g(&reduced, eta, beta);
    let spectrum = g_spectrum(&g);
    let hurwitz = is_hurwitz(&spectrum);
    let (det_g, _, det_rel) = det_g_identity(&reduced, eta, beta);

    let (a_pd, h_min, beta_max, eta_min) = match theorem1_bounds(&reduced) {
        Ok(b) => (b.a_positive_definite, b.h_min_eigenvalue, b.beta_max, b.eta_min),
        Err(_) => {
            let h = (&reduced.a + reduced.a.transpose()) * 0.5;
            (false, h.symmetric_eigenvalues().min(), None, None)
        }
    };
    let sampled = if dropped > 0 {
        Some(singular_c_bounds(model, beta.max(1e-6), 100_000))
    } else {
        None
    };

    let (residual, condition) = match td_fixed_point(&reduced) {
        Ok(fp) => (
            Some(fixed_point_residual(&fp.weights, &reduced, beta)),
            Some(fp.condition_number),
        ),
        Err(_) => (None, None),
    };

    StabilityReport {
        eta,
        beta,
        n_features: model.n_features(),
        reduced_features: dropped,
        a_positive_definite: a_pd,
        h_min_eigenvalue: h_min,
        beta_max,
        eta_min,
        g_spectrum: spectrum.iter().map(|l| (l.re, l.im)).collect(),
        hurwitz,
        fixed_point_residual: residual,
        a_condition_number: condition,
        det_g,
        det_identity_relative_error: det_rel,
        c_singular: dropped > 0,
        sampled_bounds: sampled,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::PredictionEnv;
    use approx::assert_abs_diff_eq;

    /// Hand-built one-feature model with scalars A = a, b, C = c.
    fn scalar_model(a: f64, b: f64, c: f64) -> ExpectationModel {
        ExpectationModel {
            a: DMatrix::from_element(1, 1, a),
            b: DVector::from_element(1, b),
            c: DMatrix::from_element(1, 1, c),
            stationary: DVector::from_element(1, 1.0),
            gamma_cross: DMatrix::from_element(1, 1, c - a),
        }
    }

    #[test]
    fn scalar_g_matrix() {
        let model = scalar_model(0.6, 0.2, 1.1);
        let (eta, beta) = (0.8, 0.3);
        let (g, drift) = build_g(&model, eta, beta);
        assert_abs_diff_eq!(g[(0, 0)], -eta * (1.1 + beta), epsilon = 1e-15);
        assert_abs_diff_eq!(g[(0, 1)], -eta * 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(g[(1, 0)], 0.6 - 1.1, epsilon = 1e-15);
        assert_abs_diff_eq!(g[(1, 1)], -0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(drift[0], eta * 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(drift[1], 0.2, epsilon = 1e-15);
    }

    #[test]
    fn scalar_spectrum_matches_quadratic_roots() {
        // For one feature the eigenvalues solve
        // λ² + (ηβ + ηc + a)λ + η(βa + a²) = 0.
        for (a, c, eta, beta) in [
            (0.6, 1.1, 0.8, 0.3),
            (-0.4, 0.9, 2.0, 0.1),
            (0.25, 0.5, 1.0, 1.0),
        ] {
            let model = scalar_model(a, 0.0, c);
            let (g, _) = build_g(&model, eta, beta);
            let mut spec = g_spectrum(&g);
            let p = eta * beta + eta * c + a;
            let q = eta * (beta * a + a * a);
            let disc = Complex::new(p * p - 4.0 * q, 0.0).sqrt();
            let mut roots = vec![
                (Complex::new(-p, 0.0) + disc) * 0.5,
                (Complex::new(-p, 0.0) - disc) * 0.5,
            ];
            spec.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap());
            roots.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap());
            for (lhs, rhs) in spec.iter().zip(&roots) {
                assert_abs_diff_eq!(lhs.re, rhs.re, epsilon = 1e-8);
                assert_abs_diff_eq!(lhs.im.abs(), rhs.im.abs(), epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn determinant_identity_on_baird() {
        // On the raw star model A is singular (overcomplete features), so
        // both sides of the identity are zero at noise level; the reduced
        // model exercises the identity with non-trivial values.
        let env = PredictionEnv::by_name("baird").unwrap();
        for (eta, beta) in [(1.0, 1.0), (0.5, 0.2), (3.0, 0.7)] {
            let (_, _, rel) = det_g_identity(&env.model, eta, beta);
            assert!(rel < 1e-8, "raw model: rel {rel} at eta={eta}, beta={beta}");
            let (reduced, dropped) = env.model.reduced();
            assert_eq!(dropped, 1);
            let (det_g, predicted, rel) = det_g_identity(&reduced, eta, beta);
            assert!(det_g.abs() > 1e-12, "reduced det should be nonzero");
            assert!(
                rel < 1e-8,
                "reduced model: det {det_g} vs {predicted}, rel {rel}"
            );
        }
    }

    #[test]
    fn baird_bounds_are_positive_and_finite() {
        let env = PredictionEnv::by_name("baird").unwrap();
        // The raw model has singular C and is refused.
        assert!(theorem1_bounds(&env.model).is_err());
        let (reduced, _) = env.model.reduced();
        let bounds = theorem1_bounds(&reduced).unwrap();
        assert!(!bounds.a_positive_definite);
        let beta_max = bounds.beta_max.unwrap();
        let eta_min = bounds.eta_min.unwrap();
        assert!(beta_max > 0.0 && beta_max.is_finite(), "beta_max {beta_max}");
        assert!(eta_min > 0.0 && eta_min.is_finite(), "eta_min {eta_min}");
    }

    #[test]
    fn on_policy_walk_satisfies_condition_one() {
        let env = PredictionEnv::by_name("randomwalk-tabular").unwrap();
        let bounds = theorem1_bounds(&env.model).unwrap();
        assert!(bounds.a_positive_definite);
        assert!(bounds.beta_max.is_none() && bounds.eta_min.is_none());
    }

    #[test]
    fn baird_default_configuration_is_hurwitz() {
        let env = PredictionEnv::by_name("baird").unwrap();
        let (reduced, _) = env.model.reduced();
        let (g, _) = build_g(&reduced, 1.0, 1.0);
        assert!(is_hurwitz(&g_spectrum(&g)));
        // The unreduced system carries exactly one structural zero mode,
        // the value-invisible weight direction.
        let (g_full, _) = build_g(&env.model, 1.0, 1.0);
        let full = g_spectrum(&g_full);
        let zeros = full.iter().filter(|l| l.norm() < 1e-8).count();
        assert_eq!(zeros, 1);
        assert_eq!(full.iter().filter(|l| l.re < HURWITZ_TOL).count(), 15);
    }

    #[test]
    fn fixed_point_residual_behaviour() {
        let env = PredictionEnv::by_name("randomwalk-inverted").unwrap();
        let fp = td_fixed_point(&env.model).unwrap();
        assert!(fixed_point_residual(&fp.weights, &env.model, 1.0) <= 1e-10);
        let off = &fp.weights + DVector::from_element(5, 0.3);
        assert!(fixed_point_residual(&off, &env.model, 1.0) > 1e-6);
        assert_eq!(fixed_point_rank_drop(&env.model, 1.0), 0);
    }

    #[test]
    fn engineered_spectrum_admits_non_td_fixed_points() {
        // A has eigenvalue −0.5; choosing β = 0.5 makes A + βI singular, so
        // directions u ∈ null(A_βᵀ) generate fixed points w ≠ w* with zero
        // residual.
        let a = DMatrix::from_row_slice(2, 2, &[-0.5, 0.0, 0.0, 1.0]);
        let model = ExpectationModel {
            a: a.clone(),
            b: DVector::from_vec(vec![0.3, -0.2]),
            c: DMatrix::identity(2, 2),
            stationary: DVector::from_vec(vec![0.5, 0.5]),
            gamma_cross: DMatrix::identity(2, 2) - a.transpose(),
        };
        let beta = 0.5;
        assert_eq!(fixed_point_rank_drop(&model, beta), 1);

        let w_star = td_fixed_point(&model).unwrap().weights;
        assert!(fixed_point_residual(&w_star, &model, beta) <= 1e-10);

        // u = e1 spans null(A_βᵀ); w = A⁻¹(b − C_β u) is a non-TD fixed point.
        let u = DVector::from_vec(vec![1.0, 0.0]);
        let rhs = &model.b - model.c_beta(beta) * &u;
        let w_other = model.a.clone().lu().solve(&rhs).unwrap();
        assert!((&w_other - &w_star).norm() > 0.5);
        assert!(fixed_point_residual(&w_other, &model, beta) <= 1e-10);
    }

    #[test]
    fn sampled_bounds_on_rank_deficient_c() {
        // Duplicating a feature column of the star model keeps C singular
        // and A indefinite; the theorem route refuses while the sampled
        // bounds return finite positive estimates for β inside the
        // estimated admissible range.
        use crate::mdp::{expectation_matrices, FeatureMap};
        let (mdp, features, behavior, target, _) = crate::env::make_baird().unwrap();
        let mut phi = DMatrix::zeros(7, 9);
        phi.view_mut((0, 0), (7, 8)).copy_from(&features.matrix);
        for s in 0..7 {
            phi[(s, 8)] = phi[(s, 0)];
        }
        let doubled = FeatureMap::new(phi).unwrap();
        let model = expectation_matrices(&mdp, &behavior, &target, &doubled).unwrap();
        assert!(theorem1_bounds(&model).is_err());

        let probe = singular_c_bounds(&model, 1e-3, 20_000);
        let beta_max = probe.beta_max_estimate.unwrap();
        assert!(beta_max > 0.0, "beta bound {beta_max}");

        let bounds = singular_c_bounds(&model, beta_max / 2.0, 20_000);
        let eta = bounds.eta_min_estimate.unwrap();
        assert!(eta > 0.0 && eta.is_finite(), "eta bound {eta}");
    }

    #[test]
    fn symmetric_a_eta_bound_collapses_to_ratio_form() {
        // With A symmetric every direction has λ_c = 0 and the η bound
        // reduces to −λ_r/β, maximized at λ_min(A).
        let a = DMatrix::from_row_slice(2, 2, &[-0.3, 0.1, 0.1, 0.8]);
        let model = ExpectationModel {
            a: a.clone(),
            b: DVector::zeros(2),
            c: DMatrix::identity(2, 2) * 0.5,
            stationary: DVector::from_vec(vec![0.5, 0.5]),
            gamma_cross: DMatrix::identity(2, 2) * 0.5 - a.transpose(),
        };
        let beta = 0.25;
        let bounds = singular_c_bounds(&model, beta, 50_000);
        let lambda_min = model.a.symmetric_eigenvalues().min();
        let expected = -lambda_min / beta;
        let got = bounds.eta_min_estimate.unwrap();
        assert!(
            (got - expected).abs() / expected < 0.02,
            "eta bound {got} vs ratio form {expected}"
        );
    }

    #[test]
    fn positive_definite_c_still_runs_sampled_bounds() {
        let env = PredictionEnv::by_name("randomwalk-tabular").unwrap();
        let bounds = singular_c_bounds(&env.model, 1.0, 5_000);
        assert_eq!(bounds.n_samples, 5_000);
    }

    #[test]
    fn analyze_produces_a_full_report() {
        let env = PredictionEnv::by_name("baird").unwrap();
        let report = analyze(&env.model, 1.0, 1.0);
        assert!(report.hurwitz);
        assert!(!report.a_positive_definite);
        assert_eq!(report.reduced_features, 1);
        assert!(report.c_singular);
        assert!(report.beta_max.unwrap() > 0.0);
        assert!(report.eta_min.unwrap() > 0.0);
        assert_eq!(report.g_spectrum.len(), 14);
        assert!(report.fixed_point_residual.unwrap() <= 1e-10);
        assert!(report.det_identity_relative_error < 1e-8);
        assert!(report.sampled_bounds.is_some());
    }
}
