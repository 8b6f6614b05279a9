//! The Baird star counterexample: the canonical off-policy divergence MDP.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::mdp::{FeatureMap, MdpSpec, Policy, Tensor3};

pub const DASHED: usize = 0;
pub const SOLID: usize = 1;

/// Seven states, eight features, two actions. The dashed action jumps
/// uniformly to one of the six outer states, the solid action always enters
/// the hub (state 6). Behavior takes dashed with probability 6/7; the
/// target always takes solid, so ρ ∈ {0, 7}. All rewards are zero and
/// γ = 0.99 everywhere, making `w = 0` the TD fixed point while the
/// feature overparameterization leaves `A` indefinite.
///
/// Weights start at one everywhere except the shared eighth component,
/// which starts at ten; the init is returned so callers can configure
/// alternates.
pub fn make_baird() -> Result<(MdpSpec, FeatureMap, Policy, Policy, DVector<f64>)> {
    let n = 7;
    let mut p = Tensor3::zeros(n, 2);
    let r = Tensor3::zeros(n, 2);
    let g = Tensor3::filled(n, 2, 0.99);

    for s in 0..n {
        for outer in 0..6 {
            p.set(s, DASHED, outer, 1.0 / 6.0);
        }
        p.set(s, SOLID, 6, 1.0);
    }

    let start = DVector::from_element(n, 1.0 / n as f64);
    let mdp = MdpSpec::new(n, 2, p, r, g, start)?;

    let mut phi = DMatrix::zeros(7, 8);
    for outer in 0..6 {
        phi[(outer, outer)] = 2.0;
        phi[(outer, 7)] = 1.0;
    }
    phi[(6, 6)] = 1.0;
    phi[(6, 7)] = 2.0;
    let features = FeatureMap::new(phi)?;

    let behavior = Policy::uniform_rows(n, &[6.0 / 7.0, 1.0 / 7.0])?;
    let target = Policy::uniform_rows(n, &[0.0, 1.0])?;

    let mut init = DVector::from_element(8, 1.0);
    init[7] = 10.0;

    Ok((mdp, features, behavior, target, init))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::{expectation_matrices, stationary_distribution, td_fixed_point};
    use approx::assert_abs_diff_eq;

    #[test]
    fn importance_ratios() {
        let (_, _, behavior, target, _) = make_baird().unwrap();
        let rho_solid = target.prob(0, SOLID) / behavior.prob(0, SOLID);
        let rho_dashed = target.prob(0, DASHED) / behavior.prob(0, DASHED);
        assert_abs_diff_eq!(rho_solid, 7.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rho_dashed, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn stationary_distribution_is_uniform() {
        // Power-iteration oracle on the 7x7 behavior chain.
        let (mdp, _, behavior, _, _) = make_baird().unwrap();
        let chain = mdp.restart_chain(&behavior);
        let mut d = DVector::from_element(7, 1.0 / 7.0);
        for _ in 0..10_000 {
            d = chain.transpose() * &d;
        }
        let solved = stationary_distribution(&mdp, &behavior).unwrap();
        for s in 0..7 {
            assert_abs_diff_eq!(solved[s], d[s], epsilon = 1e-12);
            assert_abs_diff_eq!(solved[s], 1.0 / 7.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn a_matrix_is_not_positive_definite() {
        let (mdp, features, behavior, target, _) = make_baird().unwrap();
        let model = expectation_matrices(&mdp, &behavior, &target, &features).unwrap();
        let sym = (&model.a + model.a.transpose()) * 0.5;
        let eigs = sym.symmetric_eigenvalues();
        let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min < 0.0, "min eigenvalue of (A+A')/2 is {min}");
    }

    #[test]
    fn zero_weights_are_the_fixed_point() {
        let (mdp, features, behavior, target, _) = make_baird().unwrap();
        let model = expectation_matrices(&mdp, &behavior, &target, &features).unwrap();
        // All rewards are zero, so E[δx] vanishes at w = 0.
        assert_eq!(model.b, DVector::zeros(8));
        assert!(model.expected_td_update(&DVector::zeros(8)).amax() <= 1e-15);
        // The raw A is rank 7 of 8 (overcomplete features): the direct
        // solve reports the singularity with its null direction, which is
        // exactly the value-invisible weight direction.
        match td_fixed_point(&model) {
            Err(crate::error::Error::SingularSystem { rank, dim, nullspace }) => {
                assert_eq!((rank, dim), (7, 8));
                assert_eq!(nullspace.len(), 1);
                let phi_null = &features.matrix * &nullspace[0];
                assert!(phi_null.amax() < 1e-10);
            }
            other => panic!("expected a singular system, got {other:?}"),
        }
        // On the row-space restriction the fixed point exists and is zero.
        let (reduced, dropped) = model.reduced();
        assert_eq!(dropped, 1);
        let fp = td_fixed_point(&reduced).unwrap();
        assert!(fp.weights.amax() <= 1e-12);
    }
}
