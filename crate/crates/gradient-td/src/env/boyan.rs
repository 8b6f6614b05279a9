//! Boyan's chain: a 13-state episodic chain with compact interpolating
//! features under which the true values are exactly representable.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::mdp::{FeatureMap, MdpSpec, Policy, Tensor3};

/// States are indexed by distance to the end: the walk starts at state 12
/// and drifts toward state 0, skipping one or two states with equal
/// probability at reward −3 per step (−2 on the final step into state 0).
/// From state 0 the chain restarts at state 12 with `γ = 0`, which encodes
/// episode termination. The true values are `v(s) = −2s`.
///
/// Features follow the classic construction: states 12, 8, 4, 0 are unit
/// corners and intermediate states interpolate linearly between the two
/// adjacent corners, so every row is a convex combination.
pub fn make_boyan() -> Result<(MdpSpec, FeatureMap, Policy, Policy, DVector<f64>)> {
    let n = 13;
    let mut p = Tensor3::zeros(n, 1);
    let mut r = Tensor3::zeros(n, 1);
    let mut g = Tensor3::zeros(n, 1);

    for s in 2..n {
        p.set(s, 0, s - 1, 0.5);
        p.set(s, 0, s - 2, 0.5);
        r.set(s, 0, s - 1, -3.0);
        r.set(s, 0, s - 2, -3.0);
        g.set(s, 0, s - 1, 1.0);
        g.set(s, 0, s - 2, 1.0);
    }
    p.set(1, 0, 0, 1.0);
    r.set(1, 0, 0, -2.0);
    g.set(1, 0, 0, 1.0);
    // Restart transition: episode over, discount zero.
    p.set(0, 0, 12, 1.0);

    let mut start = DVector::zeros(n);
    start[12] = 1.0;

    let mdp = MdpSpec::new(n, 1, p, r, g, start)?;
    let features = FeatureMap::new(boyan_features())?;
    let policy = Policy::uniform_rows(n, &[1.0])?;

    let init = DVector::zeros(4);
    Ok((mdp, features, policy.clone(), policy, init))
}

fn boyan_features() -> DMatrix<f64> {
    // Corners at states 12, 8, 4, 0 mapping to unit vectors e1..e4.
    DMatrix::from_fn(13, 4, |s, j| {
        let corner = 12.0 - 4.0 * j as f64;
        let dist = (s as f64 - corner).abs();
        if dist < 4.0 {
            1.0 - dist / 4.0
        } else {
            0.0
        }
    })
}
