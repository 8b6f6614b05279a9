//! Five-state random walk with tabular, inverted, and dependent features.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mdp::{FeatureMap, MdpSpec, Policy, Tensor3};

pub const LEFT: usize = 0;
pub const RIGHT: usize = 1;

/// Feature constructions for the walk, mirroring the classic benchmark
/// trio: unit basis vectors, rows with zero at the own state and equal
/// mass elsewhere, and a three-dimensional overlapping scheme. The
/// inverted and dependent rows are normalized to unit Euclidean norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureScheme {
    Tabular,
    Inverted,
    Dependent,
}

impl FeatureScheme {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "tabular" => Ok(FeatureScheme::Tabular),
            "inverted" => Ok(FeatureScheme::Inverted),
            "dependent" => Ok(FeatureScheme::Dependent),
            other => Err(Error::UnknownName(format!("feature scheme {other}"))),
        }
    }

    fn matrix(self) -> DMatrix<f64> {
        match self {
            FeatureScheme::Tabular => DMatrix::identity(5, 5),
            FeatureScheme::Inverted => {
                DMatrix::from_fn(5, 5, |s, j| if s == j { 0.0 } else { 0.5 })
            }
            FeatureScheme::Dependent => {
                let rows: [&[f64]; 5] = [
                    &[1.0, 0.0, 0.0],
                    &[1.0, 1.0, 0.0],
                    &[1.0, 1.0, 1.0],
                    &[0.0, 1.0, 1.0],
                    &[0.0, 0.0, 1.0],
                ];
                DMatrix::from_fn(5, 3, |s, j| {
                    let norm = rows[s].iter().map(|v| v * v).sum::<f64>().sqrt();
                    rows[s][j] / norm
                })
            }
        }
    }
}

/// Five states in a line, episode ending off both ends: reward +1 on the
/// right termination, 0 on the left, γ = 1 internally and 0 on the
/// terminating transitions, which restart the walk at the center state.
/// Behavior is uniform; the target takes the right action 60% of the time.
pub fn make_random_walk(
    scheme: FeatureScheme,
) -> Result<(MdpSpec, FeatureMap, Policy, Policy, DVector<f64>)> {
    let n = 5;
    let start_state = 2;
    let mut p = Tensor3::zeros(n, 2);
    let mut r = Tensor3::zeros(n, 2);
    let mut g = Tensor3::zeros(n, 2);

    for s in 0..n {
        if s == 0 {
            p.set(s, LEFT, start_state, 1.0);
        } else {
            p.set(s, LEFT, s - 1, 1.0);
            g.set(s, LEFT, s - 1, 1.0);
        }
        if s == n - 1 {
            p.set(s, RIGHT, start_state, 1.0);
            r.set(s, RIGHT, start_state, 1.0);
        } else {
            p.set(s, RIGHT, s + 1, 1.0);
            g.set(s, RIGHT, s + 1, 1.0);
        }
    }

    let mut start = DVector::zeros(n);
    start[start_state] = 1.0;
    let mdp = MdpSpec::new(n, 2, p, r, g, start)?;

    let features = FeatureMap::new(scheme.matrix())?;
    let behavior = Policy::uniform_rows(n, &[0.5, 0.5])?;
    let target = Policy::uniform_rows(n, &[0.4, 0.6])?;
    let init = DVector::zeros(features.n_features());

    Ok((mdp, features, behavior, target, init))
}
