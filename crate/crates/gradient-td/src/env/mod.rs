//! Benchmark problems: Boyan's chain, the Baird star counterexample, the
//! five-state random walk with three feature sets, and tile-coded Mountain
//! Car for control.

mod baird;
mod boyan;
pub mod mountain_car;
mod random_walk;
mod tile;

pub use baird::make_baird;
pub use boyan::make_boyan;
pub use mountain_car::MountainCar;
pub use random_walk::{make_random_walk, FeatureScheme};
pub use tile::{mountain_car_tiles, tile_code, TileCoderConfig};

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::mdp::{expectation_matrices, ExpectationModel, FeatureMap, MdpSpec, Policy};
use crate::rng::CounterRng;

/// One sampled step of experience, the unit every learning update consumes.
#[derive(Debug, Clone)]
pub struct Transition {
    /// Features of the departed state.
    pub x: DVector<f64>,
    /// Index of the taken action (meaningful for control).
    pub action: usize,
    pub reward: f64,
    /// Features of the landed state. On termination the stream already
    /// points at the restart state; `gamma_next = 0` removes it from every
    /// bootstrap term, so the two conventions coincide algebraically.
    pub x_next: DVector<f64>,
    /// Importance ratio π(a|s)/b(a|s); one on-policy.
    pub rho: f64,
    /// Discount carried by this transition; zero marks termination.
    pub gamma_next: f64,
}

impl Transition {
    pub fn check_invariants(&self) -> Result<()> {
        if self.rho < 0.0 {
            return Err(Error::InvalidModel(format!("rho = {} < 0", self.rho)));
        }
        if !(0.0..=1.0).contains(&self.gamma_next) {
            return Err(Error::InvalidModel(format!(
                "gamma_next = {} out of [0,1]",
                self.gamma_next
            )));
        }
        if self.x.len() != self.x_next.len() {
            return Err(Error::DimensionMismatch(format!(
                "x has {} entries, x_next has {}",
                self.x.len(),
                self.x_next.len()
            )));
        }
        Ok(())
    }
}

/// A prediction benchmark bundled with its exact expectation model.
#[derive(Debug, Clone)]
pub struct PredictionEnv {
    pub name: String,
    pub mdp: MdpSpec,
    pub features: FeatureMap,
    pub behavior: Policy,
    pub target: Policy,
    /// Primary-weight initialization the benchmark is conventionally run
    /// with (zeros everywhere except Baird).
    pub initial_weights: DVector<f64>,
    pub model: ExpectationModel,
}

impl PredictionEnv {
    pub fn from_parts(
        name: &str,
        mdp: MdpSpec,
        features: FeatureMap,
        behavior: Policy,
        target: Policy,
        initial_weights: DVector<f64>,
    ) -> Result<Self> {
        let model = expectation_matrices(&mdp, &behavior, &target, &features)?;
        Ok(PredictionEnv {
            name: name.to_string(),
            mdp,
            features,
            behavior,
            target,
            initial_weights,
            model,
        })
    }

    /// Look up a benchmark by its CLI-addressable name.
    pub fn by_name(name: &str) -> Result<Self> {
        Self::by_name_scaled(name, 1.0)
    }

    /// Same, with every reward multiplied by `scale` (the reward-scale
    /// protocol; only terminal rewards are nonzero in the random walks).
    pub fn by_name_scaled(name: &str, scale: f64) -> Result<Self> {
        let (mdp, features, behavior, target, init) = match name {
            "boyan" => make_boyan()?,
            "baird" => make_baird()?,
            "randomwalk-tabular" => make_random_walk(FeatureScheme::Tabular)?,
            "randomwalk-inverted" => make_random_walk(FeatureScheme::Inverted)?,
            "randomwalk-dependent" => make_random_walk(FeatureScheme::Dependent)?,
            other => return Err(Error::UnknownName(other.to_string())),
        };
        let mdp = if scale != 1.0 {
            scale_rewards(mdp, scale)
        } else {
            mdp
        };
        Self::from_parts(name, mdp, features, behavior, target, init)
    }

    pub fn prediction_names() -> &'static [&'static str] {
        &[
            "boyan",
            "baird",
            "randomwalk-tabular",
            "randomwalk-inverted",
            "randomwalk-dependent",
        ]
    }

    pub fn n_features(&self) -> usize {
        self.features.n_features()
    }

    /// On-policy benchmarks emit ρ ≡ 1.
    pub fn on_policy(&self) -> bool {
        self.behavior.probs == self.target.probs
    }

    /// Online stream of transitions starting from the start distribution.
    pub fn stream(&self, rng: CounterRng) -> TransitionStream<'_> {
        TransitionStream::new(self, rng)
    }

    /// One independent transition with the state drawn from the behavior
    /// stationary distribution (the batch protocol's sampling model).
    pub fn sample_stationary(&self, rng: &mut CounterRng) -> Transition {
        let d = &self.model.stationary;
        let s = rng.next_weighted(d.as_slice());
        self.sample_from(s, rng)
    }

    fn sample_from(&self, s: usize, rng: &mut CounterRng) -> Transition {
        let behavior_row: Vec<f64> = self.behavior.probs.row(s).iter().cloned().collect();
        let a = rng.next_weighted(&behavior_row);
        let probs: Vec<f64> = (0..self.mdp.n_states)
            .map(|s2| self.mdp.transition.get(s, a, s2))
            .collect();
        let s2 = rng.next_weighted(&probs);
        Transition {
            x: self.features.row(s),
            action: a,
            reward: self.mdp.reward.get(s, a, s2),
            x_next: self.features.row(s2),
            rho: self.target.prob(s, a) / self.behavior.prob(s, a),
            gamma_next: self.mdp.discount.get(s, a, s2),
        }
    }
}

fn scale_rewards(mut mdp: MdpSpec, scale: f64) -> MdpSpec {
    for s in 0..mdp.n_states {
        for a in 0..mdp.n_actions {
            for s2 in 0..mdp.n_states {
                let r = mdp.reward.get(s, a, s2);
                if r != 0.0 {
                    mdp.reward.set(s, a, s2, r * scale);
                }
            }
        }
    }
    mdp
}

/// Stateful behavior-policy rollout over a prediction benchmark.
pub struct TransitionStream<'a> {
    env: &'a PredictionEnv,
    rng: CounterRng,
    state: usize,
}

impl<'a> TransitionStream<'a> {
    fn new(env: &'a PredictionEnv, mut rng: CounterRng) -> Self {
        let state = rng.next_weighted(env.mdp.start_dist.as_slice());
        TransitionStream { env, rng, state }
    }

    pub fn next_transition(&mut self) -> Transition {
        let tr = {
            let env = self.env;
            let s = self.state;
            let behavior_row: Vec<f64> = env.behavior.probs.row(s).iter().cloned().collect();
            let a = self.rng.next_weighted(&behavior_row);
            let probs: Vec<f64> = (0..env.mdp.n_states)
                .map(|s2| env.mdp.transition.get(s, a, s2))
                .collect();
            let s2 = self.rng.next_weighted(&probs);
            self.state = s2;
            Transition {
                x: env.features.row(s),
                action: a,
                reward: env.mdp.reward.get(s, a, s2),
                x_next: env.features.row(s2),
                rho: env.target.prob(s, a) / env.behavior.prob(s, a),
                gamma_next: env.mdp.discount.get(s, a, s2),
            }
        };
        tr
    }
}
