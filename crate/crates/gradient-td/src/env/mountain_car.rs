//! Mountain Car with the standard underpowered-car dynamics.

use crate::rng::CounterRng;

pub const POSITION_MIN: f64 = -1.2;
pub const POSITION_MAX: f64 = 0.5;
pub const VELOCITY_MIN: f64 = -0.07;
pub const VELOCITY_MAX: f64 = 0.07;
pub const GOAL_POSITION: f64 = 0.5;

pub const REVERSE: usize = 0;
pub const COAST: usize = 1;
pub const FORWARD: usize = 2;

/// Continuous car state. Reward is −1 per step until the position reaches
/// the goal; the left wall is inelastic.
#[derive(Debug, Clone, Copy)]
pub struct MountainCar {
    pub position: f64,
    pub velocity: f64,
}

impl MountainCar {
    /// Start at rest, position uniform in [−0.6, −0.4).
    pub fn reset(rng: &mut CounterRng) -> Self {
        MountainCar {
            position: rng.next_range(-0.6, -0.4),
            velocity: 0.0,
        }
    }

    pub fn state(&self) -> [f64; 2] {
        [self.position, self.velocity]
    }

    /// Advance one step under `action ∈ {reverse, coast, forward}`,
    /// returning the reward and whether the goal was reached.
    pub fn step(&mut self, action: usize) -> (f64, bool) {
        debug_assert!(action < 3);
        let throttle = action as f64 - 1.0;
        self.velocity += 0.001 * throttle - 0.0025 * (3.0 * self.position).cos();
        self.velocity = self.velocity.clamp(VELOCITY_MIN, VELOCITY_MAX);
        self.position += self.velocity;
        if self.position <= POSITION_MIN {
            self.position = POSITION_MIN;
            self.velocity = 0.0;
        }
        let terminated = self.position >= GOAL_POSITION;
        (-1.0, terminated)
    }
}
