use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_action, Environment, Transition};
use crate::error::{NcpError, Result};

pub const GRAVITY: f64 = 9.8;
pub const CART_MASS: f64 = 1.0;
pub const POLE_MASS: f64 = 0.1;
/// Half the pole length.
pub const POLE_HALF_LENGTH: f64 = 0.5;
pub const TAU: f64 = 0.02;
pub const FORCE_MAX: f64 = 10.0;
pub const ANGLE_LIMIT: f64 = 0.2;
pub const POSITION_LIMIT: f64 = 1.0;
pub const MAX_STEPS: usize = 1000;
/// Half-width of the uniform reset perturbation on every state entry.
pub const RESET_NOISE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CartPoleState {
    pub x: f64,
    pub x_dot: f64,
    pub theta: f64,
    pub theta_dot: f64,
}

impl CartPoleState {
    /// Angular and linear accelerations under a horizontal force on the cart.
    pub fn accelerations(&self, force: f64) -> (f64, f64) {
        let total = CART_MASS + POLE_MASS;
        let pml = POLE_MASS * POLE_HALF_LENGTH;
        let (sin, cos) = self.theta.sin_cos();
        let temp = (force + pml * self.theta_dot * self.theta_dot * sin) / total;
        let theta_acc =
            (GRAVITY * sin - cos * temp) / (POLE_HALF_LENGTH * (4.0 / 3.0 - POLE_MASS * cos * cos / total));
        let x_acc = temp - pml * theta_acc * cos / total;
        (x_acc, theta_acc)
    }

    pub fn within_limits(&self) -> bool {
        self.theta.abs() < ANGLE_LIMIT && self.x.abs() < POSITION_LIMIT
    }
}

/// Cart-pole balancing with a continuous horizontal force, semi-implicit Euler at 50 Hz.
#[derive(Debug, Clone, Default)]
pub struct InvertedPendulum {
    pub state: CartPoleState,
    steps: usize,
    done: bool,
}

impl InvertedPendulum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn reset_to(&mut self, state: CartPoleState) -> Vec<f64> {
        self.state = state;
        self.steps = 0;
        self.done = false;
        self.observation()
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    fn observation(&self) -> Vec<f64> {
        let s = self.state;
        vec![s.x, s.x_dot, s.theta, s.theta_dot]
    }
}

impl Environment for InvertedPendulum {
    fn name(&self) -> &'static str {
        "pendulum"
    }

    fn obs_dim(&self) -> usize {
        4
    }

    fn action_ranges(&self) -> Vec<[f64; 2]> {
        vec![[-FORCE_MAX, FORCE_MAX]]
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || rng.gen_range(-RESET_NOISE..RESET_NOISE);
        self.reset_to(CartPoleState {
            x: draw(),
            x_dot: draw(),
            theta: draw(),
            theta_dot: draw(),
        })
    }

    fn step(&mut self, action: &[f64]) -> Result<Transition> {
        if self.done {
            return Err(NcpError::EpisodeFinished);
        }
        check_action(action, &self.action_ranges())?;
        let force = action[0].clamp(-FORCE_MAX, FORCE_MAX);
        let (x_acc, theta_acc) = self.state.accelerations(force);
        let s = &mut self.state;
        s.x_dot += TAU * x_acc;
        s.x += TAU * s.x_dot;
        s.theta_dot += TAU * theta_acc;
        s.theta += TAU * s.theta_dot;
        self.steps += 1;

        let alive = self.state.within_limits();
        self.done = !alive || self.steps >= MAX_STEPS;
        Ok(Transition {
            observation: self.observation(),
            reward: if alive { 1.0 } else { 0.0 },
            done: self.done,
        })
    }

    /// Angle and cart position, in that order.
    fn sensor_channels(&self) -> Vec<usize> {
        vec![2, 0]
    }

    fn pose(&self) -> Option<(f64, f64)> {
        Some((self.state.x, self.state.theta))
    }
}
