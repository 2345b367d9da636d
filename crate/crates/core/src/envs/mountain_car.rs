use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_action, Environment, Transition};
use crate::error::{NcpError, Result};

pub const MIN_POSITION: f64 = -1.2;
pub const MAX_POSITION: f64 = 0.6;
pub const MAX_SPEED: f64 = 0.07;
pub const GOAL_POSITION: f64 = 0.45;
pub const POWER: f64 = 0.0015;
pub const GRAVITY: f64 = 0.0025;
pub const GOAL_REWARD: f64 = 100.0;
pub const FORCE_COST: f64 = 0.1;
pub const MAX_STEPS: usize = 999;

/// Continuous mountain car: an underpowered car in a valley must build momentum
/// to reach the hilltop at `x = 0.45`.
#[derive(Debug, Clone)]
pub struct MountainCar {
    pub position: f64,
    pub velocity: f64,
    steps: usize,
    done: bool,
}

impl Default for MountainCar {
    fn default() -> Self {
        Self::new()
    }
}

impl MountainCar {
    pub fn new() -> Self {
        MountainCar {
            position: -0.5,
            velocity: 0.0,
            steps: 0,
            done: false,
        }
    }

    pub fn reset_to(&mut self, position: f64, velocity: f64) -> Vec<f64> {
        self.position = position;
        self.velocity = velocity;
        self.steps = 0;
        self.done = false;
        self.observation()
    }

    fn observation(&self) -> Vec<f64> {
        vec![self.position, self.velocity]
    }
}

impl Environment for MountainCar {
    fn name(&self) -> &'static str {
        "mountaincar"
    }

    fn obs_dim(&self) -> usize {
        2
    }

    fn action_ranges(&self) -> Vec<[f64; 2]> {
        vec![[-1.0, 1.0]]
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.reset_to(rng.gen_range(-0.6..-0.4), 0.0)
    }

    fn step(&mut self, action: &[f64]) -> Result<Transition> {
        if self.done {
            return Err(NcpError::EpisodeFinished);
        }
        check_action(action, &self.action_ranges())?;
        let force = action[0].clamp(-1.0, 1.0);

        self.velocity += force * POWER - GRAVITY * (3.0 * self.position).cos();
        self.velocity = self.velocity.clamp(-MAX_SPEED, MAX_SPEED);
        self.position += self.velocity;
        self.position = self.position.clamp(MIN_POSITION, MAX_POSITION);
        if self.position == MIN_POSITION && self.velocity < 0.0 {
            self.velocity = 0.0;
        }
        self.steps += 1;

        let reached = self.position >= GOAL_POSITION;
        let mut reward = -FORCE_COST * force * force;
        if reached {
            reward += GOAL_REWARD;
        }
        self.done = reached || self.steps >= MAX_STEPS;
        Ok(Transition {
            observation: self.observation(),
            reward,
            done: self.done,
        })
    }

    fn pose(&self) -> Option<(f64, f64)> {
        Some((self.position, (3.0 * self.position).sin()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_step_from_rest() {
        let mut env = MountainCar::new();
        env.reset_to(-0.5, 0.0);
        let t = env.step(&[0.0]).unwrap();
        let expected_v = -0.0025 * (-1.5f64).cos();
        assert!((env.velocity - expected_v).abs() < 1e-15);
        assert!((t.observation[0] - (-0.5 + expected_v)).abs() < 1e-15);
        assert_eq!(t.reward, 0.0);
        assert!(!t.done);
    }

    #[test]
    fn reaching_goal_pays_bonus() {
        let mut env = MountainCar::new();
        env.reset_to(0.44, 0.05);
        let t = env.step(&[1.0]).unwrap();
        assert!(t.done);
        assert!((t.reward - (100.0 - 0.1)).abs() < 1e-12);
        assert!(matches!(env.step(&[0.0]), Err(NcpError::EpisodeFinished)));
    }

    #[test]
    fn action_is_clipped_and_checked() {
        let mut a = MountainCar::new();
        let mut b = MountainCar::new();
        a.reset(3);
        b.reset(3);
        let ta = a.step(&[5.0]).unwrap();
        let tb = b.step(&[1.0]).unwrap();
        assert_eq!(ta, tb);
        assert!(a.step(&[0.0, 1.0]).is_err());
        assert!(a.step(&[f64::NAN]).is_err());
    }

    #[test]
    fn left_wall_stops_car() {
        let mut env = MountainCar::new();
        env.reset_to(-1.19, -0.07);
        env.step(&[-1.0]).unwrap();
        assert_eq!(env.position, MIN_POSITION);
        assert_eq!(env.velocity, 0.0);
    }

    #[test]
    fn episode_truncates() {
        let mut env = MountainCar::new();
        env.reset(0);
        let mut steps = 0;
        loop {
            steps += 1;
            if env.step(&[0.0]).unwrap().done {
                break;
            }
        }
        assert_eq!(steps, MAX_STEPS);
    }
}
