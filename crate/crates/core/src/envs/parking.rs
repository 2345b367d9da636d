use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{check_action, Environment, Transition};
use crate::error::{NcpError, Result};

pub const V_MAX: f64 = 0.2;
pub const W_MAX: f64 = 0.3;
pub const X_RANGE: f64 = 4.0;
pub const Y_RANGE: f64 = 3.0;
pub const HEADING_RANGE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub x: f64,
    pub y: f64,
    /// Step index (1-based) at which the distance to this checkpoint is scored.
    pub deadline: usize,
}

/// Checkpoints with deadlines along a parking trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParkingCourse {
    pub checkpoints: Vec<Checkpoint>,
    pub episode_length: usize,
    pub dt: f64,
}

impl Default for ParkingCourse {
    /// Forward, left, forward, right, forward, stop; one checkpoint every 100 steps.
    fn default() -> Self {
        let points = [(1.0, 0.0), (1.6, 0.6), (1.6, 1.6), (2.2, 2.2), (3.2, 2.2), (3.2, 2.2)];
        ParkingCourse {
            checkpoints: points
                .iter()
                .enumerate()
                .map(|(i, &(x, y))| Checkpoint {
                    x,
                    y,
                    deadline: 100 * (i + 1),
                })
                .collect(),
            episode_length: 600,
            dt: 0.1,
        }
    }
}

impl ParkingCourse {
    pub fn validate(&self) -> Result<()> {
        if self.checkpoints.is_empty() {
            return Err(NcpError::Env("course has no checkpoints".into()));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(NcpError::Env(format!("course dt must be positive, got {}", self.dt)));
        }
        let deadlines: Vec<usize> = self.checkpoints.iter().map(|c| c.deadline).collect();
        if deadlines[0] == 0 || deadlines.windows(2).any(|w| w[0] >= w[1]) {
            return Err(NcpError::Env(format!("deadlines must be positive and strictly increasing: {deadlines:?}")));
        }
        if *deadlines.last().unwrap() > self.episode_length {
            return Err(NcpError::Env("last deadline exceeds the episode length".into()));
        }
        if self.checkpoints.iter().any(|c| !(c.x.is_finite() && c.y.is_finite())) {
            return Err(NcpError::Env("checkpoint coordinates must be finite".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let course: ParkingCourse = serde_json::from_str(text)?;
        course.validate()?;
        Ok(course)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("course serialization is infallible")
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        let mut c = self.clone();
        for p in &mut c.checkpoints {
            p.x += dx;
            p.y += dy;
        }
        c
    }
}

/// Deterministic unicycle rover scored at checkpoint deadlines.
#[derive(Debug, Clone)]
pub struct ParkingEnv {
    course: ParkingCourse,
    start: (f64, f64, f64),
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    steps: usize,
    next_checkpoint: usize,
    done: bool,
}

impl ParkingEnv {
    /// Panics on an invalid course; use [`ParkingCourse::validate`] first for untrusted input.
    pub fn new(course: ParkingCourse) -> Self {
        course.validate().expect("valid parking course");
        ParkingEnv {
            course,
            start: (0.0, 0.0, 0.0),
            x: 0.0,
            y: 0.0,
            heading: 0.0,
            steps: 0,
            next_checkpoint: 0,
            done: false,
        }
    }

    pub fn with_start(mut self, x: f64, y: f64, heading: f64) -> Self {
        self.start = (x, y, heading);
        self
    }

    pub fn course(&self) -> &ParkingCourse {
        &self.course
    }

    /// Distance from the rover to the last checkpoint.
    pub fn distance_to_final(&self) -> f64 {
        let last = self.course.checkpoints.last().unwrap();
        (self.x - last.x).hypot(self.y - last.y)
    }

    fn observation(&self) -> Vec<f64> {
        let start_signal = if self.done { 0.0 } else { 1.0 };
        vec![start_signal, self.x - self.start.0, self.y - self.start.1, self.heading - self.start.2]
    }
}

impl Environment for ParkingEnv {
    fn name(&self) -> &'static str {
        "parking"
    }

    fn obs_dim(&self) -> usize {
        4
    }

    fn action_ranges(&self) -> Vec<[f64; 2]> {
        vec![[0.0, V_MAX], [-W_MAX, W_MAX]]
    }

    /// The task is deterministic; the seed is ignored.
    fn reset(&mut self, _seed: u64) -> Vec<f64> {
        (self.x, self.y, self.heading) = self.start;
        self.steps = 0;
        self.next_checkpoint = 0;
        self.done = false;
        self.observation()
    }

    fn step(&mut self, action: &[f64]) -> Result<Transition> {
        if self.done {
            return Err(NcpError::EpisodeFinished);
        }
        check_action(action, &self.action_ranges())?;
        let v = action[0].clamp(0.0, V_MAX);
        let w = action[1].clamp(-W_MAX, W_MAX);
        let dt = self.course.dt;
        self.x += v * self.heading.cos() * dt;
        self.y += v * self.heading.sin() * dt;
        self.heading += w * dt;
        self.steps += 1;

        let mut reward = 0.0;
        if let Some(cp) = self.course.checkpoints.get(self.next_checkpoint) {
            if cp.deadline == self.steps {
                reward = -(self.x - cp.x).hypot(self.y - cp.y);
                self.next_checkpoint += 1;
            }
        }
        self.done = self.steps >= self.course.episode_length;
        Ok(Transition {
            observation: self.observation(),
            reward,
            done: self.done,
        })
    }

    fn pose(&self) -> Option<(f64, f64)> {
        Some((self.x, self.y))
    }
}

/// Open-loop motion-primitive script for the default course: forward, left,
/// forward, right, forward, stop, 100 steps each.
pub fn scripted_actions(course: &ParkingCourse) -> Vec<[f64; 2]> {
    let turn = std::f64::consts::FRAC_PI_2 / (100.0 * course.dt);
    let primitives = [[0.1, 0.0], [0.1, turn], [0.1, 0.0], [0.1, -turn], [0.1, 0.0], [0.0, 0.0]];
    (0..course.episode_length)
        .map(|t| primitives[(t / 100).min(primitives.len() - 1)])
        .collect()
}
