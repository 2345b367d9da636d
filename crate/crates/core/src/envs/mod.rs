//! Seedable episodic environments behind one contract.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{NcpError, Result};
use crate::io_map::{default_bindings, VariableSlot};
use crate::policy::SolverConfig;
use crate::wiring::CircuitSpec;

mod mountain_car;
mod parking;
mod pendulum;

pub use mountain_car::MountainCar;
pub use parking::{scripted_actions, Checkpoint, ParkingCourse, ParkingEnv};
pub use pendulum::{CartPoleState, InvertedPendulum};

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub observation: Vec<f64>,
    pub reward: f64,
    pub done: bool,
}

pub trait Environment: Send {
    fn name(&self) -> &'static str;

    fn obs_dim(&self) -> usize;

    /// `[lo, hi]` per action; out-of-range actions are clipped by `step`.
    fn action_ranges(&self) -> Vec<[f64; 2]>;

    fn action_dim(&self) -> usize {
        self.action_ranges().len()
    }

    fn reset(&mut self, seed: u64) -> Vec<f64>;

    fn step(&mut self, action: &[f64]) -> Result<Transition>;

    /// Observation entries fed to sensory components when no embedding layer is used.
    fn sensor_channels(&self) -> Vec<usize> {
        (0..self.obs_dim()).collect()
    }

    /// Planar position for trajectory projections, if the task has one.
    fn pose(&self) -> Option<(f64, f64)> {
        None
    }
}

pub(crate) fn check_action(action: &[f64], ranges: &[[f64; 2]]) -> Result<()> {
    if action.len() != ranges.len() {
        return Err(NcpError::Env(format!(
            "expected {} action entries, got {}",
            ranges.len(),
            action.len()
        )));
    }
    if action.iter().any(|a| !a.is_finite()) {
        return Err(NcpError::Env(format!("non-finite action {action:?}")));
    }
    Ok(())
}

/// The bundled environments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvKind {
    MountainCar,
    Pendulum,
    Parking,
}

impl FromStr for EnvKind {
    type Err = NcpError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "mountaincar" => Ok(EnvKind::MountainCar),
            "pendulum" | "invertedpendulum" | "cartpole" => Ok(EnvKind::Pendulum),
            "parking" => Ok(EnvKind::Parking),
            _ => Err(NcpError::UnknownEnv(s.to_string())),
        }
    }
}

impl std::fmt::Display for EnvKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EnvKind::MountainCar => "mountaincar",
            EnvKind::Pendulum => "pendulum",
            EnvKind::Parking => "parking",
        })
    }
}

impl EnvKind {
    pub fn make(self) -> Box<dyn Environment> {
        match self {
            EnvKind::MountainCar => Box::new(MountainCar::new()),
            EnvKind::Pendulum => Box::new(InvertedPendulum::new()),
            EnvKind::Parking => Box::new(ParkingEnv::new(ParkingCourse::default())),
        }
    }

    /// Whether two rollouts with different seeds can differ.
    pub fn is_stochastic(self) -> bool {
        !matches!(self, EnvKind::Parking)
    }

    pub fn solver(self) -> SolverConfig {
        match self {
            EnvKind::MountainCar => SolverConfig { dt_env: 0.1, substeps: 5 },
            EnvKind::Pendulum => SolverConfig { dt_env: 0.5, substeps: 5 },
            EnvKind::Parking => SolverConfig { dt_env: 0.1, substeps: 10 },
        }
    }

    fn slots(self) -> (Vec<VariableSlot>, Vec<VariableSlot>) {
        match self {
            // (position, velocity) -> force
            EnvKind::MountainCar => (
                vec![VariableSlot::paired(-1.2, 0.6), VariableSlot::paired(-0.01, 0.01)],
                vec![VariableSlot::paired(-1.0, 1.0)],
            ),
            // (angle, cart position) -> force
            EnvKind::Pendulum => (
                vec![
                    VariableSlot::paired(-pendulum::ANGLE_LIMIT, pendulum::ANGLE_LIMIT),
                    VariableSlot::paired(-pendulum::POSITION_LIMIT, pendulum::POSITION_LIMIT),
                ],
                vec![VariableSlot::paired(-pendulum::FORCE_MAX, pendulum::FORCE_MAX)],
            ),
            // (start signal, x, y, heading) -> (linear, angular velocity)
            EnvKind::Parking => (
                vec![
                    VariableSlot::single(1.0),
                    VariableSlot::single(parking::X_RANGE),
                    VariableSlot::single(parking::Y_RANGE),
                    VariableSlot::single(parking::HEADING_RANGE),
                ],
                vec![
                    VariableSlot::single(parking::V_MAX),
                    VariableSlot::paired(-parking::W_MAX, parking::W_MAX),
                ],
            ),
        }
    }

    /// Returns `spec` with this environment's default bindings attached when
    /// the circuit carries none.
    pub fn bind(self, spec: &CircuitSpec) -> Result<CircuitSpec> {
        let mut out = spec.clone();
        if !spec.has_bindings() {
            let (s, m) = self.slots();
            let (sensory, motor) = default_bindings(spec, &s, &m)?;
            out.sensory = sensory;
            out.motor = motor;
        }
        Ok(out)
    }
}
