//! A circuit wired to an environment: encode → solver sub-steps → decode.

use crate::circuit::{check_shapes, CircuitState, Integrator, DEFAULT_ODE_DT, DEFAULT_ODE_SUBSTEPS};
use crate::error::{NcpError, Result};
use crate::io_map::{self, MotorComponent, SensoryComponent, REST_MV};
use crate::wiring::{CircuitParams, CircuitSpec};

/// Circuit time advanced per environment step and how it is subdivided.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SolverConfig {
    /// Seconds of circuit time per environment step.
    pub dt_env: f64,
    pub substeps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dt_env: DEFAULT_ODE_DT * DEFAULT_ODE_SUBSTEPS as f64,
            substeps: DEFAULT_ODE_SUBSTEPS,
        }
    }
}

#[derive(Debug, Clone)]
struct BoundSensor {
    comp: SensoryComponent,
    positive: usize,
    negative: Option<usize>,
}

#[derive(Debug, Clone)]
struct BoundMotor {
    comp: MotorComponent,
    positive: Option<usize>,
    negative: Option<usize>,
}

/// Runtime policy: borrows an immutable spec/params pair and owns the circuit state.
#[derive(Debug, Clone)]
pub struct Policy<'a> {
    spec: &'a CircuitSpec,
    params: &'a CircuitParams,
    sensors: Vec<BoundSensor>,
    motors: Vec<BoundMotor>,
    state: CircuitState,
    integrator: Integrator,
    solver: SolverConfig,
    clamps: Vec<(usize, f64)>,
}

impl<'a> Policy<'a> {
    pub fn new(spec: &'a CircuitSpec, params: &'a CircuitParams, solver: SolverConfig) -> Result<Self> {
        if solver.substeps == 0 {
            return Err(NcpError::Domain("ode_substeps must be at least 1".into()));
        }
        if !(solver.dt_env > 0.0 && solver.dt_env.is_finite()) {
            return Err(NcpError::Domain(format!("dt_env must be positive, got {}", solver.dt_env)));
        }
        let state = CircuitState::at_rest(params);
        check_shapes(spec, params, &state)?;
        let resolve = |name: &str| {
            spec.index_of(name)
                .ok_or_else(|| NcpError::Structure(format!("binding names unknown neuron {name:?}")))
        };
        let sensors = spec
            .sensory
            .iter()
            .map(|c| {
                c.check_range()?;
                let positive = resolve(&c.positive)?;
                let negative = c.negative.as_deref().map(resolve).transpose()?;
                for idx in std::iter::once(positive).chain(negative) {
                    if !spec.neurons[idx].role.is_sensory() {
                        return Err(NcpError::Structure(format!(
                            "sensory binding targets non-sensory neuron {}",
                            spec.neurons[idx].name
                        )));
                    }
                }
                Ok(BoundSensor {
                    comp: c.clone(),
                    positive,
                    negative,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let motors = spec
            .motor
            .iter()
            .map(|c| {
                c.check_range()?;
                Ok(BoundMotor {
                    comp: c.clone(),
                    positive: c.positive.as_deref().map(resolve).transpose()?,
                    negative: c.negative.as_deref().map(resolve).transpose()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let embed_ok = match (&params.embed, spec.embed_inputs) {
            (None, None) => true,
            (Some(m), Some(n)) => m.cols == n && m.rows == sensors.len(),
            _ => false,
        };
        let readout_ok = match (&params.readout, spec.readout_outputs) {
            (None, None) => true,
            (Some(m), Some(n)) => m.rows == n && m.cols == motors.len(),
            _ => false,
        };
        if !embed_ok || !readout_ok {
            return Err(NcpError::Structure(
                "embed/readout matrices do not match the circuit bindings".into(),
            ));
        }
        Ok(Policy {
            spec,
            params,
            sensors,
            motors,
            state,
            integrator: Integrator::new(),
            solver,
            clamps: Vec::new(),
        })
    }

    /// Number of observation entries `act` expects.
    pub fn input_dim(&self) -> usize {
        self.spec.embed_inputs.unwrap_or(self.sensors.len())
    }

    pub fn output_dim(&self) -> usize {
        self.spec.readout_outputs.unwrap_or(self.motors.len())
    }

    pub fn solver(&self) -> SolverConfig {
        self.solver
    }

    pub fn state(&self) -> &CircuitState {
        &self.state
    }

    pub fn set_state(&mut self, state: CircuitState) -> Result<()> {
        check_shapes(self.spec, self.params, &state)?;
        self.state = state;
        Ok(())
    }

    /// Back to the rest state (every neuron at its leak reversal).
    pub fn reset(&mut self) {
        self.state = CircuitState::at_rest(self.params);
    }

    /// One environment step with the stored solver configuration.
    pub fn act(&mut self, observation: &[f64]) -> Result<Vec<f64>> {
        let SolverConfig { dt_env, substeps } = self.solver;
        self.act_with(observation, dt_env, substeps)
    }

    pub fn act_with(&mut self, observation: &[f64], dt_env: f64, substeps: usize) -> Result<Vec<f64>> {
        if substeps == 0 {
            return Err(NcpError::Domain("ode_substeps must be at least 1".into()));
        }
        if observation.len() != self.input_dim() {
            return Err(NcpError::Structure(format!(
                "observation has {} entries, policy expects {}",
                observation.len(),
                self.input_dim()
            )));
        }
        let variables = match &self.params.embed {
            Some(m) => io_map::embed(observation, m)?,
            None => observation.to_vec(),
        };
        self.clamps.clear();
        for (s, &x) in self.sensors.iter().zip(&variables) {
            let (v_pos, v_neg) = io_map::encode(x, &s.comp);
            self.clamps.push((s.positive, v_pos));
            if let Some(neg) = s.negative {
                self.clamps.push((neg, v_neg));
            }
        }
        let dt = dt_env / substeps as f64;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(NcpError::Domain(format!("dt_env must be positive, got {dt_env}")));
        }
        for _ in 0..substeps {
            self.integrator
                .advance_unchecked(self.spec, self.params, &mut self.state, &self.clamps, dt);
        }
        let v = &self.state.potentials;
        let motor_values: Vec<f64> = self
            .motors
            .iter()
            .map(|m| {
                let vp = m.positive.map_or(REST_MV, |i| v[i]);
                let vn = m.negative.map_or(REST_MV, |i| v[i]);
                io_map::decode(vp, vn, &m.comp)
            })
            .collect();
        match &self.params.readout {
            Some(m) => io_map::readout(&motor_values, m),
            None => Ok(motor_values),
        }
    }
}

/// Free-function form of [`Policy::act_with`].
pub fn simulate_episode_step(
    policy: &mut Policy<'_>,
    observation: &[f64],
    dt_env: f64,
    ode_substeps: usize,
) -> Result<Vec<f64>> {
    policy.act_with(observation, dt_env, ode_substeps)
}
