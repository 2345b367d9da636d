use crate::envs::Environment;
use crate::error::{NcpError, Result};
use crate::policy::{Policy, SolverConfig};
use crate::trace::RolloutTrace;
use crate::wiring::{CircuitParams, CircuitSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct RolloutOutcome {
    pub total_return: f64,
    pub steps: usize,
    /// The episode was cut short because the policy produced a non-finite action.
    pub diverged: bool,
    pub trace: Option<RolloutTrace>,
}

/// Runs one episode: reset env and circuit, then encode → solve → decode
/// until the environment reports `done`.
///
/// `spec` must already carry bindings (see [`crate::envs::EnvKind::bind`]).
pub fn rollout(
    spec: &CircuitSpec,
    params: &CircuitParams,
    env: &mut dyn Environment,
    seed: u64,
    solver: SolverConfig,
    record_trace: bool,
) -> Result<RolloutOutcome> {
    let mut policy = Policy::new(spec, params, solver)?;
    let channels = env.sensor_channels();
    let embedded = spec.embed_inputs.is_some();
    let expected_inputs = if embedded { env.obs_dim() } else { channels.len() };
    if policy.input_dim() != expected_inputs {
        return Err(NcpError::Structure(format!(
            "circuit expects {} inputs, {} provides {}",
            policy.input_dim(),
            env.name(),
            expected_inputs
        )));
    }
    if policy.output_dim() != env.action_dim() {
        return Err(NcpError::Structure(format!(
            "circuit produces {} actions, {} expects {}",
            policy.output_dim(),
            env.name(),
            env.action_dim()
        )));
    }

    let mut trace = record_trace.then(|| {
        RolloutTrace::new(
            spec.neurons.iter().map(|n| n.name.clone()).collect(),
            env.pose().is_some(),
        )
    });
    let mut observation = env.reset(seed);
    let mut inputs = Vec::with_capacity(expected_inputs);
    let mut total = 0.0;
    let mut steps = 0;
    loop {
        inputs.clear();
        if embedded {
            inputs.extend_from_slice(&observation);
        } else {
            inputs.extend(channels.iter().map(|&c| observation[c]));
        }
        let action = policy.act(&inputs)?;
        if action.iter().any(|a| !a.is_finite()) {
            log::warn!("{}: non-finite action {action:?} at step {steps}; aborting episode", env.name());
            return Ok(RolloutOutcome {
                total_return: total,
                steps,
                diverged: true,
                trace,
            });
        }
        let transition = env.step(&action)?;
        total += transition.reward;
        steps += 1;
        if let Some(t) = trace.as_mut() {
            t.times.push(steps as f64 * solver.dt_env);
            t.potentials.push(policy.state().potentials.clone());
            t.observations.push(observation.clone());
            t.actions.push(action);
            t.rewards.push(transition.reward);
            if let (Some(poses), Some(pose)) = (t.poses.as_mut(), env.pose()) {
                poses.push(pose);
            }
        }
        observation = transition.observation;
        if transition.done {
            break;
        }
    }
    Ok(RolloutOutcome {
        total_return: total,
        steps,
        diverged: false,
        trace,
    })
}
