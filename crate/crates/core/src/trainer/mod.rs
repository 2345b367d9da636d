//! Adaptive random search over circuit parameters, objective estimates and rollouts.

mod ars;
mod objective;
mod rollout;

pub use ars::{ars_optimize, ArsConfig, Filter, IterationRecord, TrainRecord};
pub(crate) use ars::fmt_f64;
pub use objective::{
    evaluate_returns, filter_returns, objective_estimate, CircuitObjective, Task, DEFAULT_FAILURE_RETURN,
};
pub use rollout::{rollout, RolloutOutcome};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use serde::{Deserialize, Serialize};

use crate::error::{NcpError, Result};
use crate::wiring::{CircuitParams, CircuitSpec, ParamSchema, ParamVector};

/// Salt separating the initial-parameter stream from the search stream.
const INIT_STREAM: u64 = 0x5eed_1a17;

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Spec with the environment bindings that were trained against.
    pub spec: CircuitSpec,
    pub params: ParamVector,
    pub record: TrainRecord,
}

/// Uniform random starting point inside the parameter box, keyed by `seed`.
pub fn initial_theta(spec: &CircuitSpec, seed: u64) -> Vec<f64> {
    let params = CircuitParams::random(spec, &mut ChaCha8Rng::seed_from_u64(seed ^ INIT_STREAM));
    ParamSchema::new(spec).encode(&params).expect("schema matches its own spec")
}

/// Number of random draws [`Start::default`] picks the starting point from.
pub const DEFAULT_START_CANDIDATES: usize = 32;

/// Where the search starts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Start {
    Theta(Vec<f64>),
    /// Best of this many uniform draws, each scored by one objective estimate.
    BestOfRandom(usize),
}

impl Default for Start {
    fn default() -> Self {
        Start::BestOfRandom(DEFAULT_START_CANDIDATES)
    }
}

/// Picks the starting vector; draws and scoring seeds derive from `seed`.
pub fn starting_theta(objective: &CircuitObjective, start: &Start, seed: u64) -> Result<Vec<f64>> {
    match start {
        Start::Theta(theta) => Ok(theta.clone()),
        Start::BestOfRandom(0) => Err(NcpError::Domain("need at least one start candidate".into())),
        Start::BestOfRandom(n) => {
            let mut best: Option<(f64, Vec<f64>)> = None;
            for c in 0..*n as u64 {
                let theta = initial_theta(&objective.spec, seed.wrapping_add(c.wrapping_mul(0x9e37_79b9)));
                let f = objective.estimate(&theta, seed ^ INIT_STREAM ^ c)?;
                if best.as_ref().is_none_or(|(b, _)| f < *b) {
                    best = Some((f, theta));
                }
            }
            Ok(best.expect("n >= 1").1)
        }
    }
}

/// Trains `spec` on `task`. Bindings default to the environment's when the
/// spec has none.
pub fn train(spec: &CircuitSpec, task: &Task, config: &ArsConfig, start: &Start, jobs: usize) -> Result<TrainOutcome> {
    let bound = task.env.bind(spec)?;
    crate::wiring::ensure_valid(&bound)?;
    config.validate()?;
    let objective = CircuitObjective::new(bound.clone(), task.clone(), config.rollouts, config.filter, jobs)?;
    let theta0 = starting_theta(&objective, start, config.seed)?;
    let mut failure = None;
    let record = ars_optimize(
        |theta, seed| {
            if failure.is_some() {
                return f64::INFINITY;
            }
            match objective.estimate(theta, seed) {
                Ok(f) => f,
                Err(e) => {
                    failure = Some(e);
                    f64::INFINITY
                }
            }
        },
        &theta0,
        &objective.schema.bounds(),
        config,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let schema = std::sync::Arc::new(objective.schema.clone());
    Ok(TrainOutcome {
        params: ParamVector {
            values: record.theta.clone(),
            schema,
        },
        spec: bound,
        record,
    })
}
