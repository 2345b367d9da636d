use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ars::Filter;
use super::rollout::rollout;
use crate::envs::{EnvKind, Environment, ParkingCourse, ParkingEnv};
use crate::error::{NcpError, Result};
use crate::policy::SolverConfig;
use crate::wiring::{CircuitParams, CircuitSpec, ParamSchema};

/// Return assigned to an episode whose policy diverged.
pub const DEFAULT_FAILURE_RETURN: f64 = -1.0e6;

/// An environment choice plus its overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub env: EnvKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub course: Option<ParkingCourse>,
    pub solver: SolverConfig,
}

impl Task {
    pub fn new(env: EnvKind) -> Self {
        Task {
            env,
            course: None,
            solver: env.solver(),
        }
    }

    pub fn with_course(mut self, course: ParkingCourse) -> Self {
        self.course = Some(course);
        self
    }

    pub fn make_env(&self) -> Box<dyn Environment> {
        match (&self.course, self.env) {
            (Some(course), EnvKind::Parking) => Box::new(ParkingEnv::new(course.clone())),
            _ => self.env.make(),
        }
    }
}

/// Filtered return: the plain mean, or the mean of the `k` lowest returns.
pub fn filter_returns(returns: &[f64], filter: Filter) -> Result<f64> {
    if returns.is_empty() {
        return Err(NcpError::Domain("no returns to filter".into()));
    }
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    match filter {
        Filter::Mean => Ok(mean(returns)),
        Filter::WorstK(k) => {
            if k == 0 || k > returns.len() {
                return Err(NcpError::Domain(format!(
                    "worst-k needs 1 <= k <= {}, got {k}",
                    returns.len()
                )));
            }
            let mut sorted = returns.to_vec();
            sorted.sort_by(f64::total_cmp);
            Ok(mean(&sorted[..k]))
        }
    }
}

/// Returns of one rollout per seed, in seed order.
pub fn evaluate_returns(
    spec: &CircuitSpec,
    params: &CircuitParams,
    task: &Task,
    seeds: &[u64],
    failure_return: f64,
) -> Result<Vec<f64>> {
    seeds
        .iter()
        .map(|&seed| {
            let mut env = task.make_env();
            let out = rollout(spec, params, env.as_mut(), seed, task.solver, false)?;
            Ok(if out.diverged { failure_return } else { out.total_return })
        })
        .collect()
}

/// Stochastic objective over the flat parameter vector: `−filter(returns)`
/// over `rollouts` freshly seeded episodes.
pub struct CircuitObjective {
    pub spec: CircuitSpec,
    pub schema: ParamSchema,
    pub task: Task,
    pub rollouts: usize,
    pub filter: Filter,
    pub failure_return: f64,
    pool: Option<rayon::ThreadPool>,
}

impl CircuitObjective {
    /// `spec` must carry bindings. `jobs > 1` runs the rollouts of one
    /// estimate on a private thread pool.
    pub fn new(spec: CircuitSpec, task: Task, rollouts: usize, filter: Filter, jobs: usize) -> Result<Self> {
        let pool = if jobs > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(jobs)
                    .build()
                    .map_err(|e| NcpError::Domain(format!("thread pool: {e}")))?,
            )
        } else {
            None
        };
        Ok(CircuitObjective {
            schema: ParamSchema::new(&spec),
            spec,
            task,
            rollouts,
            filter,
            failure_return: DEFAULT_FAILURE_RETURN,
            pool,
        })
    }

    /// Rollout seeds of the estimate keyed by `seed`.
    pub fn rollout_seeds(&self, seed: u64) -> Vec<u64> {
        // a deterministic task gives identical returns for every seed
        let n = if self.task.env.is_stochastic() { self.rollouts } else { 1 };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.next_u64()).collect()
    }

    pub fn returns(&self, theta: &[f64], seed: u64) -> Result<Vec<f64>> {
        let params = self.schema.decode(theta)?;
        let seeds = self.rollout_seeds(seed);
        let run = |&s: &u64| -> Result<f64> {
            let mut env = self.task.make_env();
            let out = rollout(&self.spec, &params, env.as_mut(), s, self.task.solver, false)?;
            if out.diverged || !out.total_return.is_finite() {
                log::warn!("rollout with seed {s} diverged; scoring {}", self.failure_return);
                Ok(self.failure_return)
            } else {
                Ok(out.total_return)
            }
        };
        match &self.pool {
            // collect keeps seed order, so the estimate matches sequential evaluation
            Some(pool) => pool.install(|| seeds.par_iter().map(run).collect()),
            None => seeds.iter().map(run).collect(),
        }
    }

    pub fn estimate(&self, theta: &[f64], seed: u64) -> Result<f64> {
        let returns = self.returns(theta, seed)?;
        let filter = match self.filter {
            Filter::WorstK(k) if returns.len() < k => Filter::Mean,
            f => f,
        };
        Ok(-filter_returns(&returns, filter)?)
    }
}

/// `−filter(returns)` of explicit rollout seeds.
pub fn objective_estimate(
    spec: &CircuitSpec,
    params: &CircuitParams,
    task: &Task,
    seeds: &[u64],
    filter: Filter,
) -> Result<f64> {
    let returns = evaluate_returns(spec, params, task, seeds, DEFAULT_FAILURE_RETURN)?;
    Ok(-filter_returns(&returns, filter)?)
}
