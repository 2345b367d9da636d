//! Adaptive random search.
//!
//! Hill climbing over a boxed parameter vector. Each iteration perturbs the
//! incumbent with Gaussian noise (per-coordinate scale `σ · (upper − lower)`),
//! clamps into the box and accepts on strict improvement. `σ` grows by `α` on
//! acceptance and shrinks by `α` on rejection. Once more than
//! `stale_reevaluation` iterations have passed since the last acceptance, the
//! incumbent is re-estimated every iteration.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{NcpError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Filter {
    Mean,
    /// Mean of the `k` lowest returns.
    WorstK(usize),
}

impl std::str::FromStr for Filter {
    type Err = NcpError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if s == "mean" {
            return Ok(Filter::Mean);
        }
        if let Some(k) = s.strip_prefix("worstk:") {
            let k: usize = k
                .parse()
                .map_err(|_| NcpError::Domain(format!("bad worst-k count {k:?}")))?;
            return Ok(Filter::WorstK(k));
        }
        Err(NcpError::Domain(format!("unknown filter {s:?}; expected mean or worstk:K")))
    }
}

impl std::fmt::Display for Filter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Filter::Mean => f.write_str("mean"),
            Filter::WorstK(k) => write!(f, "worstk:{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArsConfig {
    pub sigma0: f64,
    pub alpha: f64,
    pub max_iterations: usize,
    /// `None` disables re-estimation of a stale incumbent.
    pub stale_reevaluation: Option<usize>,
    pub rollouts: usize,
    pub filter: Filter,
    pub seed: u64,
    /// Stop as soon as the incumbent estimate is at or below this value.
    #[serde(default)]
    pub target: Option<f64>,
}

impl Default for ArsConfig {
    fn default() -> Self {
        ArsConfig {
            sigma0: 0.1,
            alpha: 1.05,
            max_iterations: 50_000,
            stale_reevaluation: Some(20),
            rollouts: 8,
            filter: Filter::WorstK(4),
            seed: 0,
            target: None,
        }
    }
}

impl ArsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma0 > 0.0 && self.sigma0.is_finite()) {
            return Err(NcpError::Domain(format!("sigma0 must be positive, got {}", self.sigma0)));
        }
        if !(self.alpha >= 1.0 && self.alpha.is_finite()) {
            return Err(NcpError::Domain(format!("alpha must be >= 1, got {}", self.alpha)));
        }
        if self.rollouts == 0 {
            return Err(NcpError::Domain("rollouts per estimate must be >= 1".into()));
        }
        if let Filter::WorstK(k) = self.filter {
            if k == 0 || k > self.rollouts {
                return Err(NcpError::Domain(format!(
                    "worst-k needs 1 <= k <= rollouts ({}), got {k}",
                    self.rollouts
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Incumbent objective after this iteration.
    pub estimate: f64,
    /// Noise scale after this iteration's adaptation.
    pub sigma: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainRecord {
    pub initial_estimate: f64,
    pub iterations: Vec<IterationRecord>,
    pub theta: Vec<f64>,
}

impl TrainRecord {
    pub fn final_estimate(&self) -> f64 {
        self.iterations.last().map_or(self.initial_estimate, |r| r.estimate)
    }

    pub fn accepted(&self) -> usize {
        self.iterations.iter().filter(|r| r.accepted).count()
    }

    /// CSV with header `iteration,estimate,sigma,accepted`; iteration 0 is the initial estimate.
    pub fn write_csv<W: Write>(&self, writer: W, sigma0: f64) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["iteration", "estimate", "sigma", "accepted"])?;
        w.write_record(["0".to_string(), fmt_f64(self.initial_estimate), fmt_f64(sigma0), "0".into()])?;
        for r in &self.iterations {
            w.write_record([
                r.iteration.to_string(),
                fmt_f64(r.estimate),
                fmt_f64(r.sigma),
                u8::from(r.accepted).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Shortest round-trip decimal form; locale independent.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// Runs the search. `objective(theta, seed)` must return a finite estimate to
/// minimise; `seed` is fresh for every estimate.
pub fn ars_optimize<F>(
    mut objective: F,
    theta0: &[f64],
    bounds: &[(f64, f64)],
    config: &ArsConfig,
) -> Result<TrainRecord>
where
    F: FnMut(&[f64], u64) -> f64,
{
    config.validate()?;
    if theta0.len() != bounds.len() {
        return Err(NcpError::ParamLength {
            expected: bounds.len(),
            got: theta0.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let clamp = |theta: &mut [f64]| {
        for (x, &(lo, hi)) in theta.iter_mut().zip(bounds) {
            *x = if x.is_nan() { lo } else { x.clamp(lo, hi) };
        }
    };

    let mut theta = theta0.to_vec();
    clamp(&mut theta);
    let mut f_theta = objective(&theta, rng.next_u64());
    let initial_estimate = f_theta;
    // σ = σ0 · α^exponent, exponent = accepts − rejects
    let mut exponent: i32 = 0;
    let mut since_accept: usize = 0;
    let mut candidate = vec![0.0; theta.len()];
    let mut iterations = Vec::with_capacity(config.max_iterations.min(1 << 16));

    for k in 1..=config.max_iterations {
        if config.target.is_some_and(|t| f_theta <= t) {
            break;
        }
        let sigma = config.sigma0 * config.alpha.powi(exponent);
        for ((c, &x), &(lo, hi)) in candidate.iter_mut().zip(&theta).zip(bounds) {
            let z: f64 = StandardNormal.sample(&mut rng);
            *c = x + sigma * (hi - lo) * z;
        }
        clamp(&mut candidate);
        let f_candidate = objective(&candidate, rng.next_u64());
        let accepted = f_candidate < f_theta;
        if accepted {
            std::mem::swap(&mut theta, &mut candidate);
            f_theta = f_candidate;
            since_accept = 0;
            exponent += 1;
        } else {
            exponent -= 1;
        }
        since_accept += 1;
        if config.stale_reevaluation.is_some_and(|n| since_accept > n) {
            f_theta = objective(&theta, rng.next_u64());
        }
        let sigma = config.sigma0 * config.alpha.powi(exponent);
        iterations.push(IterationRecord {
            iteration: k,
            estimate: f_theta,
            sigma,
            accepted,
        });
        if k % 1000 == 0 {
            log::debug!("ars iteration {k}: estimate {f_theta:.4}, sigma {sigma:.5}");
        }
    }
    Ok(TrainRecord {
        initial_estimate,
        iterations,
        theta,
    })
}
