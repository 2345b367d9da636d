#![allow(dead_code)]

use std::time::Instant;

use ncp::circuit::{derivative, CircuitState, Integrator};
use ncp::wiring::{random_circuit, CircuitParams, CircuitSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random 5-neuron, 8-synapse circuit with uniform in-bounds parameters.
pub fn random_five_neuron(seed: u64) -> (CircuitSpec, CircuitParams) {
    let spec = random_circuit(5, 8, 0, 0, seed).unwrap();
    let params = CircuitParams::random(&spec, &mut ChaCha8Rng::seed_from_u64(seed));
    (spec, params)
}

/// Explicit Euler on the continuous dynamics with a tiny step.
pub fn dense_euler(spec: &CircuitSpec, params: &CircuitParams, v0: &[f64], horizon: f64, h: f64) -> Vec<f64> {
    let mut v = v0.to_vec();
    for _ in 0..(horizon / h).round() as usize {
        let d = derivative(spec, params, &v);
        for (x, dx) in v.iter_mut().zip(d) {
            *x += h * dx;
        }
    }
    v
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Median wall time of `steps` solver steps over five repetitions.
pub fn time_steps(spec: &CircuitSpec, params: &CircuitParams, steps: usize) -> f64 {
    let mut integrator = Integrator::new();
    let mut samples: Vec<f64> = (0..5)
        .map(|_| {
            let mut state = CircuitState::at_rest(params);
            let t = Instant::now();
            for _ in 0..steps {
                integrator.advance(spec, params, &mut state, &[], 0.01).unwrap();
            }
            std::hint::black_box(&state);
            t.elapsed().as_secs_f64()
        })
        .collect();
    samples.sort_by(f64::total_cmp);
    samples[2]
}

/// Coefficient of determination of the least-squares line through `(xs, ys)`.
pub fn r_squared(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    sxy * sxy / (sxx * syy)
}
