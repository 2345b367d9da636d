//! Trains the tap-withdrawal circuit to balance the cart-pole and counts how
//! many of ten perturbed starts it holds for the full 1000 steps.
//!
//! `cargo run --release --example balance_pendulum -- [seed] [max_iterations]`

use ncp::envs::EnvKind;
use ncp::trainer::{evaluate_returns, train, ArsConfig, Filter, Start, Task, DEFAULT_FAILURE_RETURN};
use ncp::wiring::build_tw_circuit;

fn main() -> ncp::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let iterations = args.next().and_then(|s| s.parse().ok()).unwrap_or(8000);
    let task = Task::new(EnvKind::Pendulum);
    let config = ArsConfig {
        sigma0: 0.02,
        alpha: 1.0,
        max_iterations: iterations,
        rollouts: 16,
        filter: Filter::WorstK(8),
        seed,
        ..ArsConfig::default()
    };
    let out = train(&build_tw_circuit(), &task, &config, &Start::BestOfRandom(256), 1)?;
    println!("final estimate {:.1} after {} iterations", -out.record.final_estimate(), out.record.iterations.len());
    let params = out.params.decode()?;
    let seeds: Vec<u64> = (1000..1010).collect();
    let steps = evaluate_returns(&out.spec, &params, &task, &seeds, DEFAULT_FAILURE_RETURN)?;
    let held = steps.iter().filter(|&&s| s >= 1000.0).count();
    println!("balanced steps per start {steps:?}; {held}/10 held for 1000 steps");
    Ok(())
}
