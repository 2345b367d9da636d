//! Trains the tap-withdrawal circuit on mountain car with the default search
//! settings, stopping once the estimate reaches 95, and evaluates the result
//! on ten fresh episodes.
//!
//! `cargo run --release --example train_mountain_car -- [seed] [max_iterations]`

use ncp::envs::EnvKind;
use ncp::trainer::{evaluate_returns, train, ArsConfig, Start, Task, DEFAULT_FAILURE_RETURN};
use ncp::wiring::build_tw_circuit;

fn main() -> ncp::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let iterations = args.next().and_then(|s| s.parse().ok()).unwrap_or(50_000);
    let task = Task::new(EnvKind::MountainCar);
    let config = ArsConfig {
        seed,
        max_iterations: iterations,
        target: Some(-95.0),
        ..ArsConfig::default()
    };
    let out = train(&build_tw_circuit(), &task, &config, &Start::default(), 1)?;
    println!(
        "{} iterations, {} accepted, final estimate {:.2}",
        out.record.iterations.len(),
        out.record.accepted(),
        -out.record.final_estimate()
    );
    let params = out.params.decode()?;
    let seeds: Vec<u64> = (1000..1010).collect();
    let returns = evaluate_returns(&out.spec, &params, &task, &seeds, DEFAULT_FAILURE_RETURN)?;
    let mean = returns.iter().sum::<f64>() / returns.len() as f64;
    println!("evaluation returns {returns:.1?}, mean {mean:.2}");
    Ok(())
}
