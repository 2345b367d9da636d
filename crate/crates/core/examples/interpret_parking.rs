//! Trains a parking policy briefly (or loads one), records a rollout and runs
//! the contribution, time-constant and projection analyses on it.
//!
//! `cargo run --release --example interpret_parking -- [iterations]`
//! `cargo run --release --example interpret_parking -- <params.json> <circuit.json>`

use ncp::envs::EnvKind;
use ncp::interpret::{activity_projection, contribution_report, time_constant_range, DEFAULT_BIN_WIDTH, DEFAULT_EPSILON};
use ncp::trainer::{rollout, train, ArsConfig, Start, Task};
use ncp::wiring::{build_tw_circuit, CircuitSpec, ParamVector};

fn main() -> ncp::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let task = Task::new(EnvKind::Parking);
    let (spec, params) = if let [params, circuit] = args.as_slice() {
        let spec = CircuitSpec::load(circuit)?;
        let params = ParamVector::load(params, &spec)?.decode()?;
        (spec, params)
    } else {
        let iterations = args.first().and_then(|s| s.parse().ok()).unwrap_or(3000);
        let config = ArsConfig {
            sigma0: 0.01,
            alpha: 1.0,
            max_iterations: iterations,
            ..ArsConfig::default()
        };
        let out = train(&build_tw_circuit(), &task, &config, &Start::default(), 1)?;
        let params = out.params.decode()?;
        (out.spec, params)
    };

    let mut env = task.make_env();
    let run = rollout(&spec, &params, env.as_mut(), 0, task.solver, true)?;
    let trace = run.trace.expect("trace requested");
    println!("return {:.3} over {} steps", run.total_return, trace.len());

    // negative half of the angular-velocity pair turns right
    let right = spec.motor[1].negative.clone().expect("paired angular velocity");
    let report = contribution_report(&trace, &right, DEFAULT_BIN_WIDTH, DEFAULT_EPSILON)?;
    println!("contributions to {right}:");
    for p in &report.pairs {
        let c = &p.classification;
        println!("  {:>4}: {} (+{} / -{})", p.source, c.verdict, c.positive, c.negative);
    }

    println!("time-constant ranges (s):");
    for (name, r) in trace.neuron_names.iter().zip(time_constant_range(&trace, &spec, &params)?) {
        println!("  {name:>4}: {:.4} .. {:.4}", r.tau_min, r.tau_max);
    }

    let projection = activity_projection(&trace)?;
    let column = projection.column(trace.neuron_index(&right).expect("motor neuron in trace"));
    let peak = (0..column.len()).max_by(|&a, &b| column[a].total_cmp(&column[b])).unwrap_or(0);
    let (x, y) = projection.poses[peak];
    println!("{right} peaks at step {peak}, pose ({x:.2}, {y:.2})");
    Ok(())
}
