//! Trains the tap-withdrawal circuit on the bundled parking course and
//! compares the result with the scripted motion-primitive rollout.
//!
//! `cargo run --release --example train_parking -- [seed] [max_iterations] [params_out.json]`

use ncp::envs::{scripted_actions, EnvKind, Environment, ParkingCourse, ParkingEnv};
use ncp::trainer::{rollout, train, ArsConfig, Start, Task};
use ncp::wiring::build_tw_circuit;

fn main() -> ncp::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let iterations = args.next().and_then(|s| s.parse().ok()).unwrap_or(50_000);
    let save = args.next();

    let course = ParkingCourse::default();
    let mut env = ParkingEnv::new(course.clone());
    env.reset(0);
    let scripted: f64 = scripted_actions(&course).iter().map(|a| env.step(a).map(|t| t.reward)).sum::<ncp::Result<f64>>()?;

    let task = Task::new(EnvKind::Parking);
    let config = ArsConfig {
        sigma0: 0.01,
        alpha: 1.0,
        max_iterations: iterations,
        seed,
        ..ArsConfig::default()
    };
    let out = train(&build_tw_circuit(), &task, &config, &Start::default(), 1)?;
    let params = out.params.decode()?;
    let mut env = task.make_env();
    let run = rollout(&out.spec, &params, env.as_mut(), 0, task.solver, true)?;
    let trace = run.trace.expect("trace requested");
    let last = course.checkpoints.last().expect("course has checkpoints");
    let (x, y) = *trace.poses.as_ref().and_then(|p| p.last()).expect("parking records poses");
    println!("scripted return {scripted:.3}, trained return {:.3}", run.total_return);
    println!("final pose ({x:.2}, {y:.2}), {:.3} from the last checkpoint", (x - last.x).hypot(y - last.y));
    for (k, cp) in course.checkpoints.iter().enumerate() {
        let (px, py) = trace.poses.as_ref().unwrap()[cp.deadline - 1];
        println!("checkpoint {k} at step {}: ({px:.2}, {py:.2}) vs ({:.2}, {:.2})", cp.deadline, cp.x, cp.y);
    }
    if let Some(path) = save {
        std::fs::write(&path, out.params.to_json()?)?;
        std::fs::write(format!("{path}.circuit.json"), out.spec.to_json())?;
        println!("wrote {path}");
    }
    Ok(())
}
