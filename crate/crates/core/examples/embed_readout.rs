//! Feeds a 17-dimensional observation through a linear embedding into the
//! four sensory variables of the tap-withdrawal circuit and a readout from two
//! motor variables into six actions.
//!
//! `cargo run --example embed_readout`

use ncp::envs::EnvKind;
use ncp::io_map::Matrix;
use ncp::policy::{Policy, SolverConfig};
use ncp::wiring::{build_tw_circuit, CircuitParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> ncp::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    // mountain car bindings give two paired sensory variables and one motor variable
    let mut spec = EnvKind::MountainCar.bind(&build_tw_circuit())?;
    spec.embed_inputs = Some(17);
    spec.readout_outputs = Some(6);
    ncp::wiring::ensure_valid(&spec)?;

    let params = CircuitParams::random(&spec, &mut rng);
    let shape = |m: &Option<Matrix>| m.as_ref().map(|m| (m.rows, m.cols));
    println!("embed {:?}, readout {:?}", shape(&params.embed), shape(&params.readout));

    let mut policy = Policy::new(&spec, &params, SolverConfig::default())?;
    for step in 0..5 {
        let obs: Vec<f64> = (0..17).map(|_| rng.gen_range(-0.05..0.05)).collect();
        let action = policy.act(&obs)?;
        let shown: Vec<String> = action.iter().map(|a| format!("{a:+.3}")).collect();
        println!("step {step}: action [{}]", shown.join(", "));
    }
    Ok(())
}
