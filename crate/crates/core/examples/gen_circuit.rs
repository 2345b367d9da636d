//! Builds the tap-withdrawal circuit and a random baseline of the same size
//! and reports their structure.
//!
//! `cargo run --example gen_circuit -- [seed]`

use ncp::wiring::{build_tw_circuit, random_circuit, validate_spec};
use ncp::NeuronRole;

fn main() -> ncp::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let tw = build_tw_circuit();
    let random = random_circuit(11, 28, 4, 2, seed)?;
    for (label, spec) in [("tap-withdrawal", &tw), ("random", &random)] {
        let count = |role| spec.indices_with_role(role).len();
        println!(
            "{label}: {} neurons ({} sensory, {} inter, {} command, {} motor), {} synapses, sparsity {:.0}%, {} violations",
            spec.neuron_count(),
            count(NeuronRole::Sensory),
            count(NeuronRole::Inter),
            count(NeuronRole::Command),
            count(NeuronRole::Motor),
            spec.edge_count(),
            100.0 * spec.sparsity(),
            validate_spec(spec).len(),
        );
    }
    println!("{}", tw.to_json());
    Ok(())
}
