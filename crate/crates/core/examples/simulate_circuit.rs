//! Drives the tap-withdrawal circuit with a sensory step and prints the
//! motor potentials over one second of circuit time.
//!
//! `cargo run --example simulate_circuit -- [seed]`

use ncp::circuit::{CircuitState, Integrator};
use ncp::wiring::{build_tw_circuit, CircuitParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ncp::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let spec = build_tw_circuit();
    let params = CircuitParams::random(&spec, &mut ChaCha8Rng::seed_from_u64(seed));
    let plm = spec.index_of("PLM").expect("tw has PLM");
    let fwd = spec.index_of("FWD").expect("tw has FWD");
    let rev = spec.index_of("REV").expect("tw has REV");

    let mut state = CircuitState::at_rest(&params);
    let mut integrator = Integrator::new();
    let dt = 0.01;
    println!("t,PLM,FWD,REV");
    for k in 0..100 {
        // touch the tail for the second half
        let drive = if k < 50 { -70.0 } else { -20.0 };
        integrator.advance(&spec, &params, &mut state, &[(plm, drive)], dt)?;
        let v = &state.potentials;
        println!("{:.2},{:.3},{:.3},{:.3}", state.time, v[plm], v[fwd], v[rev]);
    }
    Ok(())
}
