//! Adaptive random search on a 5-dimensional quadratic bowl.
//!
//! `cargo run --example ars_quadratic -- [seed]`

use ncp::trainer::{ars_optimize, ArsConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> ncp::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centre: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let f = |x: &[f64], _| x.iter().zip(&centre).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
    let config = ArsConfig {
        sigma0: 0.5,
        alpha: 1.02,
        max_iterations: 5000,
        stale_reevaluation: None,
        seed,
        ..ArsConfig::default()
    };
    let record = ars_optimize(f, &[0.0; 5], &[(-2.0, 2.0); 5], &config)?;
    for it in record.iterations.iter().step_by(500) {
        println!("iteration {:5}: f = {:.3e}, sigma = {:.3e}", it.iteration, it.estimate, it.sigma);
    }
    println!("final f = {:.3e} after {} accepts", record.final_estimate(), record.accepted());
    Ok(())
}
