//! Random-search bookkeeping and convergence on a convex toy objective.

use ncp::envs::EnvKind;
use ncp::trainer::{ars_optimize, ArsConfig, CircuitObjective, Filter, Task};
use ncp::wiring::build_tw_circuit;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn quadratic_config(seed: u64) -> ArsConfig {
    ArsConfig {
        sigma0: 0.5,
        alpha: 1.02,
        max_iterations: 5000,
        stale_reevaluation: None,
        seed,
        ..ArsConfig::default()
    }
}

#[test]
fn quadratic_in_five_dimensions_converges_for_every_seed() {
    let bounds = vec![(-2.0, 2.0); 5];
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
        let c: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let theta0: Vec<f64> = (0..5).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let f = |x: &[f64], _| x.iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        let record = ars_optimize(f, &theta0, &bounds, &quadratic_config(seed)).unwrap();
        let best = f(&record.theta, 0);
        assert!(best < 1e-3, "seed {seed}: f = {best}");
        assert_eq!(record.final_estimate(), best);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sigma_follows_accept_reject_count(
        seed in any::<u64>(),
        alpha in 1.0f64..1.2,
        sigma0 in 1e-3f64..0.5,
        iters in 1usize..400,
    ) {
        let config = ArsConfig {
            sigma0,
            alpha,
            max_iterations: iters,
            seed,
            ..ArsConfig::default()
        };
        let bounds = vec![(-1.0, 1.0); 3];
        let mut noise = ChaCha8Rng::seed_from_u64(seed);
        let f = |x: &[f64], _| x.iter().map(|v| v * v).sum::<f64>() + noise.gen_range(0.0..0.1);
        let record = ars_optimize(f, &[0.5, -0.5, 0.2], &bounds, &config).unwrap();
        let (mut a, mut r) = (0i32, 0i32);
        for it in &record.iterations {
            if it.accepted { a += 1 } else { r += 1 }
            prop_assert_eq!(it.sigma, sigma0 * alpha.powi(a - r));
        }
        if alpha == 1.0 {
            prop_assert!(record.iterations.iter().all(|it| it.sigma == sigma0));
        }
    }

    #[test]
    fn evaluated_points_stay_in_the_box(seed in any::<u64>(), sigma0 in 0.01f64..2.0) {
        let bounds = vec![(-1.0, 1.0), (0.0, 5.0), (1e-3, 1.0), (-90.0, 0.0)];
        let mut seen = Vec::new();
        let config = ArsConfig { sigma0, max_iterations: 200, seed, ..ArsConfig::default() };
        ars_optimize(
            |x, _| {
                seen.push(x.to_vec());
                x.iter().sum()
            },
            &[0.0, 2.0, 0.5, -45.0],
            &bounds,
            &config,
        )
        .unwrap();
        for x in seen {
            for (v, (lo, hi)) in x.iter().zip(&bounds) {
                prop_assert!(v >= lo && v <= hi);
            }
        }
    }

    #[test]
    fn deterministic_objective_never_gets_worse(seed in any::<u64>()) {
        let config = ArsConfig { stale_reevaluation: None, max_iterations: 500, seed, ..ArsConfig::default() };
        let f = |x: &[f64], _| (x[0] - 0.3).abs() + (x[1] * 3.0).sin().abs();
        let record = ars_optimize(f, &[1.0, 1.0], &[(-1.0, 1.0); 2], &config).unwrap();
        for w in record.iterations.windows(2) {
            prop_assert!(w[1].estimate <= w[0].estimate);
        }
    }
}

#[test]
fn parallel_estimate_equals_sequential() {
    let task = Task::new(EnvKind::MountainCar);
    let spec = task.env.bind(&build_tw_circuit()).unwrap();
    let seq = CircuitObjective::new(spec.clone(), task.clone(), 8, Filter::WorstK(4), 1).unwrap();
    let par = CircuitObjective::new(spec, task, 8, Filter::WorstK(4), 4).unwrap();
    let theta = ncp::trainer::initial_theta(&seq.spec, 5);
    for seed in [1, 2, 3] {
        assert_eq!(seq.returns(&theta, seed).unwrap(), par.returns(&theta, seed).unwrap());
        assert_eq!(seq.estimate(&theta, seed).unwrap(), par.estimate(&theta, seed).unwrap());
    }
}
