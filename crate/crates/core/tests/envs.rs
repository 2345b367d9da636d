//! Environment dynamics against closed forms and independent re-simulations.

use ncp::envs::{
    scripted_actions, CartPoleState, Environment, InvertedPendulum, MountainCar, ParkingCourse, ParkingEnv,
};
use ncp::NcpError;
use proptest::prelude::*;

fn potential(x: f64) -> f64 {
    0.0025 * (3.0 * x).sin() / 3.0
}

fn energy(x: f64, v: f64) -> f64 {
    0.5 * v * v + potential(x)
}

#[test]
fn mountain_car_one_step_from_rest() {
    let mut env = MountainCar::new();
    env.reset_to(-0.5, 0.0);
    let t = env.step(&[0.0]).unwrap();
    let v = -0.0025 * (-1.5f64).cos();
    assert_eq!(t.observation, vec![-0.5 + v, v]);
    assert_eq!(t.reward, 0.0);
    assert!(!t.done);
}

#[test]
fn mountain_car_goal_pays_bonus_and_ends() {
    let mut env = MountainCar::new();
    env.reset_to(0.44, 0.05);
    let t = env.step(&[0.5]).unwrap();
    assert!(t.done);
    assert!((t.reward - (100.0 - 0.1 * 0.25)).abs() < 1e-12);
    assert!(matches!(env.step(&[0.0]), Err(NcpError::EpisodeFinished)));
}

/// Reference stepper written from the published equations.
fn oracle_car(x: f64, v: f64, f: f64) -> (f64, f64) {
    let f = f.clamp(-1.0, 1.0);
    let mut v = (v + 0.0015 * f - 0.0025 * (3.0 * x).cos()).clamp(-0.07, 0.07);
    let mut x = x + v;
    if x < -1.2 {
        x = -1.2;
        v = v.max(0.0);
    }
    (x.min(0.6), v)
}

#[test]
fn bang_bang_escapes_the_valley() {
    // push left until the car swings back, then push with the velocity
    let policy = |v: f64, started: bool| if !started || v < 0.0 { -1.0 } else { 1.0 };
    let (mut ox, mut ov) = (-0.5, 0.0);
    let mut oracle_steps = 0;
    let mut started = false;
    while ox < 0.45 {
        let f = policy(ov, started);
        (ox, ov) = oracle_car(ox, ov, f);
        started |= ov < 0.0;
        oracle_steps += 1;
        assert!(oracle_steps < 1000);
    }

    let mut env = MountainCar::new();
    env.reset_to(-0.5, 0.0);
    let mut started = false;
    let mut steps = 0;
    loop {
        let f = policy(env.velocity, started);
        let t = env.step(&[f]).unwrap();
        started |= env.velocity < 0.0;
        steps += 1;
        if t.done {
            break;
        }
    }
    assert_eq!(steps, oracle_steps);
    assert!(steps < 200, "escaped after {steps} steps");
    assert!(env.position >= 0.45);
}

proptest! {
    #[test]
    fn mountain_car_energy_gain_is_bounded(
        x in -1.2f64..0.44,
        v in -0.07f64..0.07,
        forces in prop::collection::vec(-2.0f64..2.0, 1..50),
    ) {
        let mut env = MountainCar::new();
        env.reset_to(x, v);
        for f in forces {
            let e0 = energy(env.position, env.velocity);
            let t = env.step(&[f]).unwrap();
            prop_assert!(t.observation.iter().all(|o| o.is_finite()) && t.reward.is_finite());
            let (x1, v1) = (env.position, env.velocity);
            let gain = energy(x1, v1) - e0;
            let work = 0.0015 * f.clamp(-1.0, 1.0).abs() * v1.abs();
            let curvature = 0.00375 * v1 * v1;
            prop_assert!(gain <= work + curvature + 1e-15, "gain {gain} > {work} + {curvature}");
            if t.done {
                break;
            }
        }
    }

    #[test]
    fn mountain_car_matches_reference_stepper(
        x in -1.2f64..0.44,
        v in -0.07f64..0.07,
        forces in prop::collection::vec(-2.0f64..2.0, 1..50),
    ) {
        let mut env = MountainCar::new();
        env.reset_to(x, v);
        let (mut ox, mut ov) = (x, v);
        for f in forces {
            let t = env.step(&[f]).unwrap();
            (ox, ov) = oracle_car(ox, ov, f);
            prop_assert!((t.observation[0] - ox).abs() < 1e-12 && (t.observation[1] - ov).abs() < 1e-12);
            if t.done {
                break;
            }
        }
    }

    #[test]
    fn pendulum_reproducible_and_finite(seed in any::<u64>(), forces in prop::collection::vec(-15.0f64..15.0, 1..200)) {
        let run = || {
            let mut env = InvertedPendulum::new();
            let mut obs = vec![env.reset(seed)];
            for f in &forces {
                let t = env.step(&[*f]).unwrap();
                assert!(t.reward.is_finite());
                obs.push(t.observation);
                if t.done {
                    break;
                }
            }
            obs
        };
        let a = run();
        prop_assert!(a.iter().flatten().all(|o| o.is_finite()));
        prop_assert_eq!(a, run());
    }
}

/// Continuous cart-pole right-hand side.
fn cartpole_rhs(s: [f64; 4], force: f64) -> [f64; 4] {
    let (m, mc, l, g) = (0.1, 1.0, 0.5, 9.8);
    let [_, xd, th, thd] = s;
    let total = m + mc;
    let temp = (force + m * l * thd * thd * th.sin()) / total;
    let thacc = (g * th.sin() - th.cos() * temp) / (l * (4.0 / 3.0 - m * th.cos() * th.cos() / total));
    let xacc = temp - m * l * thacc * th.cos() / total;
    [xd, xacc, thd, thacc]
}

fn rk4(s: [f64; 4], force: f64, h: f64) -> [f64; 4] {
    let add = |a: [f64; 4], b: [f64; 4], k: f64| [a[0] + k * b[0], a[1] + k * b[1], a[2] + k * b[2], a[3] + k * b[3]];
    let k1 = cartpole_rhs(s, force);
    let k2 = cartpole_rhs(add(s, k1, h / 2.0), force);
    let k3 = cartpole_rhs(add(s, k2, h / 2.0), force);
    let k4 = cartpole_rhs(add(s, k3, h), force);
    let mut out = s;
    for i in 0..4 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

#[test]
fn constant_force_leaves_the_box_when_the_dense_oracle_does() {
    for force in [10.0, -10.0] {
        // dense integration: first time outside the box
        let h = 1e-5;
        let mut s = [0.0f64; 4];
        let mut t = 0.0;
        while s[0].abs() < 1.0 && s[2].abs() < 0.2 {
            s = rk4(s, force, h);
            t += h;
            assert!(t < 20.0);
        }
        let oracle_steps = t / 0.02;

        let mut env = InvertedPendulum::new();
        env.reset_to(CartPoleState::default());
        let mut steps = 0;
        loop {
            let tr = env.step(&[force]).unwrap();
            steps += 1;
            if tr.done {
                assert_eq!(tr.reward, 0.0);
                break;
            }
            assert_eq!(tr.reward, 1.0);
        }
        assert!(
            (steps as f64 - oracle_steps).abs() <= 1.0,
            "force {force}: env {steps} steps, oracle {oracle_steps:.2}"
        );
    }
}

#[test]
fn pendulum_tilted_past_threshold_ends_at_once() {
    let mut env = InvertedPendulum::new();
    env.reset_to(CartPoleState {
        theta: 0.25,
        ..Default::default()
    });
    let t = env.step(&[0.0]).unwrap();
    assert!(t.done);
    assert_eq!(t.reward, 0.0);
}

#[test]
fn parking_script_tracks_the_default_course() {
    let course = ParkingCourse::default();
    let mut env = ParkingEnv::new(course.clone());
    env.reset(0);
    let mut total = 0.0;
    for a in scripted_actions(&course) {
        let t = env.step(&a).unwrap();
        total += t.reward;
        if t.done {
            break;
        }
    }
    assert!(total > -0.5, "scripted total {total}");
    assert!(env.distance_to_final() < 0.2);
}

proptest! {
    #[test]
    fn parking_is_translation_invariant(
        dx in -5.0f64..5.0,
        dy in -5.0f64..5.0,
        actions in prop::collection::vec((0.0f64..0.2, -0.3f64..0.3), 600),
    ) {
        let course = ParkingCourse::default();
        let total = |env: &mut ParkingEnv| {
            env.reset(0);
            let mut sum = 0.0;
            for &(v, w) in &actions {
                let t = env.step(&[v, w]).unwrap();
                assert!(t.observation.iter().all(|o| o.is_finite()));
                sum += t.reward;
            }
            sum
        };
        let mut a = ParkingEnv::new(course.clone());
        let mut b = ParkingEnv::new(course.translated(dx, dy)).with_start(dx, dy, 0.0);
        let (ra, rb) = (total(&mut a), total(&mut b));
        prop_assert!((ra - rb).abs() < 1e-9, "{ra} vs {rb}");
        prop_assert_eq!(ra, total(&mut a));
    }
}
