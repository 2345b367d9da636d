//! Closed-loop rollouts of hand-built circuits.

use ncp::circuit::{NeuronParams, SynapseKind, SynapseParams};
use ncp::envs::{EnvKind, Environment, MountainCar, ParkingCourse};
use ncp::io_map::{MotorComponent, SensoryComponent};
use ncp::trainer::{rollout, Task};
use ncp::wiring::{build_tw_circuit, CircuitParams, CircuitSpec, Edge, Neuron, NeuronRole};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Scripted oracle: push left until the car rolls back, then push along the velocity.
fn scripted_bang_bang_return(start: f64) -> f64 {
    let mut env = MountainCar::new();
    env.reset_to(start, 0.0);
    let mut started = false;
    let mut total = 0.0;
    loop {
        let f = if !started || env.velocity < 0.0 { -1.0 } else { 1.0 };
        let t = env.step(&[f]).unwrap();
        started |= env.velocity < 0.0;
        total += t.reward;
        if t.done {
            return total;
        }
    }
}

/// Velocity sensors drive the motor pair through strong excitatory synapses;
/// a raised leak reversal on the reverse motor breaks the tie at rest. The
/// narrow velocity range saturates the sensors almost immediately.
fn bang_bang_circuit() -> (CircuitSpec, CircuitParams) {
    let neuron = |name: &str, role| Neuron {
        name: name.into(),
        role,
    };
    let spec = CircuitSpec {
        neurons: vec![
            neuron("XP", NeuronRole::Sensory),
            neuron("XN", NeuronRole::Sensory),
            neuron("VP", NeuronRole::Sensory),
            neuron("VN", NeuronRole::Sensory),
            neuron("FWD", NeuronRole::Motor),
            neuron("REV", NeuronRole::Motor),
        ],
        edges: vec![
            Edge {
                pre: 2,
                post: 4,
                kind: SynapseKind::Excitatory,
            },
            Edge {
                pre: 3,
                post: 5,
                kind: SynapseKind::Excitatory,
            },
        ],
        sensory: vec![
            SensoryComponent::new([-1.2, 0.6], "XP", Some("XN".into())).unwrap(),
            SensoryComponent::new([-0.002, 0.002], "VP", Some("VN".into())).unwrap(),
        ],
        motor: vec![MotorComponent::new([-1.0, 1.0], Some("FWD".into()), Some("REV".into())).unwrap()],
        embed_inputs: None,
        readout_outputs: None,
    };
    let cell = |leak_reversal| NeuronParams {
        membrane_capacitance: 0.01,
        leak_conductance: 0.05,
        leak_reversal,
    };
    let synapse = SynapseParams {
        kind: SynapseKind::Excitatory,
        weight: 3.0,
        sigmoid_slope: 0.5,
    };
    let params = CircuitParams {
        neurons: vec![cell(-70.0), cell(-70.0), cell(-70.0), cell(-70.0), cell(-70.0), cell(-60.0)],
        synapses: vec![synapse, synapse],
        embed: None,
        readout: None,
    };
    (spec, params)
}

#[test]
fn hand_built_bang_bang_circuit_solves_mountain_car() {
    let task = Task::new(EnvKind::MountainCar);
    let (spec, params) = bang_bang_circuit();
    for seed in 0..10 {
        let mut env = task.make_env();
        let out = rollout(&spec, &params, env.as_mut(), seed, task.solver, false).unwrap();
        let mut probe = MountainCar::new();
        probe.reset(seed);
        let oracle = scripted_bang_bang_return(probe.position);
        assert!(oracle > 90.0, "seed {seed}: scripted oracle {oracle}");
        assert!(out.total_return > 90.0, "seed {seed}: circuit {} vs oracle {oracle}", out.total_return);
    }
}

#[test]
fn motionless_parking_policy_scores_the_stationary_value() {
    let task = Task::new(EnvKind::Parking);
    let spec = task.env.bind(&build_tw_circuit()).unwrap();
    let mut params = CircuitParams::random(&spec, &mut ChaCha8Rng::seed_from_u64(4));
    // silence every synapse and rest every neuron at the zero-action potential
    for s in &mut params.synapses {
        s.weight = 0.0;
    }
    for n in &mut params.neurons {
        n.leak_reversal = -70.0;
    }
    let mut env = task.make_env();
    let out = rollout(&spec, &params, env.as_mut(), 0, task.solver, false).unwrap();
    let expected: f64 = -ParkingCourse::default().checkpoints.iter().map(|c| c.x.hypot(c.y)).sum::<f64>();
    assert!((out.total_return - expected).abs() < 1e-12, "{} vs {expected}", out.total_return);
}

#[test]
fn same_seed_gives_identical_trace() {
    let task = Task::new(EnvKind::Pendulum);
    let spec = task.env.bind(&build_tw_circuit()).unwrap();
    let params = CircuitParams::random(&spec, &mut ChaCha8Rng::seed_from_u64(9));
    let run = || {
        let mut env = task.make_env();
        rollout(&spec, &params, env.as_mut(), 17, task.solver, true).unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a, b);
    let trace = a.trace.unwrap();
    assert_eq!(trace.len(), a.steps);
    assert_eq!(trace.total_reward(), a.total_return);
}

#[test]
fn arity_mismatch_is_rejected() {
    let (spec, params) = bang_bang_circuit();
    let task = Task::new(EnvKind::Parking);
    let mut env = task.make_env();
    assert!(rollout(&spec, &params, env.as_mut(), 0, task.solver, false).is_err());
}
