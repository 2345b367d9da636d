//! Neuronal circuit policies.
//!
//! Biophysical leaky-integrator circuits with chemical and electrical
//! synapses, wired after a fixed connectome, mapped onto control tasks through
//! affine sensory and motor components, trained by adaptive random search and
//! inspected with slope-angle contribution analysis.
//!
//! Module map:
//! * [`circuit`]: membrane model, synapse currents and the semi-implicit solver.
//! * [`wiring`]: circuit specs, the tap-withdrawal connectome, random
//!   baselines and the flat parameter schema.
//! * [`io_map`]: sensory encoding, motor decoding, optional linear layers.
//! * [`policy`]: a circuit driven as a closed-loop controller.
//! * [`envs`]: mountain car, inverted pendulum and parking.
//! * [`trainer`]: objective estimates, rollouts and the search loop.
//! * [`interpret`]: contribution verdicts, time constants, projections.
//! * [`cli`]: the `ncp` command line.

pub mod circuit;
pub mod cli;
pub mod envs;
pub mod error;
pub mod interpret;
pub mod io_map;
pub mod policy;
pub mod trace;
pub mod trainer;
pub mod wiring;

pub use circuit::{CircuitState, Integrator, NeuronParams, SynapseKind, SynapseParams};
pub use envs::{EnvKind, Environment};
pub use error::{NcpError, Result};
pub use policy::{Policy, SolverConfig};
pub use trace::RolloutTrace;
pub use trainer::{train, ArsConfig, Filter, Start, Task};
pub use wiring::{build_tw_circuit, random_circuit, CircuitParams, CircuitSpec, NeuronRole};
