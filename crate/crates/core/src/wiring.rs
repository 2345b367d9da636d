//! Circuit topologies and the learnable parameter vector.
//!
//! A [`CircuitSpec`] is the immutable wiring graph. Its JSON form names
//! neurons by string so a corrected connectome can be dropped in as data:
//!
//! ```json
//! {
//!   "neurons": [{"name": "PVD", "role": "sensory"}, ...],
//!   "edges":   [{"pre": "PVD", "post": "PVC", "kind": "excitatory"}, ...],
//!   "sensory": [{"range": [-1.2, 0.6], "positive": "PVD", "negative": "AVM"}],
//!   "motor":   [{"range": [-1.0, 1.0], "positive": "FWD", "negative": "REV"}]
//! }
//! ```
//!
//! `sensory`/`motor` may be left empty; an environment then binds its own
//! defaults (see [`crate::envs::EnvKind::default_bindings`]).

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{
    clamp_to, NeuronParams, SynapseKind, SynapseParams, CAPACITANCE_BOUNDS,
    LEAK_CONDUCTANCE_BOUNDS, LEAK_REVERSAL_BOUNDS, SIGMOID_SLOPE_BOUNDS, SYNAPSE_WEIGHT_BOUNDS,
};
use crate::error::{NcpError, Result};
use crate::io_map::{Matrix, MotorComponent, SensoryComponent, LINEAR_WEIGHT_BOUNDS};

const TW_JSON: &str = include_str!("../data/tw.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NeuronRole {
    Sensory,
    Inter,
    Command,
    Motor,
}

impl NeuronRole {
    pub fn is_sensory(self) -> bool {
        self == NeuronRole::Sensory
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neuron {
    pub name: String,
    pub role: NeuronRole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub pre: usize,
    pub post: usize,
    pub kind: SynapseKind,
}

/// Immutable wiring graph plus its sensory/motor bindings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecFile", into = "SpecFile")]
pub struct CircuitSpec {
    pub neurons: Vec<Neuron>,
    pub edges: Vec<Edge>,
    pub sensory: Vec<SensoryComponent>,
    pub motor: Vec<MotorComponent>,
    /// Width of the observation vector fed through a learnable embedding
    /// into the sensory variables, if any.
    pub embed_inputs: Option<usize>,
    /// Width of the action vector read out linearly from the motor variables, if any.
    pub readout_outputs: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct EdgeFile {
    pre: String,
    post: String,
    kind: SynapseKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SpecFile {
    neurons: Vec<Neuron>,
    edges: Vec<EdgeFile>,
    #[serde(default)]
    sensory: Vec<SensoryComponent>,
    #[serde(default)]
    motor: Vec<MotorComponent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    embed_inputs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    readout_outputs: Option<usize>,
}

impl TryFrom<SpecFile> for CircuitSpec {
    type Error = NcpError;

    fn try_from(file: SpecFile) -> Result<Self> {
        let index: HashMap<&str, usize> = file
            .neurons
            .iter()
            .enumerate()
            .map(|(i, n)| (n.name.as_str(), i))
            .collect();
        let lookup = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| NcpError::InvalidSpec(vec![format!("edge references unknown neuron {name:?}")]))
        };
        let edges = file
            .edges
            .iter()
            .map(|e| {
                Ok(Edge {
                    pre: lookup(&e.pre)?,
                    post: lookup(&e.post)?,
                    kind: e.kind,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CircuitSpec {
            neurons: file.neurons,
            edges,
            sensory: file.sensory,
            motor: file.motor,
            embed_inputs: file.embed_inputs,
            readout_outputs: file.readout_outputs,
        })
    }
}

impl From<CircuitSpec> for SpecFile {
    fn from(spec: CircuitSpec) -> Self {
        let edges = spec
            .edges
            .iter()
            .map(|e| EdgeFile {
                pre: spec.neurons[e.pre].name.clone(),
                post: spec.neurons[e.post].name.clone(),
                kind: e.kind,
            })
            .collect();
        SpecFile {
            neurons: spec.neurons,
            edges,
            sensory: spec.sensory,
            motor: spec.motor,
            embed_inputs: spec.embed_inputs,
            readout_outputs: spec.readout_outputs,
        }
    }
}

impl CircuitSpec {
    pub fn neuron_count(&self) -> usize {
        self.neurons.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.neurons.iter().position(|n| n.name == name)
    }

    pub fn indices_with_role(&self, role: NeuronRole) -> Vec<usize> {
        self.neurons
            .iter()
            .enumerate()
            .filter(|(_, n)| n.role == role)
            .map(|(i, _)| i)
            .collect()
    }

    /// Fraction of absent connections relative to a fully connected graph
    /// over the same nodes (`n²` ordered pairs).
    pub fn sparsity(&self) -> f64 {
        let n = self.neurons.len() as f64;
        1.0 - self.edges.len() as f64 / (n * n)
    }

    pub fn has_bindings(&self) -> bool {
        !self.sensory.is_empty() || !self.motor.is_empty()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serialization is infallible")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// One violated invariant of a [`CircuitSpec`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecViolation {
    pub location: String,
    pub message: String,
}

impl std::fmt::Display for SpecViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

/// Collects every violated structural invariant. An empty result means the circuit is valid.
pub fn validate_spec(spec: &CircuitSpec) -> Vec<SpecViolation> {
    let mut out = Vec::new();
    let mut push = |location: String, message: String| out.push(SpecViolation { location, message });
    let n = spec.neurons.len();

    let mut seen_names = HashSet::new();
    for (i, neuron) in spec.neurons.iter().enumerate() {
        if neuron.name.is_empty() || neuron.name.contains('.') {
            push(format!("neurons[{i}]"), format!("invalid neuron name {:?}", neuron.name));
        }
        if !seen_names.insert(neuron.name.as_str()) {
            push(format!("neurons[{i}]"), format!("duplicate neuron name {:?}", neuron.name));
        }
    }

    let name = |i: usize| spec.neurons.get(i).map(|n| n.name.as_str()).unwrap_or("?");
    let mut gap_pairs = HashSet::new();
    let mut chemical_pairs = HashSet::new();
    for (k, e) in spec.edges.iter().enumerate() {
        let loc = format!("edges[{k}] {}->{} ({:?})", name(e.pre), name(e.post), e.kind);
        if e.pre >= n || e.post >= n {
            push(loc, "neuron index out of range".into());
            continue;
        }
        if e.pre == e.post {
            push(loc.clone(), "self-edge".into());
        }
        if spec.neurons[e.post].role.is_sensory() {
            push(loc.clone(), "edge terminates at a sensory neuron".into());
        }
        match e.kind {
            SynapseKind::Gap => {
                let key = (e.pre.min(e.post), e.pre.max(e.post));
                if !gap_pairs.insert(key) {
                    push(loc, "duplicate gap junction for this neuron pair".into());
                }
            }
            _ => {
                if !chemical_pairs.insert((e.pre, e.post)) {
                    push(loc, "duplicate chemical synapse for this ordered pair".into());
                }
            }
        }
    }

    let role_of = |name: &str| spec.neurons.iter().find(|n| n.name == name).map(|n| n.role);
    for (k, comp) in spec.sensory.iter().enumerate() {
        let loc = format!("sensory[{k}]");
        if let Err(e) = comp.check_range() {
            push(loc.clone(), e.to_string());
        }
        for neuron in comp.neurons() {
            match role_of(neuron) {
                None => push(loc.clone(), format!("unknown neuron {neuron:?}")),
                Some(r) if !r.is_sensory() => {
                    push(loc.clone(), format!("{neuron:?} is not a sensory neuron"))
                }
                _ => {}
            }
        }
    }
    for (k, comp) in spec.motor.iter().enumerate() {
        let loc = format!("motor[{k}]");
        if let Err(e) = comp.check_range() {
            push(loc.clone(), e.to_string());
        }
        for neuron in comp.neurons() {
            match role_of(neuron) {
                None => push(loc.clone(), format!("unknown neuron {neuron:?}")),
                Some(r) if r.is_sensory() => {
                    push(loc.clone(), format!("{neuron:?} is a sensory neuron"))
                }
                _ => {}
            }
        }
    }
    if spec.embed_inputs == Some(0) {
        push("embed_inputs".into(), "must be positive".into());
    }
    if spec.readout_outputs == Some(0) {
        push("readout_outputs".into(), "must be positive".into());
    }
    out
}

/// Rejects an invalid spec with every violation listed.
pub fn ensure_valid(spec: &CircuitSpec) -> Result<()> {
    let violations = validate_spec(spec);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(NcpError::InvalidSpec(violations.iter().map(|v| v.to_string()).collect()))
    }
}

/// The bundled tap-withdrawal circuit: 4 sensory neurons, 5 inter/command
/// neurons, 2 motor neurons and 28 synapses.
pub fn build_tw_circuit() -> CircuitSpec {
    CircuitSpec::from_json(TW_JSON).expect("bundled tap-withdrawal wiring parses")
}

/// Ordered `(pre, post)` pairs that may carry a synapse: no self-edges and
/// nothing terminating at a sensory neuron.
fn admissible_pairs(roles: &[NeuronRole]) -> Vec<(usize, usize)> {
    let n = roles.len();
    (0..n)
        .flat_map(|pre| (0..n).map(move |post| (pre, post)))
        .filter(|&(pre, post)| pre != post && !roles[post].is_sensory())
        .collect()
}

/// Random baseline circuit. The first `n_sensory` neurons are sensory, the
/// last `n_motor` are motor, the rest are interneurons. Edges are drawn
/// uniformly without replacement from the admissible ordered pairs, each with
/// a uniformly random kind.
pub fn random_circuit(
    n_neurons: usize,
    n_synapses: usize,
    n_sensory: usize,
    n_motor: usize,
    seed: u64,
) -> Result<CircuitSpec> {
    if n_sensory + n_motor > n_neurons {
        return Err(NcpError::Infeasible(format!(
            "{n_sensory} sensory + {n_motor} motor neurons exceed {n_neurons} neurons"
        )));
    }
    let roles: Vec<NeuronRole> = (0..n_neurons)
        .map(|i| {
            if i < n_sensory {
                NeuronRole::Sensory
            } else if i >= n_neurons - n_motor {
                NeuronRole::Motor
            } else {
                NeuronRole::Inter
            }
        })
        .collect();
    let mut pairs = admissible_pairs(&roles);
    if n_synapses > pairs.len() {
        return Err(NcpError::Infeasible(format!(
            "{n_synapses} synapses requested but only {} admissible ordered pairs exist",
            pairs.len()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pairs.shuffle(&mut rng);
    let mut gap_pairs = HashSet::new();
    let edges = pairs
        .into_iter()
        .take(n_synapses)
        .map(|(pre, post)| {
            let mut kind = SynapseKind::ALL[rng.gen_range(0..3)];
            if kind == SynapseKind::Gap && !gap_pairs.insert((pre.min(post), pre.max(post))) {
                // reverse pair already holds the gap junction
                kind = if rng.gen_bool(0.5) {
                    SynapseKind::Excitatory
                } else {
                    SynapseKind::Inhibitory
                };
            }
            Edge { pre, post, kind }
        })
        .collect();

    let neurons = roles
        .iter()
        .enumerate()
        .map(|(i, &role)| Neuron {
            name: format!("N{i}"),
            role,
        })
        .collect();
    Ok(CircuitSpec {
        neurons,
        edges,
        sensory: Vec::new(),
        motor: Vec::new(),
        embed_inputs: None,
        readout_outputs: None,
    })
}

/// Learnable values of one circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitParams {
    pub neurons: Vec<NeuronParams>,
    pub synapses: Vec<SynapseParams>,
    pub embed: Option<Matrix>,
    pub readout: Option<Matrix>,
}

impl CircuitParams {
    /// Uniform draw inside every bound.
    pub fn random(spec: &CircuitSpec, rng: &mut impl Rng) -> Self {
        let schema = ParamSchema::new(spec);
        let values: Vec<f64> = schema
            .entries
            .iter()
            .map(|e| rng.gen_range(e.lower..=e.upper))
            .collect();
        schema.decode(&values).expect("schema-sized vector")
    }

    pub fn in_bounds(&self) -> bool {
        self.neurons.iter().all(NeuronParams::in_bounds)
            && self.synapses.iter().all(SynapseParams::in_bounds)
            && [&self.embed, &self.readout].iter().all(|m| {
                m.as_ref().is_none_or(|m| {
                    m.data
                        .iter()
                        .all(|&x| x >= LINEAR_WEIGHT_BOUNDS.0 && x <= LINEAR_WEIGHT_BOUNDS.1)
                })
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamTarget {
    Capacitance(usize),
    LeakConductance(usize),
    LeakReversal(usize),
    Weight(usize),
    SigmoidSlope(usize),
    Embed(usize, usize),
    Readout(usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamEntry {
    pub path: String,
    pub target: ParamTarget,
    pub lower: f64,
    pub upper: f64,
}

impl ParamEntry {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn clamp(&self, x: f64) -> f64 {
        clamp_to(x, (self.lower, self.upper))
    }
}

/// Position → (entity, field, bounds) map of the flat learnable vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSchema {
    pub entries: Vec<ParamEntry>,
    n_neurons: usize,
    kinds: Vec<SynapseKind>,
    embed_shape: Option<(usize, usize)>,
    readout_shape: Option<(usize, usize)>,
}

impl ParamSchema {
    pub fn new(spec: &CircuitSpec) -> Self {
        let mut entries = Vec::new();
        let mut add = |path: String, target, (lower, upper): (f64, f64)| {
            entries.push(ParamEntry { path, target, lower, upper })
        };
        for (i, n) in spec.neurons.iter().enumerate() {
            add(
                format!("neurons.{}.membrane_capacitance", n.name),
                ParamTarget::Capacitance(i),
                CAPACITANCE_BOUNDS,
            );
            add(
                format!("neurons.{}.leak_conductance", n.name),
                ParamTarget::LeakConductance(i),
                LEAK_CONDUCTANCE_BOUNDS,
            );
            add(
                format!("neurons.{}.leak_reversal", n.name),
                ParamTarget::LeakReversal(i),
                LEAK_REVERSAL_BOUNDS,
            );
        }
        for (k, e) in spec.edges.iter().enumerate() {
            add(format!("synapses.{k}.weight"), ParamTarget::Weight(k), SYNAPSE_WEIGHT_BOUNDS);
            if e.kind.is_chemical() {
                add(
                    format!("synapses.{k}.sigmoid_slope"),
                    ParamTarget::SigmoidSlope(k),
                    SIGMOID_SLOPE_BOUNDS,
                );
            }
        }
        let embed_shape = spec.embed_inputs.map(|cols| (spec.sensory.len(), cols));
        if let Some((rows, cols)) = embed_shape {
            for r in 0..rows {
                for c in 0..cols {
                    add(format!("embed.{r}.{c}"), ParamTarget::Embed(r, c), LINEAR_WEIGHT_BOUNDS);
                }
            }
        }
        let readout_shape = spec.readout_outputs.map(|rows| (rows, spec.motor.len()));
        if let Some((rows, cols)) = readout_shape {
            for r in 0..rows {
                for c in 0..cols {
                    add(format!("readout.{r}.{c}"), ParamTarget::Readout(r, c), LINEAR_WEIGHT_BOUNDS);
                }
            }
        }
        ParamSchema {
            entries,
            n_neurons: spec.neurons.len(),
            kinds: spec.edges.iter().map(|e| e.kind).collect(),
            embed_shape,
            readout_shape,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn bounds(&self) -> Vec<(f64, f64)> {
        self.entries.iter().map(|e| (e.lower, e.upper)).collect()
    }

    /// Projects every coordinate into its box.
    pub fn clamp(&self, values: &mut [f64]) {
        for (x, e) in values.iter_mut().zip(&self.entries) {
            *x = e.clamp(*x);
        }
    }

    pub fn encode(&self, params: &CircuitParams) -> Result<Vec<f64>> {
        if params.neurons.len() != self.n_neurons || params.synapses.len() != self.kinds.len() {
            return Err(NcpError::Structure(
                "parameters do not match the schema's circuit".into(),
            ));
        }
        let shape_of = |m: &Option<Matrix>| m.as_ref().map(|m| (m.rows, m.cols));
        if shape_of(&params.embed) != self.embed_shape || shape_of(&params.readout) != self.readout_shape {
            return Err(NcpError::Structure("embed/readout shapes do not match the schema".into()));
        }
        Ok(self
            .entries
            .iter()
            .map(|e| match e.target {
                ParamTarget::Capacitance(i) => params.neurons[i].membrane_capacitance,
                ParamTarget::LeakConductance(i) => params.neurons[i].leak_conductance,
                ParamTarget::LeakReversal(i) => params.neurons[i].leak_reversal,
                ParamTarget::Weight(k) => params.synapses[k].weight,
                ParamTarget::SigmoidSlope(k) => params.synapses[k].sigmoid_slope,
                ParamTarget::Embed(r, c) => params.embed.as_ref().unwrap().get(r, c),
                ParamTarget::Readout(r, c) => params.readout.as_ref().unwrap().get(r, c),
            })
            .collect())
    }

    /// Builds parameters from a flat vector, clamping every scalar into its bound.
    pub fn decode(&self, values: &[f64]) -> Result<CircuitParams> {
        if values.len() != self.entries.len() {
            return Err(NcpError::ParamLength {
                expected: self.entries.len(),
                got: values.len(),
            });
        }
        let mut neurons = vec![
            NeuronParams {
                membrane_capacitance: CAPACITANCE_BOUNDS.0,
                leak_conductance: LEAK_CONDUCTANCE_BOUNDS.0,
                leak_reversal: LEAK_REVERSAL_BOUNDS.0,
            };
            self.n_neurons
        ];
        let mut synapses: Vec<SynapseParams> = self
            .kinds
            .iter()
            .map(|&kind| SynapseParams {
                kind,
                weight: 0.0,
                // unused by gap junctions; kept at the lower bound so params stay in-bounds
                sigmoid_slope: SIGMOID_SLOPE_BOUNDS.0,
            })
            .collect();
        let mut embed = self.embed_shape.map(|(r, c)| Matrix::zeros(r, c));
        let mut readout = self.readout_shape.map(|(r, c)| Matrix::zeros(r, c));
        for (e, &raw) in self.entries.iter().zip(values) {
            let x = e.clamp(raw);
            match e.target {
                ParamTarget::Capacitance(i) => neurons[i].membrane_capacitance = x,
                ParamTarget::LeakConductance(i) => neurons[i].leak_conductance = x,
                ParamTarget::LeakReversal(i) => neurons[i].leak_reversal = x,
                ParamTarget::Weight(k) => synapses[k].weight = x,
                ParamTarget::SigmoidSlope(k) => synapses[k].sigmoid_slope = x,
                ParamTarget::Embed(r, c) => embed.as_mut().unwrap().set(r, c, x),
                ParamTarget::Readout(r, c) => readout.as_mut().unwrap().set(r, c, x),
            }
        }
        Ok(CircuitParams {
            neurons,
            synapses,
            embed,
            readout,
        })
    }

    /// Flat JSON map keyed by schema path.
    pub fn to_json_map(&self, values: &[f64]) -> Result<BTreeMap<String, f64>> {
        if values.len() != self.entries.len() {
            return Err(NcpError::ParamLength {
                expected: self.entries.len(),
                got: values.len(),
            });
        }
        Ok(self
            .entries
            .iter()
            .zip(values)
            .map(|(e, &v)| (e.path.clone(), v))
            .collect())
    }

    pub fn from_json_map(&self, map: &BTreeMap<String, f64>) -> Result<Vec<f64>> {
        let known: HashSet<&str> = self.entries.iter().map(|e| e.path.as_str()).collect();
        if let Some(extra) = map.keys().find(|k| !known.contains(k.as_str())) {
            return Err(NcpError::ParamFile(format!("unknown parameter {extra:?}")));
        }
        self.entries
            .iter()
            .map(|e| {
                map.get(&e.path)
                    .copied()
                    .ok_or_else(|| NcpError::ParamFile(format!("missing parameter {:?}", e.path)))
            })
            .collect()
    }
}

/// Flat learnable vector tied to its schema.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    pub values: Vec<f64>,
    pub schema: Arc<ParamSchema>,
}

impl ParamVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn decode(&self) -> Result<CircuitParams> {
        self.schema.decode(&self.values)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.schema.to_json_map(&self.values)?)?)
    }

    pub fn from_json(text: &str, spec: &CircuitSpec) -> Result<Self> {
        let schema = Arc::new(ParamSchema::new(spec));
        let map: BTreeMap<String, f64> = serde_json::from_str(text)?;
        let values = schema.from_json_map(&map)?;
        Ok(ParamVector { values, schema })
    }

    pub fn load(path: impl AsRef<Path>, spec: &CircuitSpec) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?, spec)
    }
}

pub fn encode_params(spec: &CircuitSpec, params: &CircuitParams) -> Result<ParamVector> {
    let schema = Arc::new(ParamSchema::new(spec));
    let values = schema.encode(params)?;
    Ok(ParamVector { values, schema })
}

pub fn decode_params(values: &[f64], spec: &CircuitSpec) -> Result<CircuitParams> {
    ParamSchema::new(spec).decode(values)
}
