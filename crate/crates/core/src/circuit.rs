//! Membrane and synapse dynamics plus the fixed-timestep semi-implicit solver.
//!
//! Units throughout: potentials in mV, conductances in S, capacitance in F,
//! time in seconds, currents in S·mV.
//!
//! A neuron `i` obeys
//!
//! ```text
//! C_i dV_i/dt = wL_i (EL_i - V_i)
//!             + sum_gap  w_ij (V_j - V_i)
//!             + sum_chem w_ij g(V_j) (ER_ij - V_i)
//! g(V) = 1 / (1 + exp(-slope (V - midpoint)))
//! ```
//!
//! [`Integrator::advance`] freezes every presynaptic term at time `t` and solves
//! the remaining linear dependence on `V_i(t + dt)` exactly, so the new
//! potential is a convex combination of the old potential, the leak reversal,
//! the synaptic reversals and the gap-coupled neighbours. The update is stable
//! for any `dt > 0`.

use serde::{Deserialize, Serialize};

use crate::error::{NcpError, Result};
use crate::wiring::{CircuitParams, CircuitSpec};

/// Half-activation potential of every chemical synapse. Not learnable.
pub const SYNAPSE_MIDPOINT_MV: f64 = -40.0;
pub const EXCITATORY_REVERSAL_MV: f64 = 0.0;
pub const INHIBITORY_REVERSAL_MV: f64 = -90.0;

pub const CAPACITANCE_BOUNDS: (f64, f64) = (1e-3, 1.0);
pub const LEAK_CONDUCTANCE_BOUNDS: (f64, f64) = (0.05, 5.0);
pub const LEAK_REVERSAL_BOUNDS: (f64, f64) = (-90.0, 0.0);
pub const SYNAPSE_WEIGHT_BOUNDS: (f64, f64) = (0.0, 3.0);
pub const SIGMOID_SLOPE_BOUNDS: (f64, f64) = (0.05, 0.5);

/// Default sub-step length of the ODE solver.
pub const DEFAULT_ODE_DT: f64 = 0.01;
/// Default number of solver sub-steps per environment step.
pub const DEFAULT_ODE_SUBSTEPS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SynapseKind {
    Excitatory,
    Inhibitory,
    Gap,
}

impl SynapseKind {
    /// Reversal potential of a chemical synapse; gap junctions have none.
    pub fn reversal(self) -> Option<f64> {
        match self {
            SynapseKind::Excitatory => Some(EXCITATORY_REVERSAL_MV),
            SynapseKind::Inhibitory => Some(INHIBITORY_REVERSAL_MV),
            SynapseKind::Gap => None,
        }
    }

    pub fn is_chemical(self) -> bool {
        !matches!(self, SynapseKind::Gap)
    }

    pub const ALL: [SynapseKind; 3] = [
        SynapseKind::Excitatory,
        SynapseKind::Inhibitory,
        SynapseKind::Gap,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeuronParams {
    pub membrane_capacitance: f64,
    pub leak_conductance: f64,
    pub leak_reversal: f64,
}

impl NeuronParams {
    /// Returns a copy with every field projected into its admissible box.
    pub fn clamped(self) -> Self {
        NeuronParams {
            membrane_capacitance: clamp_to(self.membrane_capacitance, CAPACITANCE_BOUNDS),
            leak_conductance: clamp_to(self.leak_conductance, LEAK_CONDUCTANCE_BOUNDS),
            leak_reversal: clamp_to(self.leak_reversal, LEAK_REVERSAL_BOUNDS),
        }
    }

    pub fn in_bounds(&self) -> bool {
        within(self.membrane_capacitance, CAPACITANCE_BOUNDS)
            && within(self.leak_conductance, LEAK_CONDUCTANCE_BOUNDS)
            && within(self.leak_reversal, LEAK_REVERSAL_BOUNDS)
    }

    /// Relaxation time of the isolated neuron, `C / wL`.
    pub fn resting_time_constant(&self) -> f64 {
        self.membrane_capacitance / self.leak_conductance
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynapseParams {
    pub kind: SynapseKind,
    pub weight: f64,
    /// Only meaningful for chemical synapses.
    pub sigmoid_slope: f64,
}

impl SynapseParams {
    pub fn midpoint(&self) -> f64 {
        SYNAPSE_MIDPOINT_MV
    }

    pub fn clamped(self) -> Self {
        SynapseParams {
            kind: self.kind,
            weight: clamp_to(self.weight, SYNAPSE_WEIGHT_BOUNDS),
            sigmoid_slope: clamp_to(self.sigmoid_slope, SIGMOID_SLOPE_BOUNDS),
        }
    }

    pub fn in_bounds(&self) -> bool {
        within(self.weight, SYNAPSE_WEIGHT_BOUNDS)
            && (!self.kind.is_chemical() || within(self.sigmoid_slope, SIGMOID_SLOPE_BOUNDS))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitState {
    pub potentials: Vec<f64>,
    pub time: f64,
}

impl CircuitState {
    /// Rest state: every neuron at its leak reversal, `t = 0`.
    pub fn at_rest(params: &CircuitParams) -> Self {
        CircuitState {
            potentials: params.neurons.iter().map(|n| n.leak_reversal).collect(),
            time: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.potentials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.potentials.is_empty()
    }
}

pub(crate) fn clamp_to(x: f64, (lo, hi): (f64, f64)) -> f64 {
    if x.is_nan() {
        lo
    } else {
        x.clamp(lo, hi)
    }
}

fn within(x: f64, (lo, hi): (f64, f64)) -> bool {
    x >= lo && x <= hi
}

#[inline]
fn sigmoid(v_pre: f64, slope: f64, midpoint: f64) -> f64 {
    1.0 / (1.0 + (-slope * (v_pre - midpoint)).exp())
}

/// Fraction of open channels of a chemical synapse given the presynaptic potential.
pub fn synapse_activation(v_pre: f64, slope: f64, midpoint: f64) -> Result<f64> {
    if !v_pre.is_finite() || !slope.is_finite() || !midpoint.is_finite() {
        return Err(NcpError::Domain(format!(
            "synapse activation needs finite inputs (v_pre={v_pre}, slope={slope}, midpoint={midpoint})"
        )));
    }
    if slope <= 0.0 {
        return Err(NcpError::Domain(format!("sigmoid slope must be positive, got {slope}")));
    }
    Ok(sigmoid(v_pre, slope, midpoint))
}

pub fn chemical_current(v_post: f64, activation: f64, weight: f64, reversal: f64) -> f64 {
    weight * (reversal - v_post) * activation
}

pub fn gap_current(v_post: f64, v_pre: f64, weight: f64) -> f64 {
    weight * (v_pre - v_post)
}

pub fn leak_current(v: f64, leak_conductance: f64, leak_reversal: f64) -> f64 {
    leak_conductance * (leak_reversal - v)
}

/// Semi-implicit solver with reusable scratch buffers.
///
/// One integrator per rollout; spec and params are borrowed per call so they
/// can be shared between concurrently running rollouts.
#[derive(Debug, Default, Clone)]
pub struct Integrator {
    numerator: Vec<f64>,
    denominator: Vec<f64>,
}

impl Integrator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Advances `state` by `dt` in place.
    ///
    /// `clamped` holds `(neuron index, potential)` pairs; each must name a
    /// sensory neuron. Clamped neurons are set before the presynaptic terms are
    /// read and hold that value exactly afterwards.
    pub fn advance(
        &mut self,
        spec: &CircuitSpec,
        params: &CircuitParams,
        state: &mut CircuitState,
        clamped: &[(usize, f64)],
        dt: f64,
    ) -> Result<()> {
        check_shapes(spec, params, state)?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(NcpError::Domain(format!("time step must be positive, got {dt}")));
        }
        for &(idx, v) in clamped {
            match spec.neurons.get(idx) {
                Some(n) if n.role.is_sensory() => {}
                Some(n) => {
                    return Err(NcpError::Structure(format!(
                        "clamped input targets non-sensory neuron {}",
                        n.name
                    )))
                }
                None => {
                    return Err(NcpError::Structure(format!(
                        "clamped input index {idx} out of range"
                    )))
                }
            }
            if !v.is_finite() {
                return Err(NcpError::Domain(format!("clamped potential must be finite, got {v}")));
            }
        }
        self.advance_unchecked(spec, params, state, clamped, dt);
        Ok(())
    }

    pub(crate) fn advance_unchecked(
        &mut self,
        spec: &CircuitSpec,
        params: &CircuitParams,
        state: &mut CircuitState,
        clamped: &[(usize, f64)],
        dt: f64,
    ) {
        let n = state.potentials.len();
        for &(idx, v) in clamped {
            state.potentials[idx] = v;
        }
        let v = &state.potentials;

        self.numerator.clear();
        self.denominator.clear();
        self.numerator.reserve(n);
        self.denominator.reserve(n);
        for (i, np) in params.neurons.iter().enumerate() {
            let cap = np.membrane_capacitance / dt;
            self.numerator
                .push(v[i] * cap + np.leak_conductance * np.leak_reversal);
            self.denominator.push(cap + np.leak_conductance);
        }

        for (edge, sp) in spec.edges.iter().zip(&params.synapses) {
            let (pre, post) = (edge.pre, edge.post);
            match edge.kind {
                SynapseKind::Gap => {
                    let w = sp.weight;
                    self.numerator[post] += w * v[pre];
                    self.denominator[post] += w;
                    self.numerator[pre] += w * v[post];
                    self.denominator[pre] += w;
                }
                kind => {
                    let reversal = if kind == SynapseKind::Excitatory {
                        EXCITATORY_REVERSAL_MV
                    } else {
                        INHIBITORY_REVERSAL_MV
                    };
                    let g = sp.weight * sigmoid(v[pre], sp.sigmoid_slope, SYNAPSE_MIDPOINT_MV);
                    self.numerator[post] += g * reversal;
                    self.denominator[post] += g;
                }
            }
        }

        for i in 0..n {
            state.potentials[i] = self.numerator[i] / self.denominator[i];
        }
        for &(idx, v) in clamped {
            state.potentials[idx] = v;
        }
        state.time += dt;
    }
}

pub(crate) fn check_shapes(
    spec: &CircuitSpec,
    params: &CircuitParams,
    state: &CircuitState,
) -> Result<()> {
    if params.neurons.len() != spec.neurons.len() {
        return Err(NcpError::Structure(format!(
            "params carry {} neurons, spec has {}",
            params.neurons.len(),
            spec.neurons.len()
        )));
    }
    if params.synapses.len() != spec.edges.len() {
        return Err(NcpError::Structure(format!(
            "params carry {} synapses, spec has {}",
            params.synapses.len(),
            spec.edges.len()
        )));
    }
    if state.potentials.len() != spec.neurons.len() {
        return Err(NcpError::Structure(format!(
            "state has {} potentials, spec has {} neurons",
            state.potentials.len(),
            spec.neurons.len()
        )));
    }
    Ok(())
}

/// Single solver step returning the new state.
pub fn step(
    spec: &CircuitSpec,
    params: &CircuitParams,
    state: &CircuitState,
    clamped: &[(usize, f64)],
    dt: f64,
) -> Result<CircuitState> {
    let mut next = state.clone();
    Integrator::new().advance(spec, params, &mut next, clamped, dt)?;
    Ok(next)
}

/// Right-hand side `dV/dt` of the continuous dynamics, for reference integrators.
pub fn derivative(spec: &CircuitSpec, params: &CircuitParams, potentials: &[f64]) -> Vec<f64> {
    let mut current: Vec<f64> = params
        .neurons
        .iter()
        .zip(potentials)
        .map(|(np, &v)| leak_current(v, np.leak_conductance, np.leak_reversal))
        .collect();
    for (edge, sp) in spec.edges.iter().zip(&params.synapses) {
        let (pre, post) = (edge.pre, edge.post);
        match edge.kind.reversal() {
            None => {
                current[post] += gap_current(potentials[post], potentials[pre], sp.weight);
                current[pre] += gap_current(potentials[pre], potentials[post], sp.weight);
            }
            Some(reversal) => {
                let g = sigmoid(potentials[pre], sp.sigmoid_slope, SYNAPSE_MIDPOINT_MV);
                current[post] += chemical_current(potentials[post], g, sp.weight, reversal);
            }
        }
    }
    current
        .iter()
        .zip(&params.neurons)
        .map(|(i, np)| i / np.membrane_capacitance)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn activation_examples() {
        assert_relative_eq!(synapse_activation(-40.0, 0.1, -40.0).unwrap(), 0.5);
        let sat = synapse_activation(1e6, 0.05, -40.0).unwrap();
        assert_relative_eq!(sat, 1.0);
        let expected = 1.0 / (1.0 + 2f64.exp());
        assert_relative_eq!(
            synapse_activation(-60.0, 0.1, -40.0).unwrap(),
            expected,
            epsilon = 1e-15
        );
        assert_relative_eq!(expected, 0.11920, epsilon = 1e-5);
    }

    #[test]
    fn activation_rejects_non_finite() {
        assert!(synapse_activation(f64::NAN, 0.1, -40.0).is_err());
        assert!(synapse_activation(-40.0, f64::INFINITY, -40.0).is_err());
        assert!(synapse_activation(-40.0, 0.0, -40.0).is_err());
    }

    #[test]
    fn current_examples() {
        assert_eq!(chemical_current(0.0, 0.5, 1.0, 0.0), 0.0);
        assert_relative_eq!(chemical_current(-90.0, 1.0, 2.0, 0.0), 180.0);
        assert_relative_eq!(chemical_current(-20.0, 0.5, 1.0, -90.0), -35.0);

        assert_eq!(gap_current(-50.0, -50.0, 3.0), 0.0);
        assert_relative_eq!(gap_current(-70.0, -20.0, 1.0), 50.0);
        assert_relative_eq!(gap_current(-20.0, -70.0, 1.0), -50.0);

        assert_eq!(leak_current(-70.0, 0.5, -70.0), 0.0);
        assert_relative_eq!(leak_current(0.0, 1.0, -90.0), -90.0);
        assert_relative_eq!(leak_current(-90.0, 2.0, -45.0), 90.0);
    }

    #[test]
    fn sigmoid_slope_at_midpoint() {
        for &slope in &[0.05, 0.1, 0.3, 0.5] {
            let h = 1e-5;
            let fd = (sigmoid(-40.0 + h, slope, -40.0) - sigmoid(-40.0 - h, slope, -40.0)) / (2.0 * h);
            assert!((fd - slope / 4.0).abs() < 1e-9, "slope {slope}: fd {fd}");
        }
    }

    #[test]
    fn clamping_nan_goes_to_lower_bound() {
        let np = NeuronParams {
            membrane_capacitance: f64::NAN,
            leak_conductance: 10.0,
            leak_reversal: -200.0,
        }
        .clamped();
        assert_eq!(np.membrane_capacitance, 1e-3);
        assert_eq!(np.leak_conductance, 5.0);
        assert_eq!(np.leak_reversal, -90.0);
    }
}
