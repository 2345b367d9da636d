//! Sensory encoders, motor decoders and the optional linear embedding/readout.
//!
//! A sensory component maps one environment variable onto a pair of neurons:
//! the positive neuron tracks `x ∈ [0, x_max]`, the negative neuron tracks
//! `x ∈ [x_min, 0)`, both onto `[-70, -20]` mV. A motor component does the
//! reverse, `y = y_p + y_n`.

use serde::{Deserialize, Serialize};

use crate::error::{NcpError, Result};
use crate::wiring::{CircuitSpec, NeuronRole};

pub const REST_MV: f64 = -70.0;
pub const ACTIVE_MV: f64 = -20.0;
const SPAN_MV: f64 = ACTIVE_MV - REST_MV;

/// Bounds of every embed/readout weight.
pub const LINEAR_WEIGHT_BOUNDS: (f64, f64) = (-3.0, 3.0);

fn check_signed_range(range: [f64; 2], what: &str) -> Result<()> {
    let [lo, hi] = range;
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(NcpError::Domain(format!("{what} range must be finite, got {range:?}")));
    }
    if lo >= hi {
        return Err(NcpError::Domain(format!("degenerate {what} range {range:?}")));
    }
    if lo > 0.0 || hi <= 0.0 {
        return Err(NcpError::Domain(format!(
            "{what} range {range:?} must contain 0 with a positive upper end"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensoryComponent {
    /// `[x_min, x_max]`; `x_min = 0` for nonnegative variables.
    pub range: [f64; 2],
    pub positive: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub negative: Option<String>,
}

impl SensoryComponent {
    pub fn new(range: [f64; 2], positive: impl Into<String>, negative: Option<String>) -> Result<Self> {
        let comp = SensoryComponent {
            range,
            positive: positive.into(),
            negative,
        };
        comp.check_range()?;
        Ok(comp)
    }

    pub fn check_range(&self) -> Result<()> {
        check_signed_range(self.range, "sensory")
    }

    pub fn neurons(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.positive.as_str()).chain(self.negative.as_deref())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotorComponent {
    /// `[y_min, y_max]`.
    pub range: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positive: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub negative: Option<String>,
}

impl MotorComponent {
    pub fn new(range: [f64; 2], positive: Option<String>, negative: Option<String>) -> Result<Self> {
        let comp = MotorComponent {
            range,
            positive,
            negative,
        };
        comp.check_range()?;
        Ok(comp)
    }

    pub fn check_range(&self) -> Result<()> {
        let [lo, hi] = self.range;
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi || lo > 0.0 || hi < 0.0 {
            return Err(NcpError::Domain(format!(
                "motor range {:?} must be finite, non-degenerate and contain 0",
                self.range
            )));
        }
        if self.positive.is_none() && self.negative.is_none() {
            return Err(NcpError::Domain("motor component binds no neuron".into()));
        }
        Ok(())
    }

    pub fn neurons(&self) -> impl Iterator<Item = &str> {
        self.positive.as_deref().into_iter().chain(self.negative.as_deref())
    }
}

/// Maps a variable onto `(v_pos, v_neg)` potentials; out-of-range input saturates.
pub fn encode(x: f64, comp: &SensoryComponent) -> (f64, f64) {
    let [x_min, x_max] = comp.range;
    if x >= 0.0 {
        (REST_MV + SPAN_MV * (x / x_max).clamp(0.0, 1.0), REST_MV)
    } else if x < 0.0 && x_min < 0.0 {
        (REST_MV, REST_MV + SPAN_MV * (x / x_min).clamp(0.0, 1.0))
    } else {
        // negative input on a nonnegative component, or NaN
        (REST_MV, REST_MV)
    }
}

/// Maps motor potentials back to an action value inside the component range.
///
/// An unbound neuron of the pair should be passed as [`REST_MV`].
pub fn decode(v_pos: f64, v_neg: f64, comp: &MotorComponent) -> f64 {
    let [y_min, y_max] = comp.range;
    let activation = |v: f64| ((v - REST_MV) / SPAN_MV).clamp(0.0, 1.0);
    let y = y_max * activation(v_pos) + y_min * activation(v_neg);
    y.clamp(y_min, y_max)
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(NcpError::Structure("ragged matrix rows".into()));
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: f64) {
        self.data[r * self.cols + c] = value;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(NcpError::Structure(format!(
                "matrix has {} columns, vector has {} entries",
                self.cols,
                x.len()
            )));
        }
        Ok(self
            .data
            .chunks_exact(self.cols.max(1))
            .take(self.rows)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }
}

/// Observation vector → sensory variables.
pub fn embed(obs: &[f64], input_matrix: &Matrix) -> Result<Vec<f64>> {
    input_matrix.mul_vec(obs)
}

/// Decoded motor variables → action vector.
pub fn readout(motor_values: &[f64], output_matrix: &Matrix) -> Result<Vec<f64>> {
    output_matrix.mul_vec(motor_values)
}

/// One environment variable to bind: its range and whether it gets a
/// positive/negative neuron pair or a single positive neuron.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariableSlot {
    pub range: [f64; 2],
    pub paired: bool,
}

impl VariableSlot {
    pub fn paired(lo: f64, hi: f64) -> Self {
        VariableSlot { range: [lo, hi], paired: true }
    }

    pub fn single(hi: f64) -> Self {
        VariableSlot { range: [0.0, hi], paired: false }
    }
}

/// Generic binding rule used when a circuit file carries no bindings.
///
/// Sensory neurons are taken in declaration order: paired variable `k` of `m`
/// gets `(sensory[k], sensory[k + m])`, single variables take the following
/// neurons. Motor variables follow the same rule over motor neurons; once
/// motor neurons run out, single motor variables bind to command neurons
/// (last first), then to interneurons (last first).
pub fn default_bindings(
    spec: &CircuitSpec,
    sensory_vars: &[VariableSlot],
    motor_vars: &[VariableSlot],
) -> Result<(Vec<SensoryComponent>, Vec<MotorComponent>)> {
    let name = |i: usize| spec.neurons[i].name.clone();

    let sensors = spec.indices_with_role(NeuronRole::Sensory);
    let n_paired = sensory_vars.iter().filter(|s| s.paired).count();
    let needed = 2 * n_paired + (sensory_vars.len() - n_paired);
    if needed > sensors.len() {
        return Err(NcpError::Structure(format!(
            "binding needs {needed} sensory neurons, circuit has {}",
            sensors.len()
        )));
    }
    let (mut k, mut next_single) = (0, 2 * n_paired);
    let mut sensory = Vec::with_capacity(sensory_vars.len());
    for slot in sensory_vars {
        let comp = if slot.paired {
            let c = SensoryComponent::new(slot.range, name(sensors[k]), Some(name(sensors[k + n_paired])))?;
            k += 1;
            c
        } else {
            let c = SensoryComponent::new(slot.range, name(sensors[next_single]), None)?;
            next_single += 1;
            c
        };
        sensory.push(comp);
    }

    let motors = spec.indices_with_role(NeuronRole::Motor);
    let m_paired = motor_vars.iter().filter(|s| s.paired).count();
    if 2 * m_paired > motors.len() {
        return Err(NcpError::Structure(format!(
            "binding needs {} motor neurons for paired actions, circuit has {}",
            2 * m_paired,
            motors.len()
        )));
    }
    let mut overflow: Vec<usize> = motors[2 * m_paired..].to_vec();
    overflow.extend(spec.indices_with_role(NeuronRole::Command).into_iter().rev());
    overflow.extend(spec.indices_with_role(NeuronRole::Inter).into_iter().rev());
    let mut overflow = overflow.into_iter();
    let mut k = 0;
    let mut motor = Vec::with_capacity(motor_vars.len());
    for slot in motor_vars {
        let comp = if slot.paired {
            let c = MotorComponent::new(slot.range, Some(name(motors[k])), Some(name(motors[k + m_paired])))?;
            k += 1;
            c
        } else {
            let idx = overflow
                .next()
                .ok_or_else(|| NcpError::Structure("not enough neurons to bind every action".into()))?;
            MotorComponent::new(slot.range, Some(name(idx)), None)?
        };
        motor.push(comp);
    }
    Ok((sensory, motor))
}
