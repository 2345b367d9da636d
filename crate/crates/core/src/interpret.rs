//! Quantitative interpretation of recorded circuit dynamics.
//!
//! * Contribution classification: the slope angles between consecutive
//!   points of a `(source, target)` potential curve are histogrammed; a source
//!   whose positive slopes outnumber the negative ones at least two to one is
//!   a positive contributor, the mirror case a negative one, anything else
//!   switches phase.
//! * Adaptive time constants: `τ_i(t) = C_i / (wL_i + Σ chemical w·g(V_pre) + Σ gap w)`.
//! * Activity projection: min–max normalised potentials paired with the pose.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::circuit::{SynapseKind, SYNAPSE_MIDPOINT_MV};
use crate::error::{NcpError, Result};
use crate::trace::RolloutTrace;
use crate::trainer::fmt_f64;
use crate::wiring::{CircuitParams, CircuitSpec};

/// Default histogram bin width: 5 degrees.
pub const DEFAULT_BIN_WIDTH: f64 = PI / 36.0;
/// Potential changes below this (mV) count as no change.
pub const DEFAULT_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContributionClass {
    Positive,
    Negative,
    PhaseSwitching,
}

impl std::fmt::Display for ContributionClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ContributionClass::Positive => "positive",
            ContributionClass::Negative => "negative",
            ContributionClass::PhaseSwitching => "phase-switching",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeAngles {
    pub angles: Vec<f64>,
    /// Steps where both deltas were below tolerance.
    pub skipped: usize,
}

/// Angles of the segments between consecutive `(src, dst)` points, folded into `[−π/2, π/2]`.
pub fn slope_angles(src: &[f64], dst: &[f64], epsilon: f64) -> Result<SlopeAngles> {
    if src.len() != dst.len() {
        return Err(NcpError::Trace(format!(
            "series lengths differ: {} vs {}",
            src.len(),
            dst.len()
        )));
    }
    if src.len() < 2 {
        return Err(NcpError::Trace("need at least two samples".into()));
    }
    let mut angles = Vec::with_capacity(src.len() - 1);
    let mut skipped = 0;
    for k in 1..src.len() {
        let dx = src[k] - src[k - 1];
        let dy = dst[k] - dst[k - 1];
        if dx.abs() < epsilon && dy.abs() < epsilon {
            skipped += 1;
            continue;
        }
        let mut a = dy.atan2(dx);
        if a > FRAC_PI_2 {
            a -= PI;
        } else if a < -FRAC_PI_2 {
            a += PI;
        }
        angles.push(a);
    }
    Ok(SlopeAngles { angles, skipped })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `counts.len() + 1` edges spanning `[−π/2, π/2]`.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub histogram: Histogram,
    pub positive: usize,
    pub negative: usize,
    pub verdict: ContributionClass,
}

pub fn verdict(positive: usize, negative: usize) -> ContributionClass {
    if positive == 0 && negative == 0 {
        ContributionClass::PhaseSwitching
    } else if positive >= 2 * negative {
        ContributionClass::Positive
    } else if negative >= 2 * positive {
        ContributionClass::Negative
    } else {
        ContributionClass::PhaseSwitching
    }
}

/// Histograms the angles with bin width `bin_width` and applies the 2:1 sign-dominance rule.
pub fn classify_contribution(angles: &[f64], bin_width: f64) -> Result<Classification> {
    if angles.is_empty() {
        return Err(NcpError::Trace("empty angle set".into()));
    }
    let n_bins = (PI / bin_width).round();
    if bin_width.is_nan() || bin_width <= 0.0 || n_bins < 1.0 || (n_bins * bin_width - PI).abs() > 1e-9 {
        return Err(NcpError::Domain(format!("bin width {bin_width} does not divide pi")));
    }
    let n_bins = n_bins as usize;
    let edges = (0..=n_bins).map(|i| -FRAC_PI_2 + i as f64 * PI / n_bins as f64).collect();
    let mut counts = vec![0; n_bins];
    let (mut positive, mut negative) = (0, 0);
    for &a in angles {
        let bin = (((a + FRAC_PI_2) / bin_width).floor().max(0.0) as usize).min(n_bins - 1);
        counts[bin] += 1;
        if a > 0.0 {
            positive += 1;
        } else if a < 0.0 {
            negative += 1;
        }
    }
    Ok(Classification {
        histogram: Histogram { edges, counts },
        positive,
        negative,
        verdict: verdict(positive, negative),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairContribution {
    pub source: String,
    pub target: String,
    pub skipped: usize,
    #[serde(flatten)]
    pub classification: Classification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContributionReport {
    pub target: String,
    pub bin_width: f64,
    pub pairs: Vec<PairContribution>,
}

impl ContributionReport {
    pub fn verdict_of(&self, source: &str) -> Option<ContributionClass> {
        self.pairs
            .iter()
            .find(|p| p.source == source)
            .map(|p| p.classification.verdict)
    }

    /// One row per source: `source,target,positive,negative,skipped,verdict`.
    pub fn write_verdicts_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["source", "target", "positive", "negative", "skipped", "verdict"])?;
        for p in &self.pairs {
            let c = &p.classification;
            w.write_record([
                p.source.clone(),
                p.target.clone(),
                c.positive.to_string(),
                c.negative.to_string(),
                p.skipped.to_string(),
                c.verdict.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Long format: `source,target,bin_lower,bin_upper,count`.
    pub fn write_histograms_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["source", "target", "bin_lower", "bin_upper", "count"])?;
        for p in &self.pairs {
            let h = &p.classification.histogram;
            for (i, count) in h.counts.iter().enumerate() {
                w.write_record([
                    p.source.clone(),
                    p.target.clone(),
                    fmt_f64(h.edges[i]),
                    fmt_f64(h.edges[i + 1]),
                    count.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Classifies every other neuron of the trace against `target`.
pub fn contribution_report(
    trace: &RolloutTrace,
    target: &str,
    bin_width: f64,
    epsilon: f64,
) -> Result<ContributionReport> {
    trace.validate()?;
    let t = trace
        .neuron_index(target)
        .ok_or_else(|| NcpError::Trace(format!("trace has no neuron {target:?}")))?;
    let dst = trace.series(t);
    let mut pairs = Vec::new();
    for (s, name) in trace.neuron_names.iter().enumerate() {
        if s == t {
            continue;
        }
        let slopes = slope_angles(&trace.series(s), &dst, epsilon)?;
        let classification = if slopes.angles.is_empty() {
            // a frozen pair carries no slope information
            classify_contribution(&[0.0], bin_width).map(|mut c| {
                c.histogram.counts.iter_mut().for_each(|x| *x = 0);
                c
            })?
        } else {
            classify_contribution(&slopes.angles, bin_width)?
        };
        pairs.push(PairContribution {
            source: name.clone(),
            target: target.to_string(),
            skipped: slopes.skipped,
            classification,
        });
    }
    Ok(ContributionReport {
        target: target.to_string(),
        bin_width,
        pairs,
    })
}

/// Instantaneous time constant of every neuron for one potential vector.
pub fn instantaneous_time_constants(spec: &CircuitSpec, params: &CircuitParams, potentials: &[f64]) -> Vec<f64> {
    let mut conductance: Vec<f64> = params.neurons.iter().map(|n| n.leak_conductance).collect();
    for (e, sp) in spec.edges.iter().zip(&params.synapses) {
        match e.kind {
            SynapseKind::Gap => {
                conductance[e.post] += sp.weight;
                conductance[e.pre] += sp.weight;
            }
            _ => {
                let g = 1.0 / (1.0 + (-sp.sigmoid_slope * (potentials[e.pre] - SYNAPSE_MIDPOINT_MV)).exp());
                conductance[e.post] += sp.weight * g;
            }
        }
    }
    params
        .neurons
        .iter()
        .zip(&conductance)
        .map(|(n, g)| n.membrane_capacitance / g)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeConstantRange {
    pub tau_min: f64,
    pub tau_max: f64,
}

/// Per-neuron `(τ_min, τ_max)` over every recorded step.
pub fn time_constant_range(
    trace: &RolloutTrace,
    spec: &CircuitSpec,
    params: &CircuitParams,
) -> Result<Vec<TimeConstantRange>> {
    trace.validate()?;
    let names: Vec<&str> = spec.neurons.iter().map(|n| n.name.as_str()).collect();
    if trace.neuron_names.iter().map(String::as_str).ne(names.iter().copied())
        || params.neurons.len() != names.len()
        || params.synapses.len() != spec.edges.len()
    {
        return Err(NcpError::Structure("trace, spec and params describe different circuits".into()));
    }
    if trace.is_empty() {
        return Err(NcpError::Trace("empty trace".into()));
    }
    let mut ranges = vec![
        TimeConstantRange {
            tau_min: f64::INFINITY,
            tau_max: 0.0,
        };
        names.len()
    ];
    for row in &trace.potentials {
        for (r, tau) in ranges.iter_mut().zip(instantaneous_time_constants(spec, params, row)) {
            r.tau_min = r.tau_min.min(tau);
            r.tau_max = r.tau_max.max(tau);
        }
    }
    Ok(ranges)
}

/// Per-step pose with min–max normalised potentials (one column per neuron).
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionTable {
    pub neuron_names: Vec<String>,
    pub poses: Vec<(f64, f64)>,
    /// `activation[step][neuron]` in `[0, 1]`.
    pub activation: Vec<Vec<f64>>,
}

impl ProjectionTable {
    pub fn column(&self, neuron: usize) -> Vec<f64> {
        self.activation.iter().map(|r| r[neuron]).collect()
    }

    /// Header `step,x,y,<neuron>…`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["step".to_string(), "x".into(), "y".into()];
        header.extend(self.neuron_names.iter().cloned());
        w.write_record(&header)?;
        for (k, ((x, y), row)) in self.poses.iter().zip(&self.activation).enumerate() {
            let mut rec = vec![k.to_string(), fmt_f64(*x), fmt_f64(*y)];
            rec.extend(row.iter().copied().map(fmt_f64));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Min–max normalises every neuron's series; a constant series maps to all zeros.
pub fn activity_projection(trace: &RolloutTrace) -> Result<ProjectionTable> {
    trace.validate()?;
    let poses = trace
        .poses
        .clone()
        .ok_or_else(|| NcpError::Trace("trace has no pose series".into()))?;
    let n = trace.neuron_names.len();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for row in &trace.potentials {
        for i in 0..n {
            lo[i] = lo[i].min(row[i]);
            hi[i] = hi[i].max(row[i]);
        }
    }
    let activation = trace
        .potentials
        .iter()
        .map(|row| {
            (0..n)
                .map(|i| {
                    let span = hi[i] - lo[i];
                    if span > 0.0 {
                        (row[i] - lo[i]) / span
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    Ok(ProjectionTable {
        neuron_names: trace.neuron_names.clone(),
        poses,
        activation,
    })
}
