//! Time-indexed record of one rollout and its CSV form.
//!
//! CSV columns: `t`, `obs_<i>`…, `V_<neuron>`…, `action_<i>`…, `reward`, and
//! `pose_x`, `pose_y` when the environment has a planar pose.

use std::io::{Read, Write};

use crate::error::{NcpError, Result};
use crate::trainer::fmt_f64;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RolloutTrace {
    pub neuron_names: Vec<String>,
    pub times: Vec<f64>,
    /// One row per recorded step, one column per neuron (mV).
    pub potentials: Vec<Vec<f64>>,
    pub observations: Vec<Vec<f64>>,
    pub actions: Vec<Vec<f64>>,
    pub rewards: Vec<f64>,
    pub poses: Option<Vec<(f64, f64)>>,
}

impl RolloutTrace {
    pub fn new(neuron_names: Vec<String>, with_pose: bool) -> Self {
        RolloutTrace {
            neuron_names,
            poses: with_pose.then(Vec::new),
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn neuron_index(&self, name: &str) -> Option<usize> {
        self.neuron_names.iter().position(|n| n == name)
    }

    /// Potential series of one neuron.
    pub fn series(&self, neuron: usize) -> Vec<f64> {
        self.potentials.iter().map(|row| row[neuron]).collect()
    }

    pub fn total_reward(&self) -> f64 {
        self.rewards.iter().sum()
    }

    /// Checks equal series lengths, row widths and strictly increasing times.
    pub fn validate(&self) -> Result<()> {
        let n = self.times.len();
        let lens = [self.potentials.len(), self.observations.len(), self.actions.len(), self.rewards.len()];
        if lens.iter().any(|&l| l != n) || self.poses.as_ref().is_some_and(|p| p.len() != n) {
            return Err(NcpError::Trace("series lengths differ".into()));
        }
        if self.potentials.iter().any(|r| r.len() != self.neuron_names.len()) {
            return Err(NcpError::Trace("potential row width differs from neuron count".into()));
        }
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(NcpError::Trace("times are not strictly increasing".into()));
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        self.validate()?;
        let obs_dim = self.observations.first().map_or(0, Vec::len);
        let act_dim = self.actions.first().map_or(0, Vec::len);
        let mut header = vec!["t".to_string()];
        header.extend((0..obs_dim).map(|i| format!("obs_{i}")));
        header.extend(self.neuron_names.iter().map(|n| format!("V_{n}")));
        header.extend((0..act_dim).map(|i| format!("action_{i}")));
        header.push("reward".into());
        if self.poses.is_some() {
            header.push("pose_x".into());
            header.push("pose_y".into());
        }
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&header)?;
        for k in 0..self.len() {
            let mut row = vec![fmt_f64(self.times[k])];
            row.extend(self.observations[k].iter().copied().map(fmt_f64));
            row.extend(self.potentials[k].iter().copied().map(fmt_f64));
            row.extend(self.actions[k].iter().copied().map(fmt_f64));
            row.push(fmt_f64(self.rewards[k]));
            if let Some(p) = &self.poses {
                row.push(fmt_f64(p[k].0));
                row.push(fmt_f64(p[k].1));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Parses a trace CSV. Column groups are recognised by name, so traces
    /// from other simulators only need `t` and `V_<neuron>` columns.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers()?.clone();
        let mut t_col = None;
        let (mut obs, mut volt, mut act) = (vec![], vec![], vec![]);
        let (mut reward, mut px, mut py) = (None, None, None);
        let mut names = vec![];
        for (i, h) in header.iter().enumerate() {
            match h {
                "t" => t_col = Some(i),
                "reward" => reward = Some(i),
                "pose_x" => px = Some(i),
                "pose_y" => py = Some(i),
                _ if h.starts_with("obs_") => obs.push(i),
                _ if h.starts_with("action_") => act.push(i),
                _ if h.starts_with("V_") => {
                    volt.push(i);
                    names.push(h[2..].to_string());
                }
                _ => return Err(NcpError::Trace(format!("unknown column {h:?}"))),
            }
        }
        let t_col = t_col.ok_or_else(|| NcpError::Trace("missing column \"t\"".into()))?;
        if volt.is_empty() {
            return Err(NcpError::Trace("no V_<neuron> columns".into()));
        }
        let mut trace = RolloutTrace::new(names, px.is_some() && py.is_some());
        for record in r.records() {
            let record = record?;
            let num = |i: usize| -> Result<f64> {
                record[i]
                    .parse::<f64>()
                    .map_err(|_| NcpError::Trace(format!("bad number {:?}", &record[i])))
            };
            let many = |cols: &[usize]| cols.iter().map(|&i| num(i)).collect::<Result<Vec<_>>>();
            trace.times.push(num(t_col)?);
            trace.observations.push(many(&obs)?);
            trace.potentials.push(many(&volt)?);
            trace.actions.push(many(&act)?);
            trace.rewards.push(reward.map(num).transpose()?.unwrap_or(0.0));
            if let (Some(p), Some(x), Some(y)) = (trace.poses.as_mut(), px, py) {
                p.push((num(x)?, num(y)?));
            }
        }
        trace.validate()?;
        Ok(trace)
    }
}
