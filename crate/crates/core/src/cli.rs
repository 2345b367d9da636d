//! Command-line front end: `gen-circuit`, `train`, `rollout`, `analyze`, `rerun`.
//!
//! Every command that takes `--seed` produces byte-identical output for the
//! same inputs. `train` writes `params.json`, `circuit.json`, `train.csv` and
//! `manifest.json`; `rerun --manifest` repeats a training run from the latter.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::envs::{EnvKind, ParkingCourse};
use crate::error::{NcpError, Result};
use crate::interpret::{
    activity_projection, contribution_report, time_constant_range, TimeConstantRange, DEFAULT_EPSILON,
};
use crate::trace::RolloutTrace;
use crate::trainer::{fmt_f64, rollout, train, ArsConfig, Filter, Start, Task, DEFAULT_START_CANDIDATES};
use crate::wiring::{build_tw_circuit, ensure_valid, random_circuit, CircuitSpec, ParamVector};

#[derive(Debug, Parser)]
#[command(name = "ncp", version, about = "Neuronal circuit policies: simulate, train and analyze")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the tap-withdrawal circuit or a random baseline as spec JSON.
    GenCircuit(GenCircuitArgs),
    /// Train circuit parameters with adaptive random search.
    Train(TrainArgs),
    /// Run one episode with trained parameters.
    Rollout(RolloutArgs),
    /// Contribution verdicts, time-constant ranges and activity projection of a trace.
    Analyze(AnalyzeArgs),
    /// Repeat a training run from its manifest.
    Rerun(RerunArgs),
}

#[derive(Debug, Args)]
pub struct GenCircuitArgs {
    #[arg(long, conflicts_with = "random")]
    pub tw: bool,
    /// Neuron and synapse counts.
    #[arg(long, num_args = 2, value_names = ["N", "M"], required_unless_present = "tw")]
    pub random: Option<Vec<usize>>,
    #[arg(long, default_value_t = 4)]
    pub sensory: usize,
    #[arg(long, default_value_t = 2)]
    pub motor: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub circuit: PathBuf,
    #[arg(long)]
    pub env: String,
    /// Parking course JSON replacing the bundled one.
    #[arg(long)]
    pub course: Option<PathBuf>,
    #[arg(long, default_value_t = 50_000)]
    pub iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.1)]
    pub sigma0: f64,
    #[arg(long, default_value_t = 1.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 8)]
    pub rollouts: usize,
    #[arg(long, default_value = "worstk:4")]
    pub filter: Filter,
    /// Re-estimate the incumbent after this many iterations without improvement; 0 disables.
    #[arg(long, default_value_t = 20)]
    pub stale: usize,
    /// Stop once the filtered return reaches this value.
    #[arg(long)]
    pub target: Option<f64>,
    /// Start from the best of this many random parameter draws.
    #[arg(long, default_value_t = DEFAULT_START_CANDIDATES)]
    pub start_candidates: usize,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RolloutArgs {
    #[arg(long)]
    pub circuit: PathBuf,
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long)]
    pub env: String,
    #[arg(long)]
    pub course: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the per-step trace CSV here.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub trace: PathBuf,
    #[arg(long)]
    pub circuit: PathBuf,
    #[arg(long)]
    pub params: PathBuf,
    /// Neuron the contributions are measured against.
    #[arg(long)]
    pub target: String,
    #[arg(long, default_value_t = 5.0)]
    pub bin_deg: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RerunArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory; defaults to the manifest's.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Everything needed to repeat a training run bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub circuit_path: PathBuf,
    /// The circuit as loaded, so the run survives edits to `circuit_path`.
    pub circuit: CircuitSpec,
    pub params_path: PathBuf,
    pub task: Task,
    pub ars: ArsConfig,
    pub start: Start,
    pub seed: u64,
    pub jobs: usize,
    pub out_dir: PathBuf,
    pub version: String,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenCircuit(a) => cmd_gen_circuit(&a),
        Command::Train(a) => cmd_train(&a).map(|_| ()),
        Command::Rollout(a) => {
            let total = cmd_rollout(&a)?;
            println!("{}", fmt_f64(total));
            Ok(())
        }
        Command::Analyze(a) => cmd_analyze(&a),
        Command::Rerun(a) => {
            let mut manifest: RunManifest = serde_json::from_str(&fs::read_to_string(&a.manifest)?)?;
            if let Some(out) = &a.out {
                manifest.out_dir = out.clone();
                manifest.params_path = out.join("params.json");
            }
            run_manifest(&manifest)
        }
    }
}

/// Writes through a temporary sibling and renames into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn load_task(env: &str, course: Option<&Path>) -> Result<Task> {
    let kind: EnvKind = env.parse()?;
    let task = Task::new(kind);
    match course {
        Some(_) if kind != EnvKind::Parking => Err(NcpError::Domain(format!("--course applies to parking, not {kind}"))),
        Some(path) => Ok(task.with_course(ParkingCourse::load(path)?)),
        None => Ok(task),
    }
}

fn load_spec(path: &Path) -> Result<CircuitSpec> {
    let spec = CircuitSpec::load(path)?;
    ensure_valid(&spec)?;
    Ok(spec)
}

pub fn cmd_gen_circuit(args: &GenCircuitArgs) -> Result<()> {
    let spec = match &args.random {
        Some(nm) => random_circuit(nm[0], nm[1], args.sensory, args.motor, args.seed)?,
        None => build_tw_circuit(),
    };
    let mut text = spec.to_json();
    text.push('\n');
    match &args.out {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn cmd_train(args: &TrainArgs) -> Result<RunManifest> {
    let task = load_task(&args.env, args.course.as_deref())?;
    let circuit = load_spec(&args.circuit)?;
    let ars = ArsConfig {
        sigma0: args.sigma0,
        alpha: args.alpha,
        max_iterations: args.iters,
        stale_reevaluation: (args.stale > 0).then_some(args.stale),
        rollouts: args.rollouts,
        filter: args.filter,
        seed: args.seed,
        target: args.target.map(|t| -t),
    };
    let manifest = RunManifest {
        command: "train".into(),
        circuit_path: args.circuit.clone(),
        circuit,
        params_path: args.out.join("params.json"),
        task,
        ars,
        start: Start::BestOfRandom(args.start_candidates),
        seed: args.seed,
        jobs: args.jobs,
        out_dir: args.out.clone(),
        version: env!("CARGO_PKG_VERSION").into(),
    };
    run_manifest(&manifest)?;
    Ok(manifest)
}

/// Trains as described by `manifest` and writes its artifacts.
pub fn run_manifest(manifest: &RunManifest) -> Result<()> {
    manifest.ars.validate()?;
    ensure_valid(&manifest.circuit)?;
    let out = &manifest.out_dir;
    fs::create_dir_all(out)?;
    log::info!(
        "training on {} for up to {} iterations (seed {})",
        manifest.task.env,
        manifest.ars.max_iterations,
        manifest.seed
    );
    let outcome = train(&manifest.circuit, &manifest.task, &manifest.ars, &manifest.start, manifest.jobs)?;
    log::info!(
        "final estimate {} after {} iterations",
        outcome.record.final_estimate(),
        outcome.record.iterations.len()
    );
    let mut csv = Vec::new();
    outcome.record.write_csv(&mut csv, manifest.ars.sigma0)?;
    write_atomic(&manifest.params_path, outcome.params.to_json()?.as_bytes())?;
    write_atomic(&out.join("circuit.json"), outcome.spec.to_json().as_bytes())?;
    write_atomic(&out.join("train.csv"), &csv)?;
    write_atomic(&out.join("manifest.json"), serde_json::to_string_pretty(manifest)?.as_bytes())?;
    Ok(())
}

/// Runs one episode and returns its total reward.
pub fn cmd_rollout(args: &RolloutArgs) -> Result<f64> {
    let task = load_task(&args.env, args.course.as_deref())?;
    let spec = task.env.bind(&load_spec(&args.circuit)?)?;
    ensure_valid(&spec)?;
    let params = ParamVector::load(&args.params, &spec)
        .map_err(|e| NcpError::ParamFile(format!("{}: {e}", args.params.display())))?
        .decode()?;
    let mut env = task.make_env();
    let outcome = rollout(&spec, &params, env.as_mut(), args.seed, task.solver, args.trace.is_some())?;
    if outcome.diverged {
        log::warn!("policy diverged after {} steps", outcome.steps);
    }
    if let (Some(path), Some(trace)) = (&args.trace, &outcome.trace) {
        let mut buf = Vec::new();
        trace.write_csv(&mut buf)?;
        write_atomic(path, &buf)?;
    }
    Ok(outcome.total_return)
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<()> {
    let trace = RolloutTrace::read_csv(fs::File::open(&args.trace)?)?;
    let spec = load_spec(&args.circuit)?;
    let params = ParamVector::load(&args.params, &spec)
        .map_err(|e| NcpError::ParamFile(format!("{}: {e}", args.params.display())))?
        .decode()?;
    let bin = args.bin_deg.to_radians();
    let report = contribution_report(&trace, &args.target, bin, DEFAULT_EPSILON)?;
    let taus = time_constant_range(&trace, &spec, &params)?;
    fs::create_dir_all(&args.out)?;

    let mut buf = Vec::new();
    report.write_verdicts_csv(&mut buf)?;
    write_atomic(&args.out.join("verdicts.csv"), &buf)?;
    let mut buf = Vec::new();
    report.write_histograms_csv(&mut buf)?;
    write_atomic(&args.out.join("histograms.csv"), &buf)?;
    write_atomic(&args.out.join("tau.csv"), &tau_csv(&trace.neuron_names, &taus)?)?;

    #[derive(Serialize)]
    struct Report<'a> {
        contributions: &'a crate::interpret::ContributionReport,
        time_constants: Vec<(&'a str, TimeConstantRange)>,
    }
    let json = Report {
        contributions: &report,
        time_constants: trace.neuron_names.iter().map(String::as_str).zip(taus.iter().copied()).collect(),
    };
    write_atomic(&args.out.join("report.json"), serde_json::to_string_pretty(&json)?.as_bytes())?;

    if trace.poses.is_some() {
        let mut buf = Vec::new();
        activity_projection(&trace)?.write_csv(&mut buf)?;
        write_atomic(&args.out.join("projection.csv"), &buf)?;
    } else {
        log::info!("trace has no pose columns; skipping projection");
    }
    for p in &report.pairs {
        println!("{} -> {}: {}", p.source, p.target, p.classification.verdict);
    }
    Ok(())
}

fn tau_csv(names: &[String], taus: &[TimeConstantRange]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["neuron", "tau_min", "tau_max"])?;
    for (n, t) in names.iter().zip(taus) {
        w.write_record([n.clone(), fmt_f64(t.tau_min), fmt_f64(t.tau_max)])?;
    }
    w.into_inner().map_err(|e| NcpError::Io(e.into_error()))
}
