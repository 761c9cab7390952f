//! `goy`: reference simulation, ablation, online training and gradient
//! checks for the GOY shell model.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use goy_core::adjoint::{finite_diff_grad, solve_adjoint_for, DEFAULT_FD_STEP};
use goy_core::controller::{
    run_ablation, run_fixed, spin_up, Checkpoint, Mode, RunSummary, Trainer,
};
use goy_core::diagnostics::{loss_and_grad_state, SnapshotWindow};
use goy_core::integrator::integrate_segment;
use goy_core::optimizer::{AdamState, GuardMode};
use goy_core::{DissipationModel, GoyField, ShellState, SolveError};
use serde_json::json;

use config::{ConfigError, Settings};
use output::OutDir;

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_TOLERANCE: u8 = 4;

#[derive(Parser)]
#[command(name = "goy", version, about = "GOY shell model experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reference run from the standard initial condition.
    Simulate(Common),
    /// Continue a developed state with the dissipation term removed.
    Ablate(Common),
    /// Learn the dissipation coefficient online.
    Train(Common),
    /// Compare adjoint and finite-difference gradients on spun-up states.
    Gradcheck(GradcheckArgs),
}

#[derive(Args, Clone)]
struct Common {
    /// Configuration file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Checkpoint to continue from.
    #[arg(long)]
    resume: Option<PathBuf>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    update_interval: Option<f64>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    snapshot_dt: Option<f64>,
    #[arg(long)]
    theta0: Option<f64>,
    #[arg(long)]
    guard: Option<GuardMode>,
    /// Checkpoint whose state and window replace the spin-up.
    #[arg(long)]
    seed_trajectory: Option<PathBuf>,
    /// Extra `key=value` override; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args, Clone)]
struct GradcheckArgs {
    #[command(flatten)]
    common: Common,
    /// Number of sampled states.
    #[arg(long, default_value_t = 20)]
    states: usize,
    /// Largest accepted relative discrepancy.
    #[arg(long, default_value_t = 1e-3)]
    threshold: f64,
    #[arg(long, default_value_t = DEFAULT_FD_STEP)]
    fd_step: f64,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Solver(SolveError),
    Tolerance { worst: f64, threshold: f64 },
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => EXIT_CONFIG,
            Failure::Solver(_) => EXIT_SOLVER,
            Failure::Tolerance { .. } => EXIT_TOLERANCE,
            Failure::Io(_) => EXIT_IO,
        }
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            Failure::Config(m) => json!({"error": "config", "message": m}),
            Failure::Solver(e) => json!({
                "error": "solver",
                "kind": e.kind,
                "t_fail": e.t_fail,
                "steps_taken": e.steps_taken,
                "message": e.to_string(),
            }),
            Failure::Tolerance { worst, threshold } => json!({
                "error": "tolerance",
                "worst_relative_error": worst,
                "threshold": threshold,
                "message": format!("largest discrepancy {worst:e} exceeds {threshold:e}"),
            }),
            Failure::Io(m) => json!({"error": "io", "message": m}),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Invalid(inner) => inner.into(),
            other => Failure::Config(other.to_string()),
        }
    }
}

impl From<goy_core::Error> for Failure {
    fn from(e: goy_core::Error) -> Self {
        use goy_core::Error as E;
        match e {
            E::Solve(s) => Failure::Solver(s),
            E::Io(io) => Failure::Io(io.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn settings_for(mode: Mode, args: &Common, tight: bool) -> Result<Settings, Failure> {
    let mut s = Settings::new(mode);
    if tight {
        for cfg in [&mut s.run.integrator, &mut s.run.adjoint_integrator] {
            cfg.rtol = 1e-10;
            cfg.atol = 1e-15;
        }
    }
    if let Some(path) = &args.config {
        let pairs = config::read_pairs(path)?;
        s.apply(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;
    }
    for o in &args.overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| Failure::Config(format!("override `{o}` is not KEY=VALUE")))?;
        s.set(k.trim(), v.trim())?;
    }
    let r = &mut s.run;
    r.mode = mode;
    if let Some(v) = args.t_end {
        r.t_end = v;
    }
    if let Some(v) = args.lr {
        r.lr = v;
    }
    if let Some(v) = args.update_interval {
        r.update_interval = v;
    }
    if let Some(v) = args.window {
        r.window = v;
    }
    if let Some(v) = args.snapshot_dt {
        r.snapshot_dt = v;
    }
    if let Some(v) = args.theta0 {
        r.theta0 = v;
    }
    if let Some(v) = args.guard {
        r.guard.mode = v;
    }
    s.validate()?;
    Ok(s)
}

fn load_checkpoint(path: &Path, s: &Settings) -> Result<Checkpoint, Failure> {
    let ckpt = Checkpoint::load(path).map_err(|e| match e {
        goy_core::Error::Io(io) => Failure::Config(format!("cannot read {}: {io}", path.display())),
        other => other.into(),
    })?;
    if ckpt.params != s.params {
        return Err(Failure::Config(format!(
            "{} was written for different model parameters",
            path.display()
        )));
    }
    Ok(ckpt)
}

/// Developed state and trailing window, from a checkpoint or a fresh spin-up.
fn seed(s: &Settings, from: Option<&Path>) -> Result<(ShellState, SnapshotWindow), Failure> {
    match from {
        Some(path) => {
            let ckpt = load_checkpoint(path, s)?;
            Ok((ckpt.state, ckpt.window))
        }
        None => {
            let summary = spin_up(&s.params, &s.run)?;
            Ok((summary.final_state, summary.window))
        }
    }
}

fn state_checkpoint(s: &Settings, state: &ShellState, window: &SnapshotWindow, theta: f64) -> Checkpoint {
    Checkpoint {
        version: goy_core::controller::CHECKPOINT_VERSION.to_string(),
        params: s.params.clone(),
        state: state.clone(),
        window: window.clone(),
        adam: AdamState::with_lr(1, s.run.lr),
        theta,
        last_good_theta: theta,
        time_origin: state.t,
        snapshots_done: 0,
        updates_done: 0,
        rollbacks_used: 0,
        config_digest: s.run.digest(&s.params),
    }
}

fn write_run(out: &OutDir, s: &Settings, run: &RunSummary, coeff: f64) -> Outcome {
    out.write_trace(&run.trace)?;
    out.write_stats(&run.stats)?;
    out.write_checkpoint(&state_checkpoint(s, &run.final_state, &run.window, coeff))?;
    match run.failure {
        Some(e) => Err(Failure::Solver(e)),
        None => Ok(()),
    }
}

fn cmd_simulate(args: &Common) -> Outcome {
    let s = settings_for(Mode::Reference, args, false)?;
    let seed_path = args.seed_trajectory.as_deref().or(args.resume.as_deref());
    let (start, window) = match seed_path {
        Some(p) => seed(&s, Some(p))?,
        None => {
            let ic = ShellState {
                t: s.run.t_start,
                ..ShellState::initial_condition(&s.params)
            };
            (ic, SnapshotWindow::new(s.run.window, s.run.snapshot_dt)?)
        }
    };
    let out = OutDir::create(&args.out, &s)?;
    let run = run_fixed(&s.params, s.params.nu, start, window, s.run.t_end, &s.run)?;
    write_run(&out, &s, &run, s.params.nu)
}

fn cmd_ablate(args: &Common) -> Outcome {
    let s = settings_for(Mode::Ablation, args, false)?;
    let seed_path = args.seed_trajectory.as_deref().or(args.resume.as_deref());
    let (start, window) = seed(&s, seed_path)?;
    let out = OutDir::create(&args.out, &s)?;
    let run = run_ablation(&s.params, &s.run, start, window)?;
    write_run(&out, &s, &run, 0.0)
}

fn cmd_train(args: &Common) -> Outcome {
    let s = settings_for(Mode::Train, args, false)?;
    let mut trainer = match (&args.resume, &args.seed_trajectory) {
        (Some(path), _) => {
            let ckpt = load_checkpoint(path, &s)?;
            Trainer::resume(ckpt, &s.run)?
        }
        (None, Some(path)) => {
            let (state, window) = seed(&s, Some(path))?;
            Trainer::new(&s.params, &s.run, state, window)?
        }
        (None, None) => {
            if s.run.spin_up_t <= 0.0 {
                return Err(Failure::Config(
                    "training needs spin_up_t > 0 or a seed trajectory to fill the window".into(),
                ));
            }
            let (state, window) = seed(&s, None)?;
            Trainer::new(&s.params, &s.run, state, window)?
        }
    };
    let out = OutDir::create(&args.out, &s)?;
    let mut log = out.jsonl("train.jsonl")?;
    trainer.run_until(s.run.t_end, |rec| {
        log.write(rec).map_err(goy_core::Error::from)
    })?;
    log.finish()?;
    out.write_trace(trainer.trace())?;
    out.write_stats(trainer.stats())?;
    out.write_checkpoint(&trainer.checkpoint())?;
    match trainer.failure() {
        Some(e) => Err(Failure::Solver(e)),
        None => Ok(()),
    }
}

fn cmd_gradcheck(args: &GradcheckArgs) -> Outcome {
    let s = settings_for(Mode::Train, &args.common, true)?;
    if args.states == 0 || !(args.threshold > 0.0) || !(args.fd_step > 0.0) {
        return Err(Failure::Config("states, threshold and fd-step must be positive".into()));
    }
    let seed_path = args.common.seed_trajectory.as_deref().or(args.common.resume.as_deref());
    let (_, window) = seed(&s, seed_path)?;
    if window.is_empty() {
        return Err(Failure::Config("gradcheck needs spun-up states (spin_up_t > 0)".into()));
    }
    let out = OutDir::create(&args.common.out, &s)?;
    let p = &s.params;
    let thetas = [0.0, 1e-9, 1e-8, 1e-7];
    let stride = (window.len() / args.states).max(1);
    let mut table = out.csv("gradcheck.csv", "t,theta,adjoint,finite_difference,relative_error")?;
    println!("{:>10} {:>9} {:>15} {:>15} {:>10}", "t", "theta", "adjoint", "fd", "rel");
    let mut worst = 0.0f64;
    for (k, s0) in window.iter().step_by(stride).take(args.states).enumerate() {
        let theta = thetas[k % thetas.len()];
        let mut w = SnapshotWindow::new(window.capacity(), window.snapshot_dt())?;
        for snap in window.iter().filter(|x| x.t <= s0.t) {
            w.push(snap.clone())?;
        }
        let field = GoyField::modified(p, DissipationModel::new(theta));
        let seg = integrate_segment(&field, &s0.to_real().x, s0.t, s.run.update_interval, &s.run.integrator)?;
        let mut after = w.clone();
        after.push(ShellState::from_real(seg.final_state(), seg.t1))?;
        let (_, terminal) = loss_and_grad_state(&after, p, &s.run.loss)?;
        let adj = solve_adjoint_for(&field, &seg, &terminal, &s.run.adjoint_integrator, false)?.dl_dtheta;
        let fd = finite_diff_grad(
            s0,
            theta,
            &w,
            s.run.update_interval,
            args.fd_step,
            p,
            &s.run.loss,
            &s.run.integrator,
        )?;
        let rel = if adj == fd { 0.0 } else { ((adj - fd) / fd).abs() };
        worst = worst.max(if rel.is_nan() { f64::INFINITY } else { rel });
        println!("{:>10.1} {:>9.1e} {:>15.6e} {:>15.6e} {:>10.2e}", s0.t, theta, adj, fd, rel);
        table.row(&[s0.t, theta, adj, fd, rel])?;
    }
    table.finish()?;
    println!("worst relative error {worst:.3e} (threshold {:e})", args.threshold);
    if worst < args.threshold {
        Ok(())
    } else {
        Err(Failure::Tolerance {
            worst,
            threshold: args.threshold,
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Ablate(a) => cmd_ablate(a),
        Command::Train(a) => cmd_train(a),
        Command::Gradcheck(a) => cmd_gradcheck(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.to_json());
            ExitCode::from(f.code())
        }
    }
}
