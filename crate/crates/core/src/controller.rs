//! Experiment orchestration: spin-up of the reference system, fixed-closure
//! runs (including the zero-dissipation ablation) and the online training
//! loop with checkpoint/resume.
//!
//! Time is advanced in whole snapshot intervals and every snapshot time is
//! computed as `origin + n * snapshot_dt`, so resumed runs see exactly the
//! same floating-point times as uninterrupted ones.

use std::io::{BufRead, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::adjoint::{solve_adjoint_for, GradientResult};
use crate::diagnostics::{
    dissipation_rate, energy_flux, energy_spectrum, injection_rate, kinetic_energy,
    loss_and_grad_state, turnover_time, FluxProfile, LossConfig, ShellProfile, SnapshotWindow,
    Spectrum,
};
use crate::integrator::{integrate_segment, IntegratorConfig, SegmentSolution, SolveError, SolveErrorKind};
use crate::optimizer::{apply_guard, AdamState, GuardMode, GuardPolicy};
use crate::shell_model::{DissipationModel, GoyField, GoyParams, ShellState};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Reference,
    Ablation,
    Train,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FailurePolicy {
    /// Stop at the first solver failure and report it.
    Abort,
    /// Restore the last good theta, halve the learning rate and continue,
    /// up to `rollback_budget` times.
    Rollback,
}

/// Settings of one experiment. Field names double as configuration keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub mode: Mode,
    /// Start of the reference integration from the seed state.
    pub t_start: f64,
    /// Absolute end time of the run.
    pub t_end: f64,
    pub spin_up_t: f64,
    pub snapshot_dt: f64,
    pub window: usize,
    pub update_interval: f64,
    pub theta0: f64,
    /// Time from which spectra, fluxes and the turnover time are averaged.
    pub stats_from: f64,
    pub integrator: IntegratorConfig,
    pub adjoint_integrator: IntegratorConfig,
    pub loss: LossConfig,
    pub guard: GuardPolicy,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps_adam: f64,
    pub on_failure: FailurePolicy,
    pub rollback_budget: usize,
}

impl RunConfig {
    pub fn new(p: &GoyParams) -> Self {
        let integrator = IntegratorConfig::default();
        Self {
            mode: Mode::Reference,
            t_start: 0.0,
            t_end: 1500.0,
            spin_up_t: 500.0,
            snapshot_dt: 0.1,
            window: 1000,
            update_interval: 0.1,
            theta0: 0.0,
            stats_from: 660.0,
            integrator,
            adjoint_integrator: integrator,
            loss: LossConfig::full(p),
            guard: GuardPolicy::default(),
            lr: 1e-9,
            beta1: 0.9,
            beta2: 0.999,
            eps_adam: 1e-8,
            on_failure: FailurePolicy::Abort,
            rollback_budget: 10,
        }
    }

    /// Snapshots per update segment.
    pub fn snapshots_per_update(&self) -> Result<usize> {
        let ratio = self.update_interval / self.snapshot_dt;
        let n = ratio.round();
        if n < 1.0 || (ratio - n).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "update_interval {} is not a whole multiple of snapshot_dt {}",
                self.update_interval, self.snapshot_dt
            )));
        }
        Ok(n as usize)
    }

    pub fn validate(&self, p: &GoyParams) -> Result<()> {
        p.validate()?;
        self.integrator.validate()?;
        self.adjoint_integrator.validate()?;
        self.loss.validate(p.shells)?;
        self.guard.validate()?;
        self.snapshots_per_update()?;
        if self.window == 0 {
            return Err(Error::InvalidArgument("window must hold at least one snapshot".into()));
        }
        if !(self.snapshot_dt > 0.0) || !(self.spin_up_t >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::InvalidArgument("times must be finite and non-negative".into()));
        }
        if !(self.lr >= 0.0) || !self.theta0.is_finite() {
            return Err(Error::InvalidArgument("learning rate must be non-negative".into()));
        }
        Ok(())
    }

    /// Digest of everything that shapes a training run except its end time.
    pub fn digest(&self, p: &GoyParams) -> String {
        let mut c = self.clone();
        c.t_end = 0.0;
        c.mode = Mode::Train;
        let payload = serde_json::to_vec(&(p, &c)).expect("config serializes");
        hex::encode(Sha256::digest(&payload))
    }

    fn adam(&self) -> AdamState {
        AdamState {
            beta1: self.beta1,
            beta2: self.beta2,
            eps_adam: self.eps_adam,
            ..AdamState::with_lr(1, self.lr)
        }
    }
}

/// Scalar diagnostics at one snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub energy: f64,
    pub dissipation: f64,
    pub injection: f64,
}

/// Running averages of spectrum, flux and `k_1 |u_1|`.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsAccumulator {
    pub from: f64,
    spectrum: Vec<f64>,
    flux: Vec<f64>,
    u1: Vec<Complex64>,
    k: Vec<f64>,
}

impl StatsAccumulator {
    pub fn new(p: &GoyParams, from: f64) -> Self {
        Self {
            from,
            spectrum: vec![0.0; p.shells],
            flux: vec![0.0; p.shells],
            u1: Vec::new(),
            k: p.wavenumbers(),
        }
    }

    pub fn add(&mut self, s: &ShellState, p: &GoyParams) {
        if s.t < self.from {
            return;
        }
        for (a, v) in self.spectrum.iter_mut().zip(energy_spectrum(s, p).values) {
            *a += v;
        }
        for (a, v) in self.flux.iter_mut().zip(energy_flux(s, p).values) {
            *a += v;
        }
        self.u1.push(s.u[0]);
    }

    pub fn samples(&self) -> usize {
        self.u1.len()
    }

    fn mean(&self, sum: &[f64]) -> Option<ShellProfile> {
        let n = self.samples();
        (n > 0).then(|| ShellProfile {
            k: self.k.clone(),
            values: sum.iter().map(|v| v / n as f64).collect(),
        })
    }

    pub fn mean_spectrum(&self) -> Option<Spectrum> {
        self.mean(&self.spectrum)
    }

    pub fn mean_flux(&self) -> Option<FluxProfile> {
        self.mean(&self.flux)
    }

    pub fn tau0(&self) -> Option<f64> {
        turnover_time(&self.u1, self.k[0]).ok()
    }
}

/// Outcome of a run with a fixed dissipation coefficient.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub trace: Vec<TraceRow>,
    pub stats: StatsAccumulator,
    pub final_state: ShellState,
    pub window: SnapshotWindow,
    /// Set when the run ended early on a solver failure.
    pub failure: Option<SolveError>,
    pub solver_steps: usize,
}

/// Integrates the system with diffusive coefficient `coeff` from `start` in
/// snapshot intervals until `t_end`, recording diagnostics at every snapshot.
/// A solver failure ends the run and is reported in the summary.
pub fn run_fixed(
    p: &GoyParams,
    coeff: f64,
    start: ShellState,
    window: SnapshotWindow,
    t_end: f64,
    cfg: &RunConfig,
) -> Result<RunSummary> {
    cfg.validate(p)?;
    let field = GoyField::new(p, coeff);
    let origin = start.t;
    let n_snap = snapshot_count(origin, t_end, cfg.snapshot_dt);
    let mut summary = RunSummary {
        trace: Vec::with_capacity(n_snap),
        stats: StatsAccumulator::new(p, cfg.stats_from),
        final_state: start,
        window,
        failure: None,
        solver_steps: 0,
    };
    let mut x = summary.final_state.to_real().x;
    for n in 0..n_snap {
        let t0 = origin + n as f64 * cfg.snapshot_dt;
        let t1 = origin + (n + 1) as f64 * cfg.snapshot_dt;
        match integrate_segment(&field, &x, t0, t1 - t0, &cfg.integrator) {
            Ok(sol) => {
                summary.solver_steps += sol.stats.attempted();
                x = sol.final_state().to_vec();
            }
            Err(Error::Solve(e)) => {
                summary.failure = Some(e);
                break;
            }
            Err(e) => return Err(e),
        }
        let s = ShellState::from_real(&x, t1);
        summary.trace.push(TraceRow {
            t: t1,
            energy: kinetic_energy(&s),
            dissipation: dissipation_rate(&s, p, coeff),
            injection: injection_rate(&s, p),
        });
        summary.stats.add(&s, p);
        summary.window.push(s.clone())?;
        summary.final_state = s;
    }
    Ok(summary)
}

fn snapshot_count(from: f64, to: f64, dt: f64) -> usize {
    if to <= from {
        0
    } else {
        ((to - from) / dt + 1e-9).floor() as usize
    }
}

/// Reference run from the standard seed to `spin_up_t`. The returned
/// window holds the trailing `cfg.window` snapshots.
pub fn spin_up(p: &GoyParams, cfg: &RunConfig) -> Result<RunSummary> {
    let start = ShellState {
        t: cfg.t_start,
        ..ShellState::initial_condition(p)
    };
    let window = SnapshotWindow::new(cfg.window, cfg.snapshot_dt)?;
    let summary = run_fixed(p, p.nu, start, window, cfg.t_start + cfg.spin_up_t, cfg)?;
    if let Some(e) = summary.failure {
        return Err(e.into());
    }
    Ok(summary)
}

/// The modified system with the closure switched off, continued from a
/// developed state until `cfg.t_end`.
pub fn run_ablation(p: &GoyParams, cfg: &RunConfig, start: ShellState, window: SnapshotWindow) -> Result<RunSummary> {
    run_fixed(p, 0.0, start, window, cfg.t_end, cfg)
}

/// One row of the training log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainRecord {
    pub update: u64,
    pub t: f64,
    pub theta_before: f64,
    pub theta_after: f64,
    pub loss: Option<f64>,
    pub grad: Option<f64>,
    pub fwd_steps: usize,
    pub bwd_steps: usize,
    pub guard_flag: bool,
    pub error: Option<SolveErrorKind>,
}

/// Everything needed to continue a training run bit-identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: String,
    pub params: GoyParams,
    pub state: ShellState,
    pub window: SnapshotWindow,
    pub adam: AdamState,
    pub theta: f64,
    pub last_good_theta: f64,
    pub time_origin: f64,
    pub snapshots_done: u64,
    pub updates_done: u64,
    pub rollbacks_used: usize,
    pub config_digest: String,
}

pub const CHECKPOINT_VERSION: &str = "goy-checkpoint/1";

impl Checkpoint {
    /// Writes a one-line header with the payload checksum followed by the
    /// JSON payload.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let payload = serde_json::to_string(self)?;
        let sum = hex::encode(Sha256::digest(payload.as_bytes()));
        writeln!(w, "{CHECKPOINT_VERSION} sha256={sum}")?;
        writeln!(w, "{payload}")?;
        Ok(())
    }

    pub fn read_from<R: BufRead>(mut r: R) -> Result<Self> {
        let mut header = String::new();
        r.read_line(&mut header)?;
        let mut parts = header.trim_end().split(' ');
        let version = parts.next().unwrap_or_default();
        if version != CHECKPOINT_VERSION {
            return Err(Error::CheckpointVersion {
                found: version.to_string(),
                expected: CHECKPOINT_VERSION.to_string(),
            });
        }
        let sum = parts
            .next()
            .and_then(|s| s.strip_prefix("sha256="))
            .ok_or_else(|| Error::CheckpointCorrupted("missing checksum".into()))?
            .to_string();
        let mut payload = String::new();
        r.read_to_string(&mut payload)?;
        let payload = payload.trim_end_matches('\n');
        if hex::encode(Sha256::digest(payload.as_bytes())) != sum {
            return Err(Error::CheckpointCorrupted("checksum mismatch".into()));
        }
        let ckpt: Checkpoint = serde_json::from_str(payload)
            .map_err(|e| Error::CheckpointCorrupted(e.to_string()))?;
        if ckpt.version != CHECKPOINT_VERSION {
            return Err(Error::CheckpointVersion {
                found: ckpt.version,
                expected: CHECKPOINT_VERSION.to_string(),
            });
        }
        Ok(ckpt)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(f);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(f))
    }
}

/// Online learning of the dissipation coefficient.
///
/// Each update integrates one `update_interval` of the modified system with
/// the current theta, pushes its snapshots into the window, differentiates
/// the window-mean slope loss with respect to the newest snapshot, carries
/// that sensitivity back over the segment with the adjoint and takes one
/// guarded Adam step.
#[derive(Debug, Clone)]
pub struct Trainer {
    params: GoyParams,
    cfg: RunConfig,
    state: ShellState,
    window: SnapshotWindow,
    adam: AdamState,
    theta: f64,
    last_good_theta: f64,
    time_origin: f64,
    snapshots_done: u64,
    updates_done: u64,
    rollbacks_used: usize,
    per_update: usize,
    failed: Option<SolveError>,
    stats: StatsAccumulator,
    trace: Vec<TraceRow>,
    record_trace: bool,
}

impl Trainer {
    /// Starts from a spun-up state and its trailing window.
    pub fn new(p: &GoyParams, cfg: &RunConfig, state: ShellState, window: SnapshotWindow) -> Result<Self> {
        cfg.validate(p)?;
        if window.is_empty() {
            return Err(Error::Empty("training window (spin up first)"));
        }
        let mut window = window;
        if window.capacity() != cfg.window {
            let mut resized = SnapshotWindow::new(cfg.window, cfg.snapshot_dt)?;
            for s in window.iter() {
                resized.push(s.clone())?;
            }
            window = resized;
        }
        Ok(Self {
            params: p.clone(),
            cfg: cfg.clone(),
            time_origin: state.t,
            state,
            window,
            adam: cfg.adam(),
            theta: cfg.theta0,
            last_good_theta: cfg.theta0,
            snapshots_done: 0,
            updates_done: 0,
            rollbacks_used: 0,
            per_update: cfg.snapshots_per_update()?,
            failed: None,
            stats: StatsAccumulator::new(p, cfg.stats_from),
            trace: Vec::new(),
            record_trace: true,
        })
    }

    /// Continues from a checkpoint. The configuration must match the one the
    /// checkpoint was written with (the end time may differ).
    pub fn resume(ckpt: Checkpoint, cfg: &RunConfig) -> Result<Self> {
        cfg.validate(&ckpt.params)?;
        if cfg.digest(&ckpt.params) != ckpt.config_digest {
            return Err(Error::InvalidArgument(
                "run configuration differs from the one stored in the checkpoint".into(),
            ));
        }
        Ok(Self {
            per_update: cfg.snapshots_per_update()?,
            stats: StatsAccumulator::new(&ckpt.params, cfg.stats_from),
            params: ckpt.params,
            cfg: cfg.clone(),
            state: ckpt.state,
            window: ckpt.window,
            adam: ckpt.adam,
            theta: ckpt.theta,
            last_good_theta: ckpt.last_good_theta,
            time_origin: ckpt.time_origin,
            snapshots_done: ckpt.snapshots_done,
            updates_done: ckpt.updates_done,
            rollbacks_used: ckpt.rollbacks_used,
            failed: None,
            trace: Vec::new(),
            record_trace: true,
        })
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            version: CHECKPOINT_VERSION.to_string(),
            params: self.params.clone(),
            state: self.state.clone(),
            window: self.window.clone(),
            adam: self.adam.clone(),
            theta: self.theta,
            last_good_theta: self.last_good_theta,
            time_origin: self.time_origin,
            snapshots_done: self.snapshots_done,
            updates_done: self.updates_done,
            rollbacks_used: self.rollbacks_used,
            config_digest: self.cfg.digest(&self.params),
        }
    }

    /// Disables the per-snapshot scalar trace (long runs).
    pub fn without_trace(mut self) -> Self {
        self.record_trace = false;
        self
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn state(&self) -> &ShellState {
        &self.state
    }

    pub fn window(&self) -> &SnapshotWindow {
        &self.window
    }

    pub fn updates_done(&self) -> u64 {
        self.updates_done
    }

    pub fn failure(&self) -> Option<SolveError> {
        self.failed
    }

    pub fn stats(&self) -> &StatsAccumulator {
        &self.stats
    }

    pub fn trace(&self) -> &[TraceRow] {
        &self.trace
    }

    fn snapshot_time(&self, n: u64) -> f64 {
        self.time_origin + n as f64 * self.cfg.snapshot_dt
    }

    /// Time at which the next update segment would end.
    pub fn next_update_end(&self) -> f64 {
        self.snapshot_time(self.snapshots_done + self.per_update as u64)
    }

    /// Runs the forward segments of one update; on success returns the
    /// sub-segment solutions and the new snapshots.
    fn forward(&self, field: &GoyField) -> std::result::Result<(Vec<SegmentSolution>, Vec<ShellState>), SolveError> {
        let mut x = self.state.to_real().x;
        let mut sols = Vec::with_capacity(self.per_update);
        let mut snaps = Vec::with_capacity(self.per_update);
        for k in 0..self.per_update as u64 {
            let t0 = self.snapshot_time(self.snapshots_done + k);
            let t1 = self.snapshot_time(self.snapshots_done + k + 1);
            let sol = match integrate_segment(field, &x, t0, t1 - t0, &self.cfg.integrator) {
                Ok(sol) => sol,
                Err(Error::Solve(e)) => return Err(e),
                Err(e) => unreachable!("validated inputs: {e}"),
            };
            x = sol.final_state().to_vec();
            snaps.push(ShellState::from_real(&x, t1));
            sols.push(sol);
        }
        Ok((sols, snaps))
    }

    fn backward(&self, field: &GoyField, sols: &[SegmentSolution], terminal: Vec<f64>) -> std::result::Result<(f64, usize), SolveError> {
        let mut lam = terminal;
        let mut grad = 0.0;
        let mut steps = 0;
        for sol in sols.iter().rev() {
            let GradientResult { dl_dtheta, stats, lambda_start, .. } =
                match solve_adjoint_for(field, sol, &lam, &self.cfg.adjoint_integrator, false) {
                    Ok(g) => g,
                    Err(Error::Solve(e)) => return Err(e),
                    Err(e) => unreachable!("validated inputs: {e}"),
                };
            grad += dl_dtheta;
            steps += stats.attempted();
            lam = lambda_start;
        }
        Ok((grad, steps))
    }

    /// Performs one update. Returns `None` once the run has stopped on an
    /// unrecoverable failure.
    pub fn step(&mut self) -> Result<Option<TrainRecord>> {
        if self.failed.is_some() {
            return Ok(None);
        }
        let theta_before = self.theta;
        let t_end = self.next_update_end();
        let field = GoyField::modified(&self.params, DissipationModel::new(self.theta));
        let mut record = TrainRecord {
            update: self.updates_done + 1,
            t: t_end,
            theta_before,
            theta_after: theta_before,
            loss: None,
            grad: None,
            fwd_steps: 0,
            bwd_steps: 0,
            guard_flag: false,
            error: None,
        };

        let outcome = self.forward(&field).and_then(|(sols, snaps)| {
            let fwd: usize = sols.iter().map(|s| s.stats.attempted()).sum();
            let mut window = self.window.clone();
            for s in &snaps {
                window.push(s.clone()).expect("snapshot times increase");
            }
            let (value, terminal) = match loss_and_grad_state(&window, &self.params, &self.cfg.loss) {
                Ok(v) => v,
                // zero energy in a scored shell: the loss is undefined
                Err(_) => {
                    return Err(SolveError {
                        kind: SolveErrorKind::NonFiniteState,
                        t_fail: t_end,
                        steps_taken: fwd,
                    })
                }
            };
            let (grad, bwd) = self.backward(&field, &sols, terminal)?;
            Ok((snaps, window, value, grad, fwd, bwd))
        });

        match outcome {
            Ok((snaps, window, value, grad, fwd, bwd)) => {
                for s in &snaps {
                    if self.record_trace {
                        self.trace.push(TraceRow {
                            t: s.t,
                            energy: kinetic_energy(s),
                            dissipation: dissipation_rate(s, &self.params, self.theta),
                            injection: injection_rate(s, &self.params),
                        });
                    }
                    self.stats.add(s, &self.params);
                }
                self.window = window;
                self.state = snaps.last().expect("at least one snapshot").clone();
                self.snapshots_done += self.per_update as u64;

                let proposed = if grad.is_finite() {
                    let mut th = [self.theta];
                    self.adam.update(&mut th, &[grad])?;
                    th[0]
                } else {
                    self.theta
                };
                let (accepted, flagged) = apply_guard(&self.cfg.guard, proposed, self.theta);
                self.last_good_theta = self.theta;
                self.theta = accepted;
                record.theta_after = accepted;
                record.loss = Some(value);
                record.grad = grad.is_finite().then_some(grad);
                record.fwd_steps = fwd;
                record.bwd_steps = bwd;
                record.guard_flag = flagged;
            }
            Err(e) => {
                record.error = Some(e.kind);
                record.fwd_steps = e.steps_taken;
                let can_roll = self.cfg.on_failure == FailurePolicy::Rollback
                    && self.rollbacks_used < self.cfg.rollback_budget;
                if can_roll {
                    self.rollbacks_used += 1;
                    self.theta = self.last_good_theta;
                    self.adam.alpha *= 0.5;
                    record.theta_after = self.theta;
                } else {
                    self.failed = Some(e);
                }
            }
        }
        self.updates_done += 1;
        Ok(Some(record))
    }

    /// Runs updates while the next segment ends at or before `t_end`,
    /// handing each record to `sink`.
    pub fn run_until<F: FnMut(&TrainRecord) -> Result<()>>(&mut self, t_end: f64, mut sink: F) -> Result<()> {
        while self.failed.is_none() && self.next_update_end() <= t_end + 1e-9 * t_end.abs().max(1.0) {
            match self.step()? {
                Some(r) => sink(&r)?,
                None => break,
            }
        }
        Ok(())
    }

    /// Convenience: runs `n` updates and collects their records.
    pub fn run_updates(&mut self, n: usize) -> Result<Vec<TrainRecord>> {
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            match self.step()? {
                Some(r) => out.push(r),
                None => break,
            }
        }
        Ok(out)
    }
}

/// Result of a complete training run.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub records: Vec<TrainRecord>,
    pub checkpoint: Checkpoint,
    pub failure: Option<SolveError>,
    pub stats: StatsAccumulator,
    pub trace: Vec<TraceRow>,
}

/// Trains from a spin-up result until `cfg.t_end`.
pub fn train(p: &GoyParams, cfg: &RunConfig, seed: &RunSummary) -> Result<TrainOutcome> {
    let mut trainer = Trainer::new(p, cfg, seed.final_state.clone(), seed.window.clone())?;
    let mut records = Vec::new();
    trainer.run_until(cfg.t_end, |r| {
        records.push(r.clone());
        Ok(())
    })?;
    Ok(TrainOutcome {
        records,
        checkpoint: trainer.checkpoint(),
        failure: trainer.failure(),
        stats: trainer.stats().clone(),
        trace: trainer.trace().to_vec(),
    })
}

/// Whether the guard is active at all.
pub fn guard_active(cfg: &RunConfig) -> bool {
    cfg.guard.mode != GuardMode::None
}
