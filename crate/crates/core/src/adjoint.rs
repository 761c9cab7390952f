//! Continuous adjoint for the sensitivity of a terminal loss to the
//! dissipation coefficient.
//!
//! With `lambda(t1) = dL/du(t1)` and `lambda' = -J^T lambda`, the parameter
//! gradient is `dL/dtheta = int_{t0}^{t1} lambda^T df/dtheta dt`. Both are
//! integrated backward in time as one augmented system `(lambda, q)` of
//! `2N + 1` reals, reading the forward trajectory from the stored dense
//! output. All algebra uses the interleaved real view because the complex
//! conjugates in the coupling term break complex differentiability.

use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{loss, window_mean_spectrum, LossConfig, SnapshotWindow};
use crate::integrator::{integrate_segment, IntegratorConfig, SegmentSolution, StepStats, VectorField};
use crate::shell_model::{DissipationModel, GoyField, GoyParams, ShellState};
use crate::Result;

/// A vector field that also exposes the products needed by the adjoint.
pub trait Linearized: VectorField {
    /// `out = (df/dx)^T lam` at `(t, x)`.
    fn vjp_state(&self, t: f64, x: &[f64], lam: &[f64], out: &mut [f64]);
    /// `lam . df/dtheta` at `(t, x)`.
    fn vjp_param(&self, t: f64, x: &[f64], lam: &[f64]) -> f64;
}

impl Linearized for GoyField {
    fn vjp_state(&self, _t: f64, x: &[f64], lam: &[f64], out: &mut [f64]) {
        self.jacobian_transpose_apply(x, lam, out)
    }

    fn vjp_param(&self, _t: f64, x: &[f64], lam: &[f64]) -> f64 {
        self.param_sensitivity_dot(x, lam)
    }
}

/// Augmented backward system in reversed time `s = t1 - t`.
struct BackwardSystem<'a, L> {
    field: &'a L,
    forward: &'a SegmentSolution,
    scratch: RefCell<Vec<f64>>,
}

impl<L: Linearized> VectorField for BackwardSystem<'_, L> {
    fn dim(&self) -> usize {
        self.forward.dim() + 1
    }

    fn eval(&self, s: f64, z: &[f64], dz: &mut [f64]) {
        let n = self.forward.dim();
        let t = (self.forward.t1 - s).clamp(self.forward.t0, self.forward.t1);
        let mut x = self.scratch.borrow_mut();
        self.forward
            .interpolate_into(t, &mut x)
            .expect("time clamped into the segment");
        let lam = &z[..n];
        self.field.vjp_state(t, &x, lam, &mut dz[..n]);
        dz[n] = self.field.vjp_param(t, &x, lam);
    }
}

/// Everything needed to run the adjoint over one forward segment of the
/// modified GOY system.
#[derive(Debug, Clone)]
pub struct AdjointProblem<'a> {
    pub segment: &'a SegmentSolution,
    pub theta: f64,
    pub terminal: Vec<f64>,
    pub params: GoyParams,
    pub cfg: IntegratorConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientResult {
    pub dl_dtheta: f64,
    /// `(t, |lambda(t)|)` at the backward solver's knots, newest time first.
    pub adjoint_norm_history: Option<Vec<(f64, f64)>>,
    /// `lambda(t0)`, the sensitivity of the loss to the segment's initial state.
    pub lambda_start: Vec<f64>,
    pub stats: StepStats,
}

/// Backward adjoint solve for any [`Linearized`] field.
pub fn solve_adjoint_for<L: Linearized>(
    field: &L,
    forward: &SegmentSolution,
    terminal: &[f64],
    cfg: &IntegratorConfig,
    record_history: bool,
) -> Result<GradientResult> {
    let n = forward.dim();
    if terminal.len() != n {
        return Err(crate::Error::InvalidArgument(format!(
            "terminal adjoint has length {}, state has {n}",
            terminal.len()
        )));
    }
    let sys = BackwardSystem {
        field,
        forward,
        scratch: RefCell::new(vec![0.0; n]),
    };
    let mut z0 = terminal.to_vec();
    z0.push(0.0);
    let span = forward.t1 - forward.t0;
    let back = integrate_segment(&sys, &z0, 0.0, span, cfg)?;
    let history = record_history.then(|| {
        let mut out = Vec::with_capacity(back.knot_times().len());
        let mut z = vec![0.0; n + 1];
        for &s in back.knot_times() {
            back.interpolate_into(s, &mut z).expect("knot inside segment");
            let norm = z[..n].iter().map(|v| v * v).sum::<f64>().sqrt();
            out.push((forward.t1 - s, norm));
        }
        out
    });
    Ok(GradientResult {
        dl_dtheta: back.final_state()[n],
        adjoint_norm_history: history,
        lambda_start: back.final_state()[..n].to_vec(),
        stats: back.stats,
    })
}

pub fn solve_adjoint(prob: &AdjointProblem<'_>) -> Result<GradientResult> {
    let field = GoyField::modified(&prob.params, DissipationModel::new(prob.theta));
    solve_adjoint_for(&field, prob.segment, &prob.terminal, &prob.cfg, false)
}

/// Central difference `(L(theta + h) - L(theta - h)) / 2h`, where each loss
/// integrates the segment from `x0` with the field built for that theta and
/// hands the final state to `terminal_loss`.
#[allow(clippy::too_many_arguments)]
pub fn finite_diff_grad_for<F, M, T>(
    make_field: M,
    x0: &[f64],
    t0: f64,
    duration: f64,
    theta: f64,
    h: f64,
    cfg: &IntegratorConfig,
    terminal_loss: T,
) -> Result<f64>
where
    F: VectorField,
    M: Fn(f64) -> F,
    T: Fn(&[f64]) -> Result<f64>,
{
    let eval = |th: f64| -> Result<f64> {
        let sol = integrate_segment(&make_field(th), x0, t0, duration, cfg)?;
        terminal_loss(sol.final_state())
    };
    let plus = eval(theta + h)?;
    let minus = eval(theta - h)?;
    Ok((plus - minus) / (2.0 * h))
}

/// Default finite-difference step. The top shell of the standard system
/// decays at `k^2 ~ 7e10`, so over a 0.1 segment a step of `1e-13` keeps the
/// perturbation of its decay factor near `1e-3` and the central-difference
/// truncation error well below the adjoint's accuracy.
pub const DEFAULT_FD_STEP: f64 = 1e-13;

/// Loss after pushing the segment's final state into a copy of `window`.
/// An identity segment (final time not after the newest snapshot) leaves the
/// window unchanged.
pub fn window_loss_after(
    window: &SnapshotWindow,
    p: &GoyParams,
    loss_cfg: &LossConfig,
    final_state: ShellState,
) -> Result<f64> {
    let mut w = window.clone();
    if w.newest().is_none_or(|n| final_state.t > n.t) {
        w.push(final_state)?;
    }
    loss(&window_mean_spectrum(&w, p)?, loss_cfg)
}

/// Finite-difference `dL/dtheta` for one modified-GOY segment scored by the
/// window-mean slope loss.
#[allow(clippy::too_many_arguments)]
pub fn finite_diff_grad(
    s0: &ShellState,
    theta: f64,
    window: &SnapshotWindow,
    duration: f64,
    h: f64,
    p: &GoyParams,
    loss_cfg: &LossConfig,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    let x0 = s0.to_real().x;
    let t1 = s0.t + duration;
    finite_diff_grad_for(
        |th| GoyField::modified(p, DissipationModel::new(th)),
        &x0,
        s0.t,
        duration,
        theta,
        h,
        cfg,
        |x| window_loss_after(window, p, loss_cfg, ShellState::from_real(x, t1)),
    )
}
