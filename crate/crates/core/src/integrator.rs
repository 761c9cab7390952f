//! Dormand-Prince 5(4) integration with dense output.
//!
//! Every accepted step stores the five coefficient vectors of the classic
//! fourth-order continuous extension, so a [`SegmentSolution`] can be
//! evaluated anywhere inside the segment. The backward adjoint pass relies on
//! this to read the forward trajectory without recomputation.
//!
//! Failures are classified: step-budget exhaustion is the signature of a
//! stiff system, non-finite values and step underflow signal instability.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A real vector field `dx/dt = f(t, x)`.
pub trait VectorField {
    fn dim(&self) -> usize;
    fn eval(&self, t: f64, x: &[f64], dx: &mut [f64]);
}

impl<F: VectorField + ?Sized> VectorField for &F {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, t: f64, x: &[f64], dx: &mut [f64]) {
        (**self).eval(t, x, dx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub dt_init: f64,
    pub dt_min: f64,
    /// Budget of attempted (accepted + rejected) steps per segment.
    pub max_steps: usize,
    pub safety: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-6,
            atol: 1e-12,
            dt_init: 1e-4,
            dt_min: 1e-8,
            max_steps: 100_000,
            safety: 0.9,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.rtol > 0.0
            && self.atol > 0.0
            && self.dt_init > 0.0
            && self.dt_min > 0.0
            && self.safety > 0.0
            && self.safety < 1.0
            && self.max_steps >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "integrator config out of range: {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolveErrorKind {
    MaxStepsExceeded,
    NonFiniteState,
    StepUnderflow,
}

impl fmt::Display for SolveErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::MaxStepsExceeded => "MaxStepsExceeded",
            Self::NonFiniteState => "NonFiniteState",
            Self::StepUnderflow => "StepUnderflow",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, thiserror::Error)]
#[error("{kind} at t = {t_fail} after {steps_taken} steps")]
pub struct SolveError {
    pub kind: SolveErrorKind,
    pub t_fail: f64,
    pub steps_taken: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub smallest_step: f64,
    pub evals: usize,
}

impl StepStats {
    pub fn attempted(&self) -> usize {
        self.accepted + self.rejected
    }
}

/// Dense record of one integration segment.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSolution {
    pub t0: f64,
    pub t1: f64,
    dim: usize,
    /// Start time of each accepted step, followed by `t1`.
    knots: Vec<f64>,
    /// Five continuous-extension vectors per step, laid out step-major.
    coeffs: Vec<f64>,
    final_state: Vec<f64>,
    pub stats: StepStats,
}

impl SegmentSolution {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn steps(&self) -> usize {
        self.knots.len() - 1
    }

    pub fn knot_times(&self) -> &[f64] {
        &self.knots
    }

    pub fn initial_state(&self) -> &[f64] {
        if self.steps() == 0 {
            &self.final_state
        } else {
            &self.coeffs[..self.dim]
        }
    }

    pub fn final_state(&self) -> &[f64] {
        &self.final_state
    }

    /// Evaluates the interpolant into `out`. Knot times return the stored
    /// state exactly.
    pub fn interpolate_into(&self, t: f64, out: &mut [f64]) -> Result<()> {
        if !(t >= self.t0 && t <= self.t1) {
            return Err(Error::OutOfRange {
                t,
                t0: self.t0,
                t1: self.t1,
            });
        }
        let n = self.dim;
        if t == self.t1 {
            out.copy_from_slice(&self.final_state);
            return Ok(());
        }
        // last knot with knots[i] <= t
        let i = self.knots.partition_point(|&k| k <= t) - 1;
        let c = &self.coeffs[5 * n * i..5 * n * (i + 1)];
        if t == self.knots[i] {
            out.copy_from_slice(&c[..n]);
            return Ok(());
        }
        let h = self.knots[i + 1] - self.knots[i];
        let s = (t - self.knots[i]) / h;
        let s1 = 1.0 - s;
        for j in 0..n {
            let (r1, r2, r3, r4, r5) = (c[j], c[n + j], c[2 * n + j], c[3 * n + j], c[4 * n + j]);
            out[j] = r1 + s * (r2 + s1 * (r3 + s * (r4 + s1 * r5)));
        }
        Ok(())
    }
}

/// Interpolated state at `t`, which must lie in `[t0, t1]`.
pub fn interpolate(sol: &SegmentSolution, t: f64) -> Result<Vec<f64>> {
    let mut out = vec![0.0; sol.dim];
    sol.interpolate_into(t, &mut out)?;
    Ok(out)
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// difference between the 5th and 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// continuous extension
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

struct Stages {
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    y1: Vec<f64>,
    err: Vec<f64>,
}

impl Stages {
    fn new(n: usize) -> Self {
        Self {
            k: std::array::from_fn(|_| vec![0.0; n]),
            tmp: vec![0.0; n],
            y1: vec![0.0; n],
            err: vec![0.0; n],
        }
    }

    /// One DP5 step from `(t, y)` with `k[0] = f(t, y)` already populated.
    /// Leaves the 5th-order solution in `y1`, `f(t+h, y1)` in `k[6]`, and the
    /// embedded error vector in `err`.
    fn step<F: VectorField>(&mut self, f: &F, t: f64, y: &[f64], h: f64) {
        let n = y.len();
        let Self { k, tmp, y1, err } = self;
        let [k1, k2, k3, k4, k5, k6, k7] = k;
        for i in 0..n {
            tmp[i] = y[i] + h * A21 * k1[i];
        }
        f.eval(t + C2 * h, tmp, k2);
        for i in 0..n {
            tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        f.eval(t + C3 * h, tmp, k3);
        for i in 0..n {
            tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        f.eval(t + C4 * h, tmp, k4);
        for i in 0..n {
            tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        f.eval(t + C5 * h, tmp, k5);
        for i in 0..n {
            tmp[i] = y[i]
                + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        f.eval(t + h, tmp, k6);
        for i in 0..n {
            y1[i] = y[i]
                + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        f.eval(t + h, y1, k7);
        for i in 0..n {
            err[i] = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
    }

    fn push_dense(&self, y0: &[f64], h: f64, coeffs: &mut Vec<f64>) {
        let n = y0.len();
        let [k1, _, k3, k4, k5, k6, k7] = &self.k;
        let base = coeffs.len();
        coeffs.resize(base + 5 * n, 0.0);
        let c = &mut coeffs[base..];
        for i in 0..n {
            let dy = self.y1[i] - y0[i];
            let bspl = h * k1[i] - dy;
            c[i] = y0[i];
            c[n + i] = dy;
            c[2 * n + i] = bspl;
            c[3 * n + i] = dy - h * k7[i] - bspl;
            c[4 * n + i] = h
                * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
    }
}

fn error_norm(err: &[f64], y0: &[f64], y1: &[f64], cfg: &IntegratorConfig) -> f64 {
    let sum: f64 = err
        .iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| {
            let sc = cfg.atol + cfg.rtol * a.abs().max(b.abs());
            (e / sc) * (e / sc)
        })
        .sum();
    (sum / err.len() as f64).sqrt()
}

/// Integrates `field` from `x0` at time `t0` over `duration`.
///
/// A zero duration returns the identity segment. Non-finite values are
/// checked after every accepted step.
pub fn integrate_segment<F: VectorField>(
    field: &F,
    x0: &[f64],
    t0: f64,
    duration: f64,
    cfg: &IntegratorConfig,
) -> Result<SegmentSolution> {
    cfg.validate()?;
    let n = field.dim();
    if x0.len() != n {
        return Err(Error::InvalidArgument(format!(
            "state has length {}, field expects {n}",
            x0.len()
        )));
    }
    if !(duration >= 0.0) || !duration.is_finite() || !t0.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "segment duration must be finite and non-negative, got {duration}"
        )));
    }
    let mut stats = StepStats {
        smallest_step: f64::INFINITY,
        ..Default::default()
    };
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(SolveError {
            kind: SolveErrorKind::NonFiniteState,
            t_fail: t0,
            steps_taken: 0,
        }
        .into());
    }
    let t_end = t0 + duration;
    let mut sol = SegmentSolution {
        t0,
        t1: t_end,
        dim: n,
        knots: vec![t0],
        coeffs: Vec::new(),
        final_state: x0.to_vec(),
        stats,
    };
    if duration == 0.0 {
        return Ok(sol);
    }

    let mut st = Stages::new(n);
    let mut y = x0.to_vec();
    let mut t = t0;
    field.eval(t, &y, &mut st.k[0]);
    stats.evals += 1;
    let mut h = cfg.dt_init.min(duration);
    let mut last_rejected = false;

    loop {
        if stats.attempted() >= cfg.max_steps {
            return Err(SolveError {
                kind: SolveErrorKind::MaxStepsExceeded,
                t_fail: t,
                steps_taken: stats.attempted(),
            }
            .into());
        }
        if h < cfg.dt_min {
            return Err(SolveError {
                kind: SolveErrorKind::StepUnderflow,
                t_fail: t,
                steps_taken: stats.attempted(),
            }
            .into());
        }
        // land exactly on the segment end
        let last = t + h >= t_end || t + 1.01 * h >= t_end;
        if last {
            h = t_end - t;
        }

        st.step(field, t, &y, h);
        stats.evals += 6;
        let err = error_norm(&st.err, &y, &st.y1, cfg);

        if err.is_nan() || st.y1.iter().any(|v| !v.is_finite()) {
            // treat overflow inside a trial step like an error-norm failure,
            // unless the step is already at the floor
            stats.rejected += 1;
            last_rejected = true;
            h *= 0.2;
            continue;
        }

        let fac = (cfg.safety * err.powf(-0.2)).clamp(0.2, 5.0);
        if err <= 1.0 {
            stats.accepted += 1;
            stats.smallest_step = stats.smallest_step.min(h);
            st.push_dense(&y, h, &mut sol.coeffs);
            let t_new = if last { t_end } else { t + h };
            std::mem::swap(&mut y, &mut st.y1);
            st.k.swap(0, 6);
            t = t_new;
            if y.iter().chain(st.k[0].iter()).any(|v| !v.is_finite()) {
                return Err(SolveError {
                    kind: SolveErrorKind::NonFiniteState,
                    t_fail: t,
                    steps_taken: stats.attempted(),
                }
                .into());
            }
            if last {
                break;
            }
            sol.knots.push(t);
            let fac = if last_rejected { fac.min(1.0) } else { fac };
            h *= fac;
            last_rejected = false;
        } else {
            stats.rejected += 1;
            last_rejected = true;
            h *= fac.min(1.0);
        }
    }

    sol.knots.push(t_end);
    sol.final_state = y;
    if stats.accepted == 0 {
        stats.smallest_step = 0.0;
    }
    sol.stats = stats;
    Ok(sol)
}

/// Fixed-step propagation with the 5th-order DP solution; used to verify
/// the convergence order of the scheme.
pub fn fixed_step_solve<F: VectorField>(field: &F, x0: &[f64], t0: f64, t1: f64, steps: usize) -> Vec<f64> {
    let n = x0.len();
    let mut st = Stages::new(n);
    let mut y = x0.to_vec();
    let h = (t1 - t0) / steps as f64;
    for s in 0..steps {
        let t = t0 + s as f64 * h;
        field.eval(t, &y, &mut st.k[0]);
        st.step(field, t, &y, h);
        std::mem::swap(&mut y, &mut st.y1);
    }
    y
}

/// Empirical convergence order of the fixed-step scheme against a known
/// solution: least-squares slope of `log(error)` against `log(dt)` over
/// `refinements + 1` successively halved step sizes. Returns `INFINITY` when
/// the coarsest error is already at rounding level.
pub fn observed_order<F: VectorField>(
    field: &F,
    x0: &[f64],
    t1: f64,
    exact: &[f64],
    coarse_steps: usize,
    refinements: u32,
) -> f64 {
    let scale = exact.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut pts = Vec::new();
    for r in 0..=refinements {
        let steps = coarse_steps << r;
        let y = fixed_step_solve(field, x0, 0.0, t1, steps);
        let err = y
            .iter()
            .zip(exact)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if r == 0 && err <= 64.0 * f64::EPSILON * scale {
            return f64::INFINITY;
        }
        pts.push(((t1 / steps as f64).ln(), err.ln()));
    }
    crate::diagnostics::least_squares_slope(&pts)
}
