//! The GOY shell model: parameters, state, vector field and its linearization.
//!
//! Shell indices are 1-based in every public interface (`k_i = k0 * lambda^i`,
//! `i = 1..=N`); storage is 0-based. Amplitudes outside `1..=N` are taken as
//! zero, which closes the quadratic coupling at both ends of the shell chain.
//!
//! The real view of a state interleaves real and imaginary parts per shell:
//! `(Re u_1, Im u_1, Re u_2, Im u_2, ...)`. The integrator, the adjoint and the
//! checkpoint format all share this layout.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::integrator::VectorField;
use crate::{Error, Result};

/// Physical constants of the forced, dissipative GOY system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoyParams {
    pub epsilon: f64,
    pub lambda: f64,
    pub nu: f64,
    pub k0: f64,
    pub shells: usize,
    pub forcing: Complex64,
    /// 1-based index of the forced shell.
    pub forcing_shell: usize,
}

impl Default for GoyParams {
    fn default() -> Self {
        Self {
            epsilon: 0.5,
            lambda: 2.0,
            nu: 1e-8,
            k0: 2f64.powi(-4),
            shells: 22,
            forcing: Complex64::new(5e-3, 5e-3),
            forcing_shell: 4,
        }
    }
}

impl GoyParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(msg.to_string()));
        if !(self.lambda > 1.0) {
            return bad("lambda must exceed 1");
        }
        if !(self.k0 > 0.0) {
            return bad("k0 must be positive");
        }
        if self.shells < 5 {
            return bad("at least 5 shells are required");
        }
        if self.forcing_shell < 1 || self.forcing_shell > self.shells {
            return bad("forcing shell outside 1..=N");
        }
        if !(self.epsilon.is_finite() && self.nu.is_finite())
            || !(self.forcing.re.is_finite() && self.forcing.im.is_finite())
        {
            return bad("non-finite model constant");
        }
        Ok(())
    }

    /// `k_i = k0 * lambda^i` for a 1-based shell index.
    pub fn wavenumber(&self, i: usize) -> f64 {
        wavenumber(i, self)
    }

    /// Wavenumbers of shells `1..=N`, 0-based storage.
    pub fn wavenumbers(&self) -> Vec<f64> {
        (1..=self.shells).map(|i| wavenumber(i, self)).collect()
    }

    /// Real dimension of the state (`2N`).
    pub fn real_dim(&self) -> usize {
        2 * self.shells
    }
}

pub fn wavenumber(i: usize, p: &GoyParams) -> f64 {
    p.k0 * p.lambda.powi(i as i32)
}

/// Complex shell velocities at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellState {
    pub u: Vec<Complex64>,
    pub t: f64,
}

impl ShellState {
    pub fn new(u: Vec<Complex64>, t: f64) -> Result<Self> {
        let s = Self { u, t };
        if !s.is_finite() {
            return Err(Error::NonFiniteInput("shell state"));
        }
        Ok(s)
    }

    pub fn zeros(shells: usize, t: f64) -> Self {
        Self {
            u: vec![Complex64::new(0.0, 0.0); shells],
            t,
        }
    }

    /// The standard seed: `u_3 = u_5 = 1e-5 (1 + i)`, all other shells at rest.
    pub fn initial_condition(p: &GoyParams) -> Self {
        let mut s = Self::zeros(p.shells, 0.0);
        for i in [3, 5] {
            if i <= p.shells {
                s.u[i - 1] = Complex64::new(1e-5, 1e-5);
            }
        }
        s
    }

    pub fn shells(&self) -> usize {
        self.u.len()
    }

    /// Amplitude of a 1-based shell.
    pub fn shell(&self, i: usize) -> Complex64 {
        self.u[i - 1]
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.u.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn to_real(&self) -> RealStateView {
        let mut x = Vec::with_capacity(2 * self.u.len());
        for z in &self.u {
            x.push(z.re);
            x.push(z.im);
        }
        RealStateView { x }
    }

    pub fn from_real(x: &[f64], t: f64) -> Self {
        debug_assert!(x.len().is_multiple_of(2));
        let u = x
            .chunks_exact(2)
            .map(|c| Complex64::new(c[0], c[1]))
            .collect();
        Self { u, t }
    }
}

/// Interleaved `(Re, Im)` flattening of a [`ShellState`].
#[derive(Debug, Clone, PartialEq)]
pub struct RealStateView {
    pub x: Vec<f64>,
}

impl RealStateView {
    pub fn into_state(self, t: f64) -> ShellState {
        ShellState::from_real(&self.x, t)
    }
}

/// Learnable diffusive closure `M_i = theta * k_i^2 * u_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DissipationModel {
    pub theta: f64,
}

impl DissipationModel {
    pub fn new(theta: f64) -> Self {
        Self { theta }
    }
}

/// Precomputed coefficients of the GOY right-hand side with a fixed
/// diffusive coefficient. The same kernel serves the reference system
/// (coefficient `nu`) and the modified system (coefficient `theta`), so the
/// two agree bit for bit when `theta == nu`.
#[derive(Debug, Clone)]
pub struct GoyField {
    epsilon: f64,
    k: Vec<f64>,
    k2: Vec<f64>,
    forcing: Complex64,
    forcing_idx: usize,
    coeff: f64,
}

impl GoyField {
    pub fn new(p: &GoyParams, coeff: f64) -> Self {
        let k = p.wavenumbers();
        let k2 = k.iter().map(|k| k * k).collect();
        Self {
            epsilon: p.epsilon,
            k,
            k2,
            forcing: p.forcing,
            forcing_idx: p.forcing_shell - 1,
            coeff,
        }
    }

    /// Reference system with the physical viscosity.
    pub fn reference(p: &GoyParams) -> Self {
        Self::new(p, p.nu)
    }

    /// Modified system with the learned closure in place of viscosity.
    pub fn modified(p: &GoyParams, m: DissipationModel) -> Self {
        Self::new(p, m.theta)
    }

    pub fn with_forcing(mut self, forcing: Complex64) -> Self {
        self.forcing = forcing;
        self
    }

    pub fn coeff(&self) -> f64 {
        self.coeff
    }

    pub fn shells(&self) -> usize {
        self.k.len()
    }

    #[inline]
    fn kw(&self, j: isize) -> f64 {
        if j < 0 || j as usize >= self.k.len() {
            0.0
        } else {
            self.k[j as usize]
        }
    }

    /// Holomorphic part `P_j` with `C_j = conj(P_j)`; `amp(j)` returns zero
    /// outside the chain.
    #[inline]
    fn coupling<A: Fn(isize) -> Complex64>(&self, j: isize, amp: &A) -> Complex64 {
        let eps = self.epsilon;
        amp(j + 1) * amp(j + 2) * self.kw(j)
            - amp(j - 1) * amp(j + 1) * (eps * self.kw(j - 1))
            + amp(j - 1) * amp(j - 2) * ((eps - 1.0) * self.kw(j - 2))
    }

    /// Complex partials `dP_j/du_m` for the four neighbours `m = j-2, j-1, j+1, j+2`.
    #[inline]
    fn coupling_partials<A: Fn(isize) -> Complex64>(
        &self,
        j: isize,
        amp: &A,
    ) -> [(isize, Complex64); 4] {
        let eps = self.epsilon;
        let (km2, km1, k0) = (self.kw(j - 2), self.kw(j - 1), self.kw(j));
        [
            (j - 2, amp(j - 1) * ((eps - 1.0) * km2)),
            (
                j - 1,
                amp(j + 1) * (-eps * km1) + amp(j - 2) * ((eps - 1.0) * km2),
            ),
            (j + 1, amp(j + 2) * k0 - amp(j - 1) * (eps * km1)),
            (j + 2, amp(j + 1) * k0),
        ]
    }

    fn nonlinear_complex(&self, u: &[Complex64]) -> Vec<Complex64> {
        let n = u.len() as isize;
        let amp = |j: isize| {
            if j < 0 || j >= n {
                Complex64::new(0.0, 0.0)
            } else {
                u[j as usize]
            }
        };
        (0..n).map(|j| self.coupling(j, &amp).conj()).collect()
    }

    /// Dense real Jacobian, row-major `2N x 2N`.
    pub fn jacobian(&self, x: &[f64]) -> Vec<f64> {
        let n = self.shells();
        let dim = 2 * n;
        let amp = real_amp(x);
        let mut jac = vec![0.0; dim * dim];
        for j in 0..n {
            let (rr, ri) = (2 * j, 2 * j + 1);
            jac[rr * dim + rr] = -self.coeff * self.k2[j];
            jac[ri * dim + ri] = -self.coeff * self.k2[j];
            for (m, p) in self.coupling_partials(j as isize, &amp) {
                if m < 0 || m as usize >= n {
                    continue;
                }
                let m = m as usize;
                let q = p.conj();
                // d(i conj(P))/d Re u_m = i q ; d/d Im u_m = q
                jac[rr * dim + 2 * m] += -q.im;
                jac[ri * dim + 2 * m] += q.re;
                jac[rr * dim + 2 * m + 1] += q.re;
                jac[ri * dim + 2 * m + 1] += q.im;
            }
        }
        jac
    }

    /// `out = J(x)^T lam` without forming the matrix.
    pub fn jacobian_transpose_apply(&self, x: &[f64], lam: &[f64], out: &mut [f64]) {
        let n = self.shells();
        let amp = real_amp(x);
        for j in 0..n {
            let d = -self.coeff * self.k2[j];
            out[2 * j] = d * lam[2 * j];
            out[2 * j + 1] = d * lam[2 * j + 1];
        }
        for j in 0..n {
            let (lr, li) = (lam[2 * j], lam[2 * j + 1]);
            if lr == 0.0 && li == 0.0 {
                continue;
            }
            for (m, p) in self.coupling_partials(j as isize, &amp) {
                if m < 0 || m as usize >= n {
                    continue;
                }
                let m = m as usize;
                let q = p.conj();
                out[2 * m] += -q.im * lr + q.re * li;
                out[2 * m + 1] += q.re * lr + q.im * li;
            }
        }
    }

    /// `lam . df/dtheta` where `df/dtheta = -k^2 u`.
    pub fn param_sensitivity_dot(&self, x: &[f64], lam: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (j, k2) in self.k2.iter().enumerate() {
            acc -= k2 * (x[2 * j] * lam[2 * j] + x[2 * j + 1] * lam[2 * j + 1]);
        }
        acc
    }
}

#[inline]
fn real_amp(x: &[f64]) -> impl Fn(isize) -> Complex64 + '_ {
    let n = (x.len() / 2) as isize;
    move |j| {
        if j < 0 || j >= n {
            Complex64::new(0.0, 0.0)
        } else {
            let j = j as usize;
            Complex64::new(x[2 * j], x[2 * j + 1])
        }
    }
}

impl VectorField for GoyField {
    fn dim(&self) -> usize {
        2 * self.k.len()
    }

    fn eval(&self, _t: f64, x: &[f64], dx: &mut [f64]) {
        let n = self.k.len() as isize;
        let amp = real_amp(x);
        for j in 0..n {
            let c = self.coupling(j, &amp).conj();
            let ju = j as usize;
            let damp = self.coeff * self.k2[ju];
            // i * C = (-Im C, Re C)
            let mut re = -c.im - damp * x[2 * ju];
            let mut im = c.re - damp * x[2 * ju + 1];
            if ju == self.forcing_idx {
                re += self.forcing.re;
                im += self.forcing.im;
            }
            dx[2 * ju] = re;
            dx[2 * ju + 1] = im;
        }
    }
}

/// Quadratic coupling `C_i` of every shell.
pub fn nonlinear_term(s: &ShellState, p: &GoyParams) -> Vec<Complex64> {
    GoyField::reference(p).nonlinear_complex(&s.u)
}

fn rhs_complex(field: &GoyField, s: &ShellState) -> Vec<Complex64> {
    let x = s.to_real().x;
    let mut dx = vec![0.0; x.len()];
    field.eval(s.t, &x, &mut dx);
    ShellState::from_real(&dx, s.t).u
}

/// `-nu k_i^2 u_i + f delta_{i,forcing} + i C_i`.
pub fn rhs_reference(s: &ShellState, p: &GoyParams) -> Vec<Complex64> {
    rhs_complex(&GoyField::reference(p), s)
}

/// `f delta_{i,forcing} + i C_i - theta k_i^2 u_i`.
pub fn rhs_modified(s: &ShellState, p: &GoyParams, m: DissipationModel) -> Vec<Complex64> {
    rhs_complex(&GoyField::modified(p, m), s)
}

/// Jacobian of the real-flattened modified field, row-major `2N x 2N`.
pub fn jacobian_real(s: &ShellState, p: &GoyParams, m: DissipationModel) -> Vec<f64> {
    GoyField::modified(p, m).jacobian(&s.to_real().x)
}

/// Real flattening of `-k_i^2 u_i`.
pub fn dfdtheta(s: &ShellState, p: &GoyParams) -> Vec<f64> {
    let k = p.wavenumbers();
    let mut out = Vec::with_capacity(2 * s.u.len());
    for (z, k) in s.u.iter().zip(&k) {
        out.push(-k * k * z.re);
        out.push(-k * k * z.im);
    }
    out
}
