//! Statistical diagnostics of shell-model trajectories and the spectral
//! slope loss.

use std::collections::VecDeque;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::shell_model::{GoyParams, ShellState};
use crate::{Error, Result};

pub const KOLMOGOROV_SLOPE: f64 = -5.0 / 3.0;

/// `sum_i |u_i|^2 / 2`
pub fn kinetic_energy(s: &ShellState) -> f64 {
    s.u.iter().map(|z| 0.5 * z.norm_sqr()).sum()
}

/// `coeff * sum_i k_i^2 |u_i|^2`; `coeff` is `nu` for the reference system
/// and `theta` for the modified one.
pub fn dissipation_rate(s: &ShellState, p: &GoyParams, coeff: f64) -> f64 {
    let sum: f64 = s
        .u
        .iter()
        .enumerate()
        .map(|(j, z)| {
            let k = p.wavenumber(j + 1);
            k * k * z.norm_sqr()
        })
        .sum();
    coeff * sum
}

/// Rate of energy injection by the forcing, `Re(f conj(u_forced))`.
pub fn injection_rate(s: &ShellState, p: &GoyParams) -> f64 {
    (p.forcing * s.shell(p.forcing_shell).conj()).re
}

/// Per-shell profile of some quantity; `values[j]` belongs to shell `j + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellProfile {
    pub k: Vec<f64>,
    pub values: Vec<f64>,
}

/// Energy density `E_i = |u_i|^2 / (2 k_i)`.
pub type Spectrum = ShellProfile;
/// Nonlinear energy flux `Pi_i` through shell `i`.
pub type FluxProfile = ShellProfile;

impl ShellProfile {
    pub fn shells(&self) -> usize {
        self.values.len()
    }

    /// Value at a 1-based shell.
    pub fn at(&self, i: usize) -> f64 {
        self.values[i - 1]
    }

    /// Writes `shell_index,k,value` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "shell_index,k,value")?;
        for (j, (k, v)) in self.k.iter().zip(&self.values).enumerate() {
            writeln!(w, "{},{:e},{:e}", j + 1, k, v)?;
        }
        Ok(())
    }

    /// Least-squares slope of `ln value` against `ln k` over shells
    /// `lo..=hi`; all values in range must be positive.
    pub fn log_log_slope(&self, lo: usize, hi: usize) -> Result<f64> {
        let mut pts = Vec::with_capacity(hi + 1 - lo);
        for i in lo..=hi {
            let v = self.at(i);
            if !(v > 0.0) {
                return Err(Error::NonPositiveEnergy { shell: i, value: v });
            }
            pts.push((self.k[i - 1].ln(), v.ln()));
        }
        Ok(least_squares_slope(&pts))
    }
}

pub fn energy_spectrum(s: &ShellState, p: &GoyParams) -> Spectrum {
    let k = p.wavenumbers();
    let values = s
        .u
        .iter()
        .zip(&k)
        .map(|(z, k)| 0.5 * z.norm_sqr() / k)
        .collect();
    ShellProfile { k, values }
}

/// `Pi_i = -Im{u_i u_{i+1} (k_i u_{i+2} + (1 - eps) k_{i-1} u_{i-1})}` with
/// zero amplitudes beyond the chain ends.
pub fn energy_flux(s: &ShellState, p: &GoyParams) -> FluxProfile {
    let k = p.wavenumbers();
    let n = s.u.len() as isize;
    let amp = |j: isize| {
        if j < 0 || j >= n {
            Complex64::new(0.0, 0.0)
        } else {
            s.u[j as usize]
        }
    };
    let kw = |j: isize| if j < 0 || j >= n { 0.0 } else { k[j as usize] };
    let values = (0..n)
        .map(|j| {
            let inner = amp(j + 2) * kw(j) + amp(j - 1) * ((1.0 - p.epsilon) * kw(j - 1));
            -(amp(j) * amp(j + 1) * inner).im
        })
        .collect();
    ShellProfile { k, values }
}

/// `tau_0 = <k_1 |u_1|>^{-1}` from samples of the first shell.
pub fn turnover_time(u1: &[Complex64], k1: f64) -> Result<f64> {
    if u1.is_empty() {
        return Err(Error::Empty("turnover-time sample"));
    }
    let mean = u1.iter().map(|z| k1 * z.norm()).sum::<f64>() / u1.len() as f64;
    Ok(1.0 / mean)
}

/// Arithmetic mean of several profiles sharing the same wavenumbers.
pub fn mean_profile<'a, I>(profiles: I) -> Result<ShellProfile>
where
    I: IntoIterator<Item = &'a ShellProfile>,
{
    let mut it = profiles.into_iter();
    let first = it.next().ok_or(Error::Empty("profile set"))?;
    let mut acc = first.values.clone();
    let mut count = 1usize;
    for p in it {
        for (a, v) in acc.iter_mut().zip(&p.values) {
            *a += v;
        }
        count += 1;
    }
    for a in &mut acc {
        *a /= count as f64;
    }
    Ok(ShellProfile {
        k: first.k.clone(),
        values: acc,
    })
}

/// Trailing buffer of snapshots over which spectra are averaged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotWindow {
    capacity: usize,
    snapshot_dt: f64,
    snapshots: VecDeque<ShellState>,
}

impl SnapshotWindow {
    pub fn new(capacity: usize, snapshot_dt: f64) -> Result<Self> {
        if capacity == 0 || !(snapshot_dt > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "window needs capacity >= 1 and positive spacing (got {capacity}, {snapshot_dt})"
            )));
        }
        Ok(Self {
            capacity,
            snapshot_dt,
            snapshots: VecDeque::with_capacity(capacity),
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn snapshot_dt(&self) -> f64 {
        self.snapshot_dt
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.snapshots.len() == self.capacity
    }

    pub fn newest(&self) -> Option<&ShellState> {
        self.snapshots.back()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ShellState> {
        self.snapshots.iter()
    }

    /// Appends a snapshot, evicting the oldest when full. Times must be
    /// strictly increasing.
    pub fn push(&mut self, s: ShellState) -> Result<()> {
        if let Some(last) = self.snapshots.back() {
            if !(s.t > last.t) {
                return Err(Error::InvalidArgument(format!(
                    "snapshot at t = {} does not follow t = {}",
                    s.t, last.t
                )));
            }
        }
        if self.snapshots.len() == self.capacity {
            self.snapshots.pop_front();
        }
        self.snapshots.push_back(s);
        Ok(())
    }
}

pub fn window_mean_spectrum(w: &SnapshotWindow, p: &GoyParams) -> Result<Spectrum> {
    if w.is_empty() {
        return Err(Error::Empty("snapshot window"));
    }
    let spectra: Vec<_> = w.iter().map(|s| energy_spectrum(s, p)).collect();
    mean_profile(&spectra)
}

/// Slope-matching loss settings. Slopes are taken between shells `i` and
/// `i + 1` for `i in i_lo..=i_hi` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    pub target: f64,
    pub i_lo: usize,
    pub i_hi: usize,
}

impl LossConfig {
    /// Slopes between every pair of neighbouring shells.
    pub fn full(p: &GoyParams) -> Self {
        Self {
            target: KOLMOGOROV_SLOPE,
            i_lo: 1,
            i_hi: p.shells - 1,
        }
    }

    /// Slopes restricted to the shells with `k_lo <= k <= k_hi`.
    pub fn band(p: &GoyParams, k_lo: f64, k_hi: f64) -> Result<Self> {
        let (lo, hi) = shell_band(p, k_lo, k_hi)?;
        let cfg = Self {
            target: KOLMOGOROV_SLOPE,
            i_lo: lo,
            i_hi: hi - 1,
        };
        cfg.validate(p.shells)?;
        Ok(cfg)
    }

    /// The inertial range `4 <= k <= 2^14`.
    pub fn inertial(p: &GoyParams) -> Result<Self> {
        Self::band(p, INERTIAL_K_MIN, INERTIAL_K_MAX)
    }

    pub fn terms(&self) -> usize {
        self.i_hi + 1 - self.i_lo
    }

    pub fn validate(&self, shells: usize) -> Result<()> {
        if self.i_lo >= 1 && self.i_lo < self.i_hi && self.i_hi < shells && self.target.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "loss slope range {}..={} invalid for {shells} shells",
                self.i_lo, self.i_hi
            )))
        }
    }
}

pub const INERTIAL_K_MIN: f64 = 4.0;
pub const INERTIAL_K_MAX: f64 = 16384.0;

/// First and last 1-based shells whose wavenumber lies in `[k_lo, k_hi]`.
pub fn shell_band(p: &GoyParams, k_lo: f64, k_hi: f64) -> Result<(usize, usize)> {
    let inside: Vec<usize> = (1..=p.shells)
        .filter(|&i| {
            let k = p.wavenumber(i);
            k >= k_lo && k <= k_hi
        })
        .collect();
    match (inside.first(), inside.last()) {
        (Some(&a), Some(&b)) if b > a => Ok((a, b)),
        _ => Err(Error::InvalidArgument(format!(
            "fewer than two shells in [{k_lo}, {k_hi}]"
        ))),
    }
}

fn log_energies(spec: &Spectrum, cfg: &LossConfig) -> Result<Vec<f64>> {
    cfg.validate(spec.shells())?;
    (cfg.i_lo..=cfg.i_hi + 1)
        .map(|i| {
            let e = spec.at(i);
            if e > 0.0 && e.is_finite() {
                Ok(e.ln())
            } else {
                Err(Error::NonPositiveEnergy { shell: i, value: e })
            }
        })
        .collect()
}

/// Slope residuals `slope_i - target` for `i in i_lo..=i_hi` and the
/// log-wavenumber spacings they were computed with.
fn slope_residuals(spec: &Spectrum, cfg: &LossConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    let le = log_energies(spec, cfg)?;
    let mut res = Vec::with_capacity(cfg.terms());
    let mut dk = Vec::with_capacity(cfg.terms());
    for (m, i) in (cfg.i_lo..=cfg.i_hi).enumerate() {
        let d = spec.k[i].ln() - spec.k[i - 1].ln();
        res.push((le[m + 1] - le[m]) / d - cfg.target);
        dk.push(d);
    }
    Ok((res, dk))
}

/// Mean squared deviation of the log-log spectral slopes from the target.
pub fn loss(spec: &Spectrum, cfg: &LossConfig) -> Result<f64> {
    let (res, _) = slope_residuals(spec, cfg)?;
    Ok(res.iter().map(|r| r * r).sum::<f64>() / res.len() as f64)
}

/// Loss of the window-mean spectrum together with its gradient with respect
/// to the real view of the newest snapshot. Older snapshots are constants.
pub fn loss_and_grad_state(
    w: &SnapshotWindow,
    p: &GoyParams,
    cfg: &LossConfig,
) -> Result<(f64, Vec<f64>)> {
    let mean = window_mean_spectrum(w, p)?;
    let (res, dk) = slope_residuals(&mean, cfg)?;
    let m = res.len() as f64;
    let value = res.iter().map(|r| r * r).sum::<f64>() / m;

    // dL/d(ln E_j) for j in i_lo..=i_hi+1
    let span = cfg.terms() + 1;
    let mut dlog = vec![0.0; span];
    for (t, (r, d)) in res.iter().zip(&dk).enumerate() {
        let g = 2.0 * r / (m * d);
        dlog[t + 1] += g;
        dlog[t] -= g;
    }

    let newest = w.newest().expect("window checked non-empty");
    let inv_w = 1.0 / w.len() as f64;
    let mut grad = vec![0.0; 2 * p.shells];
    for (t, g) in dlog.iter().enumerate() {
        let i = cfg.i_lo + t;
        let j = i - 1;
        // E_i = |u_i|^2 / (2 k_i), mean over the window
        let scale = g / mean.values[j] * inv_w / mean.k[j];
        let z = newest.u[j];
        grad[2 * j] = scale * z.re;
        grad[2 * j + 1] = scale * z.im;
    }
    Ok((value, grad))
}

pub fn loss_grad_state(w: &SnapshotWindow, p: &GoyParams, cfg: &LossConfig) -> Result<Vec<f64>> {
    loss_and_grad_state(w, p, cfg).map(|(_, g)| g)
}

/// Ordinary least-squares slope through `(x, y)` points.
pub fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
#[allow(clippy::field_reassign_with_default, clippy::needless_range_loop)]
mod tests {
    use super::*;
    use crate::shell_model::nonlinear_term;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn power_law(p: &GoyParams, a: f64, slope: f64) -> Spectrum {
        let k = p.wavenumbers();
        let values = k.iter().map(|k| a * k.powf(slope)).collect();
        ShellProfile { k, values }
    }

    /// State whose spectrum is exactly `a * k^slope`.
    fn state_for_power_law(p: &GoyParams, a: f64, slope: f64, t: f64) -> ShellState {
        let u = p
            .wavenumbers()
            .iter()
            .map(|k| c((2.0 * k * a * k.powf(slope)).sqrt(), 0.0))
            .collect();
        ShellState { u, t }
    }

    fn pseudo_state(p: &GoyParams, seed: u64, t: f64) -> ShellState {
        let mut s = seed ^ 0x9E3779B97F4A7C15;
        let mut next = move || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let u = (1..=p.shells)
            .map(|i| {
                let a = p.wavenumber(i).powf(-1.0 / 3.0);
                c(a * (next() + 0.7), a * next())
            })
            .collect();
        ShellState { u, t }
    }

    #[test]
    fn energy_of_simple_states() {
        let p = GoyParams::default();
        assert_eq!(kinetic_energy(&ShellState::zeros(p.shells, 0.0)), 0.0);
        let e = kinetic_energy(&ShellState::initial_condition(&p));
        assert!((e - 2e-10).abs() < 1e-24);
    }

    #[test]
    fn dissipation_single_shell() {
        let p = GoyParams::default();
        let mut s = ShellState::zeros(p.shells, 0.0);
        assert_eq!(dissipation_rate(&s, &p, 1e-8), 0.0);
        s.u[3] = c(1.0, 0.0);
        assert_eq!(dissipation_rate(&s, &p, 1e-8), 1e-8);
    }

    #[test]
    fn spectrum_single_shell() {
        let p = GoyParams::default();
        let mut s = ShellState::zeros(p.shells, 0.0);
        assert!(energy_spectrum(&s, &p).values.iter().all(|v| *v == 0.0));
        s.u[3] = c(1.0, 0.0);
        assert_eq!(energy_spectrum(&s, &p).at(4), 0.5);
    }

    #[test]
    fn flux_is_minus_partial_energy_transfer() {
        let p = GoyParams::default();
        for seed in 0..50 {
            let s = pseudo_state(&p, seed, 0.0);
            let cv = nonlinear_term(&s, &p);
            let flux = energy_flux(&s, &p);
            let mut partial = 0.0;
            let scale: f64 = s.u.iter().zip(&cv).map(|(u, cc)| (u * cc).norm()).sum();
            for j in 0..p.shells {
                partial += (s.u[j].conj() * c(0.0, 1.0) * cv[j]).re;
                assert!((partial + flux.values[j]).abs() <= 1e-12 * scale, "shell {}", j + 1);
            }
        }
        assert!(energy_flux(&ShellState::zeros(p.shells, 0.0), &p)
            .values
            .iter()
            .all(|v| *v == 0.0));
    }

    #[test]
    fn turnover_constant_amplitude() {
        let u = vec![c(8.0, 0.0), c(0.0, 8.0), c(-8.0, 0.0)];
        assert!((turnover_time(&u, 0.125).unwrap() - 1.0).abs() < 1e-15);
        let u = vec![c(0.6, 0.8); 4];
        assert!((turnover_time(&u, 0.5).unwrap() - 2.0).abs() < 1e-15);
        assert!(turnover_time(&[], 0.125).is_err());
    }

    #[test]
    fn window_evicts_oldest() {
        let p = GoyParams::default();
        let mut w = SnapshotWindow::new(3, 0.1).unwrap();
        for i in 0..5 {
            w.push(pseudo_state(&p, i, i as f64 * 0.1)).unwrap();
            assert!(w.len() <= 3);
        }
        let times: Vec<_> = w.iter().map(|s| s.t).collect();
        assert_eq!(times, vec![0.2, 0.30000000000000004, 0.4]);
        assert!(w.push(pseudo_state(&p, 9, 0.4)).is_err());
    }

    #[test]
    fn window_mean_basics() {
        let p = GoyParams::default();
        let mut w = SnapshotWindow::new(10, 0.1).unwrap();
        assert!(window_mean_spectrum(&w, &p).is_err());
        let s = pseudo_state(&p, 3, 0.0);
        for i in 0..4 {
            let mut si = s.clone();
            si.t = i as f64;
            w.push(si).unwrap();
        }
        assert_eq!(window_mean_spectrum(&w, &p).unwrap(), energy_spectrum(&s, &p));

        let mut w = SnapshotWindow::new(10, 0.1).unwrap();
        for (t, amp) in [(0.0, 0.4f64), (0.1, 0.6)] {
            let mut s = ShellState::zeros(p.shells, t);
            s.u[3] = c((2.0 * amp).sqrt(), 0.0);
            w.push(s).unwrap();
        }
        assert!((window_mean_spectrum(&w, &p).unwrap().at(4) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn loss_reference_values() {
        let p = GoyParams::default();
        let cfg = LossConfig::full(&p);
        assert!(loss(&power_law(&p, 3.0, -5.0 / 3.0), &cfg).unwrap() < 1e-24);
        let flat = loss(&power_law(&p, 2.0, 0.0), &cfg).unwrap();
        assert!((flat - 25.0 / 9.0).abs() < 1e-12);
        let steep = loss(&power_law(&p, 1.0, -2.0), &cfg).unwrap();
        assert!((steep - 1.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn loss_rejects_zero_energy() {
        let p = GoyParams::default();
        let mut spec = power_law(&p, 1.0, -2.0);
        spec.values[10] = 0.0;
        assert!(matches!(
            loss(&spec, &LossConfig::full(&p)),
            Err(Error::NonPositiveEnergy { shell: 11, .. })
        ));
    }

    #[test]
    fn inertial_band_shells() {
        let p = GoyParams::default();
        assert_eq!(shell_band(&p, 4.0, 16384.0).unwrap(), (6, 18));
        let cfg = LossConfig::inertial(&p).unwrap();
        assert_eq!((cfg.i_lo, cfg.i_hi), (6, 17));
    }

    #[test]
    fn gradient_vanishes_on_exact_power_law() {
        let p = GoyParams::default();
        let mut w = SnapshotWindow::new(5, 0.1).unwrap();
        for i in 0..5 {
            w.push(state_for_power_law(&p, 0.7, KOLMOGOROV_SLOPE, i as f64 * 0.1)).unwrap();
        }
        let (l, g) = loss_and_grad_state(&w, &p, &LossConfig::full(&p)).unwrap();
        assert!(l < 1e-24);
        assert!(g.iter().all(|v| v.abs() < 1e-10), "{g:?}");
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let p = GoyParams::default();
        for cfg in [LossConfig::full(&p), LossConfig::inertial(&p).unwrap()] {
            let mut w = SnapshotWindow::new(8, 0.1).unwrap();
            for i in 0..6 {
                w.push(pseudo_state(&p, 40 + i, i as f64 * 0.1)).unwrap();
            }
            let (_, g) = loss_and_grad_state(&w, &p, &cfg).unwrap();
            let newest = w.newest().unwrap().clone();
            let x = newest.to_real().x;
            for j in 0..x.len() {
                let h = 1e-6 * (1.0 + x[j].abs());
                let eval = |delta: f64| {
                    let mut xs = x.clone();
                    xs[j] += delta;
                    let mut ww = SnapshotWindow::new(8, 0.1).unwrap();
                    for s in w.iter().take(w.len() - 1) {
                        ww.push(s.clone()).unwrap();
                    }
                    ww.push(ShellState::from_real(&xs, newest.t)).unwrap();
                    loss(&window_mean_spectrum(&ww, &p).unwrap(), &cfg).unwrap()
                };
                let fd = (eval(h) - eval(-h)) / (2.0 * h);
                let shell = j / 2 + 1;
                if shell < cfg.i_lo || shell > cfg.i_hi + 1 {
                    assert_eq!(g[j], 0.0);
                } else {
                    let rel = (fd - g[j]).abs() / g[j].abs().max(1e-8);
                    assert!(rel < 1e-5, "component {j}: fd {fd} vs {}", g[j]);
                }
            }
        }
    }

    #[test]
    fn slope_fit_recovers_exponent() {
        let p = GoyParams::default();
        let s = power_law(&p, 5.0, -1.7);
        assert!((s.log_log_slope(6, 18).unwrap() + 1.7).abs() < 1e-12);
    }

    #[test]
    fn csv_layout() {
        let p = GoyParams::default();
        let mut buf = Vec::new();
        energy_spectrum(&ShellState::initial_condition(&p), &p).write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "shell_index,k,value");
        assert_eq!(lines.len(), 23);
        assert_eq!(lines[1], "1,1.25e-1,0e0");
    }
}
