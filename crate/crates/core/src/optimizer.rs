//! Bias-corrected Adam and the admissible-range guard for the learned
//! dissipation coefficient.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Adam moments over a parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step_count: u64,
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps_adam: f64,
}

impl AdamState {
    /// Standard hyperparameters with learning rate `1e-9`.
    pub fn new(params: usize) -> Self {
        Self::with_lr(params, 1e-9)
    }

    pub fn with_lr(params: usize, alpha: f64) -> Self {
        Self {
            m: vec![0.0; params],
            v: vec![0.0; params],
            step_count: 0,
            alpha,
            beta1: 0.9,
            beta2: 0.999,
            eps_adam: 1e-8,
        }
    }

    /// Applies one update in place and returns the per-parameter increments.
    pub fn update(&mut self, theta: &mut [f64], grad: &[f64]) -> Result<Vec<f64>> {
        if theta.len() != self.m.len() || grad.len() != self.m.len() {
            return Err(Error::InvalidArgument(format!(
                "adam state tracks {} parameters, got {} values and {} gradients",
                self.m.len(),
                theta.len(),
                grad.len()
            )));
        }
        if grad.iter().chain(theta.iter()).any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteInput("adam input"));
        }
        self.step_count += 1;
        let t = self.step_count as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        let mut deltas = Vec::with_capacity(theta.len());
        for ((th, g), (m, v)) in theta
            .iter_mut()
            .zip(grad)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            let d = -self.alpha * m_hat / (v_hat.sqrt() + self.eps_adam);
            *th += d;
            deltas.push(d);
        }
        Ok(deltas)
    }
}

/// Single-parameter Adam step.
pub fn adam_step(st: &AdamState, theta: f64, grad: f64) -> Result<(AdamState, f64)> {
    let mut next = st.clone();
    let mut th = [theta];
    next.update(&mut th, &[grad])?;
    Ok((next, th[0]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GuardMode {
    None,
    Clamp,
    Reject,
}

impl std::str::FromStr for GuardMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "clamp" => Ok(Self::Clamp),
            "reject" => Ok(Self::Reject),
            other => Err(Error::InvalidArgument(format!("unknown guard mode '{other}'"))),
        }
    }
}

impl std::fmt::Display for GuardMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::None => "none",
            Self::Clamp => "clamp",
            Self::Reject => "reject",
        })
    }
}

/// Admissible interval for theta: non-negative, and below the value where
/// the explicit solver stiffens.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuardPolicy {
    pub mode: GuardMode,
    pub theta_min: f64,
    pub theta_max: f64,
}

impl Default for GuardPolicy {
    fn default() -> Self {
        Self {
            mode: GuardMode::None,
            theta_min: 0.0,
            theta_max: 1e-6,
        }
    }
}

impl GuardPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.theta_min < self.theta_max {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "guard bounds [{}, {}] are empty",
                self.theta_min, self.theta_max
            )))
        }
    }
}

/// Returns the accepted value and whether the guard intervened.
pub fn apply_guard(policy: &GuardPolicy, theta_proposed: f64, theta_current: f64) -> (f64, bool) {
    let inside = theta_proposed >= policy.theta_min && theta_proposed <= policy.theta_max;
    match policy.mode {
        GuardMode::None => (theta_proposed, false),
        _ if inside => (theta_proposed, false),
        GuardMode::Clamp => (theta_proposed.clamp(policy.theta_min, policy.theta_max), true),
        GuardMode::Reject => (theta_current, true),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_gradient_leaves_theta() {
        let st = AdamState::new(1);
        let (st, th) = adam_step(&st, 3e-8, 0.0).unwrap();
        assert_eq!(th, 3e-8);
        assert_eq!(st.step_count, 1);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        for g in [1e-3, 0.5, 42.0] {
            let (_, th) = adam_step(&AdamState::new(1), 0.0, g).unwrap();
            // m_hat = g, v_hat = g^2
            let expect = -1e-9 * g / (g + 1e-8);
            assert!((th - expect).abs() < 1e-24, "g={g}");
            assert!((th + 1e-9).abs() < 1e-14);
        }
    }

    #[test]
    fn constant_gradient_bounded_steps() {
        let mut st = AdamState::new(1);
        let mut th = [0.0];
        for _ in 0..10_000 {
            let d = st.update(&mut th, &[0.37]).unwrap();
            assert!(d[0].abs() <= 1e-9 * (1.0 + 1e-9));
        }
    }

    #[test]
    fn rejects_bad_input() {
        let mut st = AdamState::new(1);
        assert!(st.update(&mut [0.0], &[f64::NAN]).is_err());
        assert!(st.update(&mut [0.0, 1.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn guard_examples() {
        let clamp = GuardPolicy { mode: GuardMode::Clamp, ..Default::default() };
        assert_eq!(apply_guard(&clamp, -2e-9, 1e-9), (0.0, true));
        let reject = GuardPolicy { mode: GuardMode::Reject, ..Default::default() };
        assert_eq!(apply_guard(&reject, 5e-6, 1e-8), (1e-8, true));
        assert_eq!(apply_guard(&reject, 5e-8, 1e-8), (5e-8, false));
        let none = GuardPolicy::default();
        assert_eq!(apply_guard(&none, -2e-9, 1e-9), (-2e-9, false));
    }

    #[test]
    fn state_roundtrips_through_json() {
        let mut st = AdamState::new(2);
        let mut th = [1e-8, 2e-8];
        st.update(&mut th, &[0.3, -1.1]).unwrap();
        let back: AdamState = serde_json::from_str(&serde_json::to_string(&st).unwrap()).unwrap();
        assert_eq!(back, st);
    }

    proptest! {
        #[test]
        fn step_direction_opposes_first_moment(grads in prop::collection::vec(-1e3f64..1e3, 1..50)) {
            let mut st = AdamState::new(1);
            let mut th = [0.0];
            for g in grads {
                let d = st.update(&mut th, &[g]).unwrap()[0];
                if st.m[0] != 0.0 {
                    prop_assert!(d == 0.0 || d.signum() == -st.m[0].signum());
                }
            }
        }

        #[test]
        fn clamp_keeps_theta_in_bounds(steps in prop::collection::vec(-5e-7f64..5e-7, 1..200)) {
            let policy = GuardPolicy { mode: GuardMode::Clamp, ..Default::default() };
            let mut th = 0.0;
            for s in steps {
                let (next, _) = apply_guard(&policy, th + s, th);
                th = next;
                prop_assert!(th >= policy.theta_min && th <= policy.theta_max);
            }
        }
    }
}
