//! GOY shell-model turbulence with an online-learned dissipation closure.
//!
//! The crate is organised bottom-up:
//!
//! - [`shell_model`]: the GOY vector field, its real Jacobian and parameter
//!   sensitivity;
//! - [`integrator`]: adaptive Dormand-Prince 5(4) with dense output and
//!   classified failures;
//! - [`diagnostics`]: energy, dissipation, spectrum, flux, turnover time and
//!   the spectral-slope loss;
//! - [`adjoint`]: continuous-adjoint and finite-difference `dL/dtheta`;
//! - [`optimizer`]: Adam and the theta guard;
//! - [`controller`]: spin-up, ablation and the online training loop with
//!   checkpointing.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adjoint;
pub mod controller;
pub mod diagnostics;
mod error;
pub mod integrator;
pub mod optimizer;
pub mod shell_model;

pub use error::{Error, Result};
pub use integrator::{IntegratorConfig, SegmentSolution, SolveError, SolveErrorKind, VectorField};
pub use shell_model::{DissipationModel, GoyField, GoyParams, ShellState};
