//! Numerical laboratory for KPP reaction-diffusion fronts whose reaction is
//! switched off below a cut-off concentration `u_c`.
//!
//! The crate is organised bottom-up:
//!
//! * [`reaction`] - KPP reaction functions and their cut-off variants.
//! * [`numerics`] - error functions, quadrature, adaptive Runge-Kutta with
//!   events, root finding.
//! * [`ptw`] - the permanent-form travelling wave and its speed `v*(u_c)`.
//! * [`qivp`] - the explicit moving-boundary finite-difference solver.
//! * [`asym_small`] / [`asym_large`] - evaluators for the small-time and
//!   large-time matched asymptotic structure.
//! * [`harness`] - experiment drivers, comparison reports and CSV output.

// Guards are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Quadrature nodes and erf coefficients are kept as published.
#![allow(clippy::excessive_precision)]

pub mod asym_large;
pub mod asym_small;
pub mod error;
pub mod harness;
pub mod numerics;
pub mod ptw;
pub mod qivp;
pub mod reaction;

pub use error::{Error, Result};
pub use reaction::{ReactionKind, ReactionSpec};
