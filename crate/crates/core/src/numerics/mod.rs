//! Shared numerical kernels.

mod erf;
mod ode;
mod quad;
mod roots;

pub use erf::{erf, erf_inv, erfc, erfcx};
pub use ode::{ode_integrate, Crossing, Event, EventHit, OdeOptions, OdeSolution};
pub use quad::{
    gauss_kronrod, quad_semi_infinite, quad_semi_infinite_with, truncation_point, QuadratureResult, SemiInfiniteOptions,
};
pub use roots::{bisect, bisect_classified, solve_2x2};

/// `sqrt(pi)`.
pub const SQRT_PI: f64 = 1.772_453_850_905_516;
