//! KPP reaction functions and their cut-off variants.
//!
//! A cut-off reaction `f_c` coincides with the smooth KPP function `f` above
//! the cut-off `u_c` and vanishes on the closed interval `(-inf, u_c]`, so it
//! jumps by `f_c+ = f(u_c)` at the cut-off.

use crate::{Error, Result};

/// The reaction functions available to the solvers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ReactionKind {
    /// `f(u) = u(1 - u)`.
    Fisher,
    /// `f(u) = lambda (1 - u)` near `u = 1`, continued by `f(u) = u` below
    /// `lambda / (1 + lambda)` so that the KPP conditions hold on `[0, 1]`.
    PiecewiseLinear { lambda: f64 },
}

/// A KPP reaction function together with its cut-off.
#[derive(Clone, Debug, PartialEq)]
pub struct ReactionSpec {
    kind: ReactionKind,
    u_c: f64,
    f_prime_at_1: f64,
    f_c_plus: f64,
    name: String,
}

fn check_cutoff(u_c: f64) -> Result<()> {
    if u_c > 0.0 && u_c < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("cut-off u_c = {u_c} must lie in (0, 1)")))
    }
}

impl ReactionSpec {
    /// Cut-off Fisher reaction.
    pub fn fisher(u_c: f64) -> Result<Self> {
        check_cutoff(u_c)?;
        Ok(Self {
            kind: ReactionKind::Fisher,
            u_c,
            f_prime_at_1: -1.0,
            f_c_plus: u_c * (1.0 - u_c),
            name: "fisher".to_string(),
        })
    }

    /// Smallest admissible cut-off for the piecewise-linear example,
    /// `(1 + lambda / (1 + lambda)) / 2`.
    pub fn pwl_min_cutoff(lambda: f64) -> f64 {
        0.5 * (1.0 + lambda / (1.0 + lambda))
    }

    /// Cut-off piecewise-linear reaction `lambda (1 - u)` on `(u_c, inf)`.
    pub fn piecewise_linear(lambda: f64, u_c: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Domain(format!("lambda = {lambda} must be positive")));
        }
        check_cutoff(u_c)?;
        let bound = Self::pwl_min_cutoff(lambda);
        if u_c < bound {
            return Err(Error::Domain(format!(
                "u_c = {u_c} is below the admissibility bound {bound} for lambda = {lambda}"
            )));
        }
        Ok(Self {
            kind: ReactionKind::PiecewiseLinear { lambda },
            u_c,
            f_prime_at_1: -lambda,
            f_c_plus: lambda * (1.0 - u_c),
            name: format!("pwl(lambda={lambda})"),
        })
    }

    /// Same reaction, different cut-off.
    pub fn with_cutoff(&self, u_c: f64) -> Result<Self> {
        match self.kind {
            ReactionKind::Fisher => Self::fisher(u_c),
            ReactionKind::PiecewiseLinear { lambda } => Self::piecewise_linear(lambda, u_c),
        }
    }

    pub fn kind(&self) -> ReactionKind {
        self.kind
    }

    pub fn u_c(&self) -> f64 {
        self.u_c
    }

    pub fn f_prime_at_1(&self) -> f64 {
        self.f_prime_at_1
    }

    /// `f_c(u_c+) = f(u_c)`.
    pub fn f_c_plus(&self) -> f64 {
        self.f_c_plus
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// True for reactions normalised to `f'(0) = 1` with a smooth `f`. The
    /// piecewise-linear example has a kink and is flagged here.
    pub fn is_smooth(&self) -> bool {
        matches!(self.kind, ReactionKind::Fisher)
    }

    /// The smooth (uncut) reaction `f(u)`.
    #[inline]
    pub fn f(&self, u: f64) -> f64 {
        match self.kind {
            ReactionKind::Fisher => u * (1.0 - u),
            ReactionKind::PiecewiseLinear { lambda } => {
                if u >= lambda / (1.0 + lambda) {
                    lambda * (1.0 - u)
                } else {
                    u
                }
            }
        }
    }

    /// Exact derivative `f'(u)`.
    #[inline]
    pub fn f_prime(&self, u: f64) -> f64 {
        match self.kind {
            ReactionKind::Fisher => 1.0 - 2.0 * u,
            ReactionKind::PiecewiseLinear { lambda } => {
                if u >= lambda / (1.0 + lambda) {
                    -lambda
                } else {
                    1.0
                }
            }
        }
    }

    /// `f(u) / (1 - u)`, finite at `u = 1` because `f(1) = 0`.
    #[inline]
    pub fn f_over_deficit(&self, u: f64) -> f64 {
        match self.kind {
            ReactionKind::Fisher => u,
            ReactionKind::PiecewiseLinear { lambda } => {
                if u >= lambda / (1.0 + lambda) {
                    lambda
                } else {
                    u / (1.0 - u)
                }
            }
        }
    }

    /// The cut-off reaction: zero for `u <= u_c`, `f(u)` above.
    #[inline]
    pub fn cutoff(&self, u: f64) -> f64 {
        if u <= self.u_c {
            0.0
        } else {
            self.f(u)
        }
    }
}

/// Free-function form of [`ReactionSpec::cutoff`].
pub fn cutoff_apply(spec: &ReactionSpec, u: f64) -> f64 {
    spec.cutoff(u)
}

pub fn make_fisher(u_c: f64) -> Result<ReactionSpec> {
    ReactionSpec::fisher(u_c)
}

pub fn make_piecewise_linear(lambda: f64, u_c: f64) -> Result<ReactionSpec> {
    ReactionSpec::piecewise_linear(lambda, u_c)
}
