use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge after {evaluations} evaluations (partial value {partial:e}, error estimate {est_error:e})")]
    Quadrature {
        partial: f64,
        est_error: f64,
        evaluations: usize,
    },

    #[error("ODE step size underflow at x = {at} (h = {step:e})")]
    StepUnderflow { at: f64, step: f64 },

    #[error("ODE integration exceeded {0} steps")]
    TooManySteps(usize),

    #[error("integration reached x = {at} without the required event firing")]
    NoEvent { at: f64 },

    #[error("no sign change on [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },

    #[error("shooting failed: {0}")]
    Shooting(String),

    #[error("shooting inconclusive at v = {v}: no event before y = -{y_max}")]
    Inconclusive { v: f64, y_max: f64 },

    #[error("PTW tail is not asymptotic: window spread {spread:.3e} relative to mean (increase M)")]
    TailNotAsymptotic { spread: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("front degeneracy at step {step}: |U[I+2] - U[I-2]| = {gap:e}")]
    FrontDegeneracy { step: usize, gap: f64 },

    #[error("stability violation at step {step}, node {node}: U = {value}")]
    Stability { step: usize, node: usize, value: f64 },

    #[error("fit error: {0}")]
    Fit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
