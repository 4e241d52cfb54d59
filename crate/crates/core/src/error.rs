use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An input violated a mathematical domain restriction (e.g. a
    /// non-positive argument to a log, or a CDF value outside `[0, 1]`).
    #[error("domain error: {0}")]
    Domain(String),

    /// A caller-supplied argument or configuration value is invalid.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Input data failed validation (bad CSV row, negative series entry, ...).
    #[error("data error: {0}")]
    Data(String),

    /// `|phi| >= 1`: the AR(1) state process has no stationary distribution.
    #[error("stationarity error: |phi| = {0} >= 1")]
    Stationarity(f64),

    /// A quadrature integrand evaluated to a non-finite value.
    #[error("numerical error: non-finite integrand at node ({eps}, {logy})")]
    NonFinite { eps: f64, logy: f64 },

    /// Root bracketing failed: `f` has the same sign at both endpoints.
    #[error("bracketing error: f({lo}) and f({hi}) have the same sign")]
    Bracketing { lo: f64, hi: f64 },

    /// Fixed-point iteration hit `max_iter` before reaching tolerance.
    #[error("fixed-point iteration did not converge: residual {residual} after {iterations} iterations")]
    NonConvergence {
        residual: f64,
        iterations: usize,
        history: Vec<f64>,
    },

    /// A pricing formula was evaluated where the growth condition fails.
    #[error("pricing error: {0}")]
    Pricing(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}
