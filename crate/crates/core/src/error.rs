use thiserror::Error;

use crate::inference::FitReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or argument lies outside its admissible domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A root finder exhausted its iteration budget.
    #[error("{what} did not converge; last bracket [{lo}, {hi}]")]
    NoConvergence { what: &'static str, lo: f64, hi: f64 },

    /// Durbin-Levinson met a partial autocorrelation of modulus >= 1.
    #[error("autocorrelation sequence is not positive definite at lag {lag}")]
    NotPositiveDefinite { lag: usize },

    /// A density evaluated to zero, infinity or NaN.
    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The optimizer stopped before meeting its tolerance. The best point
    /// found is returned with `converged = false`.
    #[error("optimizer did not converge (best log-likelihood {})", .0.loglik)]
    NotConverged(Box<FitReport>),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
