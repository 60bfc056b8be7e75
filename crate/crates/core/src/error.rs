use thiserror::Error;

/// Errors raised across the library.
///
/// Numeric payloads are carried as `f64` regardless of the scalar type the
/// failing computation ran in.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input domain: {0}")]
    InputDomain(String),

    #[error("matrix is reducible ({components} strongly connected components)")]
    Reducible { components: usize },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error(
        "majorization condition fails at index {index}: weight {weight} is not below the sum {rest} of the others"
    )]
    Majorization { index: usize, weight: f64, rest: f64 },

    #[error(
        "majorization condition holds only with equality at index {index} (weight {weight}) and the scaling is not attained"
    )]
    MajorizationBoundary { index: usize, weight: f64 },

    #[error("SIR vector outside the feasible region: rho(diag(gamma) F) = {radius} >= 1")]
    InfeasibleSir { radius: f64 },

    #[error("anchor is not on the unit spectral-radius level set (rho = {radius})")]
    OffLevelSet { radius: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("linear program infeasible: {0}")]
    LpInfeasible(String),

    #[error("oracle cost guard: {0}")]
    CostGuard(String),

    #[error("scenario field `{field}`: {reason}")]
    Schema { field: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors that signal a mathematically infeasible request
    /// (as opposed to malformed input or a numerical failure).
    pub fn is_infeasibility(&self) -> bool {
        matches!(
            self,
            Error::Majorization { .. }
                | Error::MajorizationBoundary { .. }
                | Error::InfeasibleSir { .. }
                | Error::OffLevelSet { .. }
                | Error::LpInfeasible(_)
        )
    }

    pub(crate) fn schema(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Schema {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
