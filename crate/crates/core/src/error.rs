use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid value for `{name}`: {reason}")]
    Param { name: &'static str, reason: String },

    #[error("solution diverged at step {step}: {quantity} = {value:e}")]
    Divergence {
        step: u64,
        quantity: &'static str,
        value: f64,
    },

    #[error("steady solve did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("records are not uniformly spaced (at index {index})")]
    NonUniformSpacing { index: usize },

    #[error("invalid series: {0}")]
    Series(String),

    #[error("mean mismatch: trajectory mean {trajectory:e}, equilibrium mean {equilibrium:e}")]
    MeanMismatch { trajectory: f64, equilibrium: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Param {
            name,
            reason: reason.into(),
        }
    }
}
