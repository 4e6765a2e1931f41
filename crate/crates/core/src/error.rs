use std::path::PathBuf;

use thiserror::Error;

pub type SenseResult<T> = Result<T, SenseError>;

#[derive(Debug, Error)]
pub enum SenseError {
    /// A numeric argument fell outside its valid range.
    #[error("invalid `{name}`: {value} ({expected})")]
    InvalidParameter {
        name: &'static str,
        value: String,
        expected: &'static str,
    },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("stream too short: need {needed} samples, got {got}")]
    StreamTooShort { needed: usize, got: usize },

    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    EigenNoConvergence { sweeps: usize, off_norm: f64 },

    /// MDL assigned every eigenvalue to the signal subspace.
    #[error("no noise eigenvalues left (k_hat = {k_hat}, L = {l})")]
    NoNoiseEigenvalues { k_hat: usize, l: usize },

    #[error("{failed} of {trials} trials failed noise estimation (limit 1%)")]
    TooManyFailures { failed: usize, trials: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

impl SenseError {
    pub(crate) fn invalid(name: &'static str, value: impl ToString, expected: &'static str) -> Self {
        SenseError::InvalidParameter {
            name,
            value: value.to_string(),
            expected,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SenseError::Io {
            path: path.into(),
            source,
        }
    }
}
