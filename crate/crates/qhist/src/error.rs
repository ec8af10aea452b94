//! Error type shared across the crate.
//!
//! Three families of failures are distinguished because callers treat them
//! differently:
//!
//! - input errors (bad matrices, bad documents, bad indices) abort an analysis;
//! - verdict errors ([`Error::NonCommuting`], [`Error::ZeroConditioning`],
//!   [`Error::InconsistentFamily`]) are substantive answers of the formalism
//!   and are normally converted into report fields rather than propagated;
//! - [`Error::Eigensolver`] signals an internal numerical failure.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix or vector contains a non-finite entry")]
    NonFinite,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not idempotent (residual {residual:.3e})")]
    NotIdempotent { residual: f64 },

    #[error("projector trace {trace} is not close to an integer")]
    NonIntegralTrace { trace: f64 },

    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("state trace {trace} differs from 1")]
    TraceNotOne { trace: f64 },

    #[error("state is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("empty vector list")]
    EmptyVectorList,

    #[error("vectors span only the zero subspace")]
    ZeroSpan,

    #[error("context has no atoms")]
    EmptyContext,

    #[error("context atom {index} is the zero projector")]
    ZeroAtom { index: usize },

    #[error("context atom {index} is not a projector: {source}")]
    InvalidAtom {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("atoms {i} and {j} are not orthogonal (residual {residual:.3e})")]
    OrthogonalityFailure { i: usize, j: usize, residual: f64 },

    #[error("atoms do not sum to the identity (residual {residual:.3e})")]
    CompletenessFailure { residual: f64 },

    #[error("times are not strictly increasing at position {index}")]
    NonIncreasingTimes { index: usize },

    #[error("no unitary registered or composable for the pair ({t_from}, {t_to})")]
    UnregisteredTimePair { t_from: f64, t_to: f64 },

    #[error("atom index {index} outside label set of size {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("properties belong to different contexts")]
    CrossContext,

    #[error("projectors do not commute (commutator norm {residual:.3e}); conditional undefined")]
    NonCommuting { residual: f64 },

    #[error("conditioning probability {probability:.3e} is below tolerance")]
    ZeroConditioning { probability: f64 },

    #[error("family is not consistent (max off-diagonal |D| = {max_offdiagonal:.3e}); probabilities undefined")]
    InconsistentFamily { max_offdiagonal: f64 },

    #[error("scenario error at {path}: {detail}")]
    Scenario { path: String, detail: String },

    #[error("eigensolver failed to converge")]
    Eigensolver,
}

impl Error {
    /// True for errors that are substantive verdicts of the formalism
    /// rather than input or numerical failures.
    pub fn is_verdict(&self) -> bool {
        matches!(
            self,
            Error::NonCommuting { .. }
                | Error::ZeroConditioning { .. }
                | Error::InconsistentFamily { .. }
        )
    }

    /// True for internal numerical failures.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Eigensolver)
    }

    pub(crate) fn at_path(self, path: impl Into<String>) -> Error {
        Error::Scenario {
            path: path.into(),
            detail: self.to_string(),
        }
    }
}
