//! Error type shared across the crate.

use thiserror::Error;

/// Everything that can go wrong while building or solving a model.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input data (row lengths, dimension mismatches, non-finite numbers).
    #[error("schema error: {0}")]
    Schema(String),

    /// Input uses a form the library does not support (e.g. nonzero lower bounds).
    #[error("unsupported form: {0}")]
    UnsupportedForm(String),

    /// The observed point violates a constraint beyond the feasibility tolerance.
    #[error("observation infeasible: row {row} violated by {violation:.3e}")]
    ObservationInfeasible { row: usize, violation: f64 },

    /// An integer-marked variable of the observation is fractional.
    #[error("observation fractional: variable {index} has value {value}")]
    ObservationFractional { index: usize, value: f64 },

    /// The simplex stalled past its cycling guard.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// The LP (or a MILP relaxation) has an unbounded objective.
    #[error("unbounded objective")]
    Unbounded,

    /// An enumeration-based operation was asked for more than it can handle.
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    /// No invertible basis completion exists for the observed support.
    #[error("degenerate basis: {0}")]
    DegenerateBasis(String),

    /// The observation is not a vertex of the feasible region.
    #[error("observation is not an extreme point; use the complementarity model")]
    NotExtreme,

    /// The observation has a zero entry where a strictly interior point is required.
    #[error("observation is not strictly interior: x[{0}] = 0")]
    NotInterior(usize),

    /// All rows of the coefficient matrix are zero.
    #[error("degenerate matrix: {0}")]
    DegenerateMatrix(String),

    /// The tolerance model admits no solution at the given tau.
    #[error("tolerance model infeasible at tau = {0}")]
    ToleranceInfeasible(f64),

    /// A big-M solution pinned a variable against its cap even after retries.
    #[error("big-M too small: a variable reached its cap at M = {0:.3e}")]
    BigMTooSmall(f64),

    /// A recovered certificate failed its identity check.
    #[error("certificate mismatch: {0}")]
    CertificateMismatch(String),

    /// shift_epsilon called on an index it cannot act on.
    #[error("invalid shift: {0}")]
    InvalidShift(String),

    /// scale_cost called on an all-zero structural cost.
    #[error("cannot scale: structural cost is identically zero")]
    NoScale,

    /// A cut point was rejected.
    #[error("invalid cut point: {0}")]
    InvalidCut(String),

    /// A condition that indicates a bug rather than bad input.
    #[error("internal error: {0}")]
    Internal(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
