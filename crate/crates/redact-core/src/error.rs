//! Crate-wide error type.

use alloc::string::String;
use core::fmt;

/// Errors from chain validation, table construction, mechanism sampling,
/// and audits.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A state space needs at least one state.
    EmptyStateSpace,
    /// State labels must be unique.
    DuplicateLabel(String),
    /// Number of matrix rows does not match the state count.
    DimensionMismatch { expected: usize, found: usize },
    /// A matrix row has the wrong number of entries.
    RowLength {
        row: usize,
        expected: usize,
        found: usize,
    },
    /// A transition probability is negative beyond rounding tolerance.
    NegativeEntry { row: usize, col: usize, value: f64 },
    /// A row sum deviates from 1 by more than the load tolerance.
    RowSum { row: usize, sum: f64 },
    /// A probability-vector weight is negative.
    NegativeWeight { index: usize, value: f64 },
    /// Probability-vector weights do not sum to 1 within tolerance.
    WeightSum { sum: f64 },
    /// A state index is out of range for the chain.
    StateOutOfRange { state: usize, n: usize },
    /// Two vectors that must have equal length do not.
    LengthMismatch { left: usize, right: usize },
    /// The linear system for the stationary distribution is singular
    /// beyond tolerance (no unique solution).
    SingularSystem,
    /// The symmetric eigensolve did not converge.
    EigenNonConvergence,
    /// An eigenvalue fell outside its admissible range beyond tolerance.
    EigenvalueRange { value: f64 },
    /// A state carries no stationary mass, so a 1/pi(x) quantity is undefined.
    ZeroStationaryMass { state: String },
    /// Mechanisms are defined for chains with at least two states.
    DegenerateStateSpace,
    /// A per-time table decreased beyond numeric tolerance.
    NonMonotoneTable { time: usize, drop: f64 },
    /// A per-time table value left [0, 1] beyond numeric tolerance.
    TableOutOfRange { time: usize, value: f64 },
    /// A stopping hazard left [0, 1] beyond numeric tolerance.
    HazardOutOfRange { time: usize, value: f64 },
    /// Conditioning on an all-erased prefix whose probability is zero.
    UndefinedConditioning { time: usize },
    /// A release probability was requested past the kernel recursion's
    /// termination point, where the all-erased history is unreachable.
    UnreachableConditioning { time: usize },
    /// A release probability was requested for a (start, state, time)
    /// combination with zero conditional probability.
    ImpossiblePath { time: usize, state: usize },
    /// A trajectory is longer than the table or kernel horizon supports.
    HorizonExceeded { requested: usize, available: usize },
    /// The exact enumeration would visit more weighted atoms than the guard
    /// allows.
    EnumerationTooLarge { atoms: f64, limit: f64 },
    /// The spectral distortion bound requires an ergodic chain.
    BoundUndefined,
    /// The audit prior must give positive weight to every state.
    PriorSupport { state: usize },
    /// A Monte-Carlo routine was given fewer trials than its floor.
    TooFewTrials { trials: usize, minimum: usize },
    /// An internal cross-check between two algebraic routes failed.
    CrossCheckFailed { what: &'static str, deviation: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptyStateSpace => write!(f, "state space is empty"),
            Error::DuplicateLabel(l) => write!(f, "duplicate state label {l:?}"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "expected {expected} rows, found {found}")
            }
            Error::RowLength {
                row,
                expected,
                found,
            } => {
                write!(f, "row {row} has {found} entries, expected {expected}")
            }
            Error::NegativeEntry { row, col, value } => {
                write!(f, "negative entry {value} at row {row}, column {col}")
            }
            Error::RowSum { row, sum } => {
                write!(f, "row {row} sums to {sum}, not 1 within tolerance")
            }
            Error::NegativeWeight { index, value } => {
                write!(f, "negative weight {value} at index {index}")
            }
            Error::WeightSum { sum } => {
                write!(f, "weights sum to {sum}, not 1 within tolerance")
            }
            Error::StateOutOfRange { state, n } => {
                write!(f, "state index {state} out of range for {n} states")
            }
            Error::LengthMismatch { left, right } => {
                write!(f, "length mismatch: {left} vs {right}")
            }
            Error::SingularSystem => {
                write!(
                    f,
                    "singular linear system: stationary distribution is not unique"
                )
            }
            Error::EigenNonConvergence => write!(f, "eigensolve did not converge"),
            Error::EigenvalueRange { value } => {
                write!(f, "eigenvalue {value} outside its admissible range")
            }
            Error::ZeroStationaryMass { state } => {
                write!(f, "state {state:?} has zero stationary mass")
            }
            Error::DegenerateStateSpace => {
                write!(f, "mechanism requires at least two states")
            }
            Error::NonMonotoneTable { time, drop } => {
                write!(f, "table decreased by {drop} at time {time}")
            }
            Error::TableOutOfRange { time, value } => {
                write!(f, "table value {value} outside [0, 1] at time {time}")
            }
            Error::HazardOutOfRange { time, value } => {
                write!(f, "stopping hazard {value} outside [0, 1] at time {time}")
            }
            Error::UndefinedConditioning { time } => {
                write!(f, "conditioning event at time {time} has probability zero")
            }
            Error::UnreachableConditioning { time } => {
                write!(f, "all-erased history at time {time} is unreachable")
            }
            Error::ImpossiblePath { time, state } => {
                write!(
                    f,
                    "state {state} at time {time} has zero conditional probability"
                )
            }
            Error::HorizonExceeded {
                requested,
                available,
            } => {
                write!(
                    f,
                    "horizon {requested} exceeds available horizon {available}"
                )
            }
            Error::EnumerationTooLarge { atoms, limit } => {
                write!(
                    f,
                    "exact enumeration needs {atoms:e} atoms, above the {limit:e} guard"
                )
            }
            Error::BoundUndefined => {
                write!(f, "spectral bound undefined: chain is not ergodic")
            }
            Error::PriorSupport { state } => {
                write!(f, "prior gives zero weight to state {state}")
            }
            Error::TooFewTrials { trials, minimum } => {
                write!(f, "{trials} trials below the minimum of {minimum}")
            }
            Error::CrossCheckFailed { what, deviation } => {
                write!(f, "cross-check failed for {what}: deviation {deviation:e}")
            }
        }
    }
}

impl core::error::Error for Error {}
