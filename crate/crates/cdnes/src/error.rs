//! Crate-wide error type.

use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug)]
pub enum Error {
    /// A parameter is outside its documented domain.
    InvalidArgument(String),
    /// Random graph sampling hit the resample cap without finding a
    /// connected graph (edge probability too small for the node count).
    GraphGeneration { n: usize, edge_prob: f64, attempts: usize },
    /// Topology is not connected.
    NotConnected,
    /// Matrix violates symmetry where a symmetric input is required.
    NotSymmetric { max_dev: f64 },
    /// Row or column sums deviate from 1 beyond tolerance.
    NotDoublyStochastic { max_dev: f64 },
    /// Spectral gap is zero: consensus cannot contract.
    DegenerateGap,
    /// Vector or matrix dimensions do not agree.
    DimensionMismatch { expected: usize, got: usize },
    /// Game mapping is not strongly monotone.
    NotMonotone { lambda_min: f64 },
    /// An iterate left the finite range; the simulation is aborted.
    Divergence { iteration: u64, max_abs: f64 },
    /// No closed-form contraction constants exist for this operator
    /// configuration; they must be measured instead.
    NoAssertedConstants(String),
    /// A certificate precondition or componentwise inequality failed.
    Infeasible(String),
    Io(std::io::Error),
    /// A serialized topology, matrix, or config value failed to parse.
    Parse(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::GraphGeneration { n, edge_prob, attempts } => write!(
                f,
                "no connected graph on {n} nodes with edge probability {edge_prob} \
                 after {attempts} attempts; raise edge_prob"
            ),
            Error::NotConnected => write!(f, "topology is not connected"),
            Error::NotSymmetric { max_dev } => {
                write!(f, "matrix is not symmetric (max |w_ij - w_ji| = {max_dev:e})")
            }
            Error::NotDoublyStochastic { max_dev } => {
                write!(f, "matrix is not doubly stochastic (max row/col sum deviation {max_dev:e})")
            }
            Error::DegenerateGap => write!(f, "spectral gap is zero; mixing matrix unusable"),
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::NotMonotone { lambda_min } => write!(
                f,
                "mapping is not strongly monotone: lambda_min of the symmetric part is {lambda_min}"
            ),
            Error::Divergence { iteration, max_abs } => write!(
                f,
                "divergence at iteration {iteration}: largest entry magnitude {max_abs:e}"
            ),
            Error::NoAssertedConstants(msg) => {
                write!(f, "no asserted contraction constants: {msg}")
            }
            Error::Infeasible(msg) => write!(f, "certificate infeasible: {msg}"),
            Error::Io(e) => write!(f, "io error: {e}"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}
