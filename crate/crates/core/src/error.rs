use thiserror::Error;

use crate::model::Arm;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("probability {0} lies outside [0, 1]")]
    OutOfRange(String),

    #[error("invalid joint distribution: {0}")]
    InvalidJoint(String),

    #[error("invalid observational parameters: {0}")]
    InvalidObservational(String),

    #[error("invalid family parameters: {0}")]
    InvalidParams(String),

    #[error("interval lower bound {lower} exceeds upper bound {upper}")]
    InvertedInterval { lower: String, upper: String },

    /// No joint distribution reproduces both data sources.
    #[error("experimental and observational data cannot be fused: {0}")]
    IncompatibleEvidence(String),

    #[error("observational data are required for this quantity")]
    MissingObservational,

    #[error("stratum A*={0} has probability zero")]
    NullStratum(Arm),

    #[error("harness needs at least one sampled instance")]
    EmptyHarness,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
