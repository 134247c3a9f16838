use std::fmt;

use thiserror::Error;

use crate::instance::Violation;

pub type Result<T> = std::result::Result<T, Error>;

/// Every violated instance invariant, in the order they were found.
#[derive(Debug, Clone, PartialEq)]
pub struct Violations(pub Vec<Violation>);

impl fmt::Display for Violations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    Invalid(Violations),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        message: String,
        line: usize,
        column: usize,
    },

    #[error("model `{model}` cannot be used with a {profile} position profile")]
    ModelProfileMismatch {
        model: &'static str,
        profile: &'static str,
    },

    #[error("slot index {index} out of range for {len} slots")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),

    #[error("unknown advertiser `{0}`")]
    UnknownAdvertiser(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quality grid has {distinct} distinct values, need at least 3")]
    GridTooSmall { distinct: usize },

    #[error("slot {0} is empty")]
    SlotEmpty(usize),

    #[error("slots must satisfy k < m (got k={k}, m={m})")]
    NotOrdered { k: usize, m: usize },

    #[error("instance has no candidate advertisers")]
    NoCandidates,

    #[error("instance too large to enumerate: {ads} advertisers exceeds limit {limit}")]
    InstanceTooLarge { ads: usize, limit: usize },

    #[error("infeasible brand configuration: {0}")]
    InfeasibleConfig(String),

    #[error("{slots} positions exceeds enumeration limit {limit}")]
    TooManyPositions { slots: usize, limit: usize },

    #[error("precondition not met: {0}")]
    PreconditionNotMet(String),

    #[error("brand-placement indicator is not monotone in the swept eCPM (drops at {at})")]
    MonotonicityViolation { at: f64 },

    #[error("optimal welfare is zero, ratio undefined")]
    ZeroOptimal,

    #[error("epsilon must be positive (got {0})")]
    NonPositiveEpsilon(f64),

    #[error("epsilon must lie in (0, 1) (got {0})")]
    EpsilonOutOfRange(f64),

    #[error("advertiser `{0}` is not shown")]
    NotShown(String),

    #[error(
        "occupancy not monotone in own bid: at bid {bid} advertiser sits at slot {found}, \
         above its slot {expected} at the full bid"
    )]
    NonMonotoneOccupancy {
        bid: f64,
        found: usize,
        expected: usize,
    },

    #[error("click rate of slot {0} is zero, price undefined")]
    ZeroClickRate(usize),
}

impl Error {
    /// Process exit code for the CLI: 2 for broken internal invariants, 1 for bad input.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::MonotonicityViolation { .. } | Error::NonMonotoneOccupancy { .. } => 2,
            _ => 1,
        }
    }
}
