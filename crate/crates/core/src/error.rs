use thiserror::Error;

use crate::sequence::Trace;

/// Errors shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configured cap stopped the computation. `achieved` is the amount of
    /// work completed before the cap was hit (a count, an index, ...).
    #[error("{resource} cap of {cap} reached (achieved {achieved})")]
    Resource { resource: String, cap: u64, achieved: u64 },

    /// A σ-sequence run was asked for more steps than its cap allows.
    #[error("sequence step cap of {cap} reached; partial trace has {} states", partial.states.len())]
    TraceCap { cap: u64, partial: Box<Trace> },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    pub(crate) fn resource(resource: impl Into<String>, cap: u64, achieved: u64) -> Self {
        Error::Resource {
            resource: resource.into(),
            cap,
            achieved,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
