//! Library-wide error type.
//!
//! The CLI maps these onto process exit codes; the variant split mirrors that
//! contract: bad input (2), defect-table miss (3), resource ceiling (4), and
//! internal-consistency failures (which should never fire on correct code and
//! correct tables).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on user-supplied data failed (singular model, bad prime,
    /// unsupported parameter combination, malformed table file, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The semistability defect of an additive curve at `ell` in {2, 3} is not
    /// covered by the bundled (or user-supplied) defect table.
    #[error(
        "defect-table miss at ell = {ell}: no entry for (v(c4), v(c6), v(Delta)) = \
         ({vc4}, {vc6}, {vdisc}); supply the defect explicitly or extend the table"
    )]
    DefectTableMiss {
        ell: u64,
        /// Valuation of c4 rendered as a string so the infinite marker prints as "inf".
        vc4: String,
        vc6: String,
        vdisc: u64,
    },

    /// A configured enumeration/sampling ceiling was exceeded.
    #[error("resource ceiling exceeded: {0}")]
    ResourceCeiling(String),

    /// An invariant the mathematics guarantees failed to hold. Either the
    /// input data is corrupted (e.g. a wrong defect override) or there is a
    /// bug; the message names the violated claim.
    #[error("internal consistency check failed: {0}")]
    Inconsistency(String),
}

impl Error {
    pub fn invalid_input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn inconsistency(msg: impl Into<String>) -> Self {
        Error::Inconsistency(msg.into())
    }

    pub fn resource_ceiling(msg: impl Into<String>) -> Self {
        Error::ResourceCeiling(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
