// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors produced anywhere in the protocol stack.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// The decrypted point does not correspond to any plaintext in the decode window.
    #[error("decode overflow: plaintext outside the window [-{half_width}, {half_width}]")]
    DecodeOverflow { half_width: u64 },

    #[error("missing decryption share: expected {expected} stages, got {applied}")]
    MissingShare { expected: usize, applied: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed encoding: {0}")]
    Encoding(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("row {row} is outside the domain: {reason}")]
    RowOutsideDomain { row: usize, reason: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// No threshold in `[1, L]` keeps the honest rejection rate below eta.
    #[error("background knowledge L={l} is below L_min for N={n}, V={v}")]
    BelowLMin { n: u64, v: u64, l: u64 },

    #[error("target probability unattainable: {0}")]
    TargetUnattainable(String),

    #[error("privacy budget exhausted after {answered} answers")]
    BudgetExhausted { answered: usize },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Short stable name of the variant, for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DecodeOverflow { .. } => "decode_overflow",
            Error::MissingShare { .. } => "missing_share",
            Error::Config(_) => "config",
            Error::Encoding(_) => "encoding",
            Error::Protocol(_) => "protocol",
            Error::RowOutsideDomain { .. } => "row_outside_domain",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::BelowLMin { .. } => "below_l_min",
            Error::TargetUnattainable(_) => "target_unattainable",
            Error::BudgetExhausted { .. } => "budget_exhausted",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
