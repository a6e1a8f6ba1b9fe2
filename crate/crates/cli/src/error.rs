//! Exit-code classification and the one-line error format.

use std::fmt;
use watt_core::Error;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_COMPUTATION: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable input or data that fails validation.
    Usage { kind: &'static str, message: String },
    /// The estimation pipeline failed on valid input.
    Computation { kind: &'static str, message: String },
}

impl CliError {
    pub fn usage(kind: &'static str, message: impl Into<String>) -> Self {
        Self::Usage {
            kind,
            message: message.into(),
        }
    }

    pub fn missing_flag(flag: &str, needed_by: &str) -> Self {
        Self::usage(
            "missing-flag",
            format!("{flag} is required for {needed_by}"),
        )
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage { .. } => EXIT_USAGE,
            Self::Computation { .. } => EXIT_COMPUTATION,
        }
    }
}

/// Printed on stderr as `error[<kind>]: <message>` on a single line.
impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kind, message) = match self {
            Self::Usage { kind, message } | Self::Computation { kind, message } => (kind, message),
        };
        write!(f, "error[{kind}]: {}", message.replace('\n', " "))
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        let kind = match &e {
            Error::LengthMismatch { .. }
            | Error::NonFinite { .. }
            | Error::InvalidTreatment { .. }
            | Error::InvalidNames(_)
            | Error::DimensionMismatch { .. }
            | Error::EmptyGroup(_) => "invalid-data",
            Error::InvalidSpec(_) | Error::InvalidConfig(_) => "invalid-value",
            Error::RankDeficient => "rank-deficient",
            Error::AllControlsTrimmed => "all-controls-trimmed",
            Error::ZeroControlMass => "zero-control-mass",
            Error::ZeroWeightGroup(_) => "zero-weight-group",
            Error::DegenerateBootstrap { .. } => "degenerate-bootstrap",
            Error::Replicate { .. } => "replicate-failed",
        };
        match kind {
            "invalid-data" | "invalid-value" => Self::Usage { kind, message },
            _ => Self::Computation { kind, message },
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::usage("io", e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::usage("csv", e.to_string())
    }
}
