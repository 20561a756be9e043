use core::fmt;

use crate::receivers::ReceiverKind;

/// Errors produced by the core model.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument violated a documented precondition.
    InvalidArgument(&'static str),
    /// The requested receiver cannot be built for this instance
    /// (decorrelator with more users than chips, or a singular code Gram matrix).
    ReceiverUnavailable(ReceiverKind),
    /// A linear system was singular or its condition estimate exceeded the guard.
    SingularMatrix { condition_estimate: f64 },
    /// The target-SINR root finder failed to converge inside its bracket.
    NumericFailure { lo: f64, hi: f64 },
    /// Utility is undefined when transmit plus operating power is zero.
    UndefinedUtility,
    /// The user's effective channel gain is zero, so no power achieves a positive SINR.
    NoViableTransmission { user: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::ReceiverUnavailable(kind) => write!(f, "{kind} receiver unavailable"),
            Error::SingularMatrix { condition_estimate } => {
                write!(f, "singular matrix (condition estimate {condition_estimate:e})")
            }
            Error::NumericFailure { lo, hi } => {
                write!(f, "root finder did not converge in bracket [{lo}, {hi}]")
            }
            Error::UndefinedUtility => f.write_str("utility undefined for p + q = 0"),
            Error::NoViableTransmission { user } => {
                write!(f, "user {user} has zero effective channel gain")
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
