//! Crate-wide error type.

use std::fmt;

/// Errors produced by scenario construction, the numeric kernels and the
/// solvers. Configuration errors carry the offending field so batch runs
/// can report exactly which key was rejected.
#[derive(Debug, Clone)]
pub enum Error {
    /// A view value that is not on the 1/Q grid or lies outside [1, V].
    InvalidView { value: f64, q: u32, reason: &'static str },
    /// A scenario field violates its constraint.
    InvalidParameter { field: &'static str, message: String },
    /// A configuration file key violates the schema.
    Config { field: String, message: String },
    /// Lambert W called left of the branch point -1/e.
    WDomain { x: f64 },
    /// Bisection bracket endpoints do not straddle a sign change.
    Bracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    /// An iterative routine ran out of iterations; `detail` carries the
    /// last bracket or residuals.
    Convergence { context: &'static str, detail: String },
    /// A view is marked for transmission but no user utilizes it, so its
    /// multicast rate is undefined.
    UnusedTransmittedView { view_value: f64 },
    /// Brute-force enumeration refused to run.
    InstanceTooLarge { candidates: f64, limit: f64 },
    /// I/O failure while reading a configuration file.
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidView { value, q, reason } => {
                write!(f, "invalid view {value}: {reason} (grid spacing 1/{q})")
            }
            Error::InvalidParameter { field, message } => {
                write!(f, "invalid parameter `{field}`: {message}")
            }
            Error::Config { field, message } => {
                write!(f, "config field `{field}`: {message}")
            }
            Error::WDomain { x } => {
                write!(f, "lambert W argument {x:e} below branch point -1/e")
            }
            Error::Bracket { lo, hi, f_lo, f_hi } => write!(
                f,
                "no sign change over bracket [{lo:e}, {hi:e}] (residuals {f_lo:e}, {f_hi:e})"
            ),
            Error::Convergence { context, detail } => {
                write!(f, "{context} failed to converge: {detail}")
            }
            Error::UnusedTransmittedView { view_value } => {
                write!(f, "view {view_value} is transmitted but utilized by no user")
            }
            Error::InstanceTooLarge { candidates, limit } => write!(
                f,
                "instance too large for brute-force search: {candidates:e} candidates (limit {limit:e})"
            ),
            Error::Io(message) => write!(f, "{message}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
