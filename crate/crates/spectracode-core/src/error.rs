//! Error type shared by every module of the crate.

use alloc::string::String;
use core::fmt;

/// What went wrong, at the granularity the CLI maps to exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Caller violated a precondition (bad argument, shape mismatch).
    Usage,
    /// Mathematically undefined request (division by zero, ...).
    Domain,
    /// An enumeration budget guard tripped.
    Resource,
    /// A numeric routine failed to converge or lost too much precision.
    Numeric,
    /// A constructive recipe produced an invalid object (rank deficiency, ...).
    Construction,
    /// Input data failed an internal consistency check.
    Consistency,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Error {
    pub kind: ErrorKind,
    pub message: String,
}

impl Error {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        Self { kind, message: message.into() }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Usage, message)
    }

    pub fn domain(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Domain, message)
    }

    pub fn resource(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Resource, message)
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Numeric, message)
    }

    pub fn construction(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Construction, message)
    }

    pub fn consistency(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Consistency, message)
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.kind {
            ErrorKind::Usage => "usage",
            ErrorKind::Domain => "domain",
            ErrorKind::Resource => "resource",
            ErrorKind::Numeric => "numeric",
            ErrorKind::Construction => "construction",
            ErrorKind::Consistency => "consistency",
        };
        write!(f, "{tag} error: {}", self.message)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
