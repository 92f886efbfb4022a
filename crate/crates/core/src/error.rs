use alloc::string::String;

use thiserror::Error;

/// Errors raised at the public boundary of the core crate.
///
/// Certification routines never use this type for negative outcomes; those
/// are verdict values.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Two operands live in different algebras.
    #[error("algebra descriptors do not match")]
    DescriptorMismatch,
    /// Shapes, sizes or references are inconsistent.
    #[error("structural error: {0}")]
    Structural(String),
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A numerical routine failed to produce a usable answer.
    #[error("numerical failure: {0}")]
    Numeric(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

macro_rules! structural {
    ($($arg:tt)*) => { $crate::error::Error::Structural(alloc::format!($($arg)*)) };
}
macro_rules! domain {
    ($($arg:tt)*) => { $crate::error::Error::Domain(alloc::format!($($arg)*)) };
}
pub(crate) use domain;
pub(crate) use structural;
