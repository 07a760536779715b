use core::fmt;

use alloc::string::String;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter or combination of parameters is invalid.
    Config(String),
    /// Two objects that must live on the same grid do not.
    SizeMismatch { expected: usize, found: usize },
    /// The state stopped being finite at the given step.
    Blowup { step: usize },
    /// GMRES hit its iteration cap before reaching the tolerance.
    NoConvergence {
        step: usize,
        iterations: usize,
        residual: f64,
    },
    /// A relative error was requested against a vanishing reference.
    ZeroReference,
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Config(msg) => write!(f, "invalid configuration: {msg}"),
            Error::SizeMismatch { expected, found } => {
                write!(f, "size mismatch: expected {expected} values, found {found}")
            }
            Error::Blowup { step } => write!(f, "solution blew up at step {step}"),
            Error::NoConvergence {
                step,
                iterations,
                residual,
            } => write!(
                f,
                "GMRES did not converge at step {step} after {iterations} iterations \
                 (relative residual {residual:e})"
            ),
            Error::ZeroReference => write!(f, "reference field has zero norm on the window"),
        }
    }
}

impl core::error::Error for Error {}
