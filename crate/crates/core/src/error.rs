use std::fmt;

/// Errors surfaced by the simulator and analytic kernels.
#[derive(Debug)]
pub enum Error {
    /// A caller-supplied value was outside the operation's domain.
    InvalidArgument(String),
    /// Inconsistent or unsatisfiable configuration.
    Config(String),
    /// A numerical routine failed to converge or lost internal consistency.
    Numerical(String),
    /// Geometry degenerate to the point of having no defined answer.
    DegenerateGeometry(String),
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(m) => write!(f, "invalid argument: {m}"),
            Error::Config(m) => write!(f, "configuration error: {m}"),
            Error::Numerical(m) => write!(f, "numerical failure: {m}"),
            Error::DegenerateGeometry(m) => write!(f, "degenerate geometry: {m}"),
            Error::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
