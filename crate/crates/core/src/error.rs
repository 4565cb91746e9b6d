use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got} ({what})")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("structure fails the H-type identity: {0}")]
    NotHType(String),
    #[error("central momenta are not compatible: {0}")]
    Incompatible(String),
    #[error("quadrature budget exceeded: {0}")]
    Budget(String),
    #[error("frame is not complex-linear: residual {0:.3e}")]
    FrameInconsistent(f64),
    #[error("operator is not invertible on degree {degree} (eigenvalue {eigenvalue:.3e})")]
    NotInvertible { degree: usize, eigenvalue: f64 },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { what, expected, got })
    }
}
