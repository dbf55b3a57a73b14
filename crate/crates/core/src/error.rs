use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Moduli or vector lengths of two operands disagree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A size guard was exceeded or a size parameter is out of range.
    #[error("size limit: {0}")]
    Size(String),

    /// A flow graph violates charge conservation.
    #[error("invalid flow: {0}")]
    InvalidFlow(String),

    /// A tree whose charges do not fuse to the vacuum.
    #[error("invalid tree: {0}")]
    InvalidTree(String),

    /// Invalid configuration: defect lines, rates, simulation settings.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Every mass in the table is zero, so the Hamiltonian has no gap.
    #[error("degenerate Hamiltonian: all excitation energies are zero")]
    DegenerateHamiltonian,

    /// Malformed textual or JSON input.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Whether the error is a guard/size failure rather than a validation failure.
    pub fn is_size(&self) -> bool {
        matches!(self, Error::Size(_))
    }
}
