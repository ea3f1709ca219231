use thiserror::Error;

/// Errors raised by the sampling library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid ladder: {0}")]
    InvalidLadder(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("binning mismatch: {0}")]
    BinningMismatch(String),
    #[error("sequence parse error at position {position}: {message}")]
    SequenceParse { position: usize, message: String },
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("non-finite energy encountered after {steps} quench steps")]
    NonFiniteEnergy { steps: usize, last_valid: Vec<f64> },
    #[error("could not generate a clash-free structure in {0} attempts")]
    StructureGeneration(usize),
    #[error("malformed conformation file at line {line}: {message}")]
    ConformationFormat { line: usize, message: String },
    #[error("observer failed: {0}")]
    Observer(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
