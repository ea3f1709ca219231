use std::path::PathBuf;

/// Harness errors, split by the exit status they map to.
#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("missing input file {0}")]
    MissingInput(PathBuf),
    #[error(transparent)]
    Core(#[from] equisampler_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    /// A run failed part-way; `report` holds what was collected.
    #[error("run aborted: {message}")]
    Aborted { message: String, report: Box<crate::report::RunReport> },
}

impl BenchError {
    /// 2 for problems detected before a run starts, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) | BenchError::MissingInput(_) => 2,
            BenchError::Core(e) if is_config_error(e) => 2,
            _ => 3,
        }
    }
}

fn is_config_error(e: &equisampler_core::Error) -> bool {
    use equisampler_core::Error as E;
    matches!(
        e,
        E::InvalidLadder(_)
            | E::InvalidConfig(_)
            | E::SequenceParse { .. }
            | E::ConformationFormat { .. }
            | E::LengthMismatch { .. }
    )
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;
