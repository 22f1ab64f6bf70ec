use std::fmt;
use std::path::Path;

use ctgvd::corpus::CorpusError;
use ctgvd::eval::EvalError;
use ctgvd::localize::LocalizeError;
use ctgvd::neural::NeuralError;
use ctgvd::pipeline::PipelineError;
use serde_json::json;

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

/// A failure with a machine-readable kind. Input errors exit with 2,
/// everything else with 3.
#[derive(Debug)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
    pub input: bool,
}

impl CliError {
    pub fn input(kind: &'static str, message: impl Into<String>) -> Self {
        CliError {
            kind,
            message: message.into(),
            input: true,
        }
    }

    pub fn internal(kind: &'static str, message: impl Into<String>) -> Self {
        CliError {
            kind,
            message: message.into(),
            input: false,
        }
    }

    pub fn config(message: &str) -> Self {
        Self::input("config", message)
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Self::input("io", format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        if self.input {
            EXIT_INPUT
        } else {
            EXIT_INTERNAL
        }
    }

    pub fn to_json(&self) -> String {
        json!({"error": {"kind": self.kind, "message": self.message}}).to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Frontend { .. } => Self::input("parse", e.to_string()),
            PipelineError::Ctg(_) => Self::internal("ctg", e.to_string()),
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        Self::input("corpus", e.to_string())
    }
}

impl From<NeuralError> for CliError {
    fn from(e: NeuralError) -> Self {
        match e {
            NeuralError::Checkpoint(_) => Self::input("checkpoint", e.to_string()),
            NeuralError::EmptyDataset => Self::input("dataset", e.to_string()),
            _ => Self::internal("neural", e.to_string()),
        }
    }
}

impl From<LocalizeError> for CliError {
    fn from(e: LocalizeError) -> Self {
        match e {
            LocalizeError::NotAttentionModel => Self::input("config", e.to_string()),
            LocalizeError::Neural(n) => n.into(),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        Self::internal("eval", e.to_string())
    }
}
