use std::fmt;
use std::process::ExitCode;

use dataset_effects::effects::EffectError;
use dataset_effects::planner::PlanError;
use dataset_effects::records::{IngestError, RecordError};
use dataset_effects::report::ReportError;
use dataset_effects::simulator::SimError;
use dataset_effects::statevector::StateError;

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad input or arguments. Exit 2.
    Validation(String),
    /// Conditions, dimensions or seeds absent from the store. Exit 3.
    MissingData(String),
    /// Zero-variance results under `--strict`. Exit 4.
    Degenerate(String),
}

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        Self::Validation(msg.into())
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            Self::Validation(_) => 2,
            Self::MissingData(_) => 3,
            Self::Degenerate(_) => 4,
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Validation(m) => write!(f, "{m}"),
            Self::MissingData(m) => write!(f, "missing data: {m}"),
            Self::Degenerate(m) => write!(f, "degenerate: {m}"),
        }
    }
}

impl From<EffectError> for CliError {
    fn from(e: EffectError) -> Self {
        if e.is_missing_data() {
            Self::MissingData(e.to_string())
        } else {
            Self::Validation(e.to_string())
        }
    }
}

impl From<StateError> for CliError {
    fn from(e: StateError) -> Self {
        EffectError::from(e).into()
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        match e {
            ReportError::Effect(inner) => inner.into(),
            ReportError::NoAnalyzableData { .. } | ReportError::MissingDimension { .. } => {
                Self::MissingData(e.to_string())
            }
            other => Self::Validation(other.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Effect(inner) => inner.into(),
            other => Self::Validation(other.to_string()),
        }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        Self::Validation(e.to_string())
    }
}

impl From<RecordError> for CliError {
    fn from(e: RecordError) -> Self {
        Self::Validation(e.to_string())
    }
}

impl From<PlanError> for CliError {
    fn from(e: PlanError) -> Self {
        Self::Validation(e.to_string())
    }
}
