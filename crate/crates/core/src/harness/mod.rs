//! Study orchestration: map trial levels onto model/training/dataset
//! configurations, execute the 16-run study resumably, confirm the
//! predicted optimum, and replay recorded response tables.

mod config;
mod materialize;
mod replay;
mod study;

pub use config::{DatasetKnobs, StudyConfig, TrainingBudget};
pub use materialize::materialize_trial;
pub use replay::{replay, ReplayOutcome};
pub use study::{confirm, execute_trial, run_study, ConfirmOutcome, StudyOutcome, TrialRecord};

use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::doe::DoeError;
use crate::nn::NnError;
use crate::synthdata::SynthError;

/// Errors from configuration, materialization and study execution.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("unknown level '{label}' for factor '{factor}'")]
    UnknownLevel { factor: String, label: String },
    #[error("invalid study config: {0}")]
    InvalidConfig(String),
    #[error("config parse error: {0}")]
    ConfigParse(String),
    #[error("stale trial artifact {path}: {reason}")]
    StaleArtifact { path: String, reason: String },
    #[error("{failed} of {total} trials failed:\n{details}")]
    TrialFailures { failed: usize, total: usize, details: String },
    #[error(transparent)]
    Doe(#[from] DoeError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    /// CLI exit code: 2 for fixture/config/data problems, 3 for trial
    /// (training) failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::TrialFailures { .. } | HarnessError::Nn(_) => 3,
            _ => 2,
        }
    }
}
