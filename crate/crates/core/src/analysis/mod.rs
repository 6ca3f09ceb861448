//! Taguchi-style analysis of a 16-run response table: interval summaries,
//! main effects with delta/rank, S/N ratios, and additive-model prediction
//! of the best configuration.

mod effects;
mod report;
mod svg;
mod table;

pub use effects::{
    interval_summary, main_effects, predict_best, rank_factors, sn_ratio, sn_table,
    FactorEffect, FactorSn, IntervalSummary, LevelMean, MainEffectsTable, PredictedOptimum,
    SnTable,
};
pub use report::{emit_report, AnalysisArtifacts, ReportBundle};
pub use table::{table2_responses, ResponseRecord, ResponseTable};
pub(crate) use table::TABLE2_RESPONSES_CSV;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The four response metrics recorded per run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    TrainLoss,
    TrainAccuracy,
    ValLoss,
    ValAccuracy,
}

impl Metric {
    pub const ALL: [Metric; 4] =
        [Metric::TrainLoss, Metric::TrainAccuracy, Metric::ValLoss, Metric::ValAccuracy];

    /// Extracts this metric from a record.
    pub fn of(self, record: &ResponseRecord) -> f64 {
        match self {
            Metric::TrainLoss => record.train_loss,
            Metric::TrainAccuracy => record.train_accuracy,
            Metric::ValLoss => record.val_loss,
            Metric::ValAccuracy => record.val_accuracy,
        }
    }

    /// Losses are minimized, accuracies maximized.
    pub fn default_objective(self) -> Objective {
        match self {
            Metric::TrainLoss | Metric::ValLoss => Objective::SmallerIsBetter,
            Metric::TrainAccuracy | Metric::ValAccuracy => Objective::LargerIsBetter,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Metric::TrainLoss => "train_loss",
            Metric::TrainAccuracy => "train_acc",
            Metric::ValLoss => "val_loss",
            Metric::ValAccuracy => "val_acc",
        };
        f.write_str(name)
    }
}

impl FromStr for Metric {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "train_loss" => Ok(Metric::TrainLoss),
            "train_acc" | "train_accuracy" => Ok(Metric::TrainAccuracy),
            "val_loss" => Ok(Metric::ValLoss),
            "val_acc" | "val_accuracy" => Ok(Metric::ValAccuracy),
            other => Err(AnalysisError::UnknownMetric(other.to_string())),
        }
    }
}

/// Direction of improvement for a response.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    LargerIsBetter,
    SmallerIsBetter,
}

impl FromStr for Objective {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "max" | "larger" | "larger_is_better" => Ok(Objective::LargerIsBetter),
            "min" | "smaller" | "smaller_is_better" => Ok(Objective::SmallerIsBetter),
            other => Err(AnalysisError::UnknownObjective(other.to_string())),
        }
    }
}

/// Errors from response parsing and the analysis operations.
#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("unknown metric '{0}'")]
    UnknownMetric(String),
    #[error("unknown objective '{0}' (expected max or min)")]
    UnknownObjective(String),
    #[error("insufficient data: {n} record(s), need at least 2")]
    InsufficientData { n: usize },
    #[error("S/N ratio requires strictly positive values, got {0}")]
    NonPositiveValue(f64),
    #[error("response table parse error at row {row}: {reason}")]
    ResponseParse { row: usize, reason: String },
    #[error("responses do not match the plan: {0}")]
    ResponseMismatch(String),
    #[error("report write error: {0}")]
    Io(#[from] std::io::Error),
}
