//! Orthogonal arrays, factor catalogs and experiment plans.
//!
//! The centrepiece is the mixed-level L16 array (one 4-level column plus
//! twelve 2-level columns) built from the plain L16 by column merging, and
//! the loader for the shipped 16-run plan fixture.

mod array;
mod fixture;
mod plan;

pub use array::{
    build_standard_array, verify_orthogonality, OrthogonalArray, OrthogonalityReport,
    OrthogonalityViolation, StandardArray,
};
pub use fixture::{load_plan_fixture, plan_to_csv, table1_factors, table2_plan, FACTOR_NAMES};
pub(crate) use fixture::TABLE2_PLAN_CSV;
pub use plan::{assign_factors, full_factorial_size, ExperimentPlan, Factor, TrialConfig};

use thiserror::Error;

/// Errors from array construction, factor assignment and fixture parsing.
#[derive(Debug, Error)]
pub enum DoeError {
    #[error("unsupported design '{0}' (expected one of L4, L8, L16, L16_mixed)")]
    UnsupportedDesign(String),
    #[error("inconsistent array dimensions: {0}")]
    InconsistentArray(String),
    #[error("invalid factor '{name}': {reason}")]
    InvalidFactor { name: String, reason: String },
    #[error("duplicate factor name '{0}'")]
    DuplicateFactor(String),
    #[error("no unassigned column with {levels} levels available for factor '{factor}'")]
    NoCompatibleColumn { factor: String, levels: usize },
    #[error("plan fixture parse error at row {row}: {reason}")]
    FixtureParse { row: usize, reason: String },
    #[error("plan fixture has {found} data rows, expected {expected}")]
    FixtureRowCount { found: usize, expected: usize },
    #[error("fixture read error: {0}")]
    Io(#[from] std::io::Error),
}
