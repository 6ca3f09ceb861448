//! Factors, factor-to-column assignment and materialized trial configs.

use serde::{Deserialize, Serialize};

use super::array::OrthogonalArray;
use super::DoeError;

/// A named design parameter with an ordered list of discrete level labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    name: String,
    levels: Vec<String>,
}

impl Factor {
    /// Validates that the factor has at least two uniquely-labelled levels.
    pub fn new(
        name: impl Into<String>,
        levels: impl IntoIterator<Item = impl Into<String>>,
    ) -> Result<Self, DoeError> {
        let name = name.into();
        let levels: Vec<String> = levels.into_iter().map(Into::into).collect();
        if levels.len() < 2 {
            return Err(DoeError::InvalidFactor {
                name,
                reason: format!("{} level(s), need at least 2", levels.len()),
            });
        }
        for (i, l) in levels.iter().enumerate() {
            if levels[..i].contains(l) {
                return Err(DoeError::InvalidFactor {
                    name,
                    reason: format!("duplicate level label '{l}'"),
                });
            }
        }
        Ok(Self { name, levels })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn levels(&self) -> &[String] {
        &self.levels
    }

    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    /// Position of `label` in the level list, if present.
    pub fn level_index(&self, label: &str) -> Option<usize> {
        self.levels.iter().position(|l| l == label)
    }
}

/// One concrete run: a 1-based run index plus one level label per factor,
/// in factor declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub run_index: usize,
    settings: Vec<(String, String)>,
}

impl TrialConfig {
    pub fn new(run_index: usize, settings: Vec<(String, String)>) -> Self {
        Self { run_index, settings }
    }

    /// Factor-name → level-label pairs in declaration order.
    pub fn settings(&self) -> &[(String, String)] {
        &self.settings
    }

    /// Level label assigned to `factor`, if the trial carries it.
    pub fn level(&self, factor: &str) -> Option<&str> {
        self.settings
            .iter()
            .find(|(name, _)| name == factor)
            .map(|(_, label)| label.as_str())
    }
}

/// An orthogonal array with factors bound to columns and all runs
/// materialized as [`TrialConfig`]s.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    array: OrthogonalArray,
    factors: Vec<Factor>,
    assignment: Vec<(String, usize)>,
    trials: Vec<TrialConfig>,
}

impl ExperimentPlan {
    pub(crate) fn from_parts(
        array: OrthogonalArray,
        factors: Vec<Factor>,
        assignment: Vec<(String, usize)>,
        trials: Vec<TrialConfig>,
    ) -> Self {
        Self { array, factors, assignment, trials }
    }

    pub fn array(&self) -> &OrthogonalArray {
        &self.array
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn factor(&self, name: &str) -> Option<&Factor> {
        self.factors.iter().find(|f| f.name() == name)
    }

    /// Factor-name → column-index pairs in declaration order.
    pub fn assignment(&self) -> &[(String, usize)] {
        &self.assignment
    }

    pub fn trials(&self) -> &[TrialConfig] {
        &self.trials
    }

    /// Run indices (1-based) of the trials that carry `label` for `factor`.
    pub fn runs_at_level(&self, factor: &str, label: &str) -> Vec<usize> {
        self.trials
            .iter()
            .filter(|t| t.level(factor) == Some(label))
            .map(|t| t.run_index)
            .collect()
    }
}

/// Binds factors to array columns in declaration order, each to the
/// lowest-index unassigned column with a matching level count, and
/// materializes the trial list.
pub fn assign_factors(
    array: &OrthogonalArray,
    factors: &[Factor],
) -> Result<ExperimentPlan, DoeError> {
    for (i, f) in factors.iter().enumerate() {
        if factors[..i].iter().any(|g| g.name() == f.name()) {
            return Err(DoeError::DuplicateFactor(f.name().to_string()));
        }
    }

    let mut taken = vec![false; array.columns()];
    let mut assignment = Vec::with_capacity(factors.len());
    for f in factors {
        let col = (0..array.columns())
            .find(|&c| !taken[c] && array.level_count(c) == f.level_count())
            .ok_or_else(|| DoeError::NoCompatibleColumn {
                factor: f.name().to_string(),
                levels: f.level_count(),
            })?;
        taken[col] = true;
        assignment.push((f.name().to_string(), col));
    }

    let trials = (0..array.rows())
        .map(|r| {
            let settings = factors
                .iter()
                .zip(&assignment)
                .map(|(f, (_, col))| {
                    (f.name().to_string(), f.levels()[array.cell(r, *col)].clone())
                })
                .collect();
            TrialConfig::new(r + 1, settings)
        })
        .collect();

    Ok(ExperimentPlan::from_parts(
        array.clone(),
        factors.to_vec(),
        assignment,
        trials,
    ))
}

/// Number of runs a complete factorial over `factors` would need: the
/// product of the level counts.
pub fn full_factorial_size(factors: &[Factor]) -> u128 {
    factors.iter().map(|f| f.level_count() as u128).product()
}
