//! Replay recorded plan + response fixtures through the full analysis
//! pipeline without training anything.

use std::io::Read;
use std::path::Path;

use crate::analysis::{
    emit_report, interval_summary, main_effects, predict_best, rank_factors, sn_table,
    AnalysisArtifacts, IntervalSummary, MainEffectsTable, Metric, Objective, PredictedOptimum,
    ReportBundle, ResponseTable,
};
use crate::doe::{load_plan_fixture, verify_orthogonality};

use super::HarnessError;

/// Everything replay computes, alongside the written report bundle.
#[derive(Debug, Clone)]
pub struct ReplayOutcome {
    pub table: ResponseTable,
    pub effects: MainEffectsTable,
    pub intervals: Vec<IntervalSummary>,
    pub ranked_factors: Vec<String>,
    pub optimum: PredictedOptimum,
    pub bundle: ReportBundle,
}

/// Parses the fixtures, checks the plan's orthogonality, computes interval
/// summaries for all four metrics plus main effects, S/N ratios, ranks and
/// the predicted optimum for `metric`, and writes the report bundle.
pub fn replay<P: Read, R: Read>(
    plan_source: P,
    responses_source: R,
    metric: Metric,
    objective: Option<Objective>,
    out_dir: &Path,
) -> Result<ReplayOutcome, HarnessError> {
    let plan = load_plan_fixture(plan_source)?;
    let report = verify_orthogonality(plan.array());
    if !report.pass {
        return Err(HarnessError::InvalidConfig(format!(
            "plan fixture is not orthogonal: {} violation(s), first: {:?}",
            report.violations.len(),
            report.violations.first()
        )));
    }
    let table = ResponseTable::from_csv(plan, responses_source)?;

    let objective = objective.unwrap_or_else(|| metric.default_objective());
    let effects = main_effects(&table, metric);
    let intervals = Metric::ALL
        .iter()
        .map(|&m| interval_summary(&table, m))
        .collect::<Result<Vec<_>, _>>()?;
    let sn = sn_table(&table, metric, objective)?;
    let optimum = predict_best(&table, metric, objective);
    let ranked_factors = rank_factors(&effects);

    let artifacts = AnalysisArtifacts {
        effects: vec![effects.clone()],
        intervals: intervals.clone(),
        sn: Some(sn),
        optimum: Some(optimum.clone()),
    };
    let bundle = emit_report(&artifacts, out_dir)?;

    Ok(ReplayOutcome { table, effects, intervals, ranked_factors, optimum, bundle })
}

/// The embedded 16-run fixtures shipped with the crate.
pub fn embedded_fixtures() -> (&'static str, &'static str) {
    (crate::doe::TABLE2_PLAN_CSV, crate::analysis::TABLE2_RESPONSES_CSV)
}
