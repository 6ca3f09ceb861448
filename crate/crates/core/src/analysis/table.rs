//! Response records and the plan-aligned response table.

use std::io::{BufRead, BufReader, Read};

use serde::{Deserialize, Serialize};

use crate::doe::{table2_plan, ExperimentPlan};

use super::{AnalysisError, Metric};

const RESPONSE_HEADER: &str = "run,train_loss,train_acc,val_loss,val_acc";

pub(crate) const TABLE2_RESPONSES_CSV: &str = include_str!("../../fixtures/table2_responses.csv");

/// Per-run training and validation metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub run_index: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub val_loss: f64,
    pub val_accuracy: f64,
}

impl ResponseRecord {
    fn validate(&self) -> Result<(), String> {
        if !(self.train_loss.is_finite() && self.val_loss.is_finite()) {
            return Err("loss is not finite".into());
        }
        if self.train_loss < 0.0 || self.val_loss < 0.0 {
            return Err("loss is negative".into());
        }
        for acc in [self.train_accuracy, self.val_accuracy] {
            if !(0.0..=1.0).contains(&acc) {
                return Err(format!("accuracy {acc} outside [0, 1]"));
            }
        }
        Ok(())
    }
}

/// A complete set of responses, one record per plan trial.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseTable {
    plan: ExperimentPlan,
    records: Vec<ResponseRecord>,
}

impl ResponseTable {
    /// Builds a table after checking that the records cover the plan's runs
    /// exactly once each, in run order.
    pub fn new(plan: ExperimentPlan, records: Vec<ResponseRecord>) -> Result<Self, AnalysisError> {
        if records.len() != plan.trials().len() {
            return Err(AnalysisError::ResponseMismatch(format!(
                "{} records for {} trials",
                records.len(),
                plan.trials().len()
            )));
        }
        for (trial, record) in plan.trials().iter().zip(&records) {
            if trial.run_index != record.run_index {
                return Err(AnalysisError::ResponseMismatch(format!(
                    "record run {} does not match trial run {}",
                    record.run_index, trial.run_index
                )));
            }
            record.validate().map_err(|reason| {
                AnalysisError::ResponseMismatch(format!("run {}: {reason}", record.run_index))
            })?;
        }
        Ok(Self { plan, records })
    }

    /// Parses the `run,train_loss,train_acc,val_loss,val_acc` format.
    pub fn from_csv<R: Read>(plan: ExperimentPlan, source: R) -> Result<Self, AnalysisError> {
        let reader = BufReader::new(source);
        let mut lines = reader.lines().enumerate();
        let header = match lines.next() {
            Some((_, line)) => line?,
            None => {
                return Err(AnalysisError::ResponseParse { row: 0, reason: "empty input".into() })
            }
        };
        if header.trim_end() != RESPONSE_HEADER {
            return Err(AnalysisError::ResponseParse {
                row: 0,
                reason: format!("header '{}' != '{}'", header.trim_end(), RESPONSE_HEADER),
            });
        }
        let mut records = Vec::new();
        for (row, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.trim_end().split(',').map(str::trim).collect();
            if fields.len() != 5 {
                return Err(AnalysisError::ResponseParse {
                    row,
                    reason: format!("{} fields, expected 5", fields.len()),
                });
            }
            let parse_num = |s: &str| -> Result<f64, AnalysisError> {
                s.parse().map_err(|_| AnalysisError::ResponseParse {
                    row,
                    reason: format!("bad number '{s}'"),
                })
            };
            records.push(ResponseRecord {
                run_index: fields[0].parse().map_err(|_| AnalysisError::ResponseParse {
                    row,
                    reason: format!("bad run index '{}'", fields[0]),
                })?,
                train_loss: parse_num(fields[1])?,
                train_accuracy: parse_num(fields[2])?,
                val_loss: parse_num(fields[3])?,
                val_accuracy: parse_num(fields[4])?,
            });
        }
        Self::new(plan, records)
    }

    /// Serializes in the same schema `from_csv` reads. Floats print in
    /// shortest round-trip form, so load/save is byte-stable.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(RESPONSE_HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.run_index, r.train_loss, r.train_accuracy, r.val_loss, r.val_accuracy
            ));
        }
        out
    }

    pub fn plan(&self) -> &ExperimentPlan {
        &self.plan
    }

    pub fn records(&self) -> &[ResponseRecord] {
        &self.records
    }

    /// All values of `metric` in run order.
    pub fn values(&self, metric: Metric) -> Vec<f64> {
        self.records.iter().map(|r| metric.of(r)).collect()
    }

    /// Values of `metric` over the trials carrying `label` for `factor`.
    pub fn values_at_level(&self, factor: &str, label: &str, metric: Metric) -> Vec<f64> {
        self.plan
            .runs_at_level(factor, label)
            .into_iter()
            .map(|run| {
                let record = self
                    .records
                    .iter()
                    .find(|r| r.run_index == run)
                    .expect("table invariant: one record per trial");
                metric.of(record)
            })
            .collect()
    }
}

/// The shipped 16-run response fixture bound to the shipped plan.
pub fn table2_responses() -> ResponseTable {
    ResponseTable::from_csv(table2_plan(), TABLE2_RESPONSES_CSV.as_bytes())
        .expect("embedded response fixture parses")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_parses_and_round_trips() {
        let table = table2_responses();
        assert_eq!(table.records().len(), 16);
        assert_eq!(table.to_csv(), TABLE2_RESPONSES_CSV);
    }

    #[test]
    fn truncated_responses_rejected() {
        let mut lines: Vec<&str> = TABLE2_RESPONSES_CSV.lines().collect();
        lines.pop();
        let res = ResponseTable::from_csv(table2_plan(), lines.join("\n").as_bytes());
        assert!(matches!(res, Err(AnalysisError::ResponseMismatch(_))));
    }

    #[test]
    fn bad_number_names_row() {
        let broken = TABLE2_RESPONSES_CSV.replace("0.1441", "zero");
        match ResponseTable::from_csv(table2_plan(), broken.as_bytes()) {
            Err(AnalysisError::ResponseParse { row, .. }) => assert_eq!(row, 5),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn out_of_range_accuracy_rejected() {
        let broken = TABLE2_RESPONSES_CSV.replace("0.9145", "1.9145");
        assert!(matches!(
            ResponseTable::from_csv(table2_plan(), broken.as_bytes()),
            Err(AnalysisError::ResponseMismatch(_))
        ));
    }

    #[test]
    fn values_at_level_selects_the_right_runs() {
        let table = table2_responses();
        let adam = table.values_at_level("optimizer", "adam", Metric::ValAccuracy);
        assert_eq!(adam.len(), 8);
        // Runs 1, 2, 5, 6, 11, 12, 15, 16.
        assert_eq!(adam[0], 0.9145);
        assert_eq!(adam[7], 0.9216);
    }
}
