//! The six-factor catalog and the shipped 16-run plan fixture.

use std::io::{BufRead, BufReader, Read};

use super::array::OrthogonalArray;
use super::plan::{ExperimentPlan, Factor, TrialConfig};
use super::DoeError;

/// Canonical factor names in declaration order. The fixture's `A`..`F`
/// columns map onto these positionally.
pub const FACTOR_NAMES: [&str; 6] =
    ["layers", "image_size", "optimizer", "loss", "activation", "filter_size"];

const FIXTURE_HEADER: &str = "run,A,B,C,D,E,F";
const FIXTURE_ROWS: usize = 16;

pub(crate) const TABLE2_PLAN_CSV: &str = include_str!("../../fixtures/table2_plan.csv");

/// The six-factor catalog: layer count (4 levels) plus five 2-level factors,
/// with level labels spelled exactly as the fixture prints them.
pub fn table1_factors() -> Vec<Factor> {
    let make = |name: &str, levels: &[&str]| {
        Factor::new(name, levels.iter().copied()).expect("catalog factors are valid")
    };
    vec![
        make("layers", &["6", "8", "10", "12"]),
        make("image_size", &["[100x100]", "[200x200]"]),
        make("optimizer", &["adam", "sgd"]),
        make("loss", &["Hinge", "Sqd. Hinge"]),
        make("activation", &["ReLU", "ReLU6"]),
        make("filter_size", &["[2x2]", "[3x3]"]),
    ]
}

/// Parses a 16-run plan in the fixture schema (`run,A,B,C,D,E,F` with level
/// labels from the factor catalog) into an [`ExperimentPlan`].
pub fn load_plan_fixture<R: Read>(source: R) -> Result<ExperimentPlan, DoeError> {
    let reader = BufReader::new(source);
    let mut lines = reader.lines().enumerate();

    let header = match lines.next() {
        Some((_, line)) => line?,
        None => {
            return Err(DoeError::FixtureParse { row: 0, reason: "empty input".into() });
        }
    };
    if header.trim_end() != FIXTURE_HEADER {
        return Err(DoeError::FixtureParse {
            row: 0,
            reason: format!("header '{}' != '{}'", header.trim_end(), FIXTURE_HEADER),
        });
    }

    let factors = table1_factors();
    let mut cells: Vec<usize> = Vec::with_capacity(FIXTURE_ROWS * factors.len());
    let mut trials: Vec<TrialConfig> = Vec::with_capacity(FIXTURE_ROWS);

    for (line_no, line) in lines {
        let line = line?;
        let row = line_no; // 1-based data row number (header was line 0)
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim_end().split(',').map(str::trim).collect();
        if fields.len() != 1 + factors.len() {
            return Err(DoeError::FixtureParse {
                row,
                reason: format!("{} fields, expected {}", fields.len(), 1 + factors.len()),
            });
        }
        let run_index: usize = fields[0].parse().map_err(|_| DoeError::FixtureParse {
            row,
            reason: format!("bad run index '{}'", fields[0]),
        })?;
        if run_index != trials.len() + 1 {
            return Err(DoeError::FixtureParse {
                row,
                reason: format!("run index {} out of order, expected {}", run_index, trials.len() + 1),
            });
        }
        let mut settings = Vec::with_capacity(factors.len());
        for (factor, &label) in factors.iter().zip(&fields[1..]) {
            let idx = factor.level_index(label).ok_or_else(|| DoeError::FixtureParse {
                row,
                reason: format!("unknown level label '{}' for factor '{}'", label, factor.name()),
            })?;
            cells.push(idx);
            settings.push((factor.name().to_string(), label.to_string()));
        }
        trials.push(TrialConfig::new(run_index, settings));
    }

    if trials.len() != FIXTURE_ROWS {
        return Err(DoeError::FixtureRowCount { found: trials.len(), expected: FIXTURE_ROWS });
    }

    let levels_per_column = factors.iter().map(Factor::level_count).collect();
    let array = OrthogonalArray::new(FIXTURE_ROWS, levels_per_column, cells)?;
    let assignment = factors
        .iter()
        .enumerate()
        .map(|(i, f)| (f.name().to_string(), i))
        .collect();
    Ok(ExperimentPlan::from_parts(array, factors, assignment, trials))
}

/// The shipped 16-run plan, parsed from the embedded fixture.
pub fn table2_plan() -> ExperimentPlan {
    load_plan_fixture(TABLE2_PLAN_CSV.as_bytes()).expect("embedded plan fixture parses")
}

/// Serializes a plan in the fixture schema. Plans whose factors are exactly
/// the canonical six use the `A`..`F` header; other plans use factor names.
pub fn plan_to_csv(plan: &ExperimentPlan) -> String {
    let canonical = plan.factors().len() == FACTOR_NAMES.len()
        && plan.factors().iter().zip(FACTOR_NAMES).all(|(f, n)| f.name() == n);
    let mut out = String::from("run");
    if canonical {
        for letter in ["A", "B", "C", "D", "E", "F"] {
            out.push(',');
            out.push_str(letter);
        }
    } else {
        for f in plan.factors() {
            out.push(',');
            out.push_str(f.name());
        }
    }
    out.push('\n');
    for trial in plan.trials() {
        out.push_str(&trial.run_index.to_string());
        for (_, label) in trial.settings() {
            out.push(',');
            out.push_str(label);
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doe::{assign_factors, verify_orthogonality, StandardArray};

    #[test]
    fn shipped_fixture_row_14() {
        let plan = table2_plan();
        let t = &plan.trials()[13];
        assert_eq!(t.run_index, 14);
        assert_eq!(t.level("layers"), Some("12"));
        assert_eq!(t.level("image_size"), Some("[100x100]"));
        assert_eq!(t.level("optimizer"), Some("sgd"));
        assert_eq!(t.level("loss"), Some("Sqd. Hinge"));
        assert_eq!(t.level("activation"), Some("ReLU"));
        assert_eq!(t.level("filter_size"), Some("[3x3]"));
    }

    #[test]
    fn shipped_fixture_is_orthogonal() {
        let plan = table2_plan();
        let report = verify_orthogonality(plan.array());
        assert!(report.pass, "violations: {:?}", report.violations);
    }

    #[test]
    fn fixture_level_counts() {
        let plan = table2_plan();
        for f in plan.factors() {
            for label in f.levels() {
                assert_eq!(
                    plan.runs_at_level(f.name(), label).len(),
                    16 / f.level_count()
                );
            }
        }
    }

    #[test]
    fn deleted_row_is_rejected() {
        let mut lines: Vec<&str> = TABLE2_PLAN_CSV.lines().collect();
        lines.remove(8);
        let truncated = lines.join("\n");
        match load_plan_fixture(truncated.as_bytes()) {
            Err(DoeError::FixtureParse { row, .. }) => assert_eq!(row, 8),
            other => panic!("expected out-of-order parse error, got {other:?}"),
        }
        // Dropping the *last* row trips the row-count check instead.
        let mut lines: Vec<&str> = TABLE2_PLAN_CSV.lines().collect();
        lines.pop();
        let truncated = lines.join("\n");
        match load_plan_fixture(truncated.as_bytes()) {
            Err(DoeError::FixtureRowCount { found, expected }) => {
                assert_eq!((found, expected), (15, 16));
            }
            other => panic!("expected row-count error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_label_names_row() {
        let broken = TABLE2_PLAN_CSV.replace("10,10,[100x100],sgd", "10,11,[100x100],sgd");
        match load_plan_fixture(broken.as_bytes()) {
            Err(DoeError::FixtureParse { row, reason }) => {
                assert_eq!(row, 10);
                assert!(reason.contains("'11'"), "{reason}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn csv_round_trip_is_byte_exact() {
        let plan = table2_plan();
        assert_eq!(plan_to_csv(&plan), TABLE2_PLAN_CSV);
    }

    #[test]
    fn generated_plan_serializes_with_letter_header() {
        let plan = assign_factors(&StandardArray::L16Mixed.build(), &table1_factors()).unwrap();
        let csv = plan_to_csv(&plan);
        assert!(csv.starts_with("run,A,B,C,D,E,F\n"));
        let reloaded = load_plan_fixture(csv.as_bytes()).unwrap();
        assert_eq!(reloaded.trials(), plan.trials());
    }
}
