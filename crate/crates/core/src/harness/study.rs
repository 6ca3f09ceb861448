//! Resumable study execution and the confirmation run.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{PredictedOptimum, ResponseRecord, ResponseTable};
use crate::doe::{assign_factors, plan_to_csv, ExperimentPlan, StandardArray, TrialConfig};
use crate::nn::{save_checkpoint, train, EpochMetrics, Example};
use crate::synthdata::{build_dataset, resize_pixels, DatasetSpec, SplitDataset};

use super::config::StudyConfig;
use super::materialize::materialize_trial;
use super::HarnessError;

/// Persisted outcome of one trial. `error` is set (and metrics absent) when
/// training failed; the study keeps going either way.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: TrialConfig,
    pub metrics: Option<EpochMetrics>,
    /// 1-based best epoch under the max-validation-accuracy rule.
    pub best_epoch: Option<usize>,
    pub wall_seconds: f64,
    pub checkpoint: Option<String>,
    pub error: Option<String>,
}

/// Result of [`run_study`]: the plan, all trial records in run order, the
/// assembled response table, and resume bookkeeping.
#[derive(Debug, Clone)]
pub struct StudyOutcome {
    pub plan: ExperimentPlan,
    pub records: Vec<TrialRecord>,
    pub table: ResponseTable,
    /// Trials actually trained in this invocation.
    pub executed: usize,
    /// Trials loaded from previously persisted results.
    pub resumed: usize,
}

fn to_examples(samples: &[crate::synthdata::ImageSample], input_dim: usize) -> Vec<Example> {
    samples
        .iter()
        .map(|s| Example {
            pixels: if s.size == input_dim {
                s.pixels.clone()
            } else {
                resize_pixels(&s.pixels, s.size, input_dim)
            },
            label: s.label.to_signed(),
        })
        .collect()
}

/// Trains one trial end to end: dataset build, resize to the trial's input
/// dimension, seeded training, checkpoint write. Failures are captured in
/// the record rather than returned.
pub fn execute_trial(study: &StudyConfig, trial: &TrialConfig) -> TrialRecord {
    let started = Instant::now();
    let run = || -> Result<(EpochMetrics, usize, Option<String>), HarnessError> {
        let (model, training, dataset_spec) = materialize_trial(trial, study)?;
        let dataset = build_dataset(&dataset_spec)?;
        let train_set = to_examples(&dataset.train, model.input.0);
        let val_set = to_examples(&dataset.test, model.input.0);
        let outcome = train(&model, &train_set, &val_set, &training)?;

        let checkpoint_dir = study.out_dir.join("checkpoints");
        fs::create_dir_all(&checkpoint_dir)?;
        let checkpoint = checkpoint_dir.join(format!("run_{:02}.ckpt", trial.run_index));
        save_checkpoint(&model, &outcome.params, &checkpoint)?;
        Ok((outcome.best, outcome.best_epoch + 1, Some(checkpoint.display().to_string())))
    };
    match run() {
        Ok((metrics, best_epoch, checkpoint)) => TrialRecord {
            trial: trial.clone(),
            metrics: Some(metrics),
            best_epoch: Some(best_epoch),
            wall_seconds: started.elapsed().as_secs_f64(),
            checkpoint,
            error: None,
        },
        Err(e) => TrialRecord {
            trial: trial.clone(),
            metrics: None,
            best_epoch: None,
            wall_seconds: started.elapsed().as_secs_f64(),
            checkpoint: None,
            error: Some(e.to_string()),
        },
    }
}

fn trial_record_path(out_dir: &Path, run_index: usize) -> PathBuf {
    out_dir.join("trials").join(format!("run_{run_index:02}.json"))
}

fn load_record(path: &Path, trial: &TrialConfig) -> Result<TrialRecord, HarnessError> {
    let text = fs::read_to_string(path)?;
    let record: TrialRecord = serde_json::from_str(&text).map_err(|e| {
        HarnessError::StaleArtifact { path: path.display().to_string(), reason: e.to_string() }
    })?;
    if record.trial != *trial {
        return Err(HarnessError::StaleArtifact {
            path: path.display().to_string(),
            reason: "persisted trial settings do not match the plan".into(),
        });
    }
    Ok(record)
}

fn write_record(path: &Path, record: &TrialRecord) -> Result<(), HarnessError> {
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, serde_json::to_string_pretty(record).expect("record serializes"))?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// The study's experiment plan: the catalog factors assigned onto the
/// mixed-level 16-run array.
pub fn study_plan(study: &StudyConfig) -> Result<ExperimentPlan, HarnessError> {
    let factors = study.factors()?;
    Ok(assign_factors(&StandardArray::L16Mixed.build(), &factors)?)
}

/// Runs every trial of the plan, skipping trials whose result files
/// already exist (resume-by-artifact). Writes `plan.csv`, per-trial JSON
/// records and, when all trials succeed, `responses.csv`.
pub fn run_study(study: &StudyConfig) -> Result<StudyOutcome, HarnessError> {
    study.validate()?;
    let plan = study_plan(study)?;

    fs::create_dir_all(study.out_dir.join("trials"))?;
    fs::write(study.out_dir.join("plan.csv"), plan_to_csv(&plan))?;
    fs::write(study.out_dir.join("study.toml"), study.to_toml())?;

    // Resolve resumable trials first so workers only see fresh ones.
    let mut slots: Vec<(usize, Option<TrialRecord>)> = Vec::with_capacity(plan.trials().len());
    for (i, trial) in plan.trials().iter().enumerate() {
        let path = trial_record_path(&study.out_dir, trial.run_index);
        if path.exists() {
            slots.push((i, Some(load_record(&path, trial)?)));
        } else {
            slots.push((i, None));
        }
    }
    let resumed = slots.iter().filter(|(_, r)| r.is_some()).count();

    let workers = if study.parallelism == 0 {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    } else {
        study.parallelism
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.min(plan.trials().len().max(1)))
        .build()
        .map_err(|e| HarnessError::InvalidConfig(format!("thread pool: {e}")))?;

    let records: Vec<TrialRecord> = pool.install(|| {
        slots
            .into_par_iter()
            .map(|(i, existing)| match existing {
                Some(record) => Ok(record),
                None => {
                    let trial = &plan.trials()[i];
                    let record = execute_trial(study, trial);
                    write_record(&trial_record_path(&study.out_dir, trial.run_index), &record)?;
                    Ok(record)
                }
            })
            .collect::<Result<Vec<_>, HarnessError>>()
    })?;
    let executed = records.len() - resumed;

    let failures: Vec<&TrialRecord> = records.iter().filter(|r| r.error.is_some()).collect();
    if !failures.is_empty() {
        let details = failures
            .iter()
            .map(|r| {
                format!("  run {}: {}", r.trial.run_index, r.error.as_deref().unwrap_or("?"))
            })
            .collect::<Vec<_>>()
            .join("\n");
        return Err(HarnessError::TrialFailures {
            failed: failures.len(),
            total: records.len(),
            details,
        });
    }

    let response_records: Vec<ResponseRecord> = records
        .iter()
        .map(|r| {
            let m = r.metrics.expect("no failures at this point");
            ResponseRecord {
                run_index: r.trial.run_index,
                train_loss: m.train_loss,
                train_accuracy: m.train_accuracy,
                val_loss: m.val_loss,
                val_accuracy: m.val_accuracy,
            }
        })
        .collect();
    let table = ResponseTable::new(plan.clone(), response_records)?;
    fs::write(study.out_dir.join("responses.csv"), table.to_csv())?;

    Ok(StudyOutcome { plan, records, table, executed, resumed })
}

/// Confirmation-run result: the trained record plus the additive-model
/// prediction it is compared against.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfirmOutcome {
    pub record: TrialRecord,
    pub prediction: PredictedOptimum,
}

/// Trains the predicted-best configuration with the study budget. The
/// injected trial uses run index 0 (plan runs are 1-based), so its seed is
/// distinct from every plan trial's but still derived from the study seed.
pub fn confirm(study: &StudyConfig, optimum: &PredictedOptimum) -> Result<ConfirmOutcome, HarnessError> {
    study.validate()?;
    let trial = TrialConfig::new(0, optimum.chosen.clone());
    let record = execute_trial(study, &trial);
    if let Some(error) = &record.error {
        return Err(HarnessError::TrialFailures {
            failed: 1,
            total: 1,
            details: format!("  confirmation run: {error}"),
        });
    }
    fs::create_dir_all(&study.out_dir)?;
    let outcome = ConfirmOutcome { record, prediction: optimum.clone() };
    fs::write(
        study.out_dir.join("confirm.json"),
        serde_json::to_string_pretty(&outcome).expect("outcome serializes"),
    )?;
    Ok(outcome)
}

/// Builds the dataset a study would train on; used by the dataset
/// subcommand so exported data matches study data exactly.
pub fn study_dataset(study: &StudyConfig) -> Result<SplitDataset, HarnessError> {
    let spec: DatasetSpec =
        study.dataset.to_spec(super::materialize::dataset_seed(study.seed));
    Ok(build_dataset(&spec)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{predict_best, Metric, Objective};
    use crate::harness::config::{FactorLevels, TrainingBudget};

    /// A deliberately tiny study: 16 trials of a few seconds total.
    fn tiny_study(dir: &Path) -> StudyConfig {
        let mut config = StudyConfig {
            out_dir: dir.to_path_buf(),
            parallelism: 2,
            training: TrainingBudget { epochs: 1, batch_size: 8, learning_rate: 0.001 },
            ..StudyConfig::default()
        };
        config.dataset.per_class = 6;
        config.image_size_map.insert("[100x100]".to_string(), 32);
        config.image_size_map.insert("[200x200]".to_string(), 32);
        config
    }

    #[test]
    fn tiny_study_runs_resumes_and_analyzes() {
        let dir = tempfile::tempdir().unwrap();
        let study = tiny_study(dir.path());

        let outcome = run_study(&study).unwrap();
        assert_eq!(outcome.records.len(), 16);
        assert_eq!((outcome.executed, outcome.resumed), (16, 0));
        assert!(dir.path().join("responses.csv").exists());
        assert!(dir.path().join("plan.csv").exists());
        let first_bytes = fs::read(dir.path().join("responses.csv")).unwrap();

        // Re-run: everything resumes, bytes identical.
        let again = run_study(&study).unwrap();
        assert_eq!((again.executed, again.resumed), (0, 16));
        assert_eq!(fs::read(dir.path().join("responses.csv")).unwrap(), first_bytes);

        // Delete one record: exactly one trial re-executes, bytes identical
        // (trial determinism).
        fs::remove_file(trial_record_path(dir.path(), 7)).unwrap();
        let third = run_study(&study).unwrap();
        assert_eq!((third.executed, third.resumed), (1, 15));
        assert_eq!(fs::read(dir.path().join("responses.csv")).unwrap(), first_bytes);

        // The table feeds analysis directly.
        let best = predict_best(&third.table, Metric::ValAccuracy, Objective::LargerIsBetter);
        assert_eq!(best.chosen.len(), 6);
    }

    #[test]
    fn stale_artifacts_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let study = tiny_study(dir.path());
        run_study(&study).unwrap();

        // Tamper with a persisted record's settings.
        let path = trial_record_path(dir.path(), 3);
        let text = fs::read_to_string(&path).unwrap().replace("adam", "sgd");
        fs::write(&path, text).unwrap();
        match run_study(&study) {
            Err(HarnessError::StaleArtifact { .. }) => {}
            other => panic!("expected stale-artifact error, got {other:?}"),
        }
    }

    #[test]
    fn confirm_matches_an_injected_identical_trial() {
        let dir = tempfile::tempdir().unwrap();
        let study = tiny_study(dir.path());
        let outcome = run_study(&study).unwrap();
        let optimum =
            predict_best(&outcome.table, Metric::ValAccuracy, Objective::LargerIsBetter);

        let confirm_dir = tempfile::tempdir().unwrap();
        let confirm_study = StudyConfig { out_dir: confirm_dir.path().to_path_buf(), ..study };
        let confirmed = confirm(&confirm_study, &optimum).unwrap();

        // Shared path contract: executing the same injected trial directly
        // yields identical metrics.
        let injected = TrialConfig::new(0, optimum.chosen.clone());
        let direct = execute_trial(&confirm_study, &injected);
        assert_eq!(confirmed.record.metrics, direct.metrics);
        assert_eq!(confirmed.record.best_epoch, direct.best_epoch);
        assert!(confirm_dir.path().join("confirm.json").exists());
    }

    #[test]
    fn factor_subset_study_still_fills_the_array() {
        let dir = tempfile::tempdir().unwrap();
        let mut study = tiny_study(dir.path());
        study.factors.push(FactorLevels {
            name: "layers".into(),
            levels: vec!["6".into(), "8".into()],
        });
        // A 2-level layers factor assigns onto a 2-level column.
        let plan = study_plan(&study).unwrap();
        assert_eq!(plan.trials().len(), 16);
        assert_eq!(plan.runs_at_level("layers", "6").len(), 8);
    }
}
