//! Interval summaries, main effects, S/N ratios and optimum prediction.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::table::ResponseTable;
use super::{AnalysisError, Metric, Objective};

/// Mean, spread and 95% Student-t confidence half-width of one metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalSummary {
    pub metric: Metric,
    pub n: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub half_width: f64,
}

/// Mean response at one factor level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelMean {
    pub level: String,
    pub mean: f64,
    pub count: usize,
}

/// Level means, delta and rank for one factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorEffect {
    pub factor: String,
    pub level_means: Vec<LevelMean>,
    /// max level mean − min level mean.
    pub delta: f64,
    /// 1 = largest delta; ties broken by factor declaration order.
    pub rank: usize,
}

/// Main-effects analysis of one metric over all factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MainEffectsTable {
    pub metric: Metric,
    pub grand_mean: f64,
    pub per_factor: Vec<FactorEffect>,
}

/// Per-level mean S/N ratios for one factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorSn {
    pub factor: String,
    pub level_sn: Vec<(String, f64)>,
}

/// S/N analysis of one metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnTable {
    pub metric: Metric,
    pub objective: Objective,
    pub per_factor: Vec<FactorSn>,
}

/// Best level per factor plus the additive-model response prediction
/// ŷ = T̄ + Σ_f (m_{f,best} − T̄).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedOptimum {
    pub metric: Metric,
    pub objective: Objective,
    /// Factor-name → chosen-level pairs in declaration order.
    pub chosen: Vec<(String, String)>,
    pub grand_mean: f64,
    pub predicted: f64,
}

impl PredictedOptimum {
    pub fn chosen_level(&self, factor: &str) -> Option<&str> {
        self.chosen.iter().find(|(f, _)| f == factor).map(|(_, l)| l.as_str())
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample mean, sample standard deviation (n−1) and the 95% Student-t
/// confidence half-width of `metric` over all runs.
pub fn interval_summary(
    table: &ResponseTable,
    metric: Metric,
) -> Result<IntervalSummary, AnalysisError> {
    let values = table.values(metric);
    let n = values.len();
    if n < 2 {
        return Err(AnalysisError::InsufficientData { n });
    }
    let m = mean(&values);
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64;
    let std_dev = var.sqrt();
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("valid t distribution for n >= 2")
        .inverse_cdf(0.975);
    Ok(IntervalSummary { metric, n, mean: m, std_dev, half_width: t * std_dev / (n as f64).sqrt() })
}

/// Per-factor level means of `metric`, with delta (max − min of the level
/// means) and rank (1 = largest delta, ties by declaration order).
pub fn main_effects(table: &ResponseTable, metric: Metric) -> MainEffectsTable {
    let grand_mean = mean(&table.values(metric));
    let mut per_factor: Vec<FactorEffect> = table
        .plan()
        .factors()
        .iter()
        .map(|factor| {
            let level_means: Vec<LevelMean> = factor
                .levels()
                .iter()
                .map(|label| {
                    let values = table.values_at_level(factor.name(), label, metric);
                    LevelMean { level: label.clone(), mean: mean(&values), count: values.len() }
                })
                .collect();
            let max = level_means.iter().map(|l| l.mean).fold(f64::NEG_INFINITY, f64::max);
            let min = level_means.iter().map(|l| l.mean).fold(f64::INFINITY, f64::min);
            FactorEffect { factor: factor.name().to_string(), level_means, delta: max - min, rank: 0 }
        })
        .collect();

    // Stable sort keeps declaration order among equal deltas.
    let mut order: Vec<usize> = (0..per_factor.len()).collect();
    order.sort_by(|&a, &b| {
        per_factor[b].delta.partial_cmp(&per_factor[a].delta).expect("deltas are finite")
    });
    for (rank0, idx) in order.into_iter().enumerate() {
        per_factor[idx].rank = rank0 + 1;
    }

    MainEffectsTable { metric, grand_mean, per_factor }
}

/// Taguchi signal-to-noise ratio in decibels.
///
/// Larger-is-better: −10·log10((1/n)·Σ 1/yᵢ²). Smaller-is-better:
/// −10·log10((1/n)·Σ yᵢ²). All values must be strictly positive.
pub fn sn_ratio(values: &[f64], objective: Objective) -> Result<f64, AnalysisError> {
    if values.is_empty() {
        return Err(AnalysisError::InsufficientData { n: 0 });
    }
    if let Some(&bad) = values.iter().find(|&&v| !(v > 0.0)) {
        return Err(AnalysisError::NonPositiveValue(bad));
    }
    let msd = match objective {
        Objective::LargerIsBetter => mean(&values.iter().map(|v| 1.0 / (v * v)).collect::<Vec<_>>()),
        Objective::SmallerIsBetter => mean(&values.iter().map(|v| v * v).collect::<Vec<_>>()),
    };
    Ok(-10.0 * msd.log10())
}

/// Per-factor per-level mean S/N ratio of `metric`.
pub fn sn_table(
    table: &ResponseTable,
    metric: Metric,
    objective: Objective,
) -> Result<SnTable, AnalysisError> {
    let per_factor = table
        .plan()
        .factors()
        .iter()
        .map(|factor| {
            let level_sn = factor
                .levels()
                .iter()
                .map(|label| {
                    let values = table.values_at_level(factor.name(), label, metric);
                    let sn = values
                        .iter()
                        .map(|&v| sn_ratio(&[v], objective))
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok((label.clone(), mean(&sn)))
                })
                .collect::<Result<Vec<_>, AnalysisError>>()?;
            Ok(FactorSn { factor: factor.name().to_string(), level_sn })
        })
        .collect::<Result<Vec<_>, AnalysisError>>()?;
    Ok(SnTable { metric, objective, per_factor })
}

/// Factor names ordered by rank (rank 1 first).
pub fn rank_factors(effects: &MainEffectsTable) -> Vec<String> {
    let mut ordered: Vec<&FactorEffect> = effects.per_factor.iter().collect();
    ordered.sort_by_key(|e| e.rank);
    ordered.into_iter().map(|e| e.factor.clone()).collect()
}

/// Chooses the best level of every factor by `objective` over the level
/// means (ties go to the earliest declared level) and predicts the response
/// at that configuration with the additive model.
pub fn predict_best(table: &ResponseTable, metric: Metric, objective: Objective) -> PredictedOptimum {
    let effects = main_effects(table, metric);
    let mut chosen = Vec::with_capacity(effects.per_factor.len());
    let mut predicted = effects.grand_mean;
    for factor in &effects.per_factor {
        let best = factor
            .level_means
            .iter()
            .reduce(|best, cand| {
                let better = match objective {
                    Objective::LargerIsBetter => cand.mean > best.mean,
                    Objective::SmallerIsBetter => cand.mean < best.mean,
                };
                if better {
                    cand
                } else {
                    best
                }
            })
            .expect("factors have at least two levels");
        predicted += best.mean - effects.grand_mean;
        chosen.push((factor.factor.clone(), best.level.clone()));
    }
    PredictedOptimum {
        metric,
        objective,
        chosen,
        grand_mean: effects.grand_mean,
        predicted,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::table::table2_responses;
    use crate::analysis::ResponseRecord;
    use crate::doe::table2_plan;
    use crate::analysis::ResponseTable;

    fn constant_table(c: f64) -> ResponseTable {
        let plan = table2_plan();
        let records = (1..=16)
            .map(|run_index| ResponseRecord {
                run_index,
                train_loss: c,
                train_accuracy: c,
                val_loss: c,
                val_accuracy: c,
            })
            .collect();
        ResponseTable::new(plan, records).unwrap()
    }

    #[test]
    fn interval_of_constant_metric_has_zero_half_width() {
        let table = constant_table(0.5);
        let s = interval_summary(&table, Metric::ValAccuracy).unwrap();
        assert_eq!(s.mean, 0.5);
        assert_eq!(s.half_width, 0.0);
    }

    #[test]
    fn fixture_val_accuracy_interval_matches_direct_arithmetic() {
        let table = table2_responses();
        let values = table.values(Metric::ValAccuracy);
        let oracle_mean = values.iter().sum::<f64>() / 16.0;
        let s = interval_summary(&table, Metric::ValAccuracy).unwrap();
        assert!((s.mean - oracle_mean).abs() < 1e-12);
        // t(0.975, 15) ≈ 2.131; the half width must be positive and symmetric.
        assert!(s.half_width > 0.0);
        let t = s.half_width * (16.0f64).sqrt() / s.std_dev;
        assert!((t - 2.131).abs() < 1e-3, "t = {t}");
    }

    #[test]
    fn optimizer_level_means_match_frozen_oracle() {
        // Oracle: direct sums of the printed values over the adam/sgd runs.
        let table = table2_responses();
        let effects = main_effects(&table, Metric::ValAccuracy);
        let optimizer = &effects.per_factor[2];
        assert_eq!(optimizer.factor, "optimizer");
        let adam = &optimizer.level_means[0];
        let sgd = &optimizer.level_means[1];
        assert_eq!((adam.count, sgd.count), (8, 8));
        let adam_oracle =
            (0.9145 + 0.8629 + 0.8497 + 0.8397 + 0.9021 + 0.9433 + 0.8528 + 0.9216) / 8.0;
        let sgd_oracle =
            (0.6721 + 0.8966 + 0.1883 + 0.9151 + 0.9433 + 0.9201 + 0.9433 + 0.9433) / 8.0;
        assert!((adam.mean - adam_oracle).abs() < 1e-12);
        assert!((sgd.mean - sgd_oracle).abs() < 1e-12);
        assert!((adam.mean - 0.8858).abs() < 5e-5);
        assert!((sgd.mean - 0.8028).abs() < 5e-5);
    }

    #[test]
    fn layer_level_10_is_the_maximum() {
        let table = table2_responses();
        let effects = main_effects(&table, Metric::ValAccuracy);
        let layers = &effects.per_factor[0];
        let ten = layers.level_means.iter().find(|l| l.level == "10").unwrap();
        let oracle = (0.9433 + 0.9201 + 0.9021 + 0.9433) / 4.0;
        assert!((ten.mean - oracle).abs() < 1e-12);
        assert!((ten.mean - 0.9272).abs() < 5e-5);
        for l in &layers.level_means {
            assert!(l.mean <= ten.mean);
        }
    }

    #[test]
    fn constant_metric_effects_are_flat() {
        let table = constant_table(0.25);
        let effects = main_effects(&table, Metric::TrainLoss);
        for (i, fe) in effects.per_factor.iter().enumerate() {
            assert_eq!(fe.delta, 0.0);
            assert_eq!(fe.rank, i + 1, "tie ranks follow declaration order");
            for lm in &fe.level_means {
                assert_eq!(lm.mean, 0.25);
            }
        }
    }

    #[test]
    fn weighted_reconstruction_holds() {
        let table = table2_responses();
        for metric in Metric::ALL {
            let total: f64 = table.values(metric).iter().sum();
            let effects = main_effects(&table, metric);
            for fe in &effects.per_factor {
                let weighted: f64 =
                    fe.level_means.iter().map(|l| l.mean * l.count as f64).sum();
                assert!(
                    (weighted - total).abs() < 1e-9,
                    "{metric} {}: {weighted} vs {total}",
                    fe.factor
                );
            }
        }
    }

    #[test]
    fn sn_identities() {
        assert!((sn_ratio(&[1.0; 5], Objective::LargerIsBetter).unwrap()).abs() < 1e-12);
        assert!((sn_ratio(&[1.0; 5], Objective::SmallerIsBetter).unwrap()).abs() < 1e-12);
        let c = 3.7;
        let sn = sn_ratio(&[c; 8], Objective::LargerIsBetter).unwrap();
        assert!((sn - 20.0 * c.log10()).abs() < 1e-9);
        let sn = sn_ratio(&[c; 8], Objective::SmallerIsBetter).unwrap();
        assert!((sn + 20.0 * c.log10()).abs() < 1e-9);
        assert!(matches!(
            sn_ratio(&[1.0, 0.0], Objective::LargerIsBetter),
            Err(AnalysisError::NonPositiveValue(_))
        ));
        assert!(matches!(
            sn_ratio(&[1.0, -2.0], Objective::SmallerIsBetter),
            Err(AnalysisError::NonPositiveValue(_))
        ));
    }

    #[test]
    fn activation_ranks_last_on_fixture_val_accuracy() {
        let table = table2_responses();
        let effects = main_effects(&table, Metric::ValAccuracy);
        let ranked = rank_factors(&effects);
        assert_eq!(ranked.len(), 6);
        assert_eq!(ranked.last().map(String::as_str), Some("activation"));
        // Ranks are a permutation of 1..=6.
        let mut ranks: Vec<usize> = effects.per_factor.iter().map(|f| f.rank).collect();
        ranks.sort_unstable();
        assert_eq!(ranks, vec![1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn fixture_optimum_levels() {
        let table = table2_responses();
        let best = predict_best(&table, Metric::ValAccuracy, Objective::LargerIsBetter);
        assert_eq!(best.chosen_level("layers"), Some("10"));
        assert_eq!(best.chosen_level("image_size"), Some("[100x100]"));
        assert_eq!(best.chosen_level("optimizer"), Some("adam"));
        assert_eq!(best.chosen_level("loss"), Some("Sqd. Hinge"));
        assert_eq!(best.chosen_level("activation"), Some("ReLU6"));
        assert_eq!(best.chosen_level("filter_size"), Some("[3x3]"));
        assert!(best.predicted > best.grand_mean);
    }

    #[test]
    fn constant_metric_predicts_first_levels_and_the_constant() {
        let table = constant_table(0.4);
        let best = predict_best(&table, Metric::ValLoss, Objective::SmallerIsBetter);
        for ((_, chosen), factor) in best.chosen.iter().zip(table.plan().factors()) {
            assert_eq!(chosen, &factor.levels()[0]);
        }
        assert!((best.predicted - 0.4).abs() < 1e-12);
    }

    #[test]
    fn min_val_loss_levels_are_argmin() {
        let table = table2_responses();
        let best = predict_best(&table, Metric::ValLoss, Objective::SmallerIsBetter);
        let effects = main_effects(&table, Metric::ValLoss);
        for (fe, (factor, level)) in effects.per_factor.iter().zip(&best.chosen) {
            assert_eq!(&fe.factor, factor);
            let chosen_mean =
                fe.level_means.iter().find(|l| &l.level == level).unwrap().mean;
            for lm in &fe.level_means {
                assert!(chosen_mean <= lm.mean);
            }
        }
    }
}
