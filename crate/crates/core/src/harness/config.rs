//! Study configuration: TOML-serializable knobs with desk-scale defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::Metric;
use crate::doe::{table1_factors, Factor, FACTOR_NAMES};
use crate::synthdata::{DatasetSpec, DefectMix};

use super::HarnessError;

/// Per-trial training budget. The defaults are desk scale; the published
/// setup (500 epochs, batch 32) is reachable through the same knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainingBudget {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
}

impl Default for TrainingBudget {
    fn default() -> Self {
        Self { epochs: 30, batch_size: 8, learning_rate: 0.001 }
    }
}

/// Dataset shape knobs. The generation seed is not configurable here: it is
/// always derived from the study seed so one seed pins the whole study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetKnobs {
    pub size: usize,
    pub per_class: usize,
    pub defect_mix: DefectMix,
    pub brightness_range: (f64, f64),
    pub scale_range: (f64, f64),
    pub split_ratio: f64,
}

impl Default for DatasetKnobs {
    fn default() -> Self {
        let d = DatasetSpec::default();
        Self {
            size: d.size,
            per_class: d.per_class,
            defect_mix: d.defect_mix,
            brightness_range: d.brightness_range,
            scale_range: d.scale_range,
            split_ratio: d.split_ratio,
        }
    }
}

impl DatasetKnobs {
    pub fn to_spec(&self, seed: u64) -> DatasetSpec {
        DatasetSpec {
            size: self.size,
            per_class: self.per_class,
            seed,
            defect_mix: self.defect_mix,
            brightness_range: self.brightness_range,
            scale_range: self.scale_range,
            split_ratio: self.split_ratio,
        }
    }
}

/// One factor override: a subset of the catalog levels for a catalog factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorLevels {
    pub name: String,
    pub levels: Vec<String>,
}

/// Everything that determines a study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StudyConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Worker threads for trial execution; 0 means all available cores.
    pub parallelism: usize,
    /// Ranking / confirmation metric.
    pub metric: Metric,
    pub training: TrainingBudget,
    pub dataset: DatasetKnobs,
    /// Image-size level label → model input dimension in pixels. Inputs
    /// that differ from `dataset.size` are produced by bilinear resize,
    /// mirroring how one physical dataset feeds several input resolutions.
    pub image_size_map: BTreeMap<String, usize>,
    /// Factor overrides; every entry must name a catalog factor and use a
    /// subset (≥ 2) of its catalog levels.
    pub factors: Vec<FactorLevels>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        let mut image_size_map = BTreeMap::new();
        image_size_map.insert("[100x100]".to_string(), 32);
        image_size_map.insert("[200x200]".to_string(), 40);
        Self {
            seed: 42,
            out_dir: PathBuf::from("study_out"),
            parallelism: 0,
            metric: Metric::ValAccuracy,
            training: TrainingBudget::default(),
            dataset: DatasetKnobs::default(),
            image_size_map,
            factors: Vec::new(),
        }
    }
}

impl StudyConfig {
    /// The paper-scale profile: 100/200-pixel inputs rendered at 200,
    /// 132 images per class, 500 epochs, batch 32.
    pub fn paper_scale() -> Self {
        let mut cfg = Self::default();
        cfg.image_size_map.insert("[100x100]".to_string(), 100);
        cfg.image_size_map.insert("[200x200]".to_string(), 200);
        cfg.dataset.size = 200;
        cfg.dataset.per_class = 132;
        cfg.training = TrainingBudget { epochs: 500, batch_size: 32, learning_rate: 0.001 };
        cfg
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        let config: StudyConfig =
            toml::from_str(&text).map_err(|e| HarnessError::ConfigParse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("study config serializes")
    }

    /// The factors this study varies: the full catalog, with any
    /// configured level subsets applied.
    pub fn factors(&self) -> Result<Vec<Factor>, HarnessError> {
        let catalog = table1_factors();
        let mut factors = Vec::with_capacity(catalog.len());
        for factor in catalog {
            let levels: Vec<String> = match self.factors.iter().find(|f| f.name == factor.name()) {
                None => factor.levels().to_vec(),
                Some(over) => {
                    for l in &over.levels {
                        if factor.level_index(l).is_none() {
                            return Err(HarnessError::InvalidConfig(format!(
                                "level '{l}' is not a catalog level of factor '{}'",
                                factor.name()
                            )));
                        }
                    }
                    over.levels.clone()
                }
            };
            factors.push(
                Factor::new(factor.name(), levels)
                    .map_err(|e| HarnessError::InvalidConfig(e.to_string()))?,
            );
        }
        Ok(factors)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        for over in &self.factors {
            if !FACTOR_NAMES.contains(&over.name.as_str()) {
                return Err(HarnessError::InvalidConfig(format!(
                    "unknown factor '{}' (expected one of {FACTOR_NAMES:?})",
                    over.name
                )));
            }
        }
        let factors = self.factors()?;
        let image_size = factors
            .iter()
            .find(|f| f.name() == "image_size")
            .expect("catalog contains image_size");
        for label in image_size.levels() {
            match self.image_size_map.get(label) {
                Some(&dim) if dim >= 16 => {}
                Some(&dim) => {
                    return Err(HarnessError::InvalidConfig(format!(
                        "image size {dim} for level '{label}' is below the 16-pixel minimum"
                    )));
                }
                None => {
                    return Err(HarnessError::InvalidConfig(format!(
                        "image_size_map has no entry for level '{label}'"
                    )));
                }
            }
        }
        if self.training.epochs == 0 || self.training.batch_size == 0 {
            return Err(HarnessError::InvalidConfig(
                "epochs and batch_size must be at least 1".into(),
            ));
        }
        if !(self.training.learning_rate > 0.0) {
            return Err(HarnessError::InvalidConfig("learning rate must be positive".into()));
        }
        self.dataset
            .to_spec(0)
            .validate()
            .map_err(|e| HarnessError::InvalidConfig(e.to_string()))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid_and_round_trips() {
        let config = StudyConfig::default();
        config.validate().unwrap();
        let text = config.to_toml();
        let back: StudyConfig = toml::from_str(&text).unwrap();
        assert_eq!(config, back);
    }

    #[test]
    fn paper_scale_profile_is_valid() {
        let config = StudyConfig::paper_scale();
        config.validate().unwrap();
        assert_eq!(config.image_size_map["[200x200]"], 200);
        assert_eq!(config.training.epochs, 500);
        assert_eq!(config.dataset.per_class, 132);
    }

    #[test]
    fn factor_overrides_are_checked_against_the_catalog() {
        let mut config = StudyConfig::default();
        config.factors.push(FactorLevels {
            name: "optimizer".into(),
            levels: vec!["adam".into(), "sgd".into()],
        });
        config.validate().unwrap();

        config.factors[0].levels = vec!["adam".into(), "rmsprop".into()];
        assert!(config.validate().is_err());

        config.factors[0] = FactorLevels { name: "bogus".into(), levels: vec!["a".into()] };
        assert!(config.validate().is_err());
    }

    #[test]
    fn missing_image_size_entry_is_rejected() {
        let mut config = StudyConfig::default();
        config.image_size_map.remove("[200x200]");
        assert!(matches!(config.validate(), Err(HarnessError::InvalidConfig(_))));
    }

    #[test]
    fn partial_toml_uses_defaults() {
        let config: StudyConfig = toml::from_str("seed = 7\n[training]\nepochs = 2\n").unwrap();
        assert_eq!(config.seed, 7);
        assert_eq!(config.training.epochs, 2);
        assert_eq!(config.training.batch_size, TrainingBudget::default().batch_size);
        assert_eq!(config.dataset.per_class, 100);
    }
}
