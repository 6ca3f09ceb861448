//! Balanced dataset assembly with a stratified train/test split, fully
//! determined by the dataset seed.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::augment::{augment, BRIGHTNESS_BOUNDS, SCALE_BOUNDS};
use super::defects::{apply_defect, DefectKind};
use super::render::generate_nut_face;
use super::{mix_seed, ImageSample, SynthError};

const TAG_CLEAN: u64 = 1;
const TAG_DEFECT: u64 = 3;
const TAG_AUGMENT: u64 = 4;
const TAG_SPLIT: u64 = 6;

/// Proportions of the four defect kinds among defective samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefectMix {
    pub scratch: f64,
    pub dent: f64,
    pub crack: f64,
    pub wrinkle: f64,
}

impl Default for DefectMix {
    fn default() -> Self {
        Self { scratch: 0.25, dent: 0.25, crack: 0.25, wrinkle: 0.25 }
    }
}

impl DefectMix {
    fn proportions(&self) -> [(DefectKind, f64); 4] {
        [
            (DefectKind::Scratch, self.scratch),
            (DefectKind::Dent, self.dent),
            (DefectKind::Crack, self.crack),
            (DefectKind::Wrinkle, self.wrinkle),
        ]
    }

    /// Deterministic stratified choice: sample `index` of `total` picks the
    /// kind whose cumulative band contains (index + ½) / total.
    fn kind_for(&self, index: usize, total: usize) -> DefectKind {
        let position = (index as f64 + 0.5) / total as f64;
        let mut cumulative = 0.0;
        for (kind, share) in self.proportions() {
            cumulative += share;
            if position <= cumulative {
                return kind;
            }
        }
        DefectKind::Wrinkle
    }
}

/// Everything that determines a generated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetSpec {
    /// Rendered image height = width, minimum 32.
    pub size: usize,
    /// Samples per class before splitting (classes are balanced).
    pub per_class: usize,
    pub seed: u64,
    pub defect_mix: DefectMix,
    /// Multiplicative brightness range for augmented samples.
    pub brightness_range: (f64, f64),
    /// Zoom range for augmented samples.
    pub scale_range: (f64, f64),
    /// Train fraction of the stratified split.
    pub split_ratio: f64,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        Self {
            size: 32,
            per_class: 100,
            seed: 42,
            defect_mix: DefectMix::default(),
            brightness_range: (0.9, 1.18),
            scale_range: (0.94, 1.1),
            split_ratio: 0.8,
        }
    }
}

impl DatasetSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.size < 32 {
            return Err(SynthError::InvalidSpec(format!("size {} < 32", self.size)));
        }
        if self.per_class == 0 {
            return Err(SynthError::InvalidSpec("per_class must be at least 1".into()));
        }
        let mix = self.defect_mix;
        let sum = mix.scratch + mix.dent + mix.crack + mix.wrinkle;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(SynthError::InvalidSpec(format!("defect mix sums to {sum}, not 1")));
        }
        if [mix.scratch, mix.dent, mix.crack, mix.wrinkle].iter().any(|&p| p < 0.0) {
            return Err(SynthError::InvalidSpec("negative defect proportion".into()));
        }
        for (name, (lo, hi), bounds) in [
            ("brightness", self.brightness_range, BRIGHTNESS_BOUNDS),
            ("scale", self.scale_range, SCALE_BOUNDS),
        ] {
            if !(lo > 0.0 && lo <= hi && lo >= bounds.0 && hi <= bounds.1) {
                return Err(SynthError::InvalidSpec(format!(
                    "{name} range [{lo}, {hi}] outside [{}, {}]",
                    bounds.0, bounds.1
                )));
            }
        }
        if !(0.0 < self.split_ratio && self.split_ratio < 1.0) {
            return Err(SynthError::InvalidSpec(format!(
                "split ratio {} outside (0, 1)",
                self.split_ratio
            )));
        }
        Ok(())
    }
}

/// Disjoint stratified train/test lists.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitDataset {
    pub train: Vec<ImageSample>,
    pub test: Vec<ImageSample>,
    pub ratio: f64,
}

/// Generates the balanced two-class dataset and splits it. Every sample's
/// randomness is derived from (spec.seed, class, index), so the result is a
/// pure function of the spec regardless of generation order.
pub fn build_dataset(spec: &DatasetSpec) -> Result<SplitDataset, SynthError> {
    spec.validate()?;

    // Matched pairs: defective sample i is clean sample i's face with a
    // defect stamped on, so the defect is the only class-correlated signal.
    let generate_one = |class_defective: bool, i: usize| -> Result<ImageSample, SynthError> {
        let mut sample = {
            let base = generate_nut_face(mix_seed(spec.seed, TAG_CLEAN, i as u64), spec.size)?;
            if class_defective {
                let kind = spec.defect_mix.kind_for(i, spec.per_class);
                apply_defect(&base, kind, mix_seed(spec.seed, TAG_DEFECT, i as u64))?
            } else {
                base
            }
        };
        // Every second sample carries a brightness/scale augmentation.
        if i % 2 == 1 {
            let aug_seed = mix_seed(spec.seed, TAG_AUGMENT + class_defective as u64, i as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(aug_seed);
            let brightness = rng.random_range(spec.brightness_range.0..=spec.brightness_range.1);
            let scale = rng.random_range(spec.scale_range.0..=spec.scale_range.1);
            sample = augment(&sample, brightness, scale, aug_seed)?;
        }
        Ok(sample)
    };

    let clean: Vec<ImageSample> =
        (0..spec.per_class).map(|i| generate_one(false, i)).collect::<Result<_, _>>()?;
    let defective: Vec<ImageSample> =
        (0..spec.per_class).map(|i| generate_one(true, i)).collect::<Result<_, _>>()?;

    // Stratified split: train gets floor(ratio·total) samples overall; the
    // remainder after equal per-class quotas goes to the non-defective
    // class first.
    let total = 2 * spec.per_class;
    let train_total = (spec.split_ratio * total as f64).floor() as usize;
    let quota = (spec.split_ratio * spec.per_class as f64).floor() as usize;
    let remainder = train_total - 2 * quota;
    let quotas = [quota + remainder.min(1), quota + remainder.saturating_sub(1).min(1)];

    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(spec.seed, TAG_SPLIT, 0));
    let mut train = Vec::with_capacity(train_total);
    let mut test = Vec::with_capacity(total - train_total);
    for (class_samples, class_quota) in [clean, defective].into_iter().zip(quotas) {
        let mut order: Vec<usize> = (0..class_samples.len()).collect();
        order.shuffle(&mut rng);
        let mut indexed: Vec<(usize, ImageSample)> =
            order.into_iter().zip(class_samples).map(|(o, s)| (o, s)).collect();
        // `order[i]` is the shuffled rank of sample i.
        indexed.sort_by_key(|(rank, _)| *rank);
        for (rank, sample) in indexed {
            if rank < class_quota {
                train.push(sample);
            } else {
                test.push(sample);
            }
        }
    }

    Ok(SplitDataset { train, test, ratio: spec.split_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthdata::Label;

    fn small_spec() -> DatasetSpec {
        DatasetSpec { per_class: 10, size: 32, seed: 5, ..DatasetSpec::default() }
    }

    #[test]
    fn paper_scale_split_is_211_53() {
        let spec = DatasetSpec { per_class: 132, ..DatasetSpec::default() };
        // Avoid generating 264 images here; check the split arithmetic only.
        let total = 2 * spec.per_class;
        let train_total = (spec.split_ratio * total as f64).floor() as usize;
        assert_eq!(train_total, 211);
        assert_eq!(total - train_total, 53);
    }

    #[test]
    fn split_counts_and_stratification() {
        let split = build_dataset(&small_spec()).unwrap();
        assert_eq!(split.train.len(), 16); // floor(0.8 · 20)
        assert_eq!(split.test.len(), 4);
        let train_defective =
            split.train.iter().filter(|s| s.label == Label::Defective).count();
        // Classes within one sample of each other.
        assert!(
            (train_defective as i64 - (split.train.len() - train_defective) as i64).abs() <= 1
        );
        // Balance before splitting: 10 defective, 10 clean overall.
        let all_defective = split
            .train
            .iter()
            .chain(&split.test)
            .filter(|s| s.label == Label::Defective)
            .count();
        assert_eq!(all_defective, 10);
    }

    #[test]
    fn dataset_is_a_pure_function_of_the_spec() {
        let a = build_dataset(&small_spec()).unwrap();
        let b = build_dataset(&small_spec()).unwrap();
        assert_eq!(a, b);
        let c = build_dataset(&DatasetSpec { seed: 6, ..small_spec() }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn defect_mix_is_respected() {
        let spec = DatasetSpec {
            per_class: 20,
            defect_mix: DefectMix { scratch: 0.5, dent: 0.5, crack: 0.0, wrinkle: 0.0 },
            ..small_spec()
        };
        let split = build_dataset(&spec).unwrap();
        let mut scratches = 0;
        let mut dents = 0;
        for s in split.train.iter().chain(&split.test) {
            match s.provenance.defect {
                Some(DefectKind::Scratch) => scratches += 1,
                Some(DefectKind::Dent) => dents += 1,
                Some(other) => panic!("unexpected kind {other:?}"),
                None => {}
            }
        }
        assert_eq!((scratches, dents), (10, 10));
    }

    #[test]
    fn pixels_in_range_across_the_pipeline() {
        let split = build_dataset(&small_spec()).unwrap();
        for s in split.train.iter().chain(&split.test) {
            assert!(s.pixels.iter().all(|&p| (0.0..=1.0).contains(&p)));
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(build_dataset(&DatasetSpec { size: 16, ..small_spec() }).is_err());
        assert!(build_dataset(&DatasetSpec { per_class: 0, ..small_spec() }).is_err());
        let bad_mix = DefectMix { scratch: 0.5, dent: 0.5, crack: 0.5, wrinkle: 0.0 };
        assert!(build_dataset(&DatasetSpec { defect_mix: bad_mix, ..small_spec() }).is_err());
        assert!(
            build_dataset(&DatasetSpec { scale_range: (0.1, 1.0), ..small_spec() }).is_err()
        );
        assert!(build_dataset(&DatasetSpec { split_ratio: 1.0, ..small_spec() }).is_err());
    }
}
