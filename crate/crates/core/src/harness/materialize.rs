//! Level labels → concrete model, training and dataset configurations.

use crate::doe::TrialConfig;
use crate::nn::{Activation, LayerSpec, LossKind, ModelSpec, OptimizerKind, TrainingConfig};
use crate::synthdata::DatasetSpec;

use super::config::StudyConfig;
use super::HarnessError;

const TAG_DATASET: u64 = 0xD5;
const TAG_TRIAL: u64 = 0x7A;

/// Filter widths of the four convolution blocks; one max-pool follows each
/// block.
const BLOCK_WIDTHS: [usize; 4] = [32, 64, 128, 256];

pub(crate) fn dataset_seed(study_seed: u64) -> u64 {
    crate::synthdata::mix_seed(study_seed, TAG_DATASET, 0)
}

pub(crate) fn trial_seed(study_seed: u64, run_index: usize) -> u64 {
    crate::synthdata::mix_seed(study_seed, TAG_TRIAL, run_index as u64)
}

fn level<'t>(trial: &'t TrialConfig, factor: &str) -> Result<&'t str, HarnessError> {
    trial.level(factor).ok_or_else(|| HarnessError::UnknownLevel {
        factor: factor.to_string(),
        label: "<missing>".to_string(),
    })
}

fn unknown(factor: &str, label: &str) -> HarnessError {
    HarnessError::UnknownLevel { factor: factor.to_string(), label: label.to_string() }
}

/// Per-block convolution counts for a layer-count level. Level 10 is pinned
/// to (3, 3, 2, 2), which reproduces the published 10-conv architecture;
/// the other levels grow capacity monotonically around it.
fn conv_blocks(label: &str) -> Result<[usize; 4], HarnessError> {
    match label.trim() {
        "6" => Ok([2, 2, 1, 1]),
        "8" => Ok([2, 2, 2, 2]),
        "10" => Ok([3, 3, 2, 2]),
        "12" => Ok([3, 3, 3, 3]),
        other => Err(unknown("layers", other)),
    }
}

fn kernel_size(label: &str) -> Result<usize, HarnessError> {
    match label.trim() {
        "[2x2]" => Ok(2),
        "[3x3]" => Ok(3),
        other => Err(unknown("filter_size", other)),
    }
}

fn activation(label: &str) -> Result<Activation, HarnessError> {
    match label.trim().to_ascii_lowercase().as_str() {
        "relu" => Ok(Activation::Relu),
        "relu6" => Ok(Activation::Relu6),
        other => Err(unknown("activation", other)),
    }
}

fn loss_kind(label: &str) -> Result<LossKind, HarnessError> {
    // Accept the catalog spelling "Sqd. Hinge" as well as the long form.
    let normalized: String = label
        .trim()
        .to_ascii_lowercase()
        .chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .collect();
    match normalized.as_str() {
        "hinge" => Ok(LossKind::Hinge),
        "sqdhinge" | "squaredhinge" => Ok(LossKind::SquaredHinge),
        _ => Err(unknown("loss", label)),
    }
}

fn optimizer(label: &str, lr: f64) -> Result<OptimizerKind, HarnessError> {
    match label.trim().to_ascii_lowercase().as_str() {
        "adam" => Ok(OptimizerKind::adam(lr)),
        "sgd" => Ok(OptimizerKind::sgd(lr)),
        other => Err(unknown("optimizer", other)),
    }
}

/// Builds the sequential spec for a layer-count level: `blocks[b]` convs of
/// width `BLOCK_WIDTHS[b]` followed by a max-pool, then flatten and the
/// single-unit margin head.
pub(crate) fn block_model(
    input_dim: usize,
    blocks: [usize; 4],
    kernel: usize,
    act: Activation,
) -> ModelSpec {
    let mut layers = Vec::new();
    for (width, count) in BLOCK_WIDTHS.into_iter().zip(blocks) {
        for _ in 0..count {
            layers.push(LayerSpec::Conv { filters: width, kernel: (kernel, kernel), activation: act });
        }
        layers.push(LayerSpec::MaxPool);
    }
    layers.push(LayerSpec::Flatten);
    layers.push(LayerSpec::Dense { units: 1 });
    ModelSpec { input: (input_dim, input_dim, 3), layers }
}

/// Deterministically maps one trial's six level labels onto the model spec,
/// training config and dataset spec that realize it.
pub fn materialize_trial(
    trial: &TrialConfig,
    study: &StudyConfig,
) -> Result<(ModelSpec, TrainingConfig, DatasetSpec), HarnessError> {
    let blocks = conv_blocks(level(trial, "layers")?)?;
    let size_label = level(trial, "image_size")?;
    let input_dim = *study
        .image_size_map
        .get(size_label)
        .ok_or_else(|| unknown("image_size", size_label))?;
    let kernel = kernel_size(level(trial, "filter_size")?)?;
    let act = activation(level(trial, "activation")?)?;
    let loss = loss_kind(level(trial, "loss")?)?;
    let opt = optimizer(level(trial, "optimizer")?, study.training.learning_rate)?;

    let model = block_model(input_dim, blocks, kernel, act);
    model.validate().map_err(HarnessError::Nn)?;

    let training = TrainingConfig {
        optimizer: opt,
        loss,
        batch_size: study.training.batch_size,
        epochs: study.training.epochs,
        seed: trial_seed(study.seed, trial.run_index),
    };
    let dataset = study.dataset.to_spec(dataset_seed(study.seed));
    Ok((model, training, dataset))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doe::table2_plan;
    use crate::nn::{count_params, infer_shapes, Shape};

    #[test]
    fn run_12_materializes_as_published() {
        // Fixture run 12: layers 10, [200x200], adam, squared hinge, ReLU, 3x3.
        let study = StudyConfig::default();
        let plan = table2_plan();
        let (model, training, dataset) = materialize_trial(&plan.trials()[11], &study).unwrap();
        let convs: Vec<usize> = model
            .layers
            .iter()
            .filter_map(|l| match l {
                LayerSpec::Conv { filters, kernel, activation } => {
                    assert_eq!(*kernel, (3, 3));
                    assert_eq!(*activation, Activation::Relu);
                    Some(*filters)
                }
                _ => None,
            })
            .collect();
        assert_eq!(convs, vec![32, 32, 32, 64, 64, 64, 128, 128, 256, 256]);
        assert_eq!(model.input, (40, 40, 3), "desk scale maps [200x200] to 40 px");
        assert!(matches!(training.optimizer, OptimizerKind::Adam { lr, .. } if lr == 0.001));
        assert_eq!(training.loss, LossKind::SquaredHinge);
        assert_eq!(dataset.size, study.dataset.size);
    }

    #[test]
    fn optimum_levels_at_paper_scale_reproduce_the_reference_architecture() {
        let study = StudyConfig::paper_scale();
        let trial = crate::doe::TrialConfig::new(
            0,
            vec![
                ("layers".into(), "10".into()),
                ("image_size".into(), "[100x100]".into()),
                ("optimizer".into(), "adam".into()),
                ("loss".into(), "Sqd. Hinge".into()),
                ("activation".into(), "ReLU6".into()),
                ("filter_size".into(), "[3x3]".into()),
            ],
        );
        let (model, _, _) = materialize_trial(&trial, &study).unwrap();
        assert_eq!(model.input, (100, 100, 3));
        // Same shape chain as the published table.
        let shapes = infer_shapes(&model).unwrap();
        let reference = infer_shapes(&crate::nn::table3_reference_spec()).unwrap();
        assert_eq!(shapes, reference);
        assert_eq!(
            shapes[shapes.len() - 2],
            Shape::Flat { d: 9216 },
            "flatten width matches"
        );
        // Uniform 3x3 kernels differ from the published first-block 2x2
        // counts, so the total parameter count is close to but not equal to
        // the reference model's.
        let total = count_params(&model).unwrap().total;
        assert_eq!(total, 1_227_649);
    }

    #[test]
    fn bogus_levels_name_factor_and_label() {
        let study = StudyConfig::default();
        let mut settings = vec![
            ("layers".to_string(), "10".to_string()),
            ("image_size".to_string(), "[100x100]".to_string()),
            ("optimizer".to_string(), "adam".to_string()),
            ("loss".to_string(), "Hinge".to_string()),
            ("activation".to_string(), "relu7".to_string()),
            ("filter_size".to_string(), "[3x3]".to_string()),
        ];
        let trial = crate::doe::TrialConfig::new(1, settings.clone());
        match materialize_trial(&trial, &study) {
            Err(HarnessError::UnknownLevel { factor, label }) => {
                assert_eq!(factor, "activation");
                assert_eq!(label, "relu7");
            }
            other => panic!("expected unknown-level error, got {other:?}"),
        }
        settings[0].1 = "7".to_string();
        settings[4].1 = "ReLU".to_string();
        let trial = crate::doe::TrialConfig::new(1, settings);
        assert!(matches!(
            materialize_trial(&trial, &study),
            Err(HarnessError::UnknownLevel { .. })
        ));
    }

    #[test]
    fn trial_seeds_differ_per_run_and_study() {
        assert_ne!(trial_seed(42, 1), trial_seed(42, 2));
        assert_ne!(trial_seed(42, 1), trial_seed(43, 1));
        assert_eq!(trial_seed(42, 1), trial_seed(42, 1));
    }
}
