//! Hinge-family margin losses over ±1 labels.

use serde::{Deserialize, Serialize};

use super::tensor::Tensor;
use super::NnError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    Hinge,
    SquaredHinge,
}

/// Mean loss over the batch plus the exact (sub)gradient with respect to
/// the scores. Per sample, hinge is `max(0, 1 − t·y)` and squared hinge its
/// square; the subgradient at the hinge point (margin exactly 1) is 0.
pub fn loss_and_grad(
    scores: &Tensor,
    labels: &[f64],
    kind: LossKind,
) -> Result<(f64, Tensor), NnError> {
    let (n, units) = scores.flat()?;
    if units != 1 {
        return Err(NnError::Shape(format!("scores must be (N, 1), got (N, {units})")));
    }
    if labels.len() != n {
        return Err(NnError::Shape(format!("{} labels for {} scores", labels.len(), n)));
    }
    if let Some(&bad) = labels.iter().find(|&&t| t != 1.0 && t != -1.0) {
        return Err(NnError::InvalidLabel(bad));
    }

    let inv_n = 1.0 / n as f64;
    let mut total = 0.0;
    let mut grad = vec![0.0; n];
    for (i, (&y, &t)) in scores.data().iter().zip(labels).enumerate() {
        let h = (1.0 - t * y).max(0.0);
        match kind {
            LossKind::Hinge => {
                total += h;
                if h > 0.0 {
                    grad[i] = -t * inv_n;
                }
            }
            LossKind::SquaredHinge => {
                total += h * h;
                grad[i] = -2.0 * h * t * inv_n;
            }
        }
    }
    Ok((total * inv_n, Tensor::from_parts_unchecked(vec![n, 1], grad)))
}
