//! Layer and model specifications, shape inference and parameter counting.

use serde::{Deserialize, Serialize};

use super::NnError;

/// Elementwise activation applied inside a convolution layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    None,
    Relu,
    Relu6,
}

impl Activation {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::None => z,
            Activation::Relu => z.max(0.0),
            Activation::Relu6 => z.max(0.0).min(6.0),
        }
    }

    /// Derivative recovered from the activated output. The gradient passes
    /// on the open interval: exactly 0 at the kink points (y = 0, and y = 6
    /// for the capped variant).
    pub fn grad_from_output(self, y: f64) -> f64 {
        match self {
            Activation::None => 1.0,
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Relu6 => {
                if y > 0.0 && y < 6.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// One layer of the sequential model. Convolutions are stride-1 with `same`
/// zero padding; pooling is 2×2 stride 2 with floor semantics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerSpec {
    Conv { filters: usize, kernel: (usize, usize), activation: Activation },
    MaxPool,
    Flatten,
    Dense { units: usize },
}

/// Per-sample shape at some point in the layer chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shape {
    Spatial { h: usize, w: usize, c: usize },
    Flat { d: usize },
}

impl Shape {
    pub fn len(&self) -> usize {
        match *self {
            Shape::Spatial { h, w, c } => h * w * c,
            Shape::Flat { d } => d,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Input shape plus the ordered layer list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    /// (height, width, channels) of one input image.
    pub input: (usize, usize, usize),
    pub layers: Vec<LayerSpec>,
}

impl ModelSpec {
    /// Checks the shape chain and that the model ends in a single-unit
    /// dense head (the margin-score output).
    pub fn validate(&self) -> Result<(), NnError> {
        infer_shapes(self)?;
        match self.layers.last() {
            Some(LayerSpec::Dense { units: 1 }) => Ok(()),
            other => Err(NnError::Shape(format!(
                "model must end in a single-unit dense layer, got {other:?}"
            ))),
        }
    }
}

/// Output shape after every layer. Conv preserves spatial dims and sets the
/// channel count; pooling halves with floor; flatten collapses to H·W·C;
/// dense maps to its unit count.
pub fn infer_shapes(spec: &ModelSpec) -> Result<Vec<Shape>, NnError> {
    let (h, w, c) = spec.input;
    if h == 0 || w == 0 || c == 0 {
        return Err(NnError::Shape(format!("degenerate input shape {:?}", spec.input)));
    }
    let mut current = Shape::Spatial { h, w, c };
    let mut shapes = Vec::with_capacity(spec.layers.len());
    for (i, layer) in spec.layers.iter().enumerate() {
        current = match (layer, current) {
            (LayerSpec::Conv { filters, kernel, .. }, Shape::Spatial { h, w, .. }) => {
                if *filters == 0 || kernel.0 == 0 || kernel.1 == 0 {
                    return Err(NnError::Shape(format!("layer {i}: degenerate conv spec")));
                }
                Shape::Spatial { h, w, c: *filters }
            }
            (LayerSpec::MaxPool, Shape::Spatial { h, w, c }) => {
                if h < 2 || w < 2 {
                    return Err(NnError::Shape(format!(
                        "layer {i}: cannot pool a {h}x{w} map"
                    )));
                }
                Shape::Spatial { h: h / 2, w: w / 2, c }
            }
            (LayerSpec::Flatten, Shape::Spatial { h, w, c }) => Shape::Flat { d: h * w * c },
            (LayerSpec::Dense { units }, Shape::Flat { d }) => {
                if *units == 0 || d == 0 {
                    return Err(NnError::Shape(format!("layer {i}: degenerate dense spec")));
                }
                Shape::Flat { d: *units }
            }
            (layer, shape) => {
                return Err(NnError::Shape(format!(
                    "layer {i}: {layer:?} cannot follow {shape:?}"
                )));
            }
        };
        shapes.push(current);
    }
    Ok(shapes)
}

/// Per-layer and total trainable parameter counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamCounts {
    pub per_layer: Vec<usize>,
    pub total: usize,
}

/// Conv layers hold `filters · (k_h·k_w·C_in + 1)` scalars, dense layers
/// `units · (D_in + 1)`; pooling and flatten hold none.
pub fn count_params(spec: &ModelSpec) -> Result<ParamCounts, NnError> {
    let shapes = infer_shapes(spec)?;
    let mut per_layer = Vec::with_capacity(spec.layers.len());
    for (i, layer) in spec.layers.iter().enumerate() {
        let input_shape = if i == 0 {
            Shape::Spatial { h: spec.input.0, w: spec.input.1, c: spec.input.2 }
        } else {
            shapes[i - 1]
        };
        let count = match (layer, input_shape) {
            (LayerSpec::Conv { filters, kernel, .. }, Shape::Spatial { c, .. }) => {
                filters * (kernel.0 * kernel.1 * c + 1)
            }
            (LayerSpec::Dense { units }, Shape::Flat { d }) => units * (d + 1),
            _ => 0,
        };
        per_layer.push(count);
    }
    Ok(ParamCounts { total: per_layer.iter().sum(), per_layer })
}

/// The published 10-conv reference architecture at 100×100×3 input with
/// filter widths [32,32,32,64,64,64,128,128,256,256]. The first three
/// convolutions use 2×2 kernels and the rest 3×3, which is what the
/// published per-layer parameter counts imply.
pub fn table3_reference_spec() -> ModelSpec {
    let conv = |filters: usize, k: usize| LayerSpec::Conv {
        filters,
        kernel: (k, k),
        activation: Activation::Relu6,
    };
    ModelSpec {
        input: (100, 100, 3),
        layers: vec![
            conv(32, 2),
            conv(32, 2),
            conv(32, 2),
            LayerSpec::MaxPool,
            conv(64, 3),
            conv(64, 3),
            conv(64, 3),
            LayerSpec::MaxPool,
            conv(128, 3),
            conv(128, 3),
            LayerSpec::MaxPool,
            conv(256, 3),
            conv(256, 3),
            LayerSpec::MaxPool,
            LayerSpec::Flatten,
            LayerSpec::Dense { units: 1 },
        ],
    }
}
