//! Dense double-precision tensors, either NHWC or flat (N, D).

use super::NnError;

/// A value-semantic dense array. Batched image tensors are stored NHWC
/// row-major; flat tensors are (batch, features).
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    /// Builds a tensor, checking that the buffer length matches the shape
    /// and every value is finite.
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Result<Self, NnError> {
        let expected: usize = dims.iter().product();
        if dims.is_empty() || data.len() != expected {
            return Err(NnError::Shape(format!(
                "{} values for shape {dims:?} (expected {expected})",
                data.len()
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(NnError::Shape("tensor contains non-finite values".into()));
        }
        Ok(Self { dims, data })
    }

    pub(crate) fn from_parts_unchecked(dims: Vec<usize>, data: Vec<f64>) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), data.len());
        Self { dims, data }
    }

    pub fn zeros(dims: Vec<usize>) -> Self {
        let len = dims.iter().product();
        Self { dims, data: vec![0.0; len] }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Batch size (first dimension).
    pub fn batch(&self) -> usize {
        self.dims[0]
    }

    /// Interprets the tensor as (N, H, W, C).
    pub fn nhwc(&self) -> Result<(usize, usize, usize, usize), NnError> {
        match *self.dims.as_slice() {
            [n, h, w, c] => Ok((n, h, w, c)),
            _ => Err(NnError::Shape(format!("expected NHWC tensor, got {:?}", self.dims))),
        }
    }

    /// Interprets the tensor as flat (N, D).
    pub fn flat(&self) -> Result<(usize, usize), NnError> {
        match *self.dims.as_slice() {
            [n, d] => Ok((n, d)),
            _ => Err(NnError::Shape(format!("expected flat tensor, got {:?}", self.dims))),
        }
    }
}
