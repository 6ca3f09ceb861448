//! The compiled execution engine: flat parameter vector, im2col forward
//! pass and exact backprop.

use rand::Rng;

use super::model::{count_params, infer_shapes, Activation, LayerSpec, ModelSpec, Shape};
use super::tensor::Tensor;
use super::NnError;

/// Safe wrapper over the f64 GEMM kernel. Strides are in elements; passing
/// a transposed view is a matter of swapping row/column strides.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    alpha: f64,
    a: &[f64],
    rsa: isize,
    csa: isize,
    b: &[f64],
    rsb: isize,
    csb: isize,
    beta: f64,
    c: &mut [f64],
    rsc: isize,
    csc: isize,
) {
    if m == 0 || n == 0 {
        return;
    }
    let max_index = |rows: usize, cols: usize, rs: isize, cs: isize| -> usize {
        ((rows as isize - 1) * rs + (cols as isize - 1) * cs) as usize
    };
    assert!(max_index(m, k, rsa, csa) < a.len());
    assert!(max_index(k, n, rsb, csb) < b.len());
    assert!(max_index(m, n, rsc, csc) < c.len());
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            alpha,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            rsc,
            csc,
        );
    }
}

/// Lowers one HWC image into patch-rows: row `y·w + x` holds the k_h×k_w×c
/// receptive field of output position (y, x), zero-filled where the window
/// leaves the image (`same` padding, stride 1).
fn im2col(input: &[f64], h: usize, w: usize, c: usize, kh: usize, kw: usize, cols: &mut [f64]) {
    let pad_top = (kh - 1) / 2;
    let pad_left = (kw - 1) / 2;
    let k = kh * kw * c;
    debug_assert_eq!(input.len(), h * w * c);
    debug_assert_eq!(cols.len(), h * w * k);
    let mut row = 0;
    for y in 0..h {
        for x in 0..w {
            let dst = &mut cols[row * k..(row + 1) * k];
            let mut idx = 0;
            for ky in 0..kh {
                let in_y = y as isize + ky as isize - pad_top as isize;
                for kx in 0..kw {
                    let in_x = x as isize + kx as isize - pad_left as isize;
                    let patch = &mut dst[idx..idx + c];
                    if in_y >= 0 && (in_y as usize) < h && in_x >= 0 && (in_x as usize) < w {
                        let src = (in_y as usize * w + in_x as usize) * c;
                        patch.copy_from_slice(&input[src..src + c]);
                    } else {
                        patch.fill(0.0);
                    }
                    idx += c;
                }
            }
            row += 1;
        }
    }
}

/// Adjoint of [`im2col`]: scatter-adds patch-row gradients back onto the
/// input gradient image.
fn col2im_add(cols: &[f64], h: usize, w: usize, c: usize, kh: usize, kw: usize, dinput: &mut [f64]) {
    let pad_top = (kh - 1) / 2;
    let pad_left = (kw - 1) / 2;
    let k = kh * kw * c;
    let mut row = 0;
    for y in 0..h {
        for x in 0..w {
            let src = &cols[row * k..(row + 1) * k];
            let mut idx = 0;
            for ky in 0..kh {
                let in_y = y as isize + ky as isize - pad_top as isize;
                for kx in 0..kw {
                    let in_x = x as isize + kx as isize - pad_left as isize;
                    if in_y >= 0 && (in_y as usize) < h && in_x >= 0 && (in_x as usize) < w {
                        let dst = (in_y as usize * w + in_x as usize) * c;
                        for ci in 0..c {
                            dinput[dst + ci] += src[idx + ci];
                        }
                    }
                    idx += c;
                }
            }
            row += 1;
        }
    }
}

#[derive(Debug, Clone)]
enum CompiledLayer {
    Conv {
        h: usize,
        w: usize,
        c_in: usize,
        filters: usize,
        kh: usize,
        kw: usize,
        activation: Activation,
        offset: usize,
    },
    Pool { h: usize, w: usize, c: usize },
    Flatten,
    Dense { d_in: usize, units: usize, offset: usize },
}

/// Intermediate state captured by [`Network::forward`] for the backward
/// pass: the input plus every layer output, and pooling argmax indices.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    activations: Vec<Tensor>,
    pool_argmax: Vec<Vec<u32>>,
}

impl ForwardCache {
    /// The final layer output (the margin scores).
    pub fn output(&self) -> &Tensor {
        self.activations.last().expect("cache holds at least the input")
    }

    /// The input batch followed by every layer output, in layer order.
    pub fn activations(&self) -> &[Tensor] {
        &self.activations
    }
}

/// A validated model spec compiled to per-layer dimensions and parameter
/// offsets into one flat parameter vector.
#[derive(Debug, Clone)]
pub struct Network {
    spec: ModelSpec,
    shapes: Vec<Shape>,
    layers: Vec<CompiledLayer>,
    param_count: usize,
}

impl Network {
    pub fn new(spec: ModelSpec) -> Result<Self, NnError> {
        spec.validate()?;
        let shapes = infer_shapes(&spec)?;
        let mut layers = Vec::with_capacity(spec.layers.len());
        let mut offset = 0;
        for (i, layer) in spec.layers.iter().enumerate() {
            let input_shape = if i == 0 {
                Shape::Spatial { h: spec.input.0, w: spec.input.1, c: spec.input.2 }
            } else {
                shapes[i - 1]
            };
            match (layer, input_shape) {
                (LayerSpec::Conv { filters, kernel, activation }, Shape::Spatial { h, w, c }) => {
                    let (kh, kw) = *kernel;
                    layers.push(CompiledLayer::Conv {
                        h,
                        w,
                        c_in: c,
                        filters: *filters,
                        kh,
                        kw,
                        activation: *activation,
                        offset,
                    });
                    offset += filters * (kh * kw * c + 1);
                }
                (LayerSpec::MaxPool, Shape::Spatial { h, w, c }) => {
                    layers.push(CompiledLayer::Pool { h, w, c });
                }
                (LayerSpec::Flatten, Shape::Spatial { .. }) => layers.push(CompiledLayer::Flatten),
                (LayerSpec::Dense { units }, Shape::Flat { d }) => {
                    layers.push(CompiledLayer::Dense { d_in: d, units: *units, offset });
                    offset += units * (d + 1);
                }
                _ => unreachable!("spec validated"),
            }
        }
        debug_assert_eq!(offset, count_params(&spec).expect("spec validated").total);
        Ok(Self { spec, shapes, layers, param_count: offset })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn shapes(&self) -> &[Shape] {
        &self.shapes
    }

    /// Length of the flat parameter vector.
    pub fn param_count(&self) -> usize {
        self.param_count
    }

    /// Range of the flat parameter vector owned by layer `index`; empty for
    /// parameterless layers, `None` past the end.
    pub fn param_range(&self, index: usize) -> Option<std::ops::Range<usize>> {
        let layer = self.layers.get(index)?;
        Some(match *layer {
            CompiledLayer::Conv { c_in, filters, kh, kw, offset, .. } => {
                offset..offset + filters * (kh * kw * c_in + 1)
            }
            CompiledLayer::Dense { d_in, units, offset } => offset..offset + units * (d_in + 1),
            CompiledLayer::Pool { .. } | CompiledLayer::Flatten => 0..0,
        })
    }

    /// Seeded He-style uniform init: weights from U(−√(6/fan_in), +√(6/fan_in)),
    /// biases zero. Draw order is fixed, so identical seeds give identical
    /// parameters.
    pub fn init_params<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let mut params = vec![0.0; self.param_count];
        for layer in &self.layers {
            let (offset, weight_len, fan_in) = match *layer {
                CompiledLayer::Conv { c_in, filters, kh, kw, offset, .. } => {
                    (offset, kh * kw * c_in * filters, kh * kw * c_in)
                }
                CompiledLayer::Dense { d_in, units, offset } => (offset, d_in * units, d_in),
                _ => continue,
            };
            let bound = (6.0 / fan_in as f64).sqrt();
            for slot in &mut params[offset..offset + weight_len] {
                *slot = (rng.random::<f64>() * 2.0 - 1.0) * bound;
            }
            // Biases stay zero.
        }
        params
    }

    fn check_params(&self, params: &[f64]) -> Result<(), NnError> {
        if params.len() != self.param_count {
            return Err(NnError::Shape(format!(
                "{} parameters passed, model has {}",
                params.len(),
                self.param_count
            )));
        }
        Ok(())
    }

    /// Runs the batch through every layer, returning the (N, 1) margin
    /// scores and the cached intermediates backprop needs.
    pub fn forward(&self, params: &[f64], batch: &Tensor) -> Result<(Tensor, ForwardCache), NnError> {
        self.check_params(params)?;
        let (n, h, w, c) = batch.nhwc()?;
        if (h, w, c) != self.spec.input {
            return Err(NnError::Shape(format!(
                "batch images are {:?}, model expects {:?}",
                (h, w, c),
                self.spec.input
            )));
        }

        let mut activations: Vec<Tensor> = Vec::with_capacity(self.layers.len() + 1);
        activations.push(batch.clone());
        let mut pool_argmax = Vec::new();

        for layer in &self.layers {
            let input = activations.last().expect("at least the batch input");
            let output = match *layer {
                CompiledLayer::Conv { h, w, c_in, filters, kh, kw, activation, offset } => {
                    let k = kh * kw * c_in;
                    let m = h * w;
                    let weights = &params[offset..offset + k * filters];
                    let bias = &params[offset + k * filters..offset + k * filters + filters];
                    let mut out = vec![0.0; n * m * filters];
                    let mut cols = vec![0.0; m * k];
                    let in_img = h * w * c_in;
                    for img in 0..n {
                        im2col(&input.data()[img * in_img..(img + 1) * in_img], h, w, c_in, kh, kw, &mut cols);
                        let out_img = &mut out[img * m * filters..(img + 1) * m * filters];
                        gemm(
                            m, k, filters, 1.0, &cols, k as isize, 1, weights, filters as isize,
                            1, 0.0, out_img, filters as isize, 1,
                        );
                        for row in 0..m {
                            for f in 0..filters {
                                let v = out_img[row * filters + f] + bias[f];
                                out_img[row * filters + f] = activation.apply(v);
                            }
                        }
                    }
                    Tensor::from_parts_unchecked(vec![n, h, w, filters], out)
                }
                CompiledLayer::Pool { h, w, c } => {
                    let (oh, ow) = (h / 2, w / 2);
                    let mut out = vec![0.0; n * oh * ow * c];
                    let mut argmax = vec![0u32; n * oh * ow * c];
                    let data = input.data();
                    let in_img = h * w * c;
                    let mut dst = 0;
                    for img in 0..n {
                        let base = img * in_img;
                        for oy in 0..oh {
                            for ox in 0..ow {
                                let top_left = base + (oy * 2 * w + ox * 2) * c;
                                for ci in 0..c {
                                    let candidates = [
                                        top_left + ci,
                                        top_left + c + ci,
                                        top_left + w * c + ci,
                                        top_left + (w + 1) * c + ci,
                                    ];
                                    // First maximum wins on ties.
                                    let mut best = candidates[0];
                                    for &cand in &candidates[1..] {
                                        if data[cand] > data[best] {
                                            best = cand;
                                        }
                                    }
                                    out[dst] = data[best];
                                    argmax[dst] = best as u32;
                                    dst += 1;
                                }
                            }
                        }
                    }
                    pool_argmax.push(argmax);
                    Tensor::from_parts_unchecked(vec![n, oh, ow, c], out)
                }
                CompiledLayer::Flatten => {
                    // NHWC is row-major, so flattening is a reshape.
                    let d = input.len() / n;
                    Tensor::from_parts_unchecked(vec![n, d], input.data().to_vec())
                }
                CompiledLayer::Dense { d_in, units, offset } => {
                    let weights = &params[offset..offset + d_in * units];
                    let bias = &params[offset + d_in * units..offset + d_in * units + units];
                    let mut out = vec![0.0; n * units];
                    gemm(
                        n, d_in, units, 1.0, input.data(), d_in as isize, 1, weights,
                        units as isize, 1, 0.0, &mut out, units as isize, 1,
                    );
                    for row in 0..n {
                        for u in 0..units {
                            out[row * units + u] += bias[u];
                        }
                    }
                    Tensor::from_parts_unchecked(vec![n, units], out)
                }
            };
            activations.push(output);
        }

        let scores = activations.last().expect("model has layers").clone();
        Ok((scores, ForwardCache { activations, pool_argmax }))
    }

    /// Backpropagates a score gradient through the cached forward pass,
    /// returning the flat parameter gradient. The input-image gradient is
    /// not materialized for the first layer.
    pub fn backward(
        &self,
        params: &[f64],
        cache: &ForwardCache,
        dscores: &Tensor,
    ) -> Result<Vec<f64>, NnError> {
        self.check_params(params)?;
        if dscores.dims() != cache.output().dims() {
            return Err(NnError::Shape(format!(
                "score gradient dims {:?} do not match output {:?}",
                dscores.dims(),
                cache.output().dims()
            )));
        }
        let n = dscores.batch();
        let mut grads = vec![0.0; self.param_count];
        let mut grad = dscores.data().to_vec();
        let mut pool_idx = cache.pool_argmax.len();

        for (i, layer) in self.layers.iter().enumerate().rev() {
            let input = &cache.activations[i];
            let output = &cache.activations[i + 1];
            match *layer {
                CompiledLayer::Dense { d_in, units, offset } => {
                    let weights = &params[offset..offset + d_in * units];
                    let x = input.data();
                    // dW = Xᵀ · dY
                    {
                        let (dw, rest) = grads[offset..].split_at_mut(d_in * units);
                        gemm(
                            d_in, n, units, 1.0, x, 1, d_in as isize, &grad, units as isize, 1,
                            1.0, dw, units as isize, 1,
                        );
                        let db = &mut rest[..units];
                        for row in 0..n {
                            for u in 0..units {
                                db[u] += grad[row * units + u];
                            }
                        }
                    }
                    if i > 0 {
                        // dX = dY · Wᵀ
                        let mut dx = vec![0.0; n * d_in];
                        gemm(
                            n, units, d_in, 1.0, &grad, units as isize, 1, weights, 1,
                            units as isize, 0.0, &mut dx, d_in as isize, 1,
                        );
                        grad = dx;
                    }
                }
                CompiledLayer::Flatten => {
                    // Reshape only; the buffer already matches the spatial input.
                }
                CompiledLayer::Pool { h, w, c } => {
                    let argmax = &cache.pool_argmax[pool_idx - 1];
                    pool_idx -= 1;
                    let mut dx = vec![0.0; n * h * w * c];
                    for (g, &src) in grad.iter().zip(argmax) {
                        dx[src as usize] += g;
                    }
                    grad = dx;
                }
                CompiledLayer::Conv { h, w, c_in, filters, kh, kw, activation, offset } => {
                    let k = kh * kw * c_in;
                    let m = h * w;
                    let weights = &params[offset..offset + k * filters];
                    // dZ = dY ⊙ act'(y), derived from the activated output.
                    for (g, &y) in grad.iter_mut().zip(output.data()) {
                        *g *= activation.grad_from_output(y);
                    }
                    let in_img = h * w * c_in;
                    let mut cols = vec![0.0; m * k];
                    let mut dcols = if i > 0 { vec![0.0; m * k] } else { Vec::new() };
                    let mut dx = if i > 0 { vec![0.0; n * in_img] } else { Vec::new() };
                    for img in 0..n {
                        let dz = &grad[img * m * filters..(img + 1) * m * filters];
                        im2col(&input.data()[img * in_img..(img + 1) * in_img], h, w, c_in, kh, kw, &mut cols);
                        let (dw, rest) = grads[offset..].split_at_mut(k * filters);
                        // dW += colsᵀ · dZ
                        gemm(
                            k, m, filters, 1.0, &cols, 1, k as isize, dz, filters as isize, 1,
                            1.0, dw, filters as isize, 1,
                        );
                        let db = &mut rest[..filters];
                        for row in 0..m {
                            for f in 0..filters {
                                db[f] += dz[row * filters + f];
                            }
                        }
                        if i > 0 {
                            // dCols = dZ · Wᵀ, then scatter back to the input.
                            gemm(
                                m, filters, k, 1.0, dz, filters as isize, 1, weights, 1,
                                filters as isize, 0.0, &mut dcols, k as isize, 1,
                            );
                            col2im_add(&dcols, h, w, c_in, kh, kw, &mut dx[img * in_img..(img + 1) * in_img]);
                        }
                    }
                    if i > 0 {
                        grad = dx;
                    }
                }
            }
        }
        Ok(grads)
    }
}
