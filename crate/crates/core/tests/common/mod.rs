//! Shared test-side oracles. The numeric gradient here is intentionally
//! independent of the engine's backward pass: it only ever calls `forward`
//! and the loss.

use doetune::nn::{
    loss_and_grad, Activation, LayerSpec, LossKind, ModelSpec, Network, Tensor,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const FD_STEP: f64 = 1e-5;

/// Scalar training loss as a function of the flat parameter vector.
pub fn loss_of(
    net: &Network,
    params: &[f64],
    batch: &Tensor,
    labels: &[f64],
    kind: LossKind,
) -> f64 {
    let (scores, _) = net.forward(params, batch).expect("forward succeeds");
    loss_and_grad(&scores, labels, kind).expect("loss succeeds").0
}

/// Central finite differences with step `FD_STEP` over every parameter.
pub fn numeric_grad(
    net: &Network,
    params: &[f64],
    batch: &Tensor,
    labels: &[f64],
    kind: LossKind,
) -> Vec<f64> {
    let mut probe = params.to_vec();
    let mut grad = vec![0.0; params.len()];
    for i in 0..params.len() {
        let original = probe[i];
        probe[i] = original + FD_STEP;
        let plus = loss_of(net, &probe, batch, labels, kind);
        probe[i] = original - FD_STEP;
        let minus = loss_of(net, &probe, batch, labels, kind);
        probe[i] = original;
        grad[i] = (plus - minus) / (2.0 * FD_STEP);
    }
    grad
}

/// Worst relative disagreement, with a small floor so that exactly-zero
/// gradients compare cleanly.
pub fn max_rel_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(&a, &n)| (a - n).abs() / a.abs().max(n.abs()).max(1e-6))
        .fold(0.0, f64::max)
}

/// A randomly drawn tiny model (at most three compute layers, inputs at
/// most 8×8) plus a matching random batch and labels.
pub struct TinyProblem {
    pub spec: ModelSpec,
    pub params: Vec<f64>,
    pub batch: Tensor,
    pub labels: Vec<f64>,
    pub loss: LossKind,
}

/// Draws a random tiny problem, then rejects and redraws any draw that sits
/// numerically on a non-differentiable point: an activation input within
/// 1e-4 of a ReLU/ReLU6 kink, a pooling window whose top two values are
/// within 1e-4, or a sample margin within 1e-3 of the hinge. Central
/// differences are invalid exactly there, so those draws prove nothing.
pub fn draw_tiny_problem(rng: &mut ChaCha8Rng) -> TinyProblem {
    loop {
        let candidate = draw_candidate(rng);
        if is_smooth_at(&candidate) {
            return candidate;
        }
    }
}

fn draw_candidate(rng: &mut ChaCha8Rng) -> TinyProblem {
    let h = rng.random_range(4..=8usize);
    let w = rng.random_range(4..=8usize);
    let c = rng.random_range(1..=2usize);
    let activation = match rng.random_range(0..3) {
        0 => Activation::None,
        1 => Activation::Relu,
        _ => Activation::Relu6,
    };
    let kernel = rng.random_range(2..=3usize);
    let filters = rng.random_range(1..=4usize);
    let layers = match rng.random_range(0..4) {
        0 => vec![LayerSpec::Flatten, LayerSpec::Dense { units: 1 }],
        1 => vec![
            LayerSpec::Conv { filters, kernel: (kernel, kernel), activation },
            LayerSpec::Flatten,
            LayerSpec::Dense { units: 1 },
        ],
        2 => vec![
            LayerSpec::Conv { filters, kernel: (kernel, kernel), activation },
            LayerSpec::MaxPool,
            LayerSpec::Flatten,
            LayerSpec::Dense { units: 1 },
        ],
        _ => vec![
            LayerSpec::Conv { filters, kernel: (kernel, kernel), activation },
            LayerSpec::Conv {
                filters: rng.random_range(1..=3usize),
                kernel: (kernel, kernel),
                activation,
            },
            LayerSpec::Flatten,
            LayerSpec::Dense { units: 1 },
        ],
    };
    let spec = ModelSpec { input: (h, w, c), layers };
    let net = Network::new(spec.clone()).expect("tiny spec is valid");

    // Fully random parameters (biases included); occasionally scaled up so
    // ReLU6 clipping actually occurs in the suite.
    let scale = if rng.random_range(0..4) == 0 { 4.0 } else { 0.8 };
    let params: Vec<f64> =
        (0..net.param_count()).map(|_| (rng.random::<f64>() * 2.0 - 1.0) * scale).collect();

    let n = rng.random_range(1..=3usize);
    let batch = Tensor::new(
        vec![n, h, w, c],
        (0..n * h * w * c).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect(),
    )
    .expect("batch is finite");
    let labels: Vec<f64> =
        (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
    let loss = if rng.random::<bool>() { LossKind::Hinge } else { LossKind::SquaredHinge };

    TinyProblem { spec, params, batch, labels, loss }
}

fn is_smooth_at(problem: &TinyProblem) -> bool {
    const KINK_TOL: f64 = 1e-4;
    const MARGIN_TOL: f64 = 1e-3;

    let net = Network::new(problem.spec.clone()).unwrap();
    let (scores, cache) = net.forward(&problem.params, &problem.batch).unwrap();

    // Margins must sit clear of the hinge point.
    for (&y, &t) in scores.data().iter().zip(&problem.labels) {
        if (1.0 - t * y).abs() < MARGIN_TOL {
            return false;
        }
    }

    for (i, layer) in problem.spec.layers.iter().enumerate() {
        if let LayerSpec::Conv { filters, kernel, activation } = *layer {
            if activation == Activation::None {
                continue;
            }
            // Recover the pre-activations by running the layer's real input
            // through an activation-stripped single-conv twin with the same
            // parameter block.
            let layer_input = &cache.activations()[i];
            let (_, h, w, c) = layer_input.nhwc().unwrap();
            let twin = Network::new(ModelSpec {
                input: (h, w, c),
                layers: vec![
                    LayerSpec::Conv { filters, kernel, activation: Activation::None },
                    LayerSpec::Flatten,
                    LayerSpec::Dense { units: 1 },
                ],
            })
            .unwrap();
            let conv_range = net.param_range(i).unwrap();
            let mut probe = vec![0.0; twin.param_count()];
            probe[..conv_range.len()].copy_from_slice(&problem.params[conv_range]);
            let (_, z_cache) = twin.forward(&probe, layer_input).unwrap();
            for &z in z_cache.activations()[1].data() {
                if z.abs() < KINK_TOL {
                    return false;
                }
                if activation == Activation::Relu6 && (z - 6.0).abs() < KINK_TOL {
                    return false;
                }
            }
        }
        if matches!(layer, LayerSpec::MaxPool) {
            // Top-two gap in every pooling window.
            let input = &cache.activations()[i];
            let (n, h, w, c) = input.nhwc().unwrap();
            let data = input.data();
            for img in 0..n {
                for oy in 0..h / 2 {
                    for ox in 0..w / 2 {
                        for ci in 0..c {
                            let base = img * h * w * c;
                            let idx = |dy: usize, dx: usize| {
                                base + ((oy * 2 + dy) * w + (ox * 2 + dx)) * c + ci
                            };
                            let mut vals = [
                                data[idx(0, 0)],
                                data[idx(0, 1)],
                                data[idx(1, 0)],
                                data[idx(1, 1)],
                            ];
                            vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
                            if vals[0] - vals[1] < KINK_TOL {
                                return false;
                            }
                        }
                    }
                }
            }
        }
    }
    true
}
