//! Plain SGD and Adam with bias correction, over flat parameter vectors.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OptimizerKind {
    Sgd { lr: f64 },
    Adam { lr: f64, beta1: f64, beta2: f64, epsilon: f64 },
}

impl OptimizerKind {
    pub fn sgd(lr: f64) -> Self {
        OptimizerKind::Sgd { lr }
    }

    /// Adam with the usual defaults β1 = 0.9, β2 = 0.999, ε = 1e-8.
    pub fn adam(lr: f64) -> Self {
        OptimizerKind::Adam { lr, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }

    pub fn learning_rate(&self) -> f64 {
        match *self {
            OptimizerKind::Sgd { lr } | OptimizerKind::Adam { lr, .. } => lr,
        }
    }
}

/// Moment estimates for Adam; empty vectors for SGD.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl OptimizerState {
    pub fn new(kind: &OptimizerKind, param_count: usize) -> Self {
        match kind {
            OptimizerKind::Sgd { .. } => Self { step: 0, m: Vec::new(), v: Vec::new() },
            OptimizerKind::Adam { .. } => {
                Self { step: 0, m: vec![0.0; param_count], v: vec![0.0; param_count] }
            }
        }
    }

    pub fn step(&self) -> u64 {
        self.step
    }
}

/// One update. SGD: `w ← w − lr·g`. Adam: first/second moment EMAs with
/// bias correction, then `w ← w − lr·m̂ / (√v̂ + ε)`.
pub fn optimizer_step(
    params: &mut [f64],
    grads: &[f64],
    state: &mut OptimizerState,
    kind: &OptimizerKind,
) {
    assert_eq!(params.len(), grads.len(), "parameter/gradient length mismatch");
    match *kind {
        OptimizerKind::Sgd { lr } => {
            for (w, &g) in params.iter_mut().zip(grads) {
                *w -= lr * g;
            }
        }
        OptimizerKind::Adam { lr, beta1, beta2, epsilon } => {
            assert_eq!(state.m.len(), params.len(), "optimizer state length mismatch");
            state.step += 1;
            let bc1 = 1.0 - beta1.powi(state.step as i32);
            let bc2 = 1.0 - beta2.powi(state.step as i32);
            for i in 0..params.len() {
                let g = grads[i];
                state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * g;
                state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * g * g;
                let m_hat = state.m[i] / bc1;
                let v_hat = state.v[i] / bc2;
                params[i] -= lr * m_hat / (v_hat.sqrt() + epsilon);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sgd_step_is_exact() {
        let kind = OptimizerKind::sgd(0.1);
        let mut state = OptimizerState::new(&kind, 1);
        let mut params = vec![1.0];
        optimizer_step(&mut params, &[0.5], &mut state, &kind);
        assert_eq!(params, vec![0.95]);
    }

    #[test]
    fn adam_first_step_magnitude_is_learning_rate() {
        // First step with constant g: m̂ = g, v̂ = g², so |Δw| = lr·|g|/(|g|+ε).
        let lr = 0.001;
        let kind = OptimizerKind::adam(lr);
        for &g in &[1e-3, -0.02, 0.5, -3.0] {
            let mut state = OptimizerState::new(&kind, 2);
            let mut params = vec![0.7, -0.2];
            optimizer_step(&mut params, &[g, g], &mut state, &kind);
            for (w, w0) in params.iter().zip([0.7, -0.2]) {
                let delta = (w - w0).abs();
                assert!((delta - lr).abs() < 1e-6, "g={g}: |Δw|={delta}");
                // Sign of the update opposes the gradient.
                assert_eq!((w0 - w).signum(), g.signum());
            }
        }
    }

    #[test]
    fn zero_gradient_with_zero_state_is_a_no_op() {
        for kind in [OptimizerKind::sgd(0.1), OptimizerKind::adam(0.1)] {
            let mut state = OptimizerState::new(&kind, 3);
            let mut params = vec![1.0, -2.0, 0.5];
            optimizer_step(&mut params, &[0.0; 3], &mut state, &kind);
            assert_eq!(params, vec![1.0, -2.0, 0.5]);
        }
    }

    #[test]
    fn adam_moments_accumulate() {
        let kind = OptimizerKind::Adam { lr: 0.01, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 };
        let mut state = OptimizerState::new(&kind, 1);
        let mut params = vec![0.0];
        for _ in 0..5 {
            optimizer_step(&mut params, &[1.0], &mut state, &kind);
        }
        assert_eq!(state.step(), 5);
        // Constant unit gradient keeps each bias-corrected step close to lr.
        assert!((params[0] + 5.0 * 0.01).abs() < 5e-4, "{}", params[0]);
    }
}
