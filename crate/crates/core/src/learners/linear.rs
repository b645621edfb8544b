//! Linear learners: logistic regression (gradient descent on log-loss) and
//! linear SVM (subgradient descent on hinge loss).

use serde::{Deserialize, Serialize};

use crate::dataset::EncodedMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearParams {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearParams {
    pub fn zeros(n: usize) -> Self {
        Self { weights: vec![0.0; n], bias: 0.0 }
    }

    pub fn margin(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Full-batch gradient descent on weighted mean log-loss plus
/// `l2 / 2 * ||w||^2` (bias unpenalized).
pub fn fit_logistic(
    data: &EncodedMatrix,
    weights: &[f64],
    learning_rate: f64,
    iterations: usize,
    l2: f64,
) -> LinearParams {
    let total: f64 = weights.iter().sum();
    let mut params = LinearParams::zeros(data.n_cols);
    let mut grad = vec![0.0; data.n_cols];
    for _ in 0..iterations {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut grad_bias = 0.0;
        for (i, &w) in weights.iter().enumerate() {
            let x = data.row(i);
            let err = w * (sigmoid(params.margin(x)) - f64::from(data.labels[i]));
            for (g, v) in grad.iter_mut().zip(x) {
                *g += err * v;
            }
            grad_bias += err;
        }
        for (w, g) in params.weights.iter_mut().zip(&grad) {
            *w -= learning_rate * (g / total + l2 * *w);
        }
        params.bias -= learning_rate * grad_bias / total;
    }
    params
}

/// Subgradient descent on
/// `l2 / 2 * ||w||^2 + margin_weight * mean_i(weight_i * max(0, 1 - y_i f(x_i)))`
/// with `y` in {-1, +1} and a `1 / sqrt(t)` step decay.
pub fn fit_svm(
    data: &EncodedMatrix,
    weights: &[f64],
    learning_rate: f64,
    iterations: usize,
    l2: f64,
    margin_weight: f64,
) -> LinearParams {
    let total: f64 = weights.iter().sum();
    let mut params = LinearParams::zeros(data.n_cols);
    let mut grad = vec![0.0; data.n_cols];
    for t in 0..iterations {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut grad_bias = 0.0;
        for (i, &w) in weights.iter().enumerate() {
            let x = data.row(i);
            let y = if data.labels[i] == 1 { 1.0 } else { -1.0 };
            if y * params.margin(x) < 1.0 {
                let c = -margin_weight * w * y;
                for (g, v) in grad.iter_mut().zip(x) {
                    *g += c * v;
                }
                grad_bias += c;
            }
        }
        let step = learning_rate / ((t + 1) as f64).sqrt();
        for (w, g) in params.weights.iter_mut().zip(&grad) {
            *w -= step * (g / total + l2 * *w);
        }
        params.bias -= step * grad_bias / total;
    }
    params
}
