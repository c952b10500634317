use serde::{Deserialize, Serialize};

/// Adamax optimizer state (infinity-norm variant of Adam).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adamax {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub m: Vec<f64>,
    pub u: Vec<f64>,
    pub t: u64,
}

impl Adamax {
    pub fn new(len: usize, lr: f64) -> Self {
        Self { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, m: vec![0.0; len], u: vec![0.0; len], t: 0 }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        self.t += 1;
        let scale = self.lr / (1.0 - self.beta1.powi(self.t as i32));
        for (i, (p, g)) in params.iter_mut().zip(grads).enumerate() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.u[i] = (self.beta2 * self.u[i]).max(g.abs());
            *p -= scale * self.m[i] / (self.u[i] + self.eps);
        }
    }
}
