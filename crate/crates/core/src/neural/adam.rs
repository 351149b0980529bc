use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bias-corrected Adam over a flat parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl AdamState {
    pub fn new(num_params: usize, lr: f64) -> Self {
        Self { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, step: 0, m: vec![0.0; num_params], v: vec![0.0; num_params] }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }

    /// Ascends or descends depending on the sign the caller gives `grads`:
    /// parameters move along `-grads`.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.m.len() {
            return Err(Error::DimensionMismatch { expected: self.m.len(), got: params.len() });
        }
        if grads.len() != self.m.len() {
            return Err(Error::DimensionMismatch { expected: self.m.len(), got: grads.len() });
        }
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        for ((p, &g), (m, v)) in params.iter_mut().zip(grads).zip(self.m.iter_mut().zip(self.v.iter_mut())) {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            *p -= self.lr * (*m / c1) / ((*v / c2).sqrt() + self.eps);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_is_identity() {
        let mut adam = AdamState::new(3, 1e-3);
        let mut p = vec![0.5, -2.0, 7.25];
        adam.step(&mut p, &[0.0; 3]).unwrap();
        assert_eq!(p, vec![0.5, -2.0, 7.25]);
        assert_eq!(adam.step_count(), 1);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut adam = AdamState::new(2, 3e-4);
        let mut p = vec![1.0, 1.0];
        adam.step(&mut p, &[4.0, -0.01]).unwrap();
        assert!((p[0] - (1.0 - 3e-4)).abs() < 1e-10);
        assert!((p[1] - (1.0 + 3e-4)).abs() < 1e-9);
    }

    #[test]
    fn minimizes_scalar_quadratic() {
        let mut adam = AdamState::new(1, 0.05);
        let mut w = vec![1.0];
        for _ in 0..200 {
            let g = [2.0 * w[0]];
            adam.step(&mut w, &g).unwrap();
        }
        assert!(w[0].abs() < 0.05);
        // frozen from an independent scalar re-run of the same recursion
        assert!((w[0] - 2.8451333237271486e-05).abs() < 1e-12, "{}", w[0]);
    }

    #[test]
    fn shape_mismatch() {
        let mut adam = AdamState::new(2, 0.1);
        assert!(adam.step(&mut [0.0; 3], &[0.0; 3]).is_err());
        assert!(adam.step(&mut [0.0; 2], &[0.0; 1]).is_err());
    }
}
