use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The `2p` variational angles of a depth-`p` circuit.
///
/// Flat vectors use the layout `[beta_1..beta_p, gamma_1..gamma_p]`, which
/// is also the layout of policy actions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaoaParams {
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl QaoaParams {
    pub fn new(beta: Vec<f64>, gamma: Vec<f64>) -> Result<Self> {
        if beta.is_empty() {
            return Err(Error::invalid("circuit depth p must be >= 1"));
        }
        if beta.len() != gamma.len() {
            return Err(Error::DimensionMismatch { expected: beta.len(), got: gamma.len() });
        }
        if beta.iter().chain(&gamma).any(|a| !a.is_finite()) {
            return Err(Error::NonFinite("QAOA angle".into()));
        }
        Ok(Self { beta, gamma })
    }

    pub fn zeros(p: usize) -> Self {
        Self { beta: vec![0.0; p], gamma: vec![0.0; p] }
    }

    pub fn from_flat(x: &[f64]) -> Result<Self> {
        if x.is_empty() || !x.len().is_multiple_of(2) {
            return Err(Error::invalid(format!("flat parameter vector must have even length >= 2, got {}", x.len())));
        }
        let p = x.len() / 2;
        Self::new(x[..p].to_vec(), x[p..].to_vec())
    }

    pub fn p(&self) -> usize {
        self.beta.len()
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.beta.iter().chain(&self.gamma).copied().collect()
    }

    /// Angles wrapped into `[-pi, pi)` for reporting.
    pub fn wrapped(&self) -> Self {
        let wrap = |a: &f64| (a + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI;
        Self { beta: self.beta.iter().map(wrap).collect(), gamma: self.gamma.iter().map(wrap).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_layout_round_trip() {
        let q = QaoaParams::new(vec![0.1, 0.2], vec![0.3, 0.4]).unwrap();
        assert_eq!(q.to_flat(), vec![0.1, 0.2, 0.3, 0.4]);
        assert_eq!(QaoaParams::from_flat(&q.to_flat()).unwrap(), q);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(QaoaParams::new(vec![], vec![]).is_err());
        assert!(QaoaParams::new(vec![0.0], vec![0.0, 1.0]).is_err());
        assert!(QaoaParams::new(vec![f64::NAN], vec![0.0]).is_err());
        assert!(QaoaParams::from_flat(&[0.0, 1.0, 2.0]).is_err());
    }

    #[test]
    fn wrapping_lands_in_canonical_interval() {
        let q = QaoaParams::new(vec![7.0], vec![-4.0]).unwrap().wrapped();
        assert!((q.beta[0] - (7.0 - std::f64::consts::TAU)).abs() < 1e-12);
        assert!((q.gamma[0] - (-4.0 + std::f64::consts::TAU)).abs() < 1e-12);
    }
}
