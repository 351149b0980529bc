use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::neural::Mlp;
use crate::rlenv::Policy;

/// Natural log of the fixed action-noise variance.
pub const LOG_SIGMA2: f64 = -6.0;

/// Diagonal Gaussian around the actor output with a constant variance.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPolicy {
    pub actor: Mlp,
    sigma2: f64,
}

impl GaussianPolicy {
    pub fn new(actor: Mlp) -> Self {
        Self { actor, sigma2: LOG_SIGMA2.exp() }
    }

    pub fn with_variance(actor: Mlp, sigma2: f64) -> Result<Self> {
        if !(sigma2 >= 0.0 && sigma2.is_finite()) {
            return Err(Error::invalid(format!("variance must be finite and >= 0, got {sigma2}")));
        }
        Ok(Self { actor, sigma2 })
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn log_prob(&self, mean: &[f64], action: &[f64]) -> f64 {
        log_prob(mean, action, self.sigma2)
    }
}

pub(crate) fn log_prob(mean: &[f64], action: &[f64], sigma2: f64) -> f64 {
    let sq: f64 = mean.iter().zip(action).map(|(m, a)| (a - m) * (a - m)).sum();
    -sq / (2.0 * sigma2) - 0.5 * mean.len() as f64 * (2.0 * std::f64::consts::PI * sigma2).ln()
}

/// Mean KL divergence between equal-variance Gaussians with row-major means.
pub fn mean_kl(old: &[f64], new: &[f64], action_dim: usize, sigma2: f64) -> f64 {
    let rows = old.len() / action_dim;
    if rows == 0 {
        return 0.0;
    }
    let sq: f64 = old.iter().zip(new).map(|(a, b)| (a - b) * (a - b)).sum();
    sq / (2.0 * sigma2) / rows as f64
}

impl Policy for GaussianPolicy {
    fn obs_dim(&self) -> usize {
        self.actor.input_dim()
    }

    fn action_dim(&self) -> usize {
        self.actor.output_dim()
    }

    fn mean_action(&self, obs: &[f64]) -> Result<Vec<f64>> {
        self.actor.forward(obs)
    }

    fn sample_action(&self, obs: &[f64], rng: &mut dyn RngCore) -> Result<(Vec<f64>, f64)> {
        let mean = self.actor.forward(obs)?;
        let sigma = self.sigma2.sqrt();
        let action: Vec<f64> = mean
            .iter()
            .map(|m| {
                let z: f64 = StandardNormal.sample(rng);
                m + sigma * z
            })
            .collect();
        let lp = self.log_prob(&mean, &action);
        Ok((action, lp))
    }
}

/// State-value network with a scalar output.
#[derive(Debug, Clone, PartialEq)]
pub struct Critic {
    pub net: Mlp,
}

impl Critic {
    pub fn new(net: Mlp) -> Result<Self> {
        if net.output_dim() != 1 {
            return Err(Error::ShapeMismatch(format!("critic output must be 1, got {}", net.output_dim())));
        }
        Ok(Self { net })
    }

    pub fn value(&self, obs: &[f64]) -> Result<f64> {
        Ok(self.net.forward(obs)?[0])
    }

    pub fn values(&self, obs: &[f64], batch: usize) -> Result<Vec<f64>> {
        Ok(self.net.forward_batch(obs, batch)?.output().to_vec())
    }
}
