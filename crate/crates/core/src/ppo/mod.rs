//! Actor-critic PPO with a clipped surrogate and KL early stopping.

mod checkpoint;
mod collect;
mod gae;
mod policy;
mod train;
mod update;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use checkpoint::{load_checkpoint, save_checkpoint, PolicyCheckpoint, RewardStats, SCHEMA_VERSION};
pub use collect::{collect_epoch, Batch};
pub use gae::{gae, normalize};
pub use policy::{mean_kl, Critic, GaussianPolicy, LOG_SIGMA2};
pub use train::{init_checkpoint, resume, train, train_epoch, train_on_graph, write_metrics_csv, EpochMetrics};
pub use update::{ppo_update, UpdateStats};

/// Stream tags for [`crate::rng::derive_seed`].
pub(crate) const INIT_STREAM: u64 = 0;
pub(crate) const EPISODE_STREAM: u64 = 1;
pub(crate) const SHUFFLE_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub episodes_per_epoch: usize,
    pub horizon: usize,
    pub discount: f64,
    pub gae_lambda: f64,
    pub clip_ratio: f64,
    pub kl_stop: f64,
    pub gradient_epochs: usize,
    pub minibatch_size: usize,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub hidden: Vec<usize>,
    pub seed: u64,
    /// Save a checkpoint every this many epochs; 0 saves only at the end.
    pub checkpoint_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 750,
            episodes_per_epoch: 128,
            horizon: 64,
            discount: 0.99,
            gae_lambda: 0.97,
            clip_ratio: 0.2,
            kl_stop: 0.015,
            gradient_epochs: 10,
            minibatch_size: 256,
            actor_lr: 3e-4,
            critic_lr: 1e-3,
            hidden: vec![64, 64],
            seed: 0,
            checkpoint_every: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::invalid(format!("train config: {msg}")));
        if self.episodes_per_epoch == 0 || self.horizon == 0 {
            return bad("episodes_per_epoch and horizon must be >= 1");
        }
        if self.minibatch_size == 0 {
            return bad("minibatch_size must be >= 1");
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return bad("hidden layer sizes must be a non-empty list of positive integers");
        }
        if !(0.0..=1.0).contains(&self.discount) || !(0.0..=1.0).contains(&self.gae_lambda) {
            return bad("discount and gae_lambda must lie in [0, 1]");
        }
        if !(self.clip_ratio > 0.0 && self.clip_ratio < 1.0) {
            return bad("clip_ratio must lie in (0, 1)");
        }
        if [self.kl_stop, self.actor_lr, self.critic_lr].iter().any(|v| v.is_nan() || *v <= 0.0) {
            return bad("kl_stop and learning rates must be positive");
        }
        Ok(())
    }

    /// Transitions gathered per epoch.
    pub fn steps_per_epoch(&self) -> usize {
        self.episodes_per_epoch * self.horizon
    }
}
