use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::neural::AdamState;

use super::policy::log_prob;
use super::{mean_kl, Batch, Critic, GaussianPolicy, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UpdateStats {
    /// Mean KL between the pre- and post-update policies over the batch.
    pub mean_kl: f64,
    /// Fraction of samples whose ratio ends outside the clip interval.
    pub clip_fraction: f64,
    /// Negative clipped surrogate after the update.
    pub actor_loss: f64,
    /// Mean squared error of the critic after the update.
    pub critic_loss: f64,
    /// Passes over the batch in which the actor took at least one step.
    pub gradient_epochs: usize,
    pub actor_steps: usize,
    pub early_stopped: bool,
}

/// Minibatch ascent on the clipped surrogate and critic regression.
///
/// Before every actor step the KL to the collection-time policy is measured
/// on the minibatch; once it exceeds `cfg.kl_stop` the actor is frozen for
/// the rest of the update while the critic keeps training.
#[allow(clippy::too_many_arguments)]
pub fn ppo_update<R: Rng>(
    policy: &mut GaussianPolicy,
    critic: &mut Critic,
    actor_opt: &mut AdamState,
    critic_opt: &mut AdamState,
    batch: &Batch,
    advantages: &[f64],
    returns: &[f64],
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<UpdateStats> {
    let n = batch.len();
    if n == 0 {
        return Err(Error::Empty("update batch".into()));
    }
    if advantages.len() != n || returns.len() != n || batch.log_probs.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: advantages.len().min(returns.len()) });
    }
    let (od, ad) = (batch.obs_dim, batch.action_dim);
    let sigma2 = policy.sigma2();
    let mu_old = policy.actor.forward_batch(&batch.obs, n)?.output().to_vec();

    let mut stats = UpdateStats::default();
    let mut actor_live = true;
    let mut order: Vec<usize> = (0..n).collect();
    let mut obs = Vec::new();
    for _ in 0..cfg.gradient_epochs {
        order.shuffle(rng);
        let mut stepped = false;
        for idx in order.chunks(cfg.minibatch_size) {
            let m = idx.len();
            obs.clear();
            for &i in idx {
                obs.extend_from_slice(&batch.obs[i * od..(i + 1) * od]);
            }
            if actor_live {
                let cache = policy.actor.forward_batch(&obs, m)?;
                let mu = cache.output();
                let old: Vec<f64> = idx.iter().flat_map(|&i| mu_old[i * ad..(i + 1) * ad].iter().copied()).collect();
                if mean_kl(&old, mu, ad, sigma2) > cfg.kl_stop {
                    actor_live = false;
                    stats.early_stopped = true;
                } else {
                    let mut upstream = vec![0.0; m * ad];
                    for (k, &i) in idx.iter().enumerate() {
                        let a = &batch.actions[i * ad..(i + 1) * ad];
                        let mu_k = &mu[k * ad..(k + 1) * ad];
                        let ratio = (log_prob(mu_k, a, sigma2) - batch.log_probs[i]).exp();
                        let adv = advantages[i];
                        let clipped =
                            (adv >= 0.0 && ratio > 1.0 + cfg.clip_ratio) || (adv < 0.0 && ratio < 1.0 - cfg.clip_ratio);
                        if clipped {
                            continue;
                        }
                        // d(ratio * A)/d(mu) = ratio * A * (a - mu) / sigma^2; minimize its negation
                        let scale = -ratio * adv / (sigma2 * m as f64);
                        for j in 0..ad {
                            upstream[k * ad + j] = scale * (a[j] - mu_k[j]);
                        }
                    }
                    let (grads, _) = policy.actor.backward(&cache, &upstream)?;
                    check_finite(&grads, "actor gradient")?;
                    actor_opt.step(policy.actor.params_mut(), &grads)?;
                    stats.actor_steps += 1;
                    stepped = true;
                }
            }
            let cache = critic.net.forward_batch(&obs, m)?;
            let upstream: Vec<f64> =
                cache.output().iter().zip(idx).map(|(v, &i)| (v - returns[i]) / m as f64).collect();
            let (grads, _) = critic.net.backward(&cache, &upstream)?;
            check_finite(&grads, "critic gradient")?;
            critic_opt.step(critic.net.params_mut(), &grads)?;
        }
        if stepped {
            stats.gradient_epochs += 1;
        }
    }

    let mu_new = policy.actor.forward_batch(&batch.obs, n)?.output().to_vec();
    stats.mean_kl = mean_kl(&mu_old, &mu_new, ad, sigma2);
    let mut clipped = 0usize;
    let mut surrogate = 0.0;
    for i in 0..n {
        let a = &batch.actions[i * ad..(i + 1) * ad];
        let ratio = (log_prob(&mu_new[i * ad..(i + 1) * ad], a, sigma2) - batch.log_probs[i]).exp();
        let bounded = ratio.clamp(1.0 - cfg.clip_ratio, 1.0 + cfg.clip_ratio);
        if bounded != ratio {
            clipped += 1;
        }
        surrogate += (ratio * advantages[i]).min(bounded * advantages[i]);
    }
    stats.clip_fraction = clipped as f64 / n as f64;
    stats.actor_loss = -surrogate / n as f64;
    let values = critic.values(&batch.obs, n)?;
    stats.critic_loss = values.iter().zip(returns).map(|(v, r)| (v - r) * (v - r)).sum::<f64>() / n as f64;
    if !(stats.actor_loss.is_finite() && stats.critic_loss.is_finite() && stats.mean_kl.is_finite()) {
        return Err(Error::NonFinite(format!(
            "update diagnostics: actor loss {}, critic loss {}, mean KL {}",
            stats.actor_loss, stats.critic_loss, stats.mean_kl
        )));
    }
    Ok(stats)
}

fn check_finite(xs: &[f64], what: &str) -> Result<()> {
    if xs.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.into()))
    }
}
