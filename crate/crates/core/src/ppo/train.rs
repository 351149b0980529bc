use std::io::Write;

use crate::error::{Error, Result};
use crate::fmt::fmt_g;
use crate::graphs::Graph;
use crate::neural::{AdamState, Mlp};
use crate::qsim::{CostDiagonal, Objective, QaoaObjective};
use crate::rlenv::EnvConfig;
use crate::rng::chacha;

use super::{
    collect_epoch, gae, normalize, ppo_update, Critic, GaussianPolicy, PolicyCheckpoint, RewardStats, TrainConfig,
    INIT_STREAM, SHUFFLE_STREAM,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochMetrics {
    /// One-based epoch index.
    pub epoch: usize,
    pub mean_return: f64,
    pub best_f: f64,
    pub mean_kl: f64,
    pub clip_fraction: f64,
    pub actor_loss: f64,
    pub critic_loss: f64,
    pub actor_steps: usize,
    pub evaluations: usize,
}

/// Fresh networks and optimizers for `cfg`. The horizon of `env` is
/// replaced by `cfg.horizon`.
pub fn init_checkpoint(cfg: &TrainConfig, env: EnvConfig, label: &str) -> Result<PolicyCheckpoint> {
    cfg.validate()?;
    let env = EnvConfig { horizon: cfg.horizon, ..env };
    env.validate()?;
    let mut sizes = vec![env.obs_dim()];
    sizes.extend_from_slice(&cfg.hidden);
    sizes.push(env.action_dim());
    let actor = Mlp::new(&sizes, &mut chacha(cfg.seed, &[INIT_STREAM, 0]))?;
    *sizes.last_mut().expect("non-empty") = 1;
    let critic = Mlp::new(&sizes, &mut chacha(cfg.seed, &[INIT_STREAM, 1]))?;
    Ok(PolicyCheckpoint {
        actor_opt: AdamState::new(actor.params().len(), cfg.actor_lr),
        critic_opt: AdamState::new(critic.params().len(), cfg.critic_lr),
        policy: GaussianPolicy::new(actor),
        critic: Critic::new(critic)?,
        config: cfg.clone(),
        env,
        epoch: 0,
        training_graph_label: label.to_string(),
        stats: RewardStats::default(),
    })
}

/// Collect, estimate advantages and update once.
pub fn train_epoch(ck: &mut PolicyCheckpoint, objective: &dyn Objective) -> Result<EpochMetrics> {
    if objective.dim() != ck.env.action_dim() {
        return Err(Error::DimensionMismatch { expected: ck.env.action_dim(), got: objective.dim() });
    }
    let cfg = ck.config.clone();
    let epoch = ck.epoch as u64;
    let batch = collect_epoch(&ck.policy, &ck.critic, objective, &ck.env, cfg.episodes_per_epoch, cfg.seed, epoch)?;
    let expected = cfg.episodes_per_epoch * (cfg.horizon + 1);
    if batch.evaluations != expected || batch.len() != cfg.steps_per_epoch() {
        return Err(Error::Bookkeeping(format!(
            "epoch {} used {} evaluations for {} transitions, expected {expected} and {}",
            ck.epoch + 1,
            batch.evaluations,
            batch.len(),
            cfg.steps_per_epoch()
        )));
    }
    let (mut adv, returns) = gae(&batch.rewards, &batch.values, &batch.dones, cfg.discount, cfg.gae_lambda)?;
    normalize(&mut adv);
    let stats = ppo_update(
        &mut ck.policy,
        &mut ck.critic,
        &mut ck.actor_opt,
        &mut ck.critic_opt,
        &batch,
        &adv,
        &returns,
        &cfg,
        &mut chacha(cfg.seed, &[SHUFFLE_STREAM, epoch]),
    )?;
    ck.epoch += 1;
    ck.stats = RewardStats {
        mean_return: batch.mean_return(),
        best_f: Some(ck.stats.best_f.map_or(batch.best_f, |b| b.max(batch.best_f))),
    };
    Ok(EpochMetrics {
        epoch: ck.epoch,
        mean_return: batch.mean_return(),
        best_f: batch.best_f,
        mean_kl: stats.mean_kl,
        clip_fraction: stats.clip_fraction,
        actor_loss: stats.actor_loss,
        critic_loss: stats.critic_loss,
        actor_steps: stats.actor_steps,
        evaluations: batch.evaluations,
    })
}

/// Trains until `ck.config.epochs` epochs are complete, calling `on_epoch`
/// after each one.
pub fn resume<F>(ck: &mut PolicyCheckpoint, objective: &dyn Objective, mut on_epoch: F) -> Result<Vec<EpochMetrics>>
where
    F: FnMut(&PolicyCheckpoint, &EpochMetrics) -> Result<()>,
{
    let mut log = Vec::new();
    while ck.epoch < ck.config.epochs {
        let m = train_epoch(ck, objective)?;
        on_epoch(ck, &m)?;
        log.push(m);
    }
    Ok(log)
}

pub fn train<F>(
    cfg: &TrainConfig,
    objective: &dyn Objective,
    env: EnvConfig,
    label: &str,
    on_epoch: F,
) -> Result<(PolicyCheckpoint, Vec<EpochMetrics>)>
where
    F: FnMut(&PolicyCheckpoint, &EpochMetrics) -> Result<()>,
{
    let mut ck = init_checkpoint(cfg, env, label)?;
    let log = resume(&mut ck, objective, on_epoch)?;
    Ok((ck, log))
}

/// Trains on the depth-`env.p` QAOA objective of `graph`.
pub fn train_on_graph<F>(
    cfg: &TrainConfig,
    graph: &Graph,
    env: EnvConfig,
    on_epoch: F,
) -> Result<(PolicyCheckpoint, Vec<EpochMetrics>)>
where
    F: FnMut(&PolicyCheckpoint, &EpochMetrics) -> Result<()>,
{
    let d = CostDiagonal::from_graph(graph)?;
    let objective = QaoaObjective::new(&d, env.p)?;
    train(cfg, &objective, env, graph.label(), on_epoch)
}

pub fn write_metrics_csv<W: Write>(metrics: &[EpochMetrics], seed: u64, mut w: W) -> Result<()> {
    writeln!(w, "# seed={seed}")?;
    writeln!(w, "epoch,mean_return,best_f,mean_kl,clip_fraction,actor_loss,critic_loss")?;
    for m in metrics {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            m.epoch,
            fmt_g(m.mean_return, 17),
            fmt_g(m.best_f, 17),
            fmt_g(m.mean_kl, 17),
            fmt_g(m.clip_fraction, 17),
            fmt_g(m.actor_loss, 17),
            fmt_g(m.critic_loss, 17)
        )?;
    }
    Ok(())
}
