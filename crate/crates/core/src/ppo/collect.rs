use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qsim::{EvalCounter, Evaluator, Objective};
use crate::rlenv::{Env, EnvConfig, Policy};
use crate::rng::chacha;

use super::{Critic, GaussianPolicy, EPISODE_STREAM};

/// Transitions of one epoch, episode after episode, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub obs_dim: usize,
    pub action_dim: usize,
    pub obs: Vec<f64>,
    pub actions: Vec<f64>,
    pub log_probs: Vec<f64>,
    pub values: Vec<f64>,
    pub rewards: Vec<f64>,
    pub dones: Vec<bool>,
    /// Undiscounted return of each episode.
    pub episode_returns: Vec<f64>,
    /// Largest objective value seen anywhere in the epoch.
    pub best_f: f64,
    pub evaluations: usize,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn mean_return(&self) -> f64 {
        self.episode_returns.iter().sum::<f64>() / self.episode_returns.len() as f64
    }
}

struct Episode {
    obs: Vec<f64>,
    actions: Vec<f64>,
    log_probs: Vec<f64>,
    rewards: Vec<f64>,
    best_f: f64,
}

/// Samples `episodes` full episodes with the stochastic policy. Episode `e`
/// of epoch `epoch` draws from its own stream, so results do not depend on
/// thread scheduling.
pub fn collect_epoch(
    policy: &GaussianPolicy,
    critic: &Critic,
    objective: &dyn Objective,
    env_cfg: &EnvConfig,
    episodes: usize,
    seed: u64,
    epoch: u64,
) -> Result<Batch> {
    env_cfg.validate()?;
    if episodes == 0 {
        return Err(Error::Empty("an epoch needs at least one episode".into()));
    }
    if policy.obs_dim() != env_cfg.obs_dim() || policy.action_dim() != env_cfg.action_dim() {
        return Err(Error::ShapeMismatch(format!(
            "policy maps {} -> {}, environment needs {} -> {}",
            policy.obs_dim(),
            policy.action_dim(),
            env_cfg.obs_dim(),
            env_cfg.action_dim()
        )));
    }
    let counter = EvalCounter::unlimited();
    let runs: Vec<Episode> = (0..episodes as u64)
        .into_par_iter()
        .map(|e| run_episode(policy, objective, env_cfg, &counter, &mut chacha(seed, &[EPISODE_STREAM, epoch, e])))
        .collect::<Result<_>>()?;

    let t = env_cfg.horizon;
    let n = episodes * t;
    let mut batch = Batch {
        obs_dim: env_cfg.obs_dim(),
        action_dim: env_cfg.action_dim(),
        obs: Vec::with_capacity(n * env_cfg.obs_dim()),
        actions: Vec::with_capacity(n * env_cfg.action_dim()),
        log_probs: Vec::with_capacity(n),
        values: Vec::new(),
        rewards: Vec::with_capacity(n),
        dones: Vec::with_capacity(n),
        episode_returns: Vec::with_capacity(episodes),
        best_f: f64::NEG_INFINITY,
        evaluations: counter.used(),
    };
    for ep in runs {
        batch.obs.extend_from_slice(&ep.obs);
        batch.actions.extend_from_slice(&ep.actions);
        batch.log_probs.extend_from_slice(&ep.log_probs);
        batch.episode_returns.push(ep.rewards.iter().sum());
        batch.rewards.extend_from_slice(&ep.rewards);
        batch.dones.extend((0..t).map(|k| k + 1 == t));
        batch.best_f = batch.best_f.max(ep.best_f);
    }
    batch.values = critic.values(&batch.obs, n)?;
    Ok(batch)
}

fn run_episode(
    policy: &GaussianPolicy,
    objective: &dyn Objective,
    cfg: &EnvConfig,
    counter: &EvalCounter,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Result<Episode> {
    let mut env = Env::new(*cfg, Evaluator::new(objective, counter))?;
    let mut obs = env.reset(rng)?;
    let t = cfg.horizon;
    let mut ep = Episode {
        obs: Vec::with_capacity(t * cfg.obs_dim()),
        actions: Vec::with_capacity(t * cfg.action_dim()),
        log_probs: Vec::with_capacity(t),
        rewards: Vec::with_capacity(t),
        best_f: env.f(),
    };
    while !env.is_done() {
        let (action, lp) = policy.sample_action(&obs, rng)?;
        let step = env.step(&action)?;
        ep.obs.extend_from_slice(&obs);
        ep.actions.extend_from_slice(&action);
        ep.log_probs.push(lp);
        ep.rewards.push(step.reward);
        ep.best_f = ep.best_f.max(env.f());
        obs = step.obs;
    }
    Ok(ep)
}
