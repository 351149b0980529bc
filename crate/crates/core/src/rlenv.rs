//! Parameter optimization as an episodic environment.
//!
//! The agent observes finite differences of the objective and parameters
//! over the last `L` iterations and acts with a step vector added to the
//! current parameters. The reward is the resulting change of the objective.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::qsim::{Evaluator, Objective};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub p: usize,
    /// History length `L`.
    pub history: usize,
    /// Episode horizon `T`.
    pub horizon: usize,
    pub init_range: (f64, f64),
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self { p: 1, history: 4, horizon: 64, init_range: (-PI, PI) }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        if self.p == 0 || self.history == 0 || self.horizon == 0 {
            return Err(Error::invalid(format!(
                "p, history length and horizon must be >= 1 (got p={}, L={}, T={})",
                self.p, self.history, self.horizon
            )));
        }
        let (lo, hi) = self.init_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::invalid(format!("bad init range [{lo}, {hi}]")));
        }
        Ok(())
    }

    pub fn action_dim(&self) -> usize {
        2 * self.p
    }

    pub fn obs_dim(&self) -> usize {
        (2 * self.p + 1) * self.history
    }
}

/// Flat history `[df, dbeta.., dgamma..]` per slot, most recent slot first.
pub type Observation = Vec<f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub obs: Observation,
    pub action: Vec<f64>,
    pub reward: f64,
    pub next_obs: Observation,
    pub done: bool,
    /// Objective value at the parameters after the step.
    pub f: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub obs: Observation,
    pub reward: f64,
    pub done: bool,
}

/// One episodic environment over a budgeted objective.
pub struct Env<'a> {
    cfg: EnvConfig,
    evaluator: Evaluator<'a>,
    x: Vec<f64>,
    f: f64,
    history: Vec<f64>,
    steps: usize,
    ready: bool,
}

impl<'a> Env<'a> {
    pub fn new(cfg: EnvConfig, evaluator: Evaluator<'a>) -> Result<Self> {
        cfg.validate()?;
        if evaluator.dim() != cfg.action_dim() {
            return Err(Error::DimensionMismatch { expected: cfg.action_dim(), got: evaluator.dim() });
        }
        Ok(Self {
            cfg,
            evaluator,
            x: vec![0.0; cfg.action_dim()],
            f: 0.0,
            history: vec![0.0; cfg.obs_dim()],
            steps: 0,
            ready: false,
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    /// Starts an episode at a uniform random point of the init range.
    pub fn reset<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Observation> {
        let (lo, hi) = self.cfg.init_range;
        let x0: Vec<f64> = (0..self.cfg.action_dim()).map(|_| rng.random_range(lo..hi)).collect();
        self.reset_at(&x0)
    }

    /// Starts an episode at `x0`, spending one evaluation.
    pub fn reset_at(&mut self, x0: &[f64]) -> Result<Observation> {
        if x0.len() != self.cfg.action_dim() {
            return Err(Error::DimensionMismatch { expected: self.cfg.action_dim(), got: x0.len() });
        }
        self.f = self.evaluator.eval(x0)?;
        self.x.copy_from_slice(x0);
        self.history.fill(0.0);
        self.steps = 0;
        self.ready = true;
        Ok(self.history.clone())
    }

    pub fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        if !self.ready || self.is_done() {
            return Err(Error::EpisodeFinished);
        }
        if action.len() != self.cfg.action_dim() {
            return Err(Error::DimensionMismatch { expected: self.cfg.action_dim(), got: action.len() });
        }
        if action.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite("action".into()));
        }
        let next: Vec<f64> = self.x.iter().zip(action).map(|(x, a)| x + a).collect();
        let f_new = self.evaluator.eval(&next)?;
        let reward = f_new - self.f;
        let slot = 2 * self.cfg.p + 1;
        let len = self.history.len();
        self.history.copy_within(0..len - slot, slot);
        self.history[0] = reward;
        self.history[1..slot].copy_from_slice(action);
        self.x = next;
        self.f = f_new;
        self.steps += 1;
        Ok(StepResult { obs: self.history.clone(), reward, done: self.is_done() })
    }

    pub fn params(&self) -> &[f64] {
        &self.x
    }

    pub fn f(&self) -> f64 {
        self.f
    }

    pub fn observation(&self) -> &[f64] {
        &self.history
    }

    pub fn steps_taken(&self) -> usize {
        self.steps
    }

    pub fn is_done(&self) -> bool {
        self.steps >= self.cfg.horizon
    }

    pub fn evaluations(&self) -> usize {
        self.evaluator.counter().used()
    }
}

/// Maps observations to step vectors.
pub trait Policy {
    fn obs_dim(&self) -> usize;
    fn action_dim(&self) -> usize;
    /// The noise-free action.
    fn mean_action(&self, obs: &[f64]) -> Result<Vec<f64>>;
    /// A stochastic action with its log-density.
    fn sample_action(&self, obs: &[f64], rng: &mut dyn rand::RngCore) -> Result<(Vec<f64>, f64)>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rollout {
    pub transitions: Vec<Transition>,
    /// Objective values of every evaluated point, resets included, in order.
    pub values: Vec<f64>,
    pub best_params: Vec<f64>,
    pub best_f: f64,
}

/// Runs `steps` policy steps, resetting whenever an episode ends. The first
/// episode starts at `x0` when given, otherwise at a random point.
pub fn rollout<P: Policy + ?Sized, R: Rng>(
    policy: &P,
    env: &mut Env<'_>,
    x0: Option<&[f64]>,
    steps: usize,
    rng: &mut R,
    deterministic: bool,
) -> Result<Rollout> {
    if steps == 0 {
        return Err(Error::invalid("rollout needs at least one step"));
    }
    if policy.obs_dim() != env.cfg.obs_dim() || policy.action_dim() != env.cfg.action_dim() {
        return Err(Error::ShapeMismatch(format!(
            "policy maps {} -> {}, environment needs {} -> {}",
            policy.obs_dim(),
            policy.action_dim(),
            env.cfg.obs_dim(),
            env.cfg.action_dim()
        )));
    }
    let mut obs = match x0 {
        Some(x) => env.reset_at(x)?,
        None => env.reset(rng)?,
    };
    let mut out = Rollout {
        transitions: Vec::with_capacity(steps),
        values: vec![env.f()],
        best_params: env.params().to_vec(),
        best_f: env.f(),
    };
    for _ in 0..steps {
        if env.is_done() {
            obs = env.reset(rng)?;
            out.values.push(env.f());
            out.note(env);
        }
        let action = if deterministic { policy.mean_action(&obs)? } else { policy.sample_action(&obs, rng)?.0 };
        let step = env.step(&action)?;
        out.values.push(env.f());
        out.note(env);
        out.transitions.push(Transition {
            obs: std::mem::take(&mut obs),
            action,
            reward: step.reward,
            next_obs: step.obs.clone(),
            done: step.done,
            f: env.f(),
        });
        obs = step.obs;
    }
    Ok(out)
}

impl Rollout {
    fn note(&mut self, env: &Env<'_>) {
        if env.f() > self.best_f {
            self.best_f = env.f();
            self.best_params.copy_from_slice(env.params());
        }
    }
}

/// `f(x) = -|x|^2`, a concave test objective for the environment shell.
#[derive(Debug, Clone, Copy)]
pub struct NegSquaredNorm {
    pub dim: usize,
}

impl Objective for NegSquaredNorm {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        -x.iter().map(|v| v * v).sum::<f64>()
    }
}
