use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use crate::error::{Error, Result};
use crate::neural::{AdamState, Mlp};
use crate::rlenv::EnvConfig;

use super::{Critic, GaussianPolicy, TrainConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct RewardStats {
    /// Mean undiscounted episode return of the last completed epoch.
    pub mean_return: f64,
    /// Largest objective value seen during training so far; `None` before
    /// the first epoch.
    pub best_f: Option<f64>,
}

/// Everything needed to deploy the policy or to resume training.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyCheckpoint {
    pub policy: GaussianPolicy,
    pub critic: Critic,
    pub config: TrainConfig,
    pub env: EnvConfig,
    /// Completed training epochs.
    pub epoch: usize,
    pub training_graph_label: String,
    pub actor_opt: AdamState,
    pub critic_opt: AdamState,
    pub stats: RewardStats,
}

impl PolicyCheckpoint {
    pub fn p(&self) -> usize {
        self.env.p
    }

    pub fn history(&self) -> usize {
        self.env.history
    }

    /// Fails unless the checkpoint acts on depth `p` with history `history`.
    pub fn expect_shape(&self, p: usize, history: usize) -> Result<()> {
        if self.p() != p || self.history() != history {
            return Err(Error::ShapeMismatch(format!(
                "checkpoint has p={}, L={}; requested p={p}, L={history}",
                self.p(),
                self.history()
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let file = CheckpointFile::from(self);
        let mut buf = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, SeventeenDigits);
        file.serialize(&mut ser)?;
        buf.push(b'\n');
        Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: serde_json::Value = serde_json::from_str(text)?;
        let found = raw.get("schema_version").and_then(serde_json::Value::as_u64).unwrap_or(0);
        if found != u64::from(SCHEMA_VERSION) {
            return Err(Error::SchemaVersion { found: found.try_into().unwrap_or(u32::MAX), expected: SCHEMA_VERSION });
        }
        let file: CheckpointFile = serde_json::from_value(raw)?;
        file.into_checkpoint()
    }
}

pub fn save_checkpoint(ck: &PolicyCheckpoint, path: &Path) -> Result<()> {
    fs::write(path, ck.to_json()?)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<PolicyCheckpoint> {
    PolicyCheckpoint::from_json(&fs::read_to_string(path)?)
}

/// Writes every float with 17 significant digits so values round-trip exactly.
struct SeventeenDigits;

impl Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetFile {
    weights: Vec<Vec<Vec<f64>>>,
    biases: Vec<Vec<f64>>,
}

impl NetFile {
    fn from_mlp(net: &Mlp) -> Self {
        Self {
            weights: (0..net.num_layers()).map(|l| net.layer_weights(l)).collect(),
            biases: (0..net.num_layers()).map(|l| net.layer_biases(l).to_vec()).collect(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OptimizerFile {
    actor: AdamState,
    critic: AdamState,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckpointFile {
    schema_version: u32,
    p: usize,
    #[serde(rename = "L")]
    history: usize,
    horizon: usize,
    init_range: [f64; 2],
    layer_sizes: Vec<usize>,
    actor: NetFile,
    critic: NetFile,
    sigma2: f64,
    train_config: TrainConfig,
    epoch: usize,
    training_graph_label: String,
    reward_stats: RewardStats,
    optimizer_state: OptimizerFile,
}

impl From<&PolicyCheckpoint> for CheckpointFile {
    fn from(ck: &PolicyCheckpoint) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            p: ck.env.p,
            history: ck.env.history,
            horizon: ck.env.horizon,
            init_range: [ck.env.init_range.0, ck.env.init_range.1],
            layer_sizes: ck.policy.actor.sizes().to_vec(),
            actor: NetFile::from_mlp(&ck.policy.actor),
            critic: NetFile::from_mlp(&ck.critic.net),
            sigma2: ck.policy.sigma2(),
            train_config: ck.config.clone(),
            epoch: ck.epoch,
            training_graph_label: ck.training_graph_label.clone(),
            reward_stats: ck.stats,
            optimizer_state: OptimizerFile { actor: ck.actor_opt.clone(), critic: ck.critic_opt.clone() },
        }
    }
}

impl CheckpointFile {
    fn into_checkpoint(self) -> Result<PolicyCheckpoint> {
        let env = EnvConfig {
            p: self.p,
            history: self.history,
            horizon: self.horizon,
            init_range: (self.init_range[0], self.init_range[1]),
        };
        env.validate()?;
        let sizes = &self.layer_sizes;
        if sizes.len() < 3 || sizes[0] != env.obs_dim() || sizes[sizes.len() - 1] != env.action_dim() {
            return Err(Error::ShapeMismatch(format!(
                "layer sizes {sizes:?} do not fit p={} and L={} (input {}, output {})",
                env.p,
                env.history,
                env.obs_dim(),
                env.action_dim()
            )));
        }
        let actor = Mlp::from_layers(sizes, &self.actor.weights, &self.actor.biases)?;
        let mut critic_sizes = sizes.clone();
        *critic_sizes.last_mut().expect("checked length") = 1;
        let critic = Mlp::from_layers(&critic_sizes, &self.critic.weights, &self.critic.biases)?;
        let opt = self.optimizer_state;
        if opt.actor.len() != actor.params().len() || opt.critic.len() != critic.params().len() {
            return Err(Error::ShapeMismatch("optimizer state does not match network sizes".into()));
        }
        Ok(PolicyCheckpoint {
            policy: GaussianPolicy::with_variance(actor, self.sigma2)?,
            critic: Critic::new(critic)?,
            config: self.train_config,
            env,
            epoch: self.epoch,
            training_graph_label: self.training_graph_label,
            actor_opt: opt.actor,
            critic_opt: opt.critic,
            stats: self.reward_stats,
        })
    }
}
