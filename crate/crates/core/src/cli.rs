//! Command-line front end: configuration, argument parsing and commands.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::bench::{build_g_test, run_benchmark, BenchConfig, Family};
use crate::graphs::{
    complete_graph, gen_barbell, gen_caveman, gen_erdos_renyi, gen_ladder, parse_graph, serialize_graph, Graph,
};
use crate::ppo::{load_checkpoint, save_checkpoint, train_on_graph, write_metrics_csv, PolicyCheckpoint, TrainConfig};
use crate::qsim::{landscape_grid, write_landscape_csv, CostDiagonal};
use crate::rlenv::EnvConfig;

/// Overrides the output directory of every command.
pub const OUTPUT_DIR_ENV: &str = "QAOA_RL_OUTPUT_DIR";

/// Exit code of a run that finished with only part of the requested work.
pub const EXIT_PARTIAL: i32 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub train: TrainSection,
    pub bench: BenchSection,
    pub landscape: LandscapeSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            output_dir: PathBuf::from("out"),
            train: TrainSection::default(),
            bench: BenchSection::default(),
            landscape: LandscapeSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub p: usize,
    pub history: usize,
    /// Training graph file; when absent an Erdos-Renyi graph is generated.
    pub graph_file: Option<PathBuf>,
    pub graph_n: usize,
    pub graph_edge_prob: f64,
    pub graph_seed: u64,
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
    pub checkpoint_every: usize,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        let e = EnvConfig::default();
        Self {
            p: e.p,
            history: e.history,
            graph_file: None,
            graph_n: 8,
            graph_edge_prob: 0.5,
            graph_seed: 0,
            epochs: t.epochs,
            episodes_per_epoch: t.episodes_per_epoch,
            horizon: t.horizon,
            discount: t.discount,
            gae_lambda: t.gae_lambda,
            clip_ratio: t.clip_ratio,
            kl_stop: t.kl_stop,
            gradient_epochs: t.gradient_epochs,
            minibatch_size: t.minibatch_size,
            actor_lr: t.actor_lr,
            critic_lr: t.critic_lr,
            hidden: t.hidden,
            checkpoint_every: t.checkpoint_every,
        }
    }
}

impl TrainSection {
    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            episodes_per_epoch: self.episodes_per_epoch,
            horizon: self.horizon,
            discount: self.discount,
            gae_lambda: self.gae_lambda,
            clip_ratio: self.clip_ratio,
            kl_stop: self.kl_stop,
            gradient_epochs: self.gradient_epochs,
            minibatch_size: self.minibatch_size,
            actor_lr: self.actor_lr,
            critic_lr: self.critic_lr,
            hidden: self.hidden.clone(),
            seed,
            checkpoint_every: self.checkpoint_every,
        }
    }

    pub fn env_config(&self) -> EnvConfig {
        EnvConfig { p: self.p, history: self.history, horizon: self.horizon, ..EnvConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSection {
    pub checkpoints: Vec<PathBuf>,
    pub depths: Vec<usize>,
    pub families: Vec<String>,
    pub attempts: usize,
    pub budget: usize,
    pub jobs: usize,
}

impl Default for BenchSection {
    fn default() -> Self {
        let b = BenchConfig::default();
        Self {
            checkpoints: Vec::new(),
            depths: b.depths,
            families: Family::ALL.iter().map(|f| f.as_str().to_string()).collect(),
            attempts: b.attempts,
            budget: b.budget,
            jobs: b.jobs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LandscapeSection {
    pub resolution: usize,
}

impl Default for LandscapeSection {
    fn default() -> Self {
        Self { resolution: 65 }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qaoa-rl", version, about = "Learned and classical QAOA parameter optimization for Max-Cut")]
pub struct Cli {
    /// JSON configuration file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (the environment variable takes precedence).
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a graph in the canonical text format.
    Generate(GenerateArgs),
    /// Train the policy with PPO.
    Train(TrainArgs),
    /// Compare NM, RL and RLNM on the test suite.
    Bench(BenchArgs),
    /// Export the depth-one energy landscape of a graph.
    Landscape(LandscapeArgs),
    /// Print the effective configuration as JSON.
    ShowConfig,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// erdos | ladder | barbell | caveman | complete
    #[arg(long)]
    pub family: String,
    /// Vertex count (erdos, complete), ladder length, clique size (barbell, caveman).
    #[arg(long)]
    pub n: usize,
    /// Edge probability (erdos).
    #[arg(long)]
    pub p: Option<f64>,
    /// Number of cliques (caveman).
    #[arg(long)]
    pub cliques: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Circuit depth.
    #[arg(long)]
    pub p: Option<usize>,
    /// History length.
    #[arg(long)]
    pub history: Option<usize>,
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub checkpoint_every: Option<usize>,
    /// Continue from this checkpoint.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Policy checkpoint; repeat for several depths.
    #[arg(long = "checkpoint")]
    pub checkpoints: Vec<PathBuf>,
    /// Comma-separated depths.
    #[arg(long, value_delimiter = ',')]
    pub depths: Option<Vec<usize>>,
    /// Comma-separated families: random, community, ladder.
    #[arg(long, value_delimiter = ',')]
    pub families: Option<Vec<String>>,
    #[arg(long)]
    pub attempts: Option<usize>,
    #[arg(long)]
    pub budget: Option<usize>,
    /// Concurrent benchmark cells (0 = all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct LandscapeArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Output file; `<out-dir>/landscape.csv` when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 64 } else { 0 };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

pub fn run(cli: Cli) -> anyhow::Result<i32> {
    let mut cfg = match &cli.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = &cli.out_dir {
        cfg.output_dir = dir.clone();
    }
    if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV) {
        cfg.output_dir = PathBuf::from(dir);
    }
    match cli.command {
        Command::Generate(a) => cmd_generate(&a, &cfg),
        Command::Train(a) => cmd_train(&a, cfg),
        Command::Bench(a) => cmd_bench(&a, cfg),
        Command::Landscape(a) => cmd_landscape(&a, &cfg),
        Command::ShowConfig => {
            println!("{}", serde_json::to_string_pretty(&cfg)?);
            Ok(0)
        }
    }
}

pub fn load_config(path: &Path) -> anyhow::Result<RunConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

fn cmd_generate(a: &GenerateArgs, cfg: &RunConfig) -> anyhow::Result<i32> {
    let g = match a.family.as_str() {
        "erdos" | "erdos_renyi" => {
            let Some(p) = a.p else { bail!("--family erdos needs --p <edge probability>") };
            gen_erdos_renyi(a.n, p, cfg.seed)?
        }
        "ladder" => gen_ladder(a.n)?,
        "barbell" => gen_barbell(a.n)?,
        "caveman" => {
            let Some(c) = a.cliques else { bail!("--family caveman needs --cliques <count>") };
            gen_caveman(c, a.n)?
        }
        "complete" => complete_graph(a.n)?,
        other => bail!("unknown family '{other}' (expected erdos, ladder, barbell, caveman or complete)"),
    };
    let text = serialize_graph(&g);
    match &a.out {
        Some(path) => write_file(path, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn read_graph(path: &Path) -> anyhow::Result<Graph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading graph {}", path.display()))?;
    Ok(parse_graph(&text)
        .with_context(|| format!("parsing graph {}", path.display()))?
        .with_label(path.display().to_string()))
}

fn cmd_train(a: &TrainArgs, mut cfg: RunConfig) -> anyhow::Result<i32> {
    let t = &mut cfg.train;
    if let Some(v) = a.epochs {
        t.epochs = v;
    }
    if let Some(v) = a.p {
        t.p = v;
    }
    if let Some(v) = a.history {
        t.history = v;
    }
    if let Some(v) = &a.graph {
        t.graph_file = Some(v.clone());
    }
    if let Some(v) = a.checkpoint_every {
        t.checkpoint_every = v;
    }
    let graph = match &t.graph_file {
        Some(path) => read_graph(path)?,
        None => gen_erdos_renyi(t.graph_n, t.graph_edge_prob, t.graph_seed)?,
    };
    let out = cfg.output_dir.clone();
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let train_cfg = t.train_config(cfg.seed);
    let every = train_cfg.checkpoint_every;
    let quiet = a.quiet;
    let on_epoch = |ck: &PolicyCheckpoint, m: &crate::ppo::EpochMetrics| {
        if !quiet {
            println!(
                "epoch {:>4}  mean_return {:>10.6}  best_f {:>9.6}  kl {:.5}  clip {:.3}  actor_steps {}",
                m.epoch, m.mean_return, m.best_f, m.mean_kl, m.clip_fraction, m.actor_steps
            );
        }
        if every > 0 && m.epoch.is_multiple_of(every) {
            save_checkpoint(ck, &out.join(format!("checkpoint_epoch{}.json", m.epoch)))?;
        }
        Ok(())
    };
    let (ck, log) = match &a.resume {
        Some(path) => {
            let mut ck = load_checkpoint(path)?;
            ck.config.epochs = train_cfg.epochs;
            let d = CostDiagonal::from_graph(&graph)?;
            let obj = crate::qsim::QaoaObjective::new(&d, ck.p())?;
            let log = crate::ppo::resume(&mut ck, &obj, on_epoch)?;
            (ck, log)
        }
        None => train_on_graph(&train_cfg, &graph, t.env_config(), on_epoch)?,
    };
    save_checkpoint(&ck, &out.join("checkpoint.json"))?;
    let mut csv = Vec::new();
    write_metrics_csv(&log, cfg.seed, &mut csv)?;
    write_file(&out.join("metrics.csv"), &csv)?;
    println!("wrote {} and {}", out.join("checkpoint.json").display(), out.join("metrics.csv").display());
    Ok(0)
}

fn cmd_bench(a: &BenchArgs, mut cfg: RunConfig) -> anyhow::Result<i32> {
    let b = &mut cfg.bench;
    if !a.checkpoints.is_empty() {
        b.checkpoints = a.checkpoints.clone();
    }
    if let Some(v) = &a.depths {
        b.depths = v.clone();
    }
    if let Some(v) = &a.families {
        b.families = v.clone();
    }
    if let Some(v) = a.attempts {
        b.attempts = v;
    }
    if let Some(v) = a.budget {
        b.budget = v;
    }
    if let Some(v) = a.jobs {
        b.jobs = v;
    }
    let families = b.families.iter().map(|f| Family::parse(f)).collect::<Result<Vec<_>, _>>()?;
    let checkpoints = b
        .checkpoints
        .iter()
        .map(|p| load_checkpoint(p).with_context(|| format!("loading checkpoint {}", p.display())))
        .collect::<anyhow::Result<Vec<_>>>()?;
    for (ck, path) in checkpoints.iter().zip(&b.checkpoints) {
        if !b.depths.contains(&ck.p()) {
            bail!(
                "checkpoint {} acts at p={} which is not among the requested depths {:?}",
                path.display(),
                ck.p(),
                b.depths
            );
        }
    }
    let suite = build_g_test()?.only(&families);
    let bench_cfg =
        BenchConfig { depths: b.depths.clone(), attempts: b.attempts, budget: b.budget, seed: cfg.seed, jobs: b.jobs };
    let report = run_benchmark(&suite, &checkpoints, &bench_cfg)?;
    let out = &cfg.output_dir;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut buf = Vec::new();
    report.write_report_csv(&mut buf)?;
    write_file(&out.join("report.csv"), &buf)?;
    buf.clear();
    report.write_summary_csv(&mut buf)?;
    write_file(&out.join("summary.csv"), &buf)?;
    for note in &report.notes {
        eprintln!("note: {note}");
    }
    for f in &report.failures {
        eprintln!("failed: {f}");
    }
    println!("{} instances, {} rows -> {}", suite.len(), report.rows.len(), out.join("report.csv").display());
    Ok(if report.is_partial() { EXIT_PARTIAL } else { 0 })
}

fn cmd_landscape(a: &LandscapeArgs, cfg: &RunConfig) -> anyhow::Result<i32> {
    let g = read_graph(&a.graph)?;
    let d = CostDiagonal::from_graph(&g)?;
    let grid = landscape_grid(&d, a.resolution.unwrap_or(cfg.landscape.resolution))?;
    let mut buf = Vec::new();
    write_landscape_csv(&grid, &mut buf)?;
    let path = a.out.clone().unwrap_or_else(|| cfg.output_dir.join("landscape.csv"));
    write_file(&path, &buf)?;
    Ok(0)
}

fn write_file(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}
