mod common;

use qaoa_rl::graphs::gen_erdos_renyi;
use qaoa_rl::neural::{AdamState, Mlp};
use qaoa_rl::ppo::{
    collect_epoch, init_checkpoint, resume, train, train_epoch, PolicyCheckpoint, TrainConfig, SCHEMA_VERSION,
};
use qaoa_rl::qsim::{CostDiagonal, EvalCounter, Evaluator, QaoaObjective};
use qaoa_rl::rlenv::{Env, EnvConfig, NegSquaredNorm};
use qaoa_rl::rng::chacha;
use qaoa_rl::Error;

fn small_config(seed: u64) -> TrainConfig {
    TrainConfig {
        epochs: 2,
        episodes_per_epoch: 8,
        horizon: 16,
        minibatch_size: 32,
        hidden: vec![16, 16],
        seed,
        ..TrainConfig::default()
    }
}

fn toy() -> NegSquaredNorm {
    NegSquaredNorm { dim: 2 }
}

#[test]
fn backprop_matches_central_differences() {
    let mut rng = chacha(21, &[]);
    let mut net = Mlp::new(&[12, 64, 64, 2], &mut rng).unwrap();
    for (l, err) in common::gradient_errors(&mut net, 4, 50, &mut rng).into_iter().enumerate() {
        assert!(err <= 1e-4, "layer {l}: relative error {err:e}");
    }
    let mut narrow = Mlp::new(&[3, 5, 1], &mut rng).unwrap();
    assert!(common::gradient_errors(&mut narrow, 2, 20, &mut rng).iter().all(|&e| e <= 1e-4));
}

#[test]
fn adam_minimizes_a_quadratic() {
    let mut opt = AdamState::new(2, 0.1);
    let mut x = vec![3.0, -2.0];
    for _ in 0..500 {
        let g: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        opt.step(&mut x, &g).unwrap();
    }
    assert!(x.iter().all(|v| v.abs() < 1e-2), "{x:?}");
    assert_eq!(opt.step_count(), 500);
}

#[test]
fn environment_bookkeeping_on_qaoa_and_toy() {
    let mut rng = chacha(22, &[]);
    let d = CostDiagonal::from_graph(&gen_erdos_renyi(6, 0.5, 3).unwrap()).unwrap();
    for p in 1..=2 {
        let obj = QaoaObjective::new(&d, p).unwrap();
        let cfg = EnvConfig { p, history: 3, horizon: 10, ..EnvConfig::default() };
        common::check_bookkeeping(&obj, cfg, 5, &mut rng).unwrap();
    }
    common::check_bookkeeping(&toy(), EnvConfig { horizon: 7, ..EnvConfig::default() }, 4, &mut rng).unwrap();
}

#[test]
fn environment_rejects_misuse() {
    let obj = toy();
    let counter = EvalCounter::unlimited();
    let cfg = EnvConfig { horizon: 1, ..EnvConfig::default() };
    let mut env = Env::new(cfg, Evaluator::new(&obj, &counter)).unwrap();
    assert!(matches!(env.step(&[0.1, 0.1]), Err(Error::EpisodeFinished)));
    let obs = env.reset_at(&[1.0, 0.0]).unwrap();
    assert_eq!(obs, vec![0.0; 12]);
    let step = env.step(&[-0.5, 0.0]).unwrap();
    assert!(step.done);
    assert!((step.reward - 0.75).abs() < 1e-15);
    assert_eq!(&step.obs[..3], &[0.75, -0.5, 0.0]);
    assert!(matches!(env.step(&[0.0, 0.0]), Err(Error::EpisodeFinished)));
    assert!(matches!(env.reset_at(&[1.0]), Err(Error::DimensionMismatch { .. })));
    let wide = EnvConfig { p: 2, ..EnvConfig::default() };
    assert!(Env::new(wide, Evaluator::new(&obj, &counter)).is_err());
}

#[test]
fn full_size_epoch_spends_exactly_its_budget() {
    let cfg = TrainConfig::default();
    let ck = init_checkpoint(&cfg, EnvConfig::default(), "toy").unwrap();
    let batch = collect_epoch(&ck.policy, &ck.critic, &toy(), &ck.env, cfg.episodes_per_epoch, 0, 0).unwrap();
    assert_eq!(batch.len(), 8192);
    assert_eq!(batch.evaluations, 128 * 65);
    assert_eq!(batch.dones.iter().filter(|&&d| d).count(), 128);
    assert_eq!(batch.obs.len(), 8192 * 12);
    // the policy that collected the batch assigns it the recorded densities, so every first ratio is one
    for i in (0..batch.len()).step_by(97) {
        let mean = ck.policy.actor.forward(&batch.obs[i * 12..(i + 1) * 12]).unwrap();
        let lp = ck.policy.log_prob(&mean, &batch.actions[i * 2..(i + 1) * 2]);
        assert!((lp - batch.log_probs[i]).abs() < 1e-12);
    }
}

#[test]
fn zero_gradient_epochs_leave_networks_untouched() {
    let cfg = TrainConfig { gradient_epochs: 0, ..small_config(3) };
    let mut ck = init_checkpoint(&cfg, EnvConfig::default(), "toy").unwrap();
    let before = ck.clone();
    let m = train_epoch(&mut ck, &toy()).unwrap();
    assert_eq!(ck.policy, before.policy);
    assert_eq!(ck.critic, before.critic);
    assert_eq!((m.mean_kl, m.actor_steps), (0.0, 0));
    assert_eq!(m.evaluations, 8 * 17);
}

#[test]
fn zero_epochs_returns_the_initial_checkpoint() {
    let cfg = TrainConfig { epochs: 0, ..small_config(4) };
    let (ck, log) = train(&cfg, &toy(), EnvConfig::default(), "toy", |_, _| Ok(())).unwrap();
    assert!(log.is_empty());
    assert_eq!(ck, init_checkpoint(&cfg, EnvConfig::default(), "toy").unwrap());
}

#[test]
fn training_is_reproducible_across_thread_counts() {
    let cfg = small_config(5);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| train(&cfg, &toy(), EnvConfig::default(), "toy", |_, _| Ok(())).unwrap())
    };
    let (a, la) = run(1);
    let (b, lb) = run(3);
    assert_eq!(a, b);
    assert_eq!(la, lb);
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
}

#[test]
fn resumed_training_matches_uninterrupted_training() {
    let cfg = small_config(6);
    let (straight, log) = train(&cfg, &toy(), EnvConfig::default(), "toy", |_, _| Ok(())).unwrap();

    let mut ck = init_checkpoint(&TrainConfig { epochs: 1, ..cfg.clone() }, EnvConfig::default(), "toy").unwrap();
    let first = resume(&mut ck, &toy(), |_, _| Ok(())).unwrap();
    let mut ck = PolicyCheckpoint::from_json(&ck.to_json().unwrap()).unwrap();
    ck.config.epochs = 2;
    let second = resume(&mut ck, &toy(), |_, _| Ok(())).unwrap();
    assert_eq!(ck, straight);
    assert_eq!([first, second].concat(), log);
}

#[test]
fn checkpoint_json_round_trips_bitwise() {
    let (ck, _) = train(&small_config(7), &toy(), EnvConfig::default(), "toy", |_, _| Ok(())).unwrap();
    let text = ck.to_json().unwrap();
    let back = PolicyCheckpoint::from_json(&text).unwrap();
    assert_eq!(back, ck);
    assert_eq!(back.to_json().unwrap(), text);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ck.json");
    qaoa_rl::ppo::save_checkpoint(&ck, &path).unwrap();
    assert_eq!(qaoa_rl::ppo::load_checkpoint(&path).unwrap(), ck);
}

#[test]
fn checkpoint_shape_and_schema_are_validated() {
    let ck = init_checkpoint(&small_config(8), EnvConfig::default(), "toy").unwrap();
    assert!(matches!(ck.expect_shape(2, 4), Err(Error::ShapeMismatch(_))));
    assert!(matches!(ck.expect_shape(1, 5), Err(Error::ShapeMismatch(_))));
    ck.expect_shape(1, 4).unwrap();

    let mut json: serde_json::Value = serde_json::from_str(&ck.to_json().unwrap()).unwrap();
    json["p"] = 2.into();
    let err = PolicyCheckpoint::from_json(&json.to_string());
    assert!(matches!(err, Err(Error::ShapeMismatch(_))), "{err:?}");
    json["p"] = 1.into();
    json["schema_version"] = (SCHEMA_VERSION + 1).into();
    assert!(matches!(PolicyCheckpoint::from_json(&json.to_string()), Err(Error::SchemaVersion { .. })));
    assert!(PolicyCheckpoint::from_json("{").is_err());

    let d = CostDiagonal::from_graph(&gen_erdos_renyi(5, 0.5, 1).unwrap()).unwrap();
    let deeper = QaoaObjective::new(&d, 2).unwrap();
    let mut ck = ck;
    assert!(matches!(train_epoch(&mut ck, &deeper), Err(Error::DimensionMismatch { .. })));
}
