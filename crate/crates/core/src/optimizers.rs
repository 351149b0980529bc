//! Budgeted maximizers of a parameter objective: Nelder-Mead, deterministic
//! policy rollouts, and the rollout-then-simplex hybrid.

use std::f64::consts::PI;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ppo::PolicyCheckpoint;
use crate::qsim::{EvalCounter, Evaluator, Objective};
use crate::rlenv::{rollout, Env, EnvConfig};
use crate::rng::{chacha, derive_seed, SplitMix64};

/// Absolute offset of the initial simplex vertices along each coordinate.
pub const SIMPLEX_OFFSET: f64 = 0.25;
const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub f: f64,
    #[serde(skip)]
    pub x: Vec<f64>,
}

/// Every objective query of one optimizer attempt, in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptRunRecord {
    pub optimizer: String,
    pub attempt: usize,
    pub seed: u64,
    pub evals: usize,
    pub best_f: f64,
    pub best_params: Vec<f64>,
    pub trace: Vec<TracePoint>,
}

impl OptRunRecord {
    fn from_trace(optimizer: &str, trace: Vec<TracePoint>) -> Result<Self> {
        let mut best: Option<&TracePoint> = None;
        for t in &trace {
            if best.is_none_or(|b| t.f > b.f) {
                best = Some(t);
            }
        }
        let best = best.ok_or_else(|| Error::Empty("optimizer made no evaluations".into()))?;
        Ok(Self {
            optimizer: optimizer.to_string(),
            attempt: 0,
            seed: 0,
            evals: trace.len(),
            best_f: best.f,
            best_params: best.x.clone(),
            trace,
        })
    }

    /// Best value after each evaluation.
    pub fn best_so_far(&self) -> Vec<f64> {
        self.trace
            .iter()
            .scan(f64::NEG_INFINITY, |b, t| {
                *b = b.max(t.f);
                Some(*b)
            })
            .collect()
    }

    /// The record of the first `evals` queries.
    pub fn truncated(&self, evals: usize) -> Result<Self> {
        let mut r = Self::from_trace(&self.optimizer, self.trace[..evals.min(self.trace.len())].to_vec())?;
        r.attempt = self.attempt;
        r.seed = self.seed;
        Ok(r)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Logs every successful query made through it.
struct Recording<'a> {
    inner: &'a dyn Objective,
    log: Mutex<Vec<TracePoint>>,
}

impl<'a> Recording<'a> {
    fn new(inner: &'a dyn Objective) -> Self {
        Self { inner, log: Mutex::new(Vec::new()) }
    }

    fn into_trace(self) -> Vec<TracePoint> {
        self.log.into_inner().expect("trace lock poisoned")
    }
}

impl Objective for Recording<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let f = self.inner.value(x);
        self.log.lock().expect("trace lock poisoned").push(TracePoint { f, x: x.to_vec() });
        f
    }
}

/// Simplex maximization that stops exactly when `budget` evaluations are spent.
///
/// The initial simplex is `x0` and `x0 + 0.25 e_i`; with `budget == dim + 1`
/// only the simplex is evaluated and its best vertex is returned.
pub fn nelder_mead(objective: &dyn Objective, x0: &[f64], budget: usize) -> Result<OptRunRecord> {
    let n = objective.dim();
    if x0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x0.len() });
    }
    if budget < n + 1 {
        return Err(Error::invalid(format!(
            "Nelder-Mead in {n} dimensions needs a budget of at least {} to build its simplex, got {budget}",
            n + 1
        )));
    }
    let rec = Recording::new(objective);
    let counter = EvalCounter::new(budget);
    simplex_search(&Evaluator::new(&rec, &counter), x0)?;
    OptRunRecord::from_trace("NM", rec.into_trace())
}

fn simplex_search(ev: &Evaluator<'_>, x0: &[f64]) -> Result<()> {
    let n = x0.len();
    let left = || ev.counter().remaining();
    // minimize g = -f
    let g = |x: &[f64]| ev.eval(x).map(|f| -f);
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), g(x0)?));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += SIMPLEX_OFFSET;
        let gx = g(&x)?;
        simplex.push((x, gx));
    }
    let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> { a.iter().zip(b).map(|(a, b)| a + t * (b - a)).collect() };
    while left() > 0 {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / n as f64;
            }
        }
        let (g_best, g_second_worst, g_worst) = (simplex[0].1, simplex[n - 1].1, simplex[n].1);
        let worst = simplex[n].0.clone();
        let xr = lerp(&centroid, &worst, -REFLECT);
        let gr = g(&xr)?;
        if gr < g_best {
            if left() == 0 {
                simplex[n] = (xr, gr);
                break;
            }
            let xe = lerp(&centroid, &xr, EXPAND);
            let ge = g(&xe)?;
            simplex[n] = if ge < gr { (xe, ge) } else { (xr, gr) };
            continue;
        }
        if gr < g_second_worst {
            simplex[n] = (xr, gr);
            continue;
        }
        if left() == 0 {
            break;
        }
        let (xc, accept) = if gr < g_worst {
            let xc = lerp(&centroid, &xr, CONTRACT);
            let gc = g(&xc)?;
            (xc.clone(), (gc <= gr).then_some(gc))
        } else {
            let xc = lerp(&centroid, &worst, CONTRACT);
            let gc = g(&xc)?;
            (xc.clone(), (gc < g_worst).then_some(gc))
        };
        if let Some(gc) = accept {
            simplex[n] = (xc, gc);
            continue;
        }
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            if left() == 0 {
                break;
            }
            let x = lerp(&best, &vertex.0, SHRINK);
            let gx = g(&x)?;
            *vertex = (x, gx);
        }
    }
    Ok(())
}

/// Deterministic mean-policy trajectory from `x0` spending exactly `budget`
/// evaluations, the first at `x0` itself.
pub fn rl_rollout_opt(
    ck: &PolicyCheckpoint,
    objective: &dyn Objective,
    x0: &[f64],
    budget: usize,
) -> Result<OptRunRecord> {
    if objective.dim() != ck.env.action_dim() {
        return Err(Error::ShapeMismatch(format!(
            "checkpoint acts on p={} but the objective has {} parameters",
            ck.p(),
            objective.dim()
        )));
    }
    if budget == 0 {
        return Err(Error::invalid("policy rollout needs a budget of at least 1"));
    }
    let rec = Recording::new(objective);
    let counter = EvalCounter::new(budget);
    {
        let cfg = EnvConfig { horizon: (budget - 1).max(1), ..ck.env };
        let mut env = Env::new(cfg, Evaluator::new(&rec, &counter))?;
        if budget == 1 {
            env.reset_at(x0)?;
        } else {
            // the rng is never drawn from: one uninterrupted deterministic episode
            rollout(&ck.policy, &mut env, Some(x0), budget - 1, &mut chacha(0, &[]), true)?;
        }
    }
    OptRunRecord::from_trace("RL", rec.into_trace())
}

/// Policy rollout on the first half of the budget, then Nelder-Mead from
/// its best point on the second half.
pub fn rlnm(ck: &PolicyCheckpoint, objective: &dyn Objective, x0: &[f64], budget: usize) -> Result<OptRunRecord> {
    check_rlnm_budget(objective.dim(), budget)?;
    let phase1 = rl_rollout_opt(ck, objective, x0, budget / 2)?;
    rlnm_from_phase1(objective, &phase1, budget)
}

/// Completes the hybrid given its finished first phase.
pub fn rlnm_from_phase1(objective: &dyn Objective, phase1: &OptRunRecord, budget: usize) -> Result<OptRunRecord> {
    check_rlnm_budget(objective.dim(), budget)?;
    if phase1.evals != budget / 2 {
        return Err(Error::Bookkeeping(format!("first phase used {} of {} evaluations", phase1.evals, budget / 2)));
    }
    let phase2 = nelder_mead(objective, &phase1.best_params, budget - budget / 2)?;
    let trace = phase1.trace.iter().chain(&phase2.trace).cloned().collect();
    OptRunRecord::from_trace("RLNM", trace)
}

fn check_rlnm_budget(dim: usize, budget: usize) -> Result<()> {
    if !budget.is_multiple_of(2) || budget / 2 < dim + 1 {
        return Err(Error::invalid(format!(
            "the hybrid needs an even budget with half of it at least {}, got {budget}",
            dim + 1
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
pub enum OptimizerSpec<'a> {
    NelderMead,
    Rl(&'a PolicyCheckpoint),
    Rlnm(&'a PolicyCheckpoint),
}

impl OptimizerSpec<'_> {
    pub fn label(&self) -> &'static str {
        match self {
            OptimizerSpec::NelderMead => "NM",
            OptimizerSpec::Rl(_) => "RL",
            OptimizerSpec::Rlnm(_) => "RLNM",
        }
    }

    pub fn run(&self, objective: &dyn Objective, x0: &[f64], budget: usize) -> Result<OptRunRecord> {
        match self {
            OptimizerSpec::NelderMead => nelder_mead(objective, x0, budget),
            OptimizerSpec::Rl(ck) => rl_rollout_opt(ck, objective, x0, budget),
            OptimizerSpec::Rlnm(ck) => rlnm(ck, objective, x0, budget),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiStartResult {
    pub records: Vec<OptRunRecord>,
}

impl MultiStartResult {
    pub fn attempt_best(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.best_f).collect()
    }

    pub fn overall_best(&self) -> f64 {
        self.records.iter().map(|r| r.best_f).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Seed of attempt `attempt` under master `seed`.
pub fn attempt_seed(seed: u64, attempt: usize) -> u64 {
    derive_seed(seed, &[attempt as u64])
}

/// Start point of an attempt, uniform in `[-pi, pi)^dim`. Shared by all
/// optimizers so comparisons are paired.
pub fn start_point(seed: u64, attempt: usize, dim: usize) -> Vec<f64> {
    let mut g = SplitMix64::new(attempt_seed(seed, attempt));
    (0..dim).map(|_| g.uniform(-PI, PI)).collect()
}

pub fn multi_start(
    spec: OptimizerSpec<'_>,
    objective: &dyn Objective,
    attempts: usize,
    budget: usize,
    seed: u64,
) -> Result<MultiStartResult> {
    if attempts == 0 {
        return Err(Error::invalid("multi-start needs at least one attempt"));
    }
    let records = (0..attempts)
        .into_par_iter()
        .map(|k| {
            let mut r = spec.run(objective, &start_point(seed, k, objective.dim()), budget)?;
            r.attempt = k;
            r.seed = attempt_seed(seed, k);
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MultiStartResult { records })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Bowl;

    impl Objective for Bowl {
        fn dim(&self) -> usize {
            2
        }
        fn value(&self, x: &[f64]) -> f64 {
            -x.iter().map(|v| (v - 0.5) * (v - 0.5)).sum::<f64>()
        }
    }

    #[test]
    fn finds_the_top_of_a_bowl() {
        let r = nelder_mead(&Bowl, &[0.0, 0.0], 192).unwrap();
        assert_eq!(r.evals, 192);
        assert!(r.best_params.iter().all(|v| (v - 0.5).abs() < 1e-3), "{:?}", r.best_params);
    }

    #[test]
    fn simplex_only_budget_returns_best_vertex() {
        let r = nelder_mead(&Bowl, &[0.0, 0.0], 3).unwrap();
        assert_eq!(r.evals, 3);
        assert_eq!(r.best_params, vec![0.25, 0.0]);
        assert!(nelder_mead(&Bowl, &[0.0, 0.0], 2).is_err());
    }

    #[test]
    fn budget_is_exact_for_every_size() {
        for budget in 3..60 {
            let r = nelder_mead(&Bowl, &[1.3, -2.0], budget).unwrap();
            assert_eq!(r.evals, budget);
            assert_eq!(r.best_f, r.trace.iter().map(|t| t.f).fold(f64::MIN, f64::max));
        }
    }

    #[test]
    fn start_points_are_shared() {
        let a = start_point(11, 3, 4);
        assert_eq!(a, start_point(11, 3, 4));
        assert_ne!(a, start_point(11, 4, 4));
        assert!(a.iter().all(|v| (-PI..PI).contains(v)));
    }

    #[test]
    fn record_json_schema() {
        let r = nelder_mead(&Bowl, &[0.0, 0.0], 4).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        keys.sort();
        assert_eq!(keys, ["attempt", "best_f", "best_params", "evals", "optimizer", "seed", "trace"]);
        assert_eq!(v["trace"][0].as_object().unwrap().len(), 1);
    }

    #[test]
    fn multi_start_keeps_attempt_order() {
        let m = multi_start(OptimizerSpec::NelderMead, &Bowl, 10, 20, 5).unwrap();
        assert_eq!(m.records.len(), 10);
        for (k, r) in m.records.iter().enumerate() {
            assert_eq!(r.attempt, k);
            assert_eq!(r.trace[0].x, start_point(5, k, 2));
        }
        assert_eq!(m.overall_best(), m.attempt_best().into_iter().fold(f64::MIN, f64::max));
    }
}
