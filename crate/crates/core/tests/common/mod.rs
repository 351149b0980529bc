#![allow(dead_code)]

use nalgebra::{Complex, DMatrix};
use rand::Rng;

/// Cut value of bitstring `z` (bit `i` is vertex `i`), counted edge by edge.
pub fn cut_of(edges: &[(usize, usize)], z: usize) -> f64 {
    edges.iter().filter(|&&(a, b)| (z >> a & 1) != (z >> b & 1)).count() as f64
}

fn pauli_x_on(n: usize, qubit: usize) -> DMatrix<Complex<f64>> {
    let one = Complex::new(1.0, 0.0);
    let zero = Complex::new(0.0, 0.0);
    let x = DMatrix::from_row_slice(2, 2, &[zero, one, one, zero]);
    // qubit 0 is the least significant index, i.e. the rightmost factor
    let left = DMatrix::<Complex<f64>>::identity(1 << (n - 1 - qubit), 1 << (n - 1 - qubit));
    let right = DMatrix::<Complex<f64>>::identity(1 << qubit, 1 << qubit);
    left.kronecker(&x).kronecker(&right)
}

/// The QAOA state built from dense matrix exponentials of both Hamiltonians.
pub fn dense_qaoa_state(n: usize, edges: &[(usize, usize)], beta: &[f64], gamma: &[f64]) -> Vec<Complex<f64>> {
    let dim = 1 << n;
    let h_c =
        DMatrix::from_fn(
            dim,
            dim,
            |r, c| if r == c { Complex::new(cut_of(edges, r), 0.0) } else { Complex::new(0.0, 0.0) },
        );
    let mut h_m = DMatrix::<Complex<f64>>::zeros(dim, dim);
    for q in 0..n {
        h_m += pauli_x_on(n, q);
    }
    let amp = Complex::new(1.0 / (dim as f64).sqrt(), 0.0);
    let mut psi = nalgebra::DVector::from_element(dim, amp);
    for (&b, &g) in beta.iter().zip(gamma) {
        let uc = (h_c.clone() * Complex::new(0.0, -g)).exp();
        let um = (h_m.clone() * Complex::new(0.0, -b)).exp();
        psi = um * (uc * psi);
    }
    psi.iter().copied().collect()
}

pub fn dense_energy(n: usize, edges: &[(usize, usize)], beta: &[f64], gamma: &[f64]) -> f64 {
    dense_qaoa_state(n, edges, beta, gamma).iter().enumerate().map(|(z, a)| a.norm_sqr() * cut_of(edges, z)).sum()
}

/// Each of the `n(n-1)/2` possible edges kept with probability one half.
pub fn random_edges<R: Rng>(n: usize, rng: &mut R) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(0.5) {
                edges.push((a, b));
            }
        }
    }
    edges
}

pub fn random_angles<R: Rng>(p: usize, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    use std::f64::consts::PI;
    let beta = (0..p).map(|_| rng.random_range(-PI..PI)).collect();
    let gamma = (0..p).map(|_| rng.random_range(-PI..PI)).collect();
    (beta, gamma)
}

use qaoa_rl::neural::Mlp;
use qaoa_rl::qsim::{EvalCounter, Evaluator, Objective};
use qaoa_rl::rlenv::{rollout, Env, EnvConfig, Policy};

/// Largest relative error between backprop and central differences, per
/// layer, over `probes` random parameters of each layer.
pub fn gradient_errors<R: Rng>(net: &mut Mlp, batch: usize, probes: usize, rng: &mut R) -> Vec<f64> {
    let h = 1e-5;
    let xs: Vec<f64> = (0..batch * net.input_dim()).map(|_| rng.random_range(-2.0..2.0)).collect();
    let up: Vec<f64> = (0..batch * net.output_dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let loss = |net: &Mlp| -> f64 {
        let cache = net.forward_batch(&xs, batch).unwrap();
        cache.output().iter().zip(&up).map(|(o, u)| o * u).sum()
    };
    let cache = net.forward_batch(&xs, batch).unwrap();
    let (grads, _) = net.backward(&cache, &up).unwrap();
    (0..net.num_layers())
        .map(|l| {
            let (w, b) = net.layer_range(l);
            let mut worst: f64 = 0.0;
            for k in 0..probes {
                let i = if k % 5 == 4 { rng.random_range(b.clone()) } else { rng.random_range(w.clone()) };
                let orig = net.params()[i];
                net.params_mut()[i] = orig + h;
                let plus = loss(net);
                net.params_mut()[i] = orig - h;
                let minus = loss(net);
                net.params_mut()[i] = orig;
                let numeric = (plus - minus) / (2.0 * h);
                let scale = grads[i].abs().max(numeric.abs());
                if scale > 0.0 {
                    worst = worst.max((grads[i] - numeric).abs() / scale);
                }
            }
            worst
        })
        .collect()
}

/// Gaussian steps of fixed scale, ignoring the observation.
pub struct Jitter {
    pub obs_dim: usize,
    pub action_dim: usize,
}

impl Policy for Jitter {
    fn obs_dim(&self) -> usize {
        self.obs_dim
    }
    fn action_dim(&self) -> usize {
        self.action_dim
    }
    fn mean_action(&self, _: &[f64]) -> qaoa_rl::Result<Vec<f64>> {
        Ok(vec![0.0; self.action_dim])
    }
    fn sample_action(&self, _: &[f64], rng: &mut dyn rand::RngCore) -> qaoa_rl::Result<(Vec<f64>, f64)> {
        Ok(((0..self.action_dim).map(|_| rng.random_range(-0.3..0.3)).collect(), 0.0))
    }
}

/// Runs `episodes` random episodes and checks telescoping, observation
/// length and evaluation counts. Returns a description of the first
/// violation.
pub fn check_bookkeeping<R: Rng>(
    objective: &dyn Objective,
    cfg: EnvConfig,
    episodes: usize,
    rng: &mut R,
) -> Result<(), String> {
    let counter = EvalCounter::unlimited();
    let mut env = Env::new(cfg, Evaluator::new(objective, &counter)).map_err(|e| e.to_string())?;
    let policy = Jitter { obs_dim: cfg.obs_dim(), action_dim: cfg.action_dim() };
    let run = rollout(&policy, &mut env, None, episodes * cfg.horizon, rng, false).map_err(|e| e.to_string())?;
    let want = episodes * (cfg.horizon + 1);
    if counter.used() != want || run.values.len() != want {
        return Err(format!("{} evaluations ({} values), expected {want}", counter.used(), run.values.len()));
    }
    for (e, steps) in run.transitions.chunks(cfg.horizon).enumerate() {
        let sum: f64 = steps.iter().map(|t| t.reward).sum();
        let vals = &run.values[e * (cfg.horizon + 1)..(e + 1) * (cfg.horizon + 1)];
        let delta = vals[cfg.horizon] - vals[0];
        if (sum - delta).abs() > 1e-9 {
            return Err(format!("episode {e}: rewards sum to {sum}, objective moved {delta}"));
        }
        for (k, t) in steps.iter().enumerate() {
            if t.obs.len() != cfg.obs_dim() || t.next_obs.len() != cfg.obs_dim() {
                return Err(format!("observation length {} != {}", t.obs.len(), cfg.obs_dim()));
            }
            if t.done != (k + 1 == cfg.horizon) {
                return Err(format!("episode {e} step {k}: done = {}", t.done));
            }
        }
    }
    Ok(())
}
