//! Exact statevector simulation of the depth-`p` QAOA circuit for Max-Cut.
//!
//! The cost Hamiltonian is diagonal with entry `z` equal to the cut size of
//! bitstring `z` (vertex `i` is bit `i`, least significant first), so the
//! expected energy is directly the expected cut and is maximized.
//! The circuit starts from `|+>^n` and applies, for `k = 1..p`, the cost
//! phase `exp(-i gamma_k H_C)` followed by the mixer `exp(-i beta_k H_M)`.

mod budget;
mod diagonal;
mod landscape;
mod params;
mod state;
mod symmetric;

use std::sync::Mutex;

pub use budget::{EvalCounter, Evaluator, Objective};
pub use diagonal::CostDiagonal;
pub use landscape::{landscape_grid, write_landscape_csv, LandscapePoint};
pub use params::QaoaParams;
pub use state::StateVector;

use symmetric::HalfState;

use crate::error::{Error, Result};

/// Largest qubit count the simulator accepts.
pub const MAX_QUBITS: usize = 24;

pub fn evolve(d: &CostDiagonal, params: &QaoaParams) -> Result<StateVector> {
    let mut state = StateVector::plus_state(d.n())?;
    evolve_in_place(&mut state, d, params)?;
    Ok(state)
}

/// Overwrites `state` with the evolved circuit output, reusing its storage.
pub fn evolve_in_place(state: &mut StateVector, d: &CostDiagonal, params: &QaoaParams) -> Result<()> {
    if state.n() != d.n() {
        return Err(Error::DimensionMismatch { expected: d.n(), got: state.n() });
    }
    if params.beta.len() != params.gamma.len() {
        return Err(Error::DimensionMismatch { expected: params.beta.len(), got: params.gamma.len() });
    }
    if params.p() == 0 {
        state.reset_plus();
    }
    for (k, (&beta, &gamma)) in params.beta.iter().zip(&params.gamma).enumerate() {
        state.apply_layer_pair(gamma, beta, d, k == 0)?;
    }
    Ok(())
}

pub fn expected_energy(s: &StateVector, d: &CostDiagonal) -> Result<f64> {
    if s.n() != d.n() {
        return Err(Error::DimensionMismatch { expected: d.n(), got: s.n() });
    }
    Ok(s.amplitudes().iter().zip(d.values()).map(|(a, &c)| a.norm_sqr() * c as f64).sum())
}

/// One budgeted circuit evaluation: charges `counter` then returns `f`.
///
/// Uses the flip-symmetric half-size simulation, which yields the same
/// expectation as `expected_energy(&evolve(d, params)?, d)`.
pub fn evaluate(d: &CostDiagonal, params: &QaoaParams, counter: &EvalCounter) -> Result<f64> {
    if params.p() == 0 || params.beta.len() != params.gamma.len() {
        return Err(Error::invalid("parameters need matching beta/gamma of length >= 1"));
    }
    counter.consume()?;
    Ok(HalfState::new(d.n()).evolve_energy(d, params))
}

/// The QAOA expected cut as an [`Objective`] over flat `[beta.., gamma..]`
/// vectors. Simulation buffers are pooled between calls.
pub struct QaoaObjective<'a> {
    diagonal: &'a CostDiagonal,
    p: usize,
    pool: Mutex<Vec<HalfState>>,
}

impl<'a> QaoaObjective<'a> {
    pub fn new(diagonal: &'a CostDiagonal, p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::invalid("circuit depth p must be >= 1"));
        }
        Ok(Self { diagonal, p, pool: Mutex::new(Vec::new()) })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn diagonal(&self) -> &CostDiagonal {
        self.diagonal
    }
}

impl Objective for QaoaObjective<'_> {
    fn dim(&self) -> usize {
        2 * self.p
    }

    fn value(&self, x: &[f64]) -> f64 {
        let params = QaoaParams { beta: x[..self.p].to_vec(), gamma: x[self.p..].to_vec() };
        let pooled = self.pool.lock().expect("state pool poisoned").pop();
        let mut state = pooled.unwrap_or_else(|| HalfState::new(self.diagonal.n()));
        debug_assert_eq!(state.n(), self.diagonal.n());
        let f = state.evolve_energy(self.diagonal, &params);
        self.pool.lock().expect("state pool poisoned").push(state);
        f
    }
}
