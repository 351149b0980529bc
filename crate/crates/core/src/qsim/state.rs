use num_complex::Complex64;

use crate::error::{Error, Result};

use super::{CostDiagonal, MAX_QUBITS};

/// Qubits handled together inside one cache-resident block by the mixer.
const MIXER_BLOCK_QUBITS: usize = 12;

/// Consecutive amplitudes per row of a high-qubit tile.
const TILE_WIDTH: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// The uniform superposition `|+>^n`.
    pub fn plus_state(n: usize) -> Result<Self> {
        check_qubits(n)?;
        let a = (0.5f64).powf(n as f64 / 2.0);
        Ok(Self { n, amps: vec![Complex64::new(a, 0.0); 1 << n] })
    }

    pub fn basis_state(n: usize, z: usize) -> Result<Self> {
        check_qubits(n)?;
        if z >> n != 0 {
            return Err(Error::invalid(format!("basis index {z} out of range for {n} qubits")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[z] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let n = amps.len().trailing_zeros() as usize;
        if amps.len() < 2 || amps.len() != 1 << n {
            return Err(Error::invalid(format!("amplitude count {} is not a power of two >= 2", amps.len())));
        }
        check_qubits(n)?;
        Ok(Self { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Resets to `|+>^n` without reallocating.
    pub(crate) fn reset_plus(&mut self) {
        let a = (0.5f64).powf(self.n as f64 / 2.0);
        self.amps.fill(Complex64::new(a, 0.0));
    }

    /// Multiplies amplitude `z` by `exp(-i * gamma * C(z))`.
    pub fn apply_cost_layer(&mut self, gamma: f64, d: &CostDiagonal) -> Result<()> {
        if d.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: d.n() });
        }
        let phases = phase_table(gamma, d);
        for (a, &c) in self.amps.iter_mut().zip(d.values()) {
            *a *= phases[c as usize];
        }
        Ok(())
    }

    /// Applies `exp(-i * beta * sum_q X_q)`, one qubit rotation at a time.
    pub fn apply_mixer_layer(&mut self, beta: f64) {
        let (s, c) = beta.sin_cos();
        let low = self.n.min(MIXER_BLOCK_QUBITS);
        for block in self.amps.chunks_mut(1 << low) {
            for q in 0..low {
                rotate_qubit(block, q, c, s);
            }
        }
        self.rotate_high_qubits(c, s);
    }

    /// Cost layer followed by mixer layer in two passes over memory. With
    /// `from_plus` the state is first overwritten with `|+>^n`.
    pub(crate) fn apply_layer_pair(&mut self, gamma: f64, beta: f64, d: &CostDiagonal, from_plus: bool) -> Result<()> {
        if d.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: d.n() });
        }
        let phases = phase_table(gamma, d);
        let (s, c) = beta.sin_cos();
        let low = self.n.min(MIXER_BLOCK_QUBITS);
        let plus = (0.5f64).powf(self.n as f64 / 2.0);
        let width = 1 << low;
        for (block, costs) in self.amps.chunks_mut(width).zip(d.values().chunks(width)) {
            if from_plus {
                for (a, &k) in block.iter_mut().zip(costs) {
                    *a = phases[k as usize] * plus;
                }
            } else {
                for (a, &k) in block.iter_mut().zip(costs) {
                    *a *= phases[k as usize];
                }
            }
            for q in 0..low {
                rotate_qubit(block, q, c, s);
            }
        }
        self.rotate_high_qubits(c, s);
        Ok(())
    }

    /// Rotations on qubits at or above the block size. Columns of
    /// `TILE_WIDTH` consecutive low indices are gathered into a contiguous
    /// tile so every high qubit is handled in a single pass over memory.
    fn rotate_high_qubits(&mut self, c: f64, s: f64) {
        if self.n <= MIXER_BLOCK_QUBITS {
            return;
        }
        let rows = 1usize << (self.n - MIXER_BLOCK_QUBITS);
        let row_len = 1usize << MIXER_BLOCK_QUBITS;
        let mut tile = vec![Complex64::new(0.0, 0.0); rows * TILE_WIDTH];
        for col in (0..row_len).step_by(TILE_WIDTH) {
            for (r, chunk) in tile.chunks_exact_mut(TILE_WIDTH).enumerate() {
                let start = r * row_len + col;
                chunk.copy_from_slice(&self.amps[start..start + TILE_WIDTH]);
            }
            // qubit MIXER_BLOCK_QUBITS + j is bit j of the row index
            for j in 0..self.n - MIXER_BLOCK_QUBITS {
                rotate_stride(&mut tile, TILE_WIDTH << j, c, s);
            }
            for (r, chunk) in tile.chunks_exact(TILE_WIDTH).enumerate() {
                let start = r * row_len + col;
                self.amps[start..start + TILE_WIDTH].copy_from_slice(chunk);
            }
        }
    }
}

fn phase_table(gamma: f64, d: &CostDiagonal) -> Vec<Complex64> {
    // cut values are small integers, so the phases are a lookup table
    (0..=d.num_edges()).map(|c| Complex64::from_polar(1.0, -gamma * c as f64)).collect()
}

/// Applies `cos(b) I - i sin(b) X` on qubit `q` to every pair of amplitudes
/// differing only in bit `q`.
#[inline]
fn rotate_qubit(amps: &mut [Complex64], q: usize, c: f64, s: f64) {
    rotate_stride(amps, 1 << q, c, s)
}

#[inline]
fn rotate_stride(amps: &mut [Complex64], stride: usize, c: f64, s: f64) {
    for pair in amps.chunks_exact_mut(2 * stride) {
        let (lo, hi) = pair.split_at_mut(stride);
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            let (ar, ai, br, bi) = (a.re, a.im, b.re, b.im);
            a.re = c * ar + s * bi;
            a.im = c * ai - s * br;
            b.re = c * br + s * ai;
            b.im = c * bi - s * ar;
        }
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::Capacity { n, max: MAX_QUBITS });
    }
    Ok(())
}
