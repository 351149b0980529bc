//! Half-size QAOA simulation exploiting the global bit-flip symmetry.
//!
//! Cut values satisfy `C(z) = C(!z)`, the initial state is flip-invariant and
//! the mixer commutes with `X^n`, so every QAOA state has `a_z = a_{!z}`.
//! Only amplitudes with the top bit clear are stored. The mixer on the top
//! qubit then pairs index `z` with its mirror `2^(n-1) - 1 - z`.

use super::{CostDiagonal, QaoaParams};

const BLOCK_BITS: usize = 12;
const TILE_WIDTH: usize = 16;

/// Amplitudes stored as separate real and imaginary arrays so the
/// rotation kernels vectorize.
#[derive(Debug, Clone)]
pub(crate) struct HalfState {
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
    tile_re: Vec<f64>,
    tile_im: Vec<f64>,
}

impl HalfState {
    /// Buffer for an `n`-qubit circuit, `n >= 2`.
    pub(crate) fn new(n: usize) -> Self {
        debug_assert!(n >= 2);
        let half = 1 << (n - 1);
        Self { n, re: vec![0.0; half], im: vec![0.0; half], tile_re: Vec::new(), tile_im: Vec::new() }
    }

    pub(crate) fn n(&self) -> usize {
        self.n
    }

    /// Runs the circuit and returns the expected cut.
    pub(crate) fn evolve_energy(&mut self, d: &CostDiagonal, params: &QaoaParams) -> f64 {
        debug_assert_eq!(d.n(), self.n);
        #[cfg(target_arch = "x86_64")]
        {
            if std::arch::is_x86_feature_detected!("avx2") {
                // SAFETY: the CPU supports AVX2, checked just above.
                return unsafe { self.evolve_energy_avx2(d, params) };
            }
        }
        self.evolve_energy_generic(d, params)
    }

    #[cfg(target_arch = "x86_64")]
    #[target_feature(enable = "avx2")]
    unsafe fn evolve_energy_avx2(&mut self, d: &CostDiagonal, params: &QaoaParams) -> f64 {
        self.evolve_energy_generic(d, params)
    }

    #[inline(always)]
    fn evolve_energy_generic(&mut self, d: &CostDiagonal, params: &QaoaParams) -> f64 {
        let half = 1usize << (self.n - 1);
        let costs = &d.values()[..half];
        for (k, (&beta, &gamma)) in params.beta.iter().zip(&params.gamma).enumerate() {
            let phases: Vec<(f64, f64)> = (0..=d.num_edges())
                .map(|c| {
                    let (s, c) = (-gamma * c as f64).sin_cos();
                    (c, s)
                })
                .collect();
            let init = (k == 0).then(|| (0.5f64).powf(self.n as f64 / 2.0));
            let (s, c) = beta.sin_cos();
            self.low_pass(costs, &phases, init, c, s);
            self.high_pass(c, s);
        }
        let mut f = 0.0;
        for ((&r, &i), &c) in self.re.iter().zip(&self.im).zip(costs) {
            f += (r * r + i * i) * c as f64;
        }
        2.0 * f
    }

    /// Cost phase, top-qubit mirror rotation and rotations on the low
    /// `BLOCK_BITS` qubits, block pair by block pair.
    #[inline(always)]
    fn low_pass(&mut self, costs: &[u16], phases: &[(f64, f64)], init: Option<f64>, c: f64, s: f64) {
        let m = self.n - 1;
        let low = m.min(BLOCK_BITS);
        let width = 1usize << low;
        let blocks = 1usize << (m - low);
        let phase = |re: &mut [f64], im: &mut [f64], cost: &[u16]| match init {
            Some(a0) => {
                for ((r, i), &k) in re.iter_mut().zip(im.iter_mut()).zip(cost) {
                    let (pr, pi) = phases[k as usize];
                    *r = pr * a0;
                    *i = pi * a0;
                }
            }
            None => {
                for ((r, i), &k) in re.iter_mut().zip(im.iter_mut()).zip(cost) {
                    let (pr, pi) = phases[k as usize];
                    let (ar, ai) = (*r, *i);
                    *r = pr * ar - pi * ai;
                    *i = pr * ai + pi * ar;
                }
            }
        };
        if blocks == 1 {
            phase(&mut self.re, &mut self.im, costs);
            let (lo_re, hi_re) = self.re.split_at_mut(width / 2);
            let (lo_im, hi_im) = self.im.split_at_mut(width / 2);
            rotate_mirrored(lo_re, lo_im, hi_re, hi_im, c, s);
            for q in 0..low {
                rotate_stride(&mut self.re, &mut self.im, 1 << q, c, s);
            }
            return;
        }
        let mid = width * blocks / 2;
        let (front_re, back_re) = self.re.split_at_mut(mid);
        let (front_im, back_im) = self.im.split_at_mut(mid);
        let (cost_front, cost_back) = costs.split_at(mid);
        let lows = front_re.chunks_exact_mut(width).zip(front_im.chunks_exact_mut(width));
        let highs = back_re.chunks_exact_mut(width).zip(back_im.chunks_exact_mut(width)).rev();
        let cost_pairs = cost_front.chunks_exact(width).zip(cost_back.chunks_exact(width).rev());
        for (((lo_re, lo_im), (hi_re, hi_im)), (clo, chi)) in lows.zip(highs).zip(cost_pairs) {
            phase(lo_re, lo_im, clo);
            phase(hi_re, hi_im, chi);
            rotate_mirrored(lo_re, lo_im, hi_re, hi_im, c, s);
            for q in 0..low {
                rotate_stride(lo_re, lo_im, 1 << q, c, s);
                rotate_stride(hi_re, hi_im, 1 << q, c, s);
            }
        }
    }

    /// Rotations on the qubits above the block, one tile of columns at a time.
    #[inline(always)]
    fn high_pass(&mut self, c: f64, s: f64) {
        let m = self.n - 1;
        if m <= BLOCK_BITS {
            return;
        }
        let rows = 1usize << (m - BLOCK_BITS);
        let row_len = 1usize << BLOCK_BITS;
        self.tile_re.resize(rows * TILE_WIDTH, 0.0);
        self.tile_im.resize(rows * TILE_WIDTH, 0.0);
        for col in (0..row_len).step_by(TILE_WIDTH) {
            for r in 0..rows {
                let src = r * row_len + col;
                let dst = r * TILE_WIDTH;
                self.tile_re[dst..dst + TILE_WIDTH].copy_from_slice(&self.re[src..src + TILE_WIDTH]);
                self.tile_im[dst..dst + TILE_WIDTH].copy_from_slice(&self.im[src..src + TILE_WIDTH]);
            }
            for j in 0..m - BLOCK_BITS {
                rotate_stride(&mut self.tile_re, &mut self.tile_im, TILE_WIDTH << j, c, s);
            }
            for r in 0..rows {
                let dst = r * row_len + col;
                let src = r * TILE_WIDTH;
                self.re[dst..dst + TILE_WIDTH].copy_from_slice(&self.tile_re[src..src + TILE_WIDTH]);
                self.im[dst..dst + TILE_WIDTH].copy_from_slice(&self.tile_im[src..src + TILE_WIDTH]);
            }
        }
    }

    /// Expands to the full `2^n` statevector.
    #[cfg(test)]
    pub(crate) fn to_full(&self) -> super::StateVector {
        use num_complex::Complex64;
        let half = self.re.len();
        let full: Vec<Complex64> = (0..2 * half)
            .map(|z| {
                let k = if z < half { z } else { 2 * half - 1 - z };
                Complex64::new(self.re[k], self.im[k])
            })
            .collect();
        super::StateVector::from_amplitudes(full).expect("power-of-two length")
    }
}

/// `cos(b) I - i sin(b) X` on every pair `(k, k + stride)` within each
/// `2 * stride` chunk.
#[inline(always)]
fn rotate_stride(re: &mut [f64], im: &mut [f64], stride: usize, c: f64, s: f64) {
    for (chunk_re, chunk_im) in re.chunks_exact_mut(2 * stride).zip(im.chunks_exact_mut(2 * stride)) {
        let (ar, br) = chunk_re.split_at_mut(stride);
        let (ai, bi) = chunk_im.split_at_mut(stride);
        rotate_slices(ar, ai, br.iter_mut(), bi.iter_mut(), c, s);
    }
}

/// Pairs element `k` of the low slices with element `len - 1 - k` of the high ones.
#[inline(always)]
fn rotate_mirrored(lo_re: &mut [f64], lo_im: &mut [f64], hi_re: &mut [f64], hi_im: &mut [f64], c: f64, s: f64) {
    rotate_slices(lo_re, lo_im, hi_re.iter_mut().rev(), hi_im.iter_mut().rev(), c, s);
}

#[inline(always)]
fn rotate_slices<'a>(
    ar: &mut [f64],
    ai: &mut [f64],
    br: impl Iterator<Item = &'a mut f64>,
    bi: impl Iterator<Item = &'a mut f64>,
    c: f64,
    s: f64,
) {
    for (((xr, xi), yr), yi) in ar.iter_mut().zip(ai.iter_mut()).zip(br).zip(bi) {
        let (a, b, e, f) = (*xr, *xi, *yr, *yi);
        *xr = c * a + s * f;
        *xi = c * b - s * e;
        *yr = c * e + s * b;
        *yi = c * f - s * a;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{complete_graph, gen_erdos_renyi, gen_ladder};
    use crate::qsim::{evolve, expected_energy};

    fn check(g: &crate::graphs::Graph, params: &QaoaParams) {
        let d = CostDiagonal::from_graph(g).unwrap();
        let full = evolve(&d, params).unwrap();
        let mut half = HalfState::new(g.n());
        let f = half.evolve_energy(&d, params);
        let expanded = half.to_full();
        for (a, b) in expanded.amplitudes().iter().zip(full.amplitudes()) {
            assert!((a - b).norm() < 1e-12, "{} {:?}", g, params);
        }
        let want = expected_energy(&full, &d).unwrap();
        assert!((f - want).abs() < 1e-10 * want.max(1.0), "{f} vs {want}");
    }

    #[test]
    fn matches_full_simulation_on_small_graphs() {
        let params = QaoaParams::new(vec![0.37, -1.1], vec![2.3, 0.45]).unwrap();
        check(&complete_graph(2).unwrap(), &params);
        check(&complete_graph(3).unwrap(), &params);
        check(&gen_ladder(3).unwrap(), &params);
    }

    #[test]
    fn matches_full_simulation_across_block_boundaries() {
        // n - 1 = 13 and 15 exercise the paired-block and tiled paths
        let params = QaoaParams::new(vec![0.8], vec![-0.6]).unwrap();
        check(&gen_erdos_renyi(14, 0.4, 5).unwrap(), &params);
        let params = QaoaParams::new(vec![0.2, 1.9], vec![0.3, -2.5]).unwrap();
        check(&gen_erdos_renyi(16, 0.3, 6).unwrap(), &params);
    }

    #[test]
    fn buffers_are_reusable() {
        let g = gen_erdos_renyi(15, 0.5, 2).unwrap();
        let d = CostDiagonal::from_graph(&g).unwrap();
        let mut half = HalfState::new(15);
        let a = QaoaParams::new(vec![0.1], vec![0.2]).unwrap();
        let b = QaoaParams::new(vec![1.4], vec![-0.9]).unwrap();
        let fa = half.evolve_energy(&d, &a);
        half.evolve_energy(&d, &b);
        assert_eq!(half.evolve_energy(&d, &a).to_bits(), fa.to_bits());
    }
}
