use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fully connected network with `tanh` hidden layers and a linear output.
///
/// All parameters live in one flat vector. Layer `l` maps `sizes[l]` inputs
/// to `sizes[l + 1]` outputs and stores its weight matrix row-major as
/// `sizes[l] x sizes[l + 1]` (input-major), followed by its bias vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    sizes: Vec<usize>,
    params: Vec<f64>,
}

/// Activations recorded by [`Mlp::forward_batch`] for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    batch: usize,
    /// `activations[0]` is the input, `activations[l]` the output of layer `l - 1`.
    activations: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        self.activations.last().expect("at least one layer")
    }

    pub fn batch(&self) -> usize {
        self.batch
    }
}

impl Mlp {
    /// Glorot-uniform weights, zero biases.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Result<Self> {
        let mut net = Self::zeros(sizes)?;
        for l in 0..net.num_layers() {
            let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let (w, _) = net.layer_range(l);
            for p in &mut net.params[w] {
                *p = rng.random_range(-limit..=limit);
            }
        }
        Ok(net)
    }

    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        if sizes.len() < 3 {
            return Err(Error::invalid(format!(
                "an MLP needs input, at least one hidden layer and output; got sizes {sizes:?}"
            )));
        }
        if sizes.contains(&0) {
            return Err(Error::invalid(format!("layer sizes must be positive, got {sizes:?}")));
        }
        let count = sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        Ok(Self { sizes: sizes.to_vec(), params: vec![0.0; count] })
    }

    /// Builds a network from per-layer weight matrices (input-major rows) and biases.
    pub fn from_layers(sizes: &[usize], weights: &[Vec<Vec<f64>>], biases: &[Vec<f64>]) -> Result<Self> {
        let mut net = Self::zeros(sizes)?;
        if weights.len() != net.num_layers() || biases.len() != net.num_layers() {
            return Err(Error::ShapeMismatch(format!(
                "{} layers expected, got {} weight matrices and {} bias vectors",
                net.num_layers(),
                weights.len(),
                biases.len()
            )));
        }
        for l in 0..net.num_layers() {
            let (rows, cols) = (sizes[l], sizes[l + 1]);
            let w = &weights[l];
            if w.len() != rows || w.iter().any(|r| r.len() != cols) || biases[l].len() != cols {
                return Err(Error::ShapeMismatch(format!("layer {l} is not {rows}x{cols}")));
            }
            let (wr, br) = net.layer_range(l);
            for (dst, src) in net.params[wr].iter_mut().zip(w.iter().flatten()) {
                *dst = *src;
            }
            net.params[br].copy_from_slice(&biases[l]);
        }
        if net.params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("network parameter".into()));
        }
        Ok(net)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn num_layers(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().expect("non-empty sizes")
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Ranges of layer `l`'s weights and biases within the flat vector.
    pub fn layer_range(&self, l: usize) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
        let start: usize = self.sizes.windows(2).take(l).map(|w| w[0] * w[1] + w[1]).sum();
        let w_len = self.sizes[l] * self.sizes[l + 1];
        (start..start + w_len, start + w_len..start + w_len + self.sizes[l + 1])
    }

    /// Weight matrix of layer `l` as rows of length `sizes[l + 1]`.
    pub fn layer_weights(&self, l: usize) -> Vec<Vec<f64>> {
        let (w, _) = self.layer_range(l);
        self.params[w].chunks(self.sizes[l + 1]).map(<[f64]>::to_vec).collect()
    }

    pub fn layer_biases(&self, l: usize) -> &[f64] {
        let (_, b) = self.layer_range(l);
        &self.params[b]
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_batch(x, 1)?.activations.pop().expect("output layer"))
    }

    /// Forward pass over `batch` row-major inputs.
    pub fn forward_batch(&self, xs: &[f64], batch: usize) -> Result<ForwardCache> {
        if xs.len() != batch * self.input_dim() {
            return Err(Error::DimensionMismatch { expected: batch * self.input_dim(), got: xs.len() });
        }
        let mut activations = Vec::with_capacity(self.sizes.len());
        activations.push(xs.to_vec());
        for l in 0..self.num_layers() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let (wr, br) = self.layer_range(l);
            let (w, b) = (&self.params[wr], &self.params[br]);
            let input = activations.last().expect("input present");
            let mut out = vec![0.0; batch * n_out];
            for (x, y) in input.chunks_exact(n_in).zip(out.chunks_exact_mut(n_out)) {
                y.copy_from_slice(b);
                for (&xi, row) in x.iter().zip(w.chunks_exact(n_out)) {
                    for (yj, &wij) in y.iter_mut().zip(row) {
                        *yj += xi * wij;
                    }
                }
            }
            if l + 1 < self.num_layers() {
                out.iter_mut().for_each(|v| *v = v.tanh());
            }
            activations.push(out);
        }
        Ok(ForwardCache { batch, activations })
    }

    /// Reverse-mode gradients of `sum(upstream * output)` with respect to the
    /// parameters (summed over the batch) and to each input row.
    pub fn backward(&self, cache: &ForwardCache, upstream: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let batch = cache.batch;
        if upstream.len() != batch * self.output_dim() {
            return Err(Error::DimensionMismatch { expected: batch * self.output_dim(), got: upstream.len() });
        }
        if cache.activations.len() != self.sizes.len() || cache.activations[0].len() != batch * self.input_dim() {
            return Err(Error::invalid("forward cache does not belong to this network"));
        }
        let mut grads = vec![0.0; self.params.len()];
        let mut delta = upstream.to_vec();
        for l in (0..self.num_layers()).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let (wr, br) = self.layer_range(l);
            let w = &self.params[wr.clone()];
            let input = &cache.activations[l];
            let mut delta_in = vec![0.0; batch * n_in];
            {
                let (gw, gb) = grads[wr.start..br.end].split_at_mut(wr.len());
                for ((x, d), dx) in
                    input.chunks_exact(n_in).zip(delta.chunks_exact(n_out)).zip(delta_in.chunks_exact_mut(n_in))
                {
                    for (gbj, &dj) in gb.iter_mut().zip(d) {
                        *gbj += dj;
                    }
                    for ((&xi, grow), (wrow, dxi)) in
                        x.iter().zip(gw.chunks_exact_mut(n_out)).zip(w.chunks_exact(n_out).zip(dx.iter_mut()))
                    {
                        let mut acc = 0.0;
                        for ((g, &wij), &dj) in grow.iter_mut().zip(wrow).zip(d) {
                            *g += xi * dj;
                            acc += wij * dj;
                        }
                        *dxi = acc;
                    }
                }
            }
            if l > 0 {
                // input of layer l is tanh output h: dh/dz = 1 - h^2
                for (dx, &h) in delta_in.iter_mut().zip(input) {
                    *dx *= 1.0 - h * h;
                }
            }
            delta = delta_in;
        }
        Ok((grads, delta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::chacha;

    #[test]
    fn init_shapes_and_zero_biases() {
        let net = Mlp::new(&[12, 64, 64, 2], &mut chacha(1, &[])).unwrap();
        let shapes: Vec<(usize, usize)> =
            (0..3).map(|l| (net.layer_weights(l).len(), net.layer_weights(l)[0].len())).collect();
        assert_eq!(shapes, vec![(12, 64), (64, 64), (64, 2)]);
        assert!((0..3).all(|l| net.layer_biases(l).iter().all(|&b| b == 0.0)));
        let limit = (6.0f64 / 76.0).sqrt();
        assert!(net.layer_weights(0).iter().flatten().all(|w| w.abs() <= limit));
    }

    #[test]
    fn init_is_deterministic() {
        let a = Mlp::new(&[12, 64, 64, 2], &mut chacha(5, &[1])).unwrap();
        let b = Mlp::new(&[12, 64, 64, 2], &mut chacha(5, &[1])).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_missing_hidden_layer() {
        assert!(Mlp::zeros(&[3, 2]).is_err());
        assert!(Mlp::zeros(&[3, 0, 2]).is_err());
    }

    #[test]
    fn zero_weights_output_bias() {
        let mut net = Mlp::zeros(&[3, 4, 2]).unwrap();
        let (_, b) = net.layer_range(1);
        net.params_mut()[b].copy_from_slice(&[0.25, -1.5]);
        assert_eq!(net.forward(&[1.0, 2.0, 3.0]).unwrap(), vec![0.25, -1.5]);
    }

    #[test]
    fn one_one_one_closed_form() {
        let net = Mlp::from_layers(&[1, 1, 1], &[vec![vec![2.0]], vec![vec![3.0]]], &[vec![0.5], vec![-1.0]]).unwrap();
        let y = net.forward(&[0.7]).unwrap()[0];
        assert!((y - (3.0 * (2.0f64 * 0.7 + 0.5).tanh() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn saturated_inputs_stay_finite() {
        let net = Mlp::new(&[12, 64, 64, 2], &mut chacha(2, &[])).unwrap();
        let y = net.forward(&[1e3; 12]).unwrap();
        assert!(y.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn weight_gradient_of_single_linear_path() {
        // d(out)/d(w0) = tanh'(0) * w1 * x = w1 * x when the hidden bias and weight give z = 0 at w0 = 0
        let net = Mlp::from_layers(&[1, 1, 1], &[vec![vec![0.0]], vec![vec![1.0]]], &[vec![0.0], vec![0.0]]).unwrap();
        let cache = net.forward_batch(&[0.8], 1).unwrap();
        let (g, _) = net.backward(&cache, &[1.0]).unwrap();
        assert!((g[0] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let net = Mlp::new(&[4, 8, 3], &mut chacha(3, &[])).unwrap();
        let cache = net.forward_batch(&[0.1, 0.2, 0.3, 0.4], 1).unwrap();
        let (g, dx) = net.backward(&cache, &[0.0; 3]).unwrap();
        assert!(g.iter().chain(&dx).all(|&v| v == 0.0));
    }

    #[test]
    fn dimension_errors() {
        let net = Mlp::new(&[4, 8, 3], &mut chacha(3, &[])).unwrap();
        assert!(matches!(net.forward(&[0.0; 3]), Err(Error::DimensionMismatch { .. })));
        let cache = net.forward_batch(&[0.0; 8], 2).unwrap();
        assert!(net.backward(&cache, &[0.0; 3]).is_err());
    }

    #[test]
    fn layer_views_round_trip() {
        let net = Mlp::new(&[5, 7, 2], &mut chacha(4, &[])).unwrap();
        let weights: Vec<_> = (0..2).map(|l| net.layer_weights(l)).collect();
        let biases: Vec<_> = (0..2).map(|l| net.layer_biases(l).to_vec()).collect();
        assert_eq!(Mlp::from_layers(&[5, 7, 2], &weights, &biases).unwrap(), net);
        assert!(Mlp::from_layers(&[5, 6, 2], &weights, &biases).is_err());
    }
}
