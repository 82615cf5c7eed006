//! Fully connected network with hand-written backpropagation.
//!
//! Parameters live in one flat buffer. Layer `l` stores its weight matrix as
//! `fan_in x fan_out`, row-major (`w[i * fan_out + j]` connects input `i` to
//! output `j`), followed by `fan_out` biases.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Relu,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Relu => x.max(0.0),
        }
    }

    /// Derivative expressed through the activation's output.
    fn grad_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tanh" => Ok(Activation::Tanh),
            "relu" => Ok(Activation::Relu),
            other => Err(Error::Config(format!("unknown activation `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct LayerShape {
    fan_in: usize,
    fan_out: usize,
    offset: usize,
}

impl LayerShape {
    fn weights(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.fan_in * self.fan_out
    }

    fn biases(&self) -> std::ops::Range<usize> {
        let start = self.offset + self.fan_in * self.fan_out;
        start..start + self.fan_out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    activation: Activation,
    layers: Vec<LayerShape>,
    params: Vec<f64>,
}

/// Per-layer outputs recorded by [`Mlp::forward_cached`]; `acts[0]` is the input.
#[derive(Debug, Clone, Default)]
pub struct ForwardCache {
    acts: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        self.acts.last().map_or(&[], Vec::as_slice)
    }
}

fn shapes(sizes: &[usize]) -> Result<(Vec<LayerShape>, usize)> {
    if sizes.len() < 2 || sizes.contains(&0) {
        return Err(Error::Config(format!(
            "network needs at least input and output sizes, all positive: {sizes:?}"
        )));
    }
    let mut offset = 0;
    let layers = sizes
        .windows(2)
        .map(|w| {
            let l = LayerShape {
                fan_in: w[0],
                fan_out: w[1],
                offset,
            };
            offset += w[0] * w[1] + w[1];
            l
        })
        .collect();
    Ok((layers, offset))
}

impl Mlp {
    /// Network with all parameters zero.
    pub fn zeros(sizes: &[usize], activation: Activation) -> Result<Self> {
        let (layers, n) = shapes(sizes)?;
        Ok(Self {
            sizes: sizes.to_vec(),
            activation,
            layers,
            params: vec![0.0; n],
        })
    }

    /// Weights and biases uniform in `±1/sqrt(fan_in)`.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], activation: Activation, rng: &mut R) -> Result<Self> {
        let mut net = Self::zeros(sizes, activation)?;
        for l in net.layers.clone() {
            let bound = 1.0 / (l.fan_in as f64).sqrt();
            for p in &mut net.params[l.offset..l.biases().end] {
                *p = rng.random_range(-bound..bound);
            }
        }
        Ok(net)
    }

    pub fn from_params(sizes: &[usize], activation: Activation, params: Vec<f64>) -> Result<Self> {
        let mut net = Self::zeros(sizes, activation)?;
        if params.len() != net.params.len() {
            return Err(Error::DimensionMismatch {
                expected: net.params.len(),
                found: params.len(),
            });
        }
        if let Some(p) = params.iter().find(|p| !p.is_finite()) {
            return Err(Error::NumericalFailure(format!("non-finite parameter {p}")));
        }
        net.params = params;
        Ok(net)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_size(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_size(&self) -> usize {
        *self.sizes.last().expect("at least two sizes")
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    /// (weights, biases) of layer `l`.
    pub fn layer(&self, l: usize) -> (&[f64], &[f64]) {
        let s = self.layers[l];
        (&self.params[s.weights()], &self.params[s.biases()])
    }

    /// Multiplies the output layer's weights and biases by `factor`.
    pub fn scale_output_layer(&mut self, factor: f64) {
        let s = *self.layers.last().expect("at least one layer");
        for p in &mut self.params[s.offset..s.biases().end] {
            *p *= factor;
        }
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_size() {
            return Err(Error::DimensionMismatch {
                expected: self.input_size(),
                found: x.len(),
            });
        }
        Ok(())
    }

    fn layer_forward(&self, l: usize, x: &[f64], out: &mut Vec<f64>) {
        let s = self.layers[l];
        out.clear();
        out.extend_from_slice(&self.params[s.biases()]);
        let w = &self.params[s.weights()];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            let row = &w[i * s.fan_out..(i + 1) * s.fan_out];
            for (o, &wij) in out.iter_mut().zip(row) {
                *o += xi * wij;
            }
        }
        if l + 1 < self.layers.len() {
            for o in out.iter_mut() {
                *o = self.activation.apply(*o);
            }
        }
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        for l in 0..self.layers.len() {
            self.layer_forward(l, &cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    pub fn forward_cached(&self, x: &[f64]) -> Result<ForwardCache> {
        self.check_input(x)?;
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.to_vec());
        for l in 0..self.layers.len() {
            let mut out = Vec::new();
            self.layer_forward(l, &acts[l], &mut out);
            acts.push(out);
        }
        Ok(ForwardCache { acts })
    }

    /// Adds the gradient of `output · upstream` with respect to every
    /// parameter into `grads`, and returns the gradient with respect to the input.
    pub fn backward(&self, cache: &ForwardCache, upstream: &[f64], grads: &mut [f64]) -> Result<Vec<f64>> {
        if upstream.len() != self.output_size() {
            return Err(Error::DimensionMismatch {
                expected: self.output_size(),
                found: upstream.len(),
            });
        }
        if grads.len() != self.params.len() {
            return Err(Error::DimensionMismatch {
                expected: self.params.len(),
                found: grads.len(),
            });
        }
        if cache.acts.len() != self.layers.len() + 1 {
            return Err(Error::DimensionMismatch {
                expected: self.layers.len() + 1,
                found: cache.acts.len(),
            });
        }
        let mut delta = upstream.to_vec();
        for l in (0..self.layers.len()).rev() {
            let s = self.layers[l];
            let input = &cache.acts[l];
            for (g, d) in grads[s.biases()].iter_mut().zip(&delta) {
                *g += d;
            }
            let w = &self.params[s.weights()];
            let gw = &mut grads[s.weights()];
            let mut dx = vec![0.0; s.fan_in];
            for i in 0..s.fan_in {
                let xi = input[i];
                let row = i * s.fan_out..(i + 1) * s.fan_out;
                let mut acc = 0.0;
                for ((g, &wij), &dj) in gw[row.clone()].iter_mut().zip(&w[row]).zip(&delta) {
                    *g += xi * dj;
                    acc += wij * dj;
                }
                dx[i] = acc;
            }
            if l > 0 {
                for (d, &a) in dx.iter_mut().zip(input) {
                    *d *= self.activation.grad_from_output(a);
                }
            }
            delta = dx;
        }
        Ok(delta)
    }

    /// Gradient of `forward(x) · upstream` with respect to the parameters.
    pub fn gradient(&self, x: &[f64], upstream: &[f64]) -> Result<Vec<f64>> {
        let cache = self.forward_cached(x)?;
        let mut grads = vec![0.0; self.params.len()];
        self.backward(&cache, upstream, &mut grads)?;
        Ok(grads)
    }
}

/// Index of the largest value; the first one on ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Rescales `grads` in place so its L2 norm is at most `max_norm`; returns the norm before clipping.
pub fn clip_grad_norm(grads: &mut [&mut [f64]], max_norm: f64) -> f64 {
    let norm = grads
        .iter()
        .flat_map(|g| g.iter())
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt();
    if norm > max_norm {
        let scale = max_norm / (norm + 1e-6);
        for g in grads.iter_mut() {
            g.iter_mut().for_each(|x| *x *= scale);
        }
    }
    norm
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Central-difference oracle for d(forward(x)·u)/dθ.
    fn finite_difference(net: &Mlp, x: &[f64], u: &[f64], h: f64) -> Vec<f64> {
        let f = |n: &Mlp| -> f64 { n.forward(x).unwrap().iter().zip(u).map(|(a, b)| a * b).sum() };
        (0..net.n_params())
            .map(|k| {
                let mut plus = net.clone();
                plus.params_mut()[k] += h;
                let mut minus = net.clone();
                minus.params_mut()[k] -= h;
                (f(&plus) - f(&minus)) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn gradients_match_finite_differences() {
        for activation in [Activation::Tanh, Activation::Relu] {
            for seed in 0..10 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let net = Mlp::new(&[4, 8, 8, 3], activation, &mut rng).unwrap();
                let x: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
                let u: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
                let analytic = net.gradient(&x, &u).unwrap();
                let numeric = finite_difference(&net, &x, &u, 1e-5);
                for (a, n) in analytic.iter().zip(&numeric) {
                    let rel = (a - n).abs() / a.abs().max(n.abs()).max(1e-8);
                    assert!(rel < 1e-4 || (a - n).abs() < 1e-9, "{activation:?} seed {seed}: {a} vs {n}");
                }
            }
        }
    }

    #[test]
    fn zero_net_outputs_zero() {
        let net = Mlp::zeros(&[3, 5, 2], Activation::Tanh).unwrap();
        assert_eq!(net.forward(&[1.0, -2.0, 3.0]).unwrap(), [0.0, 0.0]);
    }

    #[test]
    fn single_layer_is_affine() {
        // W (2 in x 2 out) = [[1, 2], [3, 4]], b = [0.5, -0.5]
        let net = Mlp::from_params(&[2, 2], Activation::Relu, vec![1.0, 2.0, 3.0, 4.0, 0.5, -0.5]).unwrap();
        assert_eq!(net.forward(&[1.0, -1.0]).unwrap(), [1.0 - 3.0 + 0.5, 2.0 - 4.0 - 0.5]);
        // Linear net: dW = outer(x, upstream), db = upstream.
        let g = net.gradient(&[2.0, 3.0], &[1.0, -1.0]).unwrap();
        assert_eq!(g, [2.0, -2.0, 3.0, -3.0, 1.0, -1.0]);
    }

    #[test]
    fn zero_upstream_zero_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = Mlp::new(&[3, 4, 2], Activation::Tanh, &mut rng).unwrap();
        assert!(net.gradient(&[0.1, 0.2, 0.3], &[0.0, 0.0]).unwrap().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn deterministic_init_and_forward() {
        let make = || Mlp::new(&[3, 4, 2], Activation::Tanh, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let (a, b) = (make(), make());
        assert_eq!(a, b);
        assert_eq!(a.forward(&[0.3, 0.1, -0.2]).unwrap(), b.forward(&[0.3, 0.1, -0.2]).unwrap());
        let bound = 1.0 / 3f64.sqrt();
        assert!(a.layer(0).0.iter().all(|w| w.abs() <= bound));
    }

    #[test]
    fn dimension_mismatch() {
        let net = Mlp::zeros(&[3, 2], Activation::Tanh).unwrap();
        assert!(matches!(net.forward(&[1.0]), Err(Error::DimensionMismatch { expected: 3, found: 1 })));
        assert!(net.gradient(&[1.0, 1.0, 1.0], &[1.0]).is_err());
        assert!(Mlp::zeros(&[3], Activation::Tanh).is_err());
    }

    #[test]
    fn clipping() {
        let mut a = vec![3.0, 0.0];
        let mut b = vec![4.0];
        let norm = clip_grad_norm(&mut [&mut a, &mut b], 1.0);
        assert_eq!(norm, 5.0);
        let after = (a[0] * a[0] + b[0] * b[0]).sqrt();
        assert!((after - 1.0).abs() < 1e-6);
        let mut c = vec![0.1];
        clip_grad_norm(&mut [&mut c], 1.0);
        assert_eq!(c, [0.1]);
    }

    #[test]
    fn argmax_first_on_ties() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
        assert_eq!(argmax(&[-1.0]), 0);
    }
}
