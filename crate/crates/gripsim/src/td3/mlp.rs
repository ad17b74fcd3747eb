//! Minimal dense networks with manual backpropagation, plus Adam.
//!
//! Everything is f64 and batch-major: a batch of `n` vectors of width `d` is
//! one flat `Vec<f64>` of length `n * d`. Hidden layers use the rectifier;
//! the output activation is per-network (tanh for actors, identity for
//! critics). Parameters flatten in a fixed order (per layer: weights
//! row-major, then biases), which the optimizer, soft updates, checkpoints
//! and finite-difference tests all share.

use rand::Rng;
use rand_distr::{Distribution, Normal};

/// Output-layer activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Identity,
    Relu,
    Tanh,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::Relu => x.max(0.0),
            Activation::Tanh => x.tanh(),
        }
    }

    /// Derivative expressed through the activation's own output.
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - y * y,
        }
    }
}

/// One dense layer; weights are `out_dim x in_dim`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub in_dim: usize,
    pub out_dim: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl Linear {
    /// Uniform init in ±1/sqrt(in_dim) for weights and biases.
    fn new<R: Rng>(in_dim: usize, out_dim: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (in_dim as f64).sqrt();
        let w = (0..in_dim * out_dim).map(|_| rng.random_range(-bound..bound)).collect();
        let b = (0..out_dim).map(|_| rng.random_range(-bound..bound)).collect();
        Self { in_dim, out_dim, w, b }
    }

    fn forward_into(&self, x: &[f64], batch: usize, act: Activation, out: &mut Vec<f64>) {
        out.clear();
        out.reserve(batch * self.out_dim);
        for b in 0..batch {
            let row = &x[b * self.in_dim..(b + 1) * self.in_dim];
            for o in 0..self.out_dim {
                let wrow = &self.w[o * self.in_dim..(o + 1) * self.in_dim];
                let z = self.b[o]
                    + wrow.iter().zip(row).map(|(w, x)| w * x).sum::<f64>();
                out.push(act.apply(z));
            }
        }
    }
}

/// Gradients with the same shapes as a network's parameters.
#[derive(Debug, Clone)]
pub struct MlpGrads {
    pub gw: Vec<Vec<f64>>,
    pub gb: Vec<Vec<f64>>,
}

impl MlpGrads {
    pub fn zero(&mut self) {
        for g in self.gw.iter_mut().chain(self.gb.iter_mut()) {
            g.iter_mut().for_each(|v| *v = 0.0);
        }
    }

    fn flat_iter(&self) -> impl Iterator<Item = &f64> {
        self.gw.iter().zip(&self.gb).flat_map(|(w, b)| w.iter().chain(b.iter()))
    }
}

/// Forward-pass activations kept for backpropagation.
#[derive(Debug, Default, Clone)]
pub struct MlpCache {
    batch: usize,
    input: Vec<f64>,
    /// Post-activation output of each layer.
    outputs: Vec<Vec<f64>>,
    /// Scratch for backward deltas.
    delta: Vec<f64>,
    delta_prev: Vec<f64>,
}

/// A fully-connected network: rectifier hidden layers, configurable output
/// activation.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Linear>,
    pub out_act: Activation,
}

impl Mlp {
    /// `dims` is the full dimension chain, e.g. `[6, 64, 64, 2]`.
    pub fn new<R: Rng>(dims: &[usize], out_act: Activation, rng: &mut R) -> Self {
        assert!(dims.len() >= 2, "need at least input and output dims");
        let layers =
            dims.windows(2).map(|d| Linear::new(d[0], d[1], rng)).collect();
        Self { layers, out_act }
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut dims = vec![self.layers[0].in_dim];
        dims.extend(self.layers.iter().map(|l| l.out_dim));
        dims
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.layers.last().unwrap().out_dim
    }

    fn activation_of(&self, layer: usize) -> Activation {
        if layer + 1 == self.layers.len() {
            self.out_act
        } else {
            Activation::Relu
        }
    }

    /// Forward a batch, keeping intermediate activations in `cache`.
    /// Returns the final output (`batch * out_dim`).
    pub fn forward_cached<'c>(
        &self,
        x: &[f64],
        batch: usize,
        cache: &'c mut MlpCache,
    ) -> &'c [f64] {
        assert_eq!(x.len(), batch * self.in_dim());
        cache.batch = batch;
        cache.input.clear();
        cache.input.extend_from_slice(x);
        cache.outputs.resize(self.layers.len(), Vec::new());
        for (l, layer) in self.layers.iter().enumerate() {
            let (before, rest) = cache.outputs.split_at_mut(l);
            let input: &[f64] = if l == 0 { &cache.input } else { &before[l - 1] };
            layer.forward_into(input, batch, self.activation_of(l), &mut rest[0]);
        }
        cache.outputs.last().unwrap()
    }

    /// Convenience forward without a reusable cache.
    pub fn forward(&self, x: &[f64], batch: usize) -> Vec<f64> {
        let mut cache = MlpCache::default();
        self.forward_cached(x, batch, &mut cache);
        cache.outputs.pop().unwrap()
    }

    /// Backpropagate `grad_out` (gradient of a scalar loss w.r.t. the
    /// network output, `batch * out_dim`) through the cached forward pass.
    /// Parameter gradients accumulate into `grads`; if `grad_input` is given
    /// it receives the gradient w.r.t. the network input.
    pub fn backward(
        &self,
        cache: &mut MlpCache,
        grad_out: &[f64],
        grads: &mut MlpGrads,
        mut grad_input: Option<&mut Vec<f64>>,
    ) {
        let batch = cache.batch;
        assert_eq!(grad_out.len(), batch * self.out_dim());
        cache.delta.clear();
        cache.delta.extend_from_slice(grad_out);

        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let act = self.activation_of(l);
            let out = &cache.outputs[l];
            // Chain through the activation: delta becomes d loss / d preactivation.
            for (d, &y) in cache.delta.iter_mut().zip(out.iter()) {
                *d *= act.derivative_from_output(y);
            }

            let input: &[f64] = if l == 0 { &cache.input } else { &cache.outputs[l - 1] };
            let gw = &mut grads.gw[l];
            let gb = &mut grads.gb[l];
            for b in 0..batch {
                let drow = &cache.delta[b * layer.out_dim..(b + 1) * layer.out_dim];
                let xrow = &input[b * layer.in_dim..(b + 1) * layer.in_dim];
                for (o, &d) in drow.iter().enumerate() {
                    if d != 0.0 {
                        gb[o] += d;
                        let grow = &mut gw[o * layer.in_dim..(o + 1) * layer.in_dim];
                        for (g, &x) in grow.iter_mut().zip(xrow) {
                            *g += d * x;
                        }
                    }
                }
            }

            let need_input_grad = l > 0 || grad_input.is_some();
            if need_input_grad {
                cache.delta_prev.clear();
                cache.delta_prev.resize(batch * layer.in_dim, 0.0);
                for b in 0..batch {
                    let drow = &cache.delta[b * layer.out_dim..(b + 1) * layer.out_dim];
                    let target = &mut cache.delta_prev[b * layer.in_dim..(b + 1) * layer.in_dim];
                    for (o, &d) in drow.iter().enumerate() {
                        if d != 0.0 {
                            let wrow = &layer.w[o * layer.in_dim..(o + 1) * layer.in_dim];
                            for (t, &w) in target.iter_mut().zip(wrow) {
                                *t += d * w;
                            }
                        }
                    }
                }
                std::mem::swap(&mut cache.delta, &mut cache.delta_prev);
            }
        }

        if let Some(gi) = grad_input.as_deref_mut() {
            gi.clear();
            gi.extend_from_slice(&cache.delta);
        }
    }

    pub fn zero_grads(&self) -> MlpGrads {
        MlpGrads {
            gw: self.layers.iter().map(|l| vec![0.0; l.w.len()]).collect(),
            gb: self.layers.iter().map(|l| vec![0.0; l.b.len()]).collect(),
        }
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    pub fn params_iter(&self) -> impl Iterator<Item = &f64> {
        self.layers.iter().flat_map(|l| l.w.iter().chain(l.b.iter()))
    }

    pub fn params_iter_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers.iter_mut().flat_map(|l| l.w.iter_mut().chain(l.b.iter_mut()))
    }

    /// Indexed parameter access in flat order; used by finite-difference
    /// checks.
    pub fn param_get(&self, index: usize) -> f64 {
        *self.params_iter().nth(index).expect("param index in range")
    }

    pub fn param_set(&mut self, index: usize, value: f64) {
        *self.params_iter_mut().nth(index).expect("param index in range") = value;
    }
}

/// In-place soft update `target <- tau * source + (1 - tau) * target`.
pub fn soft_update_mlp(target: &mut Mlp, source: &Mlp, tau: f64) -> Result<(), String> {
    if target.dims() != source.dims() {
        return Err(format!(
            "shape mismatch: target {:?} vs source {:?}",
            target.dims(),
            source.dims()
        ));
    }
    for (t, &s) in target.params_iter_mut().zip(source.params_iter()) {
        *t = tau * s + (1.0 - tau) * *t;
    }
    Ok(())
}

/// Adam with the usual bias correction.
#[derive(Debug, Clone)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    t: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub fn new(lr: f64, n_params: usize) -> Self {
        Self { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, t: 0, m: vec![0.0; n_params], v: vec![0.0; n_params] }
    }

    pub fn step(&mut self, net: &mut Mlp, grads: &MlpGrads) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for ((p, &g), (m, v)) in net
            .params_iter_mut()
            .zip(grads.flat_iter())
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

/// Gaussian noise helper: one draw per element, in place.
pub fn add_gaussian_noise<R: Rng>(values: &mut [f64], std: f64, rng: &mut R) {
    if std <= 0.0 {
        return;
    }
    let normal = Normal::new(0.0, std).expect("finite std");
    for v in values {
        *v += normal.sample(rng);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn toy_net(out_act: Activation, seed: u64) -> Mlp {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        Mlp::new(&[3, 5, 4, 2], out_act, &mut rng)
    }

    #[test]
    fn forward_shapes() {
        let net = toy_net(Activation::Tanh, 0);
        let out = net.forward(&[0.1; 9], 3);
        assert_eq!(out.len(), 6);
        for v in out {
            assert!((-1.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn forward_is_deterministic() {
        let net = toy_net(Activation::Identity, 1);
        let x = [0.3, -0.2, 0.9];
        assert_eq!(net.forward(&x, 1), net.forward(&x, 1));
    }

    /// Central-difference check of the full backward pass: mean-squared loss
    /// on a small batch, every parameter perturbed.
    #[test]
    fn gradients_match_finite_differences() {
        for out_act in [Activation::Identity, Activation::Tanh] {
            let mut net = toy_net(out_act, 7);
            let mut rng = ChaCha20Rng::seed_from_u64(42);
            let batch = 4;
            let x: Vec<f64> = (0..batch * 3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let target: Vec<f64> = (0..batch * 2).map(|_| rng.random_range(-0.8..0.8)).collect();

            let loss = |net: &Mlp| -> f64 {
                let out = net.forward(&x, batch);
                out.iter().zip(&target).map(|(o, t)| (o - t) * (o - t)).sum::<f64>()
                    / (batch as f64)
            };

            let mut cache = MlpCache::default();
            let out = net.forward_cached(&x, batch, &mut cache).to_vec();
            let grad_out: Vec<f64> =
                out.iter().zip(&target).map(|(o, t)| 2.0 * (o - t) / batch as f64).collect();
            let mut grads = net.zero_grads();
            net.backward(&mut cache, &grad_out, &mut grads, None);

            let analytic: Vec<f64> = grads.flat_iter().copied().collect();
            let eps = 1e-6;
            for i in 0..net.param_count() {
                let orig = net.param_get(i);
                net.param_set(i, orig + eps);
                let plus = loss(&net);
                net.param_set(i, orig - eps);
                let minus = loss(&net);
                net.param_set(i, orig);
                let numeric = (plus - minus) / (2.0 * eps);
                let denom = numeric.abs().max(analytic[i].abs()).max(1e-8);
                let rel = (numeric - analytic[i]).abs() / denom;
                assert!(
                    rel < 1e-4,
                    "param {i}: numeric {numeric} vs analytic {} (rel {rel})",
                    analytic[i]
                );
            }
        }
    }

    #[test]
    fn input_gradient_matches_finite_differences() {
        let net = toy_net(Activation::Tanh, 3);
        let x = vec![0.25, -0.5, 0.75];
        let loss = |x: &[f64]| net.forward(x, 1).iter().sum::<f64>();

        let mut cache = MlpCache::default();
        net.forward_cached(&x, 1, &mut cache);
        let mut grads = net.zero_grads();
        let mut gi = Vec::new();
        net.backward(&mut cache, &[1.0, 1.0], &mut grads, Some(&mut gi));

        let eps = 1e-6;
        for i in 0..x.len() {
            let mut xp = x.clone();
            xp[i] += eps;
            let mut xm = x.clone();
            xm[i] -= eps;
            let numeric = (loss(&xp) - loss(&xm)) / (2.0 * eps);
            assert!((numeric - gi[i]).abs() / numeric.abs().max(1e-8) < 1e-4);
        }
    }

    #[test]
    fn soft_update_endpoints_and_convex_combination() {
        let source = toy_net(Activation::Identity, 11);
        let mut target = toy_net(Activation::Identity, 12);

        let mut t1 = target.clone();
        soft_update_mlp(&mut t1, &source, 1.0).unwrap();
        assert_eq!(t1, source);

        let mut t0 = target.clone();
        soft_update_mlp(&mut t0, &source, 0.0).unwrap();
        assert_eq!(t0, target);

        // Scalar case from the update rule: 0.005 * 1 + 0.995 * 0.
        let before = target.param_get(0);
        let src = source.param_get(0);
        soft_update_mlp(&mut target, &source, 0.005).unwrap();
        assert_eq!(target.param_get(0), 0.005 * src + 0.995 * before);
    }

    #[test]
    fn soft_update_converges_geometrically() {
        let source = toy_net(Activation::Identity, 21);
        let mut target = toy_net(Activation::Identity, 22);
        let tau = 0.005;
        let dist = |a: &Mlp, b: &Mlp| -> f64 {
            a.params_iter().zip(b.params_iter()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
        };
        let mut d = dist(&target, &source);
        for _ in 0..50 {
            soft_update_mlp(&mut target, &source, tau).unwrap();
            let d_next = dist(&target, &source);
            assert!((d_next - (1.0 - tau) * d).abs() < 1e-9 * d.max(1.0));
            d = d_next;
        }
    }

    #[test]
    fn soft_update_rejects_shape_mismatch() {
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        let mut a = Mlp::new(&[2, 4, 1], Activation::Identity, &mut rng);
        let b = Mlp::new(&[2, 5, 1], Activation::Identity, &mut rng);
        assert!(soft_update_mlp(&mut a, &b, 0.5).is_err());
    }

    /// Gradient descent against the analytic objective mean ||a||^2 must
    /// shrink the actor's output; this is the fixed-critic sanity case with
    /// the optimum at a = 0.
    #[test]
    fn actor_output_norm_decreases_under_quadratic_penalty() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let mut actor = Mlp::new(&[3, 8, 2], Activation::Tanh, &mut rng);
        let mut opt = Adam::new(1e-2, actor.param_count());
        let batch = 8;
        let x: Vec<f64> = (0..batch * 3).map(|_| rng.random_range(-1.0..1.0)).collect();

        let norm = |net: &Mlp| -> f64 {
            net.forward(&x, batch).iter().map(|a| a * a).sum::<f64>() / batch as f64
        };

        let initial = norm(&actor);
        let mut cache = MlpCache::default();
        let mut grads = actor.zero_grads();
        for _ in 0..200 {
            let out = actor.forward_cached(&x, batch, &mut cache).to_vec();
            let grad_out: Vec<f64> = out.iter().map(|a| 2.0 * a / batch as f64).collect();
            grads.zero();
            actor.backward(&mut cache, &grad_out, &mut grads, None);
            opt.step(&mut actor, &grads);
        }
        let final_norm = norm(&actor);
        assert!(
            final_norm < 0.1 * initial,
            "norm did not decrease: {initial} -> {final_norm}"
        );
    }

    #[test]
    fn adam_moves_toward_minimum() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let mut net = Mlp::new(&[1, 1], Activation::Identity, &mut rng);
        let mut opt = Adam::new(1e-2, net.param_count());
        // Fit y = 3x - 1 on a few points.
        let xs = [-1.0, 0.0, 1.0, 2.0];
        let mut cache = MlpCache::default();
        let mut grads = net.zero_grads();
        for _ in 0..3000 {
            grads.zero();
            let x: Vec<f64> = xs.to_vec();
            let out = net.forward_cached(&x, xs.len(), &mut cache).to_vec();
            let grad_out: Vec<f64> = out
                .iter()
                .zip(xs.iter().map(|x| 3.0 * x - 1.0))
                .map(|(o, t)| 2.0 * (o - t) / xs.len() as f64)
                .collect();
            net.backward(&mut cache, &grad_out, &mut grads, None);
            opt.step(&mut net, &grads);
        }
        assert!((net.layers[0].w[0] - 3.0).abs() < 1e-3);
        assert!((net.layers[0].b[0] + 1.0).abs() < 1e-3);
    }
}
