//! Minimal feedforward network engine: fully connected layers with ReLU
//! hidden activations, tanh or linear output heads, exact reverse-mode
//! gradients (including gradients with respect to the input, needed to push
//! critic gradients into the actor), and the Adam optimizer.
//!
//! Everything is `f64`. Rows are batch samples throughout.

use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};

use crate::math::Rng;

/// Output activation of the last layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Head {
    Linear,
    Tanh,
}

/// One fully connected layer; weights are `out×in`, row-major.
#[derive(Clone, Debug)]
pub struct Dense {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

/// Feedforward network `dims[0] → … → dims.last()`, ReLU between layers.
#[derive(Clone, Debug)]
pub struct Mlp {
    layers: Vec<Dense>,
    head: Head,
}

/// Cached activations from [`Mlp::forward_cached`]: the input, every hidden
/// post-ReLU activation, and the head output.
pub struct ForwardCache {
    input: Array2<f64>,
    hidden: Vec<Array2<f64>>,
    output: Array2<f64>,
}

impl ForwardCache {
    pub fn output(&self) -> &Array2<f64> {
        &self.output
    }
}

/// Per-layer parameter gradients, shaped like the network.
pub struct Gradients {
    pub w: Vec<Array2<f64>>,
    pub b: Vec<Array1<f64>>,
}

impl Mlp {
    /// Hidden layers initialize uniform ±1/√fan_in; the output layer
    /// uniform ±3e-3 so initial actions and values start near zero.
    pub fn init(dims: &[usize], head: Head, rng: &mut Rng) -> Mlp {
        assert!(dims.len() >= 2, "need at least input and output dims");
        assert!(dims.iter().all(|&d| d > 0), "zero-width layer");
        let last = dims.len() - 2;
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(i, io)| {
                let (fan_in, fan_out) = (io[0], io[1]);
                let bound = if i == last { 3e-3 } else { 1.0 / (fan_in as f64).sqrt() };
                Dense {
                    w: Array2::from_shape_fn((fan_out, fan_in), |_| rng.uniform_in(-bound, bound)),
                    b: Array1::from_shape_fn(fan_out, |_| rng.uniform_in(-bound, bound)),
                }
            })
            .collect();
        Mlp { layers, head }
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut dims = vec![self.layers[0].w.ncols()];
        dims.extend(self.layers.iter().map(|l| l.w.nrows()));
        dims
    }

    pub fn head(&self) -> Head {
        self.head
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].w.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("at least one layer").w.nrows()
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn from_layers(layers: Vec<Dense>, head: Head) -> Mlp {
        assert!(!layers.is_empty());
        Mlp { layers, head }
    }

    fn affine(&self, l: usize, x: &ArrayView2<f64>) -> Array2<f64> {
        let mut z = x.dot(&self.layers[l].w.t());
        z += &self.layers[l].b;
        z
    }

    /// Forward pass. Panics if the input width does not match the first
    /// layer (a programming error, like any shape mismatch in `ndarray`).
    pub fn forward(&self, x: ArrayView2<f64>) -> Array2<f64> {
        assert_eq!(x.ncols(), self.input_dim(), "input width mismatch");
        let depth = self.layers.len();
        let mut h = self.affine(0, &x);
        for l in 1..depth {
            h.mapv_inplace(|v| v.max(0.0));
            h = self.affine(l, &h.view());
        }
        if self.head == Head::Tanh {
            h.mapv_inplace(f64::tanh);
        }
        h
    }

    /// Forward pass retaining the activations needed by [`Mlp::backward`].
    pub fn forward_cached(&self, x: ArrayView2<f64>) -> (Array2<f64>, ForwardCache) {
        assert_eq!(x.ncols(), self.input_dim(), "input width mismatch");
        let depth = self.layers.len();
        let mut hidden = Vec::with_capacity(depth - 1);
        let mut h = self.affine(0, &x);
        for l in 1..depth {
            h.mapv_inplace(|v| v.max(0.0));
            hidden.push(h.clone());
            h = self.affine(l, &h.view());
        }
        if self.head == Head::Tanh {
            h.mapv_inplace(f64::tanh);
        }
        let cache = ForwardCache { input: x.to_owned(), hidden, output: h.clone() };
        (h, cache)
    }

    /// Exact reverse-mode gradients of a scalar loss whose gradient with
    /// respect to the network output is `grad_out`. Returns the parameter
    /// gradients and the gradient with respect to the input. ReLU uses
    /// subgradient 0 at exactly 0.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        grad_out: ArrayView2<f64>,
    ) -> (Gradients, Array2<f64>) {
        let depth = self.layers.len();
        let mut dw = vec![Array2::zeros((0, 0)); depth];
        let mut db = vec![Array1::zeros(0); depth];

        // head
        let mut delta = match self.head {
            Head::Linear => grad_out.to_owned(),
            Head::Tanh => {
                let mut d = grad_out.to_owned();
                Zip::from(&mut d).and(&cache.output).for_each(|g, &y| *g *= 1.0 - y * y);
                d
            }
        };

        for l in (0..depth).rev() {
            let a_prev = if l == 0 { &cache.input } else { &cache.hidden[l - 1] };
            dw[l] = delta.t().dot(a_prev);
            db[l] = delta.sum_axis(Axis(0));
            let mut d_prev = delta.dot(&self.layers[l].w);
            if l > 0 {
                Zip::from(&mut d_prev).and(&cache.hidden[l - 1]).for_each(|d, &h| {
                    if h <= 0.0 {
                        *d = 0.0;
                    }
                });
            }
            delta = d_prev;
        }

        (Gradients { w: dw, b: db }, delta)
    }

    /// Gradient with respect to the input only, skipping the parameter
    /// gradients (used when a frozen network routes gradients through).
    pub fn backward_input_only(
        &self,
        cache: &ForwardCache,
        grad_out: ArrayView2<f64>,
    ) -> Array2<f64> {
        let depth = self.layers.len();
        let mut delta = match self.head {
            Head::Linear => grad_out.to_owned(),
            Head::Tanh => {
                let mut d = grad_out.to_owned();
                Zip::from(&mut d).and(&cache.output).for_each(|g, &y| *g *= 1.0 - y * y);
                d
            }
        };
        for l in (0..depth).rev() {
            let mut d_prev = delta.dot(&self.layers[l].w);
            if l > 0 {
                Zip::from(&mut d_prev).and(&cache.hidden[l - 1]).for_each(|d, &h| {
                    if h <= 0.0 {
                        *d = 0.0;
                    }
                });
            }
            delta = d_prev;
        }
        delta
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }
}

/// `target ← τ·online + (1−τ)·target`, elementwise over all parameters.
pub fn soft_update(target: &mut Mlp, online: &Mlp, tau: f64) {
    for (t, o) in target.layers.iter_mut().zip(&online.layers) {
        Zip::from(&mut t.w).and(&o.w).for_each(|t, &o| *t = tau * o + (1.0 - tau) * *t);
        Zip::from(&mut t.b).and(&o.b).for_each(|t, &o| *t = tau * o + (1.0 - tau) * *t);
    }
}

/// Adam with bias correction and optional decoupled weight decay, one
/// state per network.
#[derive(Clone, Debug)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Decoupled weight decay: parameters shrink by `lr·weight_decay` per
    /// step before the gradient update. Zero disables it.
    pub weight_decay: f64,
    step: u64,
    m_w: Vec<Array2<f64>>,
    v_w: Vec<Array2<f64>>,
    m_b: Vec<Array1<f64>>,
    v_b: Vec<Array1<f64>>,
}

impl Adam {
    pub fn new(net: &Mlp, lr: f64) -> Adam {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.0,
            step: 0,
            m_w: net.layers.iter().map(|l| Array2::zeros(l.w.raw_dim())).collect(),
            v_w: net.layers.iter().map(|l| Array2::zeros(l.w.raw_dim())).collect(),
            m_b: net.layers.iter().map(|l| Array1::zeros(l.b.raw_dim())).collect(),
            v_b: net.layers.iter().map(|l| Array1::zeros(l.b.raw_dim())).collect(),
        }
    }

    pub fn with_weight_decay(mut self, weight_decay: f64) -> Adam {
        self.weight_decay = weight_decay;
        self
    }

    /// Apply one update from `grads` to `net`.
    pub fn step(&mut self, net: &mut Mlp, grads: &Gradients) {
        self.step += 1;
        let c1 = 1.0 - self.beta1.powi(self.step as i32);
        let c2 = 1.0 - self.beta2.powi(self.step as i32);
        let (b1, b2, lr, eps) = (self.beta1, self.beta2, self.lr, self.eps);
        let shrink = 1.0 - lr * self.weight_decay;
        for (l, layer) in net.layers.iter_mut().enumerate() {
            Zip::from(&mut layer.w)
                .and(&mut self.m_w[l])
                .and(&mut self.v_w[l])
                .and(&grads.w[l])
                .for_each(|p, m, v, &g| {
                    *m = b1 * *m + (1.0 - b1) * g;
                    *v = b2 * *v + (1.0 - b2) * g * g;
                    *p = *p * shrink - lr * (*m / c1) / ((*v / c2).sqrt() + eps);
                });
            Zip::from(&mut layer.b)
                .and(&mut self.m_b[l])
                .and(&mut self.v_b[l])
                .and(&grads.b[l])
                .for_each(|p, m, v, &g| {
                    *m = b1 * *m + (1.0 - b1) * g;
                    *v = b2 * *v + (1.0 - b2) * g * g;
                    *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
                });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn rng() -> Rng {
        Rng::seeded(2024)
    }

    fn zeroed(dims: &[usize], head: Head) -> Mlp {
        let mut net = Mlp::init(dims, head, &mut rng());
        for l in net.layers_mut() {
            l.w.fill(0.0);
            l.b.fill(0.0);
        }
        net
    }

    #[test]
    fn zero_network_with_tanh_head_outputs_zeros() {
        let net = zeroed(&[26, 16, 3], Head::Tanh);
        let x = Array2::from_elem((4, 26), 0.7);
        let y = net.forward(x.view());
        assert!(y.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn identity_single_layer() {
        let mut net = zeroed(&[1, 1], Head::Linear);
        net.layers_mut()[0].w[(0, 0)] = 1.0;
        let y = net.forward(array![[2.0]].view());
        assert_eq!(y[(0, 0)], 2.0);
    }

    #[test]
    fn tanh_head_stays_in_open_interval() {
        let net = Mlp::init(&[5, 32, 32, 3], Head::Tanh, &mut rng());
        let mut r = rng();
        let x = Array2::from_shape_fn((16, 5), |_| r.uniform_in(-3.0, 3.0));
        let y = net.forward(x.view());
        assert!(y.iter().all(|&v| v > -1.0 && v < 1.0));
    }

    #[test]
    fn linear_net_weight_gradient_is_the_input() {
        // loss = output ⇒ dL/dw = x
        let mut net = zeroed(&[1, 1], Head::Linear);
        net.layers_mut()[0].w[(0, 0)] = 0.3;
        let (_, cache) = net.forward_cached(array![[5.0]].view());
        let (grads, dx) = net.backward(&cache, array![[1.0]].view());
        assert_eq!(grads.w[0][(0, 0)], 5.0);
        assert_eq!(grads.b[0][0], 1.0);
        assert_eq!(dx[(0, 0)], 0.3);
    }

    #[test]
    fn relu_at_exact_zero_uses_subgradient_zero() {
        // hidden pre-activation is exactly 0 for input 0
        let mut net = zeroed(&[1, 1, 1], Head::Linear);
        net.layers_mut()[0].w[(0, 0)] = 1.0;
        net.layers_mut()[1].w[(0, 0)] = 1.0;
        let (_, cache) = net.forward_cached(array![[0.0]].view());
        let (grads, dx) = net.backward(&cache, array![[1.0]].view());
        assert_eq!(dx[(0, 0)], 0.0);
        assert_eq!(grads.w[0][(0, 0)], 0.0);
    }

    fn fd_check(dims: &[usize], head: Head, seed: u64) {
        let mut r = Rng::seeded(seed);
        let net = Mlp::init(dims, head, &mut r);
        let batch = 3;
        let x = Array2::from_shape_fn((batch, dims[0]), |_| r.uniform_in(-1.5, 1.5));
        let c =
            Array2::from_shape_fn((batch, *dims.last().unwrap()), |_| r.uniform_in(-1.0, 1.0));
        let loss = |n: &Mlp, x: &Array2<f64>| (n.forward(x.view()) * &c).sum();

        let (_, cache) = net.forward_cached(x.view());
        let (grads, dx) = net.backward(&cache, c.view());

        let h = 1e-5;
        let rel = |a: f64, f: f64| (a - f).abs() / a.abs().max(f.abs()).max(1e-6);

        for l in 0..net.layers().len() {
            for idx in 0..net.layers()[l].w.len() {
                let mut plus = net.clone();
                let mut minus = net.clone();
                plus.layers_mut()[l].w.as_slice_mut().unwrap()[idx] += h;
                minus.layers_mut()[l].w.as_slice_mut().unwrap()[idx] -= h;
                let fd = (loss(&plus, &x) - loss(&minus, &x)) / (2.0 * h);
                let a = grads.w[l].as_slice().unwrap()[idx];
                assert!(rel(a, fd) < 1e-5, "dW[{l}][{idx}]: analytic {a} vs fd {fd}");
            }
            for idx in 0..net.layers()[l].b.len() {
                let mut plus = net.clone();
                let mut minus = net.clone();
                plus.layers_mut()[l].b[idx] += h;
                minus.layers_mut()[l].b[idx] -= h;
                let fd = (loss(&plus, &x) - loss(&minus, &x)) / (2.0 * h);
                let a = grads.b[l][idx];
                assert!(rel(a, fd) < 1e-5, "db[{l}][{idx}]: analytic {a} vs fd {fd}");
            }
        }
        // input gradient
        for row in 0..batch {
            for col in 0..dims[0] {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[(row, col)] += h;
                xm[(row, col)] -= h;
                let fd = (loss(&net, &xp) - loss(&net, &xm)) / (2.0 * h);
                let a = dx[(row, col)];
                assert!(rel(a, fd) < 1e-5, "dx[{row},{col}]: analytic {a} vs fd {fd}");
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        fd_check(&[3, 6, 5, 2], Head::Linear, 1);
        fd_check(&[4, 8, 2], Head::Tanh, 2);
        fd_check(&[2, 4, 4, 4, 1], Head::Linear, 3);
        fd_check(&[5, 7, 3], Head::Tanh, 4);
    }

    #[test]
    fn batched_forward_equals_row_wise_bitwise() {
        let mut r = rng();
        let net = Mlp::init(&[8, 64, 64, 4], Head::Tanh, &mut r);
        let x = Array2::from_shape_fn((64, 8), |_| r.uniform_in(-2.0, 2.0));
        let batched = net.forward(x.view());
        for i in 0..x.nrows() {
            let row = x.row(i).insert_axis(Axis(0));
            let single = net.forward(row.view());
            assert_eq!(batched.row(i), single.row(0), "row {i}");
        }
    }

    #[test]
    fn forward_is_pure() {
        let mut r = rng();
        let net = Mlp::init(&[6, 32, 2], Head::Linear, &mut r);
        let x = Array2::from_shape_fn((5, 6), |_| r.uniform_in(-1.0, 1.0));
        let a = net.forward(x.view());
        let b = net.forward(x.view());
        assert_eq!(a, b);
    }

    #[test]
    #[should_panic(expected = "input width mismatch")]
    fn forward_rejects_wrong_width() {
        let net = Mlp::init(&[4, 8, 2], Head::Linear, &mut rng());
        net.forward(Array2::<f64>::zeros((1, 5)).view());
    }

    #[test]
    fn init_ranges_and_reproducibility() {
        let dims = [26, 512, 512, 3];
        let a = Mlp::init(&dims, Head::Tanh, &mut Rng::seeded(7));
        let b = Mlp::init(&dims, Head::Tanh, &mut Rng::seeded(7));
        for (la, lb) in a.layers().iter().zip(b.layers()) {
            assert_eq!(la.w, lb.w);
            assert_eq!(la.b, lb.b);
        }
        // output layer within ±3e-3
        let out = &a.layers().last().unwrap().w;
        assert!(out.iter().all(|v| v.abs() <= 3e-3));
        // hidden weight sample variance ≈ (1/3)·fan_in⁻¹
        let hidden = &a.layers()[1].w; // 512×512
        let n = hidden.len() as f64;
        let mean = hidden.sum() / n;
        let var = hidden.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let expected = 1.0 / (3.0 * 512.0);
        assert!((var - expected).abs() < 0.1 * expected, "var {var} vs {expected}");
    }

    #[test]
    fn adam_first_step_moves_by_learning_rate() {
        let mut net = zeroed(&[1, 1], Head::Linear);
        net.layers_mut()[0].w[(0, 0)] = 0.5;
        let mut opt = Adam::new(&net, 1e-3);
        let (_, cache) = net.forward_cached(array![[1.0]].view());
        let (grads, _) = net.backward(&cache, array![[0.7]].view()); // g = 0.7
        opt.step(&mut net, &grads);
        let delta = net.layers()[0].w[(0, 0)] - 0.5;
        assert!((delta + 1e-3).abs() < 1e-8, "delta {delta}");
    }

    #[test]
    fn adam_zero_gradient_keeps_parameters() {
        let mut net = Mlp::init(&[2, 4, 1], Head::Linear, &mut rng());
        let reference = net.clone();
        let mut opt = Adam::new(&net, 1e-2);
        let zeros = Gradients {
            w: net.layers().iter().map(|l| Array2::zeros(l.w.raw_dim())).collect(),
            b: net.layers().iter().map(|l| Array1::zeros(l.b.raw_dim())).collect(),
        };
        opt.step(&mut net, &zeros);
        opt.step(&mut net, &zeros);
        for (a, b) in net.layers().iter().zip(reference.layers()) {
            assert_eq!(a.w, b.w);
            assert_eq!(a.b, b.b);
        }
    }

    #[test]
    fn adam_converges_on_a_quadratic() {
        // minimize (out − 3)² for a 1→1 linear map from a fixed input
        let mut net = zeroed(&[1, 1], Head::Linear);
        let mut opt = Adam::new(&net, 0.1);
        let x = array![[1.0]];
        for _ in 0..200 {
            let (out, cache) = net.forward_cached(x.view());
            let g = array![[2.0 * (out[(0, 0)] - 3.0)]];
            let (grads, _) = net.backward(&cache, g.view());
            opt.step(&mut net, &grads);
        }
        let out = net.forward(x.view())[(0, 0)];
        assert!((out - 3.0).abs() < 0.1, "converged to {out}");
    }

    #[test]
    fn soft_update_endpoints_and_contraction() {
        let mut r = rng();
        let online = Mlp::init(&[3, 8, 2], Head::Linear, &mut r);
        let start = Mlp::init(&[3, 8, 2], Head::Linear, &mut r);

        let mut target = start.clone();
        soft_update(&mut target, &online, 1.0);
        for (t, o) in target.layers().iter().zip(online.layers()) {
            assert_eq!(t.w, o.w);
        }

        let mut target = start.clone();
        soft_update(&mut target, &online, 0.0);
        for (t, s) in target.layers().iter().zip(start.layers()) {
            assert_eq!(t.w, s.w);
        }

        // distance shrinks by (1−τ) per call against a frozen online net
        let tau = 0.25;
        let mut target = start.clone();
        let dist = |t: &Mlp| -> f64 {
            t.layers()
                .iter()
                .zip(online.layers())
                .map(|(a, b)| (&a.w - &b.w).iter().map(|d| d * d).sum::<f64>())
                .sum::<f64>()
                .sqrt()
        };
        let d0 = dist(&target);
        soft_update(&mut target, &online, tau);
        let d1 = dist(&target);
        assert!((d1 / d0 - (1.0 - tau)).abs() < 1e-12);
    }
}
