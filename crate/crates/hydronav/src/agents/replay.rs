use ndarray::{Array1, Array2};

use crate::math::Rng;

/// One stored interaction. `done` marks true terminal states (collision or
/// divergence) only; step-cap endings stay `false` so their value
/// bootstraps — the cap is a time limit, not a state property.
#[derive(Clone, Debug)]
pub struct Transition {
    pub s: Vec<f64>,
    pub a: Vec<f64>,
    pub r: f64,
    pub s_next: Vec<f64>,
    pub done: bool,
}

/// Uniformly sampled ring buffer; the oldest entry is overwritten at capacity.
pub struct ReplayBuffer {
    data: Vec<Transition>,
    capacity: usize,
    cursor: usize,
}

/// A sampled batch, already packed for network consumption (row = sample).
pub struct Minibatch {
    pub s: Array2<f64>,
    pub a: Array2<f64>,
    pub r: Array1<f64>,
    pub s_next: Array2<f64>,
    /// `1.0 − done`, the bootstrap mask.
    pub not_done: Array1<f64>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> ReplayBuffer {
        assert!(capacity > 0);
        ReplayBuffer { data: Vec::with_capacity(capacity.min(1 << 20)), capacity, cursor: 0 }
    }

    pub fn push(&mut self, t: Transition) {
        if self.data.len() < self.capacity {
            self.data.push(t);
        } else {
            self.data[self.cursor] = t;
            self.cursor = (self.cursor + 1) % self.capacity;
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.data.iter()
    }

    /// Uniform sample of `n` transitions with replacement; `None` until the
    /// buffer holds at least `n` (the trainer skips the update).
    pub fn sample(&self, n: usize, rng: &mut Rng) -> Option<Minibatch> {
        if self.data.len() < n {
            return None;
        }
        let obs_dim = self.data[0].s.len();
        let act_dim = self.data[0].a.len();
        let mut s = Array2::zeros((n, obs_dim));
        let mut a = Array2::zeros((n, act_dim));
        let mut r = Array1::zeros(n);
        let mut s_next = Array2::zeros((n, obs_dim));
        let mut not_done = Array1::zeros(n);
        for row in 0..n {
            let t = &self.data[rng.index(self.data.len())];
            s.row_mut(row).assign(&ndarray::ArrayView1::from(&t.s[..]));
            a.row_mut(row).assign(&ndarray::ArrayView1::from(&t.a[..]));
            r[row] = t.r;
            s_next.row_mut(row).assign(&ndarray::ArrayView1::from(&t.s_next[..]));
            not_done[row] = if t.done { 0.0 } else { 1.0 };
        }
        Some(Minibatch { s, a, r, s_next, not_done })
    }
}
