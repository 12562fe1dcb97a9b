use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};

use super::{concat_columns, Minibatch};
use crate::math::{Rng, Stream};
use crate::nn::{soft_update, Adam, ForwardCache, Head, Mlp};

const LN_SQRT_2PI: f64 = 0.918938533204672741780329736406; // ln√(2π)
const SQUASH_EPS: f64 = 1e-6;

/// Hyperparameters of the stochastic agent.
#[derive(Clone, Debug)]
pub struct SacConfig {
    pub obs_dim: usize,
    pub action_dim: usize,
    pub hidden: Vec<usize>,
    pub gamma: f64,
    pub tau: f64,
    pub lr: f64,
    /// Initial temperature; the live value when auto-tuning is off.
    pub alpha_init: f64,
    /// Adjust the temperature toward `target_entropy` during updates.
    pub auto_alpha: bool,
    pub target_entropy: f64,
    pub logstd_min: f64,
    pub logstd_max: f64,
}

impl Default for SacConfig {
    fn default() -> Self {
        SacConfig {
            obs_dim: crate::sensing::OBS_DIM,
            action_dim: 3,
            hidden: vec![512, 512, 512],
            gamma: 0.99,
            tau: 0.005,
            lr: 1e-3,
            alpha_init: 0.2,
            auto_alpha: true,
            target_entropy: -3.0,
            logstd_min: -20.0,
            logstd_max: 2.0,
        }
    }
}

impl SacConfig {
    pub fn with_width(width: usize) -> SacConfig {
        SacConfig { hidden: vec![width; 3], ..SacConfig::default() }
    }

    fn actor_dims(&self) -> Vec<usize> {
        let mut d = vec![self.obs_dim];
        d.extend(&self.hidden);
        d.push(2 * self.action_dim);
        d
    }

    fn critic_dims(&self) -> Vec<usize> {
        let mut d = vec![self.obs_dim + self.action_dim];
        d.extend(&self.hidden);
        d.push(1);
        d
    }
}

/// Diagnostics from one gradient update.
#[derive(Clone, Copy, Debug)]
pub struct SacLosses {
    pub critic1: f64,
    pub critic2: f64,
    /// Mean of α·log π − min(Q₁,Q₂) the actor is descending.
    pub actor: f64,
    pub alpha: f64,
    /// Monte-Carlo estimate of the policy entropy, −mean log π.
    pub entropy: f64,
}

/// A batch of reparameterized policy samples with everything the analytic
/// backward pass needs.
struct PolicySample {
    action: Array2<f64>,
    log_prob: Array1<f64>,
    std: Array2<f64>,
    eps: Array2<f64>,
    /// 1.0 where the raw log-std fell inside the clamp range (gradient
    /// passes), 0.0 where it was clamped.
    logstd_pass: Array2<f64>,
    cache: ForwardCache,
}

/// Stochastic actor-critic: squashed Gaussian policy, twin critics with
/// target copies, and optional temperature auto-tuning.
pub struct SacAgent {
    pub(crate) actor: Mlp,
    pub(crate) critic1: Mlp,
    pub(crate) critic2: Mlp,
    pub(crate) target1: Mlp,
    pub(crate) target2: Mlp,
    adam_actor: Adam,
    adam_c1: Adam,
    adam_c2: Adam,
    log_alpha: f64,
    alpha_m: f64,
    alpha_v: f64,
    alpha_steps: u64,
    sample_rng: Rng,
    cfg: SacConfig,
}

impl SacAgent {
    pub fn new(cfg: SacConfig, seed: u64) -> SacAgent {
        let mut init_rng = Rng::substream(seed, Stream::NetInit);
        let actor = Mlp::init(&cfg.actor_dims(), Head::Linear, &mut init_rng);
        let critic1 = Mlp::init(&cfg.critic_dims(), Head::Linear, &mut init_rng);
        let critic2 = Mlp::init(&cfg.critic_dims(), Head::Linear, &mut init_rng);
        Self::from_networks(cfg, actor, critic1, critic2, seed)
    }

    pub fn from_networks(
        cfg: SacConfig,
        actor: Mlp,
        critic1: Mlp,
        critic2: Mlp,
        seed: u64,
    ) -> SacAgent {
        let adam_actor = Adam::new(&actor, cfg.lr);
        let adam_c1 = Adam::new(&critic1, cfg.lr);
        let adam_c2 = Adam::new(&critic2, cfg.lr);
        SacAgent {
            target1: critic1.clone(),
            target2: critic2.clone(),
            actor,
            critic1,
            critic2,
            adam_actor,
            adam_c1,
            adam_c2,
            log_alpha: cfg.alpha_init.ln(),
            alpha_m: 0.0,
            alpha_v: 0.0,
            alpha_steps: 0,
            sample_rng: Rng::substream(seed, Stream::AgentNoise),
            cfg,
        }
    }

    /// Restore all five networks plus the temperature (checkpoint path).
    #[allow(clippy::too_many_arguments)]
    pub fn from_all_networks(
        cfg: SacConfig,
        actor: Mlp,
        critic1: Mlp,
        critic2: Mlp,
        target1: Mlp,
        target2: Mlp,
        log_alpha: f64,
        seed: u64,
    ) -> SacAgent {
        let mut agent = Self::from_networks(cfg, actor, critic1, critic2, seed);
        agent.target1 = target1;
        agent.target2 = target2;
        agent.log_alpha = log_alpha;
        agent
    }

    pub fn config(&self) -> &SacConfig {
        &self.cfg
    }

    pub fn alpha(&self) -> f64 {
        self.log_alpha.exp()
    }

    pub fn log_alpha(&self) -> f64 {
        self.log_alpha
    }

    /// Networks in checkpoint order.
    pub fn networks(&self) -> [&Mlp; 5] {
        [&self.actor, &self.critic1, &self.critic2, &self.target1, &self.target2]
    }

    /// Draw actions for a batch of states. `eps` is standard normal for the
    /// stochastic path and zero for the deterministic one (a = tanh(mean)).
    fn sample_batch(&self, states: ArrayView2<f64>, rng: Option<&mut Rng>) -> PolicySample {
        let k = self.cfg.action_dim;
        let n = states.nrows();
        let (out, cache) = self.actor.forward_cached(states);

        let mut eps = Array2::zeros((n, k));
        if let Some(rng) = rng {
            eps.mapv_inplace(|_| 0.0);
            for v in eps.iter_mut() {
                *v = rng.normal();
            }
        }

        let mut action = Array2::zeros((n, k));
        let mut std = Array2::zeros((n, k));
        let mut logstd_pass = Array2::zeros((n, k));
        let mut log_prob = Array1::zeros(n);
        for i in 0..n {
            let mut lp = 0.0;
            for j in 0..k {
                let mean = out[(i, j)];
                let raw = out[(i, k + j)];
                let clamped = raw.clamp(self.cfg.logstd_min, self.cfg.logstd_max);
                let pass = (raw > self.cfg.logstd_min && raw < self.cfg.logstd_max) as u8;
                let sd = clamped.exp();
                let e = eps[(i, j)];
                let u = mean + sd * e;
                let a = u.tanh();
                action[(i, j)] = a;
                std[(i, j)] = sd;
                logstd_pass[(i, j)] = pass as f64;
                lp += -0.5 * e * e - clamped - LN_SQRT_2PI - (1.0 - a * a + SQUASH_EPS).ln();
            }
            log_prob[i] = lp;
        }
        PolicySample { action, log_prob, std, eps, logstd_pass, cache }
    }

    /// Policy action for one observation plus its log-probability. The
    /// deterministic mode returns tanh(mean) with the density at the mode.
    pub fn act(&mut self, obs: &[f64], stochastic: bool) -> (Vec<f64>, f64) {
        let x = ArrayView1::from(obs).insert_axis(Axis(0));
        let mut rng = self.sample_rng.clone();
        let sample = self.sample_batch(x, stochastic.then_some(&mut rng));
        self.sample_rng = rng;
        let a = sample
            .action
            .row(0)
            .iter()
            .map(|v| v.clamp(-1.0, 1.0))
            .collect();
        (a, sample.log_prob[0])
    }

    /// y = r + γ·(1−done)·( min(Q'₁,Q'₂)(s', a') − α·log π(a'|s') ) with a'
    /// freshly sampled from the current policy.
    pub(crate) fn critic_targets(&self, batch: &Minibatch, rng: &mut Rng) -> Array1<f64> {
        let alpha = self.alpha();
        let next = self.sample_batch(batch.s_next.view(), Some(rng));
        let x = concat_columns(batch.s_next.view(), next.action.view());
        let q1 = self.target1.forward(x.view());
        let q2 = self.target2.forward(x.view());
        let mut y = batch.r.clone();
        for i in 0..y.len() {
            let qmin = q1[(i, 0)].min(q2[(i, 0)]);
            y[i] += self.cfg.gamma * batch.not_done[i] * (qmin - alpha * next.log_prob[i]);
        }
        y
    }

    fn critic_step(
        critic: &mut Mlp,
        adam: &mut Adam,
        x: &Array2<f64>,
        y: &Array1<f64>,
    ) -> f64 {
        let n = x.nrows() as f64;
        let (q, cache) = critic.forward_cached(x.view());
        let diff = &q.column(0) - y;
        let loss = diff.mapv(|d| d * d).mean().unwrap_or(0.0);
        let grad = diff.mapv(|d| 2.0 * d / n).insert_axis(Axis(1));
        let (grads, _) = critic.backward(&cache, grad.view());
        adam.step(critic, &grads);
        loss
    }

    /// One gradient update: both critics toward the entropy-regularized
    /// target, the actor by reparameterized samples through min(Q₁,Q₂),
    /// optional temperature adjustment, then target tracking.
    pub fn update(&mut self, batch: &Minibatch) -> SacLosses {
        let n = batch.s.nrows();
        let k = self.cfg.action_dim;
        let alpha = self.alpha();

        let mut rng = self.sample_rng.clone();
        let y = self.critic_targets(batch, &mut rng);

        let x = concat_columns(batch.s.view(), batch.a.view());
        let critic1_loss = Self::critic_step(&mut self.critic1, &mut self.adam_c1, &x, &y);
        let critic2_loss = Self::critic_step(&mut self.critic2, &mut self.adam_c2, &x, &y);

        // actor: descend mean(α·logπ − min(Q₁,Q₂)) via fresh samples
        let sample = self.sample_batch(batch.s.view(), Some(&mut rng));
        self.sample_rng = rng;
        let xa = concat_columns(batch.s.view(), sample.action.view());
        let (q1a, c1_cache) = self.critic1.forward_cached(xa.view());
        let (q2a, c2_cache) = self.critic2.forward_cached(xa.view());

        let mut actor_loss = 0.0;
        let mut g1 = Array2::zeros((n, 1));
        let mut g2 = Array2::zeros((n, 1));
        for i in 0..n {
            let (q1, q2) = (q1a[(i, 0)], q2a[(i, 0)]);
            actor_loss += alpha * sample.log_prob[i] - q1.min(q2);
            if q1 <= q2 {
                g1[(i, 0)] = -1.0 / n as f64;
            } else {
                g2[(i, 0)] = -1.0 / n as f64;
            }
        }
        actor_loss /= n as f64;

        let dx1 = self.critic1.backward_input_only(&c1_cache, g1.view());
        let dx2 = self.critic2.backward_input_only(&c2_cache, g2.view());
        let gq = &dx1.slice(s![.., self.cfg.obs_dim..]) + &dx2.slice(s![.., self.cfg.obs_dim..]);

        // chain rule through a = tanh(mean + std·ε) and the log-density
        let mut d_out = Array2::zeros((n, 2 * k));
        let w = alpha / n as f64;
        for i in 0..n {
            for j in 0..k {
                let a = sample.action[(i, j)];
                let one_m_a2 = 1.0 - a * a;
                let t = 2.0 * a * one_m_a2 / (one_m_a2 + SQUASH_EPS);
                let se = sample.std[(i, j)] * sample.eps[(i, j)];
                let d_mean = w * t + gq[(i, j)] * one_m_a2;
                let d_logstd =
                    (w * (-1.0 + t * se) + gq[(i, j)] * one_m_a2 * se) * sample.logstd_pass[(i, j)];
                d_out[(i, j)] = d_mean;
                d_out[(i, k + j)] = d_logstd;
            }
        }
        let (actor_grads, _) = self.actor.backward(&sample.cache, d_out.view());
        self.adam_actor.step(&mut self.actor, &actor_grads);

        let entropy = -sample.log_prob.mean().unwrap_or(0.0);

        // temperature: ascend α when entropy is below target, with the
        // usual Adam-smoothed step on log α
        if self.cfg.auto_alpha {
            let g = -(sample.log_prob.mean().unwrap_or(0.0) + self.cfg.target_entropy);
            self.alpha_steps += 1;
            let (b1, b2) = (0.9, 0.999);
            self.alpha_m = b1 * self.alpha_m + (1.0 - b1) * g;
            self.alpha_v = b2 * self.alpha_v + (1.0 - b2) * g * g;
            let m_hat = self.alpha_m / (1.0 - b1.powi(self.alpha_steps as i32));
            let v_hat = self.alpha_v / (1.0 - b2.powi(self.alpha_steps as i32));
            self.log_alpha -= self.cfg.lr * m_hat / (v_hat.sqrt() + 1e-8);
        }

        soft_update(&mut self.target1, &self.critic1, self.cfg.tau);
        soft_update(&mut self.target2, &self.critic2, self.cfg.tau);

        SacLosses {
            critic1: critic1_loss,
            critic2: critic2_loss,
            actor: actor_loss,
            alpha: self.alpha(),
            entropy,
        }
    }

    /// Pre-squash policy moments (mean, std per action dimension) for one
    /// observation; diagnostic surface for density checks and analysis.
    pub fn policy_moments(&self, obs: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let x = ArrayView1::from(obs).insert_axis(Axis(0));
        let sample = self.sample_batch(x, None);
        let out = sample.cache.output();
        let k = self.cfg.action_dim;
        let mean = (0..k).map(|j| out[(0, j)]).collect();
        let std = (0..k).map(|j| sample.std[(0, j)]).collect();
        (mean, std)
    }

    /// Squashed log-density of one action dimension, for quadrature checks:
    /// given `u`, returns log π evaluated at a = tanh(u) for N(mean, std).
    pub fn squashed_log_density(mean: f64, std: f64, u: f64) -> f64 {
        let e = (u - mean) / std;
        let a = u.tanh();
        -0.5 * e * e - std.ln() - LN_SQRT_2PI - (1.0 - a * a + SQUASH_EPS).ln()
    }
}
