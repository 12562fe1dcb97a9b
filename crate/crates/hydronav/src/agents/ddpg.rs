use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};

use super::{concat_columns, Minibatch};
use crate::math::{OuProcess, Rng, Stream};
use crate::nn::{soft_update, Adam, Head, Mlp};

/// Hyperparameters of the deterministic agent.
#[derive(Clone, Debug)]
pub struct DdpgConfig {
    pub obs_dim: usize,
    pub action_dim: usize,
    pub hidden: Vec<usize>,
    pub gamma: f64,
    pub tau: f64,
    pub lr: f64,
    /// Per-channel OU exploration noise, stepped once per agent action.
    pub ou_theta: f64,
    pub ou_sigma: f64,
    pub ou_dt: f64,
}

impl Default for DdpgConfig {
    fn default() -> Self {
        DdpgConfig {
            obs_dim: crate::sensing::OBS_DIM,
            action_dim: 3,
            hidden: vec![512, 512, 512],
            gamma: 0.99,
            tau: 0.005,
            lr: 1e-3,
            ou_theta: 0.15,
            ou_sigma: 0.2,
            ou_dt: 1.0,
        }
    }
}

impl DdpgConfig {
    pub fn with_width(width: usize) -> DdpgConfig {
        DdpgConfig { hidden: vec![width; 3], ..DdpgConfig::default() }
    }

    fn actor_dims(&self) -> Vec<usize> {
        let mut d = vec![self.obs_dim];
        d.extend(&self.hidden);
        d.push(self.action_dim);
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
pub struct DdpgLosses {
    /// Mean squared TD error of the critic.
    pub critic: f64,
    /// Mean Q(s, μ(s)) the actor is ascending.
    pub actor_q: f64,
}

/// Deterministic actor-critic with target networks and OU action noise.
pub struct DdpgAgent {
    pub(crate) actor: Mlp,
    pub(crate) critic: Mlp,
    pub(crate) target_actor: Mlp,
    pub(crate) target_critic: Mlp,
    adam_actor: Adam,
    adam_critic: Adam,
    noise: Vec<OuProcess>,
    noise_rng: Rng,
    cfg: DdpgConfig,
}

impl DdpgAgent {
    pub fn new(cfg: DdpgConfig, seed: u64) -> DdpgAgent {
        let mut init_rng = Rng::substream(seed, Stream::NetInit);
        let actor = Mlp::init(&cfg.actor_dims(), Head::Tanh, &mut init_rng);
        let critic = Mlp::init(&cfg.critic_dims(), Head::Linear, &mut init_rng);
        Self::from_networks(cfg, actor, critic, seed)
    }

    /// Build from existing online networks; targets start as copies.
    pub fn from_networks(cfg: DdpgConfig, actor: Mlp, critic: Mlp, seed: u64) -> DdpgAgent {
        let noise = vec![
            OuProcess::new(cfg.ou_theta, cfg.ou_sigma, 0.0, cfg.ou_dt)
                .expect("validated OU parameters");
            cfg.action_dim
        ];
        let adam_actor = Adam::new(&actor, cfg.lr);
        let adam_critic = Adam::new(&critic, cfg.lr);
        DdpgAgent {
            target_actor: actor.clone(),
            target_critic: critic.clone(),
            actor,
            critic,
            adam_actor,
            adam_critic,
            noise,
            noise_rng: Rng::substream(seed, Stream::AgentNoise),
            cfg,
        }
    }

    /// Restore all four networks (checkpoint path).
    pub fn from_all_networks(
        cfg: DdpgConfig,
        actor: Mlp,
        critic: Mlp,
        target_actor: Mlp,
        target_critic: Mlp,
        seed: u64,
    ) -> DdpgAgent {
        let mut agent = Self::from_networks(cfg, actor, critic, seed);
        agent.target_actor = target_actor;
        agent.target_critic = target_critic;
        agent
    }

    pub fn config(&self) -> &DdpgConfig {
        &self.cfg
    }

    /// Online and target networks in checkpoint order.
    pub fn networks(&self) -> [&Mlp; 4] {
        [&self.actor, &self.critic, &self.target_actor, &self.target_critic]
    }

    /// Zero the exploration noise state (start of an episode).
    pub fn reset_noise(&mut self) {
        for ch in &mut self.noise {
            ch.reset(0.0);
        }
    }

    /// Policy action for one observation, clamped to [−1,1] per channel.
    /// With `explore`, per-channel OU noise is added first.
    pub fn act(&mut self, obs: &[f64], explore: bool) -> Vec<f64> {
        let x = ArrayView1::from(obs).insert_axis(Axis(0));
        let a = self.actor.forward(x);
        (0..self.cfg.action_dim)
            .map(|i| {
                let n = if explore { self.noise[i].step(&mut self.noise_rng) } else { 0.0 };
                (a[(0, i)] + n).clamp(-1.0, 1.0)
            })
            .collect()
    }

    /// Bootstrapped critic regression targets y = r + γ·(1−done)·Q'(s', μ'(s')).
    pub(crate) fn critic_targets(&self, batch: &Minibatch) -> Array1<f64> {
        let a_next = self.target_actor.forward(batch.s_next.view());
        let x_next = concat_columns(batch.s_next.view(), a_next.view());
        let q_next = self.target_critic.forward(x_next.view());
        &batch.r + &(self.cfg.gamma * &batch.not_done * &q_next.column(0))
    }

    /// One gradient update on critic then actor, followed by target tracking.
    pub fn update(&mut self, batch: &Minibatch) -> DdpgLosses {
        let n = batch.s.nrows();
        let y = self.critic_targets(batch);

        // critic: minimize mean squared error to y
        let x = concat_columns(batch.s.view(), batch.a.view());
        let (q, cache) = self.critic.forward_cached(x.view());
        let diff = &q.column(0) - &y;
        let critic_loss = diff.mapv(|d| d * d).mean().unwrap_or(0.0);
        let grad_q = diff.mapv(|d| 2.0 * d / n as f64).insert_axis(Axis(1));
        let (grads, _) = self.critic.backward(&cache, grad_q.view());
        self.adam_critic.step(&mut self.critic, &grads);

        // actor: ascend mean Q(s, μ(s)) through the critic's input gradient
        let (a, actor_cache) = self.actor.forward_cached(batch.s.view());
        let xa = concat_columns(batch.s.view(), a.view());
        let (qa, critic_cache) = self.critic.forward_cached(xa.view());
        let actor_q = qa.mean().unwrap_or(0.0);
        let grad_obj = Array2::from_elem((n, 1), -1.0 / n as f64);
        let da = self.action_gradient(&critic_cache, grad_obj.view());
        let (actor_grads, _) = self.actor.backward(&actor_cache, da.view());
        self.adam_actor.step(&mut self.actor, &actor_grads);

        soft_update(&mut self.target_critic, &self.critic, self.cfg.tau);
        soft_update(&mut self.target_actor, &self.actor, self.cfg.tau);

        DdpgLosses { critic: critic_loss, actor_q }
    }

    /// Gradient of the critic output w.r.t. the action columns of its input.
    fn action_gradient(
        &self,
        critic_cache: &crate::nn::ForwardCache,
        grad_q: ArrayView2<f64>,
    ) -> Array2<f64> {
        let dx = self.critic.backward_input_only(critic_cache, grad_q);
        dx.slice(s![.., self.cfg.obs_dim..]).to_owned()
    }

    /// Apply one actor ascent step given ∂L/∂a directly (test support for
    /// the update direction against an analytic critic).
    #[cfg(test)]
    fn actor_step_from_action_grad(&mut self, states: ArrayView2<f64>, da: ArrayView2<f64>) {
        let (_, cache) = self.actor.forward_cached(states);
        let (grads, _) = self.actor.backward(&cache, da);
        self.adam_actor.step(&mut self.actor, &grads);
    }
}
