use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use super::moving_average;
use crate::agents::{DdpgAgent, DdpgConfig, Minibatch, ReplayBuffer, SacAgent, SacConfig, Transition};
use crate::checkpoint;
use crate::config::AppConfig;
use crate::env::{Environment, ScenarioId, StepEvent};
use crate::error::Result;
use crate::math::{Rng, Stream};

/// Which learning algorithm to train.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algo {
    Ddpg,
    Sac,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Ddpg => "ddpg",
            Algo::Sac => "sac",
        }
    }
}

/// Fully resolved training-run settings.
#[derive(Clone, Debug)]
pub struct TrainSettings {
    pub scenario: ScenarioId,
    pub algo: Algo,
    pub episodes: usize,
    pub seed: u64,
    pub width: usize,
}

impl TrainSettings {
    /// Resolve the episode count: explicit value, else the per-scenario
    /// default (1000 for the empty tank, 2500 with risers).
    pub fn new(cfg: &AppConfig, scenario: ScenarioId, algo: Algo) -> TrainSettings {
        let episodes = cfg.train.episodes.unwrap_or(match scenario {
            ScenarioId::One => 1000,
            ScenarioId::Two => 2500,
        });
        TrainSettings {
            scenario,
            algo,
            episodes,
            seed: cfg.train.seed,
            width: cfg.train.width,
        }
    }
}

pub struct TrainOutput {
    pub rewards: Vec<f64>,
    pub moving_avg: Vec<f64>,
    pub checkpoint: PathBuf,
}

enum Learner {
    Ddpg(Box<DdpgAgent>),
    Sac(Box<SacAgent>),
}

impl Learner {
    fn new(cfg: &AppConfig, st: &TrainSettings) -> Learner {
        let hidden = vec![st.width; 3];
        match st.algo {
            Algo::Ddpg => Learner::Ddpg(Box::new(DdpgAgent::new(
                DdpgConfig {
                    hidden,
                    gamma: cfg.agent.gamma,
                    tau: cfg.agent.tau,
                    lr: cfg.agent.lr,
                    ou_theta: cfg.agent.ou_theta,
                    ou_sigma: cfg.agent.ou_sigma,
                    ou_dt: cfg.agent.ou_dt,
                    ..DdpgConfig::default()
                },
                st.seed,
            ))),
            Algo::Sac => Learner::Sac(Box::new(SacAgent::new(
                SacConfig {
                    hidden,
                    gamma: cfg.agent.gamma,
                    tau: cfg.agent.tau,
                    lr: cfg.agent.lr,
                    alpha_init: cfg.agent.sac_alpha,
                    auto_alpha: cfg.agent.sac_auto_alpha,
                    target_entropy: cfg.agent.sac_target_entropy,
                    ..SacConfig::default()
                },
                st.seed,
            ))),
        }
    }

    fn act_explore(&mut self, obs: &[f64]) -> [f64; 3] {
        let a = match self {
            Learner::Ddpg(agent) => agent.act(obs, true),
            Learner::Sac(agent) => agent.act(obs, true).0,
        };
        [a[0], a[1], a[2]]
    }

    fn begin_episode(&mut self) {
        if let Learner::Ddpg(agent) = self {
            agent.reset_noise();
        }
    }

    /// Returns (critic TD loss, policy value estimate) for diagnostics.
    fn update(&mut self, batch: &Minibatch) -> (f64, f64) {
        match self {
            Learner::Ddpg(agent) => {
                let l = agent.update(batch);
                (l.critic, l.actor_q)
            }
            Learner::Sac(agent) => {
                let l = agent.update(batch);
                (l.critic1, -l.actor)
            }
        }
    }

    fn save(&self, path: &Path) -> Result<()> {
        match self {
            Learner::Ddpg(agent) => checkpoint::save_ddpg(path, agent),
            Learner::Sac(agent) => checkpoint::save_sac(path, agent),
        }
    }
}

/// Run the episode loop (reset → act → step → push → update), streaming
/// `rewards.csv` and periodic checkpoints into `out_dir`.
pub fn train(cfg: &AppConfig, st: &TrainSettings, out_dir: &Path) -> Result<TrainOutput> {
    std::fs::create_dir_all(out_dir.join("checkpoints"))?;
    std::fs::write(out_dir.join("config.resolved"), cfg.resolved())?;

    let mut env = Environment::training(st.scenario, cfg.sim.clone(), st.seed);
    let mut learner = Learner::new(cfg, st);
    let mut buffer = ReplayBuffer::new(cfg.agent.buffer_capacity);
    let mut batch_rng = Rng::substream(st.seed, Stream::Minibatch);

    let mut rewards_csv = std::io::BufWriter::new(std::fs::File::create(out_dir.join("rewards.csv"))?);
    writeln!(rewards_csv, "episode,total_reward,moving_avg_300")?;

    let mut rewards = Vec::with_capacity(st.episodes);
    let mut window_sum = 0.0;
    let mut moving_avg = Vec::with_capacity(st.episodes);
    let started = Instant::now();
    let mut diag_loss = 0.0;
    let mut diag_q = 0.0;
    let mut diag_n = 0u64;

    for episode in 0..st.episodes {
        let mut obs = env.reset_training();
        learner.begin_episode();
        let mut total = 0.0;

        while !env.finished() {
            let action = learner.act_explore(obs.as_slice());
            let outcome = env.step(action);
            total += outcome.reward;
            let done = matches!(outcome.event, StepEvent::Collided | StepEvent::OutOfBounds);
            buffer.push(Transition {
                s: obs.as_slice().to_vec(),
                a: action.to_vec(),
                r: outcome.reward,
                s_next: outcome.observation.as_slice().to_vec(),
                done,
            });
            obs = outcome.observation;

            if buffer.len() >= cfg.agent.warmup_steps {
                for _ in 0..cfg.agent.updates_per_step {
                    if let Some(batch) = buffer.sample(cfg.agent.batch_size, &mut batch_rng) {
                        let (loss, q) = learner.update(&batch);
                        diag_loss += loss;
                        diag_q += q;
                        diag_n += 1;
                    }
                }
            }
        }

        rewards.push(total);
        window_sum += total;
        if rewards.len() > 300 {
            window_sum -= rewards[rewards.len() - 301];
        }
        let ma = window_sum / rewards.len().min(300) as f64;
        moving_avg.push(ma);
        writeln!(rewards_csv, "{},{},{}", episode + 1, total, ma)?;
        rewards_csv.flush()?;

        if (episode + 1) % cfg.train.checkpoint_every == 0 {
            learner.save(&out_dir.join(format!("checkpoints/ep_{:05}.ckpt", episode + 1)))?;
        }
        if (episode + 1) % 20 == 0 || episode + 1 == st.episodes {
            let k = diag_n.max(1) as f64;
            eprintln!(
                "[train {} s{} {}] ep {:4}/{} reward {:8.1} ma300 {:8.2} buffer {:6} td {:8.3} q {:8.2} ({:.1}s)",
                st.algo.name(),
                st.scenario.index(),
                st.seed,
                episode + 1,
                st.episodes,
                total,
                ma,
                buffer.len(),
                diag_loss / k,
                diag_q / k,
                started.elapsed().as_secs_f64(),
            );
            diag_loss = 0.0;
            diag_q = 0.0;
            diag_n = 0;
        }
    }

    let final_path = out_dir.join("checkpoints/final.ckpt");
    learner.save(&final_path)?;

    debug_assert_eq!(moving_avg, moving_average(&rewards, 300));
    Ok(TrainOutput { rewards, moving_avg, checkpoint: final_path })
}
