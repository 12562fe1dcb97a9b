//! Flat `key = value` run configuration. One key per line, `#` starts a
//! comment, unknown keys are rejected. Every physics, controller, episode,
//! and agent constant has a key here; CLI flags override file values.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::env::SimSetup;
use crate::error::{Error, Result};
use crate::sensing::Riser;

/// Agent hyperparameters shared by the trainer and both algorithms.
#[derive(Clone, Debug)]
pub struct AgentHyper {
    pub gamma: f64,
    pub tau: f64,
    pub lr: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    /// Updates start once the buffer holds this many transitions.
    pub warmup_steps: usize,
    pub updates_per_step: usize,
    pub ou_theta: f64,
    pub ou_sigma: f64,
    pub ou_dt: f64,
    pub sac_alpha: f64,
    pub sac_auto_alpha: bool,
    pub sac_target_entropy: f64,
}

impl Default for AgentHyper {
    fn default() -> Self {
        AgentHyper {
            gamma: 0.99,
            tau: 0.005,
            lr: 1e-3,
            batch_size: 256,
            buffer_capacity: 50_000,
            warmup_steps: 1000,
            updates_per_step: 1,
            ou_theta: 0.15,
            ou_sigma: 0.2,
            ou_dt: 1.0,
            sac_alpha: 0.2,
            sac_auto_alpha: true,
            sac_target_entropy: -3.0,
        }
    }
}

/// Training-run knobs that are also CLI flags.
#[derive(Clone, Debug)]
pub struct TrainKnobs {
    /// None resolves to the per-scenario default (1000 / 2500).
    pub episodes: Option<usize>,
    pub width: usize,
    pub seed: u64,
    pub checkpoint_every: usize,
}

impl Default for TrainKnobs {
    fn default() -> Self {
        TrainKnobs { episodes: None, width: 512, seed: 0, checkpoint_every: 100 }
    }
}

#[derive(Clone, Debug)]
pub struct EvalKnobs {
    pub trials: usize,
}

impl Default for EvalKnobs {
    fn default() -> Self {
        EvalKnobs { trials: 100 }
    }
}

/// The full resolved configuration.
#[derive(Clone, Debug, Default)]
pub struct AppConfig {
    pub sim: SimSetup,
    pub agent: AgentHyper,
    pub train: TrainKnobs,
    pub eval: EvalKnobs,
}

impl AppConfig {
    pub fn from_file(path: &Path) -> Result<AppConfig> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<AppConfig> {
        let mut cfg = AppConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`, got `{raw}`", lineno + 1))
            })?;
            cfg.apply(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(cfg)
    }

    fn apply(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: std::str::FromStr>(v: &str) -> std::result::Result<T, String> {
            v.parse().map_err(|_| format!("cannot parse `{v}`"))
        }
        fn flag(v: &str) -> std::result::Result<bool, String> {
            match v {
                "true" | "1" | "yes" => Ok(true),
                "false" | "0" | "no" => Ok(false),
                _ => Err(format!("cannot parse `{v}` as bool")),
            }
        }

        let p = &mut self.sim.params;
        let g = &mut self.sim.gains;
        let e = &mut self.sim.episode;
        let d = &mut self.sim.disturbance;
        let a = &mut self.agent;
        match key {
            "physics.mass" => p.mass = num(value)?,
            "physics.inertia_x" => p.inertia.x = num(value)?,
            "physics.inertia_y" => p.inertia.y = num(value)?,
            "physics.inertia_z" => p.inertia.z = num(value)?,
            "physics.height" => p.height = num(value)?,
            "physics.buoyancy_ratio" => p.buoyancy_ratio = num(value)?,
            "physics.air_drag_lin" => p.air_drag_lin = num(value)?,
            "physics.air_drag_quad" => p.air_drag_quad = num(value)?,
            "physics.water_drag_lin" => p.water_drag_lin = num(value)?,
            "physics.water_drag_quad" => p.water_drag_quad = num(value)?,
            "physics.air_rot_drag" => p.air_rot_drag = num(value)?,
            "physics.water_rot_drag" => p.water_rot_drag = num(value)?,
            "physics.added_mass_factor" => p.added_mass_factor = num(value)?,
            "physics.max_thrust" => p.max_thrust = num(value)?,
            "physics.max_torque" => p.max_torque = num(value)?,
            "physics.wind_theta" => d.wind_theta = num(value)?,
            "physics.wind_sigma" => d.wind_sigma = num(value)?,
            "physics.current_theta" => d.current_theta = num(value)?,
            "physics.current_sigma" => d.current_sigma = num(value)?,
            "controller.k_x" => g.k_x = num(value)?,
            "controller.k_v" => g.k_v = num(value)?,
            "controller.k_r" => g.k_r = num(value)?,
            "controller.k_omega" => g.k_omega = num(value)?,
            "controller.underwater_scale" => g.underwater_scale = num(value)?,
            "episode.max_steps" => e.max_steps = num(value)?,
            "episode.c_d" => e.c_d = num(value)?,
            "episode.c_o" => e.c_o = num(value)?,
            "episode.r_arrive" => e.r_arrive = num(value)?,
            "episode.r_collide" => e.r_collide = num(value)?,
            "episode.agent_period" => e.agent_period = num(value)?,
            "episode.physics_dt" => e.physics_dt = num(value)?,
            "agent.gamma" => a.gamma = num(value)?,
            "agent.tau" => a.tau = num(value)?,
            "agent.lr" => a.lr = num(value)?,
            "agent.batch_size" => a.batch_size = num(value)?,
            "agent.buffer_capacity" => a.buffer_capacity = num(value)?,
            "agent.warmup_steps" => a.warmup_steps = num(value)?,
            "agent.updates_per_step" => a.updates_per_step = num(value)?,
            "agent.ou_theta" => a.ou_theta = num(value)?,
            "agent.ou_sigma" => a.ou_sigma = num(value)?,
            "agent.ou_dt" => a.ou_dt = num(value)?,
            "agent.sac_alpha" => a.sac_alpha = num(value)?,
            "agent.sac_auto_alpha" => a.sac_auto_alpha = flag(value)?,
            "agent.sac_target_entropy" => a.sac_target_entropy = num(value)?,
            "train.episodes" => self.train.episodes = Some(num(value)?),
            "train.width" => self.train.width = num(value)?,
            "train.seed" => self.train.seed = num(value)?,
            "train.checkpoint_every" => self.train.checkpoint_every = num(value)?,
            "eval.trials" => self.eval.trials = num(value)?,
            _ if key.starts_with("scenario2.riser.") => {
                let idx: usize = num(key.rsplit('.').next().unwrap_or(""))?;
                let parts: Vec<&str> = value.split(',').map(str::trim).collect();
                if parts.len() != 3 {
                    return Err(format!("riser needs `x,y,radius`, got `{value}`"));
                }
                let riser =
                    Riser { x: num(parts[0])?, y: num(parts[1])?, radius: num(parts[2])? };
                if idx == 0 || idx > 16 {
                    return Err(format!("riser index {idx} out of range 1..=16"));
                }
                let risers = &mut self.sim.scenario2_risers;
                if risers.len() < idx {
                    risers.resize(idx, riser);
                }
                risers[idx - 1] = riser;
            }
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Every key with its resolved value, for the `config.resolved` dump.
    pub fn resolved(&self) -> String {
        let p = &self.sim.params;
        let g = &self.sim.gains;
        let e = &self.sim.episode;
        let d = &self.sim.disturbance;
        let a = &self.agent;
        let mut map: BTreeMap<&str, String> = BTreeMap::new();
        map.insert("physics.mass", p.mass.to_string());
        map.insert("physics.inertia_x", p.inertia.x.to_string());
        map.insert("physics.inertia_y", p.inertia.y.to_string());
        map.insert("physics.inertia_z", p.inertia.z.to_string());
        map.insert("physics.height", p.height.to_string());
        map.insert("physics.buoyancy_ratio", p.buoyancy_ratio.to_string());
        map.insert("physics.air_drag_lin", p.air_drag_lin.to_string());
        map.insert("physics.air_drag_quad", p.air_drag_quad.to_string());
        map.insert("physics.water_drag_lin", p.water_drag_lin.to_string());
        map.insert("physics.water_drag_quad", p.water_drag_quad.to_string());
        map.insert("physics.air_rot_drag", p.air_rot_drag.to_string());
        map.insert("physics.water_rot_drag", p.water_rot_drag.to_string());
        map.insert("physics.added_mass_factor", p.added_mass_factor.to_string());
        map.insert("physics.max_thrust", p.max_thrust.to_string());
        map.insert("physics.max_torque", p.max_torque.to_string());
        map.insert("physics.wind_theta", d.wind_theta.to_string());
        map.insert("physics.wind_sigma", d.wind_sigma.to_string());
        map.insert("physics.current_theta", d.current_theta.to_string());
        map.insert("physics.current_sigma", d.current_sigma.to_string());
        map.insert("controller.k_x", g.k_x.to_string());
        map.insert("controller.k_v", g.k_v.to_string());
        map.insert("controller.k_r", g.k_r.to_string());
        map.insert("controller.k_omega", g.k_omega.to_string());
        map.insert("controller.underwater_scale", g.underwater_scale.to_string());
        map.insert("episode.max_steps", e.max_steps.to_string());
        map.insert("episode.c_d", e.c_d.to_string());
        map.insert("episode.c_o", e.c_o.to_string());
        map.insert("episode.r_arrive", e.r_arrive.to_string());
        map.insert("episode.r_collide", e.r_collide.to_string());
        map.insert("episode.agent_period", e.agent_period.to_string());
        map.insert("episode.physics_dt", e.physics_dt.to_string());
        map.insert("agent.gamma", a.gamma.to_string());
        map.insert("agent.tau", a.tau.to_string());
        map.insert("agent.lr", a.lr.to_string());
        map.insert("agent.batch_size", a.batch_size.to_string());
        map.insert("agent.buffer_capacity", a.buffer_capacity.to_string());
        map.insert("agent.warmup_steps", a.warmup_steps.to_string());
        map.insert("agent.updates_per_step", a.updates_per_step.to_string());
        map.insert("agent.ou_theta", a.ou_theta.to_string());
        map.insert("agent.ou_sigma", a.ou_sigma.to_string());
        map.insert("agent.ou_dt", a.ou_dt.to_string());
        map.insert("agent.sac_alpha", a.sac_alpha.to_string());
        map.insert("agent.sac_auto_alpha", a.sac_auto_alpha.to_string());
        map.insert("agent.sac_target_entropy", a.sac_target_entropy.to_string());
        map.insert(
            "train.episodes",
            self.train.episodes.map_or_else(|| "default".into(), |v| v.to_string()),
        );
        map.insert("train.width", self.train.width.to_string());
        map.insert("train.seed", self.train.seed.to_string());
        map.insert("train.checkpoint_every", self.train.checkpoint_every.to_string());
        map.insert("eval.trials", self.eval.trials.to_string());

        let mut out = String::new();
        for (k, v) in &map {
            let _ = writeln!(out, "{k} = {v}");
        }
        for (i, r) in self.sim.scenario2_risers.iter().enumerate() {
            let _ = writeln!(out, "scenario2.riser.{} = {},{},{}", i + 1, r.x, r.y, r.radius);
        }
        out
    }
}
