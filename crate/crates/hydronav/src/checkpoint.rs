//! Binary policy checkpoints.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic   4 bytes  "HNRL"
//! version u32      1
//! algo    u8       0 = deterministic agent, 1 = stochastic agent
//! then, for every network the algorithm defines, in fixed order
//!   (ddpg: actor, critic, target_actor, target_critic;
//!    sac:  actor, critic1, critic2, target_critic1, target_critic2):
//!   layer_count u32
//!   dims        (layer_count + 1) × u32
//!   per layer:  weights as f64 row-major (out×in), then biases as f64
//! sac only: log_alpha f64
//! ```
//!
//! A load must consume the file exactly; truncation, trailing bytes, or a
//! bad header produce a descriptive error and no partial agent.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::agents::{DdpgAgent, DdpgConfig, SacAgent, SacConfig};
use crate::config::AgentHyper;
use crate::error::{Error, Result};
use crate::nn::{Dense, Head, Mlp};
use ndarray::{Array1, Array2};

const MAGIC: &[u8; 4] = b"HNRL";
const VERSION: u32 = 1;
const ALGO_DDPG: u8 = 0;
const ALGO_SAC: u8 = 1;

/// Agent restored from a checkpoint.
pub enum LoadedAgent {
    Ddpg(Box<DdpgAgent>),
    Sac(Box<SacAgent>),
}

impl std::fmt::Debug for LoadedAgent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "LoadedAgent::{}", self.algo_name())
    }
}

impl LoadedAgent {
    pub fn algo_name(&self) -> &'static str {
        match self {
            LoadedAgent::Ddpg(_) => "ddpg",
            LoadedAgent::Sac(_) => "sac",
        }
    }

    pub fn obs_dim(&self) -> usize {
        match self {
            LoadedAgent::Ddpg(a) => a.config().obs_dim,
            LoadedAgent::Sac(a) => a.config().obs_dim,
        }
    }
}

fn write_net(w: &mut impl Write, net: &Mlp) -> Result<()> {
    let dims = net.dims();
    w.write_all(&(net.layers().len() as u32).to_le_bytes())?;
    for d in &dims {
        w.write_all(&(*d as u32).to_le_bytes())?;
    }
    for layer in net.layers() {
        for v in layer.w.iter() {
            w.write_all(&v.to_le_bytes())?;
        }
        for v in layer.b.iter() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)
        .map_err(|_| Error::Checkpoint("unexpected end of file".into()))?;
    Ok(u32::from_le_bytes(buf))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)
        .map_err(|_| Error::Checkpoint("unexpected end of file".into()))?;
    Ok(f64::from_le_bytes(buf))
}

fn read_net(r: &mut impl Read, head: Head) -> Result<Mlp> {
    let layer_count = read_u32(r)? as usize;
    if layer_count == 0 || layer_count > 64 {
        return Err(Error::Checkpoint(format!("implausible layer count {layer_count}")));
    }
    let mut dims = Vec::with_capacity(layer_count + 1);
    for _ in 0..=layer_count {
        let d = read_u32(r)? as usize;
        if d == 0 || d > 1 << 20 {
            return Err(Error::Checkpoint(format!("implausible layer width {d}")));
        }
        dims.push(d);
    }
    let mut layers = Vec::with_capacity(layer_count);
    for io in dims.windows(2) {
        let (fan_in, fan_out) = (io[0], io[1]);
        let mut w = Array2::zeros((fan_out, fan_in));
        for v in w.iter_mut() {
            *v = read_f64(r)?;
        }
        let mut b = Array1::zeros(fan_out);
        for v in b.iter_mut() {
            *v = read_f64(r)?;
        }
        layers.push(Dense { w, b });
    }
    Ok(Mlp::from_layers(layers, head))
}

fn open_writer(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    Ok(BufWriter::new(File::create(path)?))
}

pub fn save_ddpg(path: &Path, agent: &DdpgAgent) -> Result<()> {
    let mut w = open_writer(path)?;
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&[ALGO_DDPG])?;
    for net in agent.networks() {
        write_net(&mut w, net)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_sac(path: &Path, agent: &SacAgent) -> Result<()> {
    let mut w = open_writer(path)?;
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&[ALGO_SAC])?;
    for net in agent.networks() {
        write_net(&mut w, net)?;
    }
    w.write_all(&agent.log_alpha().to_le_bytes())?;
    w.flush()?;
    Ok(())
}

/// Restore an agent. Network shapes come from the file; training
/// hyperparameters (γ, τ, learning rate, noise) come from `hyper`.
pub fn load(path: &Path, hyper: &AgentHyper, seed: u64) -> Result<LoadedAgent> {
    let mut r = BufReader::new(File::open(path)?);

    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| Error::Checkpoint("file shorter than the magic header".into()))?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint(format!("bad magic {magic:02x?}, expected \"HNRL\"")));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let mut algo = [0u8; 1];
    r.read_exact(&mut algo)
        .map_err(|_| Error::Checkpoint("unexpected end of file".into()))?;

    let loaded = match algo[0] {
        ALGO_DDPG => {
            let actor = read_net(&mut r, Head::Tanh)?;
            let critic = read_net(&mut r, Head::Linear)?;
            let target_actor = read_net(&mut r, Head::Tanh)?;
            let target_critic = read_net(&mut r, Head::Linear)?;
            let dims = actor.dims();
            let cfg = DdpgConfig {
                obs_dim: dims[0],
                action_dim: *dims.last().unwrap(),
                hidden: dims[1..dims.len() - 1].to_vec(),
                gamma: hyper.gamma,
                tau: hyper.tau,
                lr: hyper.lr,
                ou_theta: hyper.ou_theta,
                ou_sigma: hyper.ou_sigma,
                ou_dt: hyper.ou_dt,
            };
            check_critic_dims(&cfg.hidden, cfg.obs_dim + cfg.action_dim, &critic)?;
            LoadedAgent::Ddpg(Box::new(DdpgAgent::from_all_networks(
                cfg,
                actor,
                critic,
                target_actor,
                target_critic,
                seed,
            )))
        }
        ALGO_SAC => {
            let actor = read_net(&mut r, Head::Linear)?;
            let critic1 = read_net(&mut r, Head::Linear)?;
            let critic2 = read_net(&mut r, Head::Linear)?;
            let target1 = read_net(&mut r, Head::Linear)?;
            let target2 = read_net(&mut r, Head::Linear)?;
            let log_alpha = read_f64(&mut r)?;
            let dims = actor.dims();
            let out = *dims.last().unwrap();
            if out % 2 != 0 {
                return Err(Error::Checkpoint(format!(
                    "stochastic actor output width {out} is not even"
                )));
            }
            let cfg = SacConfig {
                obs_dim: dims[0],
                action_dim: out / 2,
                hidden: dims[1..dims.len() - 1].to_vec(),
                gamma: hyper.gamma,
                tau: hyper.tau,
                lr: hyper.lr,
                alpha_init: hyper.sac_alpha,
                auto_alpha: hyper.sac_auto_alpha,
                target_entropy: hyper.sac_target_entropy,
                ..SacConfig::default()
            };
            check_critic_dims(&cfg.hidden, cfg.obs_dim + cfg.action_dim, &critic1)?;
            LoadedAgent::Sac(Box::new(SacAgent::from_all_networks(
                cfg, actor, critic1, critic2, target1, target2, log_alpha, seed,
            )))
        }
        other => return Err(Error::Checkpoint(format!("unknown algo tag {other}"))),
    };

    let mut extra = [0u8; 1];
    match r.read(&mut extra) {
        Ok(0) => Ok(loaded),
        Ok(_) => Err(Error::Checkpoint("trailing bytes after parameters".into())),
        Err(e) => Err(e.into()),
    }
}

fn check_critic_dims(hidden: &[usize], expected_in: usize, critic: &Mlp) -> Result<()> {
    let dims = critic.dims();
    if dims[0] != expected_in || dims[1..dims.len() - 1] != *hidden || *dims.last().unwrap() != 1 {
        return Err(Error::Checkpoint(format!(
            "critic dims {dims:?} inconsistent with actor (expected input {expected_in})"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Rng;

    fn tmp(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("hydronav-ckpt-tests");
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    fn small_ddpg(seed: u64) -> DdpgAgent {
        DdpgAgent::new(
            DdpgConfig { obs_dim: 5, action_dim: 2, hidden: vec![8, 8], ..DdpgConfig::default() },
            seed,
        )
    }

    fn small_sac(seed: u64) -> SacAgent {
        SacAgent::new(
            SacConfig { obs_dim: 5, action_dim: 2, hidden: vec![8, 8], ..SacConfig::default() },
            seed,
        )
    }

    #[test]
    fn ddpg_round_trip_is_bit_exact() {
        let agent = small_ddpg(3);
        let p1 = tmp("ddpg_a.ckpt");
        let p2 = tmp("ddpg_b.ckpt");
        save_ddpg(&p1, &agent).unwrap();
        let loaded = match load(&p1, &AgentHyper::default(), 3).unwrap() {
            LoadedAgent::Ddpg(a) => a,
            _ => panic!("wrong algo"),
        };
        save_ddpg(&p2, &loaded).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    }

    #[test]
    fn sac_round_trip_is_bit_exact() {
        let agent = small_sac(4);
        let p1 = tmp("sac_a.ckpt");
        let p2 = tmp("sac_b.ckpt");
        save_sac(&p1, &agent).unwrap();
        let loaded = match load(&p1, &AgentHyper::default(), 4).unwrap() {
            LoadedAgent::Sac(a) => a,
            _ => panic!("wrong algo"),
        };
        assert_eq!(loaded.log_alpha(), agent.log_alpha());
        save_sac(&p2, &loaded).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    }

    #[test]
    fn loaded_actor_reproduces_actions_exactly() {
        let mut agent = small_ddpg(9);
        let path = tmp("ddpg_actions.ckpt");
        save_ddpg(&path, &agent).unwrap();
        let mut loaded = match load(&path, &AgentHyper::default(), 9).unwrap() {
            LoadedAgent::Ddpg(a) => a,
            _ => panic!("wrong algo"),
        };
        let mut rng = Rng::seeded(17);
        for _ in 0..100 {
            let obs: Vec<f64> = (0..5).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
            assert_eq!(agent.act(&obs, false), loaded.act(&obs, false));
        }
    }

    #[test]
    fn truncated_file_is_rejected() {
        let agent = small_ddpg(1);
        let path = tmp("trunc.ckpt");
        save_ddpg(&path, &agent).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
        assert!(matches!(
            load(&path, &AgentHyper::default(), 1),
            Err(Error::Checkpoint(_))
        ));
    }

    #[test]
    fn bad_magic_version_and_trailing_bytes_are_rejected() {
        let agent = small_ddpg(2);
        let path = tmp("mangled.ckpt");

        save_ddpg(&path, &agent).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[0] = b'X';
        std::fs::write(&path, &bytes).unwrap();
        let err = load(&path, &AgentHyper::default(), 2).unwrap_err();
        assert!(err.to_string().contains("magic"), "{err}");

        save_ddpg(&path, &agent).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[4] = 9;
        std::fs::write(&path, &bytes).unwrap();
        let err = load(&path, &AgentHyper::default(), 2).unwrap_err();
        assert!(err.to_string().contains("version"), "{err}");

        save_ddpg(&path, &agent).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.push(0);
        std::fs::write(&path, &bytes).unwrap();
        let err = load(&path, &AgentHyper::default(), 2).unwrap_err();
        assert!(err.to_string().contains("trailing"), "{err}");
    }
}
