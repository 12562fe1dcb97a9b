use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::agents::{DdpgAgent, SacAgent};
use crate::checkpoint::LoadedAgent;
use crate::config::AppConfig;
use crate::env::{scale_action, Environment, RouteId, ScenarioId, StepEvent};
use crate::error::Result;
use crate::math::Vec3;
use crate::sensing::{Observation, Scene};

/// Action source for evaluation trials. Agents act deterministically here:
/// no exploration noise, the stochastic policy uses its mode.
pub trait Policy {
    fn reset(&mut self) {}
    fn act(&mut self, obs: &Observation) -> [f64; 3];
}

impl Policy for DdpgAgent {
    fn act(&mut self, obs: &Observation) -> [f64; 3] {
        let a = DdpgAgent::act(self, obs.as_slice(), false);
        [a[0], a[1], a[2]]
    }
}

impl Policy for SacAgent {
    fn act(&mut self, obs: &Observation) -> [f64; 3] {
        let (a, _) = SacAgent::act(self, obs.as_slice(), false);
        [a[0], a[1], a[2]]
    }
}

impl Policy for LoadedAgent {
    fn act(&mut self, obs: &Observation) -> [f64; 3] {
        match self {
            LoadedAgent::Ddpg(a) => Policy::act(a.as_mut(), obs),
            LoadedAgent::Sac(a) => Policy::act(a.as_mut(), obs),
        }
    }
}

impl<F: FnMut(&Observation) -> [f64; 3]> Policy for F {
    fn act(&mut self, obs: &Observation) -> [f64; 3] {
        self(obs)
    }
}

/// What a failed trial ran into.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ObstacleKind {
    Wall,
    Riser,
    FloorOrCeiling,
}

/// Outcome of a single evaluation trial.
#[derive(Clone, Debug)]
pub struct TrialRecord {
    pub trial: usize,
    pub success: bool,
    pub steps: usize,
    /// Seconds spent above the surface, in agent periods.
    pub t_air: f64,
    /// Seconds spent at or below the surface.
    pub t_under: f64,
    pub event: StepEvent,
    pub hit: Option<ObstacleKind>,
}

/// Aggregate over an evaluation run. Times are over successful trials only;
/// failed trials report their time-to-failure separately.
#[derive(Clone, Debug, Serialize)]
pub struct EvalReport {
    pub trials: usize,
    pub successes: usize,
    pub t_air_mean: f64,
    pub t_air_std: f64,
    pub t_under_mean: f64,
    pub t_under_std: f64,
    pub collisions: usize,
    pub timeouts: usize,
    pub seed: u64,
    pub checkpoint: String,
    pub riser_collisions: usize,
    pub t_fail_mean: f64,
    pub t_fail_std: f64,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    // population convention (divide by n)
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

impl EvalReport {
    pub fn from_trials(records: &[TrialRecord], seed: u64, checkpoint: &str) -> EvalReport {
        let ok: Vec<&TrialRecord> = records.iter().filter(|t| t.success).collect();
        let air: Vec<f64> = ok.iter().map(|t| t.t_air).collect();
        let under: Vec<f64> = ok.iter().map(|t| t.t_under).collect();
        let fails: Vec<f64> =
            records.iter().filter(|t| !t.success).map(|t| t.t_air + t.t_under).collect();
        let (t_air_mean, t_air_std) = mean_std(&air);
        let (t_under_mean, t_under_std) = mean_std(&under);
        let (t_fail_mean, t_fail_std) = mean_std(&fails);
        EvalReport {
            trials: records.len(),
            successes: ok.len(),
            t_air_mean,
            t_air_std,
            t_under_mean,
            t_under_std,
            collisions: records
                .iter()
                .filter(|t| matches!(t.event, StepEvent::Collided | StepEvent::OutOfBounds))
                .count(),
            timeouts: records.iter().filter(|t| t.event == StepEvent::StepCap).count(),
            seed,
            checkpoint: checkpoint.to_string(),
            riser_collisions: records
                .iter()
                .filter(|t| t.hit == Some(ObstacleKind::Riser))
                .count(),
            t_fail_mean,
            t_fail_std,
        }
    }
}

/// Evaluation-run parameters.
#[derive(Clone, Debug)]
pub struct EvalSettings {
    pub scenario: ScenarioId,
    pub route: RouteId,
    pub trials: usize,
    pub seed: u64,
    pub log_trajectories: bool,
}

pub struct EvalOutcome {
    pub report: EvalReport,
    pub trials: Vec<TrialRecord>,
}

enum Driver<'a> {
    Policy(&'a mut dyn Policy),
    Baseline,
}

/// Nearest surface when a collision fired, for failure classification.
fn classify_hit(scene: &Scene, p: Vec3) -> ObstacleKind {
    if p.z <= scene.z_min + 0.1 || p.z >= scene.z_max - 0.1 {
        return ObstacleKind::FloorOrCeiling;
    }
    let wall = scene.half_extent - p.x.abs().max(p.y.abs());
    let riser = scene
        .risers
        .iter()
        .map(|r| (p.x - r.x).hypot(p.y - r.y) - r.radius)
        .fold(f64::INFINITY, f64::min);
    if riser < wall {
        ObstacleKind::Riser
    } else {
        ObstacleKind::Wall
    }
}

/// Evaluate a policy over fixed-route trials, writing `report.json`,
/// `actions_stats.csv`, and optional per-trial trajectory CSVs.
pub fn evaluate(
    policy: &mut dyn Policy,
    cfg: &AppConfig,
    st: &EvalSettings,
    checkpoint_label: &str,
    out_dir: Option<&Path>,
) -> Result<EvalOutcome> {
    run_trials(Driver::Policy(policy), cfg, st, checkpoint_label, out_dir, true)
}

/// Drive the geometric controller over the same metrics pipeline.
pub fn run_baseline(
    cfg: &AppConfig,
    st: &EvalSettings,
    out_dir: Option<&Path>,
) -> Result<EvalOutcome> {
    run_trials(Driver::Baseline, cfg, st, "baseline", out_dir, false)
}

fn run_trials(
    mut driver: Driver,
    cfg: &AppConfig,
    st: &EvalSettings,
    checkpoint_label: &str,
    out_dir: Option<&Path>,
    action_stats: bool,
) -> Result<EvalOutcome> {
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        if st.log_trajectories {
            std::fs::create_dir_all(dir.join("trajectories"))?;
        }
    }
    let period = cfg.sim.episode.agent_period;

    // per-step action statistics across trials (scaled commands)
    let mut stat_count: Vec<usize> = Vec::new();
    let mut stat_sum: Vec<[f64; 3]> = Vec::new();
    let mut stat_sumsq: Vec<[f64; 3]> = Vec::new();

    let mut records = Vec::with_capacity(st.trials);
    for trial in 0..st.trials {
        let mut env =
            Environment::evaluation(st.scenario, cfg.sim.clone(), st.route, st.seed, trial as u64);
        if let Driver::Policy(p) = &mut driver {
            p.reset();
        }
        let mut obs = env.observation();
        let mut t_air = 0.0;
        let mut t_under = 0.0;
        let mut success = false;
        let mut event = StepEvent::None;
        let mut hit = None;

        let mut traj: Option<std::io::BufWriter<std::fs::File>> = match (out_dir, st.log_trajectories) {
            (Some(dir), true) => {
                let f = std::fs::File::create(dir.join(format!("trajectories/trial_{trial:03}.csv")))?;
                let mut w = std::io::BufWriter::new(f);
                writeln!(w, "step,t_s,x,y,z,yaw,raw_a0,raw_a1,raw_a2,v_fwd,v_z,dyaw,reward,min_range,dist_target,submerged_fraction")?;
                Some(w)
            }
            _ => None,
        };

        while !env.finished() {
            let (raw, outcome) = match &mut driver {
                Driver::Policy(p) => {
                    let raw = p.act(&obs);
                    (raw, env.step(raw))
                }
                Driver::Baseline => ([0.0; 3], env.step_baseline()),
            };
            event = outcome.event;
            obs = outcome.observation;

            let state = env.state();
            if state.position.z > 0.0 {
                t_air += period;
            } else {
                t_under += period;
            }

            let cmd = scale_action(raw);
            if action_stats {
                let idx = env.steps() - 1;
                if stat_count.len() <= idx {
                    stat_count.push(0);
                    stat_sum.push([0.0; 3]);
                    stat_sumsq.push([0.0; 3]);
                }
                stat_count[idx] += 1;
                for (j, v) in [cmd.v_forward, cmd.v_z, cmd.delta_yaw].into_iter().enumerate() {
                    stat_sum[idx][j] += v;
                    stat_sumsq[idx][j] += v * v;
                }
            }

            if let Some(w) = traj.as_mut() {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    env.steps(),
                    env.steps() as f64 * period,
                    state.position.x,
                    state.position.y,
                    state.position.z,
                    state.yaw(),
                    raw[0],
                    raw[1],
                    raw[2],
                    cmd.v_forward,
                    cmd.v_z,
                    cmd.delta_yaw,
                    outcome.reward,
                    env.last_min_range(),
                    env.last_target_distance(),
                    env.submerged(),
                )?;
            }

            if outcome.event == StepEvent::Arrived {
                success = true;
                break;
            }
            if outcome.done {
                break;
            }
        }

        if matches!(event, StepEvent::Collided | StepEvent::OutOfBounds) {
            hit = Some(classify_hit(env.scene(), env.state().position));
        }
        records.push(TrialRecord {
            trial,
            success,
            steps: env.steps(),
            t_air,
            t_under,
            event,
            hit,
        });
    }

    let report = EvalReport::from_trials(&records, st.seed, checkpoint_label);
    if let Some(dir) = out_dir {
        std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(&report)? + "\n")?;
        if action_stats {
            let f = std::fs::File::create(dir.join("actions_stats.csv"))?;
            let mut w = std::io::BufWriter::new(f);
            writeln!(w, "step,v_fwd_mean,v_fwd_std,v_z_mean,v_z_std,dyaw_mean,dyaw_std")?;
            for i in 0..stat_count.len() {
                let n = stat_count[i] as f64;
                let mut cols = [0.0; 6];
                for j in 0..3 {
                    let mean = stat_sum[i][j] / n;
                    let var = (stat_sumsq[i][j] / n - mean * mean).max(0.0);
                    cols[2 * j] = mean;
                    cols[2 * j + 1] = var.sqrt();
                }
                writeln!(
                    w,
                    "{},{},{},{},{},{},{}",
                    i + 1,
                    cols[0],
                    cols[1],
                    cols[2],
                    cols[3],
                    cols[4],
                    cols[5]
                )?;
            }
        }
    }

    Ok(EvalOutcome { report, trials: records })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_means_cover_successful_trials_only() {
        // hand-computed 3-trial fixture: successes (2,4) and (10,0) air/under
        let records = vec![
            TrialRecord {
                trial: 0,
                success: true,
                steps: 30,
                t_air: 2.0,
                t_under: 4.0,
                event: StepEvent::Arrived,
                hit: None,
            },
            TrialRecord {
                trial: 1,
                success: true,
                steps: 50,
                t_air: 10.0,
                t_under: 0.0,
                event: StepEvent::Arrived,
                hit: None,
            },
            TrialRecord {
                trial: 2,
                success: false,
                steps: 12,
                t_air: 1.0,
                t_under: 1.4,
                event: StepEvent::Collided,
                hit: Some(ObstacleKind::Riser),
            },
        ];
        let r = EvalReport::from_trials(&records, 7, "x.ckpt");
        assert_eq!(r.trials, 3);
        assert_eq!(r.successes, 2);
        // mean of (2, 10) = 6, population std = 4
        assert_eq!(r.t_air_mean, 6.0);
        assert_eq!(r.t_air_std, 4.0);
        assert_eq!(r.t_under_mean, 2.0);
        assert_eq!(r.t_under_std, 2.0);
        assert_eq!(r.collisions, 1);
        assert_eq!(r.timeouts, 0);
        assert_eq!(r.riser_collisions, 1);
        // failed trial took 2.4 s total
        assert_eq!(r.t_fail_mean, 2.4);
        assert_eq!(r.t_fail_std, 0.0);
    }

    #[test]
    fn zero_trials_produce_an_empty_report() {
        let r = EvalReport::from_trials(&[], 0, "none");
        assert_eq!(r.trials, 0);
        assert_eq!(r.successes, 0);
        assert_eq!(r.t_air_mean, 0.0);
        assert!(r.t_air_std == 0.0 && r.t_under_std == 0.0);
    }

    #[test]
    fn classify_prefers_the_nearest_surface() {
        let scene = ScenarioId::Two.scene();
        assert_eq!(
            classify_hit(&scene, Vec3::new(1.8, -2.0, 2.0)),
            ObstacleKind::Riser
        );
        assert_eq!(
            classify_hit(&scene, Vec3::new(4.6, 0.0, 2.0)),
            ObstacleKind::Wall
        );
        assert_eq!(
            classify_hit(&scene, Vec3::new(0.0, 0.0, -0.96)),
            ObstacleKind::FloorOrCeiling
        );
    }
}
