//! Command-line front end: `train`, `eval`, and `baseline` subcommands over
//! the simulation and learning stack.

use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use hydronav::checkpoint;
use hydronav::config::AppConfig;
use hydronav::env::{RouteId, ScenarioId};
use hydronav::harness::{self, Algo, EvalSettings, TrainSettings};
use hydronav::sensing::OBS_DIM;

#[derive(Parser)]
#[command(name = "hydronav", version, about = "Mapless aerial/underwater navigation: simulator, agents, and baseline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Ddpg,
    Sac,
}

impl From<AlgoArg> for Algo {
    fn from(a: AlgoArg) -> Algo {
        match a {
            AlgoArg::Ddpg => Algo::Ddpg,
            AlgoArg::Sac => Algo::Sac,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RouteArg {
    #[value(name = "air2water")]
    AirToWater,
    #[value(name = "water2air")]
    WaterToAir,
}

impl From<RouteArg> for RouteId {
    fn from(r: RouteArg) -> RouteId {
        match r {
            RouteArg::AirToWater => RouteId::AirToWater,
            RouteArg::WaterToAir => RouteId::WaterToAir,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train an agent and write rewards.csv plus checkpoints
    Train {
        /// Water-tank scenario: 1 (empty) or 2 (risers)
        #[arg(long)]
        scenario: u32,
        #[arg(long, value_enum)]
        algo: AlgoArg,
        /// Episode count; defaults to 1000 (scenario 1) or 2500 (scenario 2)
        #[arg(long)]
        episodes: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Hidden-layer width (three hidden layers)
        #[arg(long)]
        width: Option<usize>,
        /// Output run directory
        #[arg(long)]
        out: PathBuf,
        /// CI-scale smoke: width 128, 300 episodes, scenario 1 only
        #[arg(long)]
        quick: bool,
        /// Flat key=value config file; CLI flags override its values
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Evaluate a checkpoint over fixed-route trials
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        scenario: u32,
        #[arg(long, value_enum)]
        route: RouteArg,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Write one trajectory CSV per trial
        #[arg(long)]
        log_trajectories: bool,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run the geometric tracking controller over the same trials
    Baseline {
        #[arg(long)]
        scenario: u32,
        #[arg(long, value_enum)]
        route: RouteArg,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn load_config(path: &Option<PathBuf>) -> anyhow::Result<AppConfig> {
    match path {
        Some(p) => AppConfig::from_file(p).with_context(|| format!("reading {}", p.display())),
        None => Ok(AppConfig::default()),
    }
}

fn scenario_from(index: u32) -> anyhow::Result<ScenarioId> {
    ScenarioId::from_index(index).with_context(|| format!("scenario must be 1 or 2, got {index}"))
}

fn print_report(label: &str, r: &harness::EvalReport) {
    println!(
        "{label}: {}/{} successes | t_air {:.2} ± {:.2} s | t_under {:.2} ± {:.2} s | \
         {} collisions ({} riser) | {} timeouts",
        r.successes,
        r.trials,
        r.t_air_mean,
        r.t_air_std,
        r.t_under_mean,
        r.t_under_std,
        r.collisions,
        r.riser_collisions,
        r.timeouts
    );
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Train { scenario, algo, episodes, seed, width, out, quick, config } => {
            let scenario = scenario_from(scenario)?;
            let mut cfg = load_config(&config)?;
            if let Some(e) = episodes {
                cfg.train.episodes = Some(e);
            }
            if let Some(s) = seed {
                cfg.train.seed = s;
            }
            if let Some(w) = width {
                cfg.train.width = w;
            }
            if quick {
                if scenario != ScenarioId::One {
                    bail!("--quick runs scenario 1 only");
                }
                cfg.train.width = 128;
                cfg.train.episodes = Some(300);
            }
            if cfg.train.width < 8 {
                bail!("width must be at least 8, got {}", cfg.train.width);
            }
            let st = TrainSettings::new(&cfg, scenario, algo.into());
            eprintln!(
                "training {} on scenario {} for {} episodes (width {}, seed {}) -> {}",
                st.algo.name(),
                st.scenario.index(),
                st.episodes,
                st.width,
                st.seed,
                out.display()
            );
            let result = harness::train(&cfg, &st, &out)?;
            let last = result.moving_avg.last().copied().unwrap_or(0.0);
            println!(
                "done: {} episodes, final moving average {:.2}, checkpoint {}",
                result.rewards.len(),
                last,
                result.checkpoint.display()
            );
        }
        Command::Eval { checkpoint: ckpt, scenario, route, trials, seed, out, log_trajectories, config } => {
            let scenario = scenario_from(scenario)?;
            let mut cfg = load_config(&config)?;
            if let Some(t) = trials {
                cfg.eval.trials = t;
            }
            let seed = seed.unwrap_or(cfg.train.seed);
            let mut agent = checkpoint::load(&ckpt, &cfg.agent, seed)
                .with_context(|| format!("loading {}", ckpt.display()))?;
            if agent.obs_dim() != OBS_DIM {
                bail!(
                    "checkpoint observation width {} is incompatible with the {OBS_DIM}-value scenario observation",
                    agent.obs_dim()
                );
            }
            let st = EvalSettings {
                scenario,
                route: route.into(),
                trials: cfg.eval.trials,
                seed,
                log_trajectories,
            };
            let label = ckpt.display().to_string();
            let outcome = harness::evaluate(&mut agent, &cfg, &st, &label, Some(&out))?;
            print_report(&format!("eval {}", agent.algo_name()), &outcome.report);
        }
        Command::Baseline { scenario, route, trials, seed, out, config } => {
            let scenario = scenario_from(scenario)?;
            let mut cfg = load_config(&config)?;
            if let Some(t) = trials {
                cfg.eval.trials = t;
            }
            let st = EvalSettings {
                scenario,
                route: route.into(),
                trials: cfg.eval.trials,
                seed: seed.unwrap_or(0),
                log_trajectories: true,
            };
            let outcome = harness::run_baseline(&cfg, &st, Some(&out))?;
            print_report("baseline", &outcome.report);
        }
    }
    Ok(())
}
