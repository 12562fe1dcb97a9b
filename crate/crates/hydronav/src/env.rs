//! Episode engine: scenario setup, action scaling, physics stepping through
//! the inner velocity controller, the two-case reward, target (re)spawning,
//! and termination.

use crate::control::{ActuatorCommand, ControllerGains, GeometricController, VelocityCommand};
use crate::dynamics::{step_dynamics, submerged_fraction, RigidBodyState, VehicleParams};
use crate::math::{OuProcess3, Rng, Stream, Vec3};
use crate::sensing::{observe, relative_target, scenario2_risers, Observation, Scene};

/// Which water-tank layout to simulate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScenarioId {
    /// Empty tank; walls are the only obstacles.
    One,
    /// Tank plus four fixed drilling-riser cylinders.
    Two,
}

impl ScenarioId {
    pub fn from_index(i: u32) -> Option<ScenarioId> {
        match i {
            1 => Some(ScenarioId::One),
            2 => Some(ScenarioId::Two),
            _ => None,
        }
    }

    pub fn index(self) -> u32 {
        match self {
            ScenarioId::One => 1,
            ScenarioId::Two => 2,
        }
    }

    pub fn scene(self) -> Scene {
        match self {
            ScenarioId::One => Scene::tank(Vec::new()),
            ScenarioId::Two => Scene::tank(scenario2_risers()),
        }
    }

    /// The fixed water-side endpoint of the evaluation route.
    fn water_point(self) -> Vec3 {
        match self {
            ScenarioId::One => Vec3::new(2.0, 3.0, -1.0),
            ScenarioId::Two => Vec3::new(3.6, -2.4, -1.0),
        }
    }

    /// The fixed air-side endpoint (also the training start pose).
    fn air_point(self) -> Vec3 {
        Vec3::new(0.0, 0.0, 2.5)
    }
}

/// Fixed start/target pair for evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RouteId {
    AirToWater,
    WaterToAir,
}

impl RouteId {
    pub fn start(self, scenario: ScenarioId) -> Vec3 {
        match self {
            RouteId::AirToWater => scenario.air_point(),
            RouteId::WaterToAir => scenario.water_point(),
        }
    }

    pub fn target(self, scenario: ScenarioId) -> Vec3 {
        match self {
            RouteId::AirToWater => scenario.water_point(),
            RouteId::WaterToAir => scenario.air_point(),
        }
    }
}

/// Episode constants: margins and rewards of the two-case reward function,
/// the step cap, and the control timing.
#[derive(Clone, Copy, Debug)]
pub struct EpisodeConfig {
    pub max_steps: usize,
    /// Arrival margin, m.
    pub c_d: f64,
    /// Collision margin on the minimum range reading, m.
    pub c_o: f64,
    pub r_arrive: f64,
    pub r_collide: f64,
    /// Wall-clock period of one agent action, s.
    pub agent_period: f64,
    /// Inner physics step, s.
    pub physics_dt: f64,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        EpisodeConfig {
            max_steps: 500,
            c_d: 0.25,
            c_o: 0.5,
            r_arrive: 100.0,
            r_collide: -10.0,
            agent_period: 0.2,
            physics_dt: 0.01,
        }
    }
}

impl EpisodeConfig {
    pub fn substeps(&self) -> usize {
        (self.agent_period / self.physics_dt).round() as usize
    }
}

/// Wind (above surface) and current (below) disturbance processes, per axis.
#[derive(Clone, Copy, Debug)]
pub struct DisturbanceParams {
    pub wind_theta: f64,
    pub wind_sigma: f64,
    pub current_theta: f64,
    pub current_sigma: f64,
}

impl Default for DisturbanceParams {
    fn default() -> Self {
        // Current sigma sits well below the 2%-weight sink authority:
        // vertical flow gusts must not overpower the vehicle's only means
        // of descending (passive sinking).
        DisturbanceParams {
            wind_theta: 0.5,
            wind_sigma: 0.3,
            current_theta: 0.5,
            current_sigma: 0.02,
        }
    }
}

/// Everything needed to build identical simulations.
#[derive(Clone, Debug)]
pub struct SimSetup {
    pub params: VehicleParams,
    pub gains: ControllerGains,
    pub episode: EpisodeConfig,
    pub disturbance: DisturbanceParams,
    /// Riser field used when building scenario 2.
    pub scenario2_risers: Vec<crate::sensing::Riser>,
}

impl Default for SimSetup {
    fn default() -> Self {
        SimSetup {
            params: VehicleParams::default(),
            gains: ControllerGains::default(),
            episode: EpisodeConfig::default(),
            disturbance: DisturbanceParams::default(),
            scenario2_risers: scenario2_risers(),
        }
    }
}

/// What ended (or didn't end) an agent step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepEvent {
    None,
    /// Target reached. Does not terminate a training episode; evaluation
    /// stops the trial as a success.
    Arrived,
    Collided,
    StepCap,
    /// Simulation diverged; the episode is aborted.
    OutOfBounds,
}

/// Result of one agent step.
#[derive(Clone, Copy, Debug)]
pub struct StepOutcome {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub event: StepEvent,
}

/// Two-case reward: arrive bonus inside the `c_d` ball, collision penalty
/// when the closest range reading is inside `c_o` (collision wins when both
/// hold), zero otherwise.
pub fn reward(d_t: f64, min_range: f64, cfg: &EpisodeConfig) -> (f64, StepEvent) {
    if min_range < cfg.c_o {
        (cfg.r_collide, StepEvent::Collided)
    } else if d_t < cfg.c_d {
        (cfg.r_arrive, StepEvent::Arrived)
    } else {
        (0.0, StepEvent::None)
    }
}

/// Map a raw network action in [−1,1]³ onto the commanded velocity bounds:
/// forward 0..0.25 m/s, vertical ±0.25 m/s, Δyaw ±0.25 rad.
pub fn scale_action(raw: [f64; 3]) -> VelocityCommand {
    let r: [f64; 3] = std::array::from_fn(|i| raw[i].clamp(-1.0, 1.0));
    VelocityCommand::new(0.125 * (r[0] + 1.0), 0.25 * r[1], 0.25 * r[2])
}

// Vertical clearance from floor/ceiling below which contact (while moving
// into the surface) counts as a collision; the planar sensor cannot see it.
const CONTACT_MARGIN: f64 = 0.05;

/// One episode's worth of simulation state.
pub struct Environment {
    scene: Scene,
    setup: SimSetup,
    pub(crate) state: RigidBodyState,
    controller: GeometricController,
    pub(crate) target: Vec3,
    prev_action: [f64; 3],
    steps: usize,
    finished: bool,
    wind: OuProcess3,
    current: OuProcess3,
    rng_physics: Rng,
    rng_targets: Rng,
    last_observation: Observation,
    last_min_range: f64,
    last_target_distance: f64,
}

impl Environment {
    /// Training instance: random targets, sub-streams split off `seed`.
    pub fn training(scenario: ScenarioId, setup: SimSetup, seed: u64) -> Environment {
        let rng_physics = Rng::substream(seed, Stream::Physics);
        let rng_targets = Rng::substream(seed, Stream::Targets);
        let mut env = Self::build(scenario, setup, rng_physics, rng_targets);
        env.reset_training();
        env
    }

    /// Evaluation instance for one trial of a fixed route.
    pub fn evaluation(
        scenario: ScenarioId,
        setup: SimSetup,
        route: RouteId,
        seed: u64,
        trial: u64,
    ) -> Environment {
        let rng_physics = Rng::substream(seed, Stream::Trial(trial));
        let rng_targets = Rng::substream(seed, Stream::Targets);
        let mut env = Self::build(scenario, setup, rng_physics, rng_targets);
        env.reset_route(route);
        env
    }

    fn build(
        scenario: ScenarioId,
        setup: SimSetup,
        rng_physics: Rng,
        rng_targets: Rng,
    ) -> Environment {
        let dt = setup.episode.physics_dt;
        let d = setup.disturbance;
        let wind = OuProcess3::new(d.wind_theta, d.wind_sigma, 0.0, dt)
            .expect("wind OU parameters are validated by construction");
        let current = OuProcess3::new(d.current_theta, d.current_sigma, 0.0, dt)
            .expect("current OU parameters are validated by construction");
        let scene = match scenario {
            ScenarioId::One => Scene::tank(Vec::new()),
            ScenarioId::Two => Scene::tank(setup.scenario2_risers.clone()),
        };
        Environment {
            scene,
            state: RigidBodyState::at_rest(scenario.air_point(), 0.0),
            controller: GeometricController::new(setup.gains, 0.0),
            setup,
            target: Vec3::ZERO,
            prev_action: [0.0; 3],
            steps: 0,
            finished: false,
            wind,
            current,
            rng_physics,
            rng_targets,
            last_observation: Observation([0.0; crate::sensing::OBS_DIM]),
            last_min_range: f64::INFINITY,
            last_target_distance: f64::INFINITY,
        }
    }

    /// Start a training episode: fixed start pose, fresh random target.
    pub fn reset_training(&mut self) -> Observation {
        let start = self.scenario_id().air_point();
        let target = self.sample_target();
        self.reset_with(start, target)
    }

    /// Start an evaluation trial on the fixed route.
    pub fn reset_route(&mut self, route: RouteId) -> Observation {
        let scenario = self.scenario_id();
        self.reset_with(route.start(scenario), route.target(scenario))
    }

    fn reset_with(&mut self, start: Vec3, target: Vec3) -> Observation {
        self.state = RigidBodyState::at_rest(start, 0.0);
        self.controller = GeometricController::new(self.setup.gains, 0.0);
        self.target = target;
        self.prev_action = [0.0; 3];
        self.steps = 0;
        self.finished = false;
        self.wind.reset(0.0);
        self.current.reset(0.0);
        let scan = self
            .scene
            .scan(self.state.position, self.state.yaw())
            .expect("start pose lies inside the tank");
        let info = relative_target(self.state.position, self.state.yaw(), self.target);
        self.last_min_range = scan.min();
        self.last_target_distance = info.distance;
        self.last_observation = observe(&scan, [0.0; 3], &info);
        self.last_observation
    }

    fn scenario_id(&self) -> ScenarioId {
        if self.scene.risers.is_empty() {
            ScenarioId::One
        } else {
            ScenarioId::Two
        }
    }

    /// Uniform over the tank shrunk by 0.5 m per face, rejecting points
    /// within (riser radius + 0.5 m) of any riser axis.
    pub fn sample_target(&mut self) -> Vec3 {
        const MARGIN: f64 = 0.5;
        let he = self.scene.half_extent - MARGIN;
        let z_lo = self.scene.z_min + MARGIN;
        let z_hi = self.scene.z_max - MARGIN;
        loop {
            let p = Vec3::new(
                self.rng_targets.uniform_in(-he, he),
                self.rng_targets.uniform_in(-he, he),
                self.rng_targets.uniform_in(z_lo, z_hi),
            );
            let clear = self
                .scene
                .risers
                .iter()
                .all(|r| (p.x - r.x).hypot(p.y - r.y) >= r.radius + MARGIN);
            if clear {
                return p;
            }
        }
    }

    /// Advance one agent step driven by a raw policy action.
    pub fn step(&mut self, raw_action: [f64; 3]) -> StepOutcome {
        debug_assert!(!self.finished, "step on a finished episode");
        let raw: [f64; 3] = std::array::from_fn(|i| raw_action[i].clamp(-1.0, 1.0));
        let cmd = scale_action(raw);
        self.controller.advance_yaw(cmd.delta_yaw);
        let diverged = self.run_substeps(|ctl, state, params, f_sub| {
            ctl.velocity_control(state, &cmd, params, f_sub)
        });
        self.conclude(raw, diverged)
    }

    /// Advance one agent step under the baseline geometric navigation law.
    pub fn step_baseline(&mut self) -> StepOutcome {
        debug_assert!(!self.finished, "step on a finished episode");
        let goal = self.target;
        let diverged = self.run_substeps(|ctl, state, params, f_sub| {
            ctl.navigate_baseline(state, goal, params, f_sub)
        });
        self.conclude([0.0; 3], diverged)
    }

    fn run_substeps(
        &mut self,
        mut actuate: impl FnMut(
            &mut GeometricController,
            &RigidBodyState,
            &VehicleParams,
            f64,
        ) -> ActuatorCommand,
    ) -> bool {
        let params = self.setup.params;
        let dt = self.setup.episode.physics_dt;
        for _ in 0..self.setup.episode.substeps() {
            let wind = self.wind.step_vec(&mut self.rng_physics);
            let current = self.current.step_vec(&mut self.rng_physics);
            let f_sub = submerged_fraction(self.state.position.z, params.height);
            let cmd = actuate(&mut self.controller, &self.state, &params, f_sub);
            match step_dynamics(&self.state, cmd.thrust, cmd.torque, &params, wind, current, dt) {
                Ok(next) => self.state = next,
                Err(_) => return true,
            }
        }
        false
    }

    fn conclude(&mut self, raw_action: [f64; 3], diverged: bool) -> StepOutcome {
        self.steps += 1;
        let cfg = self.setup.episode;

        if diverged {
            self.finished = true;
            return StepOutcome {
                observation: self.last_observation,
                reward: cfg.r_collide,
                done: true,
                event: StepEvent::OutOfBounds,
            };
        }

        // Floor/ceiling contact and leaving the tank count as collisions:
        // the planar sensor cannot see those surfaces.
        let p = self.state.position;
        let v = self.state.velocity;
        let escaped = !self.scene.contains(p);
        let floor = p.z <= self.scene.z_min + CONTACT_MARGIN && v.z < 0.0;
        let ceiling = p.z >= self.scene.z_max - CONTACT_MARGIN && v.z > 0.0;
        if escaped || floor || ceiling {
            self.finished = true;
            let observation = if escaped {
                self.last_observation
            } else {
                self.refresh_observation(raw_action)
            };
            self.prev_action = raw_action;
            return StepOutcome {
                observation,
                reward: cfg.r_collide,
                done: true,
                event: StepEvent::Collided,
            };
        }

        let scan = self
            .scene
            .scan(p, self.state.yaw())
            .expect("containment was checked above");
        let mut info = relative_target(p, self.state.yaw(), self.target);
        self.last_min_range = scan.min();

        let (mut step_reward, mut event) = reward(info.distance, scan.min(), &cfg);
        let mut done = matches!(event, StepEvent::Collided);

        if event == StepEvent::Arrived {
            // A new target spawns during the same episode; the returned
            // observation already refers to it.
            self.target = self.sample_target();
            info = relative_target(p, self.state.yaw(), self.target);
        } else if event == StepEvent::None && self.steps >= cfg.max_steps {
            event = StepEvent::StepCap;
            step_reward = 0.0;
            done = true;
        }

        self.last_target_distance = info.distance;
        self.finished = done || self.steps >= cfg.max_steps;
        self.prev_action = raw_action;
        self.last_observation = observe(&scan, raw_action, &info);
        StepOutcome {
            observation: self.last_observation,
            reward: step_reward,
            done,
            event,
        }
    }

    fn refresh_observation(&mut self, raw_action: [f64; 3]) -> Observation {
        match self.scene.scan(self.state.position, self.state.yaw()) {
            Ok(scan) => {
                let info = relative_target(self.state.position, self.state.yaw(), self.target);
                self.last_min_range = scan.min();
                self.last_target_distance = info.distance;
                self.last_observation = observe(&scan, raw_action, &info);
                self.last_observation
            }
            Err(_) => self.last_observation,
        }
    }

    pub fn state(&self) -> &RigidBodyState {
        &self.state
    }

    /// The most recent observation (the reset observation before any step).
    pub fn observation(&self) -> Observation {
        self.last_observation
    }

    pub fn target(&self) -> Vec3 {
        self.target
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// True once the episode can take no further step (any terminal event,
    /// including arrival on the very last allowed step).
    pub fn finished(&self) -> bool {
        self.finished
    }

    pub fn submerged(&self) -> f64 {
        submerged_fraction(self.state.position.z, self.setup.params.height)
    }

    pub fn last_min_range(&self) -> f64 {
        self.last_min_range
    }

    pub fn last_target_distance(&self) -> f64 {
        self.last_target_distance
    }

    pub fn setup(&self) -> &SimSetup {
        &self.setup
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }
}
