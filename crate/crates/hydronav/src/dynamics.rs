//! 6-DOF rigid-body simulation with medium-dependent forces: gravity, slight
//! negative buoyancy when submerged, blended linear+quadratic drag, added
//! mass underwater, and wind/current disturbance via relative velocity.

use crate::error::{Error, Result};
use crate::math::{exp_so3, Rotation, Vec3};

pub const GRAVITY: f64 = 9.81;
pub const RHO_AIR: f64 = 1.2;
pub const RHO_WATER: f64 = 1000.0;

/// Pose and velocities of the vehicle. Position/velocity are world-frame
/// (z up, water surface at z = 0); angular velocity is body-frame.
#[derive(Clone, Copy, Debug)]
pub struct RigidBodyState {
    pub position: Vec3,
    pub velocity: Vec3,
    pub rotation: Rotation,
    pub angular_velocity: Vec3,
}

impl RigidBodyState {
    pub fn at_rest(position: Vec3, yaw: f64) -> RigidBodyState {
        RigidBodyState {
            position,
            velocity: Vec3::ZERO,
            rotation: Rotation::from_yaw(yaw),
            angular_velocity: Vec3::ZERO,
        }
    }

    pub fn yaw(&self) -> f64 {
        self.rotation.yaw()
    }

    pub fn is_finite(&self) -> bool {
        self.position.is_finite()
            && self.velocity.is_finite()
            && self.rotation.matrix().is_finite()
            && self.angular_velocity.is_finite()
    }
}

/// Physical constants of the vehicle and its interaction with both media.
#[derive(Clone, Copy, Debug)]
pub struct VehicleParams {
    pub mass: f64,
    /// Diagonal inertia, kg·m².
    pub inertia: Vec3,
    /// Body height used for the surface-crossing blend, m.
    pub height: f64,
    /// Buoyancy at full submersion as a fraction of weight. Slightly below
    /// one so the vehicle sinks without thrust.
    pub buoyancy_ratio: f64,
    pub air_drag_lin: f64,
    pub air_drag_quad: f64,
    pub water_drag_lin: f64,
    pub water_drag_quad: f64,
    /// Rotational drag coefficients, N·m·s.
    pub air_rot_drag: f64,
    pub water_rot_drag: f64,
    /// Effective-mass multiplier at full submersion (entrained water).
    pub added_mass_factor: f64,
    pub max_thrust: f64,
    pub max_torque: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        VehicleParams {
            mass: 3.0,
            inertia: Vec3::new(0.03, 0.03, 0.05),
            height: 0.30,
            buoyancy_ratio: 0.98,
            air_drag_lin: 0.3,
            air_drag_quad: 0.1,
            water_drag_lin: 15.0,
            water_drag_quad: 30.0,
            air_rot_drag: 0.02,
            water_rot_drag: 1.0,
            added_mass_factor: 1.5,
            max_thrust: 60.0,
            max_torque: 2.0,
        }
    }
}

impl VehicleParams {
    pub fn weight(&self) -> f64 {
        self.mass * GRAVITY
    }

    /// Volume displaced at full submersion, consistent with the buoyancy ratio.
    pub fn displaced_volume(&self) -> f64 {
        self.buoyancy_ratio * self.mass / RHO_WATER
    }
}

/// Fraction of the body below the water surface: 1 when the body center is
/// half a height under, 0 half a height above, linear in between.
pub fn submerged_fraction(z_center: f64, height: f64) -> f64 {
    ((height / 2.0 - z_center) / height).clamp(0.0, 1.0)
}

/// Medium properties blended by the submerged fraction.
#[derive(Clone, Copy, Debug)]
pub struct MediumSample {
    pub submerged_fraction: f64,
    pub density: f64,
    pub drag_lin: f64,
    pub drag_quad: f64,
    pub rot_drag: f64,
}

pub fn medium_at(params: &VehicleParams, z_center: f64) -> MediumSample {
    let f = submerged_fraction(z_center, params.height);
    let blend = |air: f64, water: f64| air + f * (water - air);
    MediumSample {
        submerged_fraction: f,
        density: blend(RHO_AIR, RHO_WATER),
        drag_lin: blend(params.air_drag_lin, params.water_drag_lin),
        drag_quad: blend(params.air_drag_quad, params.water_drag_quad),
        rot_drag: blend(params.air_rot_drag, params.water_rot_drag),
    }
}

/// Force (world frame) and torque (body frame) acting on the vehicle.
#[derive(Clone, Copy, Debug)]
pub struct Wrench {
    pub force: Vec3,
    pub torque: Vec3,
}

/// Gravity, buoyancy, and drag against the local flow. Wind only acts above
/// the surface, current only below, weighted by the submerged fraction.
pub fn ambient_wrench(
    state: &RigidBodyState,
    params: &VehicleParams,
    wind: Vec3,
    current: Vec3,
) -> Wrench {
    let medium = medium_at(params, state.position.z);
    let f = medium.submerged_fraction;

    let gravity = Vec3::new(0.0, 0.0, -params.weight());
    let buoyancy = Vec3::new(0.0, 0.0, f * params.buoyancy_ratio * params.weight());

    let v_rel = state.velocity - wind * (1.0 - f) - current * f;
    let drag = -(v_rel * medium.drag_lin + v_rel * (medium.drag_quad * v_rel.norm()));

    Wrench {
        force: gravity + buoyancy + drag,
        torque: -state.angular_velocity * medium.rot_drag,
    }
}

/// One semi-implicit Euler step. `thrust` acts along the body z-axis;
/// `torque` is body-frame. Returns an error when the state stops being
/// finite, which the caller treats as a diverged (aborted) episode.
pub fn step_dynamics(
    state: &RigidBodyState,
    thrust: f64,
    torque: Vec3,
    params: &VehicleParams,
    wind: Vec3,
    current: Vec3,
    dt: f64,
) -> Result<RigidBodyState> {
    debug_assert!(dt > 0.0 && dt <= 0.05);
    debug_assert!((0.0..=params.max_thrust).contains(&thrust));

    let medium = medium_at(params, state.position.z);
    let ambient = ambient_wrench(state, params, wind, current);

    let force = state.rotation.body_z() * thrust + ambient.force;
    let effective_mass =
        params.mass * (1.0 + medium.submerged_fraction * (params.added_mass_factor - 1.0));
    let accel = force / effective_mass;

    let velocity = state.velocity + accel * dt;
    let position = state.position + velocity * dt;

    let inertia = params.inertia;
    let omega = state.angular_velocity;
    let j_omega = omega.mul_elem(inertia);
    let torque_total = torque - omega.cross(j_omega) + ambient.torque;
    let omega_dot = Vec3::new(
        torque_total.x / inertia.x,
        torque_total.y / inertia.y,
        torque_total.z / inertia.z,
    );
    let angular_velocity = omega + omega_dot * dt;
    let rotation = state.rotation.compose(&exp_so3(angular_velocity * dt));

    let next = RigidBodyState { position, velocity, rotation, angular_velocity };
    if next.is_finite() {
        Ok(next)
    } else {
        Err(Error::SimulationDiverged)
    }
}
