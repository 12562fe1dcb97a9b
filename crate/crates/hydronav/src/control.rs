//! Geometric tracking controller on SE(3): thrust from position/velocity
//! errors, torque from the rotation-matrix attitude error. Used directly as
//! the navigation baseline and as the inner loop that turns the agents'
//! velocity commands into thrust and torque.

use crate::dynamics::{RigidBodyState, VehicleParams, GRAVITY};
use crate::math::{vee, Mat3, Rotation, Vec3};

/// Position/velocity/attitude gains, with a scale factor applied underwater
/// (blended by submerged fraction) to fight the much larger drag.
#[derive(Clone, Copy, Debug)]
pub struct ControllerGains {
    pub k_x: f64,
    pub k_v: f64,
    pub k_r: f64,
    pub k_omega: f64,
    pub underwater_scale: f64,
}

impl Default for ControllerGains {
    fn default() -> Self {
        ControllerGains { k_x: 12.0, k_v: 8.0, k_r: 4.0, k_omega: 0.8, underwater_scale: 2.5 }
    }
}

/// Velocity-mode command: forward speed along the commanded heading, vertical
/// speed, and a heading increment. Bounds are enforced by clamping.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VelocityCommand {
    pub v_forward: f64,
    pub v_z: f64,
    pub delta_yaw: f64,
}

impl VelocityCommand {
    pub const V_FORWARD_MAX: f64 = 0.25;
    pub const V_Z_MAX: f64 = 0.25;
    pub const DELTA_YAW_MAX: f64 = 0.25;

    pub fn new(v_forward: f64, v_z: f64, delta_yaw: f64) -> VelocityCommand {
        VelocityCommand {
            v_forward: v_forward.clamp(0.0, Self::V_FORWARD_MAX),
            v_z: v_z.clamp(-Self::V_Z_MAX, Self::V_Z_MAX),
            delta_yaw: delta_yaw.clamp(-Self::DELTA_YAW_MAX, Self::DELTA_YAW_MAX),
        }
    }
}

/// Thrust along body z plus body torque, saturated to actuator limits.
#[derive(Clone, Copy, Debug)]
pub struct ActuatorCommand {
    pub thrust: f64,
    pub torque: Vec3,
}

// Tilt limit for the commanded thrust direction: keeps the attitude target
// sane when the desired force is nearly horizontal (only reachable underwater
// where buoyancy cancels most of the weight).
const MIN_B3_Z: f64 = 0.5;
// Looser tilt limit while the vertical force request is saturated (commanded
// descent): lateral authority costs less climb at high tilt.
const MIN_B3_Z_SINKING: f64 = 0.2588; // cos 75°

/// Controller state: the accumulated heading reference driven by Δyaw
/// commands and the last attitude target (held when the desired force
/// direction degenerates). One instance per simulation.
#[derive(Clone, Copy, Debug)]
pub struct GeometricController {
    gains: ControllerGains,
    yaw_ref: f64,
    last_b3_des: Vec3,
}

impl GeometricController {
    pub fn new(gains: ControllerGains, initial_yaw: f64) -> GeometricController {
        GeometricController { gains, yaw_ref: initial_yaw, last_b3_des: Vec3::UNIT_Z }
    }

    pub fn yaw_ref(&self) -> f64 {
        self.yaw_ref
    }

    /// Fold a Δyaw command into the heading reference (once per agent step).
    pub fn advance_yaw(&mut self, delta_yaw: f64) {
        self.yaw_ref += delta_yaw;
    }

    /// Setpoint mode: drive toward `x_des` with feedforward velocity `v_des`
    /// and heading `yaw_des`.
    pub fn position_control(
        &mut self,
        state: &RigidBodyState,
        x_des: Vec3,
        v_des: Vec3,
        yaw_des: f64,
        params: &VehicleParams,
        f_sub: f64,
    ) -> ActuatorCommand {
        self.control_from_errors(state, state.position - x_des, v_des, yaw_des, params, f_sub)
    }

    /// Velocity mode: track the commanded forward/vertical speed along the
    /// accumulated heading reference. Position error is forced to zero.
    pub fn velocity_control(
        &mut self,
        state: &RigidBodyState,
        cmd: &VelocityCommand,
        params: &VehicleParams,
        f_sub: f64,
    ) -> ActuatorCommand {
        let psi = self.yaw_ref;
        let v_des = Vec3::new(cmd.v_forward * psi.cos(), cmd.v_forward * psi.sin(), cmd.v_z);
        self.control_from_errors(state, Vec3::ZERO, v_des, psi, params, f_sub)
    }

    /// Baseline navigation: chase a carrot point at most 0.5 m ahead on the
    /// straight segment to the goal, holding the current heading.
    pub fn navigate_baseline(
        &mut self,
        state: &RigidBodyState,
        goal: Vec3,
        params: &VehicleParams,
        f_sub: f64,
    ) -> ActuatorCommand {
        const CARROT: f64 = 0.5;
        let to_goal = goal - state.position;
        let x_des = match to_goal.normalized(1e-9) {
            Some(dir) if to_goal.norm() > CARROT => state.position + dir * CARROT,
            _ => goal,
        };
        self.position_control(state, x_des, Vec3::ZERO, state.yaw(), params, f_sub)
    }

    fn control_from_errors(
        &mut self,
        state: &RigidBodyState,
        e_x: Vec3,
        v_des: Vec3,
        yaw_des: f64,
        params: &VehicleParams,
        f_sub: f64,
    ) -> ActuatorCommand {
        let g = &self.gains;
        let scale = 1.0 + f_sub * (g.underwater_scale - 1.0);

        let e_v = state.velocity - v_des;
        let net_weight = (1.0 - f_sub * params.buoyancy_ratio) * params.mass * GRAVITY;
        let mut desired_force =
            -(e_x * (g.k_x * scale)) - (e_v * (g.k_v * scale)) + Vec3::new(0.0, 0.0, net_weight);

        // Thrust can only point along body z, so a downward force request is
        // unachievable: saturate the z-request at zero and keep the lateral
        // components. The vehicle then descends at its natural sink rate
        // while retaining horizontal and attitude authority.
        let sinking = desired_force.z < 1e-6;
        desired_force.z = desired_force.z.max(1e-6);

        let rot = &state.rotation;
        let mut thrust = desired_force.dot(rot.body_z()).clamp(0.0, params.max_thrust);
        if sinking {
            // never regain height while a descent is commanded: the vertical
            // thrust component stays at or below the net weight
            thrust = thrust.min(net_weight / rot.body_z().z.max(MIN_B3_Z_SINKING));
        }

        // Attitude target from the desired force direction, tilt-limited;
        // hold the previous target when the direction degenerates.
        let min_b3_z = if sinking { MIN_B3_Z_SINKING } else { MIN_B3_Z };
        let b3_des = match desired_force.normalized(1e-6) {
            Some(b3) => {
                if b3.z < min_b3_z {
                    let h_scale = (1.0 - min_b3_z * min_b3_z).sqrt() / b3.norm_xy().max(1e-12);
                    Vec3::new(b3.x * h_scale, b3.y * h_scale, min_b3_z)
                } else {
                    b3
                }
            }
            None => self.last_b3_des,
        };
        self.last_b3_des = b3_des;

        let heading = Vec3::new(yaw_des.cos(), yaw_des.sin(), 0.0);
        let b2_des = match b3_des.cross(heading).normalized(1e-9) {
            Some(b2) => b2,
            // heading parallel to b3; fall back to world y rotated by yaw
            None => Vec3::new(-yaw_des.sin(), yaw_des.cos(), 0.0),
        };
        let b1_des = b2_des.cross(b3_des);
        let r_des = Rotation::from_matrix(&Mat3::from_columns(b1_des, b2_des, b3_des));

        // e_R = ½ (R_dᵀ R − Rᵀ R_d)ˇ ; e_Ω = Ω (Ω_d = 0)
        let rd_t_r = r_des.matrix().transpose().mul_mat(rot.matrix());
        let skew = rd_t_r.sub(&rd_t_r.transpose()).scale(0.5);
        let e_r = vee(&skew).expect("attitude error matrix is antisymmetric by construction");
        let e_omega = state.angular_velocity;

        let j_omega = state.angular_velocity.mul_elem(params.inertia);
        let torque_raw = -(e_r * (g.k_r * scale)) - (e_omega * (g.k_omega * scale))
            + state.angular_velocity.cross(j_omega);
        let torque = Vec3::new(
            torque_raw.x.clamp(-params.max_torque, params.max_torque),
            torque_raw.y.clamp(-params.max_torque, params.max_torque),
            torque_raw.z.clamp(-params.max_torque, params.max_torque),
        );

        ActuatorCommand { thrust, torque }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{step_dynamics, submerged_fraction};

    fn hover_state(z: f64) -> RigidBodyState {
        RigidBodyState::at_rest(Vec3::new(0.0, 0.0, z), 0.0)
    }

    #[test]
    fn equilibrium_in_air_commands_weight() {
        let p = VehicleParams::default();
        let mut c = GeometricController::new(ControllerGains::default(), 0.0);
        let s = hover_state(2.5);
        let out = c.position_control(&s, s.position, Vec3::ZERO, 0.0, &p, 0.0);
        assert!((out.thrust - p.weight()).abs() < 1e-9);
        assert!(out.torque.norm() < 1e-12);
    }

    #[test]
    fn equilibrium_submerged_commands_net_weight() {
        let p = VehicleParams::default();
        let mut c = GeometricController::new(ControllerGains::default(), 0.0);
        let s = hover_state(-0.5);
        let out = c.position_control(&s, s.position, Vec3::ZERO, 0.0, &p, 1.0);
        let expected = (1.0 - p.buoyancy_ratio) * p.weight();
        assert!((out.thrust - expected).abs() < 1e-9, "thrust {}", out.thrust);
    }

    #[test]
    fn velocity_command_clamps_to_bounds() {
        let c = VelocityCommand::new(5.0, -3.0, 1.0);
        assert_eq!(c, VelocityCommand { v_forward: 0.25, v_z: -0.25, delta_yaw: 0.25 });
        let c = VelocityCommand::new(-1.0, 0.1, -0.9);
        assert_eq!(c.v_forward, 0.0);
        assert_eq!(c.delta_yaw, -0.25);
    }

    #[test]
    fn velocity_command_resolves_along_heading() {
        // A forward command maps to the world direction of the heading
        // reference: for a vehicle already facing that heading, the request
        // is a pure body-pitch (nose-down) torque, whatever the yaw is.
        let p = VehicleParams::default();
        let cmd = VelocityCommand::new(0.25, 0.0, 0.0);
        for yaw in [0.0, std::f64::consts::FRAC_PI_2, -2.1] {
            let mut c = GeometricController::new(ControllerGains::default(), yaw);
            let s = RigidBodyState::at_rest(Vec3::new(0.0, 0.0, 2.5), yaw);
            let out = c.velocity_control(&s, &cmd, &p, 0.0);
            assert!((out.thrust - p.weight()).abs() < 1e-9);
            assert!(out.torque.y.abs() > 1e-4, "yaw {yaw}: torque {:?}", out.torque);
            assert!(out.torque.x.abs() < 1e-9, "yaw {yaw}: torque {:?}", out.torque);
            assert!(out.torque.z.abs() < 1e-9, "yaw {yaw}: torque {:?}", out.torque);
        }
    }

    #[test]
    fn pure_descent_keeps_lateral_torque_zero() {
        let p = VehicleParams::default();
        let mut c = GeometricController::new(ControllerGains::default(), 0.0);
        let s = hover_state(2.5);
        let cmd = VelocityCommand::new(0.0, -0.25, 0.0);
        let out = c.velocity_control(&s, &cmd, &p, 0.0);
        assert!(out.thrust < p.weight());
        assert!(out.torque.norm() < 1e-9);
    }

    #[test]
    fn hover_drifts_less_than_5cm_over_30s() {
        let p = VehicleParams::default();
        let mut c = GeometricController::new(ControllerGains::default(), 0.0);
        let mut s = hover_state(2.5);
        let cmd = VelocityCommand::new(0.0, 0.0, 0.0);
        for _ in 0..3000 {
            let f = submerged_fraction(s.position.z, p.height);
            let a = c.velocity_control(&s, &cmd, &p, f);
            s = step_dynamics(&s, a.thrust, a.torque, &p, Vec3::ZERO, Vec3::ZERO, 0.01).unwrap();
        }
        let drift = (s.position - Vec3::new(0.0, 0.0, 2.5)).norm();
        assert!(drift < 0.05, "drift {drift}");
    }

    #[test]
    fn forward_step_response_in_still_air() {
        let p = VehicleParams::default();
        let mut c = GeometricController::new(ControllerGains::default(), 0.0);
        let mut s = hover_state(2.5);
        let cmd = VelocityCommand::new(0.25, 0.0, 0.0);
        let mut peak: f64 = 0.0;
        let mut at_3s = 0.0;
        for i in 0..1000 {
            let f = submerged_fraction(s.position.z, p.height);
            let a = c.velocity_control(&s, &cmd, &p, f);
            s = step_dynamics(&s, a.thrust, a.torque, &p, Vec3::ZERO, Vec3::ZERO, 0.01).unwrap();
            peak = peak.max(s.velocity.x);
            if i == 299 {
                at_3s = s.velocity.x;
            }
        }
        assert!(at_3s >= 0.20, "v after 3 s = {at_3s}");
        assert!(peak < 0.25 * 1.5, "overshoot peak {peak}");
    }

    #[test]
    fn yaw_reference_tracking_in_still_air() {
        let p = VehicleParams::default();
        let mut c = GeometricController::new(ControllerGains::default(), 0.0);
        let mut s = hover_state(2.5);
        // accumulate Δyaw = 0.1 every agent step (0.2 s) for 5 s, then hold
        for agent_step in 0..50 {
            let dyaw = if agent_step < 25 { 0.1 } else { 0.0 };
            c.advance_yaw(dyaw);
            let cmd = VelocityCommand::new(0.0, 0.0, dyaw);
            for _ in 0..20 {
                let f = submerged_fraction(s.position.z, p.height);
                let a = c.velocity_control(&s, &cmd, &p, f);
                s = step_dynamics(&s, a.thrust, a.torque, &p, Vec3::ZERO, Vec3::ZERO, 0.01)
                    .unwrap();
            }
            let err = crate::sensing::wrap_angle(s.yaw() - c.yaw_ref());
            assert!(err.abs() < 0.1, "step {agent_step}: yaw err {err}");
        }
        assert!((c.yaw_ref() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn actuator_limits_are_respected() {
        let p = VehicleParams::default();
        let mut c = GeometricController::new(ControllerGains::default(), 0.0);
        let mut s = RigidBodyState::at_rest(Vec3::new(4.0, -4.0, 4.0), 2.0);
        s.angular_velocity = Vec3::new(3.0, -2.0, 5.0);
        let out = c.position_control(&s, Vec3::new(-4.0, 4.0, -1.0), Vec3::ZERO, -1.5, &p, 0.3);
        assert!(out.thrust >= 0.0 && out.thrust <= p.max_thrust);
        assert!(out.torque.x.abs() <= p.max_torque);
        assert!(out.torque.y.abs() <= p.max_torque);
        assert!(out.torque.z.abs() <= p.max_torque);
    }

    #[test]
    fn baseline_carrot_is_clamped_to_half_meter() {
        let p = VehicleParams::default();
        let mut c1 = GeometricController::new(ControllerGains::default(), 0.0);
        let mut c2 = GeometricController::new(ControllerGains::default(), 0.0);
        let s = hover_state(2.5);
        // Goals 10 m and 2 m ahead both clamp the commanded point to 0.5 m,
        // so they produce identical actuator commands.
        let far = c1.navigate_baseline(&s, Vec3::new(10.0, 0.0, 2.5), &p, 0.0);
        let near = c2.navigate_baseline(&s, Vec3::new(2.0, 0.0, 2.5), &p, 0.0);
        assert_eq!(far.thrust, near.thrust);
        assert_eq!(far.torque, near.torque);
        // A goal inside the carrot radius produces a smaller pitch request.
        let mut c3 = GeometricController::new(ControllerGains::default(), 0.0);
        let inside = c3.navigate_baseline(&s, Vec3::new(0.25, 0.0, 2.5), &p, 0.0);
        assert!(inside.torque.y.abs() < far.torque.y.abs());
    }

    #[test]
    fn baseline_at_goal_hovers() {
        let p = VehicleParams::default();
        let mut c = GeometricController::new(ControllerGains::default(), 0.0);
        let s = hover_state(2.5);
        let out = c.navigate_baseline(&s, s.position, &p, 0.0);
        assert!((out.thrust - p.weight()).abs() < 1e-9);
        assert!(out.torque.norm() < 1e-12);
    }

    #[test]
    fn degenerate_force_holds_previous_attitude_target() {
        let p = VehicleParams::default();
        let mut c = GeometricController::new(ControllerGains::default(), 0.0);
        let s = hover_state(-0.5);
        // submerged commanded descent: desired force points down; the
        // z-request saturates to ~zero thrust and the attitude target
        // stays level so the vehicle free-sinks
        let cmd = VelocityCommand::new(0.0, -0.25, 0.0);
        let out = c.velocity_control(&s, &cmd, &p, 1.0);
        assert!(out.thrust < 1e-5);
        assert_eq!(c.last_b3_des, Vec3::UNIT_Z);
        assert!(out.torque.norm() < 1e-12);
    }
}
