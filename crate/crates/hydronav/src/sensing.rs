//! Simulated 20-beam rangefinder over an analytic scene (water tank plus
//! vertical riser obstacles) and assembly of the 26-value observation.

use crate::error::{Error, Result};
use crate::math::Vec3;

/// Number of range beams.
pub const BEAM_COUNT: usize = 20;
/// Angular spacing between beams, degrees.
pub const BEAM_SPACING_DEG: f64 = 13.5;
/// Azimuth of beam 0 relative to the heading, degrees. The 20-beam grid is
/// centered so it spans the sensor's 270° field with uniform 13.5° spacing.
pub const BEAM_START_DEG: f64 = -128.25;
/// Maximum range reading; misses clamp here.
pub const RANGE_MAX: f64 = 10.0;
/// Observation width: 20 ranges + previous action (3) + target terms (3).
pub const OBS_DIM: usize = 26;
/// Distance normalization constant for the observation, meters.
pub const DIST_NORM: f64 = 12.33;

/// Vertical cylinder obstacle spanning the full tank height.
#[derive(Clone, Copy, Debug)]
pub struct Riser {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
}

/// Axis-aligned tank with the water surface at z = 0.
#[derive(Clone, Debug)]
pub struct Scene {
    /// Tank half-width in x and y (walls at ±half_extent).
    pub half_extent: f64,
    pub z_min: f64,
    pub z_max: f64,
    pub water_level: f64,
    pub risers: Vec<Riser>,
}

impl Scene {
    /// 10×10×6 m tank with a one-meter water column (z ∈ [−1, 0]).
    pub fn tank(risers: Vec<Riser>) -> Scene {
        Scene {
            half_extent: 5.0,
            z_min: -1.0,
            z_max: 5.0,
            water_level: 0.0,
            risers,
        }
    }

    pub fn contains(&self, p: Vec3) -> bool {
        p.x.abs() <= self.half_extent
            && p.y.abs() <= self.half_extent
            && p.z >= self.z_min
            && p.z <= self.z_max
    }

    /// Whether the x-y point lies strictly inside some riser.
    pub fn inside_riser(&self, x: f64, y: f64) -> bool {
        self.risers
            .iter()
            .any(|r| (x - r.x).hypot(y - r.y) < r.radius)
    }

    /// Distance from the origin along `direction` (unit vector) to the first
    /// wall plane or riser surface, clamped to [`RANGE_MAX`].
    pub fn raycast(&self, origin: Vec3, direction: Vec3) -> Result<f64> {
        debug_assert!((direction.norm() - 1.0).abs() < 1e-9);
        if !self.contains(origin) {
            return Err(Error::OriginOutsideScene(origin));
        }

        let mut t_hit = f64::INFINITY;

        // Exit point of the box interior: nearest positive plane crossing.
        let axes = [
            (origin.x, direction.x, -self.half_extent, self.half_extent),
            (origin.y, direction.y, -self.half_extent, self.half_extent),
            (origin.z, direction.z, self.z_min, self.z_max),
        ];
        for (o, d, lo, hi) in axes {
            if d > 1e-12 {
                t_hit = t_hit.min((hi - o) / d);
            } else if d < -1e-12 {
                t_hit = t_hit.min((lo - o) / d);
            }
        }

        // Riser lateral surfaces (infinite cylinders clipped to the tank
        // z-span). A ray starting inside a cylinder hits it from within.
        for r in &self.risers {
            let ox = origin.x - r.x;
            let oy = origin.y - r.y;
            let a = direction.x * direction.x + direction.y * direction.y;
            if a < 1e-18 {
                continue; // vertical ray never meets a lateral surface
            }
            let b = 2.0 * (ox * direction.x + oy * direction.y);
            let c = ox * ox + oy * oy - r.radius * r.radius;
            let disc = b * b - 4.0 * a * c;
            if disc < 0.0 {
                continue;
            }
            let sq = disc.sqrt();
            for t in [(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)] {
                if t > 1e-12 && t < t_hit {
                    let z = origin.z + t * direction.z;
                    if z >= self.z_min && z <= self.z_max {
                        t_hit = t_hit.min(t);
                    }
                }
            }
        }

        Ok(t_hit.min(RANGE_MAX))
    }

    /// Cast all beams in the world horizontal plane at the vehicle's height.
    /// Beam k points at world azimuth `yaw + BEAM_START + k·BEAM_SPACING`.
    pub fn scan(&self, position: Vec3, yaw: f64) -> Result<RangeScan> {
        let mut ranges = [0.0; BEAM_COUNT];
        for (k, slot) in ranges.iter_mut().enumerate() {
            let az = yaw + (BEAM_START_DEG + BEAM_SPACING_DEG * k as f64).to_radians();
            let dir = Vec3::new(az.cos(), az.sin(), 0.0);
            *slot = self.raycast(position, dir)?;
        }
        Ok(RangeScan(ranges))
    }
}

/// One full sweep of the rangefinder.
#[derive(Clone, Copy, Debug)]
pub struct RangeScan(pub [f64; BEAM_COUNT]);

impl RangeScan {
    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Target pose relative to the vehicle.
#[derive(Clone, Copy, Debug)]
pub struct TargetInfo {
    /// 3-D Euclidean distance, meters.
    pub distance: f64,
    /// Angle between the heading and the target direction in the x-y plane,
    /// wrapped to (−π, π].
    pub bearing_error: f64,
    /// Angle of the target in the z-vs-horizontal-distance plane.
    pub elevation_angle: f64,
}

/// Wrap an angle to (−π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut w = a.rem_euclid(two_pi);
    if w > std::f64::consts::PI {
        w -= two_pi;
    }
    w
}

/// Distance and relative angles from a vehicle pose to the target. The
/// degenerate case `target == position` reports zero angles by convention.
pub fn relative_target(position: Vec3, yaw: f64, target: Vec3) -> TargetInfo {
    let d = target - position;
    let distance = d.norm();
    let horiz = d.norm_xy();
    if distance < 1e-12 {
        return TargetInfo { distance: 0.0, bearing_error: 0.0, elevation_angle: 0.0 };
    }
    let bearing_error = if horiz < 1e-12 {
        0.0
    } else {
        wrap_angle(d.y.atan2(d.x) - yaw)
    };
    TargetInfo {
        distance,
        bearing_error,
        elevation_angle: d.z.atan2(horiz),
    }
}

/// The 26-value agent input: normalized ranges, the previous raw action,
/// then normalized distance, bearing/π, and elevation/π.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observation(pub [f64; OBS_DIM]);

impl Observation {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

pub fn observe(scan: &RangeScan, prev_action: [f64; 3], target: &TargetInfo) -> Observation {
    let mut o = [0.0; OBS_DIM];
    for (i, r) in scan.0.iter().enumerate() {
        o[i] = r / RANGE_MAX;
    }
    o[20..23].copy_from_slice(&prev_action);
    o[23] = target.distance / DIST_NORM;
    o[24] = target.bearing_error / std::f64::consts::PI;
    o[25] = target.elevation_angle / std::f64::consts::PI;
    Observation(o)
}

/// Scenario 2 riser field: 90°-rotation-symmetric set placed so the straight
/// segment (0,0) → (3.6,−2.4) passes through the riser at (1.8,−1.2).
pub fn scenario2_risers() -> Vec<Riser> {
    [(1.8, -1.2), (-1.8, 1.2), (1.2, 1.8), (-1.2, -1.8)]
        .into_iter()
        .map(|(x, y)| Riser { x, y, radius: 0.35 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn empty_tank() -> Scene {
        Scene::tank(Vec::new())
    }

    #[test]
    fn raycast_hits_wall_from_center() {
        let s = empty_tank();
        let d = s.raycast(Vec3::new(0.0, 0.0, 2.5), Vec3::new(1.0, 0.0, 0.0)).unwrap();
        assert!((d - 5.0).abs() < 1e-12);
    }

    #[test]
    fn raycast_hits_riser_straight_on() {
        let s = Scene::tank(scenario2_risers());
        let d = s.raycast(Vec3::new(0.0, -1.2, 2.5), Vec3::new(1.0, 0.0, 0.0)).unwrap();
        assert!((d - 1.45).abs() < 1e-12, "got {d}");
    }

    #[test]
    fn raycast_near_wall_boundary() {
        let s = empty_tank();
        let d = s.raycast(Vec3::new(4.99, 0.0, 2.5), Vec3::new(1.0, 0.0, 0.0)).unwrap();
        assert!((d - 0.01).abs() < 1e-12);
    }

    #[test]
    fn raycast_clamps_to_max_range() {
        let mut s = empty_tank();
        s.half_extent = 50.0;
        let d = s.raycast(Vec3::new(0.0, 0.0, 2.5), Vec3::new(1.0, 0.0, 0.0)).unwrap();
        assert_eq!(d, RANGE_MAX);
    }

    #[test]
    fn raycast_rejects_outside_origin() {
        let s = empty_tank();
        let r = s.raycast(Vec3::new(6.0, 0.0, 2.5), Vec3::new(1.0, 0.0, 0.0));
        assert!(matches!(r, Err(Error::OriginOutsideScene(_))));
    }

    #[test]
    fn raycast_from_inside_riser_sees_surface_close() {
        let s = Scene::tank(scenario2_risers());
        let d = s.raycast(Vec3::new(1.8, -1.2, 2.5), Vec3::new(1.0, 0.0, 0.0)).unwrap();
        assert!((d - 0.35).abs() < 1e-12);
    }

    #[test]
    fn scan_center_beams_match_plane_geometry() {
        let s = empty_tank();
        let scan = s.scan(Vec3::new(0.0, 0.0, 2.5), 0.0).unwrap();
        let expected = 5.0 / 6.75f64.to_radians().cos();
        assert!((scan.0[9] - expected).abs() < 1e-9, "beam 9: {}", scan.0[9]);
        assert!((scan.0[10] - expected).abs() < 1e-9, "beam 10: {}", scan.0[10]);
    }

    #[test]
    fn scan_is_clamped_everywhere() {
        let s = Scene::tank(scenario2_risers());
        let scan = s.scan(Vec3::new(2.0, 1.0, -0.5), 1.3).unwrap();
        assert!(scan.0.iter().all(|&r| r > 0.0 && r <= RANGE_MAX));
    }

    #[test]
    fn scan_commutes_with_quarter_turn_of_the_world() {
        // The tank and the scenario-2 riser set are invariant under 90°
        // rotation about the z axis, so rotating the vehicle pose by 90°
        // must permute nothing: beam k sees the same geometry.
        let s = Scene::tank(scenario2_risers());
        let mut rng = crate::math::Rng::seeded(11);
        let mut tested = 0;
        while tested < 200 {
            let p = Vec3::new(
                rng.uniform_in(-4.5, 4.5),
                rng.uniform_in(-4.5, 4.5),
                rng.uniform_in(-0.9, 4.9),
            );
            if s.inside_riser(p.x, p.y) {
                continue;
            }
            let yaw = rng.uniform_in(-3.0, 3.0);
            let rotated = Vec3::new(-p.y, p.x, p.z);
            let a = s.scan(p, yaw).unwrap();
            let b = s.scan(rotated, yaw + std::f64::consts::FRAC_PI_2).unwrap();
            for k in 0..BEAM_COUNT {
                assert!(
                    (a.0[k] - b.0[k]).abs() < 1e-9,
                    "beam {k}: {} vs {}",
                    a.0[k],
                    b.0[k]
                );
            }
            tested += 1;
        }
    }

    #[test]
    fn relative_target_reference_values() {
        let t = relative_target(Vec3::new(0.0, 0.0, 2.5), 0.0, Vec3::new(2.0, 3.0, -1.0));
        assert!((t.distance - 25.25f64.sqrt()).abs() < 1e-12);
        assert!((t.bearing_error - 3.0f64.atan2(2.0)).abs() < 1e-12);
        assert!((t.elevation_angle - (-3.5f64).atan2(13.0f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn target_dead_ahead_has_zero_angles() {
        let t = relative_target(Vec3::new(1.0, 1.0, 2.0), 0.3, Vec3::new(1.0 + 2.0 * 0.3f64.cos(), 1.0 + 2.0 * 0.3f64.sin(), 2.0));
        assert!(t.bearing_error.abs() < 1e-12);
        assert!(t.elevation_angle.abs() < 1e-12);
    }

    #[test]
    fn degenerate_target_uses_zero_convention() {
        let p = Vec3::new(1.0, -2.0, 0.5);
        let t = relative_target(p, 1.0, p);
        assert_eq!((t.distance, t.bearing_error, t.elevation_angle), (0.0, 0.0, 0.0));
    }

    #[test]
    fn bearing_is_odd_under_target_mirror() {
        // Reflecting the target across the heading axis negates the bearing.
        let pos = Vec3::new(0.5, -0.5, 2.0);
        let yaw = 0.77_f64;
        let mut rng = crate::math::Rng::seeded(5);
        for _ in 0..100 {
            let fwd = rng.uniform_in(0.5, 4.0);
            let side = rng.uniform_in(-3.0, 3.0);
            let dz = rng.uniform_in(-2.0, 2.0);
            let (s, c) = yaw.sin_cos();
            let t_plus = Vec3::new(pos.x + fwd * c - side * s, pos.y + fwd * s + side * c, pos.z + dz);
            let t_minus = Vec3::new(pos.x + fwd * c + side * s, pos.y + fwd * s - side * c, pos.z + dz);
            let a = relative_target(pos, yaw, t_plus);
            let b = relative_target(pos, yaw, t_minus);
            assert!((a.bearing_error + b.bearing_error).abs() < 1e-9);
            assert!((a.elevation_angle - b.elevation_angle).abs() < 1e-9);
        }
    }

    #[test]
    fn observation_layout_and_reference_entries() {
        let s = empty_tank();
        let scan = s.scan(Vec3::new(0.0, 0.0, 2.5), 0.0).unwrap();
        let t = relative_target(Vec3::new(0.0, 0.0, 2.5), 0.0, Vec3::new(2.0, 3.0, -1.0));
        let obs = observe(&scan, [0.0, 0.0, 0.0], &t);
        assert_eq!(obs.0.len(), OBS_DIM);
        assert!(obs.0.iter().all(|v| v.is_finite()));
        assert!(obs.0[..20].iter().all(|&r| r > 0.0 && r <= 1.0));
        assert_eq!(&obs.0[20..23], &[0.0, 0.0, 0.0]);
        // √25.25 / 12.33 = 0.40754, atan2(3,2)/π = 0.31283,
        // atan2(−3.5, √13)/π = −0.24527
        assert!((obs.0[23] - 0.40754).abs() < 5e-5);
        assert!((obs.0[24] - 0.31283).abs() < 5e-5);
        assert!((obs.0[25] + 0.24527).abs() < 5e-5);
    }

    proptest::proptest! {
        #[test]
        fn wrap_angle_lands_in_the_half_open_interval(a in -50.0..50.0f64) {
            let w = wrap_angle(a);
            proptest::prop_assert!(w > -std::f64::consts::PI && w <= std::f64::consts::PI);
            // same angle modulo 2π
            let diff = (a - w) / (2.0 * std::f64::consts::PI);
            proptest::prop_assert!((diff - diff.round()).abs() < 1e-9);
        }

        #[test]
        fn observations_are_finite_inside_the_tank(
            x in -4.9..4.9f64, y in -4.9..4.9f64, z in -0.9..4.9f64, yaw in -4.0..4.0f64,
            tx in -4.5..4.5f64, ty in -4.5..4.5f64, tz in -0.5..4.5f64,
        ) {
            let scene = Scene::tank(scenario2_risers());
            proptest::prop_assume!(!scene.inside_riser(x, y));
            let scan = scene.scan(Vec3::new(x, y, z), yaw).unwrap();
            let info = relative_target(Vec3::new(x, y, z), yaw, Vec3::new(tx, ty, tz));
            let obs = observe(&scan, [0.1, -0.5, 0.9], &info);
            proptest::prop_assert!(obs.0.iter().all(|v| v.is_finite()));
            proptest::prop_assert!(obs.0[..20].iter().all(|&r| r > 0.0 && r <= 1.0));
            proptest::prop_assert!(obs.0[23] >= 0.0);
        }
    }

    #[test]
    fn all_miss_scan_normalizes_to_ones() {
        let mut s = empty_tank();
        s.half_extent = 100.0;
        s.z_max = 100.0;
        let scan = s.scan(Vec3::new(0.0, 0.0, 50.0), 0.0).unwrap();
        let t = relative_target(Vec3::ZERO, 0.0, Vec3::new(1.0, 0.0, 0.0));
        let obs = observe(&scan, [0.1, -0.2, 0.3], &t);
        assert!(obs.0[..20].iter().all(|&r| r == 1.0));
    }
}
