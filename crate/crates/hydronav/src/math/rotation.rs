use super::Vec3;
use crate::error::{Error, Result};

/// Row-major 3×3 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat3 {
    pub m: [[f64; 3]; 3],
}

impl Mat3 {
    pub const ZERO: Mat3 = Mat3 { m: [[0.0; 3]; 3] };

    pub fn identity() -> Mat3 {
        Mat3::from_diagonal(Vec3::new(1.0, 1.0, 1.0))
    }

    pub fn from_diagonal(d: Vec3) -> Mat3 {
        let mut m = [[0.0; 3]; 3];
        m[0][0] = d.x;
        m[1][1] = d.y;
        m[2][2] = d.z;
        Mat3 { m }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(c0: Vec3, c1: Vec3, c2: Vec3) -> Mat3 {
        Mat3 {
            m: [[c0.x, c1.x, c2.x], [c0.y, c1.y, c2.y], [c0.z, c1.z, c2.z]],
        }
    }

    pub fn column(&self, j: usize) -> Vec3 {
        Vec3::new(self.m[0][j], self.m[1][j], self.m[2][j])
    }

    pub fn transpose(&self) -> Mat3 {
        let m = &self.m;
        Mat3 {
            m: [
                [m[0][0], m[1][0], m[2][0]],
                [m[0][1], m[1][1], m[2][1]],
                [m[0][2], m[1][2], m[2][2]],
            ],
        }
    }

    pub fn mul_vec(&self, v: Vec3) -> Vec3 {
        let m = &self.m;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    pub fn mul_mat(&self, o: &Mat3) -> Mat3 {
        let mut r = [[0.0; 3]; 3];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.m[i][k] * o.m[k][j]).sum();
            }
        }
        Mat3 { m: r }
    }

    pub fn sub(&self, o: &Mat3) -> Mat3 {
        let mut r = [[0.0; 3]; 3];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = self.m[i][j] - o.m[i][j];
            }
        }
        Mat3 { m: r }
    }

    pub fn scale(&self, s: f64) -> Mat3 {
        let mut r = self.m;
        for row in &mut r {
            for cell in row {
                *cell *= s;
            }
        }
        Mat3 { m: r }
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|x| x.is_finite())
    }
}

/// Skew-symmetric matrix of `v`, so that `hat(v) * w == v × w`.
pub fn hat(v: Vec3) -> Mat3 {
    Mat3 {
        m: [[0.0, -v.z, v.y], [v.z, 0.0, -v.x], [-v.y, v.x, 0.0]],
    }
}

/// Inverse of [`hat`]. Fails when the input is not antisymmetric within 1e-9,
/// which signals a malformed attitude-error matrix upstream.
pub fn vee(m: &Mat3) -> Result<Vec3> {
    let a = &m.m;
    let asym = (a[0][0].abs())
        .max(a[1][1].abs())
        .max(a[2][2].abs())
        .max((a[0][1] + a[1][0]).abs())
        .max((a[0][2] + a[2][0]).abs())
        .max((a[1][2] + a[2][1]).abs());
    if asym > 1e-9 {
        return Err(Error::NotAntisymmetric(asym));
    }
    Ok(Vec3::new(a[2][1], a[0][2], a[1][0]))
}

/// Rodrigues' formula: the rotation matrix `exp(hat(v))`.
pub fn exp_so3(v: Vec3) -> Rotation {
    let angle = v.norm();
    if angle < 1e-12 {
        // First-order expansion is exact enough below the angle floor.
        return Rotation::from_matrix(&Mat3::identity().add(&hat(v)));
    }
    let axis = v / angle;
    let k = hat(axis);
    let k2 = k.mul_mat(&k);
    let m = Mat3::identity()
        .add(&k.scale(angle.sin()))
        .add(&k2.scale(1.0 - angle.cos()));
    Rotation::from_matrix(&m)
}

impl Mat3 {
    fn add(&self, o: &Mat3) -> Mat3 {
        let mut r = [[0.0; 3]; 3];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = self.m[i][j] + o.m[i][j];
            }
        }
        Mat3 { m: r }
    }
}

/// Orthonormal rotation matrix (body → world). Construction always
/// re-orthonormalizes via Gram-Schmidt so the `RᵀR = I`, `det = +1`
/// invariants hold within 1e-9 even after long integration runs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation(Mat3);

impl Rotation {
    pub fn identity() -> Rotation {
        Rotation(Mat3::identity())
    }

    /// Rotation by `yaw` about the world z-axis.
    pub fn from_yaw(yaw: f64) -> Rotation {
        let (s, c) = yaw.sin_cos();
        Rotation(Mat3 {
            m: [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]],
        })
    }

    /// Build from an approximately orthonormal matrix, re-orthonormalizing
    /// its columns (Gram-Schmidt on b1, b2; b3 from the cross product).
    pub fn from_matrix(m: &Mat3) -> Rotation {
        let c0 = m
            .column(0)
            .normalized(1e-300)
            .expect("rotation column must be nonzero");
        let c1_raw = m.column(1);
        let c1 = (c1_raw - c0 * c0.dot(c1_raw))
            .normalized(1e-300)
            .expect("rotation columns must be independent");
        let c2 = c0.cross(c1);
        Rotation(Mat3::from_columns(c0, c1, c2))
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    /// Body z-axis expressed in the world frame (third column).
    pub fn body_z(&self) -> Vec3 {
        self.0.column(2)
    }

    /// Heading angle: world azimuth of the body x-axis.
    pub fn yaw(&self) -> f64 {
        let b1 = self.0.column(0);
        b1.y.atan2(b1.x)
    }

    /// Rotate a body-frame vector into the world frame.
    pub fn rotate(&self, v: Vec3) -> Vec3 {
        self.0.mul_vec(v)
    }

    /// Rotate a world-frame vector into the body frame.
    pub fn inverse_rotate(&self, v: Vec3) -> Vec3 {
        self.0.transpose().mul_vec(v)
    }

    pub fn compose(&self, o: &Rotation) -> Rotation {
        Rotation::from_matrix(&self.0.mul_mat(&o.0))
    }

    /// Max deviation of `RᵀR` from the identity (test support).
    pub fn orthonormality_error(&self) -> f64 {
        let g = self.0.transpose().mul_mat(&self.0);
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g.m[i][j] - want).abs());
            }
        }
        worst
    }
}
