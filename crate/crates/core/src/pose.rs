//! Rigid-body poses in 2D and 3D.
//!
//! A [`Pose`] is a position plus an orientation: a heading angle in 2D, a
//! unit quaternion in 3D. Orientation gradients are taken with respect to
//! the *raw* quaternion coordinates `(w, x, y, z)` with normalization
//! applied inside the rotation, so the rotation matrix — and everything
//! downstream of it — is well defined and differentiable for any nonzero
//! quaternion. A direct consequence is that the optimal scaling factor is
//! invariant along the radial direction `q -> s q`, so its quaternion
//! gradient is tangent to the unit sphere.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar-first quaternion `(w, x, y, z)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quat {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quat {
    pub const IDENTITY: Quat = Quat {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64) -> Self {
        let a = axis.normalize();
        let (s, c) = (angle / 2.0).sin_cos();
        Self::new(c, s * a.x, s * a.y, s * a.z)
    }

    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self::new(self.w / n, self.x / n, self.y / n, self.z / n)
    }

    pub fn conjugate(&self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn dot(&self, other: &Quat) -> f64 {
        self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// Hamilton product `self ⊗ other`.
    pub fn mul(&self, other: &Quat) -> Self {
        let (w1, x1, y1, z1) = (self.w, self.x, self.y, self.z);
        let (w2, x2, y2, z2) = (other.w, other.x, other.y, other.z);
        Self::new(
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        )
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    /// Rotation matrix with normalization applied inside, valid for any
    /// nonzero quaternion: `R(q) = M(q) / |q|^2` with `M` quadratic in `q`.
    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        let n = self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z;
        self.poly_matrix() / n
    }

    /// Rotate a vector by this quaternion.
    pub fn rotate(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.rotation_matrix() * v
    }

    /// Quadratic polynomial matrix `M(q)`; equals the rotation matrix for
    /// unit quaternions and satisfies `M(sq) = s^2 M(q)`.
    fn poly_matrix(&self) -> Matrix3<f64> {
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        Matrix3::new(
            w * w + x * x - y * y - z * z,
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
            2.0 * (x * y + w * z),
            w * w - x * x + y * y - z * z,
            2.0 * (y * z - w * x),
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            w * w - x * x - y * y + z * z,
        )
    }

    /// Partial derivatives of the normalized rotation matrix with respect to
    /// the four raw quaternion coordinates, in `(w, x, y, z)` order.
    pub fn rotation_matrix_derivs(&self) -> [Matrix3<f64>; 4] {
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        let n = w * w + x * x + y * y + z * z;
        let r = self.poly_matrix() / n;

        let dm_dw = Matrix3::new(
            2.0 * w,
            -2.0 * z,
            2.0 * y,
            2.0 * z,
            2.0 * w,
            -2.0 * x,
            -2.0 * y,
            2.0 * x,
            2.0 * w,
        );
        let dm_dx = Matrix3::new(
            2.0 * x,
            2.0 * y,
            2.0 * z,
            2.0 * y,
            -2.0 * x,
            -2.0 * w,
            2.0 * z,
            2.0 * w,
            -2.0 * x,
        );
        let dm_dy = Matrix3::new(
            -2.0 * y,
            2.0 * x,
            2.0 * w,
            2.0 * x,
            2.0 * y,
            2.0 * z,
            -2.0 * w,
            2.0 * z,
            -2.0 * y,
        );
        let dm_dz = Matrix3::new(
            -2.0 * z,
            -2.0 * w,
            2.0 * x,
            2.0 * w,
            -2.0 * z,
            2.0 * y,
            2.0 * x,
            2.0 * y,
            2.0 * z,
        );

        let coords = [w, x, y, z];
        let polys = [dm_dw, dm_dx, dm_dy, dm_dz];
        let mut out = [Matrix3::zeros(); 4];
        for k in 0..4 {
            out[k] = (polys[k] - 2.0 * coords[k] * r) / n;
        }
        out
    }
}

/// Body orientation: heading angle in 2D, quaternion in 3D.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Orientation {
    Heading(f64),
    Quaternion(Quat),
}

impl Orientation {
    pub fn dim(&self) -> usize {
        match self {
            Orientation::Heading(_) => 2,
            Orientation::Quaternion(_) => 3,
        }
    }

    /// Number of raw orientation coordinates (1 for heading, 4 for quaternion).
    pub fn coord_count(&self) -> usize {
        match self {
            Orientation::Heading(_) => 1,
            Orientation::Quaternion(_) => 4,
        }
    }
}

/// Rigid-body pose: position plus orientation, dimension 2 or 3.
#[derive(Clone, Debug, PartialEq)]
pub struct Pose {
    pub position: DVector<f64>,
    pub orientation: Orientation,
}

impl Pose {
    pub fn identity(dim: usize) -> Self {
        match dim {
            2 => Self {
                position: DVector::zeros(2),
                orientation: Orientation::Heading(0.0),
            },
            3 => Self {
                position: DVector::zeros(3),
                orientation: Orientation::Quaternion(Quat::IDENTITY),
            },
            d => panic!("unsupported dimension {d}"),
        }
    }

    pub fn planar(x: f64, y: f64, heading: f64) -> Self {
        Self {
            position: DVector::from_vec(vec![x, y]),
            orientation: Orientation::Heading(heading),
        }
    }

    pub fn spatial(position: Vector3<f64>, orientation: Quat) -> Self {
        Self {
            position: DVector::from_vec(vec![position.x, position.y, position.z]),
            orientation: Orientation::Quaternion(orientation),
        }
    }

    pub fn dim(&self) -> usize {
        self.orientation.dim()
    }

    pub fn validate(&self) -> Result<()> {
        if self.position.len() != self.dim() {
            return Err(Error::InvalidPose(format!(
                "position has {} entries for a {}D orientation",
                self.position.len(),
                self.dim()
            )));
        }
        if !self.position.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidPose("non-finite position".into()));
        }
        match &self.orientation {
            Orientation::Heading(t) if !t.is_finite() => {
                Err(Error::InvalidPose("non-finite heading".into()))
            }
            Orientation::Quaternion(q) if (q.norm() - 1.0).abs() > 1e-9 => Err(Error::InvalidPose(
                format!("quaternion norm {} deviates from 1", q.norm()),
            )),
            _ => Ok(()),
        }
    }

    /// Rotation matrix (2x2 or 3x3) of the orientation.
    pub fn rotation_matrix(&self) -> DMatrix<f64> {
        match &self.orientation {
            Orientation::Heading(t) => {
                let (s, c) = t.sin_cos();
                DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
            }
            Orientation::Quaternion(q) => {
                let m = q.rotation_matrix();
                DMatrix::from_fn(3, 3, |i, j| m[(i, j)])
            }
        }
    }

    /// Derivatives of the rotation matrix with respect to the raw
    /// orientation coordinates: one matrix for 2D, four for 3D.
    pub fn rotation_matrix_derivs(&self) -> Vec<DMatrix<f64>> {
        match &self.orientation {
            Orientation::Heading(t) => {
                let (s, c) = t.sin_cos();
                vec![DMatrix::from_row_slice(2, 2, &[-s, -c, c, -s])]
            }
            Orientation::Quaternion(q) => q
                .rotation_matrix_derivs()
                .iter()
                .map(|m| DMatrix::from_fn(3, 3, |i, j| m[(i, j)]))
                .collect(),
        }
    }

    /// Compose with a pose expressed in this pose's frame.
    pub fn compose(&self, local: &Pose) -> Pose {
        let rot = self.rotation_matrix();
        let position = &self.position + rot * &local.position;
        let orientation = match (&self.orientation, &local.orientation) {
            (Orientation::Heading(a), Orientation::Heading(b)) => Orientation::Heading(a + b),
            (Orientation::Quaternion(a), Orientation::Quaternion(b)) => {
                Orientation::Quaternion(a.mul(b).normalized())
            }
            _ => panic!("cannot compose poses of different dimensions"),
        };
        Pose {
            position,
            orientation,
        }
    }

    /// Raw orientation coordinates: `[heading]` or `[w, x, y, z]`.
    pub fn orientation_coords(&self) -> Vec<f64> {
        match &self.orientation {
            Orientation::Heading(t) => vec![*t],
            Orientation::Quaternion(q) => q.as_array().to_vec(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rotation_matrix_is_orthonormal() {
        let q = Quat::new(0.3, -0.4, 0.7, 0.2).normalized();
        let r = q.rotation_matrix();
        let eye = r.transpose() * r;
        assert_relative_eq!(eye, Matrix3::identity(), epsilon = 1e-12);
        assert_relative_eq!(r.determinant(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rotation_is_scale_invariant_in_q() {
        let q = Quat::new(0.3, -0.4, 0.7, 0.2);
        let r1 = q.rotation_matrix();
        let r2 = Quat::new(2.0 * q.w, 2.0 * q.x, 2.0 * q.y, 2.0 * q.z).rotation_matrix();
        assert_relative_eq!(r1, r2, epsilon = 1e-14);
    }

    #[test]
    fn rotation_derivs_match_finite_differences() {
        let q = Quat::new(0.9, 0.1, -0.3, 0.25).normalized();
        let derivs = q.rotation_matrix_derivs();
        let h = 1e-6;
        let mut coords = q.as_array();
        for k in 0..4 {
            let mut plus = coords;
            plus[k] += h;
            let mut minus = coords;
            minus[k] -= h;
            let rp = Quat::new(plus[0], plus[1], plus[2], plus[3]).rotation_matrix();
            let rm = Quat::new(minus[0], minus[1], minus[2], minus[3]).rotation_matrix();
            let fd = (rp - rm) / (2.0 * h);
            assert_relative_eq!(derivs[k], fd, epsilon = 1e-8);
        }
        // off-manifold too: raw-coordinate convention must hold near the sphere
        coords[0] *= 1.1;
        let q2 = Quat::new(coords[0], coords[1], coords[2], coords[3]);
        let derivs2 = q2.rotation_matrix_derivs();
        for k in 0..4 {
            let mut plus = coords;
            plus[k] += h;
            let mut minus = coords;
            minus[k] -= h;
            let rp = Quat::new(plus[0], plus[1], plus[2], plus[3]).rotation_matrix();
            let rm = Quat::new(minus[0], minus[1], minus[2], minus[3]).rotation_matrix();
            let fd = (rp - rm) / (2.0 * h);
            assert_relative_eq!(derivs2[k], fd, epsilon = 1e-8);
        }
    }

    #[test]
    fn heading_rotation_derivative() {
        let pose = Pose::planar(1.0, 2.0, 0.7);
        let d = pose.rotation_matrix_derivs();
        let h = 1e-7;
        let rp = Pose::planar(1.0, 2.0, 0.7 + h).rotation_matrix();
        let rm = Pose::planar(1.0, 2.0, 0.7 - h).rotation_matrix();
        let fd = (rp - rm) / (2.0 * h);
        assert_relative_eq!(d[0], fd, epsilon = 1e-8);
    }

    #[test]
    fn compose_matches_matrix_product() {
        let a = Pose::spatial(
            Vector3::new(1.0, -2.0, 0.5),
            Quat::from_axis_angle(&Vector3::new(0.0, 0.0, 1.0), 0.8),
        );
        let b = Pose::spatial(
            Vector3::new(0.2, 0.1, -0.4),
            Quat::from_axis_angle(&Vector3::new(1.0, 1.0, 0.0), -0.4),
        );
        let c = a.compose(&b);
        let rc = c.rotation_matrix();
        let expect = a.rotation_matrix() * b.rotation_matrix();
        assert_relative_eq!(rc, expect, epsilon = 1e-12);
        let p = a.rotation_matrix() * &b.position + &a.position;
        assert_relative_eq!(c.position, p, epsilon = 1e-12);
    }
}
