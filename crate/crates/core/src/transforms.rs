//! Similarity transforms in 3D.
//!
//! A [`Sim3`] acts on points as `x' = scale * R * x + t`. The optimizer works
//! on the Euler parameterization [`Sim3Params`], with the rotation composed
//! as `R = Rz(yaw) * Ry(pitch) * Rx(roll)`.

use core::f64::consts::{FRAC_PI_2, PI};

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::{Error, Mat3, Result, Vec3};

const ORTHO_TOL: f64 = 1e-9;

/// Euler-angle parameterization of a similarity transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sim3Params {
    pub tx: f64,
    pub ty: f64,
    pub tz: f64,
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
    pub sigma: f64,
}

impl Default for Sim3Params {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Sim3Params {
    pub const IDENTITY: Self = Self {
        tx: 0.0,
        ty: 0.0,
        tz: 0.0,
        roll: 0.0,
        pitch: 0.0,
        yaw: 0.0,
        sigma: 1.0,
    };

    pub fn translation(&self) -> Vec3 {
        Vec3::new(self.tx, self.ty, self.tz)
    }

    pub fn to_array(&self) -> [f64; 7] {
        [
            self.tx, self.ty, self.tz, self.roll, self.pitch, self.yaw, self.sigma,
        ]
    }

    pub fn from_array(a: [f64; 7]) -> Self {
        Self {
            tx: a[0],
            ty: a[1],
            tz: a[2],
            roll: a[3],
            pitch: a[4],
            yaw: a[5],
            sigma: a[6],
        }
    }
}

/// Wraps an angle into (-π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a % (2.0 * PI);
    if w <= -PI {
        w += 2.0 * PI;
    } else if w > PI {
        w -= 2.0 * PI;
    }
    w
}

pub(crate) fn rot_x(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    Mat3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

pub(crate) fn rot_y(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    Mat3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

pub(crate) fn rot_z(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

fn drot_x(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    Mat3::new(0.0, 0.0, 0.0, 0.0, -s, -c, 0.0, c, -s)
}

fn drot_y(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    Mat3::new(-s, 0.0, c, 0.0, 0.0, 0.0, -c, 0.0, -s)
}

fn drot_z(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    Mat3::new(-s, -c, 0.0, c, -s, 0.0, 0.0, 0.0, 0.0)
}

/// `Rz(yaw) * Ry(pitch) * Rx(roll)`.
pub fn euler_to_rotation(roll: f64, pitch: f64, yaw: f64) -> Mat3 {
    rot_z(yaw) * rot_y(pitch) * rot_x(roll)
}

/// Partial derivatives of [`euler_to_rotation`] w.r.t. roll, pitch and yaw.
pub(crate) fn euler_rotation_jacobian(roll: f64, pitch: f64, yaw: f64) -> [Mat3; 3] {
    let (rx, ry, rz) = (rot_x(roll), rot_y(pitch), rot_z(yaw));
    [
        rz * ry * drot_x(roll),
        rz * drot_y(pitch) * rx,
        drot_z(yaw) * ry * rx,
    ]
}

/// Rotation by `angle` about `axis` (Rodrigues). `axis` need not be unit
/// length but must be non-zero.
pub fn axis_angle(axis: &Vec3, angle: f64) -> Mat3 {
    let k = axis.normalize();
    let kx = Mat3::new(0.0, -k.z, k.y, k.z, 0.0, -k.x, -k.y, k.x, 0.0);
    Mat3::identity() + kx * angle.sin() + kx * kx * (1.0 - angle.cos())
}

/// Inverse of [`euler_to_rotation`]. At gimbal lock the whole twist goes to
/// yaw and roll is zero.
pub fn rotation_to_euler(r: &Mat3) -> (f64, f64, f64) {
    let s = (-r[(2, 0)]).clamp(-1.0, 1.0);
    if s.abs() >= 1.0 - 1e-12 {
        let pitch = if s > 0.0 { FRAC_PI_2 } else { -FRAC_PI_2 };
        let yaw = (-r[(0, 1)]).atan2(r[(1, 1)]);
        (0.0, pitch, wrap_angle(yaw))
    } else {
        let pitch = s.asin();
        let roll = r[(2, 1)].atan2(r[(2, 2)]);
        let yaw = r[(1, 0)].atan2(r[(0, 0)]);
        (wrap_angle(roll), pitch, wrap_angle(yaw))
    }
}

fn check_rotation(r: &Mat3) -> Result<()> {
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("rotation", "non-finite entry"));
    }
    let err = (r.transpose() * r - Mat3::identity()).abs().max();
    if err > ORTHO_TOL {
        return Err(Error::param(
            "rotation",
            alloc::format!("not orthonormal (max |RᵀR − I| = {err:e})"),
        ));
    }
    if (r.determinant() - 1.0).abs() > ORTHO_TOL {
        return Err(Error::param("rotation", "determinant is not +1"));
    }
    Ok(())
}

fn check_scale(scale: f64) -> Result<()> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::param(
            "sigma",
            alloc::format!("scale must be finite and > 0, got {scale}"),
        ));
    }
    Ok(())
}

/// Similarity transform `x ↦ scale · R · x + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Sim3Repr", into = "Sim3Repr")]
pub struct Sim3 {
    rotation: Mat3,
    translation: Vec3,
    scale: f64,
}

impl Default for Sim3 {
    fn default() -> Self {
        Self::identity()
    }
}

impl Sim3 {
    pub fn identity() -> Self {
        Self {
            rotation: Mat3::identity(),
            translation: Vec3::zeros(),
            scale: 1.0,
        }
    }

    pub fn new(rotation: Mat3, translation: Vec3, scale: f64) -> Result<Self> {
        check_rotation(&rotation)?;
        check_scale(scale)?;
        if translation.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("translation", "non-finite entry"));
        }
        Ok(Self {
            rotation,
            translation,
            scale,
        })
    }

    pub fn from_translation(t: Vec3) -> Self {
        Self {
            translation: t,
            ..Self::identity()
        }
    }

    pub fn from_scale(scale: f64) -> Result<Self> {
        Self::new(Mat3::identity(), Vec3::zeros(), scale)
    }

    /// Rigid transform; the rotation is re-validated.
    pub fn rigid(rotation: Mat3, translation: Vec3) -> Result<Self> {
        Self::new(rotation, translation, 1.0)
    }

    /// Builds a transform from a general linear part `s·R`. Anything that is
    /// not a uniform scale times a proper rotation is rejected.
    pub fn from_linear(linear: Mat3, translation: Vec3) -> Result<Self> {
        let det = linear.determinant();
        if !(det.is_finite() && det > 0.0) {
            return Err(Error::param("linear", "determinant must be positive"));
        }
        let scale = det.cbrt();
        let gram = linear.transpose() * linear / (scale * scale);
        if (gram - Mat3::identity()).abs().max() > 1e-9 {
            return Err(Error::param("linear", "anisotropic scale is not supported"));
        }
        Self::new(linear / scale, translation, scale)
    }

    pub fn from_params(p: &Sim3Params) -> Result<Self> {
        check_scale(p.sigma)?;
        Self::new(
            euler_to_rotation(p.roll, p.pitch, p.yaw),
            p.translation(),
            p.sigma,
        )
    }

    pub fn to_params(&self) -> Sim3Params {
        let (roll, pitch, yaw) = rotation_to_euler(&self.rotation);
        Sim3Params {
            tx: self.translation.x,
            ty: self.translation.y,
            tz: self.translation.z,
            roll,
            pitch,
            yaw,
            sigma: self.scale,
        }
    }

    pub fn rotation(&self) -> &Mat3 {
        &self.rotation
    }

    pub fn translation(&self) -> &Vec3 {
        &self.translation
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn apply(&self, x: &Vec3) -> Vec3 {
        self.rotation * x * self.scale + self.translation
    }

    /// Applies the rotation and scale only.
    pub fn apply_vector(&self, v: &Vec3) -> Vec3 {
        self.rotation * v * self.scale
    }

    /// `inverse().apply(x)` without building the inverse.
    pub fn apply_inverse(&self, x: &Vec3) -> Vec3 {
        self.rotation.tr_mul(&(x - self.translation)) / self.scale
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        let inv_s = 1.0 / self.scale;
        Self {
            rotation: rt,
            translation: -(rt * self.translation) * inv_s,
            scale: inv_s,
        }
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            rotation: self.rotation * other.rotation,
            translation: self.apply(&other.translation),
            scale: self.scale * other.scale,
        }
    }

    /// Row-major `[R | t]` as 12 numbers.
    pub fn to_row_major(&self) -> [f64; 12] {
        let r = &self.rotation;
        let t = &self.translation;
        [
            r[(0, 0)],
            r[(0, 1)],
            r[(0, 2)],
            t.x,
            r[(1, 0)],
            r[(1, 1)],
            r[(1, 2)],
            t.y,
            r[(2, 0)],
            r[(2, 1)],
            r[(2, 2)],
            t.z,
        ]
    }

    pub fn from_row_major(m: &[f64; 12], scale: f64) -> Result<Self> {
        let rotation = Mat3::new(m[0], m[1], m[2], m[4], m[5], m[6], m[8], m[9], m[10]);
        Self::new(rotation, Vec3::new(m[3], m[7], m[11]), scale)
    }

    /// Homogeneous 4×4 matrix (row-major) with the scale folded into the
    /// linear block.
    pub fn to_homogeneous(&self) -> [[f64; 4]; 4] {
        let l = self.rotation * self.scale;
        let t = &self.translation;
        [
            [l[(0, 0)], l[(0, 1)], l[(0, 2)], t.x],
            [l[(1, 0)], l[(1, 1)], l[(1, 2)], t.y],
            [l[(2, 0)], l[(2, 1)], l[(2, 2)], t.z],
            [0.0, 0.0, 0.0, 1.0],
        ]
    }
}

/// Serialized form: row-major `[R|t]` plus the scale.
#[derive(Serialize, Deserialize)]
struct Sim3Repr {
    matrix: [f64; 12],
    scale: f64,
}

impl TryFrom<Sim3Repr> for Sim3 {
    type Error = Error;
    fn try_from(r: Sim3Repr) -> Result<Self> {
        Sim3::from_row_major(&r.matrix, r.scale)
    }
}

impl From<Sim3> for Sim3Repr {
    fn from(t: Sim3) -> Self {
        Sim3Repr {
            matrix: t.to_row_major(),
            scale: t.scale,
        }
    }
}
