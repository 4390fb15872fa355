//! Pose error metrics between a ground-truth and an estimated transform.
//!
//! Both transforms map object coordinates into the scene.

use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::fields::Aabb;
use crate::{Error, Mat3, Result, Sim3, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegistrationErrors {
    /// Translation error divided by the object bounding-box diagonal.
    pub delta_t: f64,
    /// Geodesic rotation error in radians.
    #[serde(rename = "delta_R_rad")]
    pub delta_r: f64,
    pub delta_s: f64,
    /// Element-wise RMSE of the two 4×4 homogeneous matrices.
    pub matrix_rmse: f64,
}

/// Rotational symmetry of a shape about its frame origin. Rotation errors are
/// measured against the closest symmetric equivalent of the ground truth.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Symmetry {
    #[default]
    None,
    /// Finite group of rotations (must contain the identity).
    Discrete(Vec<Mat3>),
    /// Continuous symmetry about `axis`; `flip` adds the half-turn mapping
    /// the axis to its negation.
    Axial { axis: Vec3, flip: bool },
    Spherical,
}

fn angle_of(r: &Mat3) -> f64 {
    ((r.trace() - 1.0) * 0.5).clamp(-1.0, 1.0).acos()
}

/// Geodesic angle of `R_gtᵀ · R_pred`.
pub fn rotation_error(gt: &Sim3, pred: &Sim3) -> f64 {
    angle_of(&(gt.rotation().transpose() * pred.rotation()))
}

/// Rotation error modulo the object's symmetry group.
pub fn rotation_error_symmetric(gt: &Sim3, pred: &Sim3, symmetry: &Symmetry) -> f64 {
    match symmetry {
        Symmetry::None => rotation_error(gt, pred),
        Symmetry::Spherical => 0.0,
        Symmetry::Discrete(group) => group
            .iter()
            .map(|g| angle_of(&((gt.rotation() * g).transpose() * pred.rotation())))
            .fold(rotation_error(gt, pred), f64::min),
        Symmetry::Axial { axis, flip } => {
            let a = (gt.rotation() * axis).normalize();
            let b = (pred.rotation() * axis).normalize();
            let c = a.dot(&b).clamp(-1.0, 1.0);
            let theta = c.acos();
            if *flip {
                theta.min(core::f64::consts::PI - theta)
            } else {
                theta
            }
        }
    }
}

/// `‖t_gt − t_pred‖` divided by the object bounding-box diagonal.
pub fn translation_error(gt: &Sim3, pred: &Sim3, object_bounds: &Aabb) -> Result<f64> {
    object_bounds.validate()?;
    let diag = object_bounds.diagonal();
    if !(diag > 0.0) {
        return Err(Error::InvalidArgument("object bounds have zero diagonal".into()));
    }
    Ok((gt.translation() - pred.translation()).norm() / diag)
}

pub fn scale_error(gt: &Sim3, pred: &Sim3) -> f64 {
    (gt.scale() - pred.scale()).abs()
}

pub fn matrix_rmse(gt: &Sim3, pred: &Sim3) -> f64 {
    let (a, b) = (gt.to_homogeneous(), pred.to_homogeneous());
    let mut sum = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            let d = a[i][j] - b[i][j];
            sum += d * d;
        }
    }
    (sum / 16.0).sqrt()
}

pub fn registration_errors(
    gt: &Sim3,
    pred: &Sim3,
    object_bounds: &Aabb,
    symmetry: &Symmetry,
) -> Result<RegistrationErrors> {
    Ok(RegistrationErrors {
        delta_t: translation_error(gt, pred, object_bounds)?,
        delta_r: rotation_error_symmetric(gt, pred, symmetry),
        delta_s: scale_error(gt, pred),
        matrix_rmse: matrix_rmse(gt, pred),
    })
}
