//! Rigid initial alignment of the object samples onto the scene samples.
//!
//! Pipeline: voxel downsampling, field-gradient normals, FPFH descriptors,
//! ratio-tested descriptor matches, RANSAC over minimal triplets, and
//! point-to-point ICP. The result maps object coordinates into the scene and
//! has unit scale unless pre-normalization is switched on.

mod fpfh;
mod icp;
mod normals;
mod ransac;

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

pub use fpfh::{compute_fpfh, pair_features, FpfhDescriptor, FPFH_BINS};
pub use icp::{icp_refine, IcpResult};
pub use normals::{estimate_normals, pca_normals};
pub use ransac::{match_descriptors, ransac_align, rigid_fit, RansacResult};

use crate::fields::{Aabb, SdfField};
use crate::sampling::SampleSet;
use crate::{Error, Result, Sim3, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CoarseConfig {
    /// Voxel edge for downsampling before matching; `0` keeps every point.
    pub voxel_size: f64,
    /// Neighbor count for the PCA normal fallback.
    pub normal_k: usize,
    pub fpfh_radius: f64,
    pub ransac_iters: usize,
    pub ransac_inlier_threshold: f64,
    /// Lowe ratio: best / second-best descriptor distance must be below it.
    pub correspondence_ratio_test: f64,
    /// Minimal samples whose edge lengths disagree by more than this ratio
    /// are rejected before fitting.
    pub edge_length_ratio: f64,
    pub icp_max_iters: usize,
    pub icp_convergence_eps: f64,
    /// Scale the object cloud by the ratio of the clouds' bounding-box
    /// diagonals before matching and fold the ratio into the initial scale.
    pub prenormalize: bool,
    /// Inlier fraction under which the result is flagged as unreliable.
    pub min_inlier_fraction: f64,
}

impl Default for CoarseConfig {
    fn default() -> Self {
        Self {
            voxel_size: 0.05,
            normal_k: 10,
            fpfh_radius: 0.25,
            ransac_iters: 4096,
            ransac_inlier_threshold: 0.04,
            correspondence_ratio_test: 0.9,
            edge_length_ratio: 0.9,
            icp_max_iters: 50,
            icp_convergence_eps: 1e-6,
            prenormalize: false,
            min_inlier_fraction: 0.2,
        }
    }
}

impl CoarseConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("normal_k", self.normal_k),
            ("ransac_iters", self.ransac_iters),
            ("icp_max_iters", self.icp_max_iters),
        ];
        for (name, v) in counts {
            if v < 1 {
                return Err(Error::param(name, "must be ≥ 1"));
            }
        }
        let lengths = [
            ("fpfh_radius", self.fpfh_radius),
            ("ransac_inlier_threshold", self.ransac_inlier_threshold),
            ("icp_convergence_eps", self.icp_convergence_eps),
        ];
        for (name, v) in lengths {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, "must be finite and > 0"));
            }
        }
        if !(self.voxel_size >= 0.0) {
            return Err(Error::param("voxel_size", "must be ≥ 0"));
        }
        if !(self.correspondence_ratio_test > 0.0 && self.correspondence_ratio_test <= 1.0) {
            return Err(Error::param("correspondence_ratio_test", "must be in (0, 1]"));
        }
        if !(self.edge_length_ratio >= 0.0 && self.edge_length_ratio <= 1.0) {
            return Err(Error::param("edge_length_ratio", "must be in [0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoarseDiagnostics {
    pub correspondences: usize,
    pub inliers: usize,
    pub inlier_fraction: f64,
    /// RMS nearest-neighbor distance after ICP, scene units.
    pub icp_residual: f64,
    pub icp_iterations: usize,
    /// Scale folded in by pre-normalization (1 when off).
    pub scale_estimate: f64,
    pub low_inlier_warning: bool,
    /// RANSAC found no usable correspondences and ICP started from a
    /// centroid shift alone.
    pub ransac_fallback: bool,
}

/// Replaces the points in each occupied voxel by their centroid. Output is
/// ordered by voxel key, so it does not depend on input order within a voxel.
pub fn voxel_downsample(points: &[Vec3], voxel: f64) -> Vec<Vec3> {
    if !(voxel > 0.0) {
        return points.to_vec();
    }
    let mut cells: BTreeMap<(i64, i64, i64), (Vec3, usize)> = BTreeMap::new();
    for p in points {
        let key = (
            (p.x / voxel).floor() as i64,
            (p.y / voxel).floor() as i64,
            (p.z / voxel).floor() as i64,
        );
        let e = cells.entry(key).or_insert((Vec3::zeros(), 0));
        e.0 += p;
        e.1 += 1;
    }
    cells.into_values().map(|(s, n)| s / n as f64).collect()
}

fn centroid(points: &[Vec3]) -> Vec3 {
    points.iter().fold(Vec3::zeros(), |a, p| a + p) / points.len() as f64
}

fn diagonal(points: &[Vec3]) -> f64 {
    Aabb::from_points(points.iter()).map_or(0.0, |b| b.diagonal())
}

/// Initial object→scene estimate from the two sample sets.
///
/// `scene` is the ICP/RANSAC target, `object` the source. Normals come from
/// the fields' gradients.
pub fn initial_registration<A: SdfField + ?Sized, B: SdfField + ?Sized>(
    scene_samples: &SampleSet,
    object_samples: &SampleSet,
    scene: &A,
    object: &B,
    cfg: &CoarseConfig,
    seed: u64,
) -> Result<(Sim3, CoarseDiagnostics)> {
    cfg.validate()?;
    if scene_samples.is_empty() || object_samples.is_empty() {
        return Err(Error::InitialisationFailure("empty sample set".into()));
    }
    let scale = if cfg.prenormalize {
        let s = diagonal(&scene_samples.points) / diagonal(&object_samples.points);
        if s.is_finite() && s > 0.0 {
            s
        } else {
            1.0
        }
    } else {
        1.0
    };

    let dst_full = &scene_samples.points;
    let dst = SampleSet::from_points(scene_samples.frame, voxel_downsample(dst_full, cfg.voxel_size));
    let src_obj = SampleSet::from_points(object_samples.frame, voxel_downsample(&object_samples.points, cfg.voxel_size / scale));
    let src: Vec<Vec3> = src_obj.points.iter().map(|p| p * scale).collect();

    let dst_normals = estimate_normals(&dst, scene, cfg.normal_k);
    // scaling about the origin leaves normals unchanged
    let src_normals = estimate_normals(&src_obj, object, cfg.normal_k);

    let dst_desc = compute_fpfh(&dst.points, &dst_normals, cfg.fpfh_radius);
    let src_desc = compute_fpfh(&src, &src_normals, cfg.fpfh_radius);

    // Candidate starts for ICP: the RANSAC model, and a pure centroid shift
    // for shapes whose descriptors are too uniform to match.
    let shift = Sim3::from_translation(centroid(dst_full) - centroid(&src));
    let ransac = ransac_align(&src, &src_desc, &dst.points, &dst_desc, cfg, seed);
    let from_shift = icp_refine(&src, dst_full, &shift, cfg);
    let (icp, ransac) = match ransac {
        Ok(r) => {
            let from_ransac = icp_refine(&src, dst_full, &r.transform, cfg);
            let icp = if from_shift.residual < from_ransac.residual {
                from_shift
            } else {
                from_ransac
            };
            (icp, Some(r))
        }
        Err(Error::InitialisationFailure(_)) => (from_shift, None),
        Err(e) => return Err(e),
    };
    let (correspondences, inliers, inlier_fraction) = ransac
        .as_ref()
        .map_or((0, 0, 0.0), |r| (r.correspondences, r.inliers, r.inlier_fraction()));

    let pre = Sim3::from_scale(scale)?;
    let estimate = icp.transform.compose(&pre);
    let diagnostics = CoarseDiagnostics {
        correspondences,
        inliers,
        inlier_fraction,
        icp_residual: icp.residual,
        icp_iterations: icp.iterations,
        scale_estimate: scale,
        low_inlier_warning: inlier_fraction < cfg.min_inlier_fraction,
        ransac_fallback: ransac.is_none(),
    };
    Ok((estimate, diagnostics))
}
