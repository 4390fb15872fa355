//! Library substitution and instance replacement in a scene field.

use std::sync::Arc;

use sdfreg_core::fields::{carve_and_substitute, Aabb, CarvedField};
use sdfreg_core::Sim3;

use crate::error::{HarnessError, Result, Stage};
use crate::registration::RegistrationReport;
use crate::scene::LoadedScene;

/// Voxels of margin around the registered object's posed bounds.
pub const CARVE_MARGIN_VOXELS: f64 = 2.0;

/// Carve region for an object with canonical `bounds` posed by `t`. The
/// voxel is the scene's own resolution, or 1/64 of the posed diagonal for
/// analytic scenes.
pub fn carve_box(bounds: &Aabb, t: &Sim3, scene_voxel: Option<f64>) -> Aabb {
    let posed = bounds.transformed(t);
    let voxel = scene_voxel.unwrap_or(posed.diagonal() / 64.0);
    posed.inflate(CARVE_MARGIN_VOXELS * voxel)
}

/// Carves the registered object out of the scene and unions `replacement`
/// at the report's final pose.
pub fn substitute(scene: &LoadedScene, report: &RegistrationReport, replacement: &str) -> Result<CarvedField> {
    let original = scene.entry(&report.object)?;
    let repl = scene
        .library
        .get(replacement)
        .ok_or_else(|| HarnessError::load(format!("replacement `{replacement}` is not in the library")))?;
    let t = report.t_final.transform()?;
    let region = carve_box(&original.bounds(), &t, scene.field.voxel_size());
    carve_and_substitute(Arc::clone(&scene.field), region, Some(Arc::clone(&repl.field)), t)
        .map_err(HarnessError::stage(Stage::Substitution))
}
