//! Scene files: posed library instances, an optional baked grid and
//! detection boxes.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sdfreg_core::fields::{composite_scene, Aabb, LibraryEntry, ObjectLibrary, SdfField, SharedField};
use sdfreg_core::{Sim3, Sim3Params, Vec3};

use crate::error::{HarnessError, Result};
use crate::io;
use crate::library::LibraryManifest;

/// A library given by path (relative to the scene file) or inline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LibrarySource {
    Path(PathBuf),
    Inline(LibraryManifest),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub object: String,
    /// Ground-truth object-to-scene pose.
    pub pose: Sim3Params,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub object: String,
    #[serde(rename = "box")]
    pub bounds: Aabb,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneConfig {
    pub name: String,
    pub library: LibrarySource,
    #[serde(default)]
    pub instances: Vec<Instance>,
    /// Baked scene field replacing the composite of the instances.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<PathBuf>,
    #[serde(default)]
    pub detections: Vec<Detection>,
}

/// Field with no surface: every ray misses.
#[derive(Debug, Clone, Copy)]
pub struct EmptyField;

impl SdfField for EmptyField {
    fn value(&self, _: &Vec3) -> f64 {
        f64::INFINITY
    }

    fn gradient(&self, _: &Vec3) -> Vec3 {
        Vec3::zeros()
    }

    fn bounds(&self) -> Aabb {
        Aabb::from_center_half_extents(Vec3::zeros(), Vec3::repeat(0.5))
    }
}

/// A resolved scene.
#[derive(Debug, Clone)]
pub struct LoadedScene {
    pub config: SceneConfig,
    pub library: ObjectLibrary,
    pub field: SharedField,
    /// Ground-truth pose per instance, in `config.instances` order.
    pub poses: Vec<Sim3>,
}

impl LoadedScene {
    pub fn entry(&self, object: &str) -> Result<&LibraryEntry> {
        self.library
            .get(object)
            .ok_or_else(|| HarnessError::load(format!("object `{object}` is not in the library")))
    }

    pub fn detection(&self, object: &str) -> Result<&Detection> {
        self.config
            .detections
            .iter()
            .find(|d| d.object == object)
            .ok_or_else(|| HarnessError::load(format!("scene `{}` has no detection for `{object}`", self.config.name)))
    }

    /// Ground truth for the instance of `object` whose posed bounds center
    /// lies closest to the detection box center.
    pub fn ground_truth(&self, object: &str) -> Option<Sim3> {
        let entry = self.library.get(object)?;
        let target = self.detection(object).ok()?.bounds.center();
        self.config
            .instances
            .iter()
            .zip(&self.poses)
            .filter(|(i, _)| i.object == object)
            .map(|(_, t)| (*t, (entry.bounds().transformed(t).center() - target).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(t, _)| t)
    }
}

impl SceneConfig {
    /// Resolves library, poses and field. Relative paths resolve against
    /// `base_dir`.
    pub fn resolve(self, base_dir: &Path) -> Result<LoadedScene> {
        let library = match &self.library {
            LibrarySource::Path(p) => crate::library::load_library(&base_dir.join(p))?,
            LibrarySource::Inline(m) => m.build(base_dir)?,
        };
        let mut poses = Vec::with_capacity(self.instances.len());
        let mut posed = Vec::with_capacity(self.instances.len());
        for (k, inst) in self.instances.iter().enumerate() {
            let entry = library.get(&inst.object).ok_or_else(|| {
                HarnessError::load(format!("instance {k} names `{}`, which is not in the library", inst.object))
            })?;
            let t = Sim3::from_params(&inst.pose)
                .map_err(|e| HarnessError::load(format!("instance {k} (`{}`) has a malformed pose: {e}", inst.object)))?;
            poses.push(t);
            posed.push((entry.field.clone(), t));
        }
        for d in &self.detections {
            if library.get(&d.object).is_none() {
                return Err(HarnessError::load(format!("detection names `{}`, which is not in the library", d.object)));
            }
            if !self.instances.is_empty() && !self.instances.iter().any(|i| i.object == d.object) {
                return Err(HarnessError::load(format!("detection names `{}`, which is absent from the scene", d.object)));
            }
            d.bounds
                .validate()
                .map_err(|e| HarnessError::load(format!("detection box for `{}`: {e}", d.object)))?;
        }
        let field: SharedField = match &self.grid {
            Some(p) => Arc::new(io::load_grid(&base_dir.join(p))?),
            None if posed.is_empty() => Arc::new(EmptyField),
            None => Arc::new(composite_scene(posed).map_err(|e| HarnessError::load(e.to_string()))?),
        };
        Ok(LoadedScene {
            config: self,
            library,
            field,
            poses,
        })
    }
}

pub fn load_scene_config(path: &Path) -> Result<LoadedScene> {
    let cfg: SceneConfig = io::read_json(path)?;
    cfg.resolve(path.parent().unwrap_or(Path::new(".")))
}
