//! Field wrappers: posed instances, min-union scenes, carve-and-substitute
//! edits.

use alloc::vec::Vec;

use super::{Aabb, SdfField, SharedField};
use crate::{Error, Result, Sim3, Vec3};

/// An object field placed into the scene by `x_scene = σ·R·x_obj + t`.
///
/// Distances are multiplied by σ so the result stays metric in scene units.
#[derive(Debug, Clone)]
pub struct TransformedField {
    inner: SharedField,
    transform: Sim3,
}

impl TransformedField {
    pub fn new(inner: SharedField, transform: Sim3) -> Self {
        Self { inner, transform }
    }

    pub fn inner(&self) -> &SharedField {
        &self.inner
    }

    pub fn transform(&self) -> &Sim3 {
        &self.transform
    }
}

impl SdfField for TransformedField {
    fn value(&self, x: &Vec3) -> f64 {
        self.transform.scale() * self.inner.value(&self.transform.apply_inverse(x))
    }

    fn gradient(&self, x: &Vec3) -> Vec3 {
        self.transform.rotation() * self.inner.gradient(&self.transform.apply_inverse(x))
    }

    fn value_and_gradient(&self, x: &Vec3) -> (f64, Vec3) {
        let (v, g) = self.inner.value_and_gradient(&self.transform.apply_inverse(x));
        (self.transform.scale() * v, self.transform.rotation() * g)
    }

    fn trace_step(&self, x: &Vec3) -> f64 {
        self.transform.scale() * self.inner.trace_step(&self.transform.apply_inverse(x))
    }

    fn bounds(&self) -> Aabb {
        self.inner.bounds().transformed(&self.transform)
    }

    fn voxel_size(&self) -> Option<f64> {
        self.inner.voxel_size().map(|v| v * self.transform.scale())
    }
}

/// Min-union of posed instances.
#[derive(Debug, Clone)]
pub struct CompositeField {
    instances: Vec<TransformedField>,
}

impl CompositeField {
    pub fn instances(&self) -> &[TransformedField] {
        &self.instances
    }

    fn nearest(&self, x: &Vec3) -> &TransformedField {
        self.instances
            .iter()
            .map(|f| (f.value(x), f))
            .fold(None, |best: Option<(f64, &TransformedField)>, cur| match best {
                Some(b) if b.0 <= cur.0 => Some(b),
                _ => Some(cur),
            })
            .expect("composite is non-empty")
            .1
    }
}

/// Builds the min-union scene of `instances`.
pub fn composite_scene(instances: Vec<(SharedField, Sim3)>) -> Result<CompositeField> {
    if instances.is_empty() {
        return Err(Error::InvalidArgument("composite scene needs at least one instance".into()));
    }
    Ok(CompositeField {
        instances: instances
            .into_iter()
            .map(|(f, t)| TransformedField::new(f, t))
            .collect(),
    })
}

impl SdfField for CompositeField {
    fn value(&self, x: &Vec3) -> f64 {
        self.instances
            .iter()
            .map(|f| f.value(x))
            .fold(f64::INFINITY, f64::min)
    }

    fn gradient(&self, x: &Vec3) -> Vec3 {
        self.nearest(x).gradient(x)
    }

    fn value_and_gradient(&self, x: &Vec3) -> (f64, Vec3) {
        let mut best = (f64::INFINITY, Vec3::z());
        for f in &self.instances {
            let v = f.value(x);
            if v < best.0 {
                best = (v, Vec3::zeros());
                best.1 = f.gradient(x);
            }
        }
        best
    }

    fn trace_step(&self, x: &Vec3) -> f64 {
        self.instances
            .iter()
            .map(|f| f.trace_step(x))
            .fold(f64::INFINITY, f64::min)
    }

    fn bounds(&self) -> Aabb {
        self.instances
            .iter()
            .map(|f| f.bounds())
            .reduce(|a, b| a.union(&b))
            .expect("composite is non-empty")
    }

    fn voxel_size(&self) -> Option<f64> {
        self.instances
            .iter()
            .filter_map(|f| f.voxel_size())
            .reduce(f64::min)
    }
}

/// A scene with an axis-aligned region hollowed out and a posed replacement
/// unioned in.
///
/// Outside the carve box the field is the original scene, bit for bit.
/// Inside it is `min(max(scene, −box), replacement)`.
#[derive(Debug, Clone)]
pub struct CarvedField {
    scene: SharedField,
    carve: Aabb,
    replacement: Option<TransformedField>,
}

/// Extra step taken across the carve-box wall while tracing from outside.
const WALL_PUSH: f64 = 1e-6;

impl CarvedField {
    pub fn carve_box(&self) -> &Aabb {
        &self.carve
    }

    pub fn replacement(&self) -> Option<&TransformedField> {
        self.replacement.as_ref()
    }

    /// Value inside the carve box and which branch is active.
    fn inside(&self, x: &Vec3, box_d: f64) -> (f64, Branch) {
        let s = self.scene.value(x);
        let (hollow, mut branch) = if s >= -box_d {
            (s, Branch::Scene)
        } else {
            (-box_d, Branch::Wall)
        };
        let mut v = hollow;
        if let Some(r) = &self.replacement {
            let rv = r.value(x);
            if rv < v {
                v = rv;
                branch = Branch::Replacement;
            }
        }
        (v, branch)
    }
}

#[derive(Debug, Clone, Copy)]
enum Branch {
    Scene,
    Wall,
    Replacement,
}

pub fn carve_and_substitute(
    scene: SharedField,
    carve_box: Aabb,
    replacement: Option<SharedField>,
    transform: Sim3,
) -> Result<CarvedField> {
    carve_box.validate()?;
    Ok(CarvedField {
        scene,
        carve: carve_box,
        replacement: replacement.map(|r| TransformedField::new(r, transform)),
    })
}

impl SdfField for CarvedField {
    fn value(&self, x: &Vec3) -> f64 {
        let box_d = self.carve.signed_distance(x);
        if box_d > 0.0 {
            self.scene.value(x)
        } else {
            self.inside(x, box_d).0
        }
    }

    fn gradient(&self, x: &Vec3) -> Vec3 {
        let box_d = self.carve.signed_distance(x);
        if box_d > 0.0 {
            return self.scene.gradient(x);
        }
        match self.inside(x, box_d).1 {
            Branch::Scene => self.scene.gradient(x),
            Branch::Wall => -super::central_difference(&BoxSdf(self.carve), x, self.fd_step()),
            Branch::Replacement => self.replacement.as_ref().unwrap().gradient(x),
        }
    }

    fn trace_step(&self, x: &Vec3) -> f64 {
        let box_d = self.carve.signed_distance(x);
        if box_d > 0.0 {
            self.scene.trace_step(x).min(box_d + WALL_PUSH)
        } else {
            self.inside(x, box_d).0
        }
    }

    fn bounds(&self) -> Aabb {
        let b = self.scene.bounds();
        match &self.replacement {
            Some(r) => b.union(&r.bounds()),
            None => b,
        }
    }

    fn voxel_size(&self) -> Option<f64> {
        self.scene.voxel_size()
    }
}

#[derive(Debug)]
struct BoxSdf(Aabb);

impl SdfField for BoxSdf {
    fn value(&self, x: &Vec3) -> f64 {
        self.0.signed_distance(x)
    }

    fn bounds(&self) -> Aabb {
        self.0
    }
}
