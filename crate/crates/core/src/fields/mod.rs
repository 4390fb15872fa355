//! Queryable signed distance fields.
//!
//! Every backend implements [`SdfField`]: negative inside, positive outside,
//! zero on the surface. Fields are immutable and shared through
//! [`SharedField`] so that wrappers (transformed instances, composite scenes,
//! carved edits) can reference them without copying.

mod aabb;
mod edit;
mod grid;
mod library;
mod primitive;

use alloc::sync::Arc;
use core::fmt;

pub use aabb::Aabb;
pub use edit::{carve_and_substitute, composite_scene, CarvedField, CompositeField, TransformedField};
pub use grid::{GridField, GRID_MAGIC, GRID_VERSION};
pub use library::{LibraryEntry, ObjectLibrary};
pub use primitive::{Placed, Primitive};

use crate::Vec3;

pub type SharedField = Arc<dyn SdfField>;

pub trait SdfField: Send + Sync + fmt::Debug {
    fn value(&self, x: &Vec3) -> f64;

    /// Axis-aligned box enclosing the zero level set.
    fn bounds(&self) -> Aabb;

    /// Spatial gradient. Backends without a closed form fall back to central
    /// differences with [`SdfField::fd_step`].
    fn gradient(&self, x: &Vec3) -> Vec3 {
        central_difference(self, x, self.fd_step())
    }

    fn value_and_gradient(&self, x: &Vec3) -> (f64, Vec3) {
        (self.value(x), self.gradient(x))
    }

    /// Safe sphere-tracing step at `x`. Equal to `value` for fields that are
    /// lower bounds on the true distance.
    fn trace_step(&self, x: &Vec3) -> f64 {
        self.value(x)
    }

    /// Sampling resolution for discretized backends.
    fn voxel_size(&self) -> Option<f64> {
        None
    }

    /// Finite-difference step: `1e-4 · max(voxel size, bounds diagonal / 1000)`.
    fn fd_step(&self) -> f64 {
        let diag = self.bounds().diagonal() / 1000.0;
        1e-4 * self.voxel_size().unwrap_or(0.0).max(diag)
    }
}

/// Central-difference gradient of `f` at `x` with step `h`.
pub fn central_difference<F: SdfField + ?Sized>(f: &F, x: &Vec3, h: f64) -> Vec3 {
    let mut g = Vec3::zeros();
    for k in 0..3 {
        let mut e = Vec3::zeros();
        e[k] = h;
        g[k] = (f.value(&(x + e)) - f.value(&(x - e))) / (2.0 * h);
    }
    g
}

/// Builds a shared handle from a concrete field.
pub fn shared<F: SdfField + 'static>(f: F) -> SharedField {
    Arc::new(f)
}
