//! Grid baking: plain, with additive noise, and the partial-coverage
//! degraded scene.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use sdfreg_core::fields::{Aabb, GridField, SdfField};
use sdfreg_core::sampling::{extract_from_views, CameraPose, Frame, SamplingConfig};
use sdfreg_core::spatial::SpatialHash;
use sdfreg_core::{Error, Result, Vec3};

fn spacing(bounds: &Aabb, dims: [usize; 3]) -> Result<Vec3> {
    if dims.iter().any(|&n| n < 2) {
        return Err(Error::InvalidArgument(format!("grid needs ≥ 2 samples per axis, got {dims:?}")));
    }
    bounds.validate()?;
    let e = bounds.max - bounds.min;
    Ok(Vec3::new(
        e.x / (dims[0] - 1) as f64,
        e.y / (dims[1] - 1) as f64,
        e.z / (dims[2] - 1) as f64,
    ))
}

/// Evaluates `value(vertex, linear index)` over the lattice, one z-slice per
/// rayon task.
fn bake_par(bounds: &Aabb, dims: [usize; 3], value: impl Fn(&Vec3, usize) -> f64 + Sync) -> Result<GridField> {
    let h = spacing(bounds, dims)?;
    let slice = dims[0] * dims[1];
    let mut values = vec![0f32; slice * dims[2]];
    values.par_chunks_mut(slice).enumerate().for_each(|(k, out)| {
        for j in 0..dims[1] {
            for i in 0..dims[0] {
                let x = bounds.min + Vec3::new(i as f64, j as f64, k as f64).component_mul(&h);
                let idx = i + dims[0] * j;
                out[idx] = value(&x, k * slice + idx) as f32;
            }
        }
    });
    GridField::new(dims, bounds.min, h, values)
}

/// Samples `f` on a `dims` lattice spanning `bounds`, in parallel.
pub fn bake_grid<F: SdfField + ?Sized>(f: &F, bounds: &Aabb, dims: [usize; 3]) -> Result<GridField> {
    bake_par(bounds, dims, |x, _| f.value(x))
}

/// As [`bake_grid`] with i.i.d. Gaussian noise of deviation `noise` added to
/// every sample. Each z-slice draws from its own stream of `seed`.
pub fn bake_noisy<F: SdfField + ?Sized>(f: &F, bounds: &Aabb, dims: [usize; 3], noise: f64, seed: u64) -> Result<GridField> {
    let normal = Normal::new(0.0, noise).map_err(|e| Error::InvalidArgument(format!("noise: {e}")))?;
    let clean = bake_grid(f, bounds, dims)?;
    let slice = dims[0] * dims[1];
    let mut values = clean.values().to_vec();
    values.par_chunks_mut(slice).enumerate().for_each(|(k, out)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        for v in out {
            *v += normal.sample(&mut rng) as f32;
        }
    });
    GridField::new(dims, *clean.origin(), *clean.spacing(), values)
}

/// Whether the straight segment from `eye` reaches within `keep` of `x`
/// without crossing the surface, and `x` lies inside the camera frustum.
fn visible_from<F: SdfField + ?Sized>(f: &F, pose: &CameraPose, x: &Vec3, keep: f64, max_steps: usize) -> bool {
    let d = x - pose.position;
    let len = d.norm();
    if len == 0.0 {
        return true;
    }
    let dir = d / len;
    let (fwd, right, up) = pose.basis();
    let z = dir.dot(&fwd);
    let tan = (pose.fov_y * 0.5).tan();
    if z <= 0.0 || (dir.dot(&right) / z).abs() > tan || (dir.dot(&up) / z).abs() > tan {
        return false;
    }
    let mut t = 0.0;
    for _ in 0..max_steps {
        if t >= len - keep {
            return true;
        }
        let step = f.trace_step(&(pose.position + dir * t));
        if step <= 1e-6 {
            return false;
        }
        t += step;
    }
    false
}

/// Grid of `f` as seen from `views` only.
///
/// A vertex keeps its true value when it lies within `keep` of a surface
/// sample visible from the views, or in free space some view can see.
/// Every other vertex, including all occluded space behind the visible
/// surface, gets `fill`.
pub fn bake_partial_coverage<F: SdfField + ?Sized>(
    f: &F,
    bounds: &Aabb,
    dims: [usize; 3],
    views: &[CameraPose],
    sampling: &SamplingConfig,
    keep: f64,
    fill: f64,
) -> Result<GridField> {
    let samples = extract_from_views(f, Frame::Scene, &bounds.center(), views, sampling, None)?;
    let hash = SpatialHash::new(&samples.points, keep);
    bake_par(bounds, dims, |x, _| {
        let v = f.value(x);
        let near_seen = !hash.within(x, keep).is_empty();
        let free_seen = v > keep && views.iter().any(|p| visible_from(f, p, x, keep, sampling.max_trace_steps));
        if near_seen || free_seen {
            v
        } else {
            fill
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use sdfreg_core::fields::Primitive;

    #[test]
    fn parallel_bake_matches_core_bake() {
        let s = Primitive::sphere(0.7);
        let b = Aabb::from_center_half_extents(Vec3::zeros(), Vec3::repeat(1.0));
        let a = bake_grid(&s, &b, [9, 8, 7]).unwrap();
        let c = GridField::bake(&s, &b, [9, 8, 7]).unwrap();
        assert_eq!(a.values(), c.values());
    }

    #[test]
    fn noisy_bake_is_seeded() {
        let s = Primitive::sphere(0.7);
        let b = Aabb::from_center_half_extents(Vec3::zeros(), Vec3::repeat(1.0));
        let a = bake_noisy(&s, &b, [8, 8, 8], 0.01, 3).unwrap();
        let c = bake_noisy(&s, &b, [8, 8, 8], 0.01, 3).unwrap();
        let d = bake_noisy(&s, &b, [8, 8, 8], 0.01, 4).unwrap();
        assert_eq!(a.values(), c.values());
        assert_ne!(a.values(), d.values());
    }
}
