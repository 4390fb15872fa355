//! Multi-view surface sampling and the in-optimization resampler.
//!
//! Cameras are placed on a ring of elevations around the object centroid and
//! each shoots a regular grid of rays. Sphere-traced hits become the sample
//! set. During optimization samples are jittered and projected back onto the
//! surface, with part of the set swapped for fresh points from the original
//! extraction.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::fields::{Aabb, SdfField};
use crate::{Error, Result, Sim3, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraPose {
    pub position: Vec3,
    pub look_at: Vec3,
    pub up: Vec3,
    /// Vertical field of view in radians.
    pub fov_y: f64,
}

impl CameraPose {
    pub fn new(position: Vec3, look_at: Vec3, up: Vec3, fov_y: f64) -> Result<Self> {
        let pose = Self {
            position,
            look_at,
            up,
            fov_y,
        };
        pose.validate()?;
        Ok(pose)
    }

    pub fn validate(&self) -> Result<()> {
        let all = self.position.iter().chain(self.look_at.iter()).chain(self.up.iter());
        if all.clone().any(|v| !v.is_finite()) {
            return Err(Error::param("camera", "non-finite pose"));
        }
        let view = self.look_at - self.position;
        if view.norm() <= 0.0 {
            return Err(Error::param("camera", "position coincides with look_at"));
        }
        if view.normalize().cross(&self.up).norm() < 1e-9 {
            return Err(Error::param("camera", "up is parallel to the view direction"));
        }
        if !(self.fov_y > 0.0 && self.fov_y < PI) {
            return Err(Error::param("fov_y", "field of view must be in (0, π)"));
        }
        Ok(())
    }

    /// Orthonormal camera basis `(forward, right, up)`.
    pub fn basis(&self) -> (Vec3, Vec3, Vec3) {
        let f = (self.look_at - self.position).normalize();
        let r = f.cross(&self.up).normalize();
        let u = r.cross(&f);
        (f, r, u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    /// Unit length.
    pub direction: Vec3,
}

impl Ray {
    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.direction * t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingConfig {
    pub n_views: usize,
    /// `[rows, cols]`.
    pub ray_grid: [usize; 2],
    /// Vertical field of view of every camera, radians.
    pub fov_y: f64,
    /// Camera distance as a multiple of the target's half diagonal.
    pub view_distance_factor: f64,
    /// Camera elevation band `[low, high]` in radians.
    pub elevation_range: [f64; 2],
    /// Azimuth of the first camera, radians.
    pub azimuth_offset: f64,
    /// Surface band ξ: acceptance tolerance and dedup scale.
    pub surface_band: f64,
    pub max_trace_steps: usize,
    pub trace_epsilon: f64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            n_views: 6,
            ray_grid: [32, 32],
            fov_y: 50f64.to_radians(),
            view_distance_factor: 2.5,
            elevation_range: [15f64.to_radians(), 60f64.to_radians()],
            azimuth_offset: 0.0,
            surface_band: 0.02,
            max_trace_steps: 256,
            trace_epsilon: 1e-5,
        }
    }
}

impl SamplingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_views < 1 {
            return Err(Error::param("n_views", "need at least one view"));
        }
        if self.ray_grid.iter().any(|&n| n < 1) {
            return Err(Error::param("ray_grid", "grid must be at least 1×1"));
        }
        if !(self.surface_band > 0.0) {
            return Err(Error::param("surface_band", "must be > 0"));
        }
        if !(self.trace_epsilon > 0.0 && self.trace_epsilon <= self.surface_band) {
            return Err(Error::param("trace_epsilon", "must be in (0, surface_band]"));
        }
        if self.max_trace_steps < 1 {
            return Err(Error::param("max_trace_steps", "must be ≥ 1"));
        }
        if !(self.fov_y > 0.0 && self.fov_y < PI) {
            return Err(Error::param("fov_y", "must be in (0, π)"));
        }
        if !(self.view_distance_factor > 0.0) {
            return Err(Error::param("view_distance_factor", "must be > 0"));
        }
        Ok(())
    }
}

/// Which field a sample set was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    Scene,
    Object,
}

impl Frame {
    fn label(self) -> &'static str {
        match self {
            Frame::Scene => "scene field",
            Frame::Object => "object field",
        }
    }
}

/// Surface samples in the owning field's frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub frame: Frame,
    pub points: Vec<Vec3>,
    /// Index into `viewpoints` of the camera that produced each point.
    pub source_view: Vec<u32>,
    /// Camera positions used during extraction.
    pub viewpoints: Vec<Vec3>,
}

impl SampleSet {
    pub fn new(frame: Frame, points: Vec<Vec3>, source_view: Vec<u32>, viewpoints: Vec<Vec3>) -> Result<Self> {
        if points.len() != source_view.len() {
            return Err(Error::InvalidArgument("points and source_view lengths differ".into()));
        }
        if source_view.iter().any(|&v| v as usize >= viewpoints.len()) {
            return Err(Error::InvalidArgument("source_view index out of range".into()));
        }
        Ok(Self {
            frame,
            points,
            source_view,
            viewpoints,
        })
    }

    /// Sample set without camera provenance; every point is attributed to a
    /// single viewpoint at the origin.
    pub fn from_points(frame: Frame, points: Vec<Vec3>) -> Self {
        let n = points.len();
        Self {
            frame,
            points,
            source_view: alloc::vec![0; n],
            viewpoints: alloc::vec![Vec3::zeros()],
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn viewpoint_of(&self, i: usize) -> Vec3 {
        self.viewpoints[self.source_view[i] as usize]
    }

    pub fn centroid(&self) -> Vec3 {
        let n = self.points.len().max(1) as f64;
        self.points.iter().fold(Vec3::zeros(), |a, p| a + p) / n
    }
}

/// `N` cameras evenly spaced in azimuth around `centroid` at distance
/// `radius`. Elevations step linearly across the configured band; a single
/// view sits at the low end of the band.
pub fn generate_camera_views(centroid: &Vec3, radius: f64, cfg: &SamplingConfig) -> Result<Vec<CameraPose>> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::param("radius", "camera distance must be > 0"));
    }
    cfg.validate()?;
    let n = cfg.n_views;
    let [lo, hi] = cfg.elevation_range;
    (0..n)
        .map(|i| {
            let az = cfg.azimuth_offset + 2.0 * PI * i as f64 / n as f64;
            let el = if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 };
            let dir = Vec3::new(el.cos() * az.cos(), el.cos() * az.sin(), el.sin());
            let up = if dir.cross(&Vec3::z()).norm() < 1e-6 {
                Vec3::x()
            } else {
                Vec3::z()
            };
            CameraPose::new(centroid + dir * radius, *centroid, up, cfg.fov_y)
        })
        .collect()
}

/// Pinhole rays through the pixel centers of a `rows × cols` image plane,
/// row-major from the top-left. The horizontal field of view follows the
/// grid aspect ratio.
pub fn ray_grid(pose: &CameraPose, rows: usize, cols: usize) -> Vec<Ray> {
    let (f, r, u) = pose.basis();
    let tan_y = (pose.fov_y * 0.5).tan();
    let tan_x = tan_y * cols as f64 / rows as f64;
    let mut rays = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        let v = (0.5 - (i as f64 + 0.5) / rows as f64) * 2.0 * tan_y;
        for j in 0..cols {
            let h = ((j as f64 + 0.5) / cols as f64 - 0.5) * 2.0 * tan_x;
            rays.push(Ray {
                origin: pose.position,
                direction: (f + r * h + u * v).normalize(),
            });
        }
    }
    rays
}

/// Sphere tracing. Returns the hit point, or `None` when the ray leaves the
/// search range (`‖origin − bounds center‖ + 2 × bounds diagonal`) or runs
/// out of steps.
pub fn sphere_trace<F: SdfField + ?Sized>(f: &F, ray: &Ray, max_steps: usize, epsilon: f64) -> Option<Vec3> {
    let b = f.bounds();
    let t_max = (ray.origin - b.center()).norm() + 2.0 * b.diagonal();
    let mut t = 0.0;
    for _ in 0..max_steps {
        let p = ray.at(t);
        let step = f.trace_step(&p);
        if step.abs() <= epsilon && f.value(&p).abs() <= epsilon {
            return Some(p);
        }
        t += step;
        if !(t >= 0.0 && t <= t_max) {
            return None;
        }
    }
    None
}

/// Traces every view's ray grid and keeps hits within the surface band,
/// optionally restricted to `crop`. Points are deduplicated on a voxel hash
/// of edge ξ/2, first hit wins.
pub fn extract_surface_samples<F: SdfField + ?Sized>(
    f: &F,
    frame: Frame,
    centroid: &Vec3,
    radius: f64,
    cfg: &SamplingConfig,
    crop: Option<&Aabb>,
) -> Result<SampleSet> {
    let views = generate_camera_views(centroid, radius, cfg)?;
    extract_from_views(f, frame, centroid, &views, cfg, crop)
}

/// As [`extract_surface_samples`] with explicit cameras.
pub fn extract_from_views<F: SdfField + ?Sized>(
    f: &F,
    frame: Frame,
    centroid: &Vec3,
    views: &[CameraPose],
    cfg: &SamplingConfig,
    crop: Option<&Aabb>,
) -> Result<SampleSet> {
    cfg.validate()?;
    let cell = cfg.surface_band * 0.5;
    let mut seen = BTreeSet::new();
    let mut points = Vec::new();
    let mut source_view = Vec::new();
    for (vi, pose) in views.iter().enumerate() {
        for ray in ray_grid(pose, cfg.ray_grid[0], cfg.ray_grid[1]) {
            let Some(hit) = sphere_trace(f, &ray, cfg.max_trace_steps, cfg.trace_epsilon) else {
                continue;
            };
            if crop.is_some_and(|c| !c.contains(&hit)) || f.value(&hit).abs() > cfg.surface_band {
                continue;
            }
            let key = (
                (hit.x / cell).floor() as i64,
                (hit.y / cell).floor() as i64,
                (hit.z / cell).floor() as i64,
            );
            if seen.insert(key) {
                points.push(hit);
                source_view.push(vi as u32);
            }
        }
    }
    if points.is_empty() {
        return Err(Error::ExtractionFailure {
            field: frame.label().into(),
            centroid: [centroid.x, centroid.y, centroid.z],
        });
    }
    Ok(SampleSet {
        frame,
        points,
        source_view,
        viewpoints: views.iter().map(|v| v.position).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ResamplerParams {
    /// ω₁: residual above which a point is retained preferentially.
    pub omega1: f64,
    /// ω₂: fraction of the set replaced by fresh points each refresh.
    pub omega2: f64,
    /// ρ: perturbation standard deviation. `None` means scene radius / 20.
    pub rho: Option<f64>,
    /// Iterations between refreshes.
    pub refresh_period: usize,
}

impl Default for ResamplerParams {
    fn default() -> Self {
        Self {
            omega1: 0.01,
            omega2: 0.02,
            rho: None,
            refresh_period: 10,
        }
    }
}

impl ResamplerParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.omega2) {
            return Err(Error::param("omega2", "must be in [0, 1]"));
        }
        if let Some(rho) = self.rho {
            if !(rho > 0.0) {
                return Err(Error::param("rho", "must be > 0"));
            }
        }
        if self.refresh_period < 1 {
            return Err(Error::param("refresh_period", "must be ≥ 1"));
        }
        if !self.omega1.is_finite() {
            return Err(Error::param("omega1", "must be finite"));
        }
        Ok(())
    }

    /// ρ for a scene of radius `scene_radius`.
    pub fn rho_for(&self, scene_radius: f64) -> f64 {
        self.rho.unwrap_or(scene_radius / 20.0)
    }
}

/// `|f_src(x) − f_dst(M x) / s_M|` for a map `M` from the source frame to the
/// destination frame with scale `s_M`. Both distances end up in source units.
pub fn cross_residual<A: SdfField + ?Sized, B: SdfField + ?Sized>(x: &Vec3, src: &A, dst: &B, map: &Sim3) -> f64 {
    (src.value(x) - dst.value(&map.apply(x)) / map.scale()).abs()
}

/// Moves `x` onto the band `|f| ≤ band` with at most `max_steps` Newton steps.
pub fn project_to_surface<F: SdfField + ?Sized>(f: &F, x: &Vec3, band: f64, max_steps: usize) -> Option<Vec3> {
    let mut p = *x;
    for _ in 0..=max_steps {
        let (v, g) = f.value_and_gradient(&p);
        if !v.is_finite() {
            return None;
        }
        if v.abs() <= band {
            return Some(p);
        }
        let g2 = g.norm_squared();
        if !(g2 > 1e-16) {
            return None;
        }
        p -= g * (v / g2);
    }
    None
}

fn point_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Refreshes a sample set.
///
/// Each point is jittered by isotropic Gaussian noise of std `rho` and
/// projected back into the surface band of `f_src` (at most 10 Newton steps,
/// otherwise dropped). `round(ω₂ · n)` fresh points are drawn uniformly from
/// `pool`. The result is truncated back to `n` keeping, in order: points
/// whose cross residual against `f_dst` (through `map`) exceeds ω₁, the
/// fresh points, then the rest. Every point gets its own RNG stream, so the
/// output depends only on `seed`.
#[allow(clippy::too_many_arguments)]
pub fn resample<A: SdfField + ?Sized, B: SdfField + ?Sized>(
    current: &SampleSet,
    pool: &SampleSet,
    f_src: &A,
    f_dst: &B,
    map: &Sim3,
    params: &ResamplerParams,
    rho: f64,
    band: f64,
    seed: u64,
) -> Result<SampleSet> {
    if current.is_empty() {
        return Err(Error::InvalidArgument("cannot resample an empty set".into()));
    }
    params.validate()?;
    if !(rho > 0.0) {
        return Err(Error::param("rho", "must be > 0"));
    }
    let n = current.len();
    let mut priority = Vec::new();
    let mut rest = Vec::new();
    for (i, x) in current.points.iter().enumerate() {
        let mut rng = point_rng(seed, i as u64);
        let noise = Vec3::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        ) * rho;
        let Some(p) = project_to_surface(f_src, &(x + noise), band, 10) else {
            continue;
        };
        let entry = (p, current.source_view[i]);
        if cross_residual(&p, f_src, f_dst, map) > params.omega1 {
            priority.push(entry);
        } else {
            rest.push(entry);
        }
    }
    let mut fresh = Vec::new();
    if !pool.is_empty() {
        let k = (params.omega2 * n as f64).round() as usize;
        let mut rng = point_rng(seed, u64::MAX);
        for _ in 0..k {
            let j = rng.random_range(0..pool.len());
            fresh.push((pool.points[j], pool.source_view[j]));
        }
    }
    let merged: Vec<(Vec3, u32)> = priority.into_iter().chain(fresh).chain(rest).take(n).collect();
    if merged.is_empty() {
        return Err(Error::ResampleFailure);
    }
    let viewpoints = if pool.viewpoints.len() >= current.viewpoints.len() {
        pool.viewpoints.clone()
    } else {
        current.viewpoints.clone()
    };
    let (points, source_view): (Vec<_>, Vec<_>) = merged.into_iter().unzip();
    SampleSet::new(current.frame, points, source_view, viewpoints).map_err(|e| match e {
        Error::InvalidArgument(m) => Error::InvalidArgument(format!("resample: {m}")),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{shared, Primitive, SharedField};

    fn cfg() -> SamplingConfig {
        SamplingConfig::default()
    }

    #[test]
    fn single_view_looks_at_centroid() {
        let c = Vec3::new(0.5, -0.2, 0.3);
        let views = generate_camera_views(&c, 3.0, &SamplingConfig { n_views: 1, ..cfg() }).unwrap();
        assert_eq!(views.len(), 1);
        let v = &views[0];
        let to_c = c - v.position;
        let (f, _, _) = v.basis();
        assert!((f.dot(&to_c) - to_c.norm()).abs() < 1e-12);
        // azimuth 0: camera displaced along +x only (plus elevation)
        assert!((v.position.y - c.y).abs() < 1e-12);
    }

    #[test]
    fn six_views_evenly_spaced() {
        let c = Vec3::zeros();
        let views = generate_camera_views(&c, 2.0, &cfg()).unwrap();
        assert_eq!(views.len(), 6);
        let az: Vec<f64> = views.iter().map(|v| v.position.y.atan2(v.position.x)).collect();
        for w in az.windows(2) {
            let d = crate::transforms::wrap_angle(w[1] - w[0]);
            assert!((d - PI / 3.0).abs() < 1e-9);
        }
        for v in &views {
            assert!(((v.position - c).norm() - 2.0).abs() < 1e-12);
        }
        assert!(generate_camera_views(&c, 0.0, &cfg()).is_err());
    }

    #[test]
    fn ray_grid_geometry() {
        let pose = CameraPose::new(Vec3::new(3.0, 0.0, 0.0), Vec3::zeros(), Vec3::z(), 0.8).unwrap();
        let one = ray_grid(&pose, 1, 1);
        assert_eq!(one.len(), 1);
        assert!((one[0].direction - Vec3::new(-1.0, 0.0, 0.0)).norm() < 1e-12);

        let rays = ray_grid(&pose, 32, 32);
        assert!(rays.iter().all(|r| (r.direction.norm() - 1.0).abs() < 1e-12));
        // pinhole oracle for the corner pixel
        let t = (0.4f64).tan();
        let off = (0.5 - 0.5 / 32.0) * 2.0 * t;
        let expected = (off * off * 2.0).sqrt().atan();
        let angle = rays[0].direction.dot(&one[0].direction).clamp(-1.0, 1.0).acos();
        assert!((angle - expected).abs() < 1e-9);
    }

    #[test]
    fn trace_unit_sphere() {
        let s = Primitive::sphere(1.0);
        let ray = Ray {
            origin: Vec3::new(3.0, 0.0, 0.0),
            direction: Vec3::new(-1.0, 0.0, 0.0),
        };
        let hit = sphere_trace(&s, &ray, 256, 1e-5).unwrap();
        assert!((hit - Vec3::x()).norm() < 1e-4);
        let miss = Ray {
            origin: Vec3::new(3.0, 2.0, 0.0),
            direction: Vec3::new(-1.0, 0.0, 0.0),
        };
        assert!(sphere_trace(&s, &miss, 256, 1e-5).is_none());
    }

    #[test]
    fn trace_agrees_with_dense_march() {
        let f: SharedField = shared(Primitive::Union {
            parts: alloc::vec![
                crate::fields::Placed {
                    primitive: Primitive::cuboid(0.6, 0.4, 0.3),
                    offset: Vec3::zeros()
                },
                crate::fields::Placed {
                    primitive: Primitive::sphere(0.35),
                    offset: Vec3::new(0.5, 0.3, 0.3)
                },
            ],
        });
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut hits = 0;
        for _ in 0..1000 {
            let origin = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 0.0).normalize() * 2.5
                + Vec3::new(0.0, 0.0, rng.random_range(-0.5..0.5));
            let target = Vec3::new(
                rng.random_range(-0.9..0.9),
                rng.random_range(-0.7..0.7),
                rng.random_range(-0.6..0.6),
            );
            let ray = Ray {
                origin,
                direction: (target - origin).normalize(),
            };
            let traced = sphere_trace(f.as_ref(), &ray, 4096, 1e-7);
            // dense march oracle: first sign change at step 1e-4
            let mut oracle = None;
            let mut t = 0.0;
            let mut prev = f.value(&ray.at(0.0));
            while t < 6.0 {
                t += 1e-4;
                let v = f.value(&ray.at(t));
                if prev > 0.0 && v <= 0.0 {
                    oracle = Some(ray.at(t));
                    break;
                }
                prev = v;
            }
            match (traced, oracle) {
                (Some(a), Some(b)) => {
                    hits += 1;
                    assert!((a - b).norm() < 1e-3);
                }
                (None, None) => {}
                other => panic!("disagreement {other:?}"),
            }
        }
        assert!(hits > 300);
    }

    #[test]
    fn sphere_samples_on_surface() {
        let s = Primitive::sphere(1.0);
        let set = extract_surface_samples(&s, Frame::Object, &Vec3::zeros(), 2.5, &cfg(), None).unwrap();
        assert!(set.len() > 1000);
        assert!(set.points.iter().all(|p| (p.norm() - 1.0).abs() < 1e-3));
        assert_eq!(set.viewpoints.len(), 6);
    }

    #[test]
    fn single_view_sees_one_hemisphere() {
        let s = Primitive::sphere(1.0);
        let c = SamplingConfig { n_views: 1, ..cfg() };
        let set = extract_surface_samples(&s, Frame::Object, &Vec3::zeros(), 3.0, &c, None).unwrap();
        let cam = set.viewpoints[0].normalize();
        for p in &set.points {
            let angle = p.normalize().dot(&cam).clamp(-1.0, 1.0).acos();
            assert!(angle <= PI / 2.0 + 1e-6);
        }
    }

    #[test]
    fn extraction_is_deterministic_and_fails_loudly() {
        let s = Primitive::cuboid(0.5, 0.3, 0.2);
        let a = extract_surface_samples(&s, Frame::Scene, &Vec3::zeros(), 2.0, &cfg(), None).unwrap();
        let b = extract_surface_samples(&s, Frame::Scene, &Vec3::zeros(), 2.0, &cfg(), None).unwrap();
        assert_eq!(a, b);
        let far = Aabb::from_center_half_extents(Vec3::repeat(10.0), Vec3::repeat(0.1));
        let err = extract_surface_samples(&s, Frame::Scene, &Vec3::zeros(), 2.0, &cfg(), Some(&far)).unwrap_err();
        assert!(matches!(err, Error::ExtractionFailure { .. }));
        assert!(alloc::format!("{err}").contains("scene field"));
    }

    #[test]
    fn hidden_face_needs_multiple_views() {
        // box viewed face-on from +x: the -x face is never seen by that view
        let s = Primitive::cuboid(0.4, 0.4, 0.4);
        let hostile = SamplingConfig {
            n_views: 1,
            elevation_range: [0.0, 0.0],
            ..cfg()
        };
        let single = extract_surface_samples(&s, Frame::Object, &Vec3::zeros(), 2.0, &hostile, None).unwrap();
        let multi = extract_surface_samples(
            &s,
            Frame::Object,
            &Vec3::zeros(),
            2.0,
            &SamplingConfig {
                n_views: 4,
                elevation_range: [0.0, 0.0],
                ..cfg()
            },
            None,
        )
        .unwrap();
        let on_back = |p: &Vec3| (p.x + 0.4).abs() < 1e-3;
        assert!(!single.points.iter().any(on_back));
        assert!(multi.points.iter().any(on_back));
    }

    fn sphere_pool() -> (Primitive, SampleSet) {
        let s = Primitive::sphere(1.0);
        let set = extract_surface_samples(&s, Frame::Object, &Vec3::zeros(), 2.5, &cfg(), None).unwrap();
        (s, set)
    }

    #[test]
    fn resample_tiny_rho_is_identity() {
        let (s, set) = sphere_pool();
        let p = ResamplerParams {
            omega2: 0.0,
            ..Default::default()
        };
        let out = resample(&set, &set, &s, &s, &Sim3::identity(), &p, 1e-12, 0.02, 3).unwrap();
        assert_eq!(out.len(), set.len());
        for (a, b) in out.points.iter().zip(&set.points) {
            assert!((a - b).norm() < 1e-9);
        }
        // with exploration on, every output point still comes from the input
        let out = resample(&set, &set, &s, &s, &Sim3::identity(), &ResamplerParams::default(), 1e-12, 0.02, 3).unwrap();
        let hash = crate::spatial::SpatialHash::new(&set.points, 0.05);
        for p in &out.points {
            assert!(hash.nearest(p).unwrap().1.sqrt() < 1e-9);
        }
    }

    #[test]
    fn resample_stays_in_band_and_is_deterministic() {
        let (s, set) = sphere_pool();
        let bigger = Primitive::sphere(1.3);
        let p = ResamplerParams::default();
        let a = resample(&set, &set, &s, &bigger, &Sim3::identity(), &p, 0.1, 0.02, 42).unwrap();
        let b = resample(&set, &set, &s, &bigger, &Sim3::identity(), &p, 0.1, 0.02, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.points.iter().all(|x| s.value(x).abs() <= 0.02));
        assert!(a.len() <= set.len());
        let c = resample(&set, &set, &s, &bigger, &Sim3::identity(), &p, 0.1, 0.02, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn resample_keeps_high_residual_points() {
        let (s, set) = sphere_pool();
        // destination only matches the +x half of the sphere; the other half
        // has large cross residual and must survive truncation
        let dst = Primitive::cuboid(5.0, 5.0, 5.0);
        let out = resample(&set, &set, &s, &dst, &Sim3::identity(), &ResamplerParams::default(), 1e-12, 0.02, 1).unwrap();
        let n_hi = set.points.iter().filter(|x| cross_residual(x, &s, &dst, &Sim3::identity()) > 0.01).count();
        let kept = out.points.iter().filter(|x| cross_residual(x, &s, &dst, &Sim3::identity()) > 0.01).count();
        assert_eq!(n_hi, kept);
    }

    #[test]
    fn resample_empty_and_total_drop() {
        let (s, set) = sphere_pool();
        let empty = SampleSet::from_points(Frame::Object, Vec::new());
        assert!(resample(&empty, &set, &s, &s, &Sim3::identity(), &ResamplerParams::default(), 0.1, 0.02, 1).is_err());
        // a constant field can never be projected into the band
        #[derive(Debug)]
        struct Flat;
        impl SdfField for Flat {
            fn value(&self, _: &Vec3) -> f64 {
                1.0
            }
            fn gradient(&self, _: &Vec3) -> Vec3 {
                Vec3::zeros()
            }
            fn bounds(&self) -> Aabb {
                Aabb::from_center_half_extents(Vec3::zeros(), Vec3::repeat(1.0))
            }
        }
        let none = SampleSet::from_points(Frame::Object, Vec::new());
        let err = resample(&set, &none, &Flat, &s, &Sim3::identity(), &ResamplerParams::default(), 0.1, 0.02, 1);
        assert!(matches!(err, Err(Error::ResampleFailure)));
    }
}
