#![allow(dead_code)]

use std::path::{Path, PathBuf};

use sdfreg::core::fields::{Placed, Primitive};
use sdfreg::core::{Aabb, Sim3, Sim3Params, Vec3};
use sdfreg::library::LibraryManifest;
use sdfreg::scene::{Detection, Instance, LibrarySource, LoadedScene, SceneConfig};

/// Seat, backrest and one leg: no rotational symmetry.
pub fn chair() -> Primitive {
    Primitive::Union {
        parts: vec![
            Placed {
                primitive: Primitive::cuboid(0.5, 0.5, 0.08),
                offset: Vec3::zeros(),
            },
            Placed {
                primitive: Primitive::cuboid(0.5, 0.08, 0.4),
                offset: Vec3::new(0.0, 0.42, 0.48),
            },
            Placed {
                primitive: Primitive::Capsule {
                    a: Vec3::new(0.0, 0.0, -0.5),
                    b: Vec3::new(0.0, 0.0, -0.08),
                    radius: 0.08,
                },
                offset: Vec3::new(0.35, -0.35, 0.0),
            },
        ],
    }
}

pub fn manifest() -> LibraryManifest {
    LibraryManifest::analytic([
        ("ball", Primitive::sphere(0.5)),
        ("crate", Primitive::cuboid(0.4, 0.3, 0.25)),
        ("ring", Primitive::Torus { major: 0.5, minor: 0.15 }),
        ("chair", chair()),
    ])
}

pub fn params(t: [f64; 3], rpy: [f64; 3], sigma: f64) -> Sim3Params {
    Sim3Params {
        tx: t[0],
        ty: t[1],
        tz: t[2],
        roll: rpy[0],
        pitch: rpy[1],
        yaw: rpy[2],
        sigma,
    }
}

/// Scene of posed library objects, each with its exact posed bounds as the
/// detection box.
pub fn scene(name: &str, placed: &[(&str, Sim3Params)]) -> SceneConfig {
    let lib = manifest().build(Path::new(".")).unwrap();
    SceneConfig {
        name: name.into(),
        library: LibrarySource::Inline(manifest()),
        instances: placed
            .iter()
            .map(|(o, p)| Instance {
                object: o.to_string(),
                pose: *p,
            })
            .collect(),
        grid: None,
        detections: placed
            .iter()
            .map(|(o, p)| Detection {
                object: o.to_string(),
                bounds: lib.get(o).unwrap().bounds().transformed(&Sim3::from_params(p).unwrap()),
            })
            .collect(),
    }
}

pub fn load(cfg: SceneConfig) -> LoadedScene {
    cfg.resolve(Path::new(".")).unwrap()
}

pub fn write_json<T: serde::Serialize>(dir: &Path, name: &str, v: &T) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_vec_pretty(v).unwrap()).unwrap();
    p
}

pub fn unit_box() -> Aabb {
    Aabb::from_center_half_extents(Vec3::zeros(), Vec3::repeat(1.0))
}

pub mod degraded {
    use std::f64::consts::PI;
    use std::sync::Arc;

    use sdfreg::bake::bake_partial_coverage;
    use sdfreg::core::sampling::{generate_camera_views, CameraPose, SamplingConfig};
    use sdfreg::core::{SdfField, Sim3, Vec3};
    use sdfreg::render::{hit_mask, RenderOptions};
    use sdfreg::scene::LoadedScene;

    pub const RES: usize = 64;
    pub const IMAGE: usize = 64;

    /// Chair facing +x, backrest toward −x, plus a ball.
    pub fn scene() -> LoadedScene {
        super::load(super::scene(
            "degraded",
            &[
                ("chair", super::params([0.0, 0.0, 0.0], [0.0, 0.0, PI / 2.0], 1.0)),
                ("ball", super::params([1.6, -1.0, -0.2], [0.0; 3], 0.8)),
            ],
        ))
    }

    /// Cameras on a 60° arc in front of the chair (azimuths −30°, 0°, 30°).
    pub fn front_arc(target: &Vec3, radius: f64) -> Vec<CameraPose> {
        let cfg = SamplingConfig {
            n_views: 3,
            azimuth_offset: -PI / 6.0,
            elevation_range: [20f64.to_radians(), 20f64.to_radians()],
            ..SamplingConfig::default()
        };
        let mut views = generate_camera_views(target, radius, &cfg).unwrap();
        // evenly spaced over 360° by construction; squeeze onto the arc
        for (i, v) in views.iter_mut().enumerate() {
            let az = -PI / 6.0 + (PI / 6.0) * i as f64;
            let el = 20f64.to_radians();
            let dir = Vec3::new(el.cos() * az.cos(), el.cos() * az.sin(), el.sin());
            *v = CameraPose::new(target + dir * radius, *target, Vec3::z(), v.fov_y).unwrap();
        }
        views
    }

    pub fn back_view(target: &Vec3, radius: f64) -> CameraPose {
        let el = 20f64.to_radians();
        let dir = Vec3::new(-el.cos(), 0.0, el.sin());
        CameraPose::new(target + dir * radius, *target, Vec3::z(), 50f64.to_radians()).unwrap()
    }

    /// The neighbourhood of the chair baked from the front arc only; unseen
    /// space is filled with the grid diagonal.
    pub fn degrade(scene: &LoadedScene) -> LoadedScene {
        let chair = scene.detection("chair").unwrap().bounds;
        let bounds = chair.inflate(0.4);
        let views = front_arc(&chair.center(), 2.5 * chair.diagonal());
        let voxel = bounds.diagonal() / (RES as f64 * 3f64.sqrt());
        let grid = bake_partial_coverage(
            &*scene.field,
            &bounds,
            [RES; 3],
            &views,
            &SamplingConfig {
                ray_grid: [96, 96],
                ..SamplingConfig::default()
            },
            2.0 * voxel,
            bounds.diagonal(),
        )
        .unwrap();
        let mut out = scene.clone();
        out.field = Arc::new(grid);
        out
    }

    /// Fraction of back-view rays that hit the chair in the complete scene
    /// and also hit something in `f`.
    pub fn back_hit_rate<F: SdfField + ?Sized>(complete: &LoadedScene, f: &F, chair_pose: &Sim3) -> f64 {
        let chair = complete.entry("chair").unwrap().bounds().transformed(chair_pose).inflate(0.02);
        let pose = back_view(&chair.center(), 2.5 * chair.diagonal());
        let opts = RenderOptions::default();
        let rays = sdfreg::core::sampling::ray_grid(&pose, IMAGE, IMAGE);
        let on_chair: Vec<bool> = rays
            .iter()
            .map(|r| {
                sdfreg::core::sampling::sphere_trace(&*complete.field, r, opts.max_steps, opts.epsilon)
                    .is_some_and(|p| chair.contains(&p))
            })
            .collect();
        let hits = hit_mask(f, &pose, IMAGE, IMAGE, &opts);
        let n = on_chair.iter().filter(|&&b| b).count();
        let both = on_chair.iter().zip(&hits).filter(|(a, b)| **a && **b).count();
        both as f64 / n as f64
    }

}
