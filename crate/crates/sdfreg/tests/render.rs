mod common;

use sdfreg::core::fields::Primitive;
use sdfreg::core::sampling::CameraPose;
use sdfreg::core::Vec3;
use sdfreg::render::{hit_mask, render_image, RenderOptions};
use sdfreg::scene::EmptyField;

fn front_camera(distance: f64, fov: f64) -> CameraPose {
    CameraPose::new(Vec3::new(0.0, 0.0, distance), Vec3::zeros(), Vec3::y(), fov).unwrap()
}

#[test]
fn empty_scene_is_uniform_background() {
    let opts = RenderOptions::default();
    let img = render_image(&EmptyField, &front_camera(3.0, 1.0), 32, 24, &opts);
    assert_eq!(img.pixels.len(), 32 * 24);
    assert!(img.pixels.iter().all(|p| *p == opts.background));
}

#[test]
fn unit_sphere_disc_matches_pinhole_radius() {
    let (d, fov, n) = (4.0f64, 40f64.to_radians(), 201usize);
    let opts = RenderOptions::default();
    let mask = hit_mask(&Primitive::sphere(1.0), &front_camera(d, fov), n, n, &opts);
    // oracle: the silhouette subtends asin(1/d) from the camera
    let expected = (1.0 / d).asin().tan() / (fov / 2.0).tan() * n as f64 / 2.0;
    let centre_row = &mask[(n / 2) * n..(n / 2 + 1) * n];
    let measured = centre_row.iter().filter(|&&h| h).count() as f64 / 2.0;
    assert!((measured - expected).abs() <= 2.0, "radius {measured} vs {expected}");
    let area = mask.iter().filter(|&&h| h).count() as f64;
    let disc = std::f64::consts::PI * expected * expected;
    assert!((area - disc).abs() <= 2.0 * std::f64::consts::PI * expected * 2.0);
}

#[test]
fn renders_are_bit_identical() {
    let f = common::chair();
    let pose = CameraPose::new(Vec3::new(2.0, -2.5, 1.5), Vec3::zeros(), Vec3::z(), 0.9).unwrap();
    let a = render_image(&f, &pose, 64, 48, &RenderOptions::default()).to_ppm();
    let b = render_image(&f, &pose, 64, 48, &RenderOptions::default()).to_ppm();
    assert_eq!(a, b);
    assert!(a.starts_with(b"P6\n64 48\n255\n"));
    assert_eq!(a.len(), "P6\n64 48\n255\n".len() + 64 * 48 * 3);
}
