mod common;

use std::path::Path;
use std::process::Command;

use common::*;
use serde_json::json;

fn sdfreg(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_sdfreg")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fixture(dir: &Path) -> std::path::PathBuf {
    let cfg = scene(
        "cli",
        &[
            ("chair", params([0.1, 0.0, 0.0], [0.0, 0.0, 0.4], 1.1)),
            ("ball", params([1.8, 0.5, 0.0], [0.0; 3], 1.0)),
        ],
    );
    write_json(dir, "scene.json", &cfg)
}

fn pose(dir: &Path) -> std::path::PathBuf {
    write_json(
        dir,
        "pose.json",
        &json!({"position": [3.0, -3.0, 2.0], "look_at": [0.5, 0.0, 0.0], "up": [0, 0, 1], "fov_y": 0.9}),
    )
}

#[test]
fn register_substitute_render_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let scene = fixture(dir.path());
    let report = dir.path().join("report.json");
    let trace = dir.path().join("trace.csv");
    let out = sdfreg(&[
        "register", "--scene", s(&scene), "--object", "chair", "--seed", "3", "--out", s(&report), "--trace-csv", s(&trace),
        "--ply-dir", s(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r: sdfreg::RegistrationReport = sdfreg::io::read_json(&report).unwrap();
    assert_eq!(r.seed, 3);
    assert!(r.errors.unwrap().fine.delta_t < 0.01);
    assert!(trace.exists() && dir.path().join("scene_samples.ply").exists());

    // the config echo drives an identical run
    let cfg = write_json(dir.path(), "config.json", &r.config);
    let report2 = dir.path().join("report2.json");
    let out = sdfreg(&["register", "--scene", s(&scene), "--object", "chair", "--config", s(&cfg), "--seed", "3", "--out", s(&report2)]);
    assert!(out.status.success());
    let r2: sdfreg::RegistrationReport = sdfreg::io::read_json(&report2).unwrap();
    assert_eq!(r.without_timings(), r2.without_timings());

    let pose = pose(dir.path());
    let img = dir.path().join("sub.ppm");
    let out = sdfreg(&[
        "substitute", "--scene", s(&scene), "--report", s(&report), "--replacement", "crate", "--render", s(&pose), "--out", s(&img),
        "--width", "40", "--height", "30",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(std::fs::read(&img).unwrap().starts_with(b"P6\n40 30\n255\n"));

    let a = dir.path().join("a.ppm");
    let b = dir.path().join("b.ppm");
    let lib = write_json(dir.path(), "library.json", &manifest());
    let spec = format!("{}#chair", s(&lib));
    for (field, img) in [(s(&scene), &a), (spec.as_str(), &b)] {
        let out = sdfreg(&["--threads", "2", "render", "--field", field, "--pose", s(&pose), "--out", s(img), "--width", "16", "--height", "16"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let scene = fixture(dir.path());
    let report = dir.path().join("r.json");

    let out = sdfreg(&["register", "--scene", s(&scene), "--object", "ring", "--out", s(&report)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`ring`"));

    let out = sdfreg(&["register", "--scene", "/nonexistent/scene.json", "--object", "chair", "--out", s(&report)]);
    assert_eq!(out.status.code(), Some(2));

    let cfg = write_json(dir.path(), "bad.json", &json!({"scene_sampling": {"view_distance_factor": 0.05}}));
    let out = sdfreg(&["register", "--scene", s(&scene), "--object", "ball", "--config", s(&cfg), "--out", s(&report)]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("scene sampling failed"));
    assert!(!report.exists());
}

#[test]
fn benchmark_command_writes_aggregate() {
    let dir = tempfile::tempdir().unwrap();
    let spec = json!({
        "library": manifest(),
        "objects": ["crate", "ring"],
        "levels": [{"name": "l0", "rotation_max": 0.3, "translation_range": 2.0, "scale_range": [0.8, 1.2]}],
        "scenes_per_level": 1,
        "objects_per_scene": 2,
        "config": {"scene_sampling": {"ray_grid": [16, 16]}, "object_sampling": {"ray_grid": [16, 16]}, "optimizer": {"max_iters": 20}}
    });
    let spec = write_json(dir.path(), "spec.json", &spec);
    let out_dir = dir.path().join("bench");
    let out = Command::new(env!("CARGO_BIN_EXE_sdfreg"))
        .args(["benchmark", "--spec", s(&spec), "--seed", "1", "--out", s(&out_dir)])
        .env(sdfreg::THREADS_ENV, "1")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("aggregate.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}
