//! Seeded synthetic benchmark: rooms of posed library objects, registered
//! cell by cell in parallel.

use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sdfreg_core::fields::Aabb;
use sdfreg_core::transforms::{axis_angle, rotation_to_euler};
use sdfreg_core::{Sim3, Sim3Params, Vec3};

use crate::bake::{bake_grid, bake_noisy};
use crate::error::{HarnessError, Result, Stage};
use crate::io;
use crate::library::LibraryManifest;
use crate::registration::{run_registration, RegistrationConfig, RegistrationReport};
use crate::scene::{Detection, Instance, LibrarySource, LoadedScene, SceneConfig};

/// Placement attempts per object before generation gives up.
pub const MAX_PLACEMENT_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationLevel {
    pub name: String,
    /// Largest rotation angle about a uniformly random axis, radians (≤ π).
    pub rotation_max: f64,
    /// Object origins are drawn from `[-range, range]³`.
    pub translation_range: f64,
    pub scale_range: [f64; 2],
}

/// Scene fields are baked to grids of `resolution³` before registration,
/// optionally with Gaussian noise on every sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BakeSpec {
    pub resolution: usize,
    #[serde(default)]
    pub noise: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSpec {
    pub library: LibraryManifest,
    /// Objects to place; empty means every library entry.
    #[serde(default)]
    pub objects: Vec<String>,
    pub levels: Vec<PerturbationLevel>,
    pub scenes_per_level: usize,
    pub objects_per_scene: usize,
    #[serde(default)]
    pub config: RegistrationConfig,
    /// Regularizer weights to sweep; empty runs the config's weight only.
    #[serde(default)]
    pub regularizer_weights: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bake: Option<BakeSpec>,
}

impl BenchmarkSpec {
    fn object_names(&self) -> Vec<String> {
        if self.objects.is_empty() {
            self.library.objects.keys().cloned().collect()
        } else {
            self.objects.clone()
        }
    }

    fn weights(&self) -> Vec<f64> {
        if self.regularizer_weights.is_empty() {
            vec![self.config.optimizer.regularizer_weight]
        } else {
            self.regularizer_weights.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(HarnessError::load(format!("benchmark spec: {m}")));
        for name in self.object_names() {
            if !self.library.objects.contains_key(&name) {
                return fail(format!("object `{name}` is not in the library"));
            }
        }
        if self.library.objects.is_empty() {
            return fail("empty library".into());
        }
        if self.objects_per_scene < 1 || self.scenes_per_level < 1 || self.levels.is_empty() {
            return fail("need at least one level, scene and object per scene".into());
        }
        for l in &self.levels {
            let [lo, hi] = l.scale_range;
            if !(0.0..=std::f64::consts::PI).contains(&l.rotation_max)
                || !(l.translation_range >= 0.0 && l.translation_range.is_finite())
                || !(lo > 0.0 && lo <= hi && hi.is_finite())
            {
                return fail(format!("level `{}` has an invalid range", l.name));
            }
        }
        if let Some(b) = &self.bake {
            if b.resolution < 2 || !(b.noise >= 0.0) {
                return fail("bake needs resolution ≥ 2 and noise ≥ 0".into());
            }
        }
        self.config.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedScene {
    pub level: usize,
    pub config: SceneConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSuite {
    pub seed: u64,
    pub spec: BenchmarkSpec,
    pub scenes: Vec<GeneratedScene>,
}

fn random_rotation(rng: &mut ChaCha8Rng, max_angle: f64) -> (f64, f64, f64) {
    let axis = loop {
        let v = Vec3::from_fn(|_, _| StandardNormal.sample(rng));
        if v.norm() > 1e-6 {
            break v;
        }
    };
    let angle = if max_angle > 0.0 { rng.random_range(0.0..=max_angle) } else { 0.0 };
    rotation_to_euler(&axis_angle(&axis, angle))
}

/// Expands `spec` into scenes. Scene `s` of level `l` draws from its own
/// ChaCha8 stream of `seed`.
pub fn generate_benchmark(seed: u64, spec: &BenchmarkSpec) -> Result<BenchmarkSuite> {
    spec.validate()?;
    let library = spec.library.build(Path::new("."))?;
    let names = spec.object_names();
    let mut scenes = Vec::new();
    for (li, level) in spec.levels.iter().enumerate() {
        for s in 0..spec.scenes_per_level {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream((li * spec.scenes_per_level + s) as u64);
            let mut instances = Vec::new();
            let mut detections = Vec::new();
            let mut placed: Vec<Aabb> = Vec::new();
            for m in 0..spec.objects_per_scene {
                let object = names[(s * spec.objects_per_scene + m) % names.len()].clone();
                let bounds = library.get(&object).expect("validated").bounds();
                let mut attempt = 0;
                let (pose, posed) = loop {
                    if attempt == MAX_PLACEMENT_ATTEMPTS {
                        return Err(HarnessError::Stage {
                            stage: Stage::Benchmark,
                            source: sdfreg_core::Error::InvalidArgument(format!(
                                "cannot place `{object}` in level `{}` scene {s} without overlap after {MAX_PLACEMENT_ATTEMPTS} attempts",
                                level.name
                            )),
                        });
                    }
                    attempt += 1;
                    let (roll, pitch, yaw) = random_rotation(&mut rng, level.rotation_max);
                    let r = level.translation_range;
                    let [lo, hi] = level.scale_range;
                    let pose = Sim3Params {
                        tx: if r > 0.0 { rng.random_range(-r..=r) } else { 0.0 },
                        ty: if r > 0.0 { rng.random_range(-r..=r) } else { 0.0 },
                        tz: if r > 0.0 { rng.random_range(-r..=r) } else { 0.0 },
                        roll,
                        pitch,
                        yaw,
                        sigma: if hi > lo { rng.random_range(lo..=hi) } else { lo },
                    };
                    let t = Sim3::from_params(&pose).map_err(HarnessError::stage(Stage::Benchmark))?;
                    let posed = bounds.transformed(&t);
                    if placed.iter().all(|b| !b.intersects(&posed)) {
                        break (pose, posed);
                    }
                };
                placed.push(posed);
                instances.push(Instance {
                    object: object.clone(),
                    pose,
                });
                detections.push(Detection { object, bounds: posed });
            }
            scenes.push(GeneratedScene {
                level: li,
                config: SceneConfig {
                    name: format!("{}-{s:03}", level.name),
                    library: LibrarySource::Inline(spec.library.clone()),
                    instances,
                    grid: None,
                    detections,
                },
            });
        }
    }
    Ok(BenchmarkSuite {
        seed,
        spec: spec.clone(),
        scenes,
    })
}

/// One registration job: an object of a generated scene under one
/// regularizer weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobResult {
    pub scene: String,
    pub level: usize,
    pub object: String,
    pub regularizer_weight: f64,
    pub report: Option<RegistrationReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn job_seed(seed: u64, index: usize) -> u64 {
    let mut z = seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn load(scene: &GeneratedScene, bake: Option<&BakeSpec>, seed: u64) -> Result<LoadedScene> {
    let mut loaded = scene.config.clone().resolve(Path::new("."))?;
    if let Some(b) = bake {
        let bounds = loaded.field.bounds();
        let bounds = bounds.inflate(0.1 * bounds.diagonal());
        let dims = [b.resolution; 3];
        let grid = if b.noise > 0.0 {
            bake_noisy(&*loaded.field, &bounds, dims, b.noise, seed)
        } else {
            bake_grid(&*loaded.field, &bounds, dims)
        }
        .map_err(HarnessError::stage(Stage::Benchmark))?;
        loaded.field = Arc::new(grid);
    }
    Ok(loaded)
}

/// Runs every job on the current rayon pool. Results come back in job order
/// whatever the thread count.
pub fn run_benchmark(suite: &BenchmarkSuite) -> Result<Vec<JobResult>> {
    let spec = &suite.spec;
    let scenes = suite
        .scenes
        .par_iter()
        .enumerate()
        .map(|(i, s)| load(s, spec.bake.as_ref(), job_seed(suite.seed, i)))
        .collect::<Result<Vec<_>>>()?;
    let mut jobs = Vec::new();
    for (si, scene) in suite.scenes.iter().enumerate() {
        for d in &scene.config.detections {
            for &w in &spec.weights() {
                jobs.push((si, d.object.clone(), w));
            }
        }
    }
    Ok(jobs
        .par_iter()
        .enumerate()
        .map(|(k, (si, object, w))| {
            let mut cfg = spec.config;
            cfg.optimizer.regularizer_weight = *w;
            let gen = &suite.scenes[*si];
            let (report, error) = match run_registration(&scenes[*si], object, &cfg, job_seed(suite.seed, k)) {
                Ok(o) => (Some(o.report), None),
                Err(e) => (None, Some(e.to_string())),
            };
            JobResult {
                scene: gen.config.name.clone(),
                level: gen.level,
                object: object.clone(),
                regularizer_weight: *w,
                report,
                error,
            }
        })
        .collect())
}

/// Medians over the successful jobs of one (level, weight, object) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub object: String,
    #[serde(rename = "delta_t")]
    pub delta_t: f64,
    #[serde(rename = "delta_R")]
    pub delta_r: f64,
    #[serde(rename = "delta_s")]
    pub delta_s: f64,
    pub level: String,
    pub regularizer_weight: f64,
    pub trials: usize,
    pub failures: usize,
    pub init_delta_t: f64,
    #[serde(rename = "init_delta_R")]
    pub init_delta_r: f64,
    pub init_delta_s: f64,
}

pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

pub fn aggregate(suite: &BenchmarkSuite, results: &[JobResult]) -> Vec<CellSummary> {
    let mut keys: Vec<(usize, u64, String)> = Vec::new();
    for r in results {
        let key = (r.level, r.regularizer_weight.to_bits(), r.object.clone());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.sort_by(|a, b| (a.0, &a.2).cmp(&(b.0, &b.2)).then(f64::from_bits(a.1).total_cmp(&f64::from_bits(b.1))));
    keys.into_iter()
        .map(|(level, w, object)| {
            let cell: Vec<&JobResult> = results
                .iter()
                .filter(|r| r.level == level && r.regularizer_weight.to_bits() == w && r.object == object)
                .collect();
            let errs: Vec<_> = cell.iter().filter_map(|r| r.report.as_ref()?.errors).collect();
            let col = |f: &dyn Fn(&crate::registration::StageErrors) -> f64| median(&mut errs.iter().map(f).collect::<Vec<_>>());
            CellSummary {
                delta_t: col(&|e| e.fine.delta_t),
                delta_r: col(&|e| e.fine.delta_r),
                delta_s: col(&|e| e.fine.delta_s),
                level: suite.spec.levels[level].name.clone(),
                regularizer_weight: f64::from_bits(w),
                trials: cell.len(),
                failures: cell.iter().filter(|r| r.report.is_none()).count(),
                init_delta_t: col(&|e| e.initial.delta_t),
                init_delta_r: col(&|e| e.initial.delta_r),
                init_delta_s: col(&|e| e.initial.delta_s),
                object,
            }
        })
        .collect()
}

pub fn aggregate_csv(cells: &[CellSummary]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for c in cells {
        w.serialize(c)?;
    }
    w.into_inner().map_err(|e| HarnessError::Csv(e.into_error().into()))
}

/// Writes `suite.json`, one scene file per generated scene, one report per
/// successful job and `aggregate.csv` under `dir`.
pub fn write_benchmark(dir: &Path, suite: &BenchmarkSuite, results: &[JobResult]) -> Result<Vec<CellSummary>> {
    io::write_json(&dir.join("suite.json"), suite)?;
    for s in &suite.scenes {
        io::write_json(&dir.join("scenes").join(format!("{}.json", s.config.name)), &s.config)?;
    }
    for r in results {
        let name = format!("{}__{}__w{}.json", r.scene, r.object, r.regularizer_weight);
        io::write_json(&dir.join("reports").join(name), r)?;
    }
    let cells = aggregate(suite, results);
    io::atomic_write(&dir.join("aggregate.csv"), &aggregate_csv(&cells)?)?;
    Ok(cells)
}
