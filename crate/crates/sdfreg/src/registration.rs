//! End-to-end registration of one library object against a scene.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sdfreg_core::coarse::{initial_registration, CoarseConfig, CoarseDiagnostics};
use sdfreg_core::fields::{Aabb, SdfField};
use sdfreg_core::fine::{optimize, FineProblem, LossBreakdown, OptimizationStatus, OptimizationTrace, OptimizerConfig};
use sdfreg_core::metrics::{registration_errors, RegistrationErrors};
use sdfreg_core::sampling::{extract_surface_samples, Frame, SampleSet, SamplingConfig};
use sdfreg_core::{Sim3, Sim3Params};

use crate::error::{HarnessError, Result, Stage};
use crate::io;
use crate::scene::LoadedScene;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegistrationConfig {
    /// Cameras around the detection box.
    pub scene_sampling: SamplingConfig,
    /// Cameras around the library object.
    pub object_sampling: SamplingConfig,
    pub coarse: CoarseConfig,
    pub optimizer: OptimizerConfig,
    /// Scene radius r for the resampler; `None` is half the scene bounds
    /// diagonal.
    pub scene_radius: Option<f64>,
    /// Inflation of the detection box before cropping scene samples.
    pub crop_margin: f64,
}

impl Default for RegistrationConfig {
    fn default() -> Self {
        Self {
            scene_sampling: SamplingConfig::default(),
            object_sampling: SamplingConfig::default(),
            coarse: CoarseConfig::default(),
            optimizer: OptimizerConfig::default(),
            scene_radius: None,
            crop_margin: 0.05,
        }
    }
}

impl RegistrationConfig {
    pub fn validate(&self) -> Result<()> {
        self.scene_sampling.validate().map_err(HarnessError::Config)?;
        self.object_sampling.validate().map_err(HarnessError::Config)?;
        self.coarse.validate().map_err(HarnessError::Config)?;
        self.optimizer.validate().map_err(HarnessError::Config)?;
        if let Some(r) = self.scene_radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(HarnessError::load(format!("scene_radius must be finite and > 0, got {r}")));
            }
        }
        if !(self.crop_margin >= 0.0 && self.crop_margin.is_finite()) {
            return Err(HarnessError::load(format!("crop_margin must be finite and ≥ 0, got {}", self.crop_margin)));
        }
        Ok(())
    }
}

/// Row-major `[R|t]`, the scale, and the Euler parameters of a transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformRecord {
    pub matrix: [f64; 12],
    pub scale: f64,
    pub params: Sim3Params,
}

impl From<&Sim3> for TransformRecord {
    fn from(t: &Sim3) -> Self {
        Self {
            matrix: t.to_row_major(),
            scale: t.scale(),
            params: t.to_params(),
        }
    }
}

impl TransformRecord {
    pub fn transform(&self) -> Result<Sim3> {
        Sim3::from_row_major(&self.matrix, self.scale).map_err(|e| HarnessError::load(format!("report transform: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub status: OptimizationStatus,
    pub iterations: usize,
    /// Iteration whose parameters were returned.
    pub returned_iteration: usize,
    pub resample_count: usize,
    pub initial_loss: LossBreakdown,
    pub final_loss: LossBreakdown,
}

impl TraceSummary {
    fn new(trace: &OptimizationTrace, status: OptimizationStatus, returned: usize, loss: LossBreakdown) -> Self {
        Self {
            status,
            iterations: trace.records.len(),
            returned_iteration: returned,
            resample_count: trace.records.iter().filter(|r| r.resampled).count(),
            initial_loss: trace.records.first().map(|r| r.loss).unwrap_or_default(),
            final_loss: loss,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageErrors {
    #[serde(rename = "init")]
    pub initial: RegistrationErrors,
    #[serde(rename = "final")]
    pub fine: RegistrationErrors,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Timings {
    pub init_seconds: f64,
    pub optimize_seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleCounts {
    pub scene: usize,
    pub object: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegistrationReport {
    pub scene: String,
    pub object: String,
    pub seed: u64,
    #[serde(rename = "T_init")]
    pub t_init: TransformRecord,
    #[serde(rename = "T_final")]
    pub t_final: TransformRecord,
    pub coarse: CoarseDiagnostics,
    pub optimization: TraceSummary,
    pub samples: SampleCounts,
    /// Present when the scene carries ground truth for the object.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub errors: Option<StageErrors>,
    pub timings: Timings,
    pub config: RegistrationConfig,
}

impl RegistrationReport {
    /// The report with timings zeroed, for comparisons.
    pub fn without_timings(&self) -> Self {
        Self {
            timings: Timings::default(),
            ..self.clone()
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        io::write_json(path, self)
    }
}

/// Report plus the in-memory artifacts of a run.
#[derive(Debug, Clone)]
pub struct RegistrationOutcome {
    pub report: RegistrationReport,
    pub trace: OptimizationTrace,
    pub scene_samples: SampleSet,
    pub object_samples: SampleSet,
}

/// Samples the scene around the object's detection box and the library
/// object around its own bounds, then runs the coarse and fine stages.
pub fn run_registration(scene: &LoadedScene, object: &str, cfg: &RegistrationConfig, seed: u64) -> Result<RegistrationOutcome> {
    cfg.validate()?;
    let entry = scene.entry(object)?;
    let detection = scene.detection(object)?.bounds;
    let obj_bounds = entry.bounds();
    let crop = detection.inflate(cfg.crop_margin);

    let start = Instant::now();
    let scene_samples = sample_around(&*scene.field, Frame::Scene, &detection, &cfg.scene_sampling, Some(&crop))
        .map_err(HarnessError::stage(Stage::SceneSampling))?;
    let object_samples = sample_around(&*entry.field, Frame::Object, &obj_bounds, &cfg.object_sampling, None)
        .map_err(HarnessError::stage(Stage::ObjectSampling))?;
    let (t_init, coarse) = initial_registration(&scene_samples, &object_samples, &*scene.field, &*entry.field, &cfg.coarse, seed)
        .map_err(HarnessError::stage(Stage::Initialisation))?;
    let init_seconds = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let problem = FineProblem {
        scene: &*scene.field,
        object: &*entry.field,
        scene_samples: &scene_samples,
        object_samples: &object_samples,
        crop: Some(crop),
        scene_radius: cfg.scene_radius.unwrap_or_else(|| scene.field.bounds().diagonal() / 2.0),
        surface_band: cfg.scene_sampling.surface_band,
    };
    let fine = optimize(&problem, &t_init, &cfg.optimizer, seed).map_err(HarnessError::stage(Stage::Optimisation))?;
    let optimize_seconds = start.elapsed().as_secs_f64();

    let errors = match scene.ground_truth(object) {
        Some(gt) => {
            let score = |t: &Sim3| {
                registration_errors(&gt, t, &obj_bounds, &entry.symmetry).map_err(HarnessError::stage(Stage::Optimisation))
            };
            Some(StageErrors {
                initial: score(&t_init)?,
                fine: score(&fine.transform)?,
            })
        }
        None => None,
    };

    let report = RegistrationReport {
        scene: scene.config.name.clone(),
        object: object.to_string(),
        seed,
        t_init: (&t_init).into(),
        t_final: (&fine.transform).into(),
        coarse,
        optimization: TraceSummary::new(&fine.trace, fine.status, fine.iteration, fine.loss),
        samples: SampleCounts {
            scene: scene_samples.len(),
            object: object_samples.len(),
        },
        errors,
        timings: Timings {
            init_seconds,
            optimize_seconds,
        },
        config: *cfg,
    };
    Ok(RegistrationOutcome {
        report,
        trace: fine.trace,
        scene_samples,
        object_samples,
    })
}

fn sample_around<F: SdfField + ?Sized>(
    f: &F,
    frame: Frame,
    target: &Aabb,
    cfg: &SamplingConfig,
    crop: Option<&Aabb>,
) -> sdfreg_core::Result<SampleSet> {
    let radius = cfg.view_distance_factor * target.diagonal() / 2.0;
    extract_surface_samples(f, frame, &target.center(), radius, cfg, crop)
}
