use alloc::boxed::Box;
use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::kernel::KernelParams;
use super::loss::{evaluate, FineParams, LossBreakdown, N_PARAMS};
use crate::fields::{Aabb, SdfField};
use crate::sampling::{resample, ResamplerParams, SampleSet};
use crate::transforms::wrap_angle;
use crate::{Error, Result, Sim3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Stepper {
    GradientDescent,
    Adam { beta1: f64, beta2: f64, epsilon: f64 },
}

impl Stepper {
    pub const ADAM: Self = Stepper::Adam {
        beta1: 0.9,
        beta2: 0.999,
        epsilon: 1e-8,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub lr_rotation: f64,
    pub lr_translation: f64,
    pub lr_scale: f64,
    pub lr_kernel: f64,
    pub max_iters: usize,
    /// Stop once the mean absolute forward residual is at or below this.
    pub early_stop_residual: f64,
    pub regularizer_weight: f64,
    /// Starting kernel; `None` means `p = 2 × surface band`, `α = 1`.
    pub initial_kernel: Option<KernelParams>,
    pub p_range: [f64; 2],
    pub alpha_range: [f64; 2],
    pub min_scale: f64,
    pub resampler: ResamplerParams,
    /// Turn sample refreshing off entirely.
    pub resample: bool,
    pub stepper: Stepper,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            lr_rotation: 0.02,
            lr_translation: 0.01,
            lr_scale: 0.01,
            lr_kernel: 0.005,
            max_iters: 200,
            early_stop_residual: 0.0005,
            regularizer_weight: 0.01,
            initial_kernel: None,
            p_range: [1e-3, 0.1],
            alpha_range: [-2.0, 2.0],
            min_scale: 1e-3,
            resampler: ResamplerParams::default(),
            resample: true,
            stepper: Stepper::GradientDescent,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("lr_rotation", self.lr_rotation),
            ("lr_translation", self.lr_translation),
            ("lr_scale", self.lr_scale),
            ("lr_kernel", self.lr_kernel),
        ];
        for (name, v) in rates {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(name, "must be finite and ≥ 0"));
            }
        }
        if self.max_iters < 1 {
            return Err(Error::param("max_iters", "must be ≥ 1"));
        }
        if !(self.early_stop_residual >= 0.0) {
            return Err(Error::param("early_stop_residual", "must be ≥ 0"));
        }
        if !(self.regularizer_weight >= 0.0 && self.regularizer_weight.is_finite()) {
            return Err(Error::param("regularizer_weight", "must be finite and ≥ 0"));
        }
        if !(self.p_range[0] > 0.0 && self.p_range[0] <= self.p_range[1]) {
            return Err(Error::param("p_range", "needs 0 < lo ≤ hi"));
        }
        if !(self.alpha_range[0] <= self.alpha_range[1]) {
            return Err(Error::param("alpha_range", "needs lo ≤ hi"));
        }
        if !(self.min_scale > 0.0) {
            return Err(Error::param("min_scale", "must be > 0"));
        }
        if let Some(k) = &self.initial_kernel {
            k.validate()?;
        }
        if let Stepper::Adam { beta1, beta2, epsilon } = self.stepper {
            if !((0.0..1.0).contains(&beta1) && (0.0..1.0).contains(&beta2) && epsilon > 0.0) {
                return Err(Error::param("stepper", "Adam needs β₁, β₂ ∈ [0, 1) and ε > 0"));
            }
        }
        self.resampler.validate()
    }
}

/// Inputs to the refinement. The initial sample sets double as the pools
/// fresh points are drawn from.
#[derive(Debug, Clone, Copy)]
pub struct FineProblem<'a, A: ?Sized, B: ?Sized> {
    pub scene: &'a A,
    pub object: &'a B,
    pub scene_samples: &'a SampleSet,
    pub object_samples: &'a SampleSet,
    /// Refreshed scene samples outside this box are discarded.
    pub crop: Option<Aabb>,
    /// Sets the default perturbation scale of the resampler.
    pub scene_radius: f64,
    pub surface_band: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizationStatus {
    /// Updates fell below numerical resolution.
    Converged,
    MaxIters,
    EarlyStopped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// 1-based.
    pub iteration: usize,
    pub loss: LossBreakdown,
    pub params: FineParams,
    /// Whether the sample sets were refreshed before this evaluation.
    pub resampled: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OptimizationTrace {
    pub records: Vec<IterationRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FineResult {
    pub transform: Sim3,
    pub params: FineParams,
    pub loss: LossBreakdown,
    /// Iteration the result was taken from.
    pub iteration: usize,
    pub status: OptimizationStatus,
    pub trace: OptimizationTrace,
    pub scene_samples: SampleSet,
    pub object_samples: SampleSet,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct Moments {
    m: [f64; N_PARAMS],
    v: [f64; N_PARAMS],
    t: i32,
}

/// Minimizes the bidirectional loss from `init`.
///
/// The result is the iterate that triggered early stopping if there is one,
/// otherwise the lowest-loss iterate in the trace. A non-finite loss or
/// gradient aborts with the trace recorded so far.
pub fn optimize<A, B>(problem: &FineProblem<'_, A, B>, init: &Sim3, cfg: &OptimizerConfig, seed: u64) -> Result<FineResult>
where
    A: SdfField + ?Sized,
    B: SdfField + ?Sized,
{
    cfg.validate()?;
    if problem.scene_samples.is_empty() || problem.object_samples.is_empty() {
        return Err(Error::InvalidArgument("fine stage needs non-empty sample sets".into()));
    }
    if !(problem.surface_band > 0.0) {
        return Err(Error::param("surface_band", "must be > 0"));
    }
    let kernel = cfg.initial_kernel.unwrap_or(KernelParams {
        p: 2.0 * problem.surface_band,
        alpha: 1.0,
    });
    let mut x = FineParams {
        pose: init.to_params(),
        kernel,
    }
    .to_array();
    let lr = [
        cfg.lr_translation,
        cfg.lr_translation,
        cfg.lr_translation,
        cfg.lr_rotation,
        cfg.lr_rotation,
        cfg.lr_rotation,
        cfg.lr_scale,
        cfg.lr_kernel,
        cfg.lr_kernel,
    ];
    let rho = cfg.resampler.rho_for(problem.scene_radius);
    let mut a = problem.scene_samples.clone();
    let mut b = problem.object_samples.clone();
    let mut trace = OptimizationTrace::default();
    let mut best: Option<(usize, f64)> = None;
    let mut moments = Moments {
        m: [0.0; N_PARAMS],
        v: [0.0; N_PARAMS],
        t: 0,
    };
    let mut status = OptimizationStatus::MaxIters;
    let mut stop_at = None;

    for it in 1..=cfg.max_iters {
        let params = FineParams::from_array(x);
        let period = cfg.resampler.refresh_period;
        let resampled = cfg.resample && it > 1 && (it - 1) % period == 0;
        if resampled {
            let t = params.transform()?;
            let s = t.scale();
            let round = splitmix(seed ^ (it as u64));
            let mut next_a = resample(
                &a,
                problem.scene_samples,
                problem.scene,
                problem.object,
                &t.inverse(),
                &cfg.resampler,
                rho,
                problem.surface_band,
                splitmix(round),
            )?;
            if let Some(crop) = &problem.crop {
                let keep: Vec<usize> = (0..next_a.len()).filter(|&i| crop.contains(&next_a.points[i])).collect();
                if keep.is_empty() {
                    return Err(Error::ResampleFailure);
                }
                next_a = SampleSet::new(
                    next_a.frame,
                    keep.iter().map(|&i| next_a.points[i]).collect(),
                    keep.iter().map(|&i| next_a.source_view[i]).collect(),
                    next_a.viewpoints.clone(),
                )?;
            }
            a = next_a;
            b = resample(
                &b,
                problem.object_samples,
                problem.object,
                problem.scene,
                &t,
                &cfg.resampler,
                rho / s,
                problem.surface_band / s,
                splitmix(round ^ 1),
            )?;
        }

        let (loss, grad) = evaluate(
            &a.points,
            &b.points,
            problem.scene,
            problem.object,
            &params,
            cfg.regularizer_weight,
            true,
        );
        trace.records.push(IterationRecord {
            iteration: it,
            loss,
            params,
            resampled,
        });
        if !loss.total.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::OptimizationAbort {
                iteration: it,
                trace: Box::new(trace),
            });
        }
        if best.is_none_or(|(_, l)| loss.total < l) {
            best = Some((trace.records.len() - 1, loss.total));
        }
        if loss.forward_residual <= cfg.early_stop_residual {
            status = OptimizationStatus::EarlyStopped;
            stop_at = Some(trace.records.len() - 1);
            break;
        }

        let step = match cfg.stepper {
            Stepper::GradientDescent => core::array::from_fn(|i| lr[i] * grad[i]),
            Stepper::Adam { beta1, beta2, epsilon } => {
                moments.t += 1;
                let c1 = 1.0 - beta1.powi(moments.t);
                let c2 = 1.0 - beta2.powi(moments.t);
                core::array::from_fn::<f64, N_PARAMS, _>(|i| {
                    moments.m[i] = beta1 * moments.m[i] + (1.0 - beta1) * grad[i];
                    moments.v[i] = beta2 * moments.v[i] + (1.0 - beta2) * grad[i] * grad[i];
                    lr[i] * (moments.m[i] / c1) / ((moments.v[i] / c2).sqrt() + epsilon)
                })
            }
        };
        let before = x;
        for i in 0..N_PARAMS {
            x[i] -= step[i];
        }
        for angle in &mut x[3..6] {
            *angle = wrap_angle(*angle);
        }
        x[6] = x[6].max(cfg.min_scale);
        x[7] = x[7].clamp(cfg.p_range[0], cfg.p_range[1]);
        x[8] = x[8].clamp(cfg.alpha_range[0], cfg.alpha_range[1]);
        if before.iter().zip(&x).all(|(p, q)| (p - q).abs() <= 1e-14 * (1.0 + p.abs())) {
            status = OptimizationStatus::Converged;
            break;
        }
    }

    let chosen = stop_at.unwrap_or_else(|| best.expect("at least one iteration").0);
    let rec = trace.records[chosen].clone();
    Ok(FineResult {
        transform: rec.params.transform()?,
        params: rec.params,
        loss: rec.loss,
        iteration: rec.iteration,
        status,
        trace,
        scene_samples: a,
        object_samples: b,
    })
}
