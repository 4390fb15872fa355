//! Bidirectional SDF residual loss and its analytic gradient.
//!
//! For scene samples `A`, object samples `B` and `T = (R, t, σ)` mapping
//! object to scene:
//!
//! - forward residual `S_a(a) − σ·S_b(T⁻¹ a)`, in scene units;
//! - backward residual `S_b(b) − S_a(T b)/σ`, in object units;
//! - regularizer `(1/|A|) Σ_a min_b ‖a − T b‖²`.
//!
//! The loss is `mean κ(forward) + mean κ(backward) + w · regularizer`.

use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::kernel::{kernel_derivatives, KernelParams};
use crate::fields::{Aabb, SdfField};
use crate::spatial::SpatialHash;
use crate::transforms::{euler_rotation_jacobian, euler_to_rotation};
use crate::{Result, Sim3, Sim3Params, Vec3};

/// Number of learnt parameters: translation, roll/pitch/yaw, scale, `p`, `α`.
pub const N_PARAMS: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FineParams {
    pub pose: Sim3Params,
    pub kernel: KernelParams,
}

impl FineParams {
    pub fn to_array(&self) -> [f64; N_PARAMS] {
        let p = self.pose.to_array();
        [p[0], p[1], p[2], p[3], p[4], p[5], p[6], self.kernel.p, self.kernel.alpha]
    }

    pub fn from_array(a: [f64; N_PARAMS]) -> Self {
        Self {
            pose: Sim3Params::from_array([a[0], a[1], a[2], a[3], a[4], a[5], a[6]]),
            kernel: KernelParams { p: a[7], alpha: a[8] },
        }
    }

    pub fn transform(&self) -> Result<Sim3> {
        Sim3::from_params(&self.pose)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub total: f64,
    pub forward: f64,
    pub backward: f64,
    pub regularizer: f64,
    /// Mean absolute forward residual.
    pub forward_residual: f64,
    /// Mean absolute backward residual.
    pub backward_residual: f64,
}

/// Signed forward residual of a scene sample.
pub fn residual_forward<A, B>(a: &Vec3, scene: &A, object: &B, t: &Sim3) -> f64
where
    A: SdfField + ?Sized,
    B: SdfField + ?Sized,
{
    scene.value(a) - t.scale() * object.value(&t.apply_inverse(a))
}

/// Signed backward residual of an object sample.
pub fn residual_backward<A, B>(b: &Vec3, scene: &A, object: &B, t: &Sim3) -> f64
where
    A: SdfField + ?Sized,
    B: SdfField + ?Sized,
{
    object.value(b) - scene.value(&t.apply(b)) / t.scale()
}

fn nn_index(points: &[Vec3]) -> Option<SpatialHash> {
    let b = Aabb::from_points(points.iter())?;
    let cell = (b.diagonal() / (points.len() as f64).cbrt()).max(1e-9);
    Some(SpatialHash::new(points, cell))
}

/// One-sided Chamfer term from `A` to the mapped `B`.
pub fn regularizer(scene_samples: &[Vec3], object_samples: &[Vec3], t: &Sim3) -> f64 {
    if scene_samples.is_empty() {
        return 0.0;
    }
    let mapped: Vec<Vec3> = object_samples.iter().map(|b| t.apply(b)).collect();
    let Some(hash) = nn_index(&mapped) else {
        return 0.0;
    };
    scene_samples.iter().map(|a| hash.nearest(a).unwrap().1).sum::<f64>() / scene_samples.len() as f64
}

pub(crate) fn evaluate<A, B>(
    scene_samples: &[Vec3],
    object_samples: &[Vec3],
    scene: &A,
    object: &B,
    params: &FineParams,
    reg_weight: f64,
    with_grad: bool,
) -> (LossBreakdown, [f64; N_PARAMS])
where
    A: SdfField + ?Sized,
    B: SdfField + ?Sized,
{
    let pose = &params.pose;
    let k = &params.kernel;
    let r = euler_to_rotation(pose.roll, pose.pitch, pose.yaw);
    let jac = euler_rotation_jacobian(pose.roll, pose.pitch, pose.yaw);
    let t = pose.translation();
    let s = pose.sigma;
    let mut grad = [0.0; N_PARAMS];
    let mut out = LossBreakdown::default();

    if !scene_samples.is_empty() {
        let inv_n = 1.0 / scene_samples.len() as f64;
        for a in scene_samples {
            let d = a - t;
            let y = r.tr_mul(&d) / s;
            let va = scene.value(a);
            let (vb, gb) = if with_grad {
                object.value_and_gradient(&y)
            } else {
                (object.value(&y), Vec3::zeros())
            };
            let g = va - s * vb;
            let (kv, dk, dp, dal) = kernel_derivatives(g, k);
            out.forward += kv * inv_n;
            out.forward_residual += g.abs() * inv_n;
            if with_grad {
                // u = σ·S_b(y); g = va − u
                let rgb = r * gb;
                let w = -dk * inv_n;
                for i in 0..3 {
                    grad[i] += w * (-rgb[i]);
                    grad[3 + i] += w * (jac[i] * gb).dot(&d);
                }
                grad[6] += w * (vb - gb.dot(&y));
                grad[7] += dp * inv_n;
                grad[8] += dal * inv_n;
            }
        }
    }

    if !object_samples.is_empty() {
        let inv_n = 1.0 / object_samples.len() as f64;
        for b in object_samples {
            let rb = r * b;
            let x = rb * s + t;
            let vb = object.value(b);
            let (va, ga) = if with_grad {
                scene.value_and_gradient(&x)
            } else {
                (scene.value(&x), Vec3::zeros())
            };
            let g = vb - va / s;
            let (kv, dk, dp, dal) = kernel_derivatives(g, k);
            out.backward += kv * inv_n;
            out.backward_residual += g.abs() * inv_n;
            if with_grad {
                // v = S_a(x)/σ; g = vb − v
                let w = -dk * inv_n;
                for i in 0..3 {
                    grad[i] += w * ga[i] / s;
                    grad[3 + i] += w * ga.dot(&(jac[i] * b));
                }
                grad[6] += w * (-va / (s * s) + ga.dot(&rb) / s);
                grad[7] += dp * inv_n;
                grad[8] += dal * inv_n;
            }
        }
    }

    if reg_weight != 0.0 && !scene_samples.is_empty() && !object_samples.is_empty() {
        let mapped: Vec<Vec3> = object_samples.iter().map(|b| r * b * s + t).collect();
        let hash = nn_index(&mapped).expect("non-empty");
        let inv_n = 1.0 / scene_samples.len() as f64;
        for a in scene_samples {
            let (j, d2) = hash.nearest(a).unwrap();
            out.regularizer += d2 * inv_n;
            if with_grad {
                let b = &object_samples[j];
                // ∂‖a − m‖²/∂m = −2(a − m)
                let dm = (mapped[j] - a) * (2.0 * inv_n * reg_weight);
                for i in 0..3 {
                    grad[i] += dm[i];
                    grad[3 + i] += dm.dot(&(jac[i] * b * s));
                }
                grad[6] += dm.dot(&(r * b));
            }
        }
    }

    out.total = out.forward + out.backward + reg_weight * out.regularizer;
    (out, grad)
}

/// Loss terms at `params`.
pub fn total_loss<A, B>(
    scene_samples: &[Vec3],
    object_samples: &[Vec3],
    scene: &A,
    object: &B,
    params: &FineParams,
    reg_weight: f64,
) -> LossBreakdown
where
    A: SdfField + ?Sized,
    B: SdfField + ?Sized,
{
    evaluate(scene_samples, object_samples, scene, object, params, reg_weight, false).0
}

/// Loss terms and gradient with respect to
/// `[tx, ty, tz, roll, pitch, yaw, σ, p, α]`.
pub fn loss_gradients<A, B>(
    scene_samples: &[Vec3],
    object_samples: &[Vec3],
    scene: &A,
    object: &B,
    params: &FineParams,
    reg_weight: f64,
) -> (LossBreakdown, [f64; N_PARAMS])
where
    A: SdfField + ?Sized,
    B: SdfField + ?Sized,
{
    evaluate(scene_samples, object_samples, scene, object, params, reg_weight, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{shared, Placed, Primitive, SharedField, TransformedField};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn object() -> SharedField {
        shared(Primitive::Union {
            parts: alloc::vec![
                Placed {
                    primitive: Primitive::RoundedBox {
                        half_extents: Vec3::new(0.5, 0.3, 0.2),
                        radius: 0.05,
                    },
                    offset: Vec3::zeros(),
                },
                Placed {
                    primitive: Primitive::sphere(0.25),
                    offset: Vec3::new(0.4, 0.2, 0.2),
                },
            ],
        })
    }

    fn near_surface(f: &dyn SdfField, rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec3> {
        let b = f.bounds();
        let mut out = Vec::new();
        while out.len() < n {
            let x = Vec3::new(
                rng.random_range(b.min.x..b.max.x),
                rng.random_range(b.min.y..b.max.y),
                rng.random_range(b.min.z..b.max.z),
            );
            if f.value(&x).abs() < 0.05 {
                out.push(x);
            }
        }
        out
    }

    fn params(pose: [f64; 7], p: f64, alpha: f64) -> FineParams {
        FineParams {
            pose: Sim3Params::from_array(pose),
            kernel: KernelParams { p, alpha },
        }
    }

    #[test]
    fn exact_alignment_has_zero_residuals() {
        let obj = object();
        let gt = Sim3::from_params(&Sim3Params::from_array([0.3, -0.1, 0.2, 0.1, 0.2, -0.4, 1.3])).unwrap();
        let scene = TransformedField::new(obj.clone(), gt);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = near_surface(&scene, &mut rng, 200);
        let b = near_surface(obj.as_ref(), &mut rng, 200);
        for x in &a {
            assert!(residual_forward(x, &scene, obj.as_ref(), &gt).abs() < 1e-12);
        }
        for x in &b {
            assert!(residual_backward(x, &scene, obj.as_ref(), &gt).abs() < 1e-12);
        }
        let l = total_loss(&a, &b, &scene, obj.as_ref(), &params(gt.to_params().to_array(), 0.04, 1.0), 0.0);
        assert!(l.forward < 1e-20 && l.backward < 1e-20);
    }

    #[test]
    fn regularizer_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a: Vec<Vec3> = (0..300).map(|_| Vec3::new(rng.random(), rng.random(), rng.random())).collect();
        let b: Vec<Vec3> = (0..250).map(|_| Vec3::new(rng.random(), rng.random(), rng.random())).collect();
        let t = Sim3::from_params(&Sim3Params::from_array([0.1, 0.2, -0.1, 0.3, 0.0, 0.5, 0.9])).unwrap();
        let brute = a
            .iter()
            .map(|x| b.iter().map(|y| (x - t.apply(y)).norm_squared()).fold(f64::INFINITY, f64::min))
            .sum::<f64>()
            / a.len() as f64;
        assert!((regularizer(&a, &b, &t) - brute).abs() < 1e-12);
        assert_eq!(regularizer(&[], &b, &t), 0.0);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let obj = object();
        let gt = Sim3::from_params(&Sim3Params::from_array([0.2, 0.1, -0.1, 0.2, -0.3, 0.6, 1.2])).unwrap();
        let scene = TransformedField::new(obj.clone(), gt);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = near_surface(&scene, &mut rng, 150);
        let b = near_surface(obj.as_ref(), &mut rng, 150);
        let p0 = params([0.25, 0.05, -0.05, 0.25, -0.25, 0.5, 1.1], 0.05, 0.7);
        let w = 0.5;
        let (_, g) = loss_gradients(&a, &b, &scene, obj.as_ref(), &p0, w);
        let base = p0.to_array();
        let h = 1e-6;
        for i in 0..N_PARAMS {
            let mut hi = base;
            let mut lo = base;
            hi[i] += h;
            lo[i] -= h;
            let fh = total_loss(&a, &b, &scene, obj.as_ref(), &FineParams::from_array(hi), w).total;
            let fl = total_loss(&a, &b, &scene, obj.as_ref(), &FineParams::from_array(lo), w).total;
            let num = (fh - fl) / (2.0 * h);
            let rel = (g[i] - num).abs() / num.abs().max(1e-3);
            assert!(rel < 1e-4, "param {i}: analytic {} numeric {num}", g[i]);
        }
    }
}
