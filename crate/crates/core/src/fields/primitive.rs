use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::{Aabb, SdfField};
use crate::metrics::Symmetry;
use crate::{Error, Mat3, Result, Vec3};

/// Closed-form distance fields, defined in their own object frame.
///
/// Sphere, box, torus and capsule are exact; the rounded box is exact; the
/// union is exact outside and a bound inside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Primitive {
    Sphere { radius: f64 },
    Box { half_extents: Vec3 },
    RoundedBox { half_extents: Vec3, radius: f64 },
    /// Ring around the z axis.
    Torus { major: f64, minor: f64 },
    Capsule { a: Vec3, b: Vec3, radius: f64 },
    Union { parts: Vec<Placed> },
}

/// A primitive translated by `offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placed {
    pub primitive: Primitive,
    #[serde(default = "Vec3::zeros")]
    pub offset: Vec3,
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, alloc::format!("must be finite and > 0, got {v}")))
    }
}

fn safe_normalize(v: Vec3) -> Vec3 {
    let n = v.norm();
    if n > 0.0 {
        v / n
    } else {
        Vec3::z()
    }
}

fn box_eval(x: &Vec3, b: &Vec3) -> (f64, Vec3) {
    let q = x.abs() - b;
    let sign = x.map(|v| if v < 0.0 { -1.0 } else { 1.0 });
    let outer = q.sup(&Vec3::zeros());
    let outside = outer.norm();
    if outside > 0.0 {
        (outside, (outer / outside).component_mul(&sign))
    } else {
        let k = q.imax();
        let mut g = Vec3::zeros();
        g[k] = sign[k];
        (q[k], g)
    }
}

impl Primitive {
    pub fn sphere(radius: f64) -> Self {
        Primitive::Sphere { radius }
    }

    pub fn cuboid(hx: f64, hy: f64, hz: f64) -> Self {
        Primitive::Box {
            half_extents: Vec3::new(hx, hy, hz),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Primitive::Sphere { radius } => positive("radius", *radius),
            Primitive::Box { half_extents } => {
                half_extents.iter().try_for_each(|h| positive("half_extents", *h))
            }
            Primitive::RoundedBox {
                half_extents,
                radius,
            } => {
                half_extents.iter().try_for_each(|h| positive("half_extents", *h))?;
                positive("radius", *radius)?;
                if half_extents.iter().any(|h| *h <= *radius) {
                    return Err(Error::param("radius", "must be smaller than every half extent"));
                }
                Ok(())
            }
            Primitive::Torus { major, minor } => {
                positive("major", *major)?;
                positive("minor", *minor)
            }
            Primitive::Capsule { a, b, radius } => {
                if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
                    return Err(Error::param("capsule", "non-finite endpoint"));
                }
                positive("radius", *radius)
            }
            Primitive::Union { parts } => {
                if parts.is_empty() {
                    return Err(Error::param("parts", "union needs at least one part"));
                }
                for p in parts {
                    if p.offset.iter().any(|v| !v.is_finite()) {
                        return Err(Error::param("offset", "non-finite offset"));
                    }
                    p.primitive.validate()?;
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, x: &Vec3) -> (f64, Vec3) {
        match self {
            Primitive::Sphere { radius } => (x.norm() - radius, safe_normalize(*x)),
            Primitive::Box { half_extents } => box_eval(x, half_extents),
            Primitive::RoundedBox {
                half_extents,
                radius,
            } => {
                let inner = half_extents - Vec3::repeat(*radius);
                let (d, g) = box_eval(x, &inner);
                (d - radius, g)
            }
            Primitive::Torus { major, minor } => {
                let rho = (x.x * x.x + x.y * x.y).sqrt();
                let q0 = rho - major;
                let len = (q0 * q0 + x.z * x.z).sqrt();
                let g = if len > 0.0 && rho > 0.0 {
                    Vec3::new(q0 * x.x / rho, q0 * x.y / rho, x.z) / len
                } else {
                    Vec3::z()
                };
                (len - minor, g)
            }
            Primitive::Capsule { a, b, radius } => {
                let pa = x - a;
                let ba = b - a;
                let denom = ba.norm_squared();
                let h = if denom > 0.0 {
                    (pa.dot(&ba) / denom).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                let d = pa - ba * h;
                (d.norm() - radius, safe_normalize(d))
            }
            Primitive::Union { parts } => {
                let mut best = (f64::INFINITY, Vec3::z());
                for p in parts {
                    let e = p.primitive.eval(&(x - p.offset));
                    if e.0 < best.0 {
                        best = e;
                    }
                }
                best
            }
        }
    }

    pub fn aabb(&self) -> Aabb {
        match self {
            Primitive::Sphere { radius } => {
                Aabb::from_center_half_extents(Vec3::zeros(), Vec3::repeat(*radius))
            }
            Primitive::Box { half_extents } | Primitive::RoundedBox { half_extents, .. } => {
                Aabb::from_center_half_extents(Vec3::zeros(), *half_extents)
            }
            Primitive::Torus { major, minor } => Aabb::from_center_half_extents(
                Vec3::zeros(),
                Vec3::new(major + minor, major + minor, *minor),
            ),
            Primitive::Capsule { a, b, radius } => Aabb {
                min: a.inf(b),
                max: a.sup(b),
            }
            .inflate(*radius),
            Primitive::Union { parts } => parts
                .iter()
                .map(|p| {
                    let b = p.primitive.aabb();
                    Aabb {
                        min: b.min + p.offset,
                        max: b.max + p.offset,
                    }
                })
                .reduce(|a, b| a.union(&b))
                .expect("validated union is non-empty"),
        }
    }

    /// Rotational symmetry of the shape about its frame origin.
    pub fn symmetry(&self) -> Symmetry {
        match self {
            Primitive::Sphere { .. } => Symmetry::Spherical,
            Primitive::Box { half_extents } | Primitive::RoundedBox { half_extents, .. } => {
                Symmetry::Discrete(box_symmetries(half_extents))
            }
            Primitive::Torus { .. } => Symmetry::Axial {
                axis: Vec3::z(),
                flip: true,
            },
            Primitive::Capsule { a, b, .. } => {
                let axis = b - a;
                if (a + b).norm() <= 1e-12 * (1.0 + axis.norm()) && axis.norm() > 0.0 {
                    Symmetry::Axial {
                        axis: axis.normalize(),
                        flip: true,
                    }
                } else if axis.norm() == 0.0 && a.norm() == 0.0 {
                    Symmetry::Spherical
                } else {
                    Symmetry::None
                }
            }
            Primitive::Union { .. } => Symmetry::None,
        }
    }
}

/// Proper rotations mapping the box onto itself: signed permutations with
/// determinant +1 that preserve the half-extent vector.
fn box_symmetries(half: &Vec3) -> Vec<Mat3> {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let tol = 1e-9 * half.max();
    let mut out = Vec::new();
    for perm in PERMS {
        for signs in 0..8u8 {
            let mut m = Mat3::zeros();
            for (row, &col) in perm.iter().enumerate() {
                m[(row, col)] = if signs >> row & 1 == 1 { -1.0 } else { 1.0 };
            }
            if m.determinant() < 0.0 {
                continue;
            }
            let mapped = (m * half).abs();
            if (mapped - half).abs().max() <= tol {
                out.push(m);
            }
        }
    }
    out
}

impl SdfField for Primitive {
    fn value(&self, x: &Vec3) -> f64 {
        self.eval(x).0
    }

    fn gradient(&self, x: &Vec3) -> Vec3 {
        self.eval(x).1
    }

    fn value_and_gradient(&self, x: &Vec3) -> (f64, Vec3) {
        self.eval(x)
    }

    fn bounds(&self) -> Aabb {
        self.aabb()
    }
}
