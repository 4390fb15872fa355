//! General adaptive robust loss with scale `p` and shape `alpha`.
//!
//! With `z = (r/p)²` and `b = |α − 2|`:
//! `κ = (b/α)·((z/b + 1)^(α/2) − 1)`, with the limits `z/2` at `α = 2` and
//! `ln(z/2 + 1)` at `α = 0`.

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub p: f64,
    pub alpha: f64,
}

impl KernelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p.is_finite()) {
            return Err(Error::param("p", "must be finite and > 0"));
        }
        if !self.alpha.is_finite() {
            return Err(Error::param("alpha", "must be finite"));
        }
        Ok(())
    }
}

/// Distance from 0 or 2 under which the closed-form limit is used.
const SNAP: f64 = 1e-9;
/// Distance from 0 or 2 at which `∂κ/∂α` is evaluated near those points.
const ALPHA_NUDGE: f64 = 1e-5;

/// The general form without special-casing. Singular at `α ∈ {0, 2}`.
pub fn general_form(z: f64, alpha: f64) -> f64 {
    let b = (alpha - 2.0).abs();
    (b / alpha) * ((z / b + 1.0).powf(alpha / 2.0) - 1.0)
}

fn value_z(z: f64, alpha: f64) -> f64 {
    if (alpha - 2.0).abs() < SNAP {
        z / 2.0
    } else if alpha.abs() < SNAP {
        (z / 2.0 + 1.0).ln()
    } else {
        general_form(z, alpha)
    }
}

fn dz(z: f64, alpha: f64) -> f64 {
    if (alpha - 2.0).abs() < SNAP {
        0.5
    } else if alpha.abs() < SNAP {
        1.0 / (z + 2.0)
    } else {
        let b = (alpha - 2.0).abs();
        0.5 * (z / b + 1.0).powf(alpha / 2.0 - 1.0)
    }
}

fn dalpha(z: f64, alpha: f64) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    // ∂κ/∂α has a logarithmic singularity at 0 and 2; evaluate just beside it
    let nudge = |centre: f64| {
        let side = if alpha >= centre { 1.0 } else { -1.0 };
        centre + side * ALPHA_NUDGE
    };
    let alpha = if (alpha - 2.0).abs() < ALPHA_NUDGE {
        nudge(2.0)
    } else if alpha.abs() < ALPHA_NUDGE {
        nudge(0.0)
    } else {
        alpha
    };
    let b = (alpha - 2.0).abs();
    let s = (alpha - 2.0).signum();
    let q = z / b + 1.0;
    let qa = q.powf(alpha / 2.0);
    let d_ratio = (s * alpha - b) / (alpha * alpha);
    let dq = -z * s / (b * b);
    let d_qa = qa * (0.5 * q.ln() + (alpha / 2.0) * dq / q);
    d_ratio * (qa - 1.0) + (b / alpha) * d_qa
}

/// `κ(r; p, α)`.
pub fn robust_kernel(r: f64, k: &KernelParams) -> f64 {
    let z = (r / k.p) * (r / k.p);
    value_z(z, k.alpha)
}

/// Kernel value with derivatives `(κ, ∂κ/∂r, ∂κ/∂p, ∂κ/∂α)`.
pub fn kernel_derivatives(r: f64, k: &KernelParams) -> (f64, f64, f64, f64) {
    let z = (r / k.p) * (r / k.p);
    let kz = dz(z, k.alpha);
    (
        value_z(z, k.alpha),
        kz * 2.0 * r / (k.p * k.p),
        kz * (-2.0 * z / k.p),
        dalpha(z, k.alpha),
    )
}
