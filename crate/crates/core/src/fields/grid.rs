use alloc::format;
use alloc::vec::Vec;

use num_traits::Float;

use super::{central_difference, Aabb, SdfField};
use crate::{Error, Result, Vec3};

pub const GRID_MAGIC: &[u8; 4] = b"SDFG";
pub const GRID_VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 3 * 4 + 6 * 8;

/// Regular grid of signed distance samples, trilinearly interpolated.
///
/// Samples are stored x-fastest: index `i + nx * (j + ny * k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    dims: [usize; 3],
    origin: Vec3,
    spacing: Vec3,
    values: Vec<f32>,
}

impl GridField {
    pub fn new(dims: [usize; 3], origin: Vec3, spacing: Vec3, values: Vec<f32>) -> Result<Self> {
        if dims.iter().any(|&n| n < 2) {
            return Err(Error::Format {
                field: "dims",
                detail: format!("every axis needs at least 2 samples, got {dims:?}"),
            });
        }
        if spacing.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::Format {
                field: "spacing",
                detail: format!("spacing must be finite and > 0, got {:?}", spacing.as_slice()),
            });
        }
        if origin.iter().any(|v| !v.is_finite()) {
            return Err(Error::Format {
                field: "origin",
                detail: "non-finite origin".into(),
            });
        }
        let expected = dims[0] * dims[1] * dims[2];
        if values.len() != expected {
            return Err(Error::Format {
                field: "samples",
                detail: format!("expected {expected} samples, got {}", values.len()),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Format {
                field: "samples",
                detail: format!("sample {i} is not finite"),
            });
        }
        Ok(Self {
            dims,
            origin,
            spacing,
            values,
        })
    }

    /// Samples `f` on a `dims` lattice spanning `bounds`.
    pub fn bake<F: SdfField + ?Sized>(f: &F, bounds: &Aabb, dims: [usize; 3]) -> Result<Self> {
        Self::bake_with(bounds, dims, |x| f.value(x))
    }

    pub fn bake_with(bounds: &Aabb, dims: [usize; 3], mut f: impl FnMut(&Vec3) -> f64) -> Result<Self> {
        if dims.iter().any(|&n| n < 2) {
            return Err(Error::param("dims", "every axis needs at least 2 samples"));
        }
        let extent = bounds.max - bounds.min;
        let spacing = Vec3::new(
            extent.x / (dims[0] - 1) as f64,
            extent.y / (dims[1] - 1) as f64,
            extent.z / (dims[2] - 1) as f64,
        );
        let mut values = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    let x = bounds.min + Vec3::new(i as f64, j as f64, k as f64).component_mul(&spacing);
                    values.push(f(&x) as f32);
                }
            }
        }
        Self::new(dims, bounds.min, spacing, values)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn origin(&self) -> &Vec3 {
        &self.origin
    }

    pub fn spacing(&self) -> &Vec3 {
        &self.spacing
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn corner(&self, i: usize, j: usize, k: usize) -> Vec3 {
        self.origin + Vec3::new(i as f64, j as f64, k as f64).component_mul(&self.spacing)
    }

    pub fn sample(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[i + self.dims[0] * (j + self.dims[1] * k)] as f64
    }

    pub fn grid_box(&self) -> Aabb {
        Aabb {
            min: self.origin,
            max: self.corner(self.dims[0] - 1, self.dims[1] - 1, self.dims[2] - 1),
        }
    }

    /// Cell index and fractional offset along each axis for a point inside
    /// the grid box.
    fn locate(&self, x: &Vec3) -> ([usize; 3], Vec3) {
        let mut cell = [0usize; 3];
        let mut frac = Vec3::zeros();
        for a in 0..3 {
            let u = ((x[a] - self.origin[a]) / self.spacing[a]).max(0.0);
            let c = (u.floor() as usize).min(self.dims[a] - 2);
            cell[a] = c;
            frac[a] = (u - c as f64).clamp(0.0, 1.0);
        }
        (cell, frac)
    }

    fn trilinear(&self, x: &Vec3) -> (f64, Vec3) {
        let ([i, j, k], f) = self.locate(x);
        let c = |di, dj, dk| self.sample(i + di, j + dj, k + dk);
        let (c000, c100, c010, c110) = (c(0, 0, 0), c(1, 0, 0), c(0, 1, 0), c(1, 1, 0));
        let (c001, c101, c011, c111) = (c(0, 0, 1), c(1, 0, 1), c(0, 1, 1), c(1, 1, 1));
        let (fx, fy, fz) = (f.x, f.y, f.z);
        let lerp = |a: f64, b: f64, t: f64| a + (b - a) * t;
        let c00 = lerp(c000, c100, fx);
        let c10 = lerp(c010, c110, fx);
        let c01 = lerp(c001, c101, fx);
        let c11 = lerp(c011, c111, fx);
        let c0 = lerp(c00, c10, fy);
        let c1 = lerp(c01, c11, fy);
        let v = lerp(c0, c1, fz);

        let dx0 = lerp(c100 - c000, c110 - c010, fy);
        let dx1 = lerp(c101 - c001, c111 - c011, fy);
        let dx = lerp(dx0, dx1, fz);
        let dy = lerp(c10 - c00, c11 - c01, fz);
        let dz = c1 - c0;
        let g = Vec3::new(dx / self.spacing.x, dy / self.spacing.y, dz / self.spacing.z);
        (v, g)
    }

    /// Serializes to the `SDFG` binary layout.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 4 * self.values.len());
        out.extend_from_slice(GRID_MAGIC);
        out.extend_from_slice(&GRID_VERSION.to_le_bytes());
        for n in self.dims {
            out.extend_from_slice(&(n as u32).to_le_bytes());
        }
        for v in self.origin.iter().chain(self.spacing.iter()) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Format {
                field: "header",
                detail: format!("need {HEADER_LEN} header bytes, got {}", bytes.len()),
            });
        }
        if &bytes[0..4] != GRID_MAGIC {
            return Err(Error::Format {
                field: "magic",
                detail: format!("expected \"SDFG\", got {:?}", &bytes[0..4]),
            });
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let version = u32_at(4);
        if version != GRID_VERSION {
            return Err(Error::Format {
                field: "version",
                detail: format!("unsupported version {version}"),
            });
        }
        let dims = [u32_at(8) as usize, u32_at(12) as usize, u32_at(16) as usize];
        let origin = Vec3::new(f64_at(20), f64_at(28), f64_at(36));
        let spacing = Vec3::new(f64_at(44), f64_at(52), f64_at(60));
        let expected = dims
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .ok_or_else(|| Error::Format {
                field: "dims",
                detail: format!("sample count overflows for {dims:?}"),
            })?;
        let payload = &bytes[HEADER_LEN..];
        if !payload.len().is_multiple_of(4) || payload.len() / 4 != expected {
            return Err(Error::Format {
                field: "samples",
                detail: format!(
                    "expected {expected} samples ({} bytes), got {} bytes",
                    expected * 4,
                    payload.len()
                ),
            });
        }
        let values = payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Self::new(dims, origin, spacing, values)
    }
}

impl SdfField for GridField {
    /// Inside the grid box: trilinear interpolation. Outside: distance to the
    /// box plus the interpolated value at the nearest box point.
    fn value(&self, x: &Vec3) -> f64 {
        let gb = self.grid_box();
        if gb.contains(x) {
            self.trilinear(x).0
        } else {
            let c = gb.clamp(x);
            (x - c).norm() + self.trilinear(&c).0
        }
    }

    fn gradient(&self, x: &Vec3) -> Vec3 {
        if self.grid_box().contains(x) {
            self.trilinear(x).1
        } else {
            central_difference(self, x, self.fd_step())
        }
    }

    fn value_and_gradient(&self, x: &Vec3) -> (f64, Vec3) {
        if self.grid_box().contains(x) {
            self.trilinear(x)
        } else {
            (self.value(x), central_difference(self, x, self.fd_step()))
        }
    }

    /// Outside the box, `max(‖x − c‖, f(c) − ‖x − c‖)` for the nearest box
    /// point `c`. Both terms bound the distance to a surface that lies inside
    /// the box, and the second keeps steps finite as rays reach the box.
    fn trace_step(&self, x: &Vec3) -> f64 {
        let gb = self.grid_box();
        if gb.contains(x) {
            self.trilinear(x).0
        } else {
            let c = gb.clamp(x);
            let d = (x - c).norm();
            d.max(self.trilinear(&c).0 - d)
        }
    }

    fn bounds(&self) -> Aabb {
        self.grid_box()
    }

    fn voxel_size(&self) -> Option<f64> {
        Some(self.spacing.max())
    }
}
