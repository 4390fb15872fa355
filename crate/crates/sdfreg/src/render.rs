//! Normal-shaded sphere-traced images, written as binary PPM.

use serde::{Deserialize, Serialize};
use sdfreg_core::fields::SdfField;
use sdfreg_core::sampling::{ray_grid, sphere_trace, CameraPose};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderOptions {
    pub max_steps: usize,
    pub epsilon: f64,
    pub background: [u8; 3],
    /// Diffuse colour at full illumination.
    pub albedo: [u8; 3],
    pub ambient: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            max_steps: 256,
            epsilon: 1e-4,
            background: [24, 24, 32],
            albedo: [230, 230, 230],
            ambient: 0.15,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    /// Row-major from the top-left.
    pub pixels: Vec<[u8; 3]>,
}

impl Image {
    pub fn pixel(&self, row: usize, col: usize) -> [u8; 3] {
        self.pixels[row * self.width + col]
    }

    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.pixels.iter().flatten());
        out
    }
}

/// Hit or miss per pixel, row-major.
pub fn hit_mask<F: SdfField + ?Sized>(f: &F, pose: &CameraPose, width: usize, height: usize, opts: &RenderOptions) -> Vec<bool> {
    ray_grid(pose, height, width)
        .iter()
        .map(|r| sphere_trace(f, r, opts.max_steps, opts.epsilon).is_some())
        .collect()
}

/// Sphere-traces one ray per pixel. Hits are shaded by a headlight along
/// the view ray.
pub fn render_image<F: SdfField + ?Sized>(f: &F, pose: &CameraPose, width: usize, height: usize, opts: &RenderOptions) -> Image {
    let pixels = ray_grid(pose, height, width)
        .iter()
        .map(|ray| match sphere_trace(f, ray, opts.max_steps, opts.epsilon) {
            None => opts.background,
            Some(p) => {
                let g = f.gradient(&p);
                let lambert = if g.norm() > 0.0 {
                    (-g.normalize().dot(&ray.direction)).max(0.0)
                } else {
                    0.0
                };
                let shade = opts.ambient + (1.0 - opts.ambient) * lambert;
                opts.albedo.map(|c| (c as f64 * shade).round().clamp(0.0, 255.0) as u8)
            }
        })
        .collect();
    Image { width, height, pixels }
}
