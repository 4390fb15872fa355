//! File helpers: atomic writes, JSON, grid files, PLY point clouds and
//! optimization traces.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use sdfreg_core::fields::GridField;
use sdfreg_core::fine::OptimizationTrace;
use sdfreg_core::Vec3;

use crate::error::{HarnessError, Result};

/// Writes `bytes` to a sibling temp file and renames it over `path`.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let werr = |source| HarnessError::Write {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(werr)?;
    }
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(name);
    let mut f = fs::File::create(&tmp).map_err(werr)?;
    f.write_all(bytes).and_then(|_| f.sync_all()).map_err(werr)?;
    drop(f);
    fs::rename(&tmp, path).map_err(werr)
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| HarnessError::Read {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = read_bytes(path)?;
    serde_json::from_slice(&bytes).map_err(|source| HarnessError::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// Pretty JSON with a trailing newline, written atomically.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|source| HarnessError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    bytes.push(b'\n');
    atomic_write(path, &bytes)
}

pub fn load_grid(path: &Path) -> Result<GridField> {
    let bytes = read_bytes(path)?;
    GridField::from_bytes(&bytes).map_err(|e| HarnessError::load(format!("grid file `{}`: {e}", path.display())))
}

pub fn save_grid(path: &Path, grid: &GridField) -> Result<()> {
    atomic_write(path, &grid.to_bytes())
}

/// ASCII PLY with one vertex per point.
pub fn ply_bytes(points: &[Vec3]) -> Vec<u8> {
    let mut out = format!(
        "ply\nformat ascii 1.0\nelement vertex {}\nproperty double x\nproperty double y\nproperty double z\nend_header\n",
        points.len()
    );
    for p in points {
        out.push_str(&format!("{} {} {}\n", p.x, p.y, p.z));
    }
    out.into_bytes()
}

pub fn write_ply(path: &Path, points: &[Vec3]) -> Result<()> {
    atomic_write(path, &ply_bytes(points))
}

/// One row per iteration: loss terms and the nine optimized parameters.
pub fn trace_csv(trace: &OptimizationTrace) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "iteration", "loss", "forward", "backward", "regularizer", "tx", "ty", "tz", "roll", "pitch", "yaw", "sigma", "p", "alpha", "resampled",
    ])?;
    for r in &trace.records {
        let mut row = vec![
            r.iteration.to_string(),
            r.loss.total.to_string(),
            r.loss.forward.to_string(),
            r.loss.backward.to_string(),
            r.loss.regularizer.to_string(),
        ];
        row.extend(r.params.to_array().iter().map(f64::to_string));
        row.push(r.resampled.to_string());
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| HarnessError::Csv(e.into_error().into()))
}

pub fn write_trace_csv(path: &Path, trace: &OptimizationTrace) -> Result<()> {
    atomic_write(path, &trace_csv(trace)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ply_header_counts_vertices() {
        let s = String::from_utf8(ply_bytes(&[Vec3::x(), Vec3::y()])).unwrap();
        assert!(s.contains("element vertex 2\n"));
        assert!(s.ends_with("0 1 0\n"));
    }
}
