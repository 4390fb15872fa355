//! Object library manifests: JSON mapping names to analytic primitives or
//! grid files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sdfreg_core::fields::{shared, ObjectLibrary, Primitive};
use sdfreg_core::metrics::Symmetry;
use sdfreg_core::Vec3;

use crate::error::{HarnessError, Result};
use crate::io;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetrySpec {
    None,
    Spherical,
    Axial { axis: Vec3, flip: bool },
}

impl SymmetrySpec {
    fn to_symmetry(&self) -> Result<Symmetry> {
        Ok(match self {
            SymmetrySpec::None => Symmetry::None,
            SymmetrySpec::Spherical => Symmetry::Spherical,
            SymmetrySpec::Axial { axis, flip } => {
                let n = axis.norm();
                if !(n > 0.0 && n.is_finite()) {
                    return Err(HarnessError::load("symmetry axis must be a finite non-zero vector"));
                }
                Symmetry::Axial {
                    axis: axis / n,
                    flip: *flip,
                }
            }
        })
    }
}

/// One library entry. Analytic entries default to the primitive's own
/// symmetry; grid entries default to none.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "snake_case")]
pub enum EntrySpec {
    Analytic {
        primitive: Primitive,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        symmetry: Option<SymmetrySpec>,
    },
    Grid {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        symmetry: Option<SymmetrySpec>,
    },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LibraryManifest {
    pub objects: BTreeMap<String, EntrySpec>,
}

impl LibraryManifest {
    pub fn analytic(entries: impl IntoIterator<Item = (impl Into<String>, Primitive)>) -> Self {
        Self {
            objects: entries
                .into_iter()
                .map(|(n, p)| {
                    (
                        n.into(),
                        EntrySpec::Analytic {
                            primitive: p,
                            symmetry: None,
                        },
                    )
                })
                .collect(),
        }
    }

    /// Builds the library; grid paths resolve against `base_dir`.
    pub fn build(&self, base_dir: &Path) -> Result<ObjectLibrary> {
        let mut lib = ObjectLibrary::new();
        for (name, spec) in &self.objects {
            let (field, symmetry) = match spec {
                EntrySpec::Analytic { primitive, symmetry } => {
                    primitive
                        .validate()
                        .map_err(|e| HarnessError::load(format!("library entry `{name}`: {e}")))?;
                    let sym = match symmetry {
                        Some(s) => s.to_symmetry()?,
                        None => primitive.symmetry(),
                    };
                    (shared(primitive.clone()), sym)
                }
                EntrySpec::Grid { path, symmetry } => {
                    let grid = io::load_grid(&base_dir.join(path))?;
                    let sym = symmetry.as_ref().map(SymmetrySpec::to_symmetry).transpose()?.unwrap_or_default();
                    (Arc::new(grid) as _, sym)
                }
            };
            lib.insert(name.clone(), field, symmetry)
                .map_err(|e| HarnessError::load(e.to_string()))?;
        }
        Ok(lib)
    }
}

pub fn load_library(path: &Path) -> Result<ObjectLibrary> {
    let manifest: LibraryManifest = io::read_json(path)?;
    manifest.build(path.parent().unwrap_or(Path::new(".")))
}
