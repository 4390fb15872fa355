//! IO, harness and command line for SDF registration.
//!
//! Scenes and libraries are JSON files; scene and object fields come from
//! analytic primitives or `SDFG` grid files. [`registration::run_registration`]
//! drives sampling, the coarse stage and the fine stage and produces a JSON
//! report.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bake;
pub mod benchmark;
pub mod error;
pub mod io;
pub mod library;
pub mod registration;
pub mod render;
pub mod scene;
pub mod substitute;

pub use error::{HarnessError, Result, Stage};
pub use registration::{run_registration, RegistrationConfig, RegistrationOutcome, RegistrationReport};
pub use scene::{load_scene_config, LoadedScene, SceneConfig};
pub use sdfreg_core as core;

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "SDFREG_THREADS";
