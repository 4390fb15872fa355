//! Sim(3) registration between signed distance fields.
//!
//! Given a scene field and an object field from a library, this crate
//! recovers the similarity transform (rotation, translation, uniform scale)
//! that places the object into the scene:
//!
//! 1. surface samples are extracted from both fields by sphere tracing ray
//!    grids from several cameras around the object ([`sampling`]);
//! 2. a rigid initial estimate comes from FPFH matching, RANSAC and
//!    point-to-point ICP ([`coarse`]);
//! 3. the estimate is refined by gradient descent on a bidirectional robust
//!    SDF residual loss with a Chamfer regularizer ([`fine`]).
//!
//! The crate is `no_std` and only needs `alloc`. File formats, rendering,
//! timing and the command line live in the `sdfreg` companion crate.

#![no_std]
// `Float` supplies the math methods without std. Whenever std is linked
// (tests, std-enabled dependencies) its inherent methods shadow the import.
#![allow(unused_imports)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod coarse;
pub mod error;
pub mod fields;
pub mod fine;
pub mod metrics;
pub mod sampling;
pub mod spatial;
pub mod transforms;

pub use error::{Error, Result};
pub use fields::{Aabb, SdfField, SharedField};
pub use transforms::{Sim3, Sim3Params};

/// Column vector used for points, directions and gradients.
pub type Vec3 = nalgebra::Vector3<f64>;
/// 3×3 matrix used for rotations.
pub type Mat3 = nalgebra::Matrix3<f64>;
