use alloc::boxed::Box;
use alloc::string::String;

use crate::fine::OptimizationTrace;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed grid data in `{field}`: {detail}")]
    Format { field: &'static str, detail: String },

    #[error("no surface samples extracted from {field} around centroid [{}, {}, {}]", centroid[0], centroid[1], centroid[2])]
    ExtractionFailure { field: String, centroid: [f64; 3] },

    #[error("resampling dropped every point")]
    ResampleFailure,

    #[error("initial registration failed: {0}")]
    InitialisationFailure(String),

    #[error("optimization aborted at iteration {iteration}: non-finite loss")]
    OptimizationAbort {
        iteration: usize,
        trace: Box<OptimizationTrace>,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
