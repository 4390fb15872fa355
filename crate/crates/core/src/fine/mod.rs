//! Refinement of a Sim(3) estimate by gradient descent on SDF residuals.

mod kernel;
mod loss;
mod optimize;

pub use kernel::{general_form, kernel_derivatives, robust_kernel, KernelParams};
pub use loss::{
    loss_gradients, regularizer, residual_backward, residual_forward, total_loss, FineParams, LossBreakdown, N_PARAMS,
};
pub use optimize::{
    optimize, FineProblem, FineResult, IterationRecord, OptimizationStatus, OptimizationTrace, OptimizerConfig, Stepper,
};
