//! Weighted sum-rate power control for Gaussian interference channels.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`, which is what the file formats
//! and the command-line tool use.

// `!(x > 0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod io;
pub mod linalg;
pub mod multitone;
pub mod real;
pub mod relax;
pub mod solvers;
pub mod spectral;

pub use channel::{objective, objective_log, Budget, RegionCheck};
pub use error::{Error, Result};
pub use multitone::stack_multitone;
pub use real::Real;
pub use relax::{
    objective_bounds, relaxed_max, relaxed_max_noiseless, relaxed_max_tilde, NoiselessVariant, RelaxMatrix,
};
pub use solvers::{SolverReport, Termination};
pub use spectral::{NonnegMatrix, PerronPair};

pub type Matrix = linalg::Matrix<f64>;
pub type ChannelInstance = channel::ChannelInstance<f64>;
pub type MultiToneInstance = multitone::MultiToneInstance<f64>;
pub type DerivedMatrices = channel::DerivedMatrices<f64>;
pub type BoundsReport = relax::BoundsReport<f64>;
pub type RelaxedSolution = relax::RelaxedSolution<f64>;
pub type Report = solvers::SolverReport<f64>;
