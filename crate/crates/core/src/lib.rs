//! Numerical tools for the singularly perturbed problem
//! `-eps^2 Delta u + q(x) u = f(u)` on a periodic cube in three dimensions.
//!
//! Everything is generic over the scalar type (`f32` or `f64`, see [`Real`]);
//! the aliases at the crate root fix it to `f64`.

// `!(x > 0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cg;
pub mod contraction;
pub mod error;
pub mod field;
mod fixed_point;
pub mod general;
pub mod grid;
pub mod guard;
pub mod io;
pub mod kernel;
pub mod nonlinearity;
pub mod potential;
pub mod quadrature;
pub mod rescaled;
pub mod scalar;
pub mod spectral;

pub use contraction::{
    apply_t, apply_t0, certify, epsilon_sweep, picard_solve, solve_limit, ContractionCertificate, ProblemSpec,
    SweepRow, SweepTable,
};
pub use error::{Error, GuardKind, GuardViolation, Result};
pub use field::ScalarField;
pub use fixed_point::SolveReport;
pub use general::DiscreteOperator;
pub use grid::GridSpec3D;
pub use guard::GuardPolicy;
pub use kernel::{GreenOperator, KernelParams};
pub use nonlinearity::Nonlinearity;
pub use potential::Potential;
pub use rescaled::RescaledProblem;
pub use scalar::Real;
pub use spectral::Laplacian;

pub type Grid = GridSpec3D<f64>;
pub type Field = ScalarField<f64>;
pub type Problem = ProblemSpec<f64>;
pub type Kernel = KernelParams<f64>;
pub type Green = GreenOperator<f64>;
pub type Nonlin = Nonlinearity<f64>;

pub type Grid32 = GridSpec3D<f32>;
pub type Field32 = ScalarField<f32>;
pub type Problem32 = ProblemSpec<f32>;
