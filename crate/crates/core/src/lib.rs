//! Strang splitting for diffusion-reaction problems with inhomogeneous
//! boundary conditions.
//!
//! The diffusion part is discretized by finite differences on the unit
//! interval or square (`grid`) and advanced by Crank-Nicolson, a rational
//! stability function, or the exact exponential (`flows`); the source part is
//! integrated exactly. With Crank-Nicolson inside the `f D f` composition the
//! scheme stays second order and keeps stationary states, which `analysis` and
//! `experiments` measure.
//!
//! Every routine is generic over [`Real`]; the aliases below fix `f64`.

// `!(x > 0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod double_double;
pub mod error;
pub mod experiments;
pub mod flows;
pub mod grid;
pub mod krylov;
pub mod linalg;
pub mod scalar;
pub mod splitting;
pub mod stability;

pub use double_double::DoubleDouble;
pub use error::{Error, Result};
pub use scalar::Real;

pub type DiscreteDiffusion = grid::DiscreteDiffusion<f64>;
pub type BoundarySpec = grid::BoundarySpec<f64>;
pub type BoundaryFaceCondition = grid::BoundaryFaceCondition<f64>;
pub type StabilityFunction = stability::StabilityFunction<f64>;
pub type SourceTerm = flows::SourceTerm<f64>;
pub type DiffusionPropagator = flows::DiffusionPropagator<f64>;
pub type SplittingMethod = splitting::SplittingMethod<f64>;
pub type Problem = splitting::Problem<f64>;
pub type KrylovOptions = krylov::KrylovOptions<f64>;

pub use analysis::{ConvergenceTable, NormKind};
pub use grid::{Face, UniformGrid};
pub use splitting::Composition;
