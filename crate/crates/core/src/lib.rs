//! Numerical laboratory for parabolic Hardy spaces on the half-space
//! `X = (0, ∞) × ℝⁿ` and the maximal-regularity operator of the heat equation.
//!
//! The crate is organized bottom-up:
//!
//! - [`space`]: the parabolic quasi-distance, balls and exact volumes.
//! - [`grid`]: piecewise-constant functions on space-time boxes.
//! - [`heatop`]: heat kernels, the semigroup, and the operators `T`, `T*`.
//! - [`atoms`]: atom validators, generators and molecule reports.
//! - [`decompose`]: constructive atomic decompositions.
//! - [`verify`]: certification experiments.

pub mod atoms;
pub mod decompose;
pub mod error;
pub mod grid;
pub mod heatop;
pub mod quad;
pub mod space;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{GridFunction, Norm, SpaceTimeGrid};
pub use heatop::{apply_t, apply_tstar, Boundary, KernelSpec, OperatorImage, PointField};
pub use space::{parabolic_distance, ParabolicBall, SpacePoint, SpatialDomain};
