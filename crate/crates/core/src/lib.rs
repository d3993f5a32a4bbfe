//! Infinity Laplacian eigenfunctions on two-dimensional domains.
//!
//! The pipeline is: describe a domain ([`geometry`]), restrict a regular
//! lattice with wide stencils to it ([`grid`]), read off the first eigenvalue
//! from the distance to the boundary ([`distance`]), assemble one of the
//! wide-stencil residual operators ([`schemes`]) and drive it to a root with the
//! damped fixed-point iteration ([`solver`]). [`continuum`] holds the pointwise
//! operators the schemes are consistent with, and [`experiments`] reproduces
//! the standard numerical studies. [`cli`] reads the JSON run files used by
//! the `inf-eigen` binary.

pub mod cli;
pub mod continuum;
pub mod distance;
pub mod error;
pub mod experiments;
pub mod field;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod laplacian;
pub mod schemes;
pub mod solver;

pub use distance::{distance_to, distance_transform, high_ridge, lambda1, lambda2_two_ball, EigenvalueEstimate};
pub use error::{Error, Result};
pub use field::{linf_diff, ScalarField};
pub use geometry::{contains, DomainSpec, Point, Shape};
pub use grid::{build_grid, grid_errors, set_pinned, Grid, NodeKind};
pub use schemes::{residual, Execution, SchemeKind, SchemeSpec};
pub use solver::{solve, Init, SolveReport, SolverConfig};
