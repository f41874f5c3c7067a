//! Numerical calculus on iterated tangent bundles over a single chart.
//!
//! The library models TM, TTM and TTTM of an m-dimensional chart as blocked
//! coordinate tuples, and builds the structural maps between them (canonical
//! flips, vertical lifts, connectors, horizontal lifts, sprays) on top of a
//! nestable forward-mode scalar type ([`scalar::Tangent`]). Evaluating any
//! chart map over scalars nested k deep realizes its k-fold tangent
//! prolongation, so covariant derivatives, curvature and the Jacobi flow all
//! come out of one generic evaluation path instead of hand-coded derivative
//! formulas.
//!
//! The headline computation: integrating the vector field obtained by
//! flipping the tangent prolongation of the spray carries a geodesic and a
//! Jacobi field along it simultaneously. Two independent oracles (a geodesic
//! variation and the classical second-order Jacobi ODE) cross-check it, and
//! [`verify`] packages every operator identity as a seeded, reproducible
//! check suite.

// Tensor-index triple loops read better than iterator chains here, and the
// negated comparisons in validation guards are deliberate: `!(x > 0.0)`
// rejects NaN where `x <= 0.0` would let it through.
#![allow(clippy::needless_range_loop)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod batch;
pub mod bundle;
pub mod connection;
pub mod flow;
pub mod integrate;
pub mod linalg;
pub mod maps;
pub mod models;
pub mod output;
pub mod rng;
pub mod scalar;
pub mod verify;

pub use bundle::{TTTVector, TTVector, TangentVector};
pub use flow::JacobiState;
pub use integrate::Trajectory;
pub use maps::SmoothMap;
pub use models::{ManifoldModel, ModelSpec};
pub use scalar::{Scalar, Tangent};

use thiserror::Error;

/// Errors surfaced by evaluation, model construction and integration.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("division by zero in tangent arithmetic at nesting depth {depth}")]
    DivisionByZero { depth: usize },

    #[error("sqrt of non-positive value {value} at nesting depth {depth}")]
    SqrtDomain { depth: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point lies outside the chart domain of model `{model}`")]
    OutsideDomain { model: String },

    #[error("trajectory left the chart domain of model `{model}` at t = {t}")]
    LeftDomain { model: String, t: f64 },

    #[error("integration step produced a non-finite state at t = {t}")]
    StepRejected { t: f64 },

    #[error("vector is not vertical: |eta| = {defect:e} exceeds tolerance {tol:e}")]
    NotVertical { defect: f64, tol: f64 },

    #[error("base points differ by {defect:e} (tolerance {tol:e})")]
    BaseMismatch { defect: f64, tol: f64 },

    #[error("matrix is numerically singular (pivot {pivot:e})")]
    SingularMatrix { pivot: f64 },

    #[error("invalid model spec: {reason}")]
    InvalidSpec { reason: String },

    #[error("invalid argument: {reason}")]
    InvalidArgument { reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

/// Relative scale used when comparing base points of bundle elements.
pub const BASE_MATCH_TOL: f64 = 1e-12;

/// Default verticality tolerance for the vertical projection.
pub const VERTICAL_TOL: f64 = 1e-9;
