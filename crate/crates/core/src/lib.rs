//! Numerical toolkit for two-dimensional Schrödinger operators with a strong
//! magnetic field vanishing like `|x₁|^{ν−1}` along a line.
//!
//! The crate is organized bottom-up:
//!
//! * [`operators`] builds discretized one-dimensional fiber operators.
//! * [`eigensolve`] extracts eigenvalues by Sturm bisection, counts inertia of
//!   banded Hermitian matrices and extrapolates across grids.
//! * [`perturbation`] carries out the Hermite ladder computation of the
//!   second-order eigenvalue coefficient in exact arithmetic.
//! * [`branches`] traces eigenvalue branches in `η` and fits their asymptotics.
//! * [`ids`] evaluates fiber-integral densities, the magnetic Weyl term and
//!   remainder sweeps.
//! * [`oracle2d`] is an independent brute-force count on a two-dimensional box.
//! * [`verify`] bundles the acceptance checks used by the test suite and CLI.

pub mod branches;
pub mod eigensolve;
pub mod error;
pub mod ids;
pub mod operators;
pub mod oracle2d;
pub mod perturbation;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
pub use operators::{Grid1D, ModelParams, Potential, ScalingMap, TridiagOperator};

/// Version string embedded in every output artifact.
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");
