//! Shared fixtures for the criterion benchmarks.

use magspec_core::operators::{build_pilot, Grid1D};
use magspec_core::TridiagOperator;

/// Pilot operator on a symmetric interval with `n` interior points.
pub fn pilot_fixture(nu: u32, ell: u32, eta: f64, half_width: f64, n: usize) -> TridiagOperator {
    let g = Grid1D::new(-half_width, half_width, n).expect("valid grid");
    build_pilot(nu, ell, eta, &g).expect("pilot operator")
}
