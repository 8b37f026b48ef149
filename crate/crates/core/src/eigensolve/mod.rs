//! Lowest eigenvalues of discretized one-dimensional operators, plus inertia
//! counts for the banded two-dimensional matrices.

mod auto;
mod banded;
mod inverse;
mod richardson;
mod singular;
mod sturm;

pub use auto::{auto_grid, solve_auto, AutoGrid};
pub use banded::{BandedLdl, BandedMatrix, InertiaReport};
pub use inverse::{eigenvector, eigenvector_with};
pub use richardson::refine_richardson;
pub use singular::{singular_count_below, smallest_singular_values, Bidiagonal};
pub use sturm::{eigen_lowest_k, sturm_count, EigenResult};

use crate::error::Result;
use crate::operators::TridiagOperator;

/// Matrices that can report how many eigenvalues lie below a threshold.
pub trait Inertia {
    fn count_below(&self, tau: f64) -> Result<usize>;
}

impl Inertia for TridiagOperator {
    fn count_below(&self, tau: f64) -> Result<usize> {
        self.check_finite()?;
        Ok(sturm_count(&self.diag, &self.offdiag, tau))
    }
}

impl Inertia for BandedMatrix {
    fn count_below(&self, tau: f64) -> Result<usize> {
        Ok(self.inertia_below(tau)?.negative)
    }
}

pub fn inertia_below<M: Inertia + ?Sized>(m: &M, tau: f64) -> Result<usize> {
    m.count_below(tau)
}
