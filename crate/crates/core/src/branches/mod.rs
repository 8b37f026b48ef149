//! Eigenvalue branches `λ_n(η)` of the pilot family and their asymptotics.

mod fits;
mod spacing;
mod trace;
mod zeros;

pub use fits::{fit_exponential_decay, fit_power_law, DecayFit, PowerLawFit, DECAY_FLOOR};
pub use spacing::{
    sign_separation, spacing_scale, spacing_stats, EtaRegime, RegimeSummary, SpacingRow,
    SpacingTable,
};
pub use trace::{
    factor_bidiagonal, geometric_grid, solve_point, trace_branches, uniform_grid, BranchPoint,
    BranchSpec, EigenBranch, Route, TraceSettings,
};
pub use zeros::{detect_zeros, simultaneous_crossings, ZeroCrossing};
