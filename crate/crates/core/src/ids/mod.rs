//! Fiber-integral spectral densities, the magnetic Weyl term and remainder sweeps.

mod correction;
mod cutoff;
mod fiber;
mod quadrature;
mod sweep;
mod weyl;

pub use correction::{correction_term, Correction};
pub use cutoff::{Cutoff, CutoffSpec};
pub use fiber::{
    band_function, check_nondegeneracy, fiber_ids, FiberBands, FiberBox, FiberIds, FiberMode,
    IdsOptions, LevelIntegral, NondegeneracyReport, Weight,
};
pub use quadrature::{
    composite_gauss_legendre, composite_nodes, integrate_adaptive, pairwise_sum, QuadResult,
};
pub use sweep::{
    box_cutoff, bulk_remainder, remainder_sweep, sweep_point, BulkRemainder, OracleSpec,
    SweepOptions, SweepRecord,
};
pub use weyl::{
    calibrate_weyl_normalization, landau_count, weyl_ids, weyl_on_window, WeylField, WeylIds,
    LEVEL_COUNT_NORMALIZATION, WEYL_NORMALIZATION,
};
