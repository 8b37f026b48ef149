//! Grids chosen from the potential and a coarse estimate of the spectrum.

use super::richardson::refine_richardson;
use super::sturm::{eigen_lowest_k, EigenResult};
use crate::error::Result;
use crate::operators::{
    select_domain, well_bottom, DomainInfo, DomainPolicy, Grid1D, TridiagOperator,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AutoGrid {
    pub grid: Grid1D,
    pub domain: DomainInfo,
    /// Highest requested eigenvalue from the coarse pass.
    pub coarse_top: f64,
}

/// Two passes: a coarse solve on a generous interval estimates the top
/// requested level; the final interval covers that level plus a margin of
/// `max(energy_margin, ω/2)` where `ω` is the harmonic frequency of the well.
///
/// The energy never drops below zero so that both endpoints lie in the
/// forbidden region at energy zero.
pub fn auto_grid(
    v: &dyn Fn(f64) -> f64,
    seeds: &[f64],
    k: usize,
    policy: &DomainPolicy,
    build: &dyn Fn(&Grid1D) -> Result<TridiagOperator>,
) -> Result<AutoGrid> {
    let bottom = well_bottom(v, seeds);
    let omega = bottom.harmonic_length.powi(-2);
    let coarse_policy = policy.coarse();
    let e0 = bottom.value + (2 * k + 1) as f64 * omega + policy.energy_margin;
    let mut dom = select_domain(v, seeds, e0.max(policy.energy_margin), &coarse_policy)?;
    let g = dom.grid(&coarse_policy)?;
    let coarse = eigen_lowest_k(&build(&g)?, k, 1e-10)?;
    let top = coarse.values[k - 1];
    let energy = top.max(0.0) + policy.energy_margin.max(0.5 * omega);
    let mut domain = select_domain(v, seeds, energy, policy)?;
    let grid = domain.grid(policy)?;
    Ok(AutoGrid {
        grid,
        domain,
        coarse_top: top,
    })
}

/// Lowest `k` eigenvalues on an automatic grid with Richardson extrapolation.
pub fn solve_auto(
    v: &dyn Fn(f64) -> f64,
    seeds: &[f64],
    k: usize,
    policy: &DomainPolicy,
    rtol: f64,
    build: &dyn Fn(&Grid1D) -> Result<TridiagOperator>,
) -> Result<(EigenResult, AutoGrid)> {
    let auto = auto_grid(v, seeds, k, policy, build)?;
    let r = refine_richardson(build, k, &auto.grid, &auto.grid.refined(), rtol)?;
    Ok((r, auto))
}
