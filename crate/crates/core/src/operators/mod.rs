//! Discretized one-dimensional fiber operators.
//!
//! Every constructor produces a [`TridiagOperator`]: second-order central
//! differences on a [`Grid1D`] with Dirichlet ends. The matrix is stored as one
//! diagonal and one off-diagonal array, so it is symmetric by construction.

mod domain;
mod grid;
mod params;

pub use domain::{select_domain, well_bottom, DomainInfo, DomainPolicy, WellBottom};
pub use grid::Grid1D;
pub use params::{CoefficientFn, ModelParams, Potential, Regime};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingTag {
    Pilot,
    General,
    Fiber,
    FiberLattice,
    Epsilon,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorMeta {
    pub eta: f64,
    pub nu: u32,
    pub ell: u32,
    pub tag: ScalingTag,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TridiagOperator {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
    pub grid: Grid1D,
    pub meta: OperatorMeta,
}

impl TridiagOperator {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Builds `c·D² + V` with constant kinetic coefficient `c`.
    pub fn from_potential(
        grid: Grid1D,
        kinetic: f64,
        v: impl Fn(f64) -> f64,
        meta: OperatorMeta,
    ) -> Result<Self> {
        grid.validate()?;
        let dx = grid.spacing();
        let t = kinetic / (dx * dx);
        let diag: Vec<f64> = grid.points().map(|x| 2.0 * t + v(x)).collect();
        let offdiag = vec![-t; grid.n - 1];
        let op = TridiagOperator {
            diag,
            offdiag,
            grid,
            meta,
        };
        op.check_finite()?;
        Ok(op)
    }

    pub fn check_finite(&self) -> Result<()> {
        if let Some(i) = self.diag.iter().position(|d| !d.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        if let Some(i) = self.offdiag.iter().position(|d| !d.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(())
    }

    /// Infinity norm.
    pub fn norm(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let l = if i > 0 {
                    self.offdiag[i - 1].abs()
                } else {
                    0.0
                };
                let r = if i + 1 < n {
                    self.offdiag[i].abs()
                } else {
                    0.0
                };
                self.diag[i].abs() + l + r
            })
            .fold(0.0, f64::max)
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let l = if i > 0 {
                self.offdiag[i - 1].abs()
            } else {
                0.0
            };
            let r = if i + 1 < n {
                self.offdiag[i].abs()
            } else {
                0.0
            };
            lo = lo.min(self.diag[i] - l - r);
            hi = hi.max(self.diag[i] + l + r);
        }
        (lo, hi)
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        self.diag.iter_mut().for_each(|d| *d *= factor);
        self.offdiag.iter_mut().for_each(|d| *d *= factor);
        self
    }

    pub fn shifted(mut self, shift: f64) -> Self {
        self.diag.iter_mut().for_each(|d| *d += shift);
        self
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * v[i];
                if i > 0 {
                    s += self.offdiag[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s += self.offdiag[i] * v[i + 1];
                }
                s
            })
            .collect()
    }
}

/// Effective potential of the pilot operator, `(η − x^ν/ν)² − (2l+1)x^{ν−1}`.
pub fn pilot_potential(nu: u32, ell: u32, eta: f64, x: f64) -> f64 {
    let n = nu as i32;
    let w = eta - x.powi(n) / nu as f64;
    w * w - (2 * ell + 1) as f64 * x.powi(n - 1)
}

/// Real solutions of `x^ν/ν = η` together with the origin.
pub fn pilot_seeds(nu: u32, eta: f64) -> Vec<f64> {
    let mut seeds = vec![0.0];
    let g = (nu as f64 * eta.abs()).powf(1.0 / nu as f64);
    if eta > 0.0 {
        seeds.push(g);
        if nu.is_multiple_of(2) {
            seeds.push(-g);
        }
    } else if eta < 0.0 && nu % 2 == 1 {
        seeds.push(-g);
    }
    seeds
}

fn check_pilot_args(nu: u32, grid: &Grid1D) -> Result<()> {
    if nu < 2 {
        return Err(Error::InvalidParameter(format!("nu = {nu} < 2")));
    }
    grid.validate()
}

fn boundary_guard(v: impl Fn(f64) -> f64, grid: &Grid1D) -> Result<()> {
    for x in [grid.x_min, grid.x_max] {
        let vx = v(x);
        if vx < 0.0 {
            return Err(Error::BoundaryContamination(format!(
                "endpoint x = {x} lies in the allowed region (V = {vx:.3e} < 0)"
            )));
        }
    }
    Ok(())
}

/// `a⁰(η) = D² + (η − x^ν/ν)² − (2l+1)x^{ν−1}`.
pub fn build_pilot(nu: u32, ell: u32, eta: f64, grid: &Grid1D) -> Result<TridiagOperator> {
    check_pilot_args(nu, grid)?;
    let v = |x: f64| pilot_potential(nu, ell, eta, x);
    boundary_guard(v, grid)?;
    TridiagOperator::from_potential(
        *grid,
        1.0,
        v,
        OperatorMeta {
            eta,
            nu,
            ell,
            tag: ScalingTag::Pilot,
        },
    )
}

/// `(1+α₁x+β₁²x²)D² + (1+α₂x+β₂²x²)(η−x^ν/ν)² − (2l+1)(1+α₃x)x^{ν−1}`.
///
/// The kinetic term is discretized as `D p(x) D` with `p` sampled at
/// midpoints, which keeps the matrix symmetric.
pub fn build_general(
    nu: u32,
    ell: u32,
    eta: f64,
    alpha: [f64; 3],
    beta: [f64; 3],
    grid: &Grid1D,
) -> Result<TridiagOperator> {
    check_pilot_args(nu, grid)?;
    let n = nu as i32;
    let p = |x: f64| 1.0 + alpha[0] * x + beta[0] * beta[0] * x * x;
    let v = |x: f64| {
        let w = eta - x.powi(n) / nu as f64;
        (1.0 + alpha[1] * x + beta[1] * beta[1] * x * x) * w * w
            - (2 * ell + 1) as f64 * (1.0 + alpha[2] * x) * x.powi(n - 1)
    };
    boundary_guard(v, grid)?;
    let dx = grid.spacing();
    let inv = 1.0 / (dx * dx);
    // p at the n+1 midpoints x_{i-1/2}, i = 0..=n
    let mids: Vec<f64> = (0..=grid.n)
        .map(|i| grid.x_min + (i as f64 + 0.5) * dx)
        .collect();
    let pm: Vec<f64> = mids.iter().map(|&x| p(x)).collect();
    if let Some((i, &val)) = pm.iter().enumerate().find(|(_, v)| **v <= 0.0) {
        return Err(Error::Ellipticity {
            x: mids[i],
            value: val,
        });
    }
    let diag: Vec<f64> = (0..grid.n)
        .map(|i| (pm[i] + pm[i + 1]) * inv + v(grid.point(i)))
        .collect();
    let offdiag: Vec<f64> = (1..grid.n).map(|i| -pm[i] * inv).collect();
    let op = TridiagOperator {
        diag,
        offdiag,
        grid: *grid,
        meta: OperatorMeta {
            eta,
            nu,
            ell,
            tag: ScalingTag::General,
        },
    };
    op.check_finite()?;
    Ok(op)
}

/// Fiber operator
/// `½(h²D₁² + σ²(ξ₂ − μV₂(x₁))² − (2l+1)μh F(x₁) − W(x₂))` on a physical `x₁` grid.
pub fn build_fiber(
    params: &ModelParams,
    x2: f64,
    xi2: f64,
    grid: &Grid1D,
) -> Result<TridiagOperator> {
    fiber_impl(params, x2, xi2, grid, true)
}

/// As [`build_fiber`] on a fixed Dirichlet box, without the boundary guard.
pub fn build_fiber_in_box(
    params: &ModelParams,
    x2: f64,
    xi2: f64,
    grid: &Grid1D,
) -> Result<TridiagOperator> {
    fiber_impl(params, x2, xi2, grid, false)
}

fn fiber_impl(
    params: &ModelParams,
    x2: f64,
    xi2: f64,
    grid: &Grid1D,
    guard: bool,
) -> Result<TridiagOperator> {
    params.validate()?;
    grid.validate()?;
    let (mu, h) = (params.mu, params.h);
    let lf = (2 * params.ell + 1) as f64;
    let v = |x: f64| {
        let s = params.sigma.eval(x);
        let a = xi2 - mu * params.vector_potential(x);
        s * s * a * a - lf * mu * h * params.field(x)
    };
    if guard {
        boundary_guard(v, grid)?;
    }
    let w = params.w.eval(x2);
    let op = TridiagOperator::from_potential(
        *grid,
        h * h,
        |x| v(x) - w,
        OperatorMeta {
            eta: xi2,
            nu: params.nu,
            ell: params.ell,
            tag: ScalingTag::Fiber,
        },
    )?;
    Ok(op.scaled(0.5))
}

/// Factors connecting physical fiber quantities with the unit pilot operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingMap {
    pub x_factor: f64,
    pub energy_factor: f64,
    pub eta_factor: f64,
}

impl ScalingMap {
    pub fn identity() -> Self {
        ScalingMap {
            x_factor: 1.0,
            energy_factor: 1.0,
            eta_factor: 1.0,
        }
    }

    pub fn inverse(&self) -> Self {
        ScalingMap {
            x_factor: 1.0 / self.x_factor,
            energy_factor: 1.0 / self.energy_factor,
            eta_factor: 1.0 / self.eta_factor,
        }
    }

    pub fn compose(&self, other: &ScalingMap) -> Self {
        ScalingMap {
            x_factor: self.x_factor * other.x_factor,
            energy_factor: self.energy_factor * other.energy_factor,
            eta_factor: self.eta_factor * other.eta_factor,
        }
    }

    /// Physical `ξ₂` to unit `η`.
    pub fn unit_eta(&self, xi2: f64) -> f64 {
        xi2 / self.eta_factor
    }

    pub fn physical_xi(&self, eta: f64) -> f64 {
        eta * self.eta_factor
    }

    pub fn physical_x(&self, y: f64) -> f64 {
        y * self.x_factor
    }

    pub fn physical_energy(&self, e: f64) -> f64 {
        e * self.energy_factor
    }

    pub fn physical_grid(&self, unit: &Grid1D) -> Grid1D {
        Grid1D {
            x_min: unit.x_min * self.x_factor,
            x_max: unit.x_max * self.x_factor,
            n: unit.n,
        }
    }

    pub fn unit_grid(&self, physical: &Grid1D) -> Grid1D {
        self.inverse().physical_grid(physical)
    }
}

/// `x ↦ (μ⁻¹h)^{1/(ν+1)}x`, `η ↦ (μh^ν)^{1/(ν+1)}η`, energies by `(μh^ν)^{2/(ν+1)}`.
///
/// For the model operator the fiber spectrum at `ξ₂` equals
/// `½·energy_factor·spec a⁰(ξ₂/eta_factor) − ½W(x₂)`.
pub fn rescale_to_unit(params: &ModelParams, _eta: f64) -> Result<ScalingMap> {
    if !(params.mu > 0.0 && params.h > 0.0) {
        return Err(Error::InvalidParameter("mu and h must be positive".into()));
    }
    let p = 1.0 / (params.nu as f64 + 1.0);
    let m = params.coupling();
    Ok(ScalingMap {
        x_factor: (params.h / params.mu).powf(p),
        energy_factor: m.powf(2.0 * p),
        eta_factor: m.powf(p),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid1D {
        Grid1D::new(-6.0, 6.0, 101).unwrap()
    }

    #[test]
    fn pilot_nu2_potential() {
        let g = grid();
        let op = build_pilot(2, 0, 0.0, &g).unwrap();
        let dx = g.spacing();
        for (i, x) in g.points().enumerate() {
            let expect = 2.0 / (dx * dx) + x.powi(4) / 4.0 - x;
            assert!((op.diag[i] - expect).abs() <= 1e-12 * expect.abs());
        }
        assert!(op.offdiag.iter().all(|&o| o == -1.0 / (dx * dx)));
    }

    #[test]
    fn pilot_nu3_is_even_at_eta_zero() {
        let g = grid();
        let op = build_pilot(3, 1, 0.0, &g).unwrap();
        let n = g.n;
        for i in 0..n {
            let x = g.point(i);
            let v = x.powi(6) / 9.0 - 3.0 * x * x;
            assert!((pilot_potential(3, 1, 0.0, x) - v).abs() < 1e-9);
            assert!((op.diag[i] - op.diag[n - 1 - i]).abs() <= 1e-9 * op.diag[i].abs());
        }
    }

    #[test]
    fn odd_nu_reflection_maps_eta_to_minus_eta() {
        let g = Grid1D::new(-5.0, 5.0, 80).unwrap();
        let a = build_pilot(3, 0, 1.7, &g).unwrap();
        let b = build_pilot(3, 0, -1.7, &g.reflected()).unwrap();
        let n = g.n;
        for i in 0..n {
            assert!((a.diag[i] - b.diag[n - 1 - i]).abs() <= 1e-12 * a.diag[i].abs());
        }
    }

    #[test]
    fn boundary_guard_rejects_short_grid() {
        let g = Grid1D::new(-1.0, 1.5, 50).unwrap();
        let err = build_pilot(2, 0, 0.0, &g).unwrap_err();
        assert!(matches!(err, Error::BoundaryContamination(_)));
    }

    #[test]
    fn general_reduces_to_pilot() {
        let g = grid();
        let a = build_general(2, 1, 0.4, [0.0; 3], [0.0; 3], &g).unwrap();
        let b = build_pilot(2, 1, 0.4, &g).unwrap();
        assert_eq!(a.diag, b.diag);
        assert_eq!(a.offdiag, b.offdiag);
    }

    #[test]
    fn general_detects_lost_ellipticity() {
        let g = grid();
        let err = build_general(2, 0, 0.0, [0.5, 0.0, 0.0], [0.0; 3], &g).unwrap_err();
        assert!(matches!(err, Error::Ellipticity { .. }));
    }

    #[test]
    fn fiber_unit_params_is_half_pilot() {
        let g = grid();
        let p = ModelParams::model(2, 1, 1.0, 1.0, Potential::constant(0.0));
        let f = build_fiber(&p, 0.3, 0.8, &g).unwrap();
        let pilot = build_pilot(2, 1, 0.8, &g).unwrap();
        for i in 0..g.n {
            assert!((2.0 * f.diag[i] - pilot.diag[i]).abs() <= 1e-12 * pilot.diag[i].abs());
        }
        for i in 0..g.n - 1 {
            assert_eq!(2.0 * f.offdiag[i], pilot.offdiag[i]);
        }
    }

    #[test]
    fn fiber_constant_w_shifts_diagonal() {
        let g = grid();
        let p0 = ModelParams::model(2, 1, 1.0, 1.0, Potential::constant(0.0));
        let p1 = ModelParams::model(2, 1, 1.0, 1.0, Potential::constant(0.6));
        let a = build_fiber(&p0, 0.0, 0.5, &g).unwrap();
        let b = build_fiber(&p1, 0.0, 0.5, &g).unwrap();
        for i in 0..g.n {
            assert!((a.diag[i] - 0.3 - b.diag[i]).abs() < 1e-12 * a.diag[i].abs().max(1.0));
        }
    }

    #[test]
    fn scaling_factors() {
        let p = ModelParams::model(2, 0, 1.0, 1.0, Potential::constant(0.0));
        let s = rescale_to_unit(&p, 0.0).unwrap();
        assert_eq!(s, ScalingMap::identity());
        let p = ModelParams::model(2, 0, 8.0, 1.0, Potential::constant(0.0));
        let s = rescale_to_unit(&p, 0.0).unwrap();
        assert!((s.energy_factor - 4.0).abs() < 1e-14);
        assert!((s.eta_factor - 2.0).abs() < 1e-14);
        assert!((s.x_factor - 0.5).abs() < 1e-14);
    }

    #[test]
    fn seeds() {
        assert_eq!(pilot_seeds(2, -1.0), vec![0.0]);
        let s = pilot_seeds(2, 2.0);
        assert!((s[1] - 2.0).abs() < 1e-14 && (s[2] + 2.0).abs() < 1e-14);
        let s = pilot_seeds(3, -9.0);
        assert!((s[1] + 3.0).abs() < 1e-12);
    }
}
