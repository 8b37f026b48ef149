use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigensolve::{auto_grid, refine_richardson, smallest_singular_values, Bidiagonal};
use crate::error::{Error, Result};
use crate::operators::{
    build_general, build_pilot, pilot_potential, pilot_seeds, DomainPolicy, Grid1D, TridiagOperator,
};

/// Discretization used for a branch family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Factorized for `l = 0` without perturbation terms, standard otherwise.
    #[default]
    Auto,
    Standard,
    /// `a⁰ = A*A` with `A = −∂ + (η − x^ν/ν)`; values are squared singular values.
    Factorized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchSpec {
    pub nu: u32,
    pub ell: u32,
    #[serde(default)]
    pub alpha: [f64; 3],
    #[serde(default)]
    pub beta: [f64; 3],
    #[serde(default)]
    pub route: Route,
}

impl BranchSpec {
    pub fn pilot(nu: u32, ell: u32) -> Self {
        BranchSpec {
            nu,
            ell,
            alpha: [0.0; 3],
            beta: [0.0; 3],
            route: Route::Auto,
        }
    }

    fn is_pilot(&self) -> bool {
        self.alpha == [0.0; 3] && self.beta == [0.0; 3]
    }

    pub fn factorized(&self) -> bool {
        match self.route {
            Route::Factorized => true,
            Route::Standard => false,
            Route::Auto => self.ell == 0 && self.is_pilot(),
        }
    }

    pub fn potential(&self, eta: f64, x: f64) -> f64 {
        if self.is_pilot() {
            return pilot_potential(self.nu, self.ell, eta, x);
        }
        let n = self.nu as i32;
        let (a, b) = (self.alpha, self.beta);
        let w = eta - x.powi(n) / self.nu as f64;
        (1.0 + a[1] * x + b[1] * b[1] * x * x) * w * w
            - (2 * self.ell + 1) as f64 * (1.0 + a[2] * x) * x.powi(n - 1)
    }

    pub fn build(&self, eta: f64, grid: &Grid1D) -> Result<TridiagOperator> {
        if self.is_pilot() {
            build_pilot(self.nu, self.ell, eta, grid)
        } else {
            build_general(self.nu, self.ell, eta, self.alpha, self.beta, grid)
        }
    }
}

/// Solver settings shared by every `η`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TraceSettings {
    pub rtol: f64,
    pub policy: DomainPolicy,
}

impl Default for TraceSettings {
    fn default() -> Self {
        TraceSettings {
            rtol: 1e-13,
            policy: DomainPolicy::default(),
        }
    }
}

/// Eigenvalues at a single `η`.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchPoint {
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub grid: Grid1D,
    pub clamped: bool,
    /// Bound on `|∂λ/∂η|`, `2·max|η − x^ν/ν|` over the allowed region.
    pub lipschitz: f64,
}

/// Bidiagonal factor of the `l = 0` pilot operator on `grid`.
pub fn factor_bidiagonal(nu: u32, eta: f64, grid: &Grid1D) -> Bidiagonal {
    let dx = grid.spacing();
    let inv = 1.0 / dx;
    let w = |x: f64| eta - x.powi(nu as i32) / nu as f64;
    let n = grid.n;
    // row r lives at x_{r+1/2}, between interior nodes r−1 and r:
    // (Au)_r = −(u_r − u_{r−1})/Δ + m_r(u_r + u_{r−1}), with u_{−1} = u_n = 0
    let m: Vec<f64> = (0..=n)
        .map(|r| 0.5 * w(grid.x_min + (r as f64 + 0.5) * dx))
        .collect();
    Bidiagonal {
        above: (0..n).map(|c| -inv + m[c]).collect(),
        below: (0..n).map(|c| inv + m[c + 1]).collect(),
    }
}

/// `S(x) = ηx − x^{ν+1}/(ν(ν+1))`, so that `e^S` is annihilated by `−∂ + w`.
fn action(nu: u32, eta: f64, x: f64) -> f64 {
    let n = nu as f64;
    eta * x - x.powi(nu as i32 + 1) / (n * (n + 1.0))
}

/// Interval for the factorized route.
///
/// Small eigenvalues come from cutting the quasi-mode `e^S`. For even `ν` the
/// cut sits at the local minimum of `S` near `−γ`, which must stay inside; the
/// ends where `e^S` decays must go deep enough that truncating there costs
/// less than that cut. For odd `ν` both ends decay and are pushed until the
/// truncation is far below the underflow level.
fn factorized_extent(nu: u32, eta: f64, seeds: &[f64], grid: &Grid1D, pad: f64) -> (f64, f64) {
    let mut lo = seeds.iter().fold(grid.x_min, |m, s| m.min(s - pad));
    let mut hi = seeds.iter().fold(grid.x_max, |m, s| m.max(s + pad));
    let g = (nu as f64 * eta.abs()).powf(1.0 / nu as f64);
    let even = nu.is_multiple_of(2);
    let peak = if eta > 0.0 {
        g
    } else if eta < 0.0 && !even {
        -g
    } else if !even {
        0.0
    } else {
        return (lo, hi);
    };
    let s_max = action(nu, eta, peak);
    let floor = s_max - 360.0;
    let target = if even {
        action(nu, eta, -g).max(floor) - 30.0
    } else {
        floor
    };
    let reach = |from: f64, dir: f64| {
        let mut step = pad.max(1.0);
        let mut far = from;
        while action(nu, eta, far) > target {
            far += dir * step;
            step *= 1.5;
        }
        let (mut a, mut b) = (peak, far);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if action(nu, eta, m) > target {
                a = m;
            } else {
                b = m;
            }
        }
        b
    };
    hi = hi.max(reach(hi.max(peak), 1.0));
    if !even {
        lo = lo.min(reach(lo.min(peak), -1.0));
    }
    (lo, hi)
}

fn lipschitz_bound(spec: &BranchSpec, eta: f64, grid: &Grid1D, energy: f64) -> f64 {
    let n = spec.nu as i32;
    grid.points()
        .filter(|&x| spec.potential(eta, x) < energy)
        .map(|x| 2.0 * (eta - x.powi(n) / spec.nu as f64).abs())
        .fold(0.0, f64::max)
}

fn richardson_log(c: f64, f: f64) -> (f64, f64) {
    if c <= 0.0 || f <= 0.0 {
        return (f.max(0.0), f.abs().max(c.abs()));
    }
    let (lc, lf) = (c.ln(), f.ln());
    let v = (lf + (lf - lc) / 3.0).exp();
    (v, v * ((lf - lc).abs() / 3.0).exp_m1())
}

/// Lowest `k` eigenvalues at one `η`.
pub fn solve_point(
    spec: &BranchSpec,
    eta: f64,
    k: usize,
    settings: &TraceSettings,
) -> Result<BranchPoint> {
    let policy = settings.policy;
    let seeds = pilot_seeds(spec.nu, eta);
    let v = |x: f64| spec.potential(eta, x);
    let build = |g: &Grid1D| spec.build(eta, g);
    let auto = auto_grid(&v, &seeds, k, &policy, &build)?;
    let mut grid = auto.grid;
    let lipschitz = lipschitz_bound(spec, eta, &grid, auto.domain.energy);
    if !spec.factorized() {
        let r = refine_richardson(&build, k, &grid, &grid.refined(), settings.rtol)?;
        return Ok(BranchPoint {
            values: r.values,
            errors: r.error_estimates,
            grid,
            clamped: auto.domain.clamped,
            lipschitz,
        });
    }
    let (lo, hi) = factorized_extent(
        spec.nu,
        eta,
        &seeds,
        &grid,
        policy.pad_lengths * auto.domain.bottom.harmonic_length,
    );
    let dx = grid.spacing();
    let mut clamped = auto.domain.clamped;
    let mut n = ((hi - lo) / dx).ceil() as usize;
    if n > policy.max_points {
        n = policy.max_points;
        clamped = true;
    }
    grid = Grid1D::new(lo, hi, n)?;
    let fine = grid.refined();
    let sc = smallest_singular_values(&factor_bidiagonal(spec.nu, eta, &grid), k, settings.rtol)?;
    let sf = smallest_singular_values(&factor_bidiagonal(spec.nu, eta, &fine), k, settings.rtol)?;
    let mut values = Vec::with_capacity(k);
    let mut errors = Vec::with_capacity(k);
    for j in 0..k {
        let (c, f) = (sc[j] * sc[j], sf[j] * sf[j]);
        let scale = auto.domain.bottom.harmonic_length.powi(-2);
        let (val, err) = if f < 1e-3 * scale {
            richardson_log(c, f)
        } else {
            let d = f - c;
            (f + d / 3.0, d.abs() / 3.0)
        };
        values.push(val);
        errors.push(err + 4.0 * settings.rtol * val.abs());
    }
    Ok(BranchPoint {
        values,
        errors,
        grid,
        clamped,
        lipschitz,
    })
}

/// Branches `λ₀ … λ_{k−1}` over an `η` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenBranch {
    pub spec: BranchSpec,
    pub settings: TraceSettings,
    pub eta_grid: Vec<f64>,
    /// `values[n][i]` is `λ_n(η_i)`.
    pub values: Vec<Vec<f64>>,
    pub error_estimates: Vec<Vec<f64>>,
    pub grids: Vec<Grid1D>,
    pub lipschitz: Vec<f64>,
    pub clamped: Vec<bool>,
}

impl EigenBranch {
    pub fn n_branches(&self) -> usize {
        self.values.len()
    }

    pub fn branch(&self, n: usize) -> &[f64] {
        &self.values[n]
    }

    /// Pairs `(n, i)` where `|λ_n(η_{i+1}) − λ_n(η_i)|` exceeds the Lipschitz bound.
    pub fn continuity_violations(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (n, row) in self.values.iter().enumerate() {
            for i in 0..row.len().saturating_sub(1) {
                let l = self.lipschitz[i].max(self.lipschitz[i + 1]);
                let slack = self.error_estimates[n][i] + self.error_estimates[n][i + 1];
                let step = (self.eta_grid[i + 1] - self.eta_grid[i]).abs();
                if (row[i + 1] - row[i]).abs() > l * step * 1.05 + slack {
                    out.push((n, i));
                }
            }
        }
        out
    }
}

pub fn trace_branches(
    spec: &BranchSpec,
    eta_grid: &[f64],
    n_branches: usize,
    settings: &TraceSettings,
) -> Result<EigenBranch> {
    if n_branches == 0 {
        return Err(Error::InvalidParameter(
            "n_branches must be positive".into(),
        ));
    }
    if eta_grid.is_empty() || eta_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter(
            "eta grid must be strictly increasing".into(),
        ));
    }
    let points: Vec<Result<BranchPoint>> = eta_grid
        .par_iter()
        .map(|&eta| solve_point(spec, eta, n_branches, settings).map_err(|e| e.at_eta(eta)))
        .collect();
    let mut values = vec![Vec::with_capacity(eta_grid.len()); n_branches];
    let mut errors = vec![Vec::with_capacity(eta_grid.len()); n_branches];
    let mut grids = Vec::with_capacity(eta_grid.len());
    let mut lipschitz = Vec::with_capacity(eta_grid.len());
    let mut clamped = Vec::with_capacity(eta_grid.len());
    for p in points {
        let p = p?;
        for n in 0..n_branches {
            values[n].push(p.values[n]);
            errors[n].push(p.errors[n]);
        }
        grids.push(p.grid);
        lipschitz.push(p.lipschitz);
        clamped.push(p.clamped);
    }
    Ok(EigenBranch {
        spec: *spec,
        settings: *settings,
        eta_grid: eta_grid.to_vec(),
        values,
        error_estimates: errors,
        grids,
        lipschitz,
        clamped,
    })
}

/// `n` points uniformly spaced on `[a, b]`.
pub fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

/// `n` points log-uniformly spaced on `[a, b]`, `0 < a < b`.
pub fn geometric_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolve::eigen_lowest_k;

    #[test]
    fn factorization_matches_standard_discretization() {
        // BᵀB and the three-point operator agree to O(Δ²)
        let g = Grid1D::new(-8.0, 8.0, 1599).unwrap();
        let std = eigen_lowest_k(&build_pilot(2, 0, 1.0, &g).unwrap(), 3, 1e-13).unwrap();
        let s = smallest_singular_values(&factor_bidiagonal(2, 1.0, &g), 3, 1e-13).unwrap();
        for j in 0..3 {
            assert!((s[j] * s[j] - std.values[j]).abs() < 1e-3, "{j}");
        }
    }

    #[test]
    fn odd_nu_ground_state_vanishes() {
        let spec = BranchSpec::pilot(3, 0);
        let p = solve_point(&spec, 5.0, 2, &TraceSettings::default()).unwrap();
        assert!(p.values[0].abs() < 1e-20, "{}", p.values[0]);
        assert!(p.values[1] > 1.0);
    }

    #[test]
    fn harmonic_levels_at_moderate_eta() {
        let spec = BranchSpec::pilot(2, 1);
        let eta = 50.0;
        let p = solve_point(&spec, eta, 3, &TraceSettings::default()).unwrap();
        let omega = (2.0 * eta as f64).sqrt();
        assert!((p.values[0] + 2.0 * omega).abs() < 1.0);
        assert!(p.values[1] > 0.0 && p.values[1] < 0.1);
        assert!((p.values[2] - 2.0 * omega).abs() < 1.0);
    }

    #[test]
    fn trace_is_ordered_and_deterministic() {
        let spec = BranchSpec::pilot(3, 1);
        let grid = uniform_grid(-2.0, 2.0, 9);
        let a = trace_branches(&spec, &grid, 3, &TraceSettings::default()).unwrap();
        let b = trace_branches(&spec, &grid, 3, &TraceSettings::default()).unwrap();
        assert_eq!(a, b);
        for i in 0..grid.len() {
            assert!(a.values[0][i] < a.values[1][i] && a.values[1][i] < a.values[2][i]);
        }
        assert!(a.continuity_violations().is_empty());
    }
}
