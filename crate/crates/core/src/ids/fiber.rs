use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cutoff::{Cutoff, CutoffSpec};
use super::quadrature::{composite_nodes, integrate_adaptive, pairwise_sum};
use crate::branches::{solve_point, BranchSpec, TraceSettings};
use crate::eigensolve::{eigen_lowest_k, eigenvector_with, sturm_count};
use crate::error::{Error, Result};
use crate::operators::{
    build_fiber_in_box, rescale_to_unit, Grid1D, ModelParams, OperatorMeta, ScalingMap, ScalingTag,
    TridiagOperator,
};

/// Fixed Dirichlet interval in `x₁`, optionally with the `x₂` derivative
/// replaced by its centered-difference symbol on spacing `dx2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberBox {
    pub x1: (f64, f64),
    pub n1: usize,
    #[serde(default)]
    pub dx2: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FiberMode {
    /// Whole line in `x₁`, through the exact scaling to the pilot operator.
    #[default]
    Free,
    Box(FiberBox),
}

/// Eigenvector weight in the band integrand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weight {
    /// Unit-norm eigenvectors counted with mass 1.
    Unit,
    /// `∫|vₙ|²ψ₁`.
    Cutoff(Cutoff),
}

#[derive(Debug, Clone)]
struct Entry {
    values: Vec<f64>,
    grid: Grid1D,
}

/// Fiber eigenvalues `λₙ(ξ₂)` without the `−½W(x₂)` shift, cached over `ξ₂`.
#[derive(Debug)]
pub struct FiberBands {
    params: ModelParams,
    mode: FiberMode,
    settings: TraceSettings,
    map: ScalingMap,
    spec: BranchSpec,
    cache: Mutex<HashMap<u64, Entry>>,
}

/// Integral over `ξ₂` of the weighted level count below one threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelIntegral {
    pub value: f64,
    pub error: f64,
    pub window: (f64, f64),
    pub breakpoints: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IdsOptions {
    pub mode: FiberMode,
    pub settings: TraceSettings,
    /// Uniform scan points used to detect level crossings of the threshold.
    pub scan_points: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_cells: usize,
    pub x2_panels: usize,
    pub x2_order: usize,
    /// Weyl cut radius in units of `(μh)^{−1/(ν−1)}`.
    pub cut_constant: f64,
}

impl Default for IdsOptions {
    fn default() -> Self {
        IdsOptions {
            mode: FiberMode::Free,
            settings: TraceSettings::default(),
            scan_points: 256,
            abs_tol: 1e-8,
            rel_tol: 1e-8,
            max_cells: 2000,
            x2_panels: 2,
            x2_order: 8,
            cut_constant: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberIds {
    pub value: f64,
    pub error: f64,
    pub window: (f64, f64),
    pub breakpoints: usize,
}

const MAX_LEVELS: usize = 1024;

impl FiberBands {
    pub fn new(params: ModelParams, mode: FiberMode, settings: TraceSettings) -> Result<Self> {
        params.validate()?;
        match mode {
            FiberMode::Free => {
                if !params.is_model() {
                    return Err(Error::InvalidParameter(
                        "whole-line fibers need sigma = phi = 1; use a box".into(),
                    ));
                }
            }
            FiberMode::Box(b) => {
                Grid1D::new(b.x1.0, b.x1.1, b.n1)?;
                if let Some(d) = b.dx2 {
                    if !(d > 0.0 && d.is_finite()) {
                        return Err(Error::InvalidParameter(format!("dx2 = {d} must be > 0")));
                    }
                    if !params.is_model() {
                        return Err(Error::InvalidParameter(
                            "lattice fibers need sigma = phi = 1".into(),
                        ));
                    }
                }
            }
        }
        let map = rescale_to_unit(&params, 0.0)?;
        let spec = BranchSpec::pilot(params.nu, params.ell);
        Ok(FiberBands {
            params,
            mode,
            settings,
            map,
            spec,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn mode(&self) -> FiberMode {
        self.mode
    }

    pub fn scaling(&self) -> ScalingMap {
        self.map
    }

    fn box_operator(&self, b: &FiberBox, xi: f64) -> Result<TridiagOperator> {
        let grid = Grid1D::new(b.x1.0, b.x1.1, b.n1)?;
        let p = &self.params;
        match b.dx2 {
            None => {
                let w = p.w.eval(0.0);
                Ok(build_fiber_in_box(p, 0.0, xi, &grid)?.shifted(0.5 * w))
            }
            Some(d) => {
                let (mu, h) = (p.mu, p.h);
                let th = xi * d / h;
                let lf = (2 * p.ell + 1) as f64;
                let kin = h * h * (2.0 - 2.0 * th.cos()) / (d * d);
                let drift = 2.0 * mu * h * th.sin() / d;
                let sym = |x: f64| {
                    let v = p.vector_potential(x);
                    kin - drift * v + mu * mu * v * v - lf * mu * h * p.field(x)
                };
                let meta = OperatorMeta {
                    eta: xi,
                    nu: p.nu,
                    ell: p.ell,
                    tag: ScalingTag::Fiber,
                };
                Ok(TridiagOperator::from_potential(grid, h * h, sym, meta)?.scaled(0.5))
            }
        }
    }

    fn free_entry(&self, xi: f64, k: usize) -> Result<Entry> {
        let key = xi.to_bits();
        if let Some(e) = self.cache.lock().expect("cache lock").get(&key) {
            if e.values.len() >= k {
                return Ok(e.clone());
            }
        }
        let eta = self.map.unit_eta(xi);
        let pt = solve_point(&self.spec, eta, k, &self.settings).map_err(|e| e.at_eta(eta))?;
        let half = 0.5 * self.map.energy_factor;
        let entry = Entry {
            values: pt.values.iter().map(|v| half * v).collect(),
            grid: pt.grid,
        };
        let mut cache = self.cache.lock().expect("cache lock");
        let keep = cache
            .get(&key)
            .is_some_and(|e| e.values.len() >= entry.values.len());
        if !keep {
            cache.insert(key, entry.clone());
        }
        Ok(entry)
    }

    /// Lowest `k` values of `λₙ(ξ₂)`.
    pub fn lowest(&self, xi: f64, k: usize) -> Result<Vec<f64>> {
        match &self.mode {
            FiberMode::Free => {
                let e = self.free_entry(xi, k)?;
                Ok(e.values[..k].to_vec())
            }
            FiberMode::Box(b) => {
                let op = self.box_operator(b, xi)?;
                Ok(eigen_lowest_k(&op, k, self.settings.rtol)?.values)
            }
        }
    }

    /// `Λₙ(x₂, ξ₂) = λₙ(ξ₂) − ½W(x₂)`.
    pub fn band(&self, x2: f64, xi: f64, n: usize) -> Result<f64> {
        Ok(self.lowest(xi, n + 1)?[n] - 0.5 * self.params.w.eval(x2))
    }

    /// Number of `λₙ(ξ₂)` below `t`.
    pub fn count_below(&self, xi: f64, t: f64) -> Result<usize> {
        match &self.mode {
            FiberMode::Box(b) => {
                let op = self.box_operator(b, xi)?;
                Ok(sturm_count(&op.diag, &op.offdiag, t))
            }
            FiberMode::Free => {
                let mut k = 2;
                loop {
                    let v = self.lowest(xi, k)?;
                    if v[k - 1] >= t {
                        return Ok(v.iter().filter(|&&x| x < t).count());
                    }
                    if k >= MAX_LEVELS {
                        return Err(Error::Dimension {
                            requested: 2 * k,
                            available: MAX_LEVELS,
                        });
                    }
                    k *= 2;
                }
            }
        }
    }

    /// `∫|vₙ|²ψ₁ dx₁` for the lowest `count` unit eigenvectors.
    pub fn weights(&self, xi: f64, count: usize, psi1: &Cutoff) -> Result<Vec<f64>> {
        if count == 0 {
            return Ok(Vec::new());
        }
        let (op, scale) = match &self.mode {
            FiberMode::Free => {
                let e = self.free_entry(xi, count)?;
                let eta = self.map.unit_eta(xi);
                (self.spec.build(eta, &e.grid)?, self.map.x_factor)
            }
            FiberMode::Box(b) => (self.box_operator(b, xi)?, 1.0),
        };
        let ev = eigen_lowest_k(&op, count, 1e-12)?;
        let mut vecs: Vec<Vec<f64>> = Vec::with_capacity(count);
        let mut out = Vec::with_capacity(count);
        for &lambda in &ev.values {
            let against: Vec<&[f64]> = vecs.iter().map(|v| v.as_slice()).collect();
            let (v, _) = eigenvector_with(&op, lambda, 1e-12, &against)?;
            let m: f64 = op
                .grid
                .points()
                .zip(v.iter())
                .map(|(x, c)| c * c * psi1.eval(scale * x))
                .sum();
            out.push(m);
            vecs.push(v);
        }
        Ok(out)
    }

    fn integrand(&self, xi: f64, t: f64, weight: &Weight) -> Result<f64> {
        let c = self.count_below(xi, t)?;
        match weight {
            Weight::Unit => Ok(c as f64),
            Weight::Cutoff(p) => Ok(pairwise_sum(&self.weights(xi, c, p)?)),
        }
    }

    /// `ξ₂` interval outside of which the integrand is negligible.
    pub fn window(&self, t: f64, weight: &Weight) -> Result<(f64, f64)> {
        let p = &self.params;
        match &self.mode {
            FiberMode::Box(b) => {
                if let Some(d) = b.dx2 {
                    let z = PI * p.h / d;
                    return Ok((-z, z));
                }
                let grid = Grid1D::new(b.x1.0, b.x1.1, b.n1)?;
                let (mut vmax, mut fmax) = (0.0f64, 0.0f64);
                for x in grid.points() {
                    vmax = vmax.max(p.vector_potential(x).abs() * p.sigma.eval(x).abs());
                    fmax = fmax.max(p.field(x).abs());
                }
                let lf = (2 * p.ell + 1) as f64;
                let z = p.mu * vmax + (2.0 * t + lf * p.mu * p.h * fmax).max(0.0).sqrt();
                let z = z * (1.0 + 1e-9) + 1e-12;
                Ok((-z, z))
            }
            FiberMode::Free => {
                let psi1 = match weight {
                    Weight::Cutoff(c) => *c,
                    Weight::Unit => {
                        return Err(Error::Domain(
                            "unit weights on the whole line need an explicit window".into(),
                        ))
                    }
                };
                let (a, b) = psi1.support();
                let r = a.abs().max(b.abs());
                let nu = p.nu as f64;
                let unit = self.map.eta_factor;
                let mut ends = [0.0; 2];
                for (slot, s) in [(0usize, -1.0f64), (1, 1.0)] {
                    let wells = p.nu % 2 == 1 || s > 0.0;
                    let mut z;
                    if wells {
                        let ell = (p.h / (p.mu * r.powf(nu - 1.0))).sqrt();
                        z = (p.mu * (r + 8.0 * ell).powf(nu) / nu).max(unit);
                        let mut tries = 0;
                        while self.integrand(s * z, t, weight)? > 1e-13 {
                            z *= 1.25;
                            tries += 1;
                            if tries > 60 {
                                return Err(Error::Domain(format!(
                                    "band integrand does not decay up to xi2 = {}",
                                    s * z
                                )));
                            }
                        }
                    } else {
                        z = unit;
                        let mut tries = 0;
                        while self.count_below(s * z, t)? > 0 {
                            z *= 2.0;
                            tries += 1;
                            if tries > 60 {
                                return Err(Error::Domain(
                                    "levels below threshold for all xi2 < 0".into(),
                                ));
                            }
                        }
                    }
                    ends[slot] = s * z;
                }
                Ok((ends[0], ends[1]))
            }
        }
    }

    fn find_breaks(
        &self,
        lo: f64,
        c_lo: usize,
        hi: f64,
        c_hi: usize,
        t: f64,
        tol: f64,
        out: &mut Vec<(f64, usize)>,
    ) -> Result<()> {
        if c_lo == c_hi {
            return Ok(());
        }
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || !(mid > lo && mid < hi) {
            out.push((mid, c_lo.abs_diff(c_hi)));
            return Ok(());
        }
        let c_mid = self.count_below(mid, t)?;
        self.find_breaks(lo, c_lo, mid, c_mid, t, tol, out)?;
        self.find_breaks(mid, c_mid, hi, c_hi, t, tol, out)
    }

    /// `∫_window Σₙ 1{λₙ(ξ₂) < t}·weightₙ dξ₂` with every detected change of the
    /// level count used as a quadrature breakpoint.
    pub fn level_integral(
        &self,
        t: f64,
        window: (f64, f64),
        weight: &Weight,
        opts: &IdsOptions,
    ) -> Result<LevelIntegral> {
        let (a, b) = window;
        if !(a < b) {
            return Err(Error::InvalidParameter(format!("empty window [{a}, {b}]")));
        }
        let m = opts.scan_points.max(2);
        let xs: Vec<f64> = (0..=m).map(|i| a + (b - a) * i as f64 / m as f64).collect();
        let counts: Vec<usize> = xs
            .par_iter()
            .map(|&x| self.count_below(x, t))
            .collect::<Result<_>>()?;
        let tol = 1e-12 * (b - a);
        let found: Vec<Vec<(f64, usize)>> = (0..m)
            .into_par_iter()
            .map(|i| {
                let mut v = Vec::new();
                self.find_breaks(xs[i], counts[i], xs[i + 1], counts[i + 1], t, tol, &mut v)?;
                Ok(v)
            })
            .collect::<Result<_>>()?;
        let found: Vec<(f64, usize)> = found.into_iter().flatten().collect();
        let break_error: f64 = found.iter().map(|(_, j)| tol * *j as f64).sum();
        let mut pts: Vec<f64> = found.iter().map(|(x, _)| *x).collect();
        let breakpoints = pts.clone();
        pts.insert(0, a);
        pts.push(b);
        let total = b - a;
        let parts: Vec<(f64, f64)> = pts
            .par_windows(2)
            .map(|w| {
                let (lo, hi) = (w[0], w[1]);
                if hi <= lo {
                    return Ok((0.0, 0.0));
                }
                match weight {
                    Weight::Unit => {
                        let c = self.count_below(0.5 * (lo + hi), t)?;
                        Ok(((hi - lo) * c as f64, 0.0))
                    }
                    Weight::Cutoff(_) => {
                        let f = |x: f64| self.integrand(x, t, weight);
                        let share = (hi - lo) / total;
                        let r = integrate_adaptive(
                            &f,
                            lo,
                            hi,
                            &[],
                            opts.abs_tol * share,
                            opts.rel_tol,
                            opts.max_cells,
                        )?;
                        Ok((r.value, r.error))
                    }
                }
            })
            .collect::<Result<_>>()?;
        let value = pairwise_sum(&parts.iter().map(|p| p.0).collect::<Vec<_>>());
        let error = pairwise_sum(&parts.iter().map(|p| p.1).collect::<Vec<_>>()) + break_error;
        Ok(LevelIntegral {
            value,
            error,
            window,
            breakpoints,
        })
    }

    fn weight_for(&self, psi1: &Cutoff) -> Weight {
        match &self.mode {
            FiberMode::Box(b) if psi1.covers(b.x1.0, b.x1.1) => Weight::Unit,
            _ => Weight::Cutoff(*psi1),
        }
    }

    /// `(2πh)⁻¹ ∫∫ Σₙ 1{Λₙ < τ}·∫|vₙ|²ψ₁ dx₁ · ψ₂(x₂) dξ₂ dx₂`.
    pub fn fiber_ids(&self, psi: &CutoffSpec, tau: f64, opts: &IdsOptions) -> Result<FiberIds> {
        psi.validate()?;
        let p = &self.params;
        let weight = self.weight_for(&psi.psi1);
        let (lo, hi) = psi.psi2.support();
        let (_, wmax) = p.w.range_on(lo, hi);
        let window = self.window(tau + 0.5 * wmax, &weight)?;
        let pre = 1.0 / (2.0 * PI * p.h);
        if p.w.is_constant() {
            let r = self.level_integral(tau + 0.5 * p.w.eval(lo), window, &weight, opts)?;
            let m = psi.psi2.integral();
            return Ok(FiberIds {
                value: pre * m * r.value,
                error: pre * m * r.error,
                window,
                breakpoints: r.breakpoints.len(),
            });
        }
        let knots = psi.psi2.knots();
        let panels = opts.x2_panels.max(1);
        let coarse = composite_nodes(&knots, panels, opts.x2_order)?;
        let fine = composite_nodes(&knots, 2 * panels, opts.x2_order)?;
        let eval = |nodes: &[(f64, f64)]| -> Result<(f64, f64, usize)> {
            let rows: Vec<(f64, f64, usize)> = nodes
                .par_iter()
                .map(|&(x, w)| {
                    let s = psi.psi2.eval(x);
                    if s == 0.0 {
                        return Ok((0.0, 0.0, 0));
                    }
                    let r = self.level_integral(tau + 0.5 * p.w.eval(x), window, &weight, opts)?;
                    Ok((w * s * r.value, w * s * r.error, r.breakpoints.len()))
                })
                .collect::<Result<_>>()?;
            Ok((
                pairwise_sum(&rows.iter().map(|r| r.0).collect::<Vec<_>>()),
                pairwise_sum(&rows.iter().map(|r| r.1).collect::<Vec<_>>()),
                rows.iter().map(|r| r.2).sum(),
            ))
        };
        let (vc, _, _) = eval(&coarse)?;
        let (vf, ef, nb) = eval(&fine)?;
        Ok(FiberIds {
            value: pre * vf,
            error: pre * (ef + (vf - vc).abs()),
            window,
            breakpoints: nb,
        })
    }
}

/// `Λₙ(x₂, ξ₂)` of the whole-line fiber.
pub fn band_function(params: &ModelParams, x2: f64, xi2: f64, n: usize) -> Result<f64> {
    FiberBands::new(params.clone(), FiberMode::Free, TraceSettings::default())?.band(x2, xi2, n)
}

pub fn fiber_ids(
    params: &ModelParams,
    psi: &CutoffSpec,
    tau: f64,
    opts: &IdsOptions,
) -> Result<FiberIds> {
    FiberBands::new(params.clone(), opts.mode, opts.settings)?.fiber_ids(psi, tau, opts)
}

/// Smallest value of `|Λₙ| + (|ξ₂|+1)|∂_{ξ₂}Λₙ| + |∂_{x₂}Λₙ|` over a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NondegeneracyReport {
    pub epsilon0: f64,
    pub x2: f64,
    pub xi2: f64,
    pub branch: usize,
}

pub fn check_nondegeneracy(
    bands: &FiberBands,
    x2_grid: &[f64],
    xi2_grid: &[f64],
    branches: usize,
) -> Result<NondegeneracyReport> {
    let w = &bands.params.w;
    let unit = bands.map.eta_factor;
    let rows: Vec<NondegeneracyReport> = xi2_grid
        .par_iter()
        .map(|&xi| {
            let d = 1e-4 * unit * (1.0 + (xi / unit).abs());
            let c = bands.lowest(xi, branches)?;
            let up = bands.lowest(xi + d, branches)?;
            let dn = bands.lowest(xi - d, branches)?;
            let mut best = NondegeneracyReport {
                epsilon0: f64::INFINITY,
                x2: f64::NAN,
                xi2: xi,
                branch: 0,
            };
            for &x2 in x2_grid {
                let dx = 1e-5 * (1.0 + x2.abs());
                let dw = -0.5 * (w.eval(x2 + dx) - w.eval(x2 - dx)) / (2.0 * dx);
                let shift = 0.5 * w.eval(x2);
                for n in 0..branches {
                    let lam = c[n] - shift;
                    let dxi = (up[n] - dn[n]) / (2.0 * d);
                    let v = lam.abs() + (xi.abs() + 1.0) * dxi.abs() + dw.abs();
                    if v < best.epsilon0 {
                        best = NondegeneracyReport {
                            epsilon0: v,
                            x2,
                            xi2: xi,
                            branch: n,
                        };
                    }
                }
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;
    rows.into_iter()
        .min_by(|a, b| a.epsilon0.total_cmp(&b.epsilon0))
        .ok_or_else(|| Error::InvalidParameter("empty grid".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::Potential;
    use nalgebra::DMatrix;

    fn params(w: Potential) -> ModelParams {
        ModelParams::model(2, 1, 10.0, 0.1, w)
    }

    // Dense Dirichlet discretization of ½[−h²∂² + (ξ − μx^ν/ν)² − (2l+1)μh x^{ν−1}].
    fn dense_levels(p: &ModelParams, xi: f64, half: f64, n: usize, k: usize) -> Vec<f64> {
        let dx = 2.0 * half / (n + 1) as f64;
        let nu = p.nu as f64;
        let lf = (2 * p.ell + 1) as f64;
        let mut a = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            let x = -half + (i + 1) as f64 * dx;
            let v = xi - p.mu * x.powi(p.nu as i32) / nu;
            a[(i, i)] = 0.5
                * (2.0 * p.h * p.h / (dx * dx) + v * v - lf * p.mu * p.h * x.powi(p.nu as i32 - 1));
            if i + 1 < n {
                a[(i, i + 1)] = -0.5 * p.h * p.h / (dx * dx);
                a[(i + 1, i)] = a[(i, i + 1)];
            }
        }
        let mut ev: Vec<f64> = a.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev.truncate(k);
        ev
    }

    fn oracle_levels(p: &ModelParams, xi: f64, k: usize) -> Vec<f64> {
        // spacing halves across the three grids; two Romberg steps
        let g: Vec<Vec<f64>> = [250, 501, 1003]
            .iter()
            .map(|&n| dense_levels(p, xi, 2.5, n, k))
            .collect();
        (0..k)
            .map(|i| {
                let r1 = (4.0 * g[1][i] - g[0][i]) / 3.0;
                let r2 = (4.0 * g[2][i] - g[1][i]) / 3.0;
                (16.0 * r2 - r1) / 15.0
            })
            .collect()
    }

    #[test]
    fn free_bands_match_dense_oracle() {
        let p = params(Potential::constant(0.0));
        let bands = FiberBands::new(p.clone(), FiberMode::Free, TraceSettings::default()).unwrap();
        for xi in [-0.5, 0.0, 0.5, 1.0] {
            let got = bands.lowest(xi, 4).unwrap();
            let want = oracle_levels(&p, xi, 4);
            for (g, w) in got.iter().zip(&want) {
                assert!(
                    (g - w).abs() < 1e-7 * (1.0 + w.abs()),
                    "xi {xi}: {g} vs {w}"
                );
            }
        }
    }

    #[test]
    fn box_bands_match_dense_oracle() {
        let p = params(Potential::constant(0.0));
        let mode = FiberMode::Box(FiberBox {
            x1: (-2.5, 2.5),
            n1: 1001,
            dx2: None,
        });
        let bands = FiberBands::new(p.clone(), mode, TraceSettings::default()).unwrap();
        for xi in [-0.5, 1.0] {
            let got = bands.lowest(xi, 3).unwrap();
            let want = dense_levels(&p, xi, 2.5, 1001, 3);
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-9 * (1.0 + w.abs()), "{g} vs {w}");
            }
        }
    }

    #[test]
    fn lattice_symbol_tends_to_continuum() {
        let p = params(Potential::constant(0.0));
        let lat = |d: f64| {
            let mode = FiberMode::Box(FiberBox {
                x1: (-2.5, 2.5),
                n1: 400,
                dx2: Some(d),
            });
            FiberBands::new(p.clone(), mode, TraceSettings::default())
                .unwrap()
                .lowest(0.7, 3)
                .unwrap()
        };
        let cont = FiberBands::new(
            p.clone(),
            FiberMode::Box(FiberBox {
                x1: (-2.5, 2.5),
                n1: 400,
                dx2: None,
            }),
            TraceSettings::default(),
        )
        .unwrap()
        .lowest(0.7, 3)
        .unwrap();
        let e1: f64 = lat(1e-2)
            .iter()
            .zip(&cont)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let e2: f64 = lat(5e-3)
            .iter()
            .zip(&cont)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(e2 < e1 / 3.0 && e2 < 1e-2, "{e1} {e2}");
    }

    #[test]
    fn constant_potential_shifts_bands() {
        let b0 = FiberBands::new(
            params(Potential::constant(0.0)),
            FiberMode::Free,
            TraceSettings::default(),
        )
        .unwrap();
        let b1 = FiberBands::new(
            params(Potential::constant(1.5)),
            FiberMode::Free,
            TraceSettings::default(),
        )
        .unwrap();
        for n in 0..3 {
            let d = b1.band(0.3, 0.4, n).unwrap() - b0.band(0.3, 0.4, n).unwrap();
            assert!((d + 0.75).abs() < 1e-12, "{d}");
        }
    }

    #[test]
    fn large_xi_sign_structure() {
        let p = params(Potential::constant(0.0));
        let bands = FiberBands::new(p, FiberMode::Free, TraceSettings::default()).unwrap();
        let s = bands.scaling();
        let v = bands.lowest(30.0 * s.eta_factor, 4).unwrap();
        assert!(v[0] < 0.0);
        assert!(v[2] > 0.0 && v[3] > 0.0);
        assert!(v[1].abs() < v[0].abs() && v[1].abs() < v[2]);
    }

    fn box_opts() -> IdsOptions {
        IdsOptions {
            mode: FiberMode::Box(FiberBox {
                x1: (-1.0, 1.0),
                n1: 120,
                dx2: None,
            }),
            ..IdsOptions::default()
        }
    }

    #[test]
    fn empty_spectral_set_gives_zero() {
        let p = params(Potential::constant(1.0));
        let psi = CutoffSpec::rectangle((-1.0, 1.0), (0.0, 1.0)).unwrap();
        let r = fiber_ids(&p, &psi, -50.0, &box_opts()).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn box_ids_matches_riemann_count_and_is_monotone() {
        let p = params(Potential::constant(1.0));
        let psi = CutoffSpec::rectangle((-1.0, 1.0), (0.0, 1.0)).unwrap();
        let opts = box_opts();
        let bands = FiberBands::new(p.clone(), opts.mode, opts.settings).unwrap();
        let mut prev = 0.0;
        for tau in [0.0, 0.5, 1.0] {
            let got = bands.fiber_ids(&psi, tau, &opts).unwrap();
            assert!(got.value >= prev);
            prev = got.value;
            let (a, b) = got.window;
            let m = 4000;
            let d = (b - a) / m as f64;
            let sum: usize = (0..m)
                .map(|i| {
                    bands
                        .count_below(a + (i as f64 + 0.5) * d, tau + 0.5)
                        .unwrap()
                })
                .sum();
            let riemann = sum as f64 * d / (2.0 * PI * p.h);
            // each level edge contributes at most d/2 per crossing
            let slack = 8.0 * d / (2.0 * PI * p.h);
            assert!(
                (got.value - riemann).abs() < slack,
                "tau {tau}: {} vs {riemann}",
                got.value
            );
        }
        assert!(prev > 0.0);
    }

    #[test]
    fn nondegeneracy_sees_potential_slope() {
        let slope = 0.8;
        let p = params(Potential::Affine { offset: 0.0, slope });
        let bands = FiberBands::new(p, FiberMode::Free, TraceSettings::default()).unwrap();
        let xs: Vec<f64> = (0..5).map(|i| 0.2 * i as f64).collect();
        let xis: Vec<f64> = (0..9).map(|i| -0.4 + 0.2 * i as f64).collect();
        let r = check_nondegeneracy(&bands, &xs, &xis, 3).unwrap();
        assert!(r.epsilon0 >= 0.5 * slope - 1e-6, "{r:?}");
        assert!(r.epsilon0.is_finite() && r.branch < 3);
    }
}
