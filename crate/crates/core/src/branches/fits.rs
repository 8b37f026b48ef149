use serde::Serialize;

use super::trace::EigenBranch;
use crate::error::{Error, Result};
use crate::stats::linear_fit;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub coefficient: f64,
    pub exponent: f64,
    pub window: (f64, f64),
    pub max_relative_residual: f64,
    pub samples: usize,
}

fn window_indices(eta: &[f64], window: (f64, f64)) -> Vec<usize> {
    (0..eta.len())
        .filter(|&i| eta[i] >= window.0 && eta[i] <= window.1)
        .collect()
}

fn power_fit(x: &[f64], y: &[f64], window: (f64, f64)) -> Result<PowerLawFit> {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let f = linear_fit(&lx, &ly)?;
    let coefficient = f.intercept.exp();
    let max_relative_residual = x
        .iter()
        .zip(y)
        .map(|(a, b)| (coefficient * a.powf(f.slope) / b - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(PowerLawFit {
        coefficient,
        exponent: f.slope,
        window,
        max_relative_residual,
        samples: x.len(),
    })
}

/// Least-squares fit `λ_n ≈ c η^p` over the samples inside `window`.
pub fn fit_power_law(branch: &EigenBranch, n: usize, window: (f64, f64)) -> Result<PowerLawFit> {
    if n >= branch.n_branches() {
        return Err(Error::Dimension {
            requested: n + 1,
            available: branch.n_branches(),
        });
    }
    let idx = window_indices(&branch.eta_grid, window);
    if idx.len() < 2 {
        return Err(Error::Domain(format!(
            "fewer than two samples in {window:?}"
        )));
    }
    let x: Vec<f64> = idx.iter().map(|&i| branch.eta_grid[i]).collect();
    let y: Vec<f64> = idx.iter().map(|&i| branch.values[n][i]).collect();
    if let Some(k) = x.iter().zip(&y).position(|(a, b)| *a <= 0.0 || *b <= 0.0) {
        return Err(Error::Domain(format!(
            "non-positive sample at eta = {}: lambda = {:e}",
            x[k], y[k]
        )));
    }
    power_fit(&x, &y, window)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    /// `−log Λ ≈ k₂ η^p`: `coefficient = k₂`, `exponent = p`.
    pub fit: PowerLawFit,
    /// Extremes of `−∂_η log Λ / η^{1/ν}` from central differences.
    pub derivative_lower: f64,
    pub derivative_upper: f64,
    pub monotone: bool,
    /// Samples dropped because `Λ` was not representable.
    pub dropped: usize,
}

/// Smallest value kept by the representability filter.
pub const DECAY_FLOOR: f64 = 1e-300;

/// Fit of the lowest branch to `Λ ≈ exp(−k₂η^p)`.
pub fn fit_exponential_decay(branch: &EigenBranch, window: (f64, f64)) -> Result<DecayFit> {
    let nu = branch.spec.nu as f64;
    let idx: Vec<usize> = window_indices(&branch.eta_grid, window);
    let keep: Vec<usize> = idx
        .iter()
        .copied()
        .filter(|&i| branch.values[0][i] > DECAY_FLOOR && branch.values[0][i] < 1.0)
        .collect();
    let dropped = idx.len() - keep.len();
    if keep.len() < 3 {
        return Err(Error::Domain(format!(
            "{} representable samples in {window:?}; the branch is not exponentially small there",
            keep.len()
        )));
    }
    let x: Vec<f64> = keep.iter().map(|&i| branch.eta_grid[i]).collect();
    let logs: Vec<f64> = keep.iter().map(|&i| branch.values[0][i].ln()).collect();
    let neg: Vec<f64> = logs.iter().map(|v| -v).collect();
    let fit = power_fit(&x, &neg, window)?;
    let monotone = logs.windows(2).all(|w| w[1] < w[0]);
    let mut lower = f64::INFINITY;
    let mut upper: f64 = 0.0;
    for j in 1..x.len() - 1 {
        let d = -(logs[j + 1] - logs[j - 1]) / (x[j + 1] - x[j - 1]);
        let r = d / x[j].powf(1.0 / nu);
        lower = lower.min(r);
        upper = upper.max(r);
    }
    Ok(DecayFit {
        fit,
        derivative_lower: lower,
        derivative_upper: upper,
        monotone,
        dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branches::{
        geometric_grid, trace_branches, uniform_grid, BranchSpec, TraceSettings,
    };

    #[test]
    fn kappa_nu2_l1() {
        let spec = BranchSpec::pilot(2, 1);
        let b = trace_branches(
            &spec,
            &geometric_grid(1e2, 1e3, 5),
            2,
            &TraceSettings::default(),
        )
        .unwrap();
        let f = fit_power_law(&b, 1, (1e2, 1e3)).unwrap();
        assert!((f.exponent + 1.0).abs() < 0.02, "{f:?}");
        assert!((f.coefficient / 0.5 - 1.0).abs() < 0.02, "{f:?}");
    }

    #[test]
    fn negative_branch_is_refused() {
        let spec = BranchSpec::pilot(2, 1);
        let b = trace_branches(&spec, &[10.0, 20.0], 1, &TraceSettings::default()).unwrap();
        assert!(matches!(
            fit_power_law(&b, 0, (1.0, 100.0)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn even_decay_exponent() {
        let spec = BranchSpec::pilot(2, 0);
        let b = trace_branches(
            &spec,
            &uniform_grid(6.0, 20.0, 8),
            1,
            &TraceSettings::default(),
        )
        .unwrap();
        let d = fit_exponential_decay(&b, (6.0, 20.0)).unwrap();
        assert!((d.fit.exponent / 1.5 - 1.0).abs() < 0.05, "{d:?}");
        assert!(d.monotone);
    }

    #[test]
    fn odd_zero_mode_is_refused() {
        let spec = BranchSpec::pilot(3, 0);
        let b = trace_branches(
            &spec,
            &uniform_grid(2.0, 10.0, 5),
            1,
            &TraceSettings::default(),
        )
        .unwrap();
        assert!(matches!(
            fit_exponential_decay(&b, (2.0, 10.0)),
            Err(Error::Domain(_))
        ));
    }
}
