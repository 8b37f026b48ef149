use serde::Serialize;

use super::trace::{solve_point, EigenBranch};
use crate::error::Result;
use crate::stats::linear_fit;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroCrossing {
    pub eta_bar: f64,
    pub branch: usize,
    pub order_r: u32,
    pub alpha_local: f64,
    /// Distance of the fitted slope from `order_r`.
    pub rounding_gap: f64,
    /// Set when the slope is not within 0.2 of an integer.
    pub ambiguous: bool,
}

const ZERO_BRANCH_TOL: f64 = 1e-10;

fn eval(branch: &EigenBranch, n: usize, eta: f64) -> Result<f64> {
    solve_point(&branch.spec, eta, n + 1, &branch.settings)
        .map(|p| p.values[n])
        .map_err(|e| e.at_eta(eta))
}

/// Sign changes of each branch, located by bisection and classified by the
/// local order `|λ_n| ~ |α||η − η̄|^r` fitted over a decade below `η̄`.
///
/// Branches that vanish identically (to `1e-10`) are skipped, and so are
/// tangential zeros without a sign change.
pub fn detect_zeros(branch: &EigenBranch) -> Result<Vec<ZeroCrossing>> {
    let mut out = Vec::new();
    for n in 0..branch.n_branches() {
        let row = &branch.values[n];
        if row.iter().all(|v| v.abs() <= ZERO_BRANCH_TOL) {
            continue;
        }
        for i in 0..row.len() - 1 {
            if row[i] == 0.0 || row[i].signum() == row[i + 1].signum() {
                continue;
            }
            let (mut a, mut b) = (branch.eta_grid[i], branch.eta_grid[i + 1]);
            let fa_sign = row[i].signum();
            let tol = 1e-11 * a.abs().max(b.abs()).max(1.0);
            while b - a > tol {
                let m = 0.5 * (a + b);
                let fm = eval(branch, n, m)?;
                if fm.signum() == fa_sign {
                    a = m;
                } else {
                    b = m;
                }
            }
            let eta_bar = 0.5 * (a + b);
            let width = branch.eta_grid[i + 1] - branch.eta_grid[i];
            let d0 = (0.05 * width).min(1e-2);
            let deltas: Vec<f64> = (0..5).map(|j| d0 * 10f64.powf(-j as f64 / 4.0)).collect();
            let mut lx = Vec::with_capacity(5);
            let mut ly = Vec::with_capacity(5);
            let mut lam = Vec::with_capacity(5);
            for &d in &deltas {
                let v = eval(branch, n, eta_bar - d)?;
                lx.push(d.ln());
                ly.push(v.abs().max(f64::MIN_POSITIVE).ln());
                lam.push(v);
            }
            let slope = linear_fit(&lx, &ly)?.slope;
            let r = slope.round().max(1.0);
            let gap = (slope - r).abs();
            let d_mid = deltas[2];
            let alpha_local = lam[2] / (-d_mid).powi(r as i32);
            out.push(ZeroCrossing {
                eta_bar,
                branch: n,
                order_r: r as u32,
                alpha_local,
                rounding_gap: gap,
                ambiguous: gap > 0.2,
            });
        }
    }
    out.sort_by(|a, b| a.eta_bar.partial_cmp(&b.eta_bar).unwrap());
    Ok(out)
}

/// Pairs of crossings on different branches closer than `tol·max(1, |η̄|)`.
pub fn simultaneous_crossings(
    zeros: &[ZeroCrossing],
    tol: f64,
) -> Vec<(ZeroCrossing, ZeroCrossing)> {
    let mut out = Vec::new();
    for (i, a) in zeros.iter().enumerate() {
        for b in &zeros[i + 1..] {
            if a.branch != b.branch
                && (a.eta_bar - b.eta_bar).abs() <= tol * a.eta_bar.abs().max(1.0)
            {
                out.push((*a, *b));
            }
        }
    }
    out
}
