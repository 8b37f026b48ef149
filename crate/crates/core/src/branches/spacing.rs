use serde::Serialize;

use super::trace::EigenBranch;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaRegime {
    /// `|η| ≤ C`: spacing of order one.
    Bounded,
    /// `η ≥ C`: spacing of order `η^{(ν−1)/ν}`.
    Positive,
    /// `η ≤ −C`.
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpacingRow {
    pub eta: f64,
    pub n: usize,
    pub gap: f64,
    pub normalized_gap: f64,
    pub regime: EtaRegime,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeSummary {
    pub regime: EtaRegime,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpacingTable {
    pub rows: Vec<SpacingRow>,
    pub summary: Vec<RegimeSummary>,
}

/// Predicted spacing scale at `η`.
pub fn spacing_scale(nu: u32, eta: f64, c: f64) -> (EtaRegime, f64) {
    if eta.abs() <= c {
        (EtaRegime::Bounded, 1.0)
    } else {
        let s = (1.0 + eta.abs()).powf((nu as f64 - 1.0) / nu as f64);
        let r = if eta > 0.0 {
            EtaRegime::Positive
        } else {
            EtaRegime::Negative
        };
        (r, s)
    }
}

/// Consecutive gaps `λ_{n+1} − λ_n`, normalized by the regime's scale.
pub fn spacing_stats(branch: &EigenBranch, c: f64) -> SpacingTable {
    let mut rows = Vec::new();
    for (i, &eta) in branch.eta_grid.iter().enumerate() {
        let (regime, scale) = spacing_scale(branch.spec.nu, eta, c);
        for n in 0..branch.n_branches().saturating_sub(1) {
            let gap = branch.values[n + 1][i] - branch.values[n][i];
            rows.push(SpacingRow {
                eta,
                n,
                gap,
                normalized_gap: gap / scale,
                regime,
            });
        }
    }
    let mut summary: Vec<RegimeSummary> = Vec::new();
    for r in &rows {
        match summary.iter_mut().find(|s| s.regime == r.regime) {
            Some(s) => {
                s.min = s.min.min(r.normalized_gap);
                s.max = s.max.max(r.normalized_gap);
                s.count += 1;
            }
            None => summary.push(RegimeSummary {
                regime: r.regime,
                min: r.normalized_gap,
                max: r.normalized_gap,
                count: 1,
            }),
        }
    }
    summary.sort_by_key(|s| s.regime);
    SpacingTable { rows, summary }
}

/// Empirical constant of the sign separation `±λ_n ≥ ε|n−l|(1+η)^{(ν−1)/ν}`
/// for `n ≠ l` over samples with `η ≥ eta_min`. Returns `(n, ε)` pairs; a
/// non-positive `ε` means the sign condition fails somewhere.
pub fn sign_separation(branch: &EigenBranch, eta_min: f64) -> Vec<(usize, f64)> {
    let l = branch.spec.ell as usize;
    let nu = branch.spec.nu as f64;
    (0..branch.n_branches())
        .filter(|&n| n != l)
        .map(|n| {
            let sign = if n < l { -1.0 } else { 1.0 };
            let d = (n as f64 - l as f64).abs();
            let eps = branch
                .eta_grid
                .iter()
                .enumerate()
                .filter(|(_, &e)| e >= eta_min)
                .map(|(i, &e)| sign * branch.values[n][i] / (d * (1.0 + e).powf((nu - 1.0) / nu)))
                .fold(f64::INFINITY, f64::min);
            (n, eps)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branches::{trace_branches, uniform_grid, BranchSpec, TraceSettings};

    #[test]
    fn bounded_regime_gaps() {
        let spec = BranchSpec::pilot(2, 1);
        let b = trace_branches(
            &spec,
            &uniform_grid(-1.0, 1.0, 5),
            5,
            &TraceSettings::default(),
        )
        .unwrap();
        let t = spacing_stats(&b, 10.0);
        assert_eq!(t.rows.len(), 20);
        assert_eq!(t.summary.len(), 1);
        assert!(
            t.summary[0].min > 0.2 && t.summary[0].max < 5.0,
            "{:?}",
            t.summary
        );
    }

    #[test]
    fn separation_signs() {
        let spec = BranchSpec::pilot(2, 1);
        let b = trace_branches(&spec, &[100.0, 400.0], 3, &TraceSettings::default()).unwrap();
        for (_, eps) in sign_separation(&b, 50.0) {
            assert!(eps > 0.5, "{eps}");
        }
    }
}
