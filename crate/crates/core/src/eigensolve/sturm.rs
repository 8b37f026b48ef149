use crate::error::{Error, Result};
use crate::operators::TridiagOperator;

/// Number of eigenvalues of the symmetric tridiagonal `(diag, offdiag)` strictly below `tau`.
///
/// Ratio form of the Sturm recurrence; pivots smaller than `pivmin` are replaced
/// by `-pivmin`, so the iterates stay bounded by `max|d| + |τ| + 1/f64::MIN_POSITIVE`.
pub fn sturm_count(diag: &[f64], offdiag: &[f64], tau: f64) -> usize {
    let pivmin = pivmin(offdiag);
    let mut count = 0usize;
    let mut q = diag[0] - tau;
    if q.abs() < pivmin {
        q = -pivmin;
    }
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let e = offdiag[i - 1];
        q = diag[i] - tau - e * e / q;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn pivmin(offdiag: &[f64]) -> f64 {
    let emax = offdiag.iter().fold(1.0_f64, |m, e| m.max(e * e));
    f64::MIN_POSITIVE * emax
}

/// Result of a lowest-`k` eigenvalue extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    pub values: Vec<f64>,
    pub error_estimates: Vec<f64>,
    pub grid_used: Option<crate::operators::Grid1D>,
    pub residual_norms: Option<Vec<f64>>,
    /// Set when two neighbouring values agree within tolerance.
    pub ties: bool,
}

fn validate(op: &TridiagOperator, k: usize, rtol: f64) -> Result<()> {
    op.check_finite()?;
    if k == 0 || k > op.dim() {
        return Err(Error::Dimension {
            requested: k,
            available: op.dim(),
        });
    }
    if !(rtol > 0.0) {
        return Err(Error::InvalidParameter(format!("rtol = {rtol}")));
    }
    Ok(())
}

/// The `k` smallest eigenvalues by bisection on the Sturm count.
///
/// Each value is bracketed to width `rtol·max(1, |λ|)`.
pub fn eigen_lowest_k(op: &TridiagOperator, k: usize, rtol: f64) -> Result<EigenResult> {
    validate(op, k, rtol)?;
    let (glo, ghi) = op.gershgorin();
    let span = (ghi - glo).max(1.0);
    let (glo, ghi) = (glo - 1e-12 * span, ghi + 1e-12 * span);
    let roundoff = 4.0 * f64::EPSILON * op.norm();
    let mut values = Vec::with_capacity(k);
    let mut errors = Vec::with_capacity(k);
    let mut lower = glo;
    for j in 0..k {
        let (mut lo, mut hi) = (lower, ghi);
        for _ in 0..400 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if hi - lo <= rtol * mid.abs().max(1.0) {
                break;
            }
            if sturm_count(&op.diag, &op.offdiag, mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        values.push(0.5 * (lo + hi));
        errors.push(0.5 * (hi - lo) + roundoff);
        lower = lo;
    }
    let ties = values
        .windows(2)
        .zip(errors.windows(2))
        .any(|(v, e)| v[1] - v[0] <= rtol * v[1].abs().max(1.0) + e[0] + e[1]);
    Ok(EigenResult {
        values,
        error_estimates: errors,
        grid_used: Some(op.grid),
        residual_norms: None,
        ties,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{Grid1D, OperatorMeta, ScalingTag};

    fn diag_op(d: &[f64]) -> TridiagOperator {
        TridiagOperator {
            diag: d.to_vec(),
            offdiag: vec![0.0; d.len() - 1],
            grid: Grid1D::new(0.0, 1.0, d.len().max(3)).unwrap(),
            meta: OperatorMeta {
                eta: 0.0,
                nu: 2,
                ell: 0,
                tag: ScalingTag::Custom,
            },
        }
    }

    #[test]
    fn diagonal_spectrum() {
        let op = diag_op(&[1.0, -2.0, 3.0]);
        let r = eigen_lowest_k(&op, 3, 1e-14).unwrap();
        for (v, e) in r.values.iter().zip([-2.0, 1.0, 3.0]) {
            assert!((v - e).abs() < 1e-12);
        }
        assert_eq!(sturm_count(&op.diag, &op.offdiag, 0.0), 1);
    }

    #[test]
    fn dimension_error() {
        let op = diag_op(&[1.0, 2.0, 3.0]);
        assert!(matches!(
            eigen_lowest_k(&op, 4, 1e-10),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn non_finite_rejected() {
        let op = diag_op(&[1.0, f64::NAN, 3.0]);
        assert!(matches!(
            eigen_lowest_k(&op, 1, 1e-10),
            Err(Error::NonFinite(1))
        ));
    }

    #[test]
    fn harmonic_oscillator() {
        let g = Grid1D::new(-10.0, 10.0, 3999).unwrap();
        let op = TridiagOperator::from_potential(
            g,
            1.0,
            |x| x * x,
            OperatorMeta {
                eta: 0.0,
                nu: 2,
                ell: 0,
                tag: ScalingTag::Custom,
            },
        )
        .unwrap();
        let r = eigen_lowest_k(&op, 4, 1e-13).unwrap();
        for (n, v) in r.values.iter().enumerate() {
            assert!((v - (2 * n + 1) as f64).abs() < 1e-4, "{n}: {v}");
        }
        assert_eq!(sturm_count(&op.diag, &op.offdiag, 4.0), 2);
        assert!(!r.ties);
    }
}
