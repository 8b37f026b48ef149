//! Smallest singular values of an `(n+1) × n` upper bidiagonal matrix with
//! high relative accuracy.
//!
//! Column `c` has entries in rows `c` and `c + 1`. The singular values are the
//! positive eigenvalues of the zero-diagonal tridiagonal `[[0, B], [Bᵀ, 0]]`
//! ordered `row 0, col 0, row 1, …, col n−1, row n`; bisection on its Sturm
//! count resolves each singular value to high relative accuracy.

use crate::error::{Error, Result};

/// Bidiagonal matrix with `n` columns and `n + 1` rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Bidiagonal {
    /// `B[c][c]`.
    pub above: Vec<f64>,
    /// `B[c+1][c]`.
    pub below: Vec<f64>,
}

impl Bidiagonal {
    pub fn cols(&self) -> usize {
        self.above.len()
    }

    /// Off-diagonal chain of the augmented tridiagonal, `2n` entries.
    pub fn chain(&self) -> Vec<f64> {
        self.above
            .iter()
            .zip(&self.below)
            .flat_map(|(a, b)| [*a, *b])
            .collect()
    }

    /// `‖Bx‖`.
    pub fn apply_norm(&self, x: &[f64]) -> f64 {
        let n = self.cols();
        let mut y = vec![0.0; n + 1];
        for c in 0..n {
            y[c] += self.above[c] * x[c];
            y[c + 1] += self.below[c] * x[c];
        }
        y.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

fn zero_diag_count(chain: &[f64], sigma: f64) -> usize {
    let emax = chain.iter().fold(1.0_f64, |m, e| m.max(e * e));
    let pivmin = f64::MIN_POSITIVE * emax;
    let mut q = -sigma;
    if q.abs() < pivmin {
        q = -pivmin;
    }
    let mut count = usize::from(q < 0.0);
    for e in chain {
        q = -sigma - e * e / q;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Number of singular values strictly below `sigma > 0`.
pub fn singular_count_below(b: &Bidiagonal, sigma: f64) -> usize {
    let chain = b.chain();
    // augmented matrix has size 2n+1: n negative, one zero, n positive
    zero_diag_count(&chain, sigma).saturating_sub(b.cols() + 1)
}

/// The `k` smallest singular values, each bracketed to relative width `rtol`.
pub fn smallest_singular_values(b: &Bidiagonal, k: usize, rtol: f64) -> Result<Vec<f64>> {
    let n = b.cols();
    if k == 0 || k > n {
        return Err(Error::Dimension {
            requested: k,
            available: n,
        });
    }
    let chain = b.chain();
    if let Some(i) = chain.iter().position(|e| !e.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let upper = 2.0 * chain.iter().fold(0.0_f64, |m, e| m.max(e.abs())) + 1e-300;
    let floor = f64::MIN_POSITIVE * 1e10;
    let count = |s: f64| zero_diag_count(&chain, s).saturating_sub(n + 1);
    let mut out = Vec::with_capacity(k);
    let mut lower = floor;
    for j in 0..k {
        let (mut lo, mut hi) = (lower, upper);
        if count(lo) > j {
            out.push(0.0);
            continue;
        }
        for _ in 0..2000 {
            if hi / lo - 1.0 <= rtol {
                break;
            }
            let mid = (lo * hi).sqrt();
            if mid <= lo || mid >= hi {
                break;
            }
            if count(mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        out.push((lo * hi).sqrt());
        lower = lo;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_singular(b: &Bidiagonal) -> Vec<f64> {
        let n = b.cols();
        let mut m = nalgebra::DMatrix::<f64>::zeros(n + 1, n);
        for c in 0..n {
            m[(c, c)] = b.above[c];
            m[(c + 1, c)] = b.below[c];
        }
        let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        s
    }

    /// Entries that make a localized near-null vector: growth by `3` per
    /// column in the left half and decay by `3` in the right half.
    fn graded(n: usize) -> Bidiagonal {
        let g = |c: usize| if c < n / 2 { -0.5 } else { 0.5 };
        Bidiagonal {
            above: (0..n).map(|c| 1.0 + g(c)).collect(),
            below: (0..n).map(|c| -(1.0 - g(c))).collect(),
        }
    }

    fn near_null(b: &Bidiagonal) -> Vec<f64> {
        let n = b.cols();
        let mut x = vec![1.0; n];
        for r in 1..n {
            x[r] = -b.below[r - 1] * x[r - 1] / b.above[r];
        }
        x
    }

    #[test]
    fn matches_dense_svd() {
        let n = 12;
        let b = Bidiagonal {
            above: (0..n).map(|i| 1.0 + 0.1 * i as f64).collect(),
            below: (0..n).map(|i| -0.8 + 0.05 * (i as f64).sin()).collect(),
        };
        let dense = dense_singular(&b);
        let ours = smallest_singular_values(&b, 4, 1e-13).unwrap();
        for (a, e) in ours.iter().zip(&dense) {
            assert!((a / e - 1.0).abs() < 1e-10, "{a} vs {e}");
        }
        assert_eq!(singular_count_below(&b, 0.5 * (ours[1] + ours[2])), 2);
    }

    #[test]
    fn graded_matches_dense_svd() {
        // smallest value near 1e-7, still resolved by a dense SVD
        let b = graded(30);
        let dense = dense_singular(&b)[0];
        let ours = smallest_singular_values(&b, 1, 1e-13).unwrap()[0];
        assert!(dense < 1e-6);
        assert!((ours / dense - 1.0).abs() < 1e-6, "{ours} vs {dense}");
    }

    #[test]
    fn tiny_singular_value_is_bracketed() {
        let b = graded(80);
        let x = near_null(&b);
        let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let bound = b.apply_norm(&x) / nx;
        let s = smallest_singular_values(&b, 2, 1e-13).unwrap();
        assert!(s[0] <= bound * (1.0 + 1e-12) && s[0] > 0.25 * bound);
        assert_eq!(singular_count_below(&b, s[0] * (1.0 - 1e-10)), 0);
        assert_eq!(singular_count_below(&b, s[0] * (1.0 + 1e-10)), 1);
        assert!(s[1] > 1e-3);
    }
}
