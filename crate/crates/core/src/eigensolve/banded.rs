//! Complex Hermitian banded matrices and their inertia.
//!
//! Only the lower band is stored. Row `i` keeps the entries `A[i][i-b..=i]`
//! contiguously, padded on the left for the first rows.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    dim: usize,
    bandwidth: usize,
    rows: Vec<Complex64>,
}

/// Negative-eigenvalue count from a banded LDLᴴ factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct InertiaReport {
    pub negative: usize,
    /// Pivots that had to be perturbed away from zero.
    pub perturbed: Vec<usize>,
}

impl InertiaReport {
    pub fn ambiguous(&self) -> bool {
        !self.perturbed.is_empty()
    }
}

const PIVOT_EPS: f64 = 1e-14;

impl BandedMatrix {
    pub fn new(dim: usize, bandwidth: usize) -> Self {
        BandedMatrix {
            dim,
            bandwidth,
            rows: vec![Complex64::new(0.0, 0.0); dim * (bandwidth + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.bandwidth + 1) + (j + self.bandwidth - i)
    }

    /// Sets `A[i][j]` for `i - b <= j <= i`; the upper entry is implied.
    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        assert!(j <= i && i - j <= self.bandwidth && i < self.dim);
        let k = self.idx(i, j);
        self.rows[k] = value;
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let (r, c, conj) = if j <= i { (i, j, false) } else { (j, i, true) };
        if r - c > self.bandwidth || r >= self.dim {
            return Complex64::new(0.0, 0.0);
        }
        let v = self.rows[self.idx(r, c)];
        if conj {
            v.conj()
        } else {
            v
        }
    }

    pub fn check_finite(&self) -> Result<()> {
        match self
            .rows
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            Some(k) => Err(Error::NonFinite(k / (self.bandwidth + 1))),
            None => Ok(()),
        }
    }

    /// Infinity norm.
    pub fn norm(&self) -> f64 {
        let mut sums = vec![0.0; self.dim];
        for i in 0..self.dim {
            for j in i.saturating_sub(self.bandwidth)..=i {
                let a = self.rows[self.idx(i, j)].norm();
                sums[i] += a;
                if j != i {
                    sums[j] += a;
                }
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        for i in 0..self.dim {
            for j in i.saturating_sub(self.bandwidth)..i {
                let a = self.rows[self.idx(i, j)];
                out[i] += a * v[j];
                out[j] += a.conj() * v[i];
            }
            out[i] += self.rows[self.idx(i, i)].re * v[i];
        }
        out
    }

    /// Dense copy, for small cross-checks.
    pub fn to_dense(&self) -> nalgebra::DMatrix<Complex64> {
        nalgebra::DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    /// Number of eigenvalues strictly below `tau`.
    pub fn inertia_below(&self, tau: f64) -> Result<InertiaReport> {
        self.factor(tau).map(|f| f.report)
    }

    /// LDLᴴ of `A − τI` without pivoting.
    pub fn factor(&self, tau: f64) -> Result<BandedLdl> {
        self.check_finite()?;
        let b = self.bandwidth;
        let n = self.dim;
        let w = b + 1;
        let row_norms: Vec<f64> = (0..n)
            .map(|i| {
                let mut s = 0.0;
                for j in i.saturating_sub(b)..=i {
                    s += self.rows[self.idx(i, j)].norm();
                }
                for k in i + 1..(i + b + 1).min(n) {
                    s += self.rows[self.idx(k, i)].norm();
                }
                s + tau.abs()
            })
            .collect();
        let mut a = self.rows.clone();
        for i in 0..n {
            a[i * w + b].re -= tau;
            a[i * w + b].im = 0.0;
        }
        let mut d = vec![0.0; n];
        let mut perturbed = Vec::new();
        let mut scaled = vec![Complex64::new(0.0, 0.0); w];
        for k in 0..n {
            let mut piv = a[k * w + b].re;
            let floor = PIVOT_EPS * row_norms[k].max(f64::MIN_POSITIVE);
            if piv.abs() < floor {
                piv = if piv < 0.0 { -floor } else { floor };
                perturbed.push(k);
            }
            if !piv.is_finite() {
                return Err(Error::Numerical {
                    index: k,
                    reason: "non-finite pivot".into(),
                });
            }
            d[k] = piv;
            let last = (k + b).min(n - 1);
            // column k below the diagonal: A[i][k] sits at offset b-(i-k) in row i
            for i in k + 1..=last {
                let off = i * w + b - (i - k);
                let l = a[off] / piv;
                scaled[i - k] = a[off].conj();
                a[off] = l;
            }
            for i in k + 1..=last {
                let li = a[i * w + b - (i - k)];
                let base = i * w + b - i;
                for j in k + 1..=i {
                    // A[i][j] -= l_ik · d_k · conj(l_jk) = l_ik · conj(A_jk before scaling)
                    a[base + j] -= li * scaled[j - k];
                }
            }
        }
        let negative = d.iter().filter(|&&p| p < 0.0).count();
        Ok(BandedLdl {
            dim: n,
            bandwidth: b,
            l: a,
            d,
            report: InertiaReport {
                negative,
                perturbed,
            },
        })
    }
}

/// Result of [`BandedMatrix::factor`].
#[derive(Debug, Clone)]
pub struct BandedLdl {
    dim: usize,
    bandwidth: usize,
    l: Vec<Complex64>,
    d: Vec<f64>,
    pub report: InertiaReport,
}

impl BandedLdl {
    /// Solves `L D Lᴴ x = rhs` in place.
    pub fn solve(&self, x: &mut [Complex64]) {
        let (n, b) = (self.dim, self.bandwidth);
        let w = b + 1;
        for i in 0..n {
            let mut s = x[i];
            for j in i.saturating_sub(b)..i {
                s -= self.l[i * w + b + j - i] * x[j];
            }
            x[i] = s;
        }
        for i in 0..n {
            x[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..(i + b + 1).min(n) {
                s -= self.l[k * w + b + i - k].conj() * x[k];
            }
            x[i] = s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize, b: usize) -> BandedMatrix {
        let mut m = BandedMatrix::new(n, b);
        for i in 0..n {
            m.set(i, i, Complex64::new(2.0 + (i as f64 * 0.7).sin(), 0.0));
            for j in i.saturating_sub(b)..i {
                let t = (i * 3 + j) as f64;
                m.set(i, j, Complex64::new(0.3 * t.cos(), 0.2 * t.sin()));
            }
        }
        m
    }

    #[test]
    fn inertia_matches_dense() {
        let m = sample(40, 5);
        let eig = m.to_dense().symmetric_eigenvalues();
        for tau in [-1.0, 0.5, 1.7, 2.2, 3.0, 5.0] {
            let expect = eig.iter().filter(|&&e| e < tau).count();
            let got = m.inertia_below(tau).unwrap();
            assert_eq!(got.negative, expect, "tau {tau}");
        }
    }

    #[test]
    fn ldl_solve_and_apply_agree() {
        let m = sample(30, 4);
        let f = m.factor(-3.0).unwrap();
        let x: Vec<Complex64> = (0..30)
            .map(|i| Complex64::new(i as f64, 1.0 - i as f64 * 0.1))
            .collect();
        let mut y = m.apply(&x);
        for (yi, xi) in y.iter_mut().zip(&x) {
            *yi += 3.0 * xi;
        }
        f.solve(&mut y);
        for (a, b) in y.iter().zip(&x) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn zero_pivot_is_reported() {
        let mut m = BandedMatrix::new(3, 1);
        for i in 0..3 {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        let r = m.inertia_below(1.0).unwrap();
        assert!(r.ambiguous());
    }
}
