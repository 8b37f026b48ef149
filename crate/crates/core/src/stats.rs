//! Small statistics helpers: least-squares lines and Kendall's rank correlation.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute residual.
    pub max_residual: f64,
    /// Standard error of the slope (zero for two points).
    pub slope_stderr: f64,
}

impl LinearFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Ordinary least squares `y ≈ a + b x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "linear fit needs two or more paired samples, got {} / {}",
            x.len(),
            y.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite sample in fit".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("degenerate abscissae in fit".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let res: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(a, b)| b - intercept - slope * a)
        .collect();
    let max_residual = res.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
    let slope_stderr = if x.len() > 2 {
        (res.iter().map(|r| r * r).sum::<f64>() / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(LinearFit {
        slope,
        intercept,
        max_residual,
        slope_stderr,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KendallTest {
    pub tau: f64,
    /// One-sided p-value for a positive association.
    pub p_increasing: f64,
    pub n: usize,
}

fn concordance(x: &[f64], y: &[f64]) -> i64 {
    let mut s = 0i64;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let a = (x[j] - x[i]).signum() * (y[j] - y[i]).signum();
            s += a as i64;
        }
    }
    s
}

fn permutations(n: usize, f: &mut impl FnMut(&[usize])) {
    let mut p: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    f(&p);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                p.swap(0, i);
            } else {
                p.swap(c[i], i);
            }
            f(&p);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Kendall's τ with an exact permutation p-value for `n ≤ 9`
/// and the normal approximation beyond.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<KendallTest> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return Err(Error::InvalidParameter(
            "kendall needs paired samples".into(),
        ));
    }
    let s = concordance(x, y);
    let pairs = (n * (n - 1) / 2) as f64;
    let tau = s as f64 / pairs;
    let p = if n <= 9 {
        let xs: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let mut ranks: Vec<usize> = (0..n).collect();
        ranks.sort_by(|&a, &b| x[a].partial_cmp(&x[b]).unwrap());
        let mut ys = vec![0.0; n];
        for (r, &i) in ranks.iter().enumerate() {
            ys[r] = y[i];
        }
        let s_obs = concordance(&xs, &ys);
        let (mut hit, mut total) = (0u64, 0u64);
        permutations(n, &mut |perm| {
            let yp: Vec<f64> = perm.iter().map(|&k| ys[k]).collect();
            if concordance(&xs, &yp) >= s_obs {
                hit += 1;
            }
            total += 1;
        });
        hit as f64 / total as f64
    } else {
        let nf = n as f64;
        let var = nf * (nf - 1.0) * (2.0 * nf + 5.0) / 18.0;
        let z = (s as f64 - 1.0) / var.sqrt();
        0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
    };
    Ok(KendallTest {
        tau,
        p_increasing: p,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let f = linear_fit(&x, &y).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-14 && (f.intercept - 2.0).abs() < 1e-14);
        assert!(f.max_residual < 1e-14);
    }

    #[test]
    fn kendall_exact_small() {
        let x = [1.0, 2.0, 3.0];
        let t = kendall_tau(&x, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(t.tau, 1.0);
        assert!((t.p_increasing - 1.0 / 6.0).abs() < 1e-15);
        let t = kendall_tau(&x, &[3.0, 2.0, 1.0]).unwrap();
        assert_eq!(t.tau, -1.0);
        assert_eq!(t.p_increasing, 1.0);
    }

    #[test]
    fn kendall_normal_tail() {
        let x: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let t = kendall_tau(&x, &x).unwrap();
        assert!(t.p_increasing < 1e-6);
    }
}
