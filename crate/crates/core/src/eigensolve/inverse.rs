//! Inverse iteration for symmetric tridiagonal matrices.

use crate::error::{Error, Result};
use crate::operators::TridiagOperator;

/// LU factors of a shifted tridiagonal with partial pivoting (two upper bands).
struct TridiagLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swap: Vec<bool>,
}

impl TridiagLu {
    fn factor(diag: &[f64], off: &[f64], shift: f64, tiny: f64) -> Self {
        let n = diag.len();
        let mut dl = off.to_vec();
        let mut d: Vec<f64> = diag.iter().map(|v| v - shift).collect();
        let mut du = off.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swap = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swap[i] = true;
            }
        }
        for v in d.iter_mut() {
            if v.abs() < tiny {
                *v = if *v < 0.0 { -tiny } else { tiny };
            }
        }
        TridiagLu {
            dl,
            d,
            du,
            du2,
            swap,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        for i in 0..n - 1 {
            if self.swap[i] {
                let t = b[i];
                b[i] = b[i + 1];
                b[i + 1] = t - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn orthogonalize(v: &mut [f64], against: &[&[f64]]) {
    for u in against {
        let p: f64 = v.iter().zip(u.iter()).map(|(a, b)| a * b).sum();
        v.iter_mut().zip(u.iter()).for_each(|(a, b)| *a -= p * b);
    }
}

/// Unit eigenvector for the eigenvalue approximation `lambda`.
pub fn eigenvector(op: &TridiagOperator, lambda: f64) -> Result<Vec<f64>> {
    eigenvector_with(op, lambda, 1e-12, &[]).map(|(v, _)| v)
}

/// Inverse iteration, orthogonal to the already computed vectors in `against`.
/// Returns the vector and its residual `‖(A − λ)v‖`.
pub fn eigenvector_with(
    op: &TridiagOperator,
    lambda: f64,
    rtol: f64,
    against: &[&[f64]],
) -> Result<(Vec<f64>, f64)> {
    op.check_finite()?;
    let n = op.dim();
    let anorm = op.norm().max(f64::MIN_POSITIVE);
    let lu = TridiagLu::factor(&op.diag, &op.offdiag, lambda, f64::EPSILON * anorm);
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * ((i as f64) * 0.618_033_988_75).sin())
        .collect();
    let target = (100.0 * rtol * anorm).max(1e3 * f64::EPSILON * anorm * (n as f64).sqrt());
    let mut residual = f64::INFINITY;
    for _ in 0..5 {
        orthogonalize(&mut v, against);
        let s = norm2(&v);
        v.iter_mut().for_each(|x| *x /= s);
        lu.solve(&mut v);
        orthogonalize(&mut v, against);
        let s = norm2(&v);
        if !s.is_finite() || s == 0.0 {
            return Err(Error::Numerical {
                index: against.len(),
                reason: "inverse iteration breakdown".into(),
            });
        }
        v.iter_mut().for_each(|x| *x /= s);
        let av = op.apply(&v);
        residual = norm2(
            &av.iter()
                .zip(v.iter())
                .map(|(a, x)| a - lambda * x)
                .collect::<Vec<_>>(),
        );
        if residual <= target {
            // fix the sign so the largest component is positive
            let imax = (0..n)
                .max_by(|&a, &b| v[a].abs().partial_cmp(&v[b].abs()).unwrap())
                .unwrap();
            if v[imax] < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            return Ok((v, residual));
        }
    }
    Err(Error::Numerical {
        index: against.len(),
        reason: format!("inverse iteration did not converge, residual {residual:e}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolve::eigen_lowest_k;
    use crate::operators::{Grid1D, OperatorMeta, ScalingTag};

    #[test]
    fn harmonic_ground_state_is_gaussian() {
        let g = Grid1D::new(-8.0, 8.0, 1599).unwrap();
        let meta = OperatorMeta {
            eta: 0.0,
            nu: 2,
            ell: 0,
            tag: ScalingTag::Custom,
        };
        let op = TridiagOperator::from_potential(g, 1.0, |x| x * x, meta).unwrap();
        let r = eigen_lowest_k(&op, 2, 1e-14).unwrap();
        let (v0, res) = eigenvector_with(&op, r.values[0], 1e-14, &[]).unwrap();
        assert!(res < 1e-8);
        let dx = g.spacing();
        let c = (dx / std::f64::consts::PI.sqrt()).sqrt();
        for (i, x) in g.points().enumerate().step_by(97) {
            assert!((v0[i] - c * (-x * x / 2.0).exp()).abs() < 1e-5);
        }
        let v1 = eigenvector_with(&op, r.values[1], 1e-14, &[&v0]).unwrap().0;
        let dot: f64 = v0.iter().zip(&v1).map(|(a, b)| a * b).sum();
        assert!(dot.abs() < 1e-10);
    }

    #[test]
    fn pivoting_path() {
        // small diagonal forces row interchanges
        let op = TridiagOperator {
            diag: vec![0.0, 0.0, 0.0, 0.0],
            offdiag: vec![1.0, 1.0, 1.0],
            grid: Grid1D::new(0.0, 1.0, 4).unwrap(),
            meta: OperatorMeta {
                eta: 0.0,
                nu: 2,
                ell: 0,
                tag: ScalingTag::Custom,
            },
        };
        let r = eigen_lowest_k(&op, 4, 1e-15).unwrap();
        for l in r.values {
            let (_, res) = eigenvector_with(&op, l, 1e-14, &[]).unwrap();
            assert!(res < 1e-10);
        }
    }
}
