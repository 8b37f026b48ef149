//! The rescaled operator `b_ε` whose eigenvalue near zero is `ω₂ε² + O(ε⁴)`.
//!
//! Exactly, `b_ε = D² + ((1+εx)^ν − 1)²/(εν)² − (2l+1)(1+εx)^{ν−1}`, which is
//! `γ^{1−ν} a⁰(η)` after `x ↦ γ + γ^{(1−ν)/2}x`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::operators::{Grid1D, OperatorMeta, ScalingTag, TridiagOperator};

/// `ε = γ^{−(ν+1)/2}` with `γ = (νη)^{1/ν}`.
pub fn epsilon_of_eta(nu: u32, eta: f64) -> f64 {
    let gamma = (nu as f64 * eta).powf(1.0 / nu as f64);
    gamma.powf(-(nu as f64 + 1.0) / 2.0)
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn b_epsilon_potential(nu: u32, ell: u32, eps: f64, x: f64) -> f64 {
    let l2 = (2 * ell + 1) as f64;
    if eps == 0.0 {
        return x * x - l2;
    }
    let t = eps * x;
    let nf = nu as f64;
    let (pow_nu_m1, pow_nm1) = if t > -1.0 {
        let lg = t.ln_1p();
        ((nf * lg).exp_m1(), ((nf - 1.0) * lg).exp())
    } else {
        (
            (1.0 + t).powi(nu as i32) - 1.0,
            (1.0 + t).powi(nu as i32 - 1),
        )
    };
    let p = pow_nu_m1 / (eps * nf);
    p * p - l2 * pow_nm1
}

pub fn build_b_epsilon(nu: u32, ell: u32, eps: f64, grid: &Grid1D) -> Result<TridiagOperator> {
    let meta = OperatorMeta {
        eta: 0.0,
        nu,
        ell,
        tag: ScalingTag::Epsilon,
    };
    TridiagOperator::from_potential(*grid, 1.0, |x| b_epsilon_potential(nu, ell, eps, x), meta)
}

/// Coefficients (lowest degree first) of `b_ε − h₀` as a polynomial in `x`.
fn remainder_poly(nu: u32, ell: u32, eps: f64) -> Vec<f64> {
    let nf = nu as f64;
    let mut p = vec![0.0; nu as usize + 1];
    for j in 1..=nu {
        p[j as usize] = binomial(nu, j) * eps.powi(j as i32 - 1) / nf;
    }
    let mut r = vec![0.0; 2 * nu as usize + 1];
    for (a, pa) in p.iter().enumerate() {
        for (b, pb) in p.iter().enumerate() {
            r[a + b] += pa * pb;
        }
    }
    r[2] -= 1.0;
    let l2 = (2 * ell + 1) as f64;
    for j in 1..nu {
        r[j as usize] -= l2 * binomial(nu - 1, j) * eps.powi(j as i32);
    }
    r
}

/// Eigenvalue of `b_ε` near zero, from a Hermite–Galerkin matrix of size
/// `basis` with exact polynomial matrix elements.
///
/// The value is the Rayleigh quotient of the computed eigenvector evaluated as
/// `Σ 2(k−l)v_k² + vᵀRv`, which keeps relative accuracy when `Λ` is tiny.
pub fn epsilon_eigenvalue(nu: u32, ell: u32, eps: f64, basis: usize) -> Result<f64> {
    let l = ell as usize;
    if basis <= l + 4 || !eps.is_finite() || eps < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "basis {basis} / eps {eps} for l = {ell}"
        )));
    }
    let r = remainder_poly(nu, ell, eps);
    let m = basis + r.len() + 1;
    let mut x = DMatrix::<f64>::zeros(m, m);
    for k in 0..m - 1 {
        let c = ((2 * k + 2) as f64).sqrt() / 2.0;
        x[(k, k + 1)] = c;
        x[(k + 1, k)] = c;
    }
    let mut acc = DMatrix::<f64>::zeros(m, m);
    for c in r.iter().rev() {
        acc = &x * &acc;
        for i in 0..m {
            acc[(i, i)] += c;
        }
    }
    let rn = acc.view((0, 0), (basis, basis)).into_owned();
    let mut a = rn.clone();
    for k in 0..basis {
        a[(k, k)] += 2.0 * (k as f64 - l as f64);
    }
    let a = (&a + a.transpose()) * 0.5;
    let eig = a.symmetric_eigen();
    let j = (0..basis)
        .max_by(|&i, &j| {
            eig.eigenvectors[(l, i)]
                .abs()
                .partial_cmp(&eig.eigenvectors[(l, j)].abs())
                .unwrap()
        })
        .unwrap();
    let v = eig.eigenvectors.column(j);
    let h0: f64 = (0..basis)
        .map(|k| 2.0 * (k as f64 - l as f64) * v[k] * v[k])
        .sum();
    let rv = &rn * v;
    let vr: f64 = v.dot(&rv);
    let nv = v.dot(&v);
    let value = (h0 + vr) / nv;
    if !value.is_finite() {
        return Err(Error::Numerical {
            index: l,
            reason: "non-finite Galerkin eigenvalue".into(),
        });
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolve::refine_richardson;
    use crate::operators::pilot_potential;

    #[test]
    fn potential_matches_shifted_pilot() {
        let (nu, ell, eta) = (3u32, 1u32, 500.0);
        let gamma = (3.0 * eta as f64).powf(1.0 / 3.0);
        let eps = epsilon_of_eta(nu, eta);
        let s = gamma.powf((1.0 - nu as f64) / 2.0);
        for x in [-2.0, -0.3, 0.0, 0.7, 3.0] {
            let lhs = b_epsilon_potential(nu, ell, eps, x);
            let rhs = pilot_potential(nu, ell, eta, gamma + s * x) * gamma.powf(1.0 - nu as f64);
            assert!(
                (lhs - rhs).abs() < 1e-9 * (1.0 + rhs.abs()),
                "{x}: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn zero_epsilon_is_harmonic() {
        for l in 0..4 {
            let v = epsilon_eigenvalue(2, l, 0.0, 40).unwrap();
            assert!(v.abs() < 1e-14);
        }
    }

    #[test]
    fn galerkin_matches_grid() {
        let (nu, ell, eps) = (2, 1, 0.05);
        let g = Grid1D::new(-12.0, 12.0, 1199).unwrap();
        let build = |g: &Grid1D| build_b_epsilon(nu, ell, eps, g);
        let r = refine_richardson(&build, 2, &g, &g.refined(), 1e-14).unwrap();
        let gal = epsilon_eigenvalue(nu, ell, eps, 80).unwrap();
        assert!((r.values[1] - gal).abs() < 1e-7, "{} vs {gal}", r.values[1]);
    }

    #[test]
    fn second_order_coefficient() {
        for (nu, ell, w2) in [(2u32, 1u32, 1.0), (3, 1, 2.0), (3, 2, 6.0)] {
            for eps in [1e-3, 1e-2] {
                let lam = epsilon_eigenvalue(nu, ell, eps, 60).unwrap();
                let c = (lam - w2 * eps * eps) / eps.powi(4);
                assert!(c.abs() < 1e3, "nu {nu} l {ell} eps {eps}: {c}");
            }
        }
    }
}
