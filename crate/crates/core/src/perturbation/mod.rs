//! Exact second-order perturbation theory for the pilot operator at large `η`.
//!
//! With `η = γ^ν/ν`, shifting to the well at `γ` and rescaling gives
//! `γ^{ν−1} b_ε` with `ε = γ^{−(ν+1)/2}` and
//! `b_ε = h₀ + εh₁ + ε²h₂ + O(ε³)`. Everything here is computed over the
//! Hermite basis in exact arithmetic.

mod epsilon;
mod hermite;
mod surd;

pub use epsilon::{b_epsilon_potential, build_b_epsilon, epsilon_eigenvalue, epsilon_of_eta};
pub use hermite::{ladder_apply, HermiteVector, Letter, XPoly};
pub use surd::{rational, split_square, Surd};

use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::error::{Error, Result};

fn q(n: i64, d: i64) -> BigRational {
    rational(n, d)
}

fn check_args(nu: u32, _ell: u32) -> Result<()> {
    if nu < 2 {
        return Err(Error::InvalidParameter(format!("nu = {nu} < 2")));
    }
    Ok(())
}

/// `h₁ = (ν−1)(x³ − (2l+1)x)` and
/// `h₂ = (ν−1)((7ν/12 − 11/12)x⁴ − ½(2l+1)(ν−2)x²)`.
pub fn build_h1_h2(nu: u32, ell: u32) -> (XPoly, XPoly) {
    let (n, l) = (nu as i64, ell as i64);
    let h1 = XPoly {
        coeffs: vec![q(0, 1), q(-(n - 1) * (2 * l + 1), 1), q(0, 1), q(n - 1, 1)],
    };
    let h2 = XPoly {
        coeffs: vec![
            q(0, 1),
            q(0, 1),
            q(-(n - 1) * (2 * l + 1) * (n - 2), 2),
            q(0, 1),
            q((n - 1) * (7 * n - 11), 12),
        ],
    };
    (h1, h2)
}

/// First-order correction `u₁` solving `h₀u₁ + h₁u₀ = 0` with `⟨u₁, u₀⟩ = 0`.
pub fn solve_first_order(nu: u32, ell: u32) -> Result<HermiteVector> {
    check_args(nu, ell)?;
    let (h1, _) = build_h1_h2(nu, ell);
    let l = ell as usize;
    let w = h1.apply(&HermiteVector::basis(l));
    if !w.get(l).is_zero() {
        return Err(Error::Discrepancy {
            what: format!("<h1 u0, u0> (nu={nu}, l={ell})"),
            computed: w.get(l).to_string(),
            expected: "0".into(),
        });
    }
    let mut u1 = HermiteVector::zero();
    for (k, c) in w.iter() {
        let denom = 2 * (k as i64 - l as i64);
        u1.add(k, &c.scale(&q(-1, denom)));
    }
    Ok(u1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationResult {
    pub nu: u32,
    pub ell: u32,
    pub omega2: BigRational,
    pub h1_u0: HermiteVector,
    pub u1: HermiteVector,
    /// `⟨h₀u₁, u₁⟩`.
    pub inner_h0: BigRational,
    /// `⟨h₂u₀, u₀⟩`.
    pub inner_h2: BigRational,
    /// `ω₂ ν^{−2/ν}`, the coefficient of `η^{−2/ν}` in `λ_l(η)`.
    pub kappa: f64,
}

fn exact(s: &Surd, what: &str) -> Result<BigRational> {
    s.as_rational().ok_or_else(|| Error::Discrepancy {
        what: format!("{what} is not rational"),
        computed: s.to_string(),
        expected: "a rational number".into(),
    })
}

fn compare(what: String, computed: &BigRational, expected: &BigRational) -> Result<()> {
    if computed == expected {
        Ok(())
    } else {
        Err(Error::Discrepancy {
            what,
            computed: computed.to_string(),
            expected: expected.to_string(),
        })
    }
}

/// Runs the whole second-order computation without comparing against closed forms.
pub fn compute(nu: u32, ell: u32) -> Result<PerturbationResult> {
    check_args(nu, ell)?;
    let l = ell as usize;
    let (h1, h2) = build_h1_h2(nu, ell);
    let u0 = HermiteVector::basis(l);
    let h1_u0 = h1.apply(&u0);
    let u1 = solve_first_order(nu, ell)?;
    let inner_h0 = exact(&u1.apply_h0(l).inner(&u1), "<h0 u1, u1>")?;
    let inner_h2 = exact(&h2.apply(&u0).inner(&u0), "<h2 u0, u0>")?;
    let omega2 = &inner_h2 - &inner_h0;
    let kappa = omega2.to_f64().unwrap_or(f64::NAN) * (nu as f64).powf(-2.0 / nu as f64);
    Ok(PerturbationResult {
        nu,
        ell,
        omega2,
        h1_u0,
        u1,
        inner_h0,
        inner_h2,
        kappa,
    })
}

/// `½(ν−1)l(l+1)`.
pub fn omega2_closed_form(nu: u32, ell: u32) -> BigRational {
    q((nu as i64 - 1) * ell as i64 * (ell as i64 + 1), 2)
}

/// `ω₂ = −⟨u₁, h₀u₁⟩ + ⟨h₂u₀, u₀⟩`, checked against the closed form.
pub fn omega2(nu: u32, ell: u32) -> Result<BigRational> {
    let r = compute(nu, ell)?;
    compare(
        format!("omega2 (nu={nu}, l={ell})"),
        &r.omega2,
        &omega2_closed_form(nu, ell),
    )?;
    Ok(r.omega2)
}

/// Closed forms `(1/16)(ν−1)²(−2l²−2l+3)` and
/// `(ν−1)(7ν−11)(2l²+2l+1)/16 − (ν−1)(ν−2)(2l+1)²/4`.
pub fn inner_products_closed_form(nu: u32, ell: u32) -> (BigRational, BigRational) {
    let (n, l) = (nu as i64, ell as i64);
    let h0 = q((n - 1) * (n - 1) * (-2 * l * l - 2 * l + 3), 16);
    let h2 = q((n - 1) * (7 * n - 11) * (2 * l * l + 2 * l + 1), 16)
        - q((n - 1) * (n - 2) * (2 * l + 1) * (2 * l + 1), 4);
    (h0, h2)
}

/// `(⟨h₀u₁,u₁⟩, ⟨h₂u₀,u₀⟩)`, each checked against its closed form.
pub fn intermediate_inner_products(nu: u32, ell: u32) -> Result<(BigRational, BigRational)> {
    let r = compute(nu, ell)?;
    let (c0, c2) = inner_products_closed_form(nu, ell);
    compare(format!("<h0 u1, u1> (nu={nu}, l={ell})"), &r.inner_h0, &c0)?;
    compare(format!("<h2 u0, u0> (nu={nu}, l={ell})"), &r.inner_h2, &c2)?;
    Ok((r.inner_h0, r.inner_h2))
}

/// Coefficients of `∂_{αⱼ}λ_l ≈ κⱼη` and `Σⱼ∂_{αⱼ}λ_l ≈ κ₄η^{1/ν}λ_l`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeCoeffs {
    pub kappa1: f64,
    pub kappa2: f64,
    pub kappa3: f64,
    pub kappa4: f64,
}

/// The leading term of `∂_{αⱼ}λ_l` is `γ^ν ⟨k'ⱼυ_l, υ_l⟩` with
/// `k'₁ = D²`, `k'₂ = x²`, `k'₃ = −(2l+1)`. Since `γ^ν = νη` the
/// coefficients of `η` carry a factor `ν`. The sum over `j` equals
/// `⟨x a⁰ u, u⟩ ≈ γλ_l = (νη)^{1/ν}λ_l`, so `κ₄ = ν^{1/ν}`.
pub fn derivative_coeffs(nu: u32, ell: u32) -> Result<DerivativeCoeffs> {
    check_args(nu, ell)?;
    let l = ell as usize;
    let u0 = HermiteVector::basis(l);
    let x2 = exact(
        &ladder_apply(&u0, &[Letter::X, Letter::X]).inner(&u0),
        "<x^2 u0, u0>",
    )?;
    let id2 = ladder_apply(&u0, &[Letter::ID, Letter::ID]).inner(&u0);
    // ⟨D²υ,υ⟩ = −⟨(iD)²υ,υ⟩
    let d2 = -exact(&id2, "<D^2 u0, u0>")?;
    let chain = q(nu as i64, 1);
    let k1 = &chain * &d2;
    let k2 = &chain * &x2;
    let k3 = &chain * &q(-(2 * ell as i64 + 1), 1);
    compare(format!("kappa1 = kappa2 (nu={nu}, l={ell})"), &k1, &k2)?;
    compare(
        format!("kappa1 = -kappa3/2 (nu={nu}, l={ell})"),
        &k1,
        &(&k3 * &q(-1, 2)),
    )?;
    let f = |v: &BigRational| v.to_f64().unwrap_or(f64::NAN);
    Ok(DerivativeCoeffs {
        kappa1: f(&k1),
        kappa2: f(&k2),
        kappa3: f(&k3),
        kappa4: (nu as f64).powf(1.0 / nu as f64),
    })
}

/// One row of the `perturb` table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbRow {
    pub nu: u32,
    pub ell: u32,
    pub omega2: String,
    pub omega2_value: f64,
    pub kappa: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub kappa3: f64,
    pub kappa4: f64,
}

pub fn perturb_row(nu: u32, ell: u32) -> Result<PerturbRow> {
    let w = omega2(nu, ell)?;
    let k = derivative_coeffs(nu, ell)?;
    Ok(PerturbRow {
        nu,
        ell,
        omega2: w.to_string(),
        omega2_value: w.to_f64().unwrap_or(f64::NAN),
        kappa: w.to_f64().unwrap_or(f64::NAN) * (nu as f64).powf(-2.0 / nu as f64),
        kappa1: k.kappa1,
        kappa2: k.kappa2,
        kappa3: k.kappa3,
        kappa4: k.kappa4,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    #[test]
    fn h1_h2_coefficients() {
        let (h1, h2) = build_h1_h2(2, 1);
        assert_eq!(h1.coeffs, vec![q(0, 1), q(-3, 1), q(0, 1), q(1, 1)]);
        assert_eq!(h2.coeff(4), q(1, 4));
        assert!(h2.coeff(2).is_zero());
        let (h1, h2) = build_h1_h2(3, 0);
        assert_eq!(h1.coeff(3), q(2, 1));
        assert_eq!(h1.coeff(1), q(-2, 1));
        assert_eq!(h2.coeff(4), q(2, 1) * (q(7, 4) - q(11, 12)));
        assert_eq!(h2.coeff(2), q(-1, 1));
    }

    #[test]
    fn h1_parity() {
        for l in 0..6 {
            let (h1, _) = build_h1_h2(4, l);
            let u0 = HermiteVector::basis(l as usize);
            assert!(h1.apply(&u0).inner(&u0).is_zero());
        }
    }

    #[test]
    fn first_order_support_and_residual() {
        let u1 = solve_first_order(2, 1).unwrap();
        // the υ_{l+1} coefficient carries a factor (2l − 2), zero at l = 1
        assert!(u1.support().iter().all(|k| [0, 2, 4].contains(k)));
        assert_eq!(u1.support(), vec![0, 4]);
        assert_eq!(solve_first_order(2, 2).unwrap().support(), vec![1, 3, 5]);
        let (h1, _) = build_h1_h2(2, 1);
        let u0 = HermiteVector::basis(1);
        let res = u1.apply_h0(1).plus(&h1.apply(&u0));
        assert_eq!(res, HermiteVector::zero());
        assert!(u1.inner(&u0).is_zero());
        for l in 4..7 {
            let u1 = solve_first_order(5, l).unwrap();
            assert_eq!(
                u1.support(),
                vec![
                    l as usize - 3,
                    l as usize - 1,
                    l as usize + 1,
                    l as usize + 3
                ]
            );
        }
    }

    #[test]
    fn omega2_values() {
        assert_eq!(omega2(2, 1).unwrap(), q(1, 1));
        assert_eq!(omega2(3, 2).unwrap(), q(6, 1));
        for nu in 2..=8 {
            assert!(omega2(nu, 0).unwrap().is_zero());
        }
    }

    #[test]
    fn inner_products_nu2_l1() {
        let (h0, h2) = intermediate_inner_products(2, 1).unwrap();
        assert_eq!(h0, q(-1, 16));
        assert_eq!(h2, q(15, 16));
        assert_eq!(&h2 - &h0, omega2(2, 1).unwrap());
    }

    #[test]
    fn derivative_relation() {
        for nu in 2..=5 {
            for l in 0..4 {
                let k = derivative_coeffs(nu, l).unwrap();
                assert_eq!(k.kappa1, k.kappa2);
                assert_eq!(k.kappa1, -k.kappa3 / 2.0);
            }
        }
        assert_eq!(derivative_coeffs(3, 0).unwrap().kappa1, 1.5);
    }
}
