use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cutoff::Cutoff;
use super::fiber::{FiberBands, FiberMode, IdsOptions, Weight};
use super::quadrature::{composite_nodes, pairwise_sum};
use super::weyl::{WeylField, WEYL_NORMALIZATION};
use crate::error::{Error, Result};
use crate::operators::ModelParams;

/// Fiber level integral minus the Weyl integral on matched windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correction {
    pub value: f64,
    pub error: f64,
    pub fiber: f64,
    pub weyl: f64,
    /// `ξ₂ ∈ [−Ξ, Ξ]` on the fiber side.
    pub xi_window: f64,
    /// `x₁ ∈ [−R, R]` on the Weyl side, with `μR^ν/ν = Ξ`.
    pub x1_window: f64,
    /// `(x₂, E(x₂))` at the quadrature nodes.
    pub per_x2: Vec<(f64, f64)>,
}

/// Per `x₂`: `(2πh)⁻¹∫_{−Ξ}^{Ξ} #{n : Λₙ < τ} dξ₂ − N·μh⁻¹∫_{−R}^{R} |F|·n dx₁`,
/// with unit-norm eigenvectors on the whole line, then integrated against `ψ₂`.
///
/// The windows are matched so that a level localized at `x₁` with `μV₂(x₁) = ξ₂`
/// lies inside both or neither.
pub fn correction_term(
    params: &ModelParams,
    psi2: &Cutoff,
    x1_extent: f64,
    tau: f64,
    opts: &IdsOptions,
) -> Result<Correction> {
    psi2.validate()?;
    if !(x1_extent > 0.0 && x1_extent.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "x1 extent {x1_extent} must be > 0"
        )));
    }
    let bands = FiberBands::new(params.clone(), FiberMode::Free, opts.settings)?;
    let r = x1_extent;
    let xi_max = params.mu * r.powi(params.nu as i32) / params.nu as f64;
    let field = WeylField::new(params, tau, opts.cut_constant)?;
    let window1 = Cutoff::indicator(-r, r)?;
    let pre_f = 1.0 / (2.0 * PI * params.h);
    let pre_w = WEYL_NORMALIZATION * params.mu / params.h;
    let at = |x2: f64| -> Result<(f64, f64, f64)> {
        let w = params.w.eval(x2);
        let li = bands.level_integral(tau + 0.5 * w, (-xi_max, xi_max), &Weight::Unit, opts)?;
        let wy = field.x1_integral(&window1, -r, r, w, opts)?;
        let (f, wv) = (pre_f * li.value, pre_w * wy.value);
        let roundoff = 64.0 * f64::EPSILON * (f.abs() + wv.abs());
        Ok((f, wv, pre_f * li.error + pre_w * wy.error + roundoff))
    };
    if params.w.is_constant() {
        let (f, w, e) = at(0.0)?;
        let m = psi2.integral();
        return Ok(Correction {
            value: m * (f - w),
            error: m * e,
            fiber: m * f,
            weyl: m * w,
            xi_window: xi_max,
            x1_window: r,
            per_x2: vec![(0.0, f - w)],
        });
    }
    let knots = psi2.knots();
    let panels = opts.x2_panels.max(1);
    let fine = composite_nodes(&knots, 2 * panels, opts.x2_order)?;
    let coarse = composite_nodes(&knots, panels, opts.x2_order)?;
    let eval = |nodes: &[(f64, f64)]| -> Result<Vec<(f64, f64, f64, f64, f64)>> {
        nodes
            .par_iter()
            .map(|&(x2, wt)| {
                let s = psi2.eval(x2);
                let (f, w, e) = at(x2)?;
                Ok((x2, wt * s, f, w, e))
            })
            .collect()
    };
    let sum = |rows: &[(f64, f64, f64, f64, f64)], k: usize| -> f64 {
        let v: Vec<f64> = rows
            .iter()
            .map(|r| {
                r.1 * match k {
                    0 => r.2 - r.3,
                    1 => r.2,
                    2 => r.3,
                    _ => r.4,
                }
            })
            .collect();
        pairwise_sum(&v)
    };
    let rf = eval(&fine)?;
    let rc = eval(&coarse)?;
    let value = sum(&rf, 0);
    Ok(Correction {
        value,
        error: sum(&rf, 3) + (value - sum(&rc, 0)).abs(),
        fiber: sum(&rf, 1),
        weyl: sum(&rf, 2),
        xi_window: xi_max,
        x1_window: r,
        per_x2: rf.iter().map(|r| (r.0, r.2 - r.3)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::Potential;

    #[test]
    fn vanishes_for_l0_odd_nu_in_gap() {
        let p = ModelParams::model(3, 0, 3000.0, 0.1, Potential::constant(1.0));
        let c = correction_term(&p, &Cutoff::standard(), 0.4, 0.0, &IdsOptions::default()).unwrap();
        assert!(c.value.abs() <= c.error.max(1e-12), "{c:?}");
        assert!(c.fiber > 1.0);
        assert_eq!(c.xi_window, 3000.0 * 0.4f64.powi(3) / 3.0);
    }

    #[test]
    fn rejects_bad_extent() {
        let p = ModelParams::model(3, 0, 3000.0, 0.1, Potential::constant(1.0));
        assert!(
            correction_term(&p, &Cutoff::standard(), 0.0, 0.0, &IdsOptions::default()).is_err()
        );
    }
}
