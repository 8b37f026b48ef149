use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cutoff::{Cutoff, CutoffSpec};
use super::fiber::IdsOptions;
use super::quadrature::{composite_nodes, integrate_adaptive, pairwise_sum, QuadResult};
use crate::eigensolve::sturm_count;
use crate::error::{Error, Result};
use crate::operators::{Grid1D, ModelParams, OperatorMeta, ScalingTag, TridiagOperator};

/// Density of states per Landau level is `WEYL_NORMALIZATION·μ|F|/h`, as
/// returned by [`calibrate_weyl_normalization`].
pub const WEYL_NORMALIZATION: f64 = 1.0 / (2.0 * PI);
/// Normalization written with the `l_±` count.
pub const LEVEL_COUNT_NORMALIZATION: f64 = 1.0 / (4.0 * PI);

/// Landau levels of the constant-field comparison operator below `τ`:
/// `#{n ≥ 0 : ½μh(|F|(2n+1) − (2l+1)F) − ½W < τ}`.
pub fn landau_count(mu: f64, h: f64, ell: u32, field: f64, w: f64, tau: f64) -> Option<usize> {
    if field == 0.0 {
        return None;
    }
    let c = 2.0 * tau + w;
    let f = field.abs();
    // (2n+1)|F| − (2l+1)F < c/(μh)
    let a = if field > 0.0 {
        ell as f64 + c / (2.0 * mu * h * f)
    } else {
        c / (2.0 * mu * h * f) - ell as f64 - 1.0
    };
    if a <= 0.0 {
        Some(0)
    } else {
        Some(a.ceil() as usize)
    }
}

/// Magnetic Weyl integral and its level-count field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylIds {
    pub value: f64,
    pub error: f64,
    /// `(1/4π)·μh⁻¹·l_±·∫ψ|F|` when `W` has one sign on `supp ψ₂`.
    pub level_count_value: Option<f64>,
    pub l_pm: Option<i64>,
    pub cut_radius: f64,
    /// `(x₁, count)` samples at the center of `supp ψ₂`.
    pub count_field: Vec<(f64, usize)>,
}

pub struct WeylField<'a> {
    params: &'a ModelParams,
    tau: f64,
    cut: f64,
}

impl<'a> WeylField<'a> {
    pub fn new(params: &'a ModelParams, tau: f64, cut_constant: f64) -> Result<Self> {
        params.validate()?;
        let cut = cut_constant * (params.mu * params.h).powf(-1.0 / (params.nu as f64 - 1.0));
        Ok(WeylField { params, tau, cut })
    }

    pub fn cut_radius(&self) -> f64 {
        self.cut
    }

    /// Count at `x₁`; inside the cut the count of the cut radius is used.
    pub fn count(&self, x1: f64, w: f64) -> usize {
        let p = self.params;
        let r = if x1.abs() < self.cut {
            self.cut.copysign(if x1 == 0.0 { 1.0 } else { x1 })
        } else {
            x1
        };
        landau_count(p.mu, p.h, p.ell, p.field(r), w, self.tau).unwrap_or(0)
    }

    /// `∫ ψ₁ |F| n(x₁) dx₁` over `[a, b]` at fixed `W`.
    pub fn x1_integral(
        &self,
        psi1: &Cutoff,
        a: f64,
        b: f64,
        w: f64,
        opts: &IdsOptions,
    ) -> Result<QuadResult> {
        let p = self.params;
        let mut knots: Vec<f64> = psi1.knots();
        knots.extend([0.0, -self.cut, self.cut]);
        let m = opts.scan_points.max(16) * 2;
        let xs: Vec<f64> = (0..=m).map(|i| a + (b - a) * i as f64 / m as f64).collect();
        let tol = 1e-13 * (b - a);
        for pair in xs.windows(2) {
            let (mut lo, mut hi) = (pair[0], pair[1]);
            let (c_lo, c_hi) = (self.count(lo, w), self.count(hi, w));
            if c_lo == c_hi {
                continue;
            }
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                if self.count(mid, w) == c_lo {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            knots.push(0.5 * (lo + hi));
        }
        let f = |x: f64| Ok(psi1.eval(x) * p.field(x).abs() * self.count(x, w) as f64);
        integrate_adaptive(&f, a, b, &knots, opts.abs_tol, opts.rel_tol, opts.max_cells)
    }
}

/// `N·μh⁻¹ ∫ψ|F|·n dx` over `x₁ ∈ [a, b]`, integrated against `ψ₂`.
pub fn weyl_on_window(
    params: &ModelParams,
    psi: &CutoffSpec,
    x1: (f64, f64),
    tau: f64,
    opts: &IdsOptions,
) -> Result<(f64, f64)> {
    let field = WeylField::new(params, tau, opts.cut_constant)?;
    let pre = WEYL_NORMALIZATION * params.mu / params.h;
    if params.w.is_constant() {
        let w = params.w.eval(0.0);
        let r = field.x1_integral(&psi.psi1, x1.0, x1.1, w, opts)?;
        let m = psi.psi2.integral();
        return Ok((pre * m * r.value, pre * m * r.error));
    }
    let knots = psi.psi2.knots();
    let panels = opts.x2_panels.max(1);
    let run = |nodes: Vec<(f64, f64)>| -> Result<(f64, f64)> {
        let rows: Vec<(f64, f64)> = nodes
            .par_iter()
            .map(|&(x2, wt)| {
                let s = psi.psi2.eval(x2);
                if s == 0.0 {
                    return Ok((0.0, 0.0));
                }
                let r = field.x1_integral(&psi.psi1, x1.0, x1.1, params.w.eval(x2), opts)?;
                Ok((wt * s * r.value, wt * s * r.error))
            })
            .collect::<Result<_>>()?;
        Ok((
            pairwise_sum(&rows.iter().map(|r| r.0).collect::<Vec<_>>()),
            pairwise_sum(&rows.iter().map(|r| r.1).collect::<Vec<_>>()),
        ))
    };
    let (vc, _) = run(composite_nodes(&knots, panels, opts.x2_order)?)?;
    let (vf, ef) = run(composite_nodes(&knots, 2 * panels, opts.x2_order)?)?;
    Ok((pre * vf, pre * (ef + (vf - vc).abs())))
}

/// Magnetic Weyl term `N·μh⁻¹ ∫ψ|F|·n(x) dx` with the calibrated `N`.
pub fn weyl_ids(
    params: &ModelParams,
    psi: &CutoffSpec,
    tau: f64,
    opts: &IdsOptions,
) -> Result<WeylIds> {
    psi.validate()?;
    let (a, b) = psi.psi1.support();
    let (value, error) = weyl_on_window(params, psi, (a, b), tau, opts)?;
    let field = WeylField::new(params, tau, opts.cut_constant)?;
    let (lo2, hi2) = psi.psi2.support();
    let (wmin, wmax) = params.w.range_on(lo2, hi2);
    let l_pm = if wmin > 0.0 {
        Some(params.ell as i64)
    } else if wmax < 0.0 {
        Some(params.ell as i64 - 1)
    } else {
        None
    };
    let level_count_value = match l_pm {
        Some(l) => {
            let f = |x: f64| Ok(psi.psi1.eval(x) * params.field(x).abs());
            let r = integrate_adaptive(&f, a, b, &psi.psi1.knots(), 1e-12, 1e-12, 2000)?;
            Some(
                LEVEL_COUNT_NORMALIZATION * params.mu / params.h
                    * l as f64
                    * r.value
                    * psi.psi2.integral(),
            )
        }
        None => None,
    };
    let w_mid = params.w.eval(0.5 * (lo2 + hi2));
    let count_field = (0..=64)
        .map(|i| {
            let x = a + (b - a) * i as f64 / 64.0;
            (x, field.count(x, w_mid))
        })
        .collect();
    Ok(WeylIds {
        value,
        error,
        level_count_value,
        l_pm,
        cut_radius: field.cut_radius(),
        count_field,
    })
}

/// Brute-force Landau density for the constant field `F = 1`: levels of the
/// discretized fiber `½(h²D² + (ξ − μx)²)` on `[−1, 1]` are counted below `τ`
/// and integrated over the centers `ξ/μ ∈ [−1, 1]`. Returns the ratio of the
/// resulting density to `μh⁻¹·#{levels below τ}`.
pub fn calibrate_weyl_normalization(
    mu: f64,
    h: f64,
    tau: f64,
    n: usize,
    samples: usize,
) -> Result<f64> {
    if !(mu > 0.0 && h > 0.0 && tau > 0.5 * mu * h) {
        return Err(Error::InvalidParameter(
            "calibration needs tau above the lowest Landau level".into(),
        ));
    }
    let grid = Grid1D::new(-1.0, 1.0, n)?;
    let levels = landau_count(mu, h, 0, 1.0, 0.0, tau).unwrap_or(0);
    let counts: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let xi = mu * (-1.0 + 2.0 * (i as f64 + 0.5) / samples as f64);
            let meta = OperatorMeta {
                eta: xi,
                nu: 1,
                ell: 0,
                tag: ScalingTag::Fiber,
            };
            let op = TridiagOperator::from_potential(grid, h * h, |x| (xi - mu * x).powi(2), meta)?
                .scaled(0.5);
            Ok(sturm_count(&op.diag, &op.offdiag, tau) as f64)
        })
        .collect::<Result<_>>()?;
    // ∫dξ N(ξ)/(2πh), per unit length in x₁
    let integral = pairwise_sum(&counts) * (2.0 * mu / samples as f64);
    let density = integral / (2.0 * PI * h) / 2.0;
    Ok(density / (mu / h * levels as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::Potential;

    #[test]
    fn count_field_is_l_plus_one_or_l() {
        // bulk with μh|F| ≫ |W|
        for ell in 0..4u32 {
            assert_eq!(
                landau_count(100.0, 0.1, ell, 1.0, 1.0, 0.0),
                Some(ell as usize + 1)
            );
            assert_eq!(
                landau_count(100.0, 0.1, ell, 1.0, -1.0, 0.0),
                Some(ell as usize)
            );
            assert_eq!(landau_count(100.0, 0.1, ell, -1.0, 1.0, 0.0), Some(0));
        }
        assert_eq!(landau_count(1.0, 1.0, 0, 0.0, 1.0, 0.0), None);
    }

    #[test]
    fn calibration_reproduces_frozen_constant() {
        let c = calibrate_weyl_normalization(400.0, 0.01, 8.0, 2000, 800).unwrap();
        assert!((c / WEYL_NORMALIZATION - 1.0).abs() < 0.02, "{c}");
    }

    fn opts() -> IdsOptions {
        IdsOptions::default()
    }

    #[test]
    fn scales_linearly_in_mu_over_h() {
        let psi = CutoffSpec::standard();
        let p1 = ModelParams::model(3, 1, 400.0, 0.05, Potential::constant(1.0));
        let p2 = ModelParams::model(3, 1, 800.0, 0.05, Potential::constant(1.0));
        let a = weyl_ids(&p1, &psi, 0.0, &opts()).unwrap();
        let b = weyl_ids(&p2, &psi, 0.0, &opts()).unwrap();
        // only the cut zone and the level edges near x₁ = 0 break exact linearity
        let ratio = b.value / a.value;
        assert!((ratio - 2.0).abs() < 0.1, "{ratio}");
        assert!(b.cut_radius < a.cut_radius);
    }

    #[test]
    fn count_field_matches_l_pm_structure() {
        let psi = CutoffSpec::standard();
        let plus = ModelParams::model(2, 1, 1e4, 0.01, Potential::constant(1.0));
        let minus = ModelParams::model(2, 1, 1e4, 0.01, Potential::constant(-1.0));
        let a = weyl_ids(&plus, &psi, 0.0, &opts()).unwrap();
        let b = weyl_ids(&minus, &psi, 0.0, &opts()).unwrap();
        assert_eq!(a.l_pm, Some(1));
        assert_eq!(b.l_pm, Some(0));
        for (&(x, na), &(_, nb)) in a.count_field.iter().zip(b.count_field.iter()) {
            if x > 0.2 {
                assert_eq!(na, 2);
                assert_eq!(nb, 1);
            }
            if x < -0.2 {
                assert_eq!(na, 0);
                assert_eq!(nb, 0);
            }
        }
        assert!(b.value < a.value);
    }

    #[test]
    fn partition_of_unity_is_additive() {
        let p = ModelParams::model(
            3,
            1,
            400.0,
            0.05,
            Potential::Sine {
                offset: 1.0,
                amplitude: 0.5,
                wavelength: 1.0,
            },
        );
        let psi2 = Cutoff::indicator(-0.3, 0.3).unwrap();
        let whole = CutoffSpec::new(Cutoff::indicator(-0.4, 0.4).unwrap(), psi2).unwrap();
        let left = CutoffSpec::new(Cutoff::indicator(-0.4, 0.1).unwrap(), psi2).unwrap();
        let right = CutoffSpec::new(Cutoff::indicator(0.1, 0.4).unwrap(), psi2).unwrap();
        let o = opts();
        let w = weyl_ids(&p, &whole, 0.0, &o).unwrap();
        let l = weyl_ids(&p, &left, 0.0, &o).unwrap();
        let r = weyl_ids(&p, &right, 0.0, &o).unwrap();
        let tol = 10.0 * (w.error + l.error + r.error) + 1e-9 * w.value;
        assert!((l.value + r.value - w.value).abs() < tol);
    }
}
