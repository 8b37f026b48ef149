use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// 7-point Gauss weights at XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

fn gk15(f: &dyn Fn(f64) -> Result<f64>, lo: f64, hi: f64) -> Result<Cell> {
    let c = 0.5 * (lo + hi);
    let r = 0.5 * (hi - lo);
    let fc = f(c)?;
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let d = r * XGK[j];
        let s = f(c - d)? + f(c + d)?;
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    Ok(Cell {
        lo,
        hi,
        value: k * r,
        error: ((k - g) * r).abs(),
    })
}

/// Fixed-order pairwise sum.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n => pairwise_sum(&v[..n / 2]) + pairwise_sum(&v[n / 2..]),
    }
}

/// Globally adaptive Gauss–Kronrod (7/15) integration over `[a, b]`.
///
/// `breaks` are forced cell boundaries; points outside `(a, b)` are ignored.
/// The cell with the largest error estimate is bisected until the total error is
/// below `max(abs_tol, rel_tol·|value|)` or `max_cells` is reached.
pub fn integrate_adaptive(
    f: &dyn Fn(f64) -> Result<f64>,
    a: f64,
    b: f64,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_cells: usize,
) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "interval [{a}, {b}] not finite"
        )));
    }
    if a >= b {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut cells = Vec::with_capacity(pts.len());
    for w in pts.windows(2) {
        if w[1] > w[0] {
            cells.push(gk15(f, w[0], w[1])?);
        }
    }
    let mut evaluations = 15 * cells.len();
    loop {
        let value = pairwise_sum(&cells.iter().map(|c| c.value).collect::<Vec<_>>());
        let error = pairwise_sum(&cells.iter().map(|c| c.error).collect::<Vec<_>>());
        if error <= abs_tol.max(rel_tol * value.abs()) {
            cells.sort_by(|x, y| x.lo.total_cmp(&y.lo));
            let value = pairwise_sum(&cells.iter().map(|c| c.value).collect::<Vec<_>>());
            return Ok(QuadResult {
                value,
                error,
                evaluations,
            });
        }
        let (i, worst) = cells
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, c)| (i, *c))
            .expect("at least one cell");
        let mid = 0.5 * (worst.lo + worst.hi);
        if cells.len() >= max_cells || !(mid > worst.lo && mid < worst.hi) {
            return Err(Error::Quadrature {
                lo: worst.lo,
                hi: worst.hi,
                error: worst.error,
            });
        }
        cells[i] = gk15(f, worst.lo, mid)?;
        cells.push(gk15(f, mid, worst.hi)?);
        evaluations += 30;
    }
}

/// Composite Gauss–Legendre rule with `panels` equal panels between consecutive
/// `knots`; the error is estimated against the rule with doubled panels.
pub fn composite_gauss_legendre(
    f: &dyn Fn(f64) -> Result<f64>,
    knots: &[f64],
    panels: usize,
    order: usize,
) -> Result<QuadResult> {
    let order = NonZeroUsize::new(order)
        .ok_or_else(|| Error::InvalidParameter("quadrature order must be positive".into()))?;
    if panels == 0 {
        return Err(Error::InvalidParameter("need at least one panel".into()));
    }
    let rule = GaussLegendre::new(order);
    let run = |panels: usize| -> Result<f64> {
        let mut parts = Vec::new();
        for w in knots.windows(2) {
            let h = (w[1] - w[0]) / panels as f64;
            for p in 0..panels {
                let lo = w[0] + p as f64 * h;
                let hi = lo + h;
                for &(x, wt) in rule.as_node_weight_pairs() {
                    let t = 0.5 * (lo + hi) + 0.5 * h * x;
                    parts.push(0.5 * h * wt * f(t)?);
                }
            }
        }
        Ok(pairwise_sum(&parts))
    };
    let coarse = run(panels)?;
    let fine = run(2 * panels)?;
    Ok(QuadResult {
        value: fine,
        error: (fine - coarse).abs(),
        evaluations: 3 * panels * order.get() * knots.len().saturating_sub(1),
    })
}

/// Nodes and weights of the composite rule, for callers that evaluate in parallel.
pub fn composite_nodes(knots: &[f64], panels: usize, order: usize) -> Result<Vec<(f64, f64)>> {
    let order = NonZeroUsize::new(order)
        .ok_or_else(|| Error::InvalidParameter("quadrature order must be positive".into()))?;
    let rule = GaussLegendre::new(order);
    let mut out = Vec::new();
    for w in knots.windows(2) {
        let h = (w[1] - w[0]) / panels.max(1) as f64;
        for p in 0..panels.max(1) {
            let lo = w[0] + p as f64 * h;
            for &(x, wt) in rule.as_node_weight_pairs() {
                out.push((lo + 0.5 * h * (1.0 + x), 0.5 * h * wt));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk_exact_on_polynomials() {
        let f = |x: f64| Ok(x.powi(20) - 3.0 * x.powi(7));
        let r = integrate_adaptive(&f, -1.0, 1.0, &[], 1e-12, 0.0, 10).unwrap();
        assert!((r.value - 2.0 / 21.0).abs() < 1e-14);
    }

    #[test]
    fn breakpoints_make_steps_exact() {
        let f = |x: f64| Ok(if x < 0.3 { 1.0 } else { 3.0 });
        let r = integrate_adaptive(&f, 0.0, 1.0, &[0.3], 1e-15, 0.0, 4).unwrap();
        assert!((r.value - (0.3 + 2.1)).abs() < 1e-14);
        assert!(r.error < 1e-14);
    }

    #[test]
    fn adaptive_handles_kink() {
        let f = |x: f64| Ok((x - 0.123).abs().sqrt());
        let r = integrate_adaptive(&f, 0.0, 1.0, &[], 1e-9, 0.0, 400).unwrap();
        let exact = (2.0 / 3.0) * (0.123f64.powf(1.5) + 0.877f64.powf(1.5));
        assert!((r.value - exact).abs() < 1e-8);
        assert!((r.value - exact).abs() <= r.error.max(1e-12) * 10.0);
    }

    #[test]
    fn budget_exhaustion_reports_cell() {
        let f = |x: f64| Ok(1.0 / x.abs().max(1e-300).sqrt());
        let e = integrate_adaptive(&f, -1.0, 1.0, &[], 1e-14, 0.0, 8).unwrap_err();
        assert!(matches!(e, Error::Quadrature { .. }));
    }

    #[test]
    fn composite_rule_converges() {
        let f = |x: f64| Ok(x.exp());
        let r = composite_gauss_legendre(&f, &[0.0, 0.5, 1.0], 2, 8).unwrap();
        assert!((r.value - (1f64.exp() - 1.0)).abs() < 1e-14);
        let n = composite_nodes(&[0.0, 1.0], 3, 5).unwrap();
        let s: f64 = n.iter().map(|(x, w)| w * x * x).sum();
        assert!((s - 1.0 / 3.0).abs() < 1e-14);
    }
}
