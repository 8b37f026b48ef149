use super::sturm::{eigen_lowest_k, EigenResult};
use crate::error::{Error, Result};
use crate::operators::{Grid1D, TridiagOperator};

/// Second-order Richardson extrapolation from a grid and its refinement
/// (`n → 2n + 1` on the same interval, so the spacing halves).
pub fn refine_richardson(
    build: &dyn Fn(&Grid1D) -> Result<TridiagOperator>,
    k: usize,
    coarse: &Grid1D,
    fine: &Grid1D,
    rtol: f64,
) -> Result<EigenResult> {
    let same_interval = coarse.x_min == fine.x_min && coarse.x_max == fine.x_max;
    if !same_interval || fine.n != 2 * coarse.n + 1 {
        return Err(Error::InvalidGrid(format!(
            "fine grid must be the refinement of the coarse one ({} / {})",
            coarse.n, fine.n
        )));
    }
    let c = eigen_lowest_k(&build(coarse)?, k, rtol)?;
    let f = eigen_lowest_k(&build(fine)?, k, rtol)?;
    let mut values = Vec::with_capacity(k);
    let mut errors = Vec::with_capacity(k);
    for j in 0..k {
        let delta = f.values[j] - c.values[j];
        values.push(f.values[j] + delta / 3.0);
        errors.push(delta.abs() / 3.0 + f.error_estimates[j] + c.error_estimates[j]);
    }
    Ok(EigenResult {
        values,
        error_estimates: errors,
        grid_used: Some(*fine),
        residual_norms: None,
        ties: c.ties || f.ties,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{OperatorMeta, ScalingTag};

    fn harmonic(g: &Grid1D) -> Result<TridiagOperator> {
        let meta = OperatorMeta {
            eta: 0.0,
            nu: 2,
            ell: 0,
            tag: ScalingTag::Custom,
        };
        TridiagOperator::from_potential(*g, 1.0, |x| x * x, meta)
    }

    #[test]
    fn extrapolation_improves_accuracy() {
        let g = Grid1D::new(-9.0, 9.0, 299).unwrap();
        let plain = eigen_lowest_k(&harmonic(&g.refined()).unwrap(), 3, 1e-14).unwrap();
        let r = refine_richardson(&harmonic, 3, &g, &g.refined(), 1e-14).unwrap();
        for n in 0..3 {
            let exact = (2 * n + 1) as f64;
            let e_plain = (plain.values[n] - exact).abs();
            let e_rich = (r.values[n] - exact).abs();
            assert!(e_rich < 0.05 * e_plain, "{n}: {e_rich} vs {e_plain}");
            assert!(e_rich <= 10.0 * r.error_estimates[n] + 1e-10);
        }
    }

    #[test]
    fn rejects_unrelated_grids() {
        let g = Grid1D::new(-9.0, 9.0, 299).unwrap();
        let h = Grid1D::new(-8.0, 9.0, 599).unwrap();
        assert!(refine_richardson(&harmonic, 1, &g, &h, 1e-12).is_err());
    }
}
