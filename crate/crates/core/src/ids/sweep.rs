use serde::{Deserialize, Serialize};

use super::correction::correction_term;
use super::cutoff::CutoffSpec;
use super::fiber::{fiber_ids, FiberBox, FiberMode, IdsOptions};
use super::weyl::weyl_ids;
use crate::error::Result;
use crate::operators::{ModelParams, Regime};
use crate::oracle2d::{oracle_ids, Box2D, DEFAULT_CAP};

/// Oracle box in units of the magnetic length `(h/μ)^{1/(ν+1)}`:
/// `x₁ ∈ [−x1_half, x1_half]`, `x₂ ∈ [x2_start, x2_start + x2_length]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleSpec {
    pub x1_half: f64,
    pub x2_start: f64,
    pub x2_length: f64,
    pub n1: usize,
    pub n2: usize,
    pub cap: usize,
}

impl Default for OracleSpec {
    fn default() -> Self {
        OracleSpec {
            x1_half: 4.0,
            x2_start: 0.0,
            x2_length: 12.0,
            n1: 200,
            n2: 200,
            cap: DEFAULT_CAP,
        }
    }
}

impl OracleSpec {
    pub fn box_for(&self, params: &ModelParams) -> Box2D {
        let s = params.magnetic_length();
        Box2D {
            x1: (-self.x1_half * s, self.x1_half * s),
            x2: (self.x2_start * s, (self.x2_start + self.x2_length) * s),
            n1: self.n1,
            n2: self.n2,
        }
    }

    /// Fiber mode with the same `x₁` grid and the `x₂` difference symbol.
    pub fn lattice_mode(&self, params: &ModelParams) -> Result<FiberMode> {
        let b = self.box_for(params);
        Ok(FiberMode::Box(FiberBox {
            x1: b.x1,
            n1: b.n1,
            dx2: Some(b.grid2()?.spacing()),
        }))
    }

    pub fn continuum_mode(&self, params: &ModelParams) -> FiberMode {
        let b = self.box_for(params);
        FiberMode::Box(FiberBox {
            x1: b.x1,
            n1: b.n1,
            dx2: None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepOptions {
    pub oracle: OracleSpec,
    pub ids: IdsOptions,
    /// Correction term on `x₁ ∈ [−R, R]`; skipped when `None`.
    pub correction_extent: Option<f64>,
    pub regime_eps: f64,
    pub regime_c0: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            oracle: OracleSpec::default(),
            ids: IdsOptions::default(),
            correction_extent: None,
            regime_eps: 1.0,
            regime_c0: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub params: ModelParams,
    pub regime: Regime,
    pub oracle: f64,
    /// Half-width of the oracle count interval.
    pub oracle_error: f64,
    pub fiber_ids: f64,
    pub weyl: f64,
    pub correction: Option<f64>,
    pub remainder_ri: f64,
    /// `R_I/(μ^{−1/ν}h^{−1})` in the sub-critical regime, `R_I` otherwise.
    pub normalized_remainder: f64,
    pub quadrature_error: f64,
    /// Lattice against continuum `x₂` symbol.
    pub discretization_error: f64,
    pub skipped: Option<String>,
}

impl SweepRecord {
    fn skipped(params: &ModelParams, regime: Regime, reason: String) -> Self {
        SweepRecord {
            params: params.clone(),
            regime,
            oracle: f64::NAN,
            oracle_error: f64::NAN,
            fiber_ids: f64::NAN,
            weyl: f64::NAN,
            correction: None,
            remainder_ri: f64::NAN,
            normalized_remainder: f64::NAN,
            quadrature_error: f64::NAN,
            discretization_error: f64::NAN,
            skipped: Some(reason),
        }
    }
}

/// One record: 2D oracle count on the box against the lattice fiber integral.
pub fn sweep_point(
    params: &ModelParams,
    psi: &CutoffSpec,
    tau: f64,
    opts: &SweepOptions,
) -> Result<SweepRecord> {
    let regime = params.regime(opts.regime_eps, opts.regime_c0);
    let bx = opts.oracle.box_for(params);
    let oracle = match oracle_ids(params, psi, &bx, tau, opts.oracle.cap) {
        Ok(o) => o,
        Err(e) => return Ok(SweepRecord::skipped(params, regime, e.to_string())),
    };
    let lattice = IdsOptions {
        mode: opts.oracle.lattice_mode(params)?,
        ..opts.ids
    };
    let continuum = IdsOptions {
        mode: opts.oracle.continuum_mode(params),
        ..opts.ids
    };
    let f = fiber_ids(params, psi, tau, &lattice)?;
    let c = fiber_ids(params, psi, tau, &continuum)?;
    let w = weyl_ids(params, psi, tau, &opts.ids)?;
    let correction = match opts.correction_extent {
        Some(r) => Some(correction_term(params, &psi.psi2, r, tau, &opts.ids)?.value),
        None => None,
    };
    let ri = (oracle.value - f.value).abs();
    let scale = params.mu.powf(-1.0 / params.nu as f64) / params.h;
    let normalized = match regime {
        Regime::SubCritical => ri / scale,
        _ => ri,
    };
    Ok(SweepRecord {
        params: params.clone(),
        regime,
        oracle: oracle.value,
        oracle_error: 0.5 * (oracle.hi - oracle.lo),
        fiber_ids: f.value,
        weyl: w.value,
        correction,
        remainder_ri: ri,
        normalized_remainder: normalized,
        quadrature_error: f.error,
        discretization_error: (f.value - c.value).abs(),
        skipped: None,
    })
}

/// Records for every parameter point, in input order. Infeasible oracle
/// sizes produce a skipped record with the reason.
pub fn remainder_sweep(
    param_list: &[ModelParams],
    psi_for: &(dyn Fn(&ModelParams) -> CutoffSpec + Sync),
    tau: f64,
    opts: &SweepOptions,
) -> Result<Vec<SweepRecord>> {
    param_list
        .iter()
        .map(|p| sweep_point(p, &psi_for(p), tau, opts))
        .collect()
}

/// Cutoff equal to 1 on the whole oracle box.
pub fn box_cutoff(params: &ModelParams, spec: &OracleSpec) -> CutoffSpec {
    let b = spec.box_for(params);
    CutoffSpec::rectangle(b.x1, b.x2).expect("box has positive size")
}

/// Bulk remainder with the `x₂` wall contribution cancelled: oracle and lattice
/// fiber counts on the box and on the box extended by `extra` lengths in `x₂`
/// with the same spacing are subtracted. Requires `W` constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BulkRemainder {
    pub short: SweepRecord,
    pub long: SweepRecord,
    pub oracle: f64,
    pub fiber_ids: f64,
    pub remainder: f64,
    pub quadrature_error: f64,
    pub discretization_error: f64,
    /// Change of the wall term between the two boxes, measured as the
    /// difference of the raw remainders.
    pub wall_term: f64,
}

impl BulkRemainder {
    pub fn error_budget(&self) -> f64 {
        self.quadrature_error + self.discretization_error
    }
}

pub fn bulk_remainder(
    params: &ModelParams,
    tau: f64,
    extra: usize,
    opts: &SweepOptions,
) -> Result<BulkRemainder> {
    if !params.w.is_constant() {
        return Err(crate::Error::InvalidParameter(
            "bulk remainder needs constant W".into(),
        ));
    }
    if extra == 0 {
        return Err(crate::Error::InvalidParameter("extra must be >= 1".into()));
    }
    let o = opts.oracle;
    let cells = (o.n2 + 1) as f64;
    let long_spec = OracleSpec {
        x2_length: o.x2_length * (1 + extra) as f64,
        n2: (o.n2 + 1) * (1 + extra) - 1,
        ..o
    };
    let long_opts = SweepOptions {
        oracle: long_spec,
        ..*opts
    };
    debug_assert!(
        (long_spec.x2_length / (long_spec.n2 + 1) as f64 - o.x2_length / cells).abs() < 1e-12
    );
    let short = sweep_point(params, &box_cutoff(params, &o), tau, opts)?;
    let long = sweep_point(params, &box_cutoff(params, &long_spec), tau, &long_opts)?;
    if let Some(r) = short.skipped.as_ref().or(long.skipped.as_ref()) {
        return Err(crate::Error::InvalidParameter(format!(
            "oracle skipped: {r}"
        )));
    }
    let oracle = long.oracle - short.oracle;
    let fiber = long.fiber_ids - short.fiber_ids;
    Ok(BulkRemainder {
        oracle,
        fiber_ids: fiber,
        remainder: (oracle - fiber).abs(),
        quadrature_error: short.quadrature_error + long.quadrature_error,
        discretization_error: short.discretization_error + long.discretization_error,
        wall_term: (long.oracle - long.fiber_ids) - (short.oracle - short.fiber_ids),
        short,
        long,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::Potential;

    fn small() -> SweepOptions {
        SweepOptions {
            oracle: OracleSpec {
                x1_half: 2.5,
                x2_start: 0.0,
                x2_length: 3.0,
                n1: 70,
                n2: 47,
                cap: DEFAULT_CAP,
            },
            ..SweepOptions::default()
        }
    }

    #[test]
    fn record_is_consistent() {
        let p = ModelParams::model(2, 1, 100.0, 0.1, Potential::constant(1.0));
        let o = small();
        let r = sweep_point(&p, &box_cutoff(&p, &o.oracle), 0.0, &o).unwrap();
        assert!(r.skipped.is_none(), "{:?}", r.skipped);
        assert_eq!(r.oracle, r.oracle.round());
        assert!((r.remainder_ri - (r.oracle - r.fiber_ids).abs()).abs() < 1e-12);
        assert_eq!(r.regime, Regime::SubCritical);
        assert!(r.fiber_ids > 0.0 && r.quadrature_error >= 0.0);
    }

    #[test]
    fn oversize_box_is_skipped() {
        let p = ModelParams::model(2, 1, 100.0, 0.1, Potential::constant(1.0));
        let mut o = small();
        o.oracle.cap = 100;
        let r = remainder_sweep(&[p.clone()], &|q| box_cutoff(q, &o.oracle), 0.0, &o).unwrap();
        assert!(r[0].skipped.is_some() && r[0].oracle.is_nan());
    }

    #[test]
    fn bulk_remainder_splits_wall_term() {
        let p = ModelParams::model(2, 1, 100.0, 0.1, Potential::constant(1.0));
        let b = bulk_remainder(&p, 0.0, 1, &small()).unwrap();
        let raw = b.long.oracle - b.long.fiber_ids;
        assert!((raw - (b.short.oracle - b.short.fiber_ids) - b.wall_term).abs() < 1e-12);
        assert_eq!(b.long.params.mu, p.mu);
        let sine = ModelParams::model(
            2,
            1,
            100.0,
            0.1,
            Potential::Sine {
                offset: 1.0,
                amplitude: 0.5,
                wavelength: 1.0,
            },
        );
        assert!(bulk_remainder(&sine, 0.0, 1, &small()).is_err());
    }
}
