//! Brute-force counts for the two-dimensional model operator on a rectangle.
//!
//! The operator `½(h²D₁² + (hD₂ − μx₁^ν/ν)² − (2l+1)μh x₁^{ν−1} − W(x₂))` is
//! discretized on interior nodes of a Dirichlet box, `x₁` index fastest. The
//! square is expanded, `D₂` becomes the centered difference and the matrix is
//! Hermitian with bandwidth `n1`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eigensolve::BandedMatrix;
use crate::error::{Error, Result};
use crate::ids::CutoffSpec;
use crate::operators::{Grid1D, ModelParams};

pub const DEFAULT_CAP: usize = 250_000;
pub const DENSE_CAP: usize = 6_000;
/// Required grid points per local magnetic length.
pub const POINTS_PER_LENGTH: f64 = 8.0;

/// Rectangle with Dirichlet walls at the range ends and `n1 × n2` interior nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Box2D {
    pub x1: (f64, f64),
    pub x2: (f64, f64),
    pub n1: usize,
    pub n2: usize,
}

impl Box2D {
    pub fn grid1(&self) -> Result<Grid1D> {
        Grid1D::new(self.x1.0, self.x1.1, self.n1)
    }

    pub fn grid2(&self) -> Result<Grid1D> {
        Grid1D::new(self.x2.0, self.x2.1, self.n2)
    }

    pub fn dim(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn validate(&self, cap: usize) -> Result<()> {
        self.grid1()?;
        self.grid2()?;
        if self.dim() > cap {
            return Err(Error::CapExceeded {
                size: self.dim(),
                cap,
            });
        }
        Ok(())
    }

    /// Same box with `pad` added on every side and the spacing kept.
    pub fn padded(&self, pad1: f64, pad2: f64) -> Result<Self> {
        let (g1, g2) = (self.grid1()?, self.grid2()?);
        let extra = |pad: f64, d: f64| (pad / d).round() as usize;
        let (e1, e2) = (extra(pad1, g1.spacing()), extra(pad2, g2.spacing()));
        let (p1, p2) = (e1 as f64 * g1.spacing(), e2 as f64 * g2.spacing());
        Ok(Box2D {
            x1: (self.x1.0 - p1, self.x1.1 + p1),
            x2: (self.x2.0 - p2, self.x2.1 + p2),
            n1: self.n1 + 2 * e1,
            n2: self.n2 + 2 * e2,
        })
    }
}

/// Smallest magnetic length on the box: the degeneration-line scale
/// `(h/μ)^{1/(ν+1)}` or `(h/(μ|F|))^{1/2}` at the largest field.
pub fn local_magnetic_length(params: &ModelParams, bx: &Box2D) -> f64 {
    let fmax = bx.x1.0.abs().max(bx.x1.1.abs()).powi(params.nu as i32 - 1);
    let line = params.magnetic_length();
    let strong = (params.h / (params.mu * fmax)).sqrt();
    line.min(strong)
}

/// Hermitian banded discretization of the model operator on `bx`.
pub fn build_2d(params: &ModelParams, bx: &Box2D, cap: usize) -> Result<BandedMatrix> {
    params.validate()?;
    if !params.is_model() {
        return Err(Error::InvalidParameter(
            "the 2D oracle needs sigma = phi = 1".into(),
        ));
    }
    bx.validate(cap)?;
    let (g1, g2) = (bx.grid1()?, bx.grid2()?);
    let (d1, d2) = (g1.spacing(), g2.spacing());
    let ell = local_magnetic_length(params, bx);
    if d1.max(d2) * POINTS_PER_LENGTH > ell {
        return Err(Error::UnderResolved(format!(
            "spacing {:.3e} exceeds 1/{POINTS_PER_LENGTH} of the magnetic length {ell:.3e}",
            d1.max(d2)
        )));
    }
    let (mu, h) = (params.mu, params.h);
    let lf = (2 * params.ell + 1) as f64;
    let (n1, n2) = (bx.n1, bx.n2);
    let mut m = BandedMatrix::new(n1 * n2, n1);
    let t1 = -h * h / (2.0 * d1 * d1);
    let t2 = -h * h / (2.0 * d2 * d2);
    let x1: Vec<f64> = g1.points().collect();
    let v: Vec<f64> = x1.iter().map(|&x| params.vector_potential(x)).collect();
    for j in 0..n2 {
        let w = params.w.eval(g2.point(j));
        for i in 0..n1 {
            let p = j * n1 + i;
            let diag = 0.5
                * (h * h * (2.0 / (d1 * d1) + 2.0 / (d2 * d2)) + mu * mu * v[i] * v[i]
                    - lf * mu * h * params.field(x1[i])
                    - w);
            m.set(p, p, Complex64::new(diag, 0.0));
            if i > 0 {
                m.set(p, p - 1, Complex64::new(t1, 0.0));
            }
            if j > 0 {
                // A[p − n1][p] = t2 + iμVh/(2Δ₂), stored as its conjugate
                m.set(p, p - n1, Complex64::new(t2, -mu * v[i] * h / (2.0 * d2)));
            }
        }
    }
    m.check_finite()?;
    Ok(m)
}

/// Eigenvalue count below `τ`, as an interval when pivots had to be perturbed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Count2D {
    pub count: usize,
    pub lo: usize,
    pub hi: usize,
}

pub fn count_below_2d(matrix: &BandedMatrix, tau: f64) -> Result<Count2D> {
    let r = matrix.inertia_below(tau)?;
    let k = r.perturbed.len();
    Ok(Count2D {
        count: r.negative,
        lo: r.negative.saturating_sub(k),
        hi: r.negative + k,
    })
}

/// Counts at `τ ∓ delta`, bracketing levels within `delta` of `τ`.
pub fn count_interval(matrix: &BandedMatrix, tau: f64, delta: f64) -> Result<Count2D> {
    let lo = count_below_2d(matrix, tau - delta)?;
    let mid = count_below_2d(matrix, tau)?;
    let hi = count_below_2d(matrix, tau + delta)?;
    Ok(Count2D {
        count: mid.count,
        lo: lo.lo,
        hi: hi.hi,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    Inertia,
    Dense,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleIds {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    pub method: OracleMethod,
}

/// `Σ_{λ<τ} ⟨ψv, v⟩` over the box eigenpairs.
///
/// When `ψ ≡ 1` on the box this is the inertia count; otherwise the matrix is
/// diagonalized densely, which is limited to [`DENSE_CAP`] unknowns.
pub fn oracle_ids(
    params: &ModelParams,
    psi: &CutoffSpec,
    bx: &Box2D,
    tau: f64,
    cap: usize,
) -> Result<OracleIds> {
    let m = build_2d(params, bx, cap)?;
    if psi.psi1.covers(bx.x1.0, bx.x1.1) && psi.psi2.covers(bx.x2.0, bx.x2.1) {
        let c = count_below_2d(&m, tau)?;
        return Ok(OracleIds {
            value: c.count as f64,
            lo: c.lo as f64,
            hi: c.hi as f64,
            method: OracleMethod::Inertia,
        });
    }
    if m.dim() > DENSE_CAP {
        return Err(Error::CapExceeded {
            size: m.dim(),
            cap: DENSE_CAP,
        });
    }
    let (g1, g2) = (bx.grid1()?, bx.grid2()?);
    let weight: Vec<f64> = (0..m.dim())
        .map(|p| psi.eval(g1.point(p % bx.n1), g2.point(p / bx.n1)))
        .collect();
    let dense: DMatrix<Complex64> = m.to_dense();
    let eig = dense.symmetric_eigen();
    let mut parts = Vec::new();
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam < tau {
            let col = eig.eigenvectors.column(k);
            parts.push(
                col.iter()
                    .zip(weight.iter())
                    .map(|(z, w)| w * z.norm_sqr())
                    .sum::<f64>(),
            );
        }
    }
    parts.sort_by(f64::total_cmp);
    let value = crate::ids::pairwise_sum(&parts);
    Ok(OracleIds {
        value,
        lo: value,
        hi: value,
        method: OracleMethod::Dense,
    })
}
