use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar potential `W(x₂)` in energy units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Potential {
    Constant {
        value: f64,
    },
    Affine {
        offset: f64,
        slope: f64,
    },
    /// `offset + amplitude * sin(2π x / wavelength)`
    Sine {
        offset: f64,
        amplitude: f64,
        wavelength: f64,
    },
    /// Coefficients in increasing degree.
    Poly {
        coeffs: Vec<f64>,
    },
}

impl Potential {
    pub fn constant(value: f64) -> Self {
        Potential::Constant { value }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Potential::Constant { value } => *value,
            Potential::Affine { offset, slope } => offset + slope * x,
            Potential::Sine {
                offset,
                amplitude,
                wavelength,
            } => offset + amplitude * (std::f64::consts::TAU * x / wavelength).sin(),
            Potential::Poly { coeffs } => horner(coeffs, x),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            Potential::Constant { .. } => 0.0,
            Potential::Affine { slope, .. } => *slope,
            Potential::Sine {
                amplitude,
                wavelength,
                ..
            } => {
                let k = std::f64::consts::TAU / wavelength;
                amplitude * k * (k * x).cos()
            }
            Potential::Poly { coeffs } => {
                let d: Vec<f64> = coeffs
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(i, c)| c * i as f64)
                    .collect();
                horner(&d, x)
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Potential::Constant { .. } => true,
            Potential::Affine { slope, .. } => *slope == 0.0,
            Potential::Sine { amplitude, .. } => *amplitude == 0.0,
            Potential::Poly { coeffs } => coeffs.iter().skip(1).all(|c| *c == 0.0),
        }
    }

    /// Sampled range of `W` on `[lo, hi]`.
    pub fn range_on(&self, lo: f64, hi: f64) -> (f64, f64) {
        let m = 257;
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for i in 0..m {
            let x = lo + (hi - lo) * i as f64 / (m - 1) as f64;
            let w = self.eval(x);
            min = min.min(w);
            max = max.max(w);
        }
        (min, max)
    }
}

/// Polynomial coefficient function of `x₁` normalized to 1 at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientFn {
    pub coeffs: Vec<f64>,
}

impl CoefficientFn {
    pub fn one() -> Self {
        CoefficientFn { coeffs: vec![1.0] }
    }

    pub fn eval(&self, x: f64) -> f64 {
        horner(&self.coeffs, x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let d: Vec<f64> = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * i as f64)
            .collect();
        horner(&d, x)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.first() == Some(&1.0) && self.coeffs.iter().skip(1).all(|c| *c == 0.0)
    }
}

impl Default for CoefficientFn {
    fn default() -> Self {
        Self::one()
    }
}

pub(crate) fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Size of `μ h^ν` relative to the regime thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    SubCritical,
    Critical,
    SuperCritical,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::SubCritical => "sub-critical",
            Regime::Critical => "critical",
            Regime::SuperCritical => "super-critical",
        };
        f.write_str(s)
    }
}

/// Physical and geometric parameters of the operator family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub nu: u32,
    pub ell: u32,
    pub mu: f64,
    pub h: f64,
    pub w: Potential,
    #[serde(default)]
    pub alpha: [f64; 3],
    #[serde(default)]
    pub beta: [f64; 3],
    #[serde(default)]
    pub sigma: CoefficientFn,
    #[serde(default)]
    pub phi: CoefficientFn,
}

impl ModelParams {
    /// Model operator with `σ = φ = 1` and no `(α, β)` deformation.
    pub fn model(nu: u32, ell: u32, mu: f64, h: f64, w: Potential) -> Self {
        ModelParams {
            nu,
            ell,
            mu,
            h,
            w,
            alpha: [0.0; 3],
            beta: [0.0; 3],
            sigma: CoefficientFn::one(),
            phi: CoefficientFn::one(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nu < 2 {
            return Err(Error::InvalidParameter(format!("nu = {} < 2", self.nu)));
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "mu = {} must be > 0",
                self.mu
            )));
        }
        if !(self.h > 0.0 && self.h <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "h = {} not in (0, 1]",
                self.h
            )));
        }
        if (self.sigma.eval(0.0) - 1.0).abs() > 1e-14 || (self.phi.eval(0.0) - 1.0).abs() > 1e-14 {
            return Err(Error::InvalidParameter(
                "sigma(0) and phi(0) must equal 1".into(),
            ));
        }
        Ok(())
    }

    /// `β_j > α_j²/2` for every `j`.
    pub fn general_condition(&self) -> bool {
        self.alpha
            .iter()
            .zip(self.beta.iter())
            .all(|(a, b)| *b > a * a / 2.0)
    }

    pub fn is_model(&self) -> bool {
        self.sigma.is_one() && self.phi.is_one()
    }

    /// `μ h^ν`.
    pub fn coupling(&self) -> f64 {
        self.mu * self.h.powi(self.nu as i32)
    }

    pub fn regime(&self, eps: f64, c0: f64) -> Regime {
        let m = self.coupling();
        // μh^ν = 1 is rarely exact in floating point
        let slack = 1.0 + 1e-12;
        if m <= eps * slack {
            Regime::SubCritical
        } else if m * slack >= c0 {
            Regime::SuperCritical
        } else {
            Regime::Critical
        }
    }

    /// Field strength `F(x₁) = σ ∂₁(φ x₁^ν/ν)`.
    pub fn field(&self, x1: f64) -> f64 {
        let nu = self.nu as i32;
        let v = x1.powi(nu) / nu as f64;
        self.sigma.eval(x1) * (self.phi.derivative(x1) * v + self.phi.eval(x1) * x1.powi(nu - 1))
    }

    /// Vector potential component `V₂ = φ x₁^ν/ν`.
    pub fn vector_potential(&self, x1: f64) -> f64 {
        let nu = self.nu as i32;
        self.phi.eval(x1) * x1.powi(nu) / nu as f64
    }

    /// Magnetic length near the degeneration line, `(h/μ)^{1/(ν+1)}`.
    pub fn magnetic_length(&self) -> f64 {
        (self.h / self.mu).powf(1.0 / (self.nu as f64 + 1.0))
    }
}
