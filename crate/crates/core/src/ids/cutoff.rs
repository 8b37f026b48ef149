use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One-dimensional cutoff profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Cutoff {
    /// Equal to 1 on `|t − center| ≤ plateau`, 0 for `|t − center| ≥ radius`,
    /// joined by the quintic smoothstep, so the profile is C².
    Bump {
        center: f64,
        plateau: f64,
        radius: f64,
    },
    /// Sharp window `1_[lo, hi]`.
    Indicator { lo: f64, hi: f64 },
}

fn smoothstep(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * s * (10.0 + s * (-15.0 + 6.0 * s))
}

impl Cutoff {
    pub fn bump(center: f64, plateau: f64, radius: f64) -> Result<Self> {
        let c = Cutoff::Bump {
            center,
            plateau,
            radius,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn indicator(lo: f64, hi: f64) -> Result<Self> {
        let c = Cutoff::Indicator { lo, hi };
        c.validate()?;
        Ok(c)
    }

    /// Centered bump with support `[−0.45, 0.45]` and plateau `[−0.2, 0.2]`.
    pub fn standard() -> Self {
        Cutoff::Bump {
            center: 0.0,
            plateau: 0.2,
            radius: 0.45,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Cutoff::Bump {
                center,
                plateau,
                radius,
            } => {
                if !(center.is_finite() && plateau >= 0.0 && radius > plateau && radius.is_finite())
                {
                    return Err(Error::InvalidParameter(format!(
                        "bump needs 0 <= plateau < radius, got plateau {plateau}, radius {radius}"
                    )));
                }
            }
            Cutoff::Indicator { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(Error::InvalidParameter(format!(
                        "indicator window [{lo}, {hi}] is empty"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Cutoff::Bump {
                center,
                plateau,
                radius,
            } => {
                let r = (t - center).abs();
                1.0 - smoothstep((r - plateau) / (radius - plateau))
            }
            Cutoff::Indicator { lo, hi } => {
                if (lo..=hi).contains(&t) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Closed support interval.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Cutoff::Bump { center, radius, .. } => (center - radius, center + radius),
            Cutoff::Indicator { lo, hi } => (lo, hi),
        }
    }

    /// Points where the profile is not smooth, in increasing order.
    pub fn knots(&self) -> Vec<f64> {
        match *self {
            Cutoff::Bump {
                center,
                plateau,
                radius,
            } => {
                let mut k = vec![
                    center - radius,
                    center - plateau,
                    center + plateau,
                    center + radius,
                ];
                k.dedup();
                k
            }
            Cutoff::Indicator { lo, hi } => vec![lo, hi],
        }
    }

    pub fn is_indicator(&self) -> bool {
        matches!(self, Cutoff::Indicator { .. })
    }

    /// Exact integral over the real line.
    pub fn integral(&self) -> f64 {
        match *self {
            // the smoothstep ramp integrates to half its width
            Cutoff::Bump {
                plateau, radius, ..
            } => 2.0 * plateau + (radius - plateau),
            Cutoff::Indicator { lo, hi } => hi - lo,
        }
    }

    /// True if the profile equals 1 on all of `[lo, hi]`.
    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        match *self {
            Cutoff::Bump {
                center, plateau, ..
            } => center - plateau <= lo && hi <= center + plateau,
            Cutoff::Indicator { lo: a, hi: b } => a <= lo && hi <= b,
        }
    }
}

/// Product cutoff `ψ(x) = ψ₁(x₁)ψ₂(x₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub psi1: Cutoff,
    pub psi2: Cutoff,
}

impl CutoffSpec {
    pub fn new(psi1: Cutoff, psi2: Cutoff) -> Result<Self> {
        psi1.validate()?;
        psi2.validate()?;
        Ok(CutoffSpec { psi1, psi2 })
    }

    pub fn standard() -> Self {
        CutoffSpec {
            psi1: Cutoff::standard(),
            psi2: Cutoff::standard(),
        }
    }

    /// Indicator of a rectangle.
    pub fn rectangle(x1: (f64, f64), x2: (f64, f64)) -> Result<Self> {
        Self::new(
            Cutoff::indicator(x1.0, x1.1)?,
            Cutoff::indicator(x2.0, x2.1)?,
        )
    }

    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        self.psi1.eval(x1) * self.psi2.eval(x2)
    }

    pub fn validate(&self) -> Result<()> {
        self.psi1.validate()?;
        self.psi2.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_range_and_support() {
        let c = Cutoff::standard();
        let (lo, hi) = c.support();
        assert!(lo > -0.5 && hi < 0.5);
        for i in 0..=1000 {
            let t = -0.6 + 1.2 * i as f64 / 1000.0;
            let v = c.eval(t);
            assert!((0.0..=1.0).contains(&v));
            if t <= lo || t >= hi {
                assert_eq!(v, 0.0);
            }
        }
        assert_eq!(c.eval(0.1), 1.0);
    }

    #[test]
    fn bump_is_c2_at_knots() {
        let c = Cutoff::standard();
        let jump = |k: f64, d: f64| {
            let second = |t: f64| (c.eval(t + d) - 2.0 * c.eval(t) + c.eval(t - d)) / (d * d);
            (second(k + 2.0 * d) - second(k - 2.0 * d)).abs()
        };
        for k in c.knots() {
            let (coarse, fine) = (jump(k, 1e-4), jump(k, 1e-5));
            assert!(
                fine < 0.2 && fine < coarse / 5.0,
                "second derivative jumps at {k}"
            );
        }
    }

    #[test]
    fn integral_matches_quadrature() {
        let c = Cutoff::bump(0.1, 0.15, 0.4).unwrap();
        let n = 200_000;
        let (lo, hi) = c.support();
        let dt = (hi - lo) / n as f64;
        let s: f64 = (0..n)
            .map(|i| c.eval(lo + (i as f64 + 0.5) * dt))
            .sum::<f64>()
            * dt;
        assert!((s - c.integral()).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_profiles() {
        assert!(Cutoff::bump(0.0, 0.3, 0.2).is_err());
        assert!(Cutoff::indicator(1.0, 1.0).is_err());
    }

    #[test]
    fn product_form() {
        let s = CutoffSpec::standard();
        assert_eq!(s.eval(0.0, 0.0), 1.0);
        assert_eq!(s.eval(0.0, 0.47), 0.0);
        let v = s.eval(0.3, -0.25);
        assert!((v - s.psi1.eval(0.3) * s.psi2.eval(-0.25)).abs() == 0.0);
    }
}
