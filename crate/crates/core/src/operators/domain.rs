//! Automatic truncation of the real line for operators of the form `D² + V(x)`.
//!
//! The interval is the hull of the classically allowed region `{V < E}` padded
//! on each side by a fixed number of natural length units. Seeds should include
//! the approximate well bottoms so that narrow wells are not missed by the scan.

use serde::{Deserialize, Serialize};

use super::grid::Grid1D;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DomainPolicy {
    /// Grid points per natural length unit.
    pub points_per_length: f64,
    /// Padding beyond the outermost turning points, in natural lengths.
    pub pad_lengths: f64,
    /// Energy margin added above the highest requested eigenvalue.
    pub energy_margin: f64,
    pub min_points: usize,
    pub max_points: usize,
}

impl Default for DomainPolicy {
    fn default() -> Self {
        DomainPolicy {
            points_per_length: 40.0,
            pad_lengths: 8.0,
            energy_margin: 10.0,
            min_points: 64,
            max_points: 400_000,
        }
    }
}

impl DomainPolicy {
    pub fn coarse(&self) -> Self {
        DomainPolicy {
            points_per_length: (self.points_per_length / 4.0).max(8.0),
            ..*self
        }
    }
}

/// Location and curvature of the global minimum of a potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WellBottom {
    pub x: f64,
    pub value: f64,
    /// `(V''/2)^{-1/4}`, the harmonic length at the bottom.
    pub harmonic_length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainInfo {
    pub left_turning: f64,
    pub right_turning: f64,
    pub bottom: WellBottom,
    pub energy: f64,
    pub pad_left: f64,
    pub pad_right: f64,
    pub natural_length: f64,
    pub clamped: bool,
}

const SCAN_POINTS: usize = 4001;

fn outer_radius(v: &dyn Fn(f64) -> f64, seeds: &[f64], energy: f64) -> f64 {
    let mut r = seeds.iter().fold(2.0_f64, |acc, s| acc.max(2.0 * s.abs()));
    for _ in 0..80 {
        if v(r) > energy && v(-r) > energy {
            break;
        }
        r *= 1.5;
    }
    r
}

fn scan(v: &dyn Fn(f64) -> f64, seeds: &[f64], r: f64) -> Vec<(f64, f64)> {
    let mut xs: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| -r + 2.0 * r * i as f64 / (SCAN_POINTS - 1) as f64)
        .collect();
    xs.extend(seeds.iter().copied().filter(|s| s.abs() < r));
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    xs.into_iter().map(|x| (x, v(x))).collect()
}

fn golden_min(v: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (v(c), v(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-14 * (a.abs() + b.abs()).max(1e-300) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = v(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = v(d);
        }
    }
    0.5 * (a + b)
}

fn bisect_level(v: &dyn Fn(f64) -> f64, energy: f64, mut inside: f64, mut outside: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        if v(mid) < energy {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    0.5 * (inside + outside)
}

fn second_derivative(v: &dyn Fn(f64) -> f64, x: f64, step: f64) -> f64 {
    (v(x + step) - 2.0 * v(x) + v(x - step)) / (step * step)
}

fn first_derivative(v: &dyn Fn(f64) -> f64, x: f64, step: f64) -> f64 {
    (v(x + step) - v(x - step)) / (2.0 * step)
}

/// Global minimum of `v`, located by a seeded scan and golden-section refinement.
pub fn well_bottom(v: &dyn Fn(f64) -> f64, seeds: &[f64]) -> WellBottom {
    let r = seeds.iter().fold(2.0_f64, |acc, s| acc.max(2.0 * s.abs()));
    let samples = scan(v, seeds, r);
    let (imin, _) = samples
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.partial_cmp(&b.1 .1).unwrap())
        .unwrap();
    let lo = samples[imin.saturating_sub(1)].0;
    let hi = samples[(imin + 1).min(samples.len() - 1)].0;
    let x = golden_min(v, lo, hi);
    let x = if v(x) <= samples[imin].1 {
        x
    } else {
        samples[imin].0
    };
    let width = (hi - lo).max(1e-12);
    let mut step = 0.05 * width;
    // shrink until the curvature estimate is stable
    let mut curv = second_derivative(v, x, step);
    for _ in 0..20 {
        let c2 = second_derivative(v, x, step / 2.0);
        if (c2 - curv).abs() <= 1e-4 * c2.abs() {
            curv = c2;
            break;
        }
        curv = c2;
        step /= 2.0;
    }
    let harmonic_length = if curv > 0.0 {
        (curv / 2.0).powf(-0.25)
    } else {
        width.max(1.0)
    };
    WellBottom {
        x,
        value: v(x),
        harmonic_length,
    }
}

/// Hull of `{v < energy}` padded by `policy.pad_lengths` natural lengths.
pub fn select_domain(
    v: &dyn Fn(f64) -> f64,
    seeds: &[f64],
    energy: f64,
    policy: &DomainPolicy,
) -> Result<DomainInfo> {
    if !energy.is_finite() {
        return Err(Error::InvalidParameter(format!("energy {energy}")));
    }
    let bottom = well_bottom(v, seeds);
    let energy = energy.max(bottom.value + policy.energy_margin);
    let mut all_seeds = seeds.to_vec();
    all_seeds.push(bottom.x);
    let r = outer_radius(v, &all_seeds, energy);
    let samples = scan(v, &all_seeds, r);
    let first = samples.iter().position(|s| s.1 < energy);
    let last = samples.iter().rposition(|s| s.1 < energy);
    let (Some(first), Some(last)) = (first, last) else {
        return Err(Error::Domain(format!(
            "no classically allowed region below E = {energy}"
        )));
    };
    let left = if first == 0 {
        samples[0].0
    } else {
        bisect_level(v, energy, samples[first].0, samples[first - 1].0)
    };
    let right = if last + 1 == samples.len() {
        samples[last].0
    } else {
        bisect_level(v, energy, samples[last].0, samples[last + 1].0)
    };
    let lh = bottom.harmonic_length;
    let airy = |x: f64| {
        let step = 1e-3 * lh;
        let d = first_derivative(v, x, step).abs();
        if d > 0.0 {
            d.powf(-1.0 / 3.0)
        } else {
            lh
        }
    };
    let pad_left = policy.pad_lengths * airy(left).max(lh);
    let pad_right = policy.pad_lengths * airy(right).max(lh);
    let wavelength = (energy - bottom.value).max(1e-300).powf(-0.5);
    let natural_length = lh.min(wavelength);
    Ok(DomainInfo {
        left_turning: left,
        right_turning: right,
        bottom,
        energy,
        pad_left,
        pad_right,
        natural_length,
        clamped: false,
    })
}

impl DomainInfo {
    pub fn grid(&mut self, policy: &DomainPolicy) -> Result<Grid1D> {
        let lo = self.left_turning - self.pad_left;
        let hi = self.right_turning + self.pad_right;
        let spacing = self.natural_length / policy.points_per_length;
        let mut n = ((hi - lo) / spacing).ceil() as usize;
        if n > policy.max_points {
            n = policy.max_points;
            self.clamped = true;
        }
        Grid1D::new(lo, hi, n.max(policy.min_points))
    }
}
