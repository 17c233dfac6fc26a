//! Relative-entropy scoring of frame ensembles.
//!
//! Angular distributions live on `n` midpoint samples `θ_k = (k + ½)π/n` of
//! `[0, π)`. The ideal ensemble is the uniform density `1/π`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::phasespace::PhaseSpaceGrid;

/// Default angular resolution.
pub const DEFAULT_ANGLES: usize = 256;

/// Mass tolerance of an angular distribution.
pub const ANGULAR_MASS_TOLERANCE: f64 = 1e-6;

/// Largest `P` tolerated where `Q` vanishes.
pub const SUPPORT_TOLERANCE: f64 = 1e-12;

/// Largest fraction of planar mass allowed outside the integration disc.
pub const PLANAR_CLIPPING_TOLERANCE: f64 = 1e-3;

/// Probability density over canonical frame angles.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameDistribution {
    density: Vec<f64>,
}

impl FrameDistribution {
    /// Validates nonnegativity and unit mass.
    pub fn new(density: Vec<f64>) -> Result<Self> {
        if density.is_empty() {
            return Err(Error::InvalidDistribution("no samples".into()));
        }
        if let Some((k, v)) = density.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidDistribution(format!("sample {k} is {v}")));
        }
        let d = Self { density };
        let mass = d.mass();
        if (mass - 1.0).abs() > ANGULAR_MASS_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("mass {mass}")));
        }
        Ok(d)
    }

    /// Rescales nonnegative samples to unit mass.
    pub fn normalized(density: Vec<f64>) -> Result<Self> {
        let n = density.len();
        if n == 0 {
            return Err(Error::InvalidDistribution("no samples".into()));
        }
        let mass = density.iter().sum::<f64>() * PI / n as f64;
        if !mass.is_finite() || mass <= 0.0 {
            return Err(Error::InvalidDistribution(format!("mass {mass}")));
        }
        Self::new(density.into_iter().map(|v| v / mass).collect())
    }

    /// The uniform measure `Q(θ) = 1/π`.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1.0 / PI; n])
    }

    /// Samples `f` at the midpoints and normalizes.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::normalized((0..n).map(|k| f(midpoint(k, n))).collect())
    }

    /// Histogram of angles (reduced modulo π) on `n` bins.
    pub fn from_angles(angles: &[f64], n: usize) -> Result<Self> {
        if n == 0 || angles.is_empty() {
            return Err(Error::InvalidDistribution("empty histogram".into()));
        }
        let mut counts = vec![0.0; n];
        for &a in angles {
            if !a.is_finite() {
                return Err(Error::InvalidDistribution(format!("angle {a}")));
            }
            let bin = ((a.rem_euclid(PI) / PI) * n as f64) as usize;
            counts[bin.min(n - 1)] += 1.0;
        }
        Self::normalized(counts)
    }

    pub fn len(&self) -> usize {
        self.density.len()
    }

    pub fn is_empty(&self) -> bool {
        self.density.is_empty()
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn dtheta(&self) -> f64 {
        PI / self.len() as f64
    }

    pub fn thetas(&self) -> Vec<f64> {
        (0..self.len()).map(|k| midpoint(k, self.len())).collect()
    }

    pub fn mass(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.dtheta()
    }
}

fn midpoint(k: usize, n: usize) -> f64 {
    (k as f64 + 0.5) * PI / n as f64
}

/// `H(P‖Q) = ∫ P log(P/Q) dθ` in nats, with `0 · log 0 = 0`.
pub fn relative_entropy(p: &FrameDistribution, q: &FrameDistribution) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Dimension(format!("{} vs {} angle samples", p.len(), q.len())));
    }
    let mut acc = 0.0;
    for (k, (&pk, &qk)) in p.density.iter().zip(&q.density).enumerate() {
        if qk == 0.0 {
            if pk > SUPPORT_TOLERANCE {
                return Err(Error::SupportViolation { index: k, p: pk });
            }
            continue;
        }
        if pk > 0.0 {
            acc += pk * (pk / qk).ln();
        }
    }
    Ok(acc * p.dtheta())
}

/// `H(P‖1/π)`.
pub fn completeness_entropy(p: &FrameDistribution) -> Result<f64> {
    relative_entropy(p, &FrameDistribution::uniform(p.len())?)
}

/// Density `P(μ, ν)` sampled on a rectangular grid (`q` axis ↦ `μ`, `p` axis ↦ `ν`).
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarDistribution {
    grid: PhaseSpaceGrid,
    values: Vec<f64>,
}

impl PlanarDistribution {
    pub fn new(grid: PhaseSpaceGrid, values: Vec<f64>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.len() {
            return Err(Error::Dimension(format!("expected {} values, got {}", grid.len(), values.len())));
        }
        if let Some((k, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidDistribution(format!("planar sample {k} is {v}")));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: PhaseSpaceGrid, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let ps = grid.ps();
        let values = grid.qs().iter().flat_map(|&m| ps.iter().map(move |&n| (m, n))).map(|(m, n)| f(m, n)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &PhaseSpaceGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }

    /// Bilinear interpolation, zero outside the node range.
    fn sample(&self, mu: f64, nu: f64) -> f64 {
        let g = &self.grid;
        let a = (mu - g.q_min) / g.dq();
        let b = (nu - g.p_min) / g.dp();
        if a < 0.0 || b < 0.0 {
            return 0.0;
        }
        let (i, j) = (a.floor() as usize, b.floor() as usize);
        if i + 1 >= g.n_q || j + 1 >= g.n_p {
            return 0.0;
        }
        let (fa, fb) = (a - i as f64, b - j as f64);
        let v = |i: usize, j: usize| self.values[g.index(i, j)];
        (1.0 - fa) * ((1.0 - fb) * v(i, j) + fb * v(i, j + 1)) + fa * ((1.0 - fb) * v(i + 1, j) + fb * v(i + 1, j + 1))
    }
}

/// Angular marginal `P(θ) ∝ ∫ |r| P(r cos θ, r sin θ) dr`, `r ∈ ℝ`, `θ ∈ [0, π)`.
///
/// Rays are integrated inside the largest origin-centred disc that fits in
/// the sampled region; more than `1e-3` of the planar mass outside that disc
/// is an error.
pub fn polar_projection(planar: &PlanarDistribution, n_theta: usize) -> Result<FrameDistribution> {
    let g = planar.grid;
    let radius = (-g.q_min).min(g.q_max - g.dq()).min(-g.p_min).min(g.p_max - g.dp());
    if radius <= 0.0 {
        return Err(Error::InvalidGrid("planar grid must contain the origin".into()));
    }
    let total = planar.mass();
    if !(total > 0.0) {
        return Err(Error::InvalidDistribution("planar mass is zero".into()));
    }
    let qs = g.qs();
    let ps = g.ps();
    let mut outside = 0.0;
    for (i, &m) in qs.iter().enumerate() {
        for (j, &n) in ps.iter().enumerate() {
            if m.hypot(n) > radius {
                outside += planar.values[g.index(i, j)];
            }
        }
    }
    let fraction = outside * g.cell_area() / total;
    if fraction > PLANAR_CLIPPING_TOLERANCE {
        return Err(Error::SupportClipping { fraction });
    }
    if n_theta == 0 {
        return Err(Error::InvalidParameter("n_theta must be positive".into()));
    }

    let dr = 0.5 * g.dq().min(g.dp());
    let n_r = (2.0 * radius / dr).ceil() as usize;
    let dr = 2.0 * radius / n_r as f64;
    let density = (0..n_theta)
        .map(|k| {
            let (s, c) = midpoint(k, n_theta).sin_cos();
            (0..n_r)
                .map(|m| {
                    let r = -radius + (m as f64 + 0.5) * dr;
                    r.abs() * planar.sample(r * c, r * s)
                })
                .sum::<f64>()
                * dr
        })
        .collect();
    FrameDistribution::normalized(density)
}
