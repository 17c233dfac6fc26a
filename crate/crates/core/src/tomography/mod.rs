//! Symplectic tomograms: frames, the forward map, its Radon specialisation,
//! and filtered back-projection.
//!
//! A tomogram `w(x; μ, ν)` is the probability density of the quadrature
//! `x = μq + νp`. Every row of a [`Tomogram`] is a true probability density
//! over a shared [`XGrid`].

mod cat;
mod forward;
mod inverse;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::TrigInterpolant;

pub use cat::{cat_tomogram_closed_form, CatRow};
pub use forward::{forward_rows, forward_tomogram, radon_tomogram, SliceProjector};
pub use inverse::{inverse_tomogram, InverseOptions, RampFilter, Reconstruction, MIN_ANGLES};

/// Row mass tolerance.
pub const ROW_MASS_TOLERANCE: f64 = 1e-4;

/// Most negative value a tomogram sample may take.
pub const NEGATIVITY_TOLERANCE: f64 = 1e-9;

/// Fraction of mass that may fall outside the x window before projection fails.
pub const CLIPPING_TOLERANCE: f64 = 1e-3;

/// Frames whose canonical angles differ by less than this are the same frame.
pub const ANGLE_TOLERANCE: f64 = 1e-12;

/// A reference frame `(μ, ν)` in phase space: the quadrature `x = μq + νp`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub mu: f64,
    pub nu: f64,
}

impl Frame {
    pub fn new(mu: f64, nu: f64) -> Result<Self> {
        if !mu.is_finite() || !nu.is_finite() || (mu == 0.0 && nu == 0.0) {
            return Err(Error::InvalidFrame { mu, nu });
        }
        Ok(Self { mu, nu })
    }

    /// Rotation frame `(cos θ, sin θ)`.
    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self { mu: c, nu: s }
    }

    pub fn norm(&self) -> f64 {
        self.mu.hypot(self.nu)
    }

    /// Splits the frame as `s · c` with `c` on the unit half-circle, angle in `[0, π)`.
    pub fn canonical(&self) -> (Frame, f64) {
        let r = self.norm();
        let theta = self.nu.atan2(self.mu);
        let s = if (0.0..PI).contains(&theta) { r } else { -r };
        (
            Frame {
                mu: self.mu / s,
                nu: self.nu / s,
            },
            s,
        )
    }

    /// Angle of the canonical frame, in `[0, π)`.
    pub fn angle(&self) -> f64 {
        let (c, _) = self.canonical();
        let theta = c.nu.atan2(c.mu);
        if !(0.0..PI).contains(&theta) {
            0.0
        } else {
            theta
        }
    }

    pub fn scaled(&self, s: f64) -> Frame {
        Frame {
            mu: s * self.mu,
            nu: s * self.nu,
        }
    }
}

/// Uniform sample points `x_m = x_min + m·h`, `h = (x_max - x_min)/n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl XGrid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        let g = Self { x_min, x_max, n };
        g.validate()?;
        Ok(g)
    }

    /// `[-half_width, half_width)` with `n` samples.
    pub fn symmetric(half_width: f64, n: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.x_min.is_finite() || !self.x_max.is_finite() || self.x_max <= self.x_min {
            return Err(Error::InconsistentXGrid(format!(
                "bad range [{}, {})",
                self.x_min, self.x_max
            )));
        }
        if self.n < crate::phasespace::MIN_SAMPLES {
            return Err(Error::InconsistentXGrid(format!("too few samples ({})", self.n)));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / self.n as f64
    }

    pub fn x(&self, m: usize) -> f64 {
        self.x_min + m as f64 * self.spacing()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n).map(|m| self.x(m)).collect()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x < self.x_max
    }
}

/// `w(x; μ, ν)` sampled on an [`XGrid`] for a list of frames, frame-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Tomogram {
    x_grid: XGrid,
    frames: Vec<Frame>,
    values: Vec<f64>,
}

impl Tomogram {
    /// Validates shape, nonnegativity and unit mass of every row.
    pub fn new(x_grid: XGrid, frames: Vec<Frame>, values: Vec<f64>) -> Result<Self> {
        x_grid.validate()?;
        if frames.is_empty() {
            return Err(Error::EmptyFrames);
        }
        for f in &frames {
            Frame::new(f.mu, f.nu)?;
        }
        if values.len() != frames.len() * x_grid.n {
            return Err(Error::InvalidTomogram(format!(
                "expected {} values, got {}",
                frames.len() * x_grid.n,
                values.len()
            )));
        }
        let h = x_grid.spacing();
        for (k, row) in values.chunks(x_grid.n).enumerate() {
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidTomogram(format!("row {k} has non-finite values")));
            }
            let min = row.iter().copied().fold(f64::INFINITY, f64::min);
            if min < -NEGATIVITY_TOLERANCE {
                return Err(Error::InvalidTomogram(format!(
                    "row {k} has negative probability {min:.3e}"
                )));
            }
            let mass = row.iter().sum::<f64>() * h;
            if (mass - 1.0).abs() > ROW_MASS_TOLERANCE {
                return Err(Error::InvalidTomogram(format!("row {k} has mass {mass:.6}")));
            }
        }
        Ok(Self {
            x_grid,
            frames,
            values,
        })
    }

    /// Builds a tomogram from per-frame rows, which must share one length.
    pub fn from_rows(x_grid: XGrid, frames: Vec<Frame>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() != frames.len() {
            return Err(Error::InvalidTomogram(format!(
                "{} frames but {} rows",
                frames.len(),
                rows.len()
            )));
        }
        if let Some(r) = rows.iter().find(|r| r.len() != x_grid.n) {
            return Err(Error::InconsistentXGrid(format!(
                "row of length {} on a grid of {} samples",
                r.len(),
                x_grid.n
            )));
        }
        Self::new(x_grid, frames, rows.concat())
    }

    pub fn x_grid(&self) -> &XGrid {
        &self.x_grid
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n_frames(&self) -> usize {
        self.frames.len()
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.x_grid.n..(k + 1) * self.x_grid.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.x_grid.n)
    }

    pub fn row_mass(&self, k: usize) -> f64 {
        self.row(k).iter().sum::<f64>() * self.x_grid.spacing()
    }

    /// Index of the row taken at `frame` (exact match up to `tol` per component).
    pub fn find_frame(&self, frame: Frame, tol: f64) -> Option<usize> {
        self.frames
            .iter()
            .position(|f| (f.mu - frame.mu).abs() <= tol && (f.nu - frame.nu).abs() <= tol)
    }

    /// Row at an arbitrary nonzero multiple of one of the stored frames,
    /// obtained through [`homogeneity_rescale`].
    pub fn row_at(&self, frame: Frame) -> Result<Vec<f64>> {
        let frame = Frame::new(frame.mu, frame.nu)?;
        if let Some(k) = self.find_frame(frame, 1e-12) {
            return Ok(self.row(k).to_vec());
        }
        let (target, s_target) = frame.canonical();
        for (k, f) in self.frames.iter().enumerate() {
            let (c, s) = f.canonical();
            if (c.mu - target.mu).abs() <= 1e-12 && (c.nu - target.nu).abs() <= 1e-12 {
                return homogeneity_rescale(self.row(k), &self.x_grid, s_target / s);
            }
        }
        Err(Error::MissingFrame(format!("no row proportional to ({}, {})", frame.mu, frame.nu)))
    }

    /// Same tomogram expressed on canonical frames `(cos θ, sin θ)`, θ ∈ [0, π).
    pub fn canonicalize(&self) -> Result<Tomogram> {
        let mut frames = Vec::with_capacity(self.frames.len());
        let mut values = Vec::with_capacity(self.values.len());
        for (k, f) in self.frames.iter().enumerate() {
            let (c, s) = f.canonical();
            frames.push(c);
            if s == 1.0 {
                values.extend_from_slice(self.row(k));
            } else {
                values.extend(homogeneity_rescale(self.row(k), &self.x_grid, 1.0 / s)?);
            }
        }
        Tomogram::new(self.x_grid, frames, values)
    }

    /// Canonical angle of every frame.
    pub fn angles(&self) -> Vec<f64> {
        self.frames.iter().map(Frame::angle).collect()
    }

    /// Largest per-row `∫ |w₁ - w₂| dx` against a tomogram with the same
    /// grid and frames.
    pub fn max_row_l1(&self, other: &Tomogram) -> Result<f64> {
        self.check_compatible(other)?;
        let h = self.x_grid.spacing();
        Ok(self
            .rows()
            .zip(other.rows())
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() * h)
            .fold(0.0, f64::max))
    }

    /// Largest `|w₁ - w₂|` over all samples.
    pub fn sup_distance(&self, other: &Tomogram) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    fn check_compatible(&self, other: &Tomogram) -> Result<()> {
        if self.x_grid != other.x_grid || self.frames.len() != other.frames.len() {
            return Err(Error::InconsistentXGrid("tomograms are not comparable".into()));
        }
        Ok(())
    }
}

/// Evaluates `scale · w(source(x_m))` for every grid point, using the
/// band-limited interpolant of `row` and zero outside the x window.
pub(crate) fn resample_row(row: &[f64], x_grid: &XGrid, scale: f64, source: impl Fn(f64) -> f64) -> Vec<f64> {
    let interp = TrigInterpolant::new(row, x_grid.x_min, x_grid.spacing());
    x_grid
        .xs()
        .into_iter()
        .map(|x| {
            let xs = source(x);
            if x_grid.contains(xs) {
                scale * interp.eval(xs)
            } else {
                0.0
            }
        })
        .collect()
}

/// Row at frame `(sμ, sν)` from the row at `(μ, ν)`: `x ↦ |s|⁻¹ w(x/s)`.
pub fn homogeneity_rescale(row: &[f64], x_grid: &XGrid, s: f64) -> Result<Vec<f64>> {
    if s == 0.0 || !s.is_finite() {
        return Err(Error::ZeroScale);
    }
    if row.len() != x_grid.n {
        return Err(Error::InconsistentXGrid(format!(
            "row of length {} on a grid of {} samples",
            row.len(),
            x_grid.n
        )));
    }
    if s == 1.0 {
        return Ok(row.to_vec());
    }
    Ok(resample_row(row, x_grid, 1.0 / s.abs(), |x| x / s))
}

/// `n` equally spaced angles `k π / n` in `[0, π)`.
pub fn uniform_angles(n: usize) -> Vec<f64> {
    (0..n).map(|k| k as f64 * PI / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_row(g: &XGrid, centre: f64, width: f64) -> Vec<f64> {
        g.xs()
            .iter()
            .map(|x| (-(x - centre).powi(2) / (2.0 * width * width)).exp() / (width * (2.0 * PI).sqrt()))
            .collect()
    }

    #[test]
    fn frame_rejects_origin() {
        assert!(Frame::new(0.0, 0.0).is_err());
        assert!(Frame::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn canonical_form_is_on_half_circle() {
        for &(mu, nu) in &[(1.0, 0.0), (-1.0, 0.0), (0.3, -2.0), (-0.5, -0.5), (0.0, 3.0), (0.0, -3.0)] {
            let f = Frame::new(mu, nu).unwrap();
            let (c, s) = f.canonical();
            assert!((c.norm() - 1.0).abs() < 1e-14);
            let theta = c.angle();
            assert!((0.0..PI).contains(&theta));
            assert!((s * c.mu - mu).abs() < 1e-14 && (s * c.nu - nu).abs() < 1e-14);
        }
        assert_eq!(Frame::new(-1.0, 0.0).unwrap().angle(), 0.0);
    }

    #[test]
    fn rescale_identity_is_exact() {
        let g = XGrid::symmetric(6.0, 256).unwrap();
        let row = gaussian_row(&g, 0.7, 0.3);
        assert_eq!(homogeneity_rescale(&row, &g, 1.0).unwrap(), row);
    }

    #[test]
    fn rescale_moves_and_widens() {
        let g = XGrid::symmetric(8.0, 512).unwrap();
        let row = gaussian_row(&g, 1.5, 0.2);
        let out = homogeneity_rescale(&row, &g, 2.0).unwrap();
        let expected = gaussian_row(&g, 3.0, 0.4);
        let sup = out.iter().zip(&expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(sup < 1e-10, "{sup}");
        let mass: f64 = out.iter().sum::<f64>() * g.spacing();
        assert!((mass - 1.0).abs() < 1e-6);
        let neg = homogeneity_rescale(&row, &g, -0.5).unwrap();
        let expected = gaussian_row(&g, -0.75, 0.1);
        let sup = neg.iter().zip(&expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(sup < 1e-8, "{sup}");
    }

    #[test]
    fn rescale_rejects_zero() {
        let g = XGrid::symmetric(6.0, 64).unwrap();
        assert!(matches!(homogeneity_rescale(&vec![0.0; 64], &g, 0.0), Err(Error::ZeroScale)));
    }

    #[test]
    fn canonicalize_then_rescale_round_trips() {
        let g = XGrid::symmetric(10.0, 512).unwrap();
        let frame = Frame::new(-1.2, 0.9).unwrap();
        // Row of an isotropic Gaussian of width 0.5 at (1, 1), frame (-1.2, 0.9).
        let centre = frame.mu + frame.nu;
        let row = gaussian_row(&g, centre, 0.5 * frame.norm());
        let t = Tomogram::new(g, vec![frame], row.clone()).unwrap();
        let canon = t.canonicalize().unwrap();
        let (_, s) = frame.canonical();
        let back = homogeneity_rescale(canon.row(0), &g, s).unwrap();
        let sup = back.iter().zip(&row).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(sup < 1e-6, "{sup}");
        assert_eq!(canon.row_at(frame).unwrap().len(), g.n);
    }

    #[test]
    fn tomogram_validation() {
        let g = XGrid::symmetric(6.0, 128).unwrap();
        let row = gaussian_row(&g, 0.0, 0.5);
        assert!(Tomogram::new(g, vec![], vec![]).is_err());
        assert!(Tomogram::new(g, vec![Frame::from_angle(0.0)], row.clone()).is_ok());
        let doubled: Vec<f64> = row.iter().map(|v| 2.0 * v).collect();
        assert!(Tomogram::new(g, vec![Frame::from_angle(0.0)], doubled).is_err());
        let mut negative = row.clone();
        negative[3] = -1e-6;
        assert!(Tomogram::new(g, vec![Frame::from_angle(0.0)], negative).is_err());
        assert!(matches!(
            Tomogram::from_rows(g, vec![Frame::from_angle(0.0)], vec![row[..100].to_vec()]),
            Err(Error::InconsistentXGrid(_))
        ));
    }
}
