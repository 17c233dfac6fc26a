//! Phase-space grids and fields.
//!
//! A [`PhaseSpaceField`] is a real function of `(q, p)` sampled on a uniform
//! rectangular grid. Classical fields are probability densities; Wigner fields
//! are quasi-probabilities that may dip below zero but never below `-1/(π ħ)`.
//! Units are dimensionless with `ħ = 1` unless stated otherwise.
//!
//! Grid nodes are `q_i = q_min + i·dq` with `dq = (q_max - q_min) / n_q`, so
//! `q_max` itself is excluded. This periodic convention makes the midpoint
//! sum over the nodes coincide with the FFT normalisation used elsewhere.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible number of samples along either axis.
pub const MIN_SAMPLES: usize = 8;

/// Mass tolerance for fields produced by the factories.
pub const MASS_TOLERANCE: f64 = 1e-6;

/// Tolerance on the lower bound of Wigner fields.
pub const WIGNER_BOUND_TOLERANCE: f64 = 1e-9;

/// Tolerance on negativity of classical fields.
pub const CLASSICAL_NEGATIVITY_TOLERANCE: f64 = 1e-12;

/// Minimum ratio `width / spacing` for a Gaussian to count as resolved.
pub const RESOLUTION_FACTOR: f64 = 2.0;

/// Half-width, in standard deviations, that a Gaussian must fit inside the grid.
pub const SUPPORT_SIGMAS: f64 = 6.0;

/// Extra margin around the displaced components of a cat state.
pub const CAT_MARGIN: f64 = 6.0;

/// Squared separation below which the odd cat state is considered degenerate.
pub const CAT_MIN_SEPARATION_SQ: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceGrid {
    pub q_min: f64,
    pub q_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub n_q: usize,
    pub n_p: usize,
}

impl PhaseSpaceGrid {
    pub fn new(q_min: f64, q_max: f64, p_min: f64, p_max: f64, n_q: usize, n_p: usize) -> Result<Self> {
        let grid = Self {
            q_min,
            q_max,
            p_min,
            p_max,
            n_q,
            n_p,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// Square grid `[-half_width, half_width)²` with `n` samples per axis.
    pub fn square(half_width: f64, n: usize) -> Result<Self> {
        Self::new(-half_width, half_width, -half_width, half_width, n, n)
    }

    pub fn validate(&self) -> Result<()> {
        let bounds = [self.q_min, self.q_max, self.p_min, self.p_max];
        if bounds.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidGrid("bounds must be finite".into()));
        }
        if self.n_q < MIN_SAMPLES || self.n_p < MIN_SAMPLES {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_SAMPLES} samples per axis, got {}x{}",
                self.n_q, self.n_p
            )));
        }
        if self.q_max <= self.q_min || self.p_max <= self.p_min {
            return Err(Error::InvalidGrid("bounds must be increasing".into()));
        }
        Ok(())
    }

    pub fn dq(&self) -> f64 {
        (self.q_max - self.q_min) / self.n_q as f64
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / self.n_p as f64
    }

    /// Area of one grid cell.
    pub fn cell_area(&self) -> f64 {
        self.dq() * self.dp()
    }

    pub fn q(&self, i: usize) -> f64 {
        self.q_min + i as f64 * self.dq()
    }

    pub fn p(&self, j: usize) -> f64 {
        self.p_min + j as f64 * self.dp()
    }

    pub fn qs(&self) -> Vec<f64> {
        (0..self.n_q).map(|i| self.q(i)).collect()
    }

    pub fn ps(&self) -> Vec<f64> {
        (0..self.n_p).map(|j| self.p(j)).collect()
    }

    pub fn len(&self) -> usize {
        self.n_q * self.n_p
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major index with the q index outer.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n_p + j
    }

    /// True when the closed box `[q_lo, q_hi] × [p_lo, p_hi]` lies inside the grid.
    pub fn contains_box(&self, q_lo: f64, q_hi: f64, p_lo: f64, p_hi: f64) -> bool {
        q_lo >= self.q_min && q_hi <= self.q_max && p_lo >= self.p_min && p_hi <= self.p_max
    }

    /// Nearest grid node to `(q, p)`, clamped to the grid.
    pub fn nearest(&self, q: f64, p: f64) -> (usize, usize) {
        let i = ((q - self.q_min) / self.dq()).round().clamp(0.0, (self.n_q - 1) as f64);
        let j = ((p - self.p_min) / self.dp()).round().clamp(0.0, (self.n_p - 1) as f64);
        (i as usize, j as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Classical,
    Wigner,
}

impl FieldKind {
    pub fn code(self) -> u8 {
        match self {
            FieldKind::Classical => 0,
            FieldKind::Wigner => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(FieldKind::Classical),
            1 => Some(FieldKind::Wigner),
            _ => None,
        }
    }
}

/// A real function sampled on a [`PhaseSpaceGrid`], stored row-major with the
/// q index outer.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceField {
    grid: PhaseSpaceGrid,
    values: Vec<f64>,
    kind: FieldKind,
}

impl PhaseSpaceField {
    /// Validates shape, finiteness and the lower bound implied by `kind` (ħ = 1).
    pub fn new(grid: PhaseSpaceGrid, values: Vec<f64>, kind: FieldKind) -> Result<Self> {
        Self::with_hbar(grid, values, kind, 1.0)
    }

    /// As [`PhaseSpaceField::new`], with the Wigner bound `-1/(π ħ)`.
    pub fn with_hbar(grid: PhaseSpaceGrid, values: Vec<f64>, kind: FieldKind, hbar: f64) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.len() {
            return Err(Error::InvalidField(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidField(format!("non-finite value at index {k}")));
        }
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        match kind {
            FieldKind::Classical if min < -CLASSICAL_NEGATIVITY_TOLERANCE => {
                return Err(Error::InvalidField(format!(
                    "classical field has negative value {min:.3e}"
                )));
            }
            FieldKind::Wigner if min < -1.0 / (PI * hbar) - WIGNER_BOUND_TOLERANCE => {
                return Err(Error::InvalidField(format!(
                    "Wigner field value {min:.6} is below -1/(pi hbar)"
                )));
            }
            _ => {}
        }
        Ok(Self { grid, values, kind })
    }

    /// Samples `f(q, p)` on the grid without validation of the kind bound.
    fn sample(grid: PhaseSpaceGrid, f: impl Fn(f64, f64) -> f64 + Sync) -> Vec<f64> {
        let qs = grid.qs();
        let ps = grid.ps();
        let mut values = vec![0.0; grid.len()];
        values
            .par_chunks_mut(grid.n_p)
            .zip(qs.par_iter())
            .for_each(|(row, &q)| {
                for (v, &p) in row.iter_mut().zip(&ps) {
                    *v = f(q, p);
                }
            });
        values
    }

    pub fn grid(&self) -> &PhaseSpaceGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Grid node holding the largest value.
    pub fn argmax(&self) -> (usize, usize) {
        let k = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (k, &v)| if v > best.1 { (k, v) } else { best })
            .0;
        (k / self.grid.n_p, k % self.grid.n_p)
    }

    /// Midpoint-rule integral over the grid.
    pub fn integrate(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }

    /// `∫ f dp` at every `q_i`.
    pub fn position_marginal(&self) -> Vec<f64> {
        let dp = self.grid.dp();
        self.values
            .chunks(self.grid.n_p)
            .map(|row| row.iter().sum::<f64>() * dp)
            .collect()
    }

    /// `∫ f dq` at every `p_j`.
    pub fn momentum_marginal(&self) -> Vec<f64> {
        let dq = self.grid.dq();
        let mut out = vec![0.0; self.grid.n_p];
        for row in self.values.chunks(self.grid.n_p) {
            for (o, v) in out.iter_mut().zip(row) {
                *o += v;
            }
        }
        out.iter_mut().for_each(|o| *o *= dq);
        out
    }

    /// Expectation of `g(q, p)` under the field.
    pub fn expectation(&self, g: impl Fn(f64, f64) -> f64) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.grid.n_q {
            let q = self.grid.q(i);
            for j in 0..self.grid.n_p {
                acc += self.values[self.grid.index(i, j)] * g(q, self.grid.p(j));
            }
        }
        acc * self.grid.cell_area()
    }

    fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::InvalidField("fields live on different grids".into()));
        }
        Ok(())
    }

    /// `∫∫ |f - g| dq dp`.
    pub fn l1_distance(&self, other: &Self) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * self.grid.cell_area())
    }

    /// `max |f - g|`.
    pub fn sup_distance(&self, other: &Self) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

fn scale_to_unit_mass(values: &mut [f64], cell_area: f64) -> f64 {
    let mass = values.iter().sum::<f64>() * cell_area;
    values.iter_mut().for_each(|v| *v /= mass);
    mass
}

/// Normalized bivariate Gaussian with standard deviations `sigma_q`, `sigma_p`
/// and correlation coefficient `corr`.
///
/// The result is labelled [`FieldKind::Wigner`] when it satisfies the
/// uncertainty bound `σ_q σ_p sqrt(1 - ρ²) ≥ 1/2`, and
/// [`FieldKind::Classical`] otherwise.
pub fn make_gaussian(
    grid: PhaseSpaceGrid,
    q0: f64,
    p0: f64,
    sigma_q: f64,
    sigma_p: f64,
    corr: f64,
) -> Result<PhaseSpaceField> {
    grid.validate()?;
    if !(sigma_q > 0.0 && sigma_p > 0.0) || !sigma_q.is_finite() || !sigma_p.is_finite() {
        return Err(Error::InvalidParameter("widths must be positive and finite".into()));
    }
    if !(corr.abs() < 1.0) {
        return Err(Error::InvalidParameter(format!("|corr| must be < 1, got {corr}")));
    }
    if !q0.is_finite() || !p0.is_finite() {
        return Err(Error::InvalidParameter("centre must be finite".into()));
    }
    let (hq, hp) = (SUPPORT_SIGMAS * sigma_q, SUPPORT_SIGMAS * sigma_p);
    if !grid.contains_box(q0 - hq, q0 + hq, p0 - hp, p0 + hp) {
        return Err(Error::GridTooNarrow(format!(
            "{SUPPORT_SIGMAS}-sigma box [{}, {}] x [{}, {}] exceeds the grid",
            q0 - hq,
            q0 + hq,
            p0 - hp,
            p0 + hp
        )));
    }
    let one_minus = 1.0 - corr * corr;
    let norm = 1.0 / (2.0 * PI * sigma_q * sigma_p * one_minus.sqrt());
    let mut values = PhaseSpaceField::sample(grid, |q, p| {
        let u = (q - q0) / sigma_q;
        let v = (p - p0) / sigma_p;
        norm * (-(u * u - 2.0 * corr * u * v + v * v) / (2.0 * one_minus)).exp()
    });
    scale_to_unit_mass(&mut values, grid.cell_area());
    let kind = if sigma_q * sigma_p * one_minus.sqrt() >= 0.5 * (1.0 - 1e-12) {
        FieldKind::Wigner
    } else {
        FieldKind::Classical
    };
    PhaseSpaceField::new(grid, values, kind)
}

/// The vacuum Wigner function `exp(-q² - p²)/π`.
pub fn make_vacuum(grid: PhaseSpaceGrid) -> Result<PhaseSpaceField> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    make_gaussian(grid, 0.0, 0.0, s, s, 0.0)
}

/// Smoothed point particle at `(q0, p0)`: an isotropic Gaussian of width `eps`
/// standing in for `δ(q - q0) δ(p - p0)`.
pub fn make_delta_approx(grid: PhaseSpaceGrid, q0: f64, p0: f64, eps: f64) -> Result<PhaseSpaceField> {
    grid.validate()?;
    let spacing = grid.dq().max(grid.dp());
    let required = RESOLUTION_FACTOR * spacing;
    if !(eps >= required) || !eps.is_finite() {
        return Err(Error::Unresolvable {
            width: eps,
            spacing,
            required,
        });
    }
    let h = SUPPORT_SIGMAS * eps;
    if !grid.contains_box(q0 - h, q0 + h, p0 - h, p0 + h) {
        return Err(Error::GridTooNarrow(format!(
            "point ({q0}, {p0}) with width {eps} does not fit inside the grid"
        )));
    }
    let norm = 1.0 / (2.0 * PI * eps * eps);
    let mut values = PhaseSpaceField::sample(grid, |q, p| {
        let r2 = (q - q0).powi(2) + (p - p0).powi(2);
        norm * (-r2 / (2.0 * eps * eps)).exp()
    });
    scale_to_unit_mass(&mut values, grid.cell_area());
    PhaseSpaceField::new(grid, values, FieldKind::Classical)
}

/// Position wavefunction of the coherent state centred at `(qc, pc)`.
fn coherent_amplitude(q: f64, qc: f64, pc: f64) -> (f64, f64) {
    let amp = PI.powf(-0.25) * (-(q - qc).powi(2) / 2.0).exp();
    let phase = pc * q - qc * pc / 2.0;
    (amp * phase.cos(), amp * phase.sin())
}

/// Odd superposition of the coherent states at `±(q0, p0)`.
fn odd_cat_amplitude(q: f64, q0: f64, p0: f64) -> (f64, f64) {
    let (ar, ai) = coherent_amplitude(q, q0, p0);
    let (br, bi) = coherent_amplitude(q, -q0, -p0);
    (ar - br, ai - bi)
}

/// Wigner function of the odd Schrödinger-cat state `|α⟩ - |-α⟩` whose
/// components sit at `±(q0, p0)`.
///
/// Evaluated from the position wavefunction through
/// `W(q,p) = (1/π) ∫ ψ*(q+y) ψ(q-y) exp(2ipy) dy` by trapezoidal quadrature,
/// then normalized numerically.
pub fn make_cat_wigner(grid: PhaseSpaceGrid, q0: f64, p0: f64) -> Result<PhaseSpaceField> {
    grid.validate()?;
    if !q0.is_finite() || !p0.is_finite() {
        return Err(Error::InvalidParameter("centre must be finite".into()));
    }
    let (hq, hp) = (q0.abs() + CAT_MARGIN, p0.abs() + CAT_MARGIN);
    if !grid.contains_box(-hq, hq, -hp, hp) {
        return Err(Error::GridTooNarrow(format!(
            "cat state needs [-{hq}, {hq}] x [-{hp}, {hp}]"
        )));
    }
    let separation = q0 * q0 + p0 * p0;
    if separation < CAT_MIN_SEPARATION_SQ {
        return Err(Error::DegenerateState(format!(
            "q0² + p0² = {separation:.3e} is below {CAT_MIN_SEPARATION_SQ}; the odd superposition nearly vanishes"
        )));
    }

    // Norm of the unnormalized superposition.
    let extent = q0.abs() + 10.0;
    let h = 0.01;
    let n_norm = (2.0 * extent / h).ceil() as usize;
    let norm_sq: f64 = (0..=n_norm)
        .map(|k| {
            let (re, im) = odd_cat_amplitude(-extent + k as f64 * h, q0, p0);
            re * re + im * im
        })
        .sum::<f64>()
        * h;
    if norm_sq < 1e-12 {
        return Err(Error::DegenerateState(format!("state norm {norm_sq:.3e} vanishes")));
    }

    // Quadrature in y: the integrand is Gaussian in y with extent |q0| + few,
    // oscillating at most at frequency 2(|p| + |p0|).
    let p_abs = grid.p_min.abs().max(grid.p_max.abs());
    let dy = (PI / (p_abs + p0.abs() + 20.0)).min(0.05);
    let y_max = q0.abs() + 8.0;
    let n_y = (y_max / dy).ceil() as usize;
    let ys: Vec<f64> = (0..=n_y).map(|k| k as f64 * dy).collect();
    let ps = grid.ps();
    // cos/sin(2 p_j y_k), laid out per p.
    let mut cos_tab = vec![0.0; ps.len() * ys.len()];
    let mut sin_tab = vec![0.0; ps.len() * ys.len()];
    for (j, &p) in ps.iter().enumerate() {
        for (k, &y) in ys.iter().enumerate() {
            let (s, c) = (2.0 * p * y).sin_cos();
            cos_tab[j * ys.len() + k] = c;
            sin_tab[j * ys.len() + k] = s;
        }
    }
    let scale = dy / (PI * norm_sq);
    let mut values = vec![0.0; grid.len()];
    values
        .par_chunks_mut(grid.n_p)
        .enumerate()
        .for_each(|(i, row)| {
            let q = grid.q(i);
            // g(y) = ψ*(q+y) ψ(q-y); g(-y) = conj(g(y)).
            let g: Vec<(f64, f64)> = ys
                .iter()
                .map(|&y| {
                    let (ar, ai) = odd_cat_amplitude(q + y, q0, p0);
                    let (br, bi) = odd_cat_amplitude(q - y, q0, p0);
                    (ar * br + ai * bi, ar * bi - ai * br)
                })
                .collect();
            for (j, out) in row.iter_mut().enumerate() {
                let c = &cos_tab[j * ys.len()..(j + 1) * ys.len()];
                let s = &sin_tab[j * ys.len()..(j + 1) * ys.len()];
                let mut acc = g[0].0;
                for k in 1..ys.len() {
                    acc += 2.0 * (g[k].0 * c[k] - g[k].1 * s[k]);
                }
                *out = acc * scale;
            }
        });
    scale_to_unit_mass(&mut values, grid.cell_area());
    PhaseSpaceField::new(grid, values, FieldKind::Wigner)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid256() -> PhaseSpaceGrid {
        PhaseSpaceGrid::square(6.0, 256).unwrap()
    }

    #[test]
    fn grid_rejects_small_or_inverted() {
        assert!(PhaseSpaceGrid::square(6.0, 7).is_err());
        assert!(PhaseSpaceGrid::new(1.0, -1.0, -1.0, 1.0, 16, 16).is_err());
        assert!(PhaseSpaceGrid::new(f64::NAN, 1.0, -1.0, 1.0, 16, 16).is_err());
    }

    #[test]
    fn grid_nodes_are_uniform() {
        let g = PhaseSpaceGrid::new(-3.0, 5.0, -1.0, 1.0, 64, 32).unwrap();
        let qs = g.qs();
        for w in qs.windows(2) {
            assert!((w[1] - w[0] - g.dq()).abs() < 1e-14);
        }
        assert_eq!(g.q(0), -3.0);
        assert!((g.p(16) - 0.0).abs() < 1e-15);
    }

    #[test]
    fn vacuum_matches_closed_form() {
        let g = grid256();
        let f = make_vacuum(g).unwrap();
        assert_eq!(f.kind(), FieldKind::Wigner);
        assert!((f.integrate() - 1.0).abs() < 1e-12);
        let mut worst: f64 = 0.0;
        for i in 0..g.n_q {
            for j in 0..g.n_p {
                let (q, p) = (g.q(i), g.p(j));
                worst = worst.max((f.value(i, j) - (-q * q - p * p).exp() / PI).abs());
            }
        }
        assert!(worst < 1e-12, "{worst}");
    }

    #[test]
    fn shifted_gaussian_keeps_unit_mass() {
        let g = PhaseSpaceGrid::square(8.0, 256).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let f = make_gaussian(g, 3.0, 0.0, s, s, 0.0).unwrap();
        assert!((f.integrate() - 1.0).abs() < 1e-12);
        let (i, j) = f.argmax();
        assert_eq!((i, j), g.nearest(3.0, 0.0));
    }

    #[test]
    fn narrow_gaussian_is_classical() {
        let g = PhaseSpaceGrid::square(2.0, 256).unwrap();
        let f = make_gaussian(g, 0.0, 0.0, 0.1, 0.1, 0.0).unwrap();
        assert_eq!(f.kind(), FieldKind::Classical);
    }

    #[test]
    fn gaussian_rejects_narrow_grid_and_bad_params() {
        let g = grid256();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!(matches!(
            make_gaussian(g, 3.0, 0.0, s, s, 0.0),
            Err(Error::GridTooNarrow(_))
        ));
        assert!(make_gaussian(g, 0.0, 0.0, -1.0, 1.0, 0.0).is_err());
        assert!(make_gaussian(g, 0.0, 0.0, 0.5, 0.5, 1.0).is_err());
    }

    #[test]
    fn delta_peak_sits_on_nearest_node() {
        let g = grid256();
        let f = make_delta_approx(g, 1.0, 2.0, 0.1).unwrap();
        assert_eq!(f.argmax(), g.nearest(1.0, 2.0));
        assert_eq!(f.kind(), FieldKind::Classical);
        assert!((f.integrate() - 1.0).abs() < MASS_TOLERANCE);
        let marg = f.position_marginal();
        let imax = marg
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert!((g.q(imax) - 1.0).abs() <= g.dq());
    }

    #[test]
    fn centred_delta_is_point_symmetric() {
        let g = grid256();
        let f = make_delta_approx(g, 0.0, 0.0, 0.1).unwrap();
        for i in 1..g.n_q {
            for j in 1..g.n_p {
                let d = f.value(i, j) - f.value(g.n_q - i, g.n_p - j);
                assert!(d.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn delta_rejects_unresolvable_width() {
        let g = grid256();
        assert!(matches!(
            make_delta_approx(g, 0.0, 0.0, 0.05),
            Err(Error::Unresolvable { .. })
        ));
    }

    #[test]
    fn vacuum_marginal_is_gaussian() {
        let g = grid256();
        let f = make_vacuum(g).unwrap();
        let m = f.position_marginal();
        let sup = g
            .qs()
            .iter()
            .zip(&m)
            .map(|(q, v)| (v - (-q * q).exp() / PI.sqrt()).abs())
            .fold(0.0, f64::max);
        assert!(sup < 1e-6, "{sup}");
        let total: f64 = m.iter().sum::<f64>() * g.dq();
        assert!((total - f.integrate()).abs() < 1e-12);
        let total_p: f64 = f.momentum_marginal().iter().sum::<f64>() * g.dp();
        assert!((total_p - f.integrate()).abs() < 1e-12);
    }

    /// Closed-form Wigner function of the odd cat state.
    fn odd_cat_closed_form(q: f64, p: f64, q0: f64, p0: f64) -> f64 {
        let s = q0 * q0 + p0 * p0;
        let n2 = 2.0 * (1.0 - (-s).exp());
        let a = (-(q - q0).powi(2) - (p - p0).powi(2)).exp();
        let b = (-(q + q0).powi(2) - (p + p0).powi(2)).exp();
        let c = 2.0 * (-q * q - p * p).exp() * (2.0 * (p * q0 - q * p0)).cos();
        (a + b - c) / (PI * n2)
    }

    #[test]
    fn cat_wigner_matches_closed_form() {
        let g = PhaseSpaceGrid::square(9.0, 256).unwrap();
        for &(q0, p0) in &[(3.0, 0.0), (2.0, 1.5)] {
            let f = make_cat_wigner(g, q0, p0).unwrap();
            let mut sup: f64 = 0.0;
            for i in 0..g.n_q {
                for j in 0..g.n_p {
                    let exact = odd_cat_closed_form(g.q(i), g.p(j), q0, p0);
                    sup = sup.max((f.value(i, j) - exact).abs());
                }
            }
            assert!(sup < 1e-6, "({q0}, {p0}): {sup}");
            assert!((f.integrate() - 1.0).abs() < 1e-5);
        }
    }

    #[test]
    fn cat_wigner_has_negative_interference_and_parity() {
        let g = PhaseSpaceGrid::square(9.0, 256).unwrap();
        let f = make_cat_wigner(g, 3.0, 0.0).unwrap();
        let (ic, jc) = g.nearest(0.0, 0.0);
        assert!(f.value(ic, jc) < -0.3);
        assert!(f.min() >= -1.0 / PI - WIGNER_BOUND_TOLERANCE);
        let (il, jl) = g.nearest(3.0, 0.0);
        assert!(f.value(il, jl) > 0.1);
        for i in 1..g.n_q {
            for j in 1..g.n_p {
                let d = f.value(i, j) - f.value(g.n_q - i, g.n_p - j);
                assert!(d.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn cat_rejects_degenerate_and_narrow() {
        let g = PhaseSpaceGrid::square(9.0, 64).unwrap();
        assert!(matches!(
            make_cat_wigner(g, 0.001, 0.0),
            Err(Error::DegenerateState(_))
        ));
        let small = PhaseSpaceGrid::square(6.0, 64).unwrap();
        assert!(matches!(
            make_cat_wigner(small, 3.0, 0.0),
            Err(Error::GridTooNarrow(_))
        ));
    }

    #[test]
    fn field_validation_enforces_kind_bounds() {
        let g = PhaseSpaceGrid::square(1.0, 8).unwrap();
        let mut v = vec![0.0; 64];
        v[3] = -0.01;
        assert!(PhaseSpaceField::new(g, v.clone(), FieldKind::Classical).is_err());
        assert!(PhaseSpaceField::new(g, v.clone(), FieldKind::Wigner).is_ok());
        v[3] = -0.4;
        assert!(PhaseSpaceField::new(g, v, FieldKind::Wigner).is_err());
        assert!(PhaseSpaceField::new(g, vec![0.0; 10], FieldKind::Wigner).is_err());
    }
}
