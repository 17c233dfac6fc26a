use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Tomogram, ANGLE_TOLERANCE};
use crate::error::{Error, Result};
use crate::phasespace::{FieldKind, PhaseSpaceField, PhaseSpaceGrid, CLASSICAL_NEGATIVITY_TOLERANCE};
use crate::spectral::{signed_index, FftPair};

/// Fewest distinct angles accepted by [`inverse_tomogram`].
pub const MIN_ANGLES: usize = 8;

/// Ramp filter variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RampFilter {
    /// Band-limited `|k|` (Ram-Lak).
    RamLak,
    /// `|k|` apodized by a Hann window.
    #[default]
    Hann,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InverseOptions {
    pub filter: RampFilter,
    pub kind: FieldKind,
    /// Interpolation factor applied to filtered projections before back-projection.
    pub upsample: usize,
}

impl Default for InverseOptions {
    fn default() -> Self {
        Self {
            filter: RampFilter::Hann,
            kind: FieldKind::Wigner,
            upsample: 4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub field: PhaseSpaceField,
    /// Factor applied to the raw back-projection to reach unit mass.
    pub renormalization: f64,
    /// Mass of the raw back-projection.
    pub raw_mass: f64,
    /// Mass removed by clamping: negative values for classical targets,
    /// values below `-1/π` for Wigner targets.
    pub clamped_mass: f64,
}

/// One filtered projection sampled at `x0 + m·step`.
struct FilteredRow {
    theta: f64,
    weight: f64,
    x0: f64,
    step: f64,
    values: Vec<f64>,
}

impl FilteredRow {
    fn eval(&self, x: f64) -> f64 {
        let t = (x - self.x0) / self.step;
        if t < 0.0 {
            return 0.0;
        }
        let m = t.floor() as usize;
        if m + 1 >= self.values.len() {
            return 0.0;
        }
        let frac = t - m as f64;
        self.values[m] * (1.0 - frac) + self.values[m + 1] * frac
    }
}

/// Merges rows with coincident canonical angles and sorts by angle.
fn distinct_rows(tomogram: &Tomogram) -> Vec<(f64, Vec<f64>)> {
    let mut rows: Vec<(f64, &[f64])> = tomogram.angles().into_iter().zip(tomogram.rows()).collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, Vec<f64>, usize)> = Vec::new();
    for (theta, row) in rows {
        match merged.last_mut() {
            Some((t, acc, count)) if (theta - *t).abs() <= ANGLE_TOLERANCE => {
                acc.iter_mut().zip(row).for_each(|(a, v)| *a += v);
                *count += 1;
            }
            _ => merged.push((theta, row.to_vec(), 1)),
        }
    }
    merged
        .into_iter()
        .map(|(t, mut acc, count)| {
            acc.iter_mut().for_each(|a| *a /= count as f64);
            (t, acc)
        })
        .collect()
}

/// Quadrature weights of sorted angles on the half-period `[0, π)`.
fn angular_weights(angles: &[f64]) -> Vec<f64> {
    let k = angles.len();
    (0..k)
        .map(|i| {
            let next = if i + 1 < k { angles[i + 1] } else { angles[0] + PI };
            let prev = if i > 0 { angles[i - 1] } else { angles[k - 1] - PI };
            0.5 * (next - prev)
        })
        .collect()
}

/// Spectrum of the spatial Ram-Lak kernel on a circular buffer of length `len`.
fn ramp_spectrum(len: usize, h: f64, filter: RampFilter) -> Vec<Complex64> {
    let mut kernel: Vec<Complex64> = (0..len)
        .map(|l| {
            let n = signed_index(l, len);
            let v = if n == 0 {
                1.0 / (4.0 * h * h)
            } else if n % 2 != 0 {
                -1.0 / ((n * n) as f64 * PI * PI * h * h)
            } else {
                0.0
            };
            Complex64::new(v * h, 0.0)
        })
        .collect();
    FftPair::new(len).forward.process(&mut kernel);
    if filter == RampFilter::Hann {
        let half = (len / 2) as f64;
        for (l, c) in kernel.iter_mut().enumerate() {
            let k = signed_index(l, len) as f64;
            *c *= 0.5 * (1.0 + (PI * k / half).cos());
        }
    }
    kernel
}

/// Filtered back-projection onto `grid`.
///
/// Frames are first brought to the unit half-circle by homogeneity, rows at
/// coincident angles are averaged, and at least [`MIN_ANGLES`] distinct
/// angles are required. The result is renormalized to unit mass. Classical
/// targets are clamped at zero and Wigner targets at `-1/π`; the clamped
/// mass is reported.
pub fn inverse_tomogram(tomogram: &Tomogram, grid: &PhaseSpaceGrid, opts: &InverseOptions) -> Result<Reconstruction> {
    grid.validate()?;
    if opts.upsample == 0 {
        return Err(Error::InvalidParameter("upsample factor must be positive".into()));
    }
    let canonical = tomogram.canonicalize()?;
    let rows = distinct_rows(&canonical);
    if rows.len() < MIN_ANGLES {
        return Err(Error::TooFewAngles {
            found: rows.len(),
            required: MIN_ANGLES,
        });
    }
    let angles: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let weights = angular_weights(&angles);

    let xg = canonical.x_grid();
    let n = xg.n;
    let h = xg.spacing();
    let len = 2 * n;
    let offset = n / 2;
    let up = opts.upsample;
    let kernel = ramp_spectrum(len, h, opts.filter);
    let fft = FftPair::new(len);
    let fine = FftPair::new(up * len);

    let filtered: Vec<FilteredRow> = rows
        .par_iter()
        .zip(&weights)
        .map(|((theta, row), &weight)| {
            let mut buf = vec![Complex64::new(0.0, 0.0); len];
            for (m, &v) in row.iter().enumerate() {
                buf[offset + m] = Complex64::new(v, 0.0);
            }
            fft.forward.process(&mut buf);
            buf.iter_mut().zip(&kernel).for_each(|(b, k)| *b *= k);
            let mut wide = vec![Complex64::new(0.0, 0.0); up * len];
            for (l, &c) in buf.iter().enumerate() {
                let s = signed_index(l, len);
                if 2 * s.unsigned_abs() as usize == len {
                    wide[len / 2] += 0.5 * c;
                    wide[up * len - len / 2] += 0.5 * c;
                } else {
                    wide[s.rem_euclid((up * len) as i64) as usize] = c;
                }
            }
            fine.inverse.process(&mut wide);
            FilteredRow {
                theta: *theta,
                weight,
                x0: xg.x_min - offset as f64 * h,
                step: h / up as f64,
                values: wide.iter().map(|c| c.re / len as f64).collect(),
            }
        })
        .collect();

    let qs = grid.qs();
    let ps = grid.ps();
    let trig: Vec<(f64, f64)> = filtered.iter().map(|r| r.theta.sin_cos()).collect();
    let mut values = vec![0.0; grid.len()];
    values.par_chunks_mut(grid.n_p).zip(&qs).for_each(|(out, &q)| {
        for (v, &p) in out.iter_mut().zip(&ps) {
            *v = filtered
                .iter()
                .zip(&trig)
                .map(|(r, &(s, c))| r.weight * r.eval(q * c + p * s))
                .sum();
        }
    });

    let area = grid.cell_area();
    let mut clamped_mass = 0.0;
    if opts.kind == FieldKind::Classical {
        for v in values.iter_mut().filter(|v| **v < -CLASSICAL_NEGATIVITY_TOLERANCE) {
            clamped_mass -= *v * area;
            *v = 0.0;
        }
    }
    let raw_mass: f64 = values.iter().sum::<f64>() * area;
    if !raw_mass.is_finite() || raw_mass <= 0.0 {
        return Err(Error::InvalidTomogram(format!("back-projection has mass {raw_mass}")));
    }
    let renormalization = 1.0 / raw_mass;
    values.iter_mut().for_each(|v| *v *= renormalization);
    if opts.kind == FieldKind::Wigner {
        let bound = -1.0 / PI;
        for v in values.iter_mut().filter(|v| **v < bound) {
            clamped_mass += (bound - *v) * area;
            *v = bound;
        }
    }
    let field = PhaseSpaceField::new(*grid, values, opts.kind)?;
    Ok(Reconstruction {
        field,
        renormalization,
        raw_mass,
        clamped_mass,
    })
}
