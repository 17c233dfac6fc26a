use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use super::XGrid;
use crate::error::{Error, Result};
use crate::phasespace::CAT_MIN_SEPARATION_SQ;

/// Closed-form cat-state tomogram row.
#[derive(Debug, Clone)]
pub struct CatRow {
    /// Row renormalized to unit mass on the x grid.
    pub values: Vec<f64>,
    /// Mass of the row as printed, before renormalization.
    pub raw_mass: f64,
}

/// Tomogram of the odd superposition of coherent states at `±(q0, p0)` at
/// rotation angle `θ`, evaluated term by term from the printed closed form
/// `½ e^{-(q0²+p0²)} {ω_A(x) - ω_B(x) - ω_B*(x) + ω_A(-x)}` and renormalized.
pub fn cat_tomogram_closed_form(x_grid: &XGrid, theta: f64, q0: f64, p0: f64) -> Result<CatRow> {
    x_grid.validate()?;
    if !q0.is_finite() || !p0.is_finite() || !theta.is_finite() {
        return Err(Error::InvalidParameter("non-finite cat parameters".into()));
    }
    if q0 * q0 + p0 * p0 < CAT_MIN_SEPARATION_SQ {
        return Err(Error::DegenerateState(format!(
            "cat components at ±({q0}, {p0}) overlap (q0² + p0² < {CAT_MIN_SEPARATION_SQ})"
        )));
    }
    let (s, c) = theta.sin_cos();
    let common = -q0 * q0 * c * c - p0 * p0 * s * s - 2.0 * q0 * p0 * s * c;
    let omega_a = |x: f64| (-x * x + common + 2.0 * x * q0 * c + 2.0 * x * p0 * s).exp() / PI.sqrt();
    let omega_b = |x: f64| {
        Complex64::new(-x * x + common, -2.0 * x * q0 * s + 2.0 * x * p0 * c).exp() / PI.sqrt()
    };
    let prefactor = 0.5 * (-(q0 * q0 + p0 * p0)).exp();
    let raw: Vec<f64> = x_grid
        .xs()
        .into_iter()
        .map(|x| {
            let b = omega_b(x);
            let bracket = Complex64::new(omega_a(x) + omega_a(-x), 0.0) - b - b.conj();
            prefactor * bracket.re
        })
        .collect();
    let raw_mass = raw.iter().sum::<f64>() * x_grid.spacing();
    if raw_mass <= 0.0 || !raw_mass.is_finite() {
        return Err(Error::DegenerateState(format!("closed-form row has mass {raw_mass}")));
    }
    let values = raw.iter().map(|v| (v / raw_mass).max(0.0)).collect();
    Ok(CatRow { values, raw_mass })
}
