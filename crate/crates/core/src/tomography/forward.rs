use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use super::{Frame, Tomogram, XGrid, CLIPPING_TOLERANCE};
use crate::error::{Error, Result};
use crate::phasespace::{PhaseSpaceField, PhaseSpaceGrid};
use crate::spectral::FftPair;

/// Gaussian spreading half-width, in oversampled grid cells.
const SPREAD: i64 = 12;

/// Oversampling ratio of the spreading grid.
const OVERSAMPLING: usize = 2;

/// Evaluates the continuous Fourier transform of a sampled field at
/// arbitrary frequencies (type-2 non-uniform FFT with Gaussian gridding).
///
/// `F(κ_q, κ_p) = Σ_ij f_ij e^{-i(κ_q q_i + κ_p p_j)} dq dp`, zero outside the
/// sampling band `|κ_q dq| ≤ π`, `|κ_p dp| ≤ π`.
pub struct SliceProjector {
    grid: PhaseSpaceGrid,
    mass: f64,
    spectrum: Vec<Complex64>,
    m_q: usize,
    m_p: usize,
    tau_q: f64,
    tau_p: f64,
    q_c: f64,
    p_c: f64,
    abs_values: Vec<f64>,
    abs_mass: f64,
}

fn gaussian_tau(n: usize) -> f64 {
    let r = OVERSAMPLING as f64;
    PI * SPREAD as f64 / (r * (r - 0.5) * (n * n) as f64)
}

impl SliceProjector {
    pub fn new(field: &PhaseSpaceField) -> Self {
        let grid = *field.grid();
        let (n_q, n_p) = (grid.n_q, grid.n_p);
        let (m_q, m_p) = (OVERSAMPLING * n_q, OVERSAMPLING * n_p);
        let (tau_q, tau_p) = (gaussian_tau(n_q), gaussian_tau(n_p));
        let deconv = |n: usize, tau: f64| -> Vec<f64> {
            (0..n)
                .map(|i| {
                    let j = i as f64 - (n / 2) as f64;
                    1.0 / ((tau / PI).sqrt() * (-j * j * tau).exp())
                })
                .collect()
        };
        let dq_w = deconv(n_q, tau_q);
        let dp_w = deconv(n_p, tau_p);

        let mut spectrum = vec![Complex64::new(0.0, 0.0); m_q * m_p];
        let values = field.values();
        for i in 0..n_q {
            let jq = i as i64 - (n_q / 2) as i64;
            let row = jq.rem_euclid(m_q as i64) as usize;
            for j in 0..n_p {
                let jp = j as i64 - (n_p / 2) as i64;
                let col = jp.rem_euclid(m_p as i64) as usize;
                spectrum[row * m_p + col] = Complex64::new(values[i * n_p + j] * dq_w[i] * dp_w[j], 0.0);
            }
        }
        fft_2d(&mut spectrum, m_q, m_p);

        let abs_values: Vec<f64> = values.iter().map(|v| v.abs()).collect();
        let abs_mass = abs_values.iter().sum();
        Self {
            grid,
            mass: field.integrate(),
            spectrum,
            m_q,
            m_p,
            tau_q,
            tau_p,
            q_c: grid.q_min + (n_q / 2) as f64 * grid.dq(),
            p_c: grid.p_min + (n_p / 2) as f64 * grid.dp(),
            abs_values,
            abs_mass,
        }
    }

    /// Field mass `Σ f dq dp`, equal to `F(0, 0)`.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Continuous Fourier transform of the field at `(κ_q, κ_p)`.
    pub fn transform(&self, kq: f64, kp: f64) -> Complex64 {
        let (dq, dp) = (self.grid.dq(), self.grid.dp());
        let (u, v) = (kq * dq, kp * dp);
        if u.abs() > PI || v.abs() > PI {
            return Complex64::new(0.0, 0.0);
        }
        let (iu, wu) = spread_weights(u, self.m_q, self.tau_q);
        let (iv, wv) = spread_weights(v, self.m_p, self.tau_p);
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, &wa) in wu.iter().enumerate() {
            let r = (iu + a as i64).rem_euclid(self.m_q as i64) as usize * self.m_p;
            let mut inner = Complex64::new(0.0, 0.0);
            for (b, &wb) in wv.iter().enumerate() {
                let c = (iv + b as i64).rem_euclid(self.m_p as i64) as usize;
                inner += self.spectrum[r + c] * wb;
            }
            acc += inner * wa;
        }
        let scale = dq * dp / (self.m_q * self.m_p) as f64;
        acc * scale * Complex64::from_polar(1.0, -(kq * self.q_c + kp * self.p_c))
    }

    /// Fraction of `Σ|f|` whose quadrature `μq + νp` falls outside the window.
    pub fn clipped_fraction(&self, frame: Frame, x_grid: &XGrid) -> f64 {
        if self.abs_mass == 0.0 {
            return 0.0;
        }
        let qs = self.grid.qs();
        let ps = self.grid.ps();
        let n_p = self.grid.n_p;
        let outside: f64 = qs
            .iter()
            .enumerate()
            .map(|(i, &q)| {
                let row = &self.abs_values[i * n_p..(i + 1) * n_p];
                row.iter()
                    .zip(&ps)
                    .filter(|(_, &p)| !x_grid.contains(frame.mu * q + frame.nu * p))
                    .map(|(v, _)| v)
                    .sum::<f64>()
            })
            .sum();
        outside / self.abs_mass
    }

    /// `w(x_m; μ, ν)` from the Fourier slice `F(kμ, kν)`.
    pub fn row(&self, frame: Frame, x_grid: &XGrid, fft: &FftPair) -> Vec<f64> {
        let n = x_grid.n;
        let h = x_grid.spacing();
        let dk = 2.0 * PI / (n as f64 * h);
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for l in 0..=n / 2 {
            let k = l as f64 * dk;
            let c = self.transform(k * frame.mu, k * frame.nu) * Complex64::from_polar(1.0, k * x_grid.x_min);
            buf[l] = c;
            if l > 0 && l < n - l {
                buf[n - l] = c.conj();
            }
        }
        fft.inverse.process(&mut buf);
        let norm = 1.0 / (n as f64 * h);
        buf.iter().map(|c| c.re * norm).collect()
    }
}

/// Start index and weights `e^{-(u - 2πm/M)²/(4τ)}` of the spreading stencil.
fn spread_weights(u: f64, m: usize, tau: f64) -> (i64, [f64; 2 * SPREAD as usize]) {
    let cell = 2.0 * PI / m as f64;
    let base = (u / cell).floor() as i64 - SPREAD + 1;
    let mut w = [0.0; 2 * SPREAD as usize];
    for (a, slot) in w.iter_mut().enumerate() {
        let d = u - (base + a as i64) as f64 * cell;
        *slot = (-d * d / (4.0 * tau)).exp();
    }
    (base, w)
}

fn fft_2d(data: &mut [Complex64], rows: usize, cols: usize) {
    let row_fft = FftPair::new(cols);
    data.par_chunks_mut(cols).for_each(|r| row_fft.forward.process(r));
    let col_fft = FftPair::new(rows);
    let mut transposed = vec![Complex64::new(0.0, 0.0); rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            transposed[j * rows + i] = data[i * cols + j];
        }
    }
    transposed.par_chunks_mut(rows).for_each(|c| col_fft.forward.process(c));
    for j in 0..cols {
        for i in 0..rows {
            data[i * cols + j] = transposed[j * rows + i];
        }
    }
}

/// Symplectic tomogram `w(x; μ, ν) = ∫∫ f(q, p) δ(x - μq - νp) dq dp`.
///
/// Rows whose quadrature window clips more than `1e-3` of the field's
/// absolute mass are rejected; smaller losses are logged.
pub fn forward_tomogram(field: &PhaseSpaceField, frames: &[Frame], x_grid: &XGrid) -> Result<Tomogram> {
    let rows = forward_rows(field, frames, x_grid)?;
    Tomogram::from_rows(*x_grid, frames.to_vec(), rows)
}

/// Projected rows without the probability checks of [`Tomogram`].
pub fn forward_rows(field: &PhaseSpaceField, frames: &[Frame], x_grid: &XGrid) -> Result<Vec<Vec<f64>>> {
    if frames.is_empty() {
        return Err(Error::EmptyFrames);
    }
    x_grid.validate()?;
    for f in frames {
        Frame::new(f.mu, f.nu)?;
    }
    let projector = SliceProjector::new(field);
    let fft = FftPair::new(x_grid.n);
    frames
        .par_iter()
        .map(|&frame| {
            let clipped = projector.clipped_fraction(frame, x_grid);
            if clipped > CLIPPING_TOLERANCE {
                return Err(Error::XGridClipping {
                    fraction: clipped,
                    mu: frame.mu,
                    nu: frame.nu,
                });
            }
            if clipped > 1e-9 {
                log::warn!(
                    "x window clips {clipped:.3e} of the mass at frame ({}, {})",
                    frame.mu,
                    frame.nu
                );
            }
            Ok(projector.row(frame, x_grid, &fft))
        })
        .collect()
}

/// Rotation-only specialisation: frames `(cos θ, sin θ)`.
pub fn radon_tomogram(field: &PhaseSpaceField, angles: &[f64], x_grid: &XGrid) -> Result<Tomogram> {
    let frames: Vec<Frame> = angles.iter().map(|&t| Frame::from_angle(t)).collect();
    forward_tomogram(field, &frames, x_grid)
}
