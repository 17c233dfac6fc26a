//! Liouville and Moyal transport of phase-space fields and tomograms.
//!
//! Fields evolve by the method of lines: spectral derivatives on a
//! zero-padded periodic grid and classical RK4 in time. The right-hand side is
//!
//! `∂t f = -p ∂q f + U'(q) ∂p f + Σ_{n≥1} c_n(q) ∂p^{2n+1} f`,
//! `c_n = (-1)^n (ħ/2)^{2n} U^{(2n+1)}(q) / (2n+1)!`,
//!
//! where the sum is present only in quantum mode and terminates for
//! polynomial `U`. Tomograms under potentials of degree at most two move
//! along exact characteristics; higher degrees go through phase space.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phasespace::{FieldKind, PhaseSpaceField, PhaseSpaceGrid, CLASSICAL_NEGATIVITY_TOLERANCE, RESOLUTION_FACTOR};
use crate::spectral::{signed_index, FftPair, TrigInterpolant};
use crate::tomography::{forward_rows, inverse_tomogram, Frame, InverseOptions, Tomogram, XGrid};

/// Highest supported polynomial degree.
pub const MAX_DEGREE: usize = 6;

/// Values above this magnitude abort an evolution.
pub const BLOWUP_THRESHOLD: f64 = 1e6;

/// Largest tolerated mass drift.
pub const MASS_DRIFT_TOLERANCE: f64 = 1e-3;

/// Largest tolerated fraction of absolute mass inside the padding band.
pub const PAD_LEAK_TOLERANCE: f64 = 1e-3;

/// Default step as a fraction of the stability bound.
pub const DEFAULT_DT_FRACTION: f64 = 0.1;

/// Polynomial potential `U(q) = Σ c_k q^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    coeffs: Vec<f64>,
}

impl Potential {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if let Some(c) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidPotential(format!("non-finite coefficient {c}")));
        }
        let mut coeffs = coeffs;
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.len() > MAX_DEGREE + 1 {
            return Err(Error::InvalidPotential(format!(
                "degree {} exceeds {MAX_DEGREE}",
                coeffs.len() - 1
            )));
        }
        Ok(Self { coeffs })
    }

    /// `U = 0`.
    pub fn free() -> Self {
        Self { coeffs: vec![] }
    }

    /// `U = ω² q² / 2`.
    pub fn harmonic(omega: f64) -> Self {
        Self {
            coeffs: vec![0.0, 0.0, 0.5 * omega * omega],
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `q^k`.
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn value(&self, q: f64) -> f64 {
        self.derivative(0, q)
    }

    /// `U^{(order)}(q)`.
    pub fn derivative(&self, order: usize, q: f64) -> f64 {
        let mut acc = 0.0;
        for k in (order..self.coeffs.len()).rev() {
            let falling: f64 = ((k - order + 1)..=k).map(|m| m as f64).product();
            acc = acc * q + self.coeffs[k] * falling;
        }
        acc
    }

    /// Orders `n ≥ 1` of the Moyal terms present for this potential
    /// (`2n + 1 ≤ degree`).
    pub fn moyal_orders(&self) -> Vec<usize> {
        (1..).take_while(|n| 2 * n < self.degree()).collect()
    }

    /// `c_n(q) = (-1)^n (ħ/2)^{2n} U^{(2n+1)}(q) / (2n+1)!`.
    pub fn moyal_coefficient(&self, n: usize, hbar: f64, q: f64) -> f64 {
        let order = 2 * n + 1;
        let factorial: f64 = (1..=order).map(|m| m as f64).product();
        let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        sign * (0.5 * hbar).powi(2 * n as i32) / factorial * self.derivative(order, q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum EvolutionMode {
    #[default]
    Classical,
    Quantum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionSpec {
    pub t_final: f64,
    /// Time step; `None` selects a tenth of the stability bound.
    pub dt: Option<f64>,
    pub hbar: f64,
    pub mode: EvolutionMode,
}

impl EvolutionSpec {
    pub fn new(t_final: f64, mode: EvolutionMode) -> Self {
        Self {
            t_final,
            dt: None,
            hbar: 1.0,
            mode,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }

    pub fn with_hbar(mut self, hbar: f64) -> Self {
        self.hbar = hbar;
        self
    }

    fn validate(&self) -> Result<()> {
        if !self.t_final.is_finite() || self.t_final < 0.0 {
            return Err(Error::InvalidParameter(format!("t_final = {}", self.t_final)));
        }
        if !self.hbar.is_finite() || self.hbar <= 0.0 {
            return Err(Error::InvalidParameter(format!("hbar = {}", self.hbar)));
        }
        if let Some(dt) = self.dt {
            if !dt.is_finite() || dt <= 0.0 {
                return Err(Error::InvalidParameter(format!("dt = {dt}")));
            }
        }
        Ok(())
    }
}

/// Cells of zero padding added on each side of each axis.
fn pad_cells(n: usize) -> usize {
    n / 8
}

fn padded_grid(grid: &PhaseSpaceGrid) -> PhaseSpaceGrid {
    let (pq, pp) = (pad_cells(grid.n_q), pad_cells(grid.n_p));
    PhaseSpaceGrid {
        q_min: grid.q_min - pq as f64 * grid.dq(),
        q_max: grid.q_max + pq as f64 * grid.dq(),
        p_min: grid.p_min - pp as f64 * grid.dp(),
        p_max: grid.p_max + pp as f64 * grid.dp(),
        n_q: grid.n_q + 2 * pq,
        n_p: grid.n_p + 2 * pp,
    }
}

fn max_abs(values: impl Iterator<Item = f64>) -> f64 {
    values.map(f64::abs).fold(0.0, f64::max)
}

/// Largest stable RK4 step on `grid` (evaluated over its padded extension).
///
/// Advection gives `0.5 · min(dq / max|p|, dp / max|U'|)`; in quantum mode
/// each Moyal term of order `2n+1` adds `1.57 / (max|c_n| (π/dp)^{2n+1})`.
pub fn stability_bound(grid: &PhaseSpaceGrid, potential: &Potential, mode: EvolutionMode, hbar: f64) -> f64 {
    let padded = padded_grid(grid);
    let (dq, dp) = (grid.dq(), grid.dp());
    let qs = padded.qs();
    let p_max = padded.p_min.abs().max(padded.p_max.abs());
    let force_max = max_abs(qs.iter().map(|&q| potential.derivative(1, q)));
    let mut bound = f64::INFINITY;
    if p_max > 0.0 {
        bound = bound.min(0.5 * dq / p_max);
    }
    if force_max > 0.0 {
        bound = bound.min(0.5 * dp / force_max);
    }
    if mode == EvolutionMode::Quantum {
        for n in potential.moyal_orders() {
            let c_max = max_abs(qs.iter().map(|&q| potential.moyal_coefficient(n, hbar, q)));
            let rate = c_max * (PI / dp).powi(2 * n as i32 + 1);
            if rate > 0.0 {
                bound = bound.min(1.57 / rate);
            }
        }
    }
    bound
}

/// Spectral right-hand side on the padded grid.
struct Rhs {
    n_q: usize,
    n_p: usize,
    ps: Vec<f64>,
    fft_q: FftPair,
    fft_p: FftPair,
    kq: Vec<f64>,
    kp: Vec<f64>,
    /// `(order, coefficient per q row)` for every `∂p` term.
    p_terms: Vec<(usize, Vec<f64>)>,
}

impl Rhs {
    fn new(grid: &PhaseSpaceGrid, potential: &Potential, mode: EvolutionMode, hbar: f64) -> Self {
        let qs = grid.qs();
        let wavenumbers = |n: usize, d: f64| -> Vec<f64> {
            (0..n)
                .map(|l| {
                    if n.is_multiple_of(2) && l == n / 2 {
                        0.0
                    } else {
                        2.0 * PI * signed_index(l, n) as f64 / (n as f64 * d)
                    }
                })
                .collect()
        };
        let mut p_terms = vec![(1, qs.iter().map(|&q| potential.derivative(1, q)).collect())];
        if mode == EvolutionMode::Quantum {
            for n in potential.moyal_orders() {
                p_terms.push((2 * n + 1, qs.iter().map(|&q| potential.moyal_coefficient(n, hbar, q)).collect()));
            }
        }
        Self {
            n_q: grid.n_q,
            n_p: grid.n_p,
            ps: grid.ps(),
            fft_q: FftPair::new(grid.n_q),
            fft_p: FftPair::new(grid.n_p),
            kq: wavenumbers(grid.n_q, grid.dq()),
            kp: wavenumbers(grid.n_p, grid.dp()),
            p_terms,
        }
    }

    fn eval(&self, f: &[f64], out: &mut [f64]) {
        let (n_q, n_p) = (self.n_q, self.n_p);
        let free = self.p_terms[0].1.iter().all(|&c| c == 0.0) && self.p_terms.len() == 1;

        // p-derivative terms along contiguous rows.
        out.par_chunks_mut(n_p).enumerate().for_each(|(i, row_out)| {
            row_out.iter_mut().for_each(|v| *v = 0.0);
            if free {
                return;
            }
            let mut spec: Vec<Complex64> = f[i * n_p..(i + 1) * n_p].iter().map(|&v| Complex64::new(v, 0.0)).collect();
            self.fft_p.forward.process(&mut spec);
            let mut buf = vec![Complex64::new(0.0, 0.0); n_p];
            for (order, coeff) in &self.p_terms {
                let c = coeff[i];
                if c == 0.0 {
                    continue;
                }
                for ((b, s), &k) in buf.iter_mut().zip(&spec).zip(&self.kp) {
                    *b = s * Complex64::new(0.0, k).powu(*order as u32);
                }
                self.fft_p.inverse.process(&mut buf);
                let scale = c / n_p as f64;
                for (o, b) in row_out.iter_mut().zip(&buf) {
                    *o += scale * b.re;
                }
            }
        });

        // -p ∂q f along strided columns.
        let columns: Vec<Vec<f64>> = (0..n_p)
            .into_par_iter()
            .map(|j| {
                let mut buf: Vec<Complex64> = (0..n_q).map(|i| Complex64::new(f[i * n_p + j], 0.0)).collect();
                self.fft_q.forward.process(&mut buf);
                for (b, &k) in buf.iter_mut().zip(&self.kq) {
                    *b *= Complex64::new(0.0, k);
                }
                self.fft_q.inverse.process(&mut buf);
                let scale = -self.ps[j] / n_q as f64;
                buf.iter().map(|b| scale * b.re).collect()
            })
            .collect();
        out.par_chunks_mut(n_p).enumerate().for_each(|(i, row_out)| {
            for (j, o) in row_out.iter_mut().enumerate() {
                *o += columns[j][i];
            }
        });
    }
}

/// Field at one requested time.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub time: f64,
    pub field: PhaseSpaceField,
    /// Mass removed by clamping negative values of classical fields.
    pub clamped_mass: f64,
}

/// Result of [`evolve_field_checkpoints`].
#[derive(Debug, Clone)]
pub struct Evolution {
    pub snapshots: Vec<Snapshot>,
    /// Nominal step used.
    pub dt: f64,
    pub steps: usize,
}

/// Evolves `field` to `spec.t_final`.
pub fn evolve_field(field: &PhaseSpaceField, potential: &Potential, spec: &EvolutionSpec) -> Result<PhaseSpaceField> {
    let mut evo = evolve_field_checkpoints(field, potential, spec, &[])?;
    Ok(evo.snapshots.pop().expect("final snapshot").field)
}

/// Evolves `field` and records snapshots at every time in `checkpoints`
/// (each in `[0, t_final]`) and at `t_final`.
pub fn evolve_field_checkpoints(
    field: &PhaseSpaceField,
    potential: &Potential,
    spec: &EvolutionSpec,
    checkpoints: &[f64],
) -> Result<Evolution> {
    spec.validate()?;
    if spec.mode == EvolutionMode::Quantum && field.kind() != FieldKind::Wigner {
        return Err(Error::KindMismatch("quantum evolution needs a Wigner field".into()));
    }
    let mut times: Vec<f64> = checkpoints.to_vec();
    if let Some(t) = times.iter().find(|t| !t.is_finite() || **t < 0.0 || **t > spec.t_final) {
        return Err(Error::InvalidParameter(format!("checkpoint {t} outside [0, {}]", spec.t_final)));
    }
    times.push(spec.t_final);
    times.sort_by(f64::total_cmp);
    times.dedup();

    let grid = *field.grid();
    let bound = stability_bound(&grid, potential, spec.mode, spec.hbar);
    let dt = match spec.dt {
        Some(dt) if dt > bound => return Err(Error::UnstableStep { dt, bound }),
        Some(dt) => dt,
        None => DEFAULT_DT_FRACTION * bound,
    };

    let padded = padded_grid(&grid);
    let (pq, pp) = (pad_cells(grid.n_q), pad_cells(grid.n_p));
    let mut state = vec![0.0; padded.len()];
    for i in 0..grid.n_q {
        let dst = (i + pq) * padded.n_p + pp;
        state[dst..dst + grid.n_p].copy_from_slice(&field.values()[i * grid.n_p..(i + 1) * grid.n_p]);
    }
    let area = grid.cell_area();
    let mass0 = state.iter().sum::<f64>() * area;
    let rhs = Rhs::new(&padded, potential, spec.mode, spec.hbar);
    let interior = |i: usize, j: usize| i >= pq && i < pq + grid.n_q && j >= pp && j < pp + grid.n_p;

    let mut stepper = Rk4::new(state.len());
    let mut t = 0.0;
    let mut steps = 0;
    let mut snapshots = Vec::with_capacity(times.len());
    for &target in &times {
        let span = target - t;
        if span > 0.0 {
            let n = (span / dt).ceil().max(1.0) as usize;
            let h = span / n as f64;
            for _ in 0..n {
                stepper.step(&rhs, &mut state, h);
                steps += 1;
                t += h;
                check_health(&state, padded.n_p, &interior, mass0, area, t)?;
            }
        }
        t = target;
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.n_q {
            let src = (i + pq) * padded.n_p + pp;
            values.extend_from_slice(&state[src..src + grid.n_p]);
        }
        let mut clamped_mass = 0.0;
        if field.kind() == FieldKind::Classical {
            for v in values.iter_mut().filter(|v| **v < -CLASSICAL_NEGATIVITY_TOLERANCE) {
                clamped_mass -= *v * area;
                *v = 0.0;
            }
        }
        let out = PhaseSpaceField::with_hbar(grid, values, field.kind(), spec.hbar)?;
        snapshots.push(Snapshot {
            time: target,
            field: out,
            clamped_mass,
        });
    }
    Ok(Evolution { snapshots, dt, steps })
}

fn check_health(
    state: &[f64],
    n_p: usize,
    interior: &impl Fn(usize, usize) -> bool,
    mass0: f64,
    area: f64,
    time: f64,
) -> Result<()> {
    let mut mass = 0.0;
    let mut abs_total = 0.0;
    let mut abs_pad = 0.0;
    let mut peak: f64 = 0.0;
    for (idx, &v) in state.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::Instability {
                time,
                reason: "non-finite value".into(),
            });
        }
        mass += v;
        abs_total += v.abs();
        peak = peak.max(v.abs());
        if !interior(idx / n_p, idx % n_p) {
            abs_pad += v.abs();
        }
    }
    if peak > BLOWUP_THRESHOLD {
        return Err(Error::Instability {
            time,
            reason: format!("value {peak:.3e} exceeds {BLOWUP_THRESHOLD:e}"),
        });
    }
    let drift = (mass * area - mass0).abs();
    if drift > MASS_DRIFT_TOLERANCE {
        return Err(Error::Instability {
            time,
            reason: format!("mass drifted by {drift:.3e}"),
        });
    }
    if abs_total > 0.0 && abs_pad / abs_total > PAD_LEAK_TOLERANCE {
        return Err(Error::Instability {
            time,
            reason: format!("{:.3e} of the mass reached the padding band", abs_pad / abs_total),
        });
    }
    Ok(())
}

struct Rk4 {
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
}

impl Rk4 {
    fn new(len: usize) -> Self {
        Self {
            k: std::array::from_fn(|_| vec![0.0; len]),
            tmp: vec![0.0; len],
        }
    }

    fn step(&mut self, rhs: &Rhs, state: &mut [f64], h: f64) {
        let [k1, k2, k3, k4] = &mut self.k;
        rhs.eval(state, k1);
        axpy(&mut self.tmp, state, 0.5 * h, k1);
        rhs.eval(&self.tmp, k2);
        axpy(&mut self.tmp, state, 0.5 * h, k2);
        rhs.eval(&self.tmp, k3);
        axpy(&mut self.tmp, state, h, k3);
        rhs.eval(&self.tmp, k4);
        state
            .par_iter_mut()
            .enumerate()
            .for_each(|(i, s)| *s += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    }
}

fn axpy(out: &mut [f64], x: &[f64], a: f64, y: &[f64]) {
    out.par_iter_mut()
        .zip(x.par_iter().zip(y.par_iter()))
        .for_each(|(o, (x, y))| *o = x + a * y);
}

/// Affine classical flow `z(t) = Φ z(0) + b` of a potential of degree ≤ 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineFlow {
    pub phi: [[f64; 2]; 2],
    pub b: [f64; 2],
}

impl AffineFlow {
    pub fn new(potential: &Potential, t: f64) -> Result<Self> {
        if potential.degree() > 2 {
            return Err(Error::InvalidPotential(format!(
                "degree {} flow is not affine",
                potential.degree()
            )));
        }
        let c1 = potential.coeff(1);
        let c2 = potential.coeff(2);
        let (phi, b) = if c2 == 0.0 {
            ([[1.0, t], [0.0, 1.0]], [-0.5 * c1 * t * t, -c1 * t])
        } else {
            let phi = if c2 > 0.0 {
                let w = (2.0 * c2).sqrt();
                let (s, c) = (w * t).sin_cos();
                [[c, s / w], [-w * s, c]]
            } else {
                let w = (-2.0 * c2).sqrt();
                let (s, c) = ((w * t).sinh(), (w * t).cosh());
                [[c, s / w], [w * s, c]]
            };
            let q_star = -c1 / (2.0 * c2);
            ([phi[0], phi[1]], [(1.0 - phi[0][0]) * q_star, -phi[1][0] * q_star])
        };
        Ok(Self { phi, b })
    }

    /// Frame at time `t` carrying the row measured at `m0` at time 0:
    /// `m = Φ^{-T} m0` (Φ has unit determinant).
    pub fn transport_frame(&self, m0: Frame) -> Frame {
        let [[a, b], [c, d]] = self.phi;
        Frame {
            mu: d * m0.mu - c * m0.nu,
            nu: -b * m0.mu + a * m0.nu,
        }
    }
}

/// Tomogram evolution.
///
/// Potentials of degree ≤ 2 move each row along the exact classical flow and
/// return rows on the transported frames (brought to canonical form).
/// Higher degrees invert onto `grid`, evolve the field and project back onto
/// the input frames.
pub fn evolve_tomogram(
    tomogram: &Tomogram,
    potential: &Potential,
    spec: &EvolutionSpec,
    grid: &PhaseSpaceGrid,
) -> Result<Tomogram> {
    spec.validate()?;
    if spec.t_final == 0.0 {
        return Ok(tomogram.clone());
    }
    if potential.degree() <= 2 {
        transport_tomogram(tomogram, potential, spec.t_final)
    } else {
        let opts = InverseOptions {
            kind: match spec.mode {
                EvolutionMode::Quantum => FieldKind::Wigner,
                EvolutionMode::Classical => FieldKind::Classical,
            },
            ..InverseOptions::default()
        };
        evolve_tomogram_phase_space(tomogram, potential, spec, grid, &opts, tomogram.frames())
    }
}

fn transport_tomogram(tomogram: &Tomogram, potential: &Potential, t: f64) -> Result<Tomogram> {
    let flow = AffineFlow::new(potential, t)?;
    let xg = *tomogram.x_grid();
    let h = xg.spacing();
    let mut frames = Vec::with_capacity(tomogram.n_frames());
    let rows: Vec<Vec<f64>> = tomogram
        .frames()
        .iter()
        .enumerate()
        .map(|(k, &m0)| {
            let m = flow.transport_frame(m0);
            let (c, s) = m.canonical();
            frames.push(c);
            let shift = m.mu * flow.b[0] + m.nu * flow.b[1];
            let interp = TrigInterpolant::new(tomogram.row(k), xg.x_min, h);
            xg.xs()
                .into_iter()
                .map(|y| {
                    let x = s * y - shift;
                    if xg.contains(x) {
                        s.abs() * interp.eval(x)
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    Tomogram::from_rows(xg, frames, rows)
}

/// Phase-space route: invert onto `grid`, evolve, then project onto `frames`.
///
/// Projections of the reconstructed field can carry small negative ringing;
/// it is clamped and each row renormalized.
pub fn evolve_tomogram_phase_space(
    tomogram: &Tomogram,
    potential: &Potential,
    spec: &EvolutionSpec,
    grid: &PhaseSpaceGrid,
    opts: &InverseOptions,
    frames: &[Frame],
) -> Result<Tomogram> {
    let rec = inverse_tomogram(tomogram, grid, opts)?;
    let evolved = evolve_field(&rec.field, potential, spec)?;
    project_clamped(&evolved, frames, tomogram.x_grid())
}

fn project_clamped(field: &PhaseSpaceField, frames: &[Frame], x_grid: &XGrid) -> Result<Tomogram> {
    let h = x_grid.spacing();
    let raw = forward_rows(field, frames, x_grid)?;
    let rows = raw
        .into_iter()
        .map(|mut row| {
            row.iter_mut().for_each(|v| *v = v.max(0.0));
            let mass = row.iter().sum::<f64>() * h;
            if mass > 0.0 {
                row.iter_mut().for_each(|v| *v /= mass);
            }
            row
        })
        .collect();
    Tomogram::from_rows(*x_grid, frames.to_vec(), rows)
}

/// Free-motion tomogram of the eps-smoothed point `(q0, p0)` at time `t`:
/// a Gaussian in `x` centred at `μ(q0 + t p0) + ν p0` with width
/// `eps · |(μ, ν + tμ)|`.
pub fn free_tomogram_analytic(x_grid: &XGrid, frame: Frame, q0: f64, p0: f64, eps: f64, t: f64) -> Result<Vec<f64>> {
    x_grid.validate()?;
    let frame = Frame::new(frame.mu, frame.nu)?;
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps = {eps}")));
    }
    let width = eps * frame.mu.hypot(frame.nu + t * frame.mu);
    let required = RESOLUTION_FACTOR * x_grid.spacing();
    if width < required {
        return Err(Error::Unresolvable {
            width,
            spacing: x_grid.spacing(),
            required,
        });
    }
    let centre = frame.mu * (q0 + t * p0) + frame.nu * p0;
    let norm = 1.0 / (width * (2.0 * PI).sqrt());
    Ok(x_grid
        .xs()
        .into_iter()
        .map(|x| norm * (-(x - centre).powi(2) / (2.0 * width * width)).exp())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phasespace::{make_delta_approx, make_gaussian, make_vacuum};

    #[test]
    fn potential_derivatives() {
        let u = Potential::new(vec![1.0, -2.0, 0.5, 0.0, 0.25]).unwrap();
        assert_eq!(u.degree(), 4);
        let q = 1.3;
        assert!((u.value(q) - (1.0 - 2.0 * q + 0.5 * q * q + 0.25 * q.powi(4))).abs() < 1e-14);
        assert!((u.derivative(1, q) - (-2.0 + q + q.powi(3))).abs() < 1e-14);
        assert!((u.derivative(3, q) - 6.0 * q).abs() < 1e-14);
        assert_eq!(u.derivative(5, q), 0.0);
        assert!(Potential::new(vec![0.0; 8].into_iter().chain([1.0]).collect()).is_err());
        assert_eq!(Potential::new(vec![0.0, 0.0, 0.5, 0.0]).unwrap().degree(), 2);
    }

    #[test]
    fn moyal_series_terminates() {
        assert!(Potential::harmonic(1.0).moyal_orders().is_empty());
        let quartic = Potential::new(vec![0.0, 0.0, 0.0, 0.0, 0.25]).unwrap();
        assert_eq!(quartic.moyal_orders(), vec![1]);
        // -ħ²/24 · U''' with U''' = 6q.
        assert!((quartic.moyal_coefficient(1, 1.0, 2.0) + 0.5).abs() < 1e-15);
        let sextic = Potential::new(vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(sextic.moyal_orders(), vec![1, 2]);
    }

    #[test]
    fn affine_flow_has_unit_determinant() {
        for u in [Potential::free(), Potential::harmonic(1.3), Potential::new(vec![0.0, 0.4, -0.7]).unwrap()] {
            let flow = AffineFlow::new(&u, 0.9).unwrap();
            let [[a, b], [c, d]] = flow.phi;
            assert!((a * d - b * c - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn free_delta_translates() {
        let grid = PhaseSpaceGrid::square(6.0, 96).unwrap();
        let field = make_delta_approx(grid, -1.0, 1.0, 0.3).unwrap();
        let spec = EvolutionSpec::new(1.5, EvolutionMode::Classical);
        let out = evolve_field(&field, &Potential::free(), &spec).unwrap();
        let mq = out.expectation(|q, _| q);
        let mp = out.expectation(|_, p| p);
        assert!((mq - 0.5).abs() < 1e-6, "{mq}");
        assert!((mp - 1.0).abs() < 1e-6, "{mp}");
        assert!((out.integrate() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn vacuum_is_stationary() {
        let grid = PhaseSpaceGrid::square(6.0, 64).unwrap();
        let field = make_vacuum(grid).unwrap();
        let u = Potential::harmonic(1.0);
        let bound = stability_bound(&grid, &u, EvolutionMode::Quantum, 1.0);
        let spec = EvolutionSpec::new(1.0, EvolutionMode::Quantum).with_dt(0.5 * bound);
        let out = evolve_field(&field, &u, &spec).unwrap();
        assert!(out.l1_distance(&field).unwrap() < 1e-6);
    }

    #[test]
    fn rejects_unstable_step_and_kind() {
        let grid = PhaseSpaceGrid::square(6.0, 32).unwrap();
        let field = make_gaussian(grid, 0.0, 0.0, 0.2, 0.2, 0.0).unwrap();
        let u = Potential::harmonic(1.0);
        let bound = stability_bound(&grid, &u, EvolutionMode::Classical, 1.0);
        let spec = EvolutionSpec::new(1.0, EvolutionMode::Classical).with_dt(2.0 * bound);
        assert!(matches!(evolve_field(&field, &u, &spec), Err(Error::UnstableStep { .. })));
        let spec = EvolutionSpec::new(1.0, EvolutionMode::Quantum);
        assert!(matches!(evolve_field(&field, &u, &spec), Err(Error::KindMismatch(_))));
    }

    #[test]
    fn leak_into_padding_is_fatal() {
        let grid = PhaseSpaceGrid::square(6.0, 64).unwrap();
        let field = make_gaussian(grid, 2.0, 3.0, 0.4, 0.4, 0.0).unwrap();
        let spec = EvolutionSpec::new(3.0, EvolutionMode::Classical);
        assert!(matches!(
            evolve_field(&field, &Potential::free(), &spec),
            Err(Error::Instability { .. })
        ));
    }

    #[test]
    fn checkpoints_land_on_requested_times() {
        let grid = PhaseSpaceGrid::square(6.0, 48).unwrap();
        let field = make_vacuum(grid).unwrap();
        let spec = EvolutionSpec::new(0.3, EvolutionMode::Classical);
        let evo = evolve_field_checkpoints(&field, &Potential::harmonic(1.0), &spec, &[0.1, 0.0, 0.2]).unwrap();
        let times: Vec<f64> = evo.snapshots.iter().map(|s| s.time).collect();
        assert_eq!(times, vec![0.0, 0.1, 0.2, 0.3]);
        assert_eq!(evo.snapshots[0].field, field);
    }

    #[test]
    fn free_analytic_peak() {
        let xg = XGrid::symmetric(8.0, 512).unwrap();
        let row = free_tomogram_analytic(&xg, Frame::new(1.0, 0.0).unwrap(), 0.0, 1.0, 0.1, 2.0).unwrap();
        let (m, _) = row.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        assert!((xg.x(m) - 2.0).abs() <= xg.spacing());
        assert!(free_tomogram_analytic(&xg, Frame::new(1.0, 0.0).unwrap(), 0.0, 1.0, 0.01, 0.0).is_err());
    }
}
