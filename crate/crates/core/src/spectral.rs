//! FFT helpers shared by the transforms and the time integrator.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward and inverse plans of one length.
#[derive(Clone)]
pub struct FftPair {
    pub forward: Arc<dyn Fft<f64>>,
    pub inverse: Arc<dyn Fft<f64>>,
    pub len: usize,
}

impl FftPair {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
            len,
        }
    }
}

/// Signed frequency index of DFT bin `l` for a transform of length `n`.
#[inline]
pub fn signed_index(l: usize, n: usize) -> i64 {
    if l <= n / 2 {
        l as i64
    } else {
        l as i64 - n as i64
    }
}

/// Band-limited periodic interpolant of uniformly spaced real samples.
///
/// Samples `f_j` at `x0 + j·h`, `j = 0..n`, define the unique trigonometric
/// polynomial of period `n·h` through them (the Nyquist term, for even `n`,
/// enters as a cosine).
#[derive(Debug, Clone)]
pub struct TrigInterpolant {
    x0: f64,
    period: f64,
    coeffs: Vec<Complex64>,
    nyquist: Option<f64>,
}

impl TrigInterpolant {
    pub fn new(samples: &[f64], x0: f64, h: f64) -> Self {
        let n = samples.len();
        let fft = FftPair::new(n);
        let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft.forward.process(&mut buf);
        let scale = 1.0 / n as f64;
        let half = n.div_ceil(2);
        let coeffs = buf[..half].iter().map(|c| c * scale).collect();
        let nyquist = n.is_multiple_of(2).then(|| buf[n / 2].re * scale);
        Self {
            x0,
            period: n as f64 * h,
            coeffs,
            nyquist,
        }
    }

    /// Value of the interpolant at `x` (periodic in `x`).
    pub fn eval(&self, x: f64) -> f64 {
        let t = 2.0 * PI * (x - self.x0) / self.period;
        let step = Complex64::from_polar(1.0, t);
        let mut z = step;
        let mut acc = self.coeffs[0].re;
        for c in &self.coeffs[1..] {
            acc += 2.0 * (c * z).re;
            z *= step;
        }
        if let Some(nq) = self.nyquist {
            let n = 2 * self.coeffs.len();
            acc += nq * (0.5 * n as f64 * t).cos();
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolant_reproduces_samples() {
        for n in [16usize, 17] {
            let h = 0.3;
            let samples: Vec<f64> = (0..n).map(|j| ((j as f64) * 0.7).sin() + 0.1 * j as f64).collect();
            let interp = TrigInterpolant::new(&samples, -1.0, h);
            for (j, s) in samples.iter().enumerate() {
                assert!((interp.eval(-1.0 + j as f64 * h) - s).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn interpolant_is_exact_for_resolved_gaussian() {
        let n = 128;
        let h = 0.1;
        let x0 = -6.4;
        let samples: Vec<f64> = (0..n).map(|j| (-(x0 + j as f64 * h).powi(2)).exp()).collect();
        let interp = TrigInterpolant::new(&samples, x0, h);
        for k in 0..500 {
            let x = -3.0 + k as f64 * 0.01237;
            assert!((interp.eval(x) - (-x * x).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn signed_index_wraps() {
        assert_eq!(signed_index(0, 8), 0);
        assert_eq!(signed_index(4, 8), 4);
        assert_eq!(signed_index(5, 8), -3);
        assert_eq!(signed_index(4, 7), -3);
    }
}
