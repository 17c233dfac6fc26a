//! Second moments of multimode states and the partial-scaling separability
//! test.
//!
//! Matrices are stored in interleaved order `(q1, p1, …, qN, pN)`, where the
//! symplectic form is `R = diag(S, …, S)` with `S = [[0, 1], [-1, 0]]`.

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tomography::{Frame, Tomogram, XGrid};

/// Largest number of modes accepted by [`dispersion_from_tomograms`].
pub const MAX_MODES: usize = 4;

/// Eigenvalues above `-POSITIVITY_TOLERANCE` count as nonnegative.
pub const POSITIVITY_TOLERANCE: f64 = 1e-10;

/// Largest tolerated `|V - Vᵀ|` entry.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// Slack on the pair constraint `|λ_{2k-1} λ_{2k}| ≥ 1`.
pub const CONSTRAINT_TOLERANCE: f64 = 1e-12;

/// Real symmetric `2N × 2N` second-moment matrix in interleaved order.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionMatrix {
    v: DMatrix<f64>,
}

impl DispersionMatrix {
    pub fn new(v: DMatrix<f64>) -> Result<Self> {
        if v.nrows() != v.ncols() || v.nrows() == 0 || !v.nrows().is_multiple_of(2) {
            return Err(Error::Dimension(format!(
                "dispersion matrix must be 2N x 2N, got {} x {}",
                v.nrows(),
                v.ncols()
            )));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteMoment("dispersion matrix has non-finite entries".into()));
        }
        let asymmetry = (&v - v.transpose()).amax();
        if asymmetry > SYMMETRY_TOLERANCE {
            return Err(Error::NonSymmetric { asymmetry });
        }
        Ok(Self { v })
    }

    /// Builds from row-major entries.
    pub fn from_rows(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::Dimension(format!("{} entries for a {dim} x {dim} matrix", entries.len())));
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    /// From a matrix in block order `(q1, …, qN, p1, …, pN)`.
    pub fn from_block_order(v: &DMatrix<f64>) -> Result<Self> {
        Self::new(permute(v, &block_to_interleaved(v.nrows() / 2)))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn n_modes(&self) -> usize {
        self.v.nrows() / 2
    }

    pub fn to_block_order(&self) -> DMatrix<f64> {
        permute(&self.v, &interleaved_to_block(self.n_modes()))
    }

    /// `C = V + (i/2) ħ R`.
    pub fn uncertainty_matrix(&self, hbar: f64) -> DMatrix<Complex<f64>> {
        hermitian_form(&self.v, &symplectic_form(self.n_modes()), hbar)
    }
}

/// `P` with `(P v Pᵀ)_{ab} = v_{perm[a], perm[b]}`.
pub fn permute(v: &DMatrix<f64>, perm: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(perm.len(), perm.len(), |a, b| v[(perm[a], perm[b])])
}

/// Index map: interleaved position `a` reads block position `perm[a]`.
pub fn block_to_interleaved(n_modes: usize) -> Vec<usize> {
    (0..2 * n_modes).map(|a| if a % 2 == 0 { a / 2 } else { n_modes + a / 2 }).collect()
}

/// Index map: block position `a` reads interleaved position `perm[a]`.
pub fn interleaved_to_block(n_modes: usize) -> Vec<usize> {
    (0..2 * n_modes).map(|a| if a < n_modes { 2 * a } else { 2 * (a - n_modes) + 1 }).collect()
}

/// `R = diag(S, …, S)`.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut r = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        r[(2 * k, 2 * k + 1)] = 1.0;
        r[(2 * k + 1, 2 * k)] = -1.0;
    }
    r
}

/// `R` in block order: `[[0, I], [-I, 0]]`.
pub fn symplectic_form_block(n_modes: usize) -> DMatrix<f64> {
    permute(&symplectic_form(n_modes), &interleaved_to_block(n_modes))
}

fn hermitian_form(v: &DMatrix<f64>, r: &DMatrix<f64>, hbar: f64) -> DMatrix<Complex<f64>> {
    DMatrix::from_fn(v.nrows(), v.ncols(), |a, b| Complex::new(v[(a, b)], 0.5 * hbar * r[(a, b)]))
}

/// Smallest eigenvalue of the Hermitian matrix `V + (i/2) ħ R`.
pub fn min_eigenvalue(v: &DMatrix<f64>, r: &DMatrix<f64>, hbar: f64) -> f64 {
    SymmetricEigen::new(hermitian_form(v, r, hbar)).eigenvalues.min()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyReport {
    pub passes: bool,
    pub min_eigenvalue: f64,
}

/// Robertson–Schrödinger positivity `V + (i/2) ħ R ≥ 0`.
pub fn uncertainty_check(v: &DispersionMatrix, hbar: f64) -> UncertaintyReport {
    let min_eigenvalue = min_eigenvalue(&v.v, &symplectic_form(v.n_modes()), hbar);
    UncertaintyReport {
        passes: min_eigenvalue >= -POSITIVITY_TOLERANCE,
        min_eigenvalue,
    }
}

/// Diagonal scaling `(λ_1, …, λ_2N)` with `|λ_{2k-1} λ_{2k}| ≥ 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ScalingVector {
    lambdas: Vec<f64>,
}

impl ScalingVector {
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() || !lambdas.len().is_multiple_of(2) {
            return Err(Error::Dimension(format!("{} scaling parameters", lambdas.len())));
        }
        if let Some(l) = lambdas.iter().find(|l| !l.is_finite() || **l == 0.0) {
            return Err(Error::InvalidParameter(format!("scaling parameter {l}")));
        }
        for (k, pair) in lambdas.chunks(2).enumerate() {
            let product = (pair[0] * pair[1]).abs();
            if product < 1.0 - CONSTRAINT_TOLERANCE {
                return Err(Error::ConstraintViolation {
                    first: 2 * k + 1,
                    second: 2 * k + 2,
                    product,
                });
            }
        }
        Ok(Self { lambdas })
    }

    pub fn identity(n_modes: usize) -> Self {
        Self {
            lambdas: vec![1.0; 2 * n_modes],
        }
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }
}

impl TryFrom<Vec<f64>> for ScalingVector {
    type Error = Error;

    fn try_from(lambdas: Vec<f64>) -> Result<Self> {
        Self::new(lambdas)
    }
}

impl From<ScalingVector> for Vec<f64> {
    fn from(v: ScalingVector) -> Self {
        v.lambdas
    }
}

/// `V^λ = D_λ V D_λ`.
pub fn partial_scaling(v: &DispersionMatrix, lambda: &ScalingVector) -> Result<DispersionMatrix> {
    let l = &lambda.lambdas;
    if l.len() != v.v.nrows() {
        return Err(Error::Dimension(format!("{} scaling parameters for {} quadratures", l.len(), v.v.nrows())));
    }
    Ok(DispersionMatrix {
        v: DMatrix::from_fn(l.len(), l.len(), |a, b| l[a] * v.v[(a, b)] * l[b]),
    })
}

/// Scaling vectors probed by [`separability_test`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sweep {
    /// One-parameter family: the momentum of every mode in `split` is scaled
    /// by `1/l`, then the whole vector by `max(1, √l)` so that the smallest
    /// pair product is one.
    Family { split: Vec<usize>, params: Vec<f64> },
    /// Explicit list.
    Explicit(Vec<ScalingVector>),
}

impl Sweep {
    /// 201 log-spaced `l ∈ [1e-2, 1e2]` scaling the second mode of two.
    pub fn two_mode_default() -> Self {
        Self::log_spaced(vec![1], 1e-2, 1e2, 201)
    }

    pub fn log_spaced(split: Vec<usize>, lo: f64, hi: f64, n: usize) -> Self {
        let params = if n == 1 {
            vec![lo]
        } else {
            (0..n)
                .map(|k| (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / (n - 1) as f64).exp())
                .collect()
        };
        Self::Family { split, params }
    }

    /// `(parameter, λ)` pairs; the parameter of an explicit entry is its index.
    pub fn vectors(&self, n_modes: usize) -> Result<Vec<(f64, ScalingVector)>> {
        match self {
            Sweep::Family { split, params } => {
                if let Some(m) = split.iter().find(|m| **m >= n_modes) {
                    return Err(Error::Dimension(format!("mode {m} in a {n_modes}-mode state")));
                }
                params
                    .iter()
                    .map(|&l| {
                        if !l.is_finite() || l <= 0.0 {
                            return Err(Error::InvalidParameter(format!("sweep parameter {l}")));
                        }
                        let c = l.sqrt().max(1.0);
                        let mut lambdas = vec![c; 2 * n_modes];
                        for &m in split {
                            lambdas[2 * m + 1] = c / l;
                        }
                        Ok((l, ScalingVector::new(lambdas)?))
                    })
                    .collect()
            }
            Sweep::Explicit(list) => Ok(list.iter().enumerate().map(|(k, v)| (k as f64, v.clone())).collect()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    SeparableConsistent,
    Entangled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityReport {
    pub verdict: Verdict,
    /// Scaling with the most negative eigenvalue, when entangled.
    pub witness: Option<ScalingVector>,
    pub witness_parameter: Option<f64>,
    /// Smallest eigenvalue of `C^λ` over the sweep.
    pub min_eigenvalue: f64,
}

/// Necessary condition for separability: `C^λ ≥ 0` for every swept `λ`.
///
/// States failing the plain uncertainty check are rejected.
pub fn separability_test(v: &DispersionMatrix, sweep: &Sweep, hbar: f64) -> Result<SeparabilityReport> {
    let base = uncertainty_check(v, hbar);
    if !base.passes {
        return Err(Error::UncertaintyViolated {
            min_eigenvalue: base.min_eigenvalue,
        });
    }
    let vectors = sweep.vectors(v.n_modes())?;
    if vectors.is_empty() {
        return Err(Error::InvalidParameter("empty sweep".into()));
    }
    let r = symplectic_form(v.n_modes());
    let results: Vec<(f64, f64)> = vectors
        .par_iter()
        .map(|(param, lambda)| {
            let scaled = partial_scaling(v, lambda)?;
            Ok((*param, min_eigenvalue(&scaled.v, &r, hbar)))
        })
        .collect::<Result<_>>()?;
    let (k, &(param, min_eig)) = results
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .expect("non-empty sweep");
    let entangled = min_eig < -POSITIVITY_TOLERANCE;
    Ok(SeparabilityReport {
        verdict: if entangled { Verdict::Entangled } else { Verdict::SeparableConsistent },
        witness: entangled.then(|| vectors[k].1.clone()),
        witness_parameter: entangled.then_some(param),
        min_eigenvalue: min_eig,
    })
}

/// Quadrature `μ q_mode + ν p_mode` of one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub mode: usize,
    pub mu: f64,
    pub nu: f64,
}

impl Quadrature {
    pub fn q(mode: usize) -> Self {
        Self { mode, mu: 1.0, nu: 0.0 }
    }

    pub fn p(mode: usize) -> Self {
        Self { mode, mu: 0.0, nu: 1.0 }
    }
}

/// Joint density of one or two quadratures of distinct modes.
#[derive(Debug, Clone, PartialEq)]
pub enum Marginal {
    One { x: XGrid, density: Vec<f64> },
    /// Row-major, first quadrature outer.
    Two { x: XGrid, y: XGrid, density: Vec<f64> },
}

/// Source of multimode tomogram marginals.
pub trait TomogramProvider {
    fn n_modes(&self) -> usize;

    /// Marginal of the given quadratures (one, or two on distinct modes).
    fn marginal(&self, quadratures: &[Quadrature]) -> Result<Marginal>;
}

/// Uncorrelated modes, each described by its own single-mode tomogram.
pub struct ProductProvider {
    modes: Vec<Tomogram>,
}

impl ProductProvider {
    pub fn new(modes: Vec<Tomogram>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::Dimension("no modes".into()));
        }
        Ok(Self { modes })
    }

    fn row(&self, quad: Quadrature) -> Result<(XGrid, Vec<f64>)> {
        let t = self
            .modes
            .get(quad.mode)
            .ok_or_else(|| Error::Dimension(format!("mode {} of {}", quad.mode, self.modes.len())))?;
        Ok((*t.x_grid(), t.row_at(Frame::new(quad.mu, quad.nu)?)?))
    }
}

impl TomogramProvider for ProductProvider {
    fn n_modes(&self) -> usize {
        self.modes.len()
    }

    fn marginal(&self, quadratures: &[Quadrature]) -> Result<Marginal> {
        match quadratures {
            [a] => {
                let (x, density) = self.row(*a)?;
                Ok(Marginal::One { x, density })
            }
            [a, b] if a.mode != b.mode => {
                let (x, ra) = self.row(*a)?;
                let (y, rb) = self.row(*b)?;
                let density = ra.iter().flat_map(|u| rb.iter().map(move |v| u * v)).collect();
                Ok(Marginal::Two { x, y, density })
            }
            _ => Err(Error::MissingFrame(format!("unsupported quadrature selection {quadratures:?}"))),
        }
    }
}

/// Analytic marginals of a Gaussian state with the given means and
/// interleaved covariance, sampled to `±SIGMAS` standard deviations.
pub struct GaussianProvider {
    mean: Vec<f64>,
    cov: DMatrix<f64>,
    samples: usize,
}

impl GaussianProvider {
    const SIGMAS: f64 = 10.0;

    pub fn new(mean: Vec<f64>, cov: DispersionMatrix, samples: usize) -> Result<Self> {
        if mean.len() != cov.v.nrows() {
            return Err(Error::Dimension(format!("{} means for {} quadratures", mean.len(), cov.v.nrows())));
        }
        if samples < crate::phasespace::MIN_SAMPLES {
            return Err(Error::InvalidParameter(format!("{samples} samples")));
        }
        Ok(Self {
            mean,
            cov: cov.v,
            samples,
        })
    }

    fn coefficients(&self, quad: Quadrature) -> Result<Vec<f64>> {
        let n = self.n_modes();
        if quad.mode >= n {
            return Err(Error::Dimension(format!("mode {} of {n}", quad.mode)));
        }
        let mut c = vec![0.0; 2 * n];
        c[2 * quad.mode] = quad.mu;
        c[2 * quad.mode + 1] = quad.nu;
        Ok(c)
    }

    fn moments(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (i, ai) in a.iter().enumerate() {
            for (j, bj) in b.iter().enumerate() {
                acc += ai * self.cov[(i, j)] * bj;
            }
        }
        acc
    }

    fn axis(&self, c: &[f64]) -> Result<(f64, f64, XGrid)> {
        let mean: f64 = c.iter().zip(&self.mean).map(|(a, m)| a * m).sum();
        let var = self.moments(c, c);
        if !(var > 0.0) {
            return Err(Error::NonFiniteMoment(format!("quadrature variance {var}")));
        }
        let half = Self::SIGMAS * var.sqrt();
        Ok((mean, var, XGrid::new(mean - half, mean + half, self.samples)?))
    }
}

impl TomogramProvider for GaussianProvider {
    fn n_modes(&self) -> usize {
        self.mean.len() / 2
    }

    fn marginal(&self, quadratures: &[Quadrature]) -> Result<Marginal> {
        match quadratures {
            [a] => {
                let (m, var, x) = self.axis(&self.coefficients(*a)?)?;
                let norm = 1.0 / (2.0 * PI * var).sqrt();
                let density = x.xs().iter().map(|u| norm * (-(u - m).powi(2) / (2.0 * var)).exp()).collect();
                Ok(Marginal::One { x, density })
            }
            [a, b] if a.mode != b.mode => {
                let (ca, cb) = (self.coefficients(*a)?, self.coefficients(*b)?);
                let (ma, va, x) = self.axis(&ca)?;
                let (mb, vb, y) = self.axis(&cb)?;
                let cab = self.moments(&ca, &cb);
                let det = va * vb - cab * cab;
                if !(det > 0.0) {
                    return Err(Error::NonFiniteMoment(format!("singular joint covariance {det}")));
                }
                let norm = 1.0 / (2.0 * PI * det.sqrt());
                let ys = y.xs();
                let density = x
                    .xs()
                    .iter()
                    .flat_map(|u| {
                        let du = u - ma;
                        ys.iter().map(move |v| {
                            let dv = v - mb;
                            norm * (-(vb * du * du - 2.0 * cab * du * dv + va * dv * dv) / (2.0 * det)).exp()
                        })
                    })
                    .collect();
                Ok(Marginal::Two { x, y, density })
            }
            _ => Err(Error::MissingFrame(format!("unsupported quadrature selection {quadratures:?}"))),
        }
    }
}

fn finite(value: f64, what: &str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFiniteMoment(what.to_string()))
    }
}

fn variance_of(provider: &dyn TomogramProvider, quad: Quadrature) -> Result<f64> {
    match provider.marginal(&[quad])? {
        Marginal::One { x, density } => {
            let h = x.spacing();
            let xs = x.xs();
            let mass: f64 = density.iter().sum::<f64>() * h;
            let mean = xs.iter().zip(&density).map(|(u, w)| u * w).sum::<f64>() * h / mass;
            let var = xs.iter().zip(&density).map(|(u, w)| (u - mean).powi(2) * w).sum::<f64>() * h / mass;
            finite(var, "variance")
        }
        Marginal::Two { .. } => Err(Error::Dimension("expected a one-component marginal".into())),
    }
}

fn covariance_of(provider: &dyn TomogramProvider, a: Quadrature, b: Quadrature) -> Result<f64> {
    match provider.marginal(&[a, b])? {
        Marginal::Two { x, y, density } => {
            let (xs, ys) = (x.xs(), y.xs());
            let mut mass = 0.0;
            let (mut mx, mut my) = (0.0, 0.0);
            for (i, u) in xs.iter().enumerate() {
                for (j, v) in ys.iter().enumerate() {
                    let w = density[i * y.n + j];
                    mass += w;
                    mx += u * w;
                    my += v * w;
                }
            }
            mx /= mass;
            my /= mass;
            let mut cov = 0.0;
            for (i, u) in xs.iter().enumerate() {
                for (j, v) in ys.iter().enumerate() {
                    cov += (u - mx) * (v - my) * density[i * y.n + j];
                }
            }
            finite(cov / mass, "covariance")
        }
        Marginal::One { .. } => Err(Error::Dimension("expected a two-component marginal".into())),
    }
}

/// Dispersion matrix from tomogram marginals.
///
/// Same-mode position–momentum entries use
/// `V_qp = (Var(q + p) - Var q - Var p) / 2`.
pub fn dispersion_from_tomograms(provider: &dyn TomogramProvider) -> Result<DispersionMatrix> {
    let n = provider.n_modes();
    if n == 0 || n > MAX_MODES {
        return Err(Error::Dimension(format!("{n} modes (supported: 1..={MAX_MODES})")));
    }
    let mut block = DMatrix::zeros(2 * n, 2 * n);
    let var_q: Vec<f64> = (0..n).map(|j| variance_of(provider, Quadrature::q(j))).collect::<Result<_>>()?;
    let var_p: Vec<f64> = (0..n).map(|j| variance_of(provider, Quadrature::p(j))).collect::<Result<_>>()?;
    for j in 0..n {
        block[(j, j)] = var_q[j];
        block[(n + j, n + j)] = var_p[j];
        let var_sum = variance_of(provider, Quadrature { mode: j, mu: 1.0, nu: 1.0 })?;
        let qp = 0.5 * (var_sum - var_q[j] - var_p[j]);
        block[(j, n + j)] = qp;
        block[(n + j, j)] = qp;
        for k in (j + 1)..n {
            let qq = covariance_of(provider, Quadrature::q(j), Quadrature::q(k))?;
            let pp = covariance_of(provider, Quadrature::p(j), Quadrature::p(k))?;
            let qjpk = covariance_of(provider, Quadrature::q(j), Quadrature::p(k))?;
            let qkpj = covariance_of(provider, Quadrature::q(k), Quadrature::p(j))?;
            block[(j, k)] = qq;
            block[(k, j)] = qq;
            block[(n + j, n + k)] = pp;
            block[(n + k, n + j)] = pp;
            block[(j, n + k)] = qjpk;
            block[(n + k, j)] = qjpk;
            block[(k, n + j)] = qkpj;
            block[(n + j, k)] = qkpj;
        }
    }
    DispersionMatrix::from_block_order(&block)
}

/// Two-mode squeezed vacuum with squeezing `r`, interleaved order.
pub fn two_mode_squeezed(r: f64) -> DispersionMatrix {
    let (c, s) = (0.5 * (2.0 * r).cosh(), 0.5 * (2.0 * r).sinh());
    let entries = [
        c, 0.0, s, 0.0, //
        0.0, c, 0.0, -s, //
        s, 0.0, c, 0.0, //
        0.0, -s, 0.0, c,
    ];
    DispersionMatrix::from_rows(4, &entries).expect("symmetric by construction")
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Eigenvalues of `A + iB` through the real embedding `[[A, -B], [B, A]]`,
    /// each appearing twice.
    fn embedded_min_eigenvalue(v: &DMatrix<f64>, r: &DMatrix<f64>) -> f64 {
        let n = v.nrows();
        let b = r * 0.5;
        let m = DMatrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
            (true, true) => v[(i, j)],
            (true, false) => -b[(i, j - n)],
            (false, true) => b[(i - n, j)],
            (false, false) => v[(i - n, j - n)],
        });
        SymmetricEigen::new(m).eigenvalues.min()
    }

    fn scaled_identity(n: usize, s: f64) -> DispersionMatrix {
        DispersionMatrix::new(DMatrix::identity(2 * n, 2 * n) * s).unwrap()
    }

    #[test]
    fn single_mode_checks() {
        let vac = uncertainty_check(&scaled_identity(1, 0.5), 1.0);
        assert!(vac.passes && vac.min_eigenvalue.abs() < 1e-10);
        let bad = uncertainty_check(&scaled_identity(1, 0.4), 1.0);
        assert!(!bad.passes && (bad.min_eigenvalue + 0.1).abs() < 1e-8);
        let thermal = uncertainty_check(&scaled_identity(1, 1.0), 1.0);
        assert!(thermal.passes && (thermal.min_eigenvalue - 0.5).abs() < 1e-12);
    }

    #[test]
    fn hermitian_eigenvalues_match_real_embedding() {
        let v = two_mode_squeezed(0.7);
        let lambda = ScalingVector::new(vec![2.0, 0.6, 1.0, 1.2]).unwrap();
        let scaled = partial_scaling(&v, &lambda).unwrap();
        let r = symplectic_form(2);
        let a = min_eigenvalue(&scaled.v, &r, 1.0);
        let b = embedded_min_eigenvalue(&scaled.v, &r);
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn permutations_are_inverse() {
        for n in 1..=4 {
            let fwd = block_to_interleaved(n);
            let back = interleaved_to_block(n);
            for a in 0..2 * n {
                assert_eq!(back[fwd[a]], a);
            }
        }
        let v = two_mode_squeezed(0.4);
        let round = DispersionMatrix::from_block_order(&v.to_block_order()).unwrap();
        assert_eq!(round, v);
        assert_eq!(symplectic_form_block(2), {
            let mut j = DMatrix::zeros(4, 4);
            j[(0, 2)] = 1.0;
            j[(1, 3)] = 1.0;
            j[(2, 0)] = -1.0;
            j[(3, 1)] = -1.0;
            j
        });
    }

    #[test]
    fn scaling_constraints() {
        assert!(ScalingVector::new(vec![2.0, 0.5]).is_ok());
        assert!(matches!(
            ScalingVector::new(vec![1.0, 1.0, 1.0, 0.5]),
            Err(Error::ConstraintViolation { first: 3, second: 4, .. })
        ));
        assert!(ScalingVector::new(vec![1.0, 0.0]).is_err());
        let v = DispersionMatrix::from_rows(2, &[1.0, 0.3, 0.3, 2.0]).unwrap();
        let s = partial_scaling(&v, &ScalingVector::new(vec![2.0, 0.5]).unwrap()).unwrap();
        assert_eq!(s.matrix()[(0, 0)], 4.0);
        assert_eq!(s.matrix()[(1, 1)], 0.5);
        assert_eq!(s.matrix()[(0, 1)], 0.3);
    }

    #[test]
    fn non_symmetric_is_rejected() {
        assert!(matches!(
            DispersionMatrix::from_rows(2, &[1.0, 0.2, 0.3, 1.0]),
            Err(Error::NonSymmetric { .. })
        ));
    }

    #[test]
    fn sweep_family_satisfies_constraints() {
        for (l, v) in Sweep::two_mode_default().vectors(2).unwrap() {
            let lam = v.lambdas();
            let m = (lam[0] * lam[1]).abs().min((lam[2] * lam[3]).abs());
            assert!((m - 1.0).abs() < 1e-12, "{l}");
        }
    }

    #[test]
    fn vacua_are_separable_and_tmsv_is_not() {
        let sweep = Sweep::two_mode_default();
        let vac = separability_test(&scaled_identity(2, 0.5), &sweep, 1.0).unwrap();
        assert_eq!(vac.verdict, Verdict::SeparableConsistent);
        let tmsv = separability_test(&two_mode_squeezed(1.0), &sweep, 1.0).unwrap();
        assert_eq!(tmsv.verdict, Verdict::Entangled);
        assert!(tmsv.witness.is_some() && tmsv.min_eigenvalue < -1e-10);
        let trivial = Sweep::Explicit(vec![ScalingVector::identity(2)]);
        assert_eq!(separability_test(&two_mode_squeezed(1.0), &trivial, 1.0).unwrap().verdict, Verdict::SeparableConsistent);
        assert!(matches!(
            separability_test(&scaled_identity(2, 0.4), &sweep, 1.0),
            Err(Error::UncertaintyViolated { .. })
        ));
    }

    #[test]
    fn gaussian_provider_reproduces_tmsv() {
        let v = two_mode_squeezed(1.0);
        let provider = GaussianProvider::new(vec![0.3, -0.2, 1.0, 0.5], v.clone(), 256).unwrap();
        let rebuilt = dispersion_from_tomograms(&provider).unwrap();
        let err = (rebuilt.matrix() - v.matrix()).amax();
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn correlated_single_mode_uses_polarization() {
        let v = DispersionMatrix::from_rows(2, &[0.8, 0.25, 0.25, 0.7]).unwrap();
        let provider = GaussianProvider::new(vec![0.0, 0.0], v.clone(), 256).unwrap();
        let rebuilt = dispersion_from_tomograms(&provider).unwrap();
        assert!((rebuilt.matrix() - v.matrix()).amax() < 1e-8);
    }
}
