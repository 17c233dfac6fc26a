//! Run manifests: one JSON document per invocation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tomokit::dynamics::{EvolutionMode, Potential};
use tomokit::entanglement::Sweep;
use tomokit::tomography::{Frame, InverseOptions, RampFilter, XGrid};
use tomokit::{FieldKind, PhaseSpaceGrid};

use crate::error::{CliError, CliResult};

/// Parameter tree for a single command, tagged by `"command"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum RunManifest {
    GenState(GenStateManifest),
    Tomo(TomoManifest),
    Invert(InvertManifest),
    Evolve(EvolveManifest),
    Entropy(EntropyManifest),
    Separability(SeparabilityManifest),
    Plot(PlotManifest),
}

impl RunManifest {
    pub fn command(&self) -> &'static str {
        match self {
            RunManifest::GenState(_) => "gen-state",
            RunManifest::Tomo(_) => "tomo",
            RunManifest::Invert(_) => "invert",
            RunManifest::Evolve(_) => "evolve",
            RunManifest::Entropy(_) => "entropy",
            RunManifest::Separability(_) => "separability",
            RunManifest::Plot(_) => "plot",
        }
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("manifest: {e}")))
    }

    #[cfg(test)]
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    /// Replaces the output path.
    pub fn set_output(&mut self, path: PathBuf) {
        let slot = match self {
            RunManifest::GenState(m) => &mut m.output,
            RunManifest::Tomo(m) => &mut m.output,
            RunManifest::Invert(m) => &mut m.output,
            RunManifest::Evolve(m) => &mut m.output,
            RunManifest::Entropy(m) => &mut m.output,
            RunManifest::Separability(m) => &mut m.output,
            RunManifest::Plot(m) => &mut m.output,
        };
        *slot = Some(path);
    }

    /// Checks every parameter without touching the filesystem.
    pub fn validate(&self) -> CliResult<()> {
        match self {
            RunManifest::GenState(m) => m.validate(),
            RunManifest::Tomo(m) => m.validate(),
            RunManifest::Invert(m) => m.validate(),
            RunManifest::Evolve(m) => m.validate(),
            RunManifest::Entropy(m) => m.validate(),
            RunManifest::Separability(m) => m.validate(),
            RunManifest::Plot(m) => m.validate(),
        }
    }

    /// Input files that must exist.
    pub fn inputs(&self) -> Vec<&Path> {
        match self {
            RunManifest::GenState(_) => vec![],
            RunManifest::Tomo(m) => vec![m.input.as_path()],
            RunManifest::Invert(m) => vec![m.input.as_path()],
            RunManifest::Evolve(m) => vec![m.input.as_path()],
            RunManifest::Entropy(m) => vec![m.input.as_path()],
            RunManifest::Separability(m) => m.matrix.iter().chain(&m.tomograms).map(PathBuf::as_path).collect(),
            RunManifest::Plot(m) => vec![m.input.as_path()],
        }
    }

    pub fn output(&self) -> Option<&Path> {
        match self {
            RunManifest::GenState(m) => m.output.as_deref(),
            RunManifest::Tomo(m) => m.output.as_deref(),
            RunManifest::Invert(m) => m.output.as_deref(),
            RunManifest::Evolve(m) => m.output.as_deref(),
            RunManifest::Entropy(m) => m.output.as_deref(),
            RunManifest::Separability(m) => m.output.as_deref(),
            RunManifest::Plot(m) => m.output.as_deref(),
        }
    }

    /// Whether the command cannot run without an output path.
    pub fn requires_output(&self) -> bool {
        !matches!(self, RunManifest::Entropy(_) | RunManifest::Separability(_))
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn check_grid(grid: &PhaseSpaceGrid) -> CliResult<()> {
    grid.validate().map_err(|e| invalid(format!("grid: {e}")))
}

fn check_finite(name: &str, v: f64) -> CliResult<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite")))
    }
}

fn check_positive(name: &str, v: f64) -> CliResult<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive")))
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StateSpec {
    Vacuum,
    Gaussian {
        q0: f64,
        p0: f64,
        sigma_q: f64,
        sigma_p: f64,
        #[serde(default)]
        corr: f64,
    },
    Delta {
        q0: f64,
        p0: f64,
        eps: f64,
    },
    Cat {
        q0: f64,
        p0: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenStateManifest {
    pub grid: PhaseSpaceGrid,
    pub state: StateSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl GenStateManifest {
    fn validate(&self) -> CliResult<()> {
        check_grid(&self.grid)?;
        match self.state {
            StateSpec::Vacuum => Ok(()),
            StateSpec::Gaussian {
                q0,
                p0,
                sigma_q,
                sigma_p,
                corr,
            } => {
                check_finite("q0", q0)?;
                check_finite("p0", p0)?;
                check_positive("sigma_q", sigma_q)?;
                check_positive("sigma_p", sigma_p)?;
                if !(corr.abs() < 1.0) {
                    return Err(invalid("corr must lie in (-1, 1)"));
                }
                Ok(())
            }
            StateSpec::Delta { q0, p0, eps } => {
                check_finite("q0", q0)?;
                check_finite("p0", p0)?;
                check_positive("eps", eps)
            }
            StateSpec::Cat { q0, p0 } => {
                check_finite("q0", q0)?;
                check_finite("p0", p0)
            }
        }
    }
}

/// Frame selection for `tomo`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FrameSpec {
    /// `count` angles `kπ/count`.
    Uniform { count: usize },
    Angles { angles: Vec<f64> },
    List { frames: Vec<Frame> },
    /// Seeded random angles in `[0, π)`, optionally with a random scale in `scale`.
    Random {
        count: usize,
        seed: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scale: Option<[f64; 2]>,
    },
}

impl FrameSpec {
    fn validate(&self) -> CliResult<()> {
        match self {
            FrameSpec::Uniform { count } | FrameSpec::Random { count, .. } if *count == 0 => {
                Err(invalid("frame count must be positive"))
            }
            FrameSpec::Angles { angles } => {
                if angles.is_empty() {
                    return Err(invalid("angle list is empty"));
                }
                angles.iter().try_for_each(|&a| check_finite("angle", a))
            }
            FrameSpec::List { frames } => {
                if frames.is_empty() {
                    return Err(invalid("frame list is empty"));
                }
                frames
                    .iter()
                    .try_for_each(|f| Frame::new(f.mu, f.nu).map(|_| ()).map_err(|e| invalid(e.to_string())))
            }
            FrameSpec::Random { scale: Some([lo, hi]), .. } => {
                check_positive("scale lower bound", *lo)?;
                check_positive("scale upper bound", *hi)?;
                if lo > hi {
                    return Err(invalid("scale range is reversed"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Whether every frame has unit norm.
    pub fn is_rotation(&self) -> bool {
        match self {
            FrameSpec::Uniform { .. } | FrameSpec::Angles { .. } => true,
            FrameSpec::Random { scale, .. } => scale.is_none(),
            FrameSpec::List { frames } => frames.iter().all(|f| (f.norm() - 1.0).abs() < 1e-12),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TomoMethod {
    #[default]
    Symplectic,
    Radon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TomoManifest {
    pub input: PathBuf,
    pub x_grid: XGrid,
    pub frames: FrameSpec,
    #[serde(default)]
    pub method: TomoMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl TomoManifest {
    fn validate(&self) -> CliResult<()> {
        self.x_grid.validate().map_err(|e| invalid(format!("x_grid: {e}")))?;
        self.frames.validate()?;
        if self.method == TomoMethod::Radon && !self.frames.is_rotation() {
            return Err(invalid("radon method needs unit-norm frames"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvertManifest {
    pub input: PathBuf,
    pub grid: PhaseSpaceGrid,
    #[serde(default)]
    pub filter: RampFilter,
    #[serde(default = "default_kind")]
    pub kind: FieldKind,
    #[serde(default = "default_upsample")]
    pub upsample: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn default_kind() -> FieldKind {
    InverseOptions::default().kind
}

fn default_upsample() -> usize {
    InverseOptions::default().upsample
}

impl InvertManifest {
    fn validate(&self) -> CliResult<()> {
        check_grid(&self.grid)?;
        if self.upsample == 0 {
            return Err(invalid("upsample must be at least 1"));
        }
        Ok(())
    }

    pub fn options(&self) -> InverseOptions {
        InverseOptions {
            filter: self.filter,
            kind: self.kind,
            upsample: self.upsample,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveManifest {
    /// Field or tomogram file; the kind is read from its magic bytes.
    pub input: PathBuf,
    /// Polynomial coefficients of `U(q)`, constant term first.
    pub potential: Vec<f64>,
    pub t_final: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default)]
    pub mode: EvolutionMode,
    /// Extra output times in `[0, t_final]`; `t_final` is always written.
    #[serde(default)]
    pub checkpoints: Vec<f64>,
    /// Reconstruction grid for tomogram input under anharmonic potentials.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<PhaseSpaceGrid>,
    /// Checkpoints are written as `{stem}_t{time:.3}.bin` next to this path.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl EvolveManifest {
    fn validate(&self) -> CliResult<()> {
        self.potential()?;
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(invalid("t_final must be finite and nonnegative"));
        }
        if let Some(dt) = self.dt {
            check_positive("dt", dt)?;
        }
        check_positive("hbar", self.hbar)?;
        for &t in &self.checkpoints {
            if !(t.is_finite() && (0.0..=self.t_final).contains(&t)) {
                return Err(invalid(format!("checkpoint {t} outside [0, {}]", self.t_final)));
            }
        }
        if let Some(grid) = &self.grid {
            check_grid(grid)?;
        }
        let names: Vec<String> = self.times().iter().map(|&t| checkpoint_name("x", t)).collect();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("checkpoint times collide at millisecond resolution"));
        }
        Ok(())
    }

    /// Path of the file written for time `t`.
    pub fn checkpoint_path(&self, t: f64) -> Option<PathBuf> {
        let out = self.output.as_ref()?;
        let stem = out.file_stem()?.to_string_lossy();
        Some(out.with_file_name(checkpoint_name(&stem, t)))
    }

    pub fn potential(&self) -> CliResult<Potential> {
        Potential::new(self.potential.clone()).map_err(|e| invalid(e.to_string()))
    }

    /// Sorted, deduplicated output times ending at `t_final`.
    pub fn times(&self) -> Vec<f64> {
        let mut times = self.checkpoints.clone();
        times.push(self.t_final);
        times.sort_by(f64::total_cmp);
        times.dedup();
        times
    }
}

pub fn checkpoint_name(stem: &str, t: f64) -> String {
    format!("{stem}_t{t:.3}.bin")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntropyInput {
    /// CSV of `(θ, P)` samples.
    Distribution,
    /// Field-format binary holding `P(μ, ν)`.
    Planar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropyManifest {
    pub input: PathBuf,
    /// Defaults to `distribution` for `.csv` inputs and `planar` otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<EntropyInput>,
    #[serde(default = "default_n_theta")]
    pub n_theta: usize,
    /// Optional JSON report.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn default_n_theta() -> usize {
    tomokit::information::DEFAULT_ANGLES
}

impl EntropyManifest {
    fn validate(&self) -> CliResult<()> {
        if self.n_theta == 0 {
            return Err(invalid("n_theta must be positive"));
        }
        Ok(())
    }

    pub fn format(&self) -> EntropyInput {
        self.format.unwrap_or_else(|| {
            let csv = self.input.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
            if csv {
                EntropyInput::Distribution
            } else {
                EntropyInput::Planar
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparabilityManifest {
    /// `2N × 2N` dispersion matrix CSV in interleaved `(q1, p1, q2, p2, …)` order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<PathBuf>,
    /// One tomogram per mode of a product state.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tomograms: Vec<PathBuf>,
    /// Defaults to 201 log-spaced scalings of every mode but the first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default = "one")]
    pub hbar: f64,
    /// Optional JSON report.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl SeparabilityManifest {
    fn validate(&self) -> CliResult<()> {
        match (&self.matrix, self.tomograms.is_empty()) {
            (Some(_), false) => return Err(invalid("give either matrix or tomograms, not both")),
            (None, true) => return Err(invalid("one of matrix or tomograms is required")),
            _ => {}
        }
        if self.tomograms.len() > tomokit::entanglement::MAX_MODES {
            return Err(invalid("too many modes"));
        }
        check_positive("hbar", self.hbar)?;
        if let Some(sweep) = &self.sweep {
            match sweep {
                Sweep::Family { params, .. } if params.is_empty() => return Err(invalid("empty sweep")),
                Sweep::Family { params, .. } => params.iter().try_for_each(|&l| check_positive("sweep parameter", l))?,
                Sweep::Explicit(list) if list.is_empty() => return Err(invalid("empty sweep")),
                Sweep::Explicit(_) => {}
            }
        }
        Ok(())
    }

    pub fn sweep(&self, n_modes: usize) -> Sweep {
        self.sweep.clone().unwrap_or_else(|| Sweep::log_spaced((1..n_modes).collect(), 1e-2, 1e2, 201))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotManifest {
    /// Field or tomogram file.
    pub input: PathBuf,
    #[serde(default = "default_width")]
    pub width: u32,
    #[serde(default = "default_height")]
    pub height: u32,
    /// Tomogram rows to draw; defaults to at most eight evenly spaced rows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn default_width() -> u32 {
    512
}

fn default_height() -> u32 {
    512
}

impl PlotManifest {
    fn validate(&self) -> CliResult<()> {
        if !(16..=8192).contains(&self.width) || !(16..=8192).contains(&self.height) {
            return Err(invalid("image size must lie in [16, 8192]"));
        }
        if matches!(&self.rows, Some(r) if r.is_empty()) {
            return Err(invalid("row list is empty"));
        }
        Ok(())
    }
}
