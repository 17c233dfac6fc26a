use thiserror::Error;

/// Errors produced by the tomography library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid too narrow: {0}")]
    GridTooNarrow(String),

    #[error("width {width} is not resolvable on a grid with spacing {spacing} (need at least {required})")]
    Unresolvable {
        width: f64,
        spacing: f64,
        required: f64,
    },

    #[error("degenerate state: {0}")]
    DegenerateState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("frame list is empty")]
    EmptyFrames,

    #[error("invalid frame ({mu}, {nu})")]
    InvalidFrame { mu: f64, nu: f64 },

    #[error("x grid clips {fraction:.3e} of the mass at frame ({mu}, {nu})")]
    XGridClipping { fraction: f64, mu: f64, nu: f64 },

    #[error("invalid tomogram: {0}")]
    InvalidTomogram(String),

    #[error("too few distinct angles: found {found}, need at least {required}")]
    TooFewAngles { found: usize, required: usize },

    #[error("inconsistent x grid: {0}")]
    InconsistentXGrid(String),

    #[error("scale factor must be nonzero")]
    ZeroScale,

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("time step {dt} exceeds the stability bound {bound}")]
    UnstableStep { dt: f64, bound: f64 },

    #[error("evolution became unstable at t = {time}: {reason}")]
    Instability { time: f64, reason: String },

    #[error("field kind mismatch: {0}")]
    KindMismatch(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("support violation: P = {p:.3e} where Q = 0 (sample {index})")]
    SupportViolation { index: usize, p: f64 },

    #[error("grid clips {fraction:.3e} of the planar mass")]
    SupportClipping { fraction: f64 },

    #[error("missing frame: {0}")]
    MissingFrame(String),

    #[error("non-finite moment: {0}")]
    NonFiniteMoment(String),

    #[error("dispersion matrix is not symmetric (max asymmetry {asymmetry:.3e})")]
    NonSymmetric { asymmetry: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("scaling constraint violated: |lambda_{first} * lambda_{second}| = {product} < 1")]
    ConstraintViolation {
        first: usize,
        second: usize,
        product: f64,
    },

    #[error("state violates the uncertainty principle (min eigenvalue {min_eigenvalue:.3e})")]
    UncertaintyViolated { min_eigenvalue: f64 },

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Errors raised while running a numerical procedure (as opposed to input
    /// validation or I/O).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::XGridClipping { .. }
                | Error::Instability { .. }
                | Error::NonFiniteMoment(_)
                | Error::UncertaintyViolated { .. }
                | Error::SupportClipping { .. }
                | Error::DegenerateState(_)
        )
    }

    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_) | Error::Format(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
