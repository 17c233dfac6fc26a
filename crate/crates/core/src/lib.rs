//! Tomographic representation of classical and quantum states.
//!
//! Phase-space fields, symplectic tomograms and their inverse, Liouville and
//! Moyal evolution, relative-entropy scoring of frame distributions, and
//! Gaussian separability tests by partial scaling. Units have ħ = 1 unless a
//! function takes `hbar` explicitly.

pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod information;
pub mod io;
pub mod phasespace;
pub mod spectral;
pub mod tomography;

pub use dynamics::{EvolutionMode, EvolutionSpec, Potential};
pub use entanglement::{DispersionMatrix, ScalingVector, Sweep, Verdict};
pub use error::{Error, Result};
pub use information::{FrameDistribution, PlanarDistribution};
pub use phasespace::{FieldKind, PhaseSpaceField, PhaseSpaceGrid};
pub use tomography::{Frame, Tomogram, XGrid};
