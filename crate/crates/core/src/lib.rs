//! Typicality certificates, proximal periodic orbit synthesis and spectral
//! experiments for locally constant linear cocycles over subshifts of finite
//! type.
//!
//! The crate is organised bottom-up:
//!
//! * [`sft`]: the base dynamics (adjacency, bridges, eventually periodic points).
//! * [`matnum`]: projective geometry and stable spectral numerics on `GL(d,R)`.
//! * [`cocycle`]: window cocycles, exact holonomies and exterior powers.
//! * [`typicality`]: pinching and twisting certificates.
//! * [`proximal`]: certified epsilon-proximality tests.
//! * [`synthesis`]: construction of proximal periodic orbits shadowing a cylinder.
//! * [`analysis`]: periodic spectra, gap profiles and shadowing bounds.
//! * [`thermo`]: singular value potentials, pressure and the common-state experiment.
//! * [`format`]: the JSON cocycle file format and built-in demo cocycles.

pub mod analysis;
pub mod cocycle;
pub mod error;
pub mod format;
pub mod matnum;
pub mod proximal;
pub mod sft;
pub mod synthesis;
pub mod thermo;
pub mod typicality;

pub use cocycle::{Holonomy, HolonomyKind, WindowCocycle};
pub use error::{Error, Result};
pub use matnum::{Cone, LogSpectra, Mat, ProjHyperplane, ProjPoint, WedgeProduct};
pub use sft::{PeriodicWord, PointSpec, Sft, Symbol, Word};
pub use synthesis::{Family, PathSpec, SynthesisOptions, SynthesisReport};
pub use thermo::{CylinderWeights, PressureEstimate};
pub use typicality::{TypicalPair, TypicalityCertificate, DEFAULT_TOL};

/// Version tag carried by every serialized report.
pub const SCHEMA_VERSION: &str = "1.0";
