//! Gabor frames generated by totally positive windows over rational
//! lattices.
//!
//! The crate evaluates the standard totally positive windows, computes their
//! Zak transforms, and decides whether `{e^{2πiβlt} g(t - αk)}` is a frame by
//! combining two independent certificates: stability of truncated
//! pre-Gramian sections, and pointwise invertibility of the `p × p` matrix
//! function attached to a perturbed section of totally positive type.

pub mod diagnose;
pub mod error;
pub mod lattice;
pub mod pregramian;
pub mod tp_matrix;
pub mod window;
pub mod zak;
pub mod zibulski;

pub use diagnose::{diagnose, diagnose_reduced, DiagnoseConfig};
pub use error::{Error, Result};
pub use lattice::{reduce, PerturbationSeq, RationalLattice};
pub use pregramian::{frame_bounds, BoundsConfig, Evidence, FrameDiagnosis, MatrixSection, Verdict};
pub use window::{DecayProfile, TpWindow, WindowKind, WindowSpec};
pub use zak::{locate_zero, zak, ZakValue, ZakZero};
