//! Long-range resistor networks on random and deterministic point sets.
//!
//! The crate builds complete (or distance-truncated) electrical networks on
//! finite point configurations, computes two-terminal effective resistances
//! with dual variational certificates, reduces two-dimensional networks to
//! nearest-neighbor chains, constructs explicit unit fluxes with
//! finite-energy certificates, and evaluates harmonic-analysis recurrence /
//! transience criteria for lattice walks with polynomially decaying steps.
//!
//! Everything numeric is generic over the floating scalar via [`Scalar`];
//! the crate-root alias [`Real`] (`f64`) is what the CLI and the test
//! suites instantiate. The harmonic-analysis module [`certificates`] is the
//! one deliberate exception: its Euler-Maclaurin constants and special
//! functions are tuned for `f64`.

pub mod certificates;
pub mod comparison;
pub mod error;
pub mod flux;
pub mod kernel;
pub mod linalg;
pub mod network;
pub mod numeric;
pub mod pointproc;
pub mod reduction;
pub mod resistance;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use kernel::JumpKernel;
pub use network::{build_network, BuildOptions, CollapseMap, DenseNetwork, SparseNetwork};
pub use pointproc::{PointSet, ProcessSpec};
pub use scalar::Scalar;

/// Concrete scalar used by the CLI and the acceptance suites.
pub type Real = f64;
