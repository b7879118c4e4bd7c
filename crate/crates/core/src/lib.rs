//! Spectral numerics for linearized shear-flow stability.
//!
//! The crate is organised bottom-up: Chebyshev collocation and dense complex
//! linear algebra underneath, special functions and the constrained
//! half-line spectra in the middle, and operator assembly, resolvent scans
//! and semigroup checks on top.

pub mod airy;
pub mod constrained;
pub mod dense;
pub mod error;
pub mod flow;
pub mod hodge;
pub mod ode;
pub mod quad;
pub mod resolvent;
pub mod spectral;

pub use dense::{ComplexMatrix, GramMetric};
pub use error::{Error, Result};
pub use spectral::{build_grid, BcSpec, SpectralGrid};
