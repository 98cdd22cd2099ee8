//! Numerical toolkit for the defocusing mKdV equation
//! `q_t - 6 q^2 q_x + q_xxx = 0` with kink boundary values `q -> +-1`.
//!
//! Modules, roughly in pipeline order:
//!
//! - [`spectral`]: uniformization, the phase `theta`, saddle points and the
//!   asymptotic-region map.
//! - [`scattering`]: Jost solutions, `a`, `b`, `r`, discrete spectrum.
//! - [`cauchy`]: the scalar function `delta`, Blaschke factors and the
//!   phase `phi_0` at `z = 1`.
//! - [`painleve`]: Airy function and Ablowitz-Segur Painleve II solutions.
//! - [`transition`]: the leading-order transition-region formula.
//! - [`sim`]: a pseudo-spectral reference solver for the PDE.
//! - [`pipeline`]: end-to-end comparison of the formula against the solver.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cauchy;
pub mod error;
pub mod linalg;
pub mod painleve;
pub mod pipeline;
pub mod quad;
pub mod scattering;
pub mod sim;
pub mod spectral;
pub mod transition;

pub use cauchy::{PhaseAtOne, PhaseVariant, ReflectionTable};
pub use error::{Error, Result};
pub use linalg::{Mat2, Vec2, C64};
pub use scattering::profile::InitialProfile;
pub use scattering::{DiscreteSpectrum, Eigenvalue, ScatteringData, ScatteringSample, Scatterer};
pub use spectral::{PhasePortrait, RaySlope, RegionClass, SaddleSet, SpectralPoint};

/// Formats a float with 12 significant digits.
pub fn fmt12(x: f64) -> String {
    format!("{:.11e}", x)
}
