//! Spherical needlet frames adapted to an angular power spectrum, and
//! sampling of isotropic Gaussian random fields on the unit sphere.
//!
//! The crate is `no_std` and only needs `alloc`. Everything that touches
//! files, processes or the terminal lives in the `needlets` companion crate.
//!
//! Module map:
//!
//! * [`sphere`]: points, geodesic distance, evaluation grids, mesh metrics.
//! * [`legendre`]: Legendre polynomials and series, associated Legendre
//!   functions, real spherical harmonics and harmonic synthesis.
//! * [`quadrature`]: per-level spherical quadrature rules and their checks.
//! * [`spectrum`]: power spectra, forward differences, decay validation.
//! * [`needlet`]: the cutoff, level windows, radial kernels, interpolants
//!   and the assembled frame.
//! * [`sampling`]: seeded Karhunen–Loève and needlet field synthesis.
//! * [`diagnostics`]: numerical checks of frame and localisation properties.
#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` style comparisons deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod diagnostics;
mod error;
pub mod legendre;
mod math;
pub mod needlet;
pub mod quadrature;
pub mod sampling;
pub mod sphere;
pub mod spectrum;

pub use error::{Error, Result};
pub use needlet::{CutoffFunction, NeedletFrame, QuadratureChoice};
pub use quadrature::{QuadratureLevel, QuadratureSource};
pub use sphere::{EvalGrid, SphericalAngles, UnitVector};
pub use spectrum::PowerSpectrum;

/// 4π, the surface area of the unit sphere.
pub const FOUR_PI: f64 = 4.0 * core::f64::consts::PI;
