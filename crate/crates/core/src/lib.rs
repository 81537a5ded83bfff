//! Numerical engine for the slice of meromorphic maps
//!
//! ```text
//! f(z) = (e^z - e^-z) / (e^z/λ - e^-z/μ),    1/λ - 1/μ = 2/ρ,
//! ```
//!
//! with a fixed attracting multiplier `ρ` at the origin and the preferred
//! asymptotic value `λ` as the free parameter.
//!
//! The crate is split into layers that build on each other:
//!
//! * [`params`] and [`dynamics`]: exact formulas for `f`, `f'`, poles, inverse
//!   branches and orbit iteration with stable handling near the essential
//!   singularity.
//! * [`classify`]: fate of both asymptotic values and the shift-locus /
//!   `M_λ` / `M_μ` classification of a parameter.
//! * [`koenigs`]: linearizing coordinates at attracting fixed points, the
//!   partition of the shift locus, the tie curve `S_*` and the model map `E`.
//! * [`centers`]: virtual cycle parameters, their itineraries and
//!   transversality.
//! * [`render`]: tiled, deterministic parameter and dynamic plane images.

mod error;
mod par;

pub mod centers;
pub mod classify;
pub mod dynamics;
pub mod koenigs;
pub mod params;
pub mod render;
pub mod wire;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use params::{derive_mu, inversion, ParamPoint};

/// Shorthand used throughout the crate.
pub type C64 = Complex64;
