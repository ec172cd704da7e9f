//! Numerical toolkit for two identical spin-zero particles whose configuration
//! space is the set of unordered pairs of points.
//!
//! An unordered pair `{r1, r2}` is represented by its center of mass and a
//! relative vector confined to a half-space domain. Wave functions are
//! expanded in oscillator radial functions times spherical harmonics of the
//! relative direction. The modules below check, by direct numerical
//! computation:
//!
//! * [`continuity`]: continuity across the half-space seam forces the
//!   coefficients with odd `l` and odd `m` to vanish, so an odd-`l`
//!   (fermionic) space is incomplete;
//! * [`rotation`]: a basis mixing even and odd `l` is not closed under
//!   rotation;
//! * [`equivalence`]: the even-`l` theory reproduces the matrix elements of
//!   the conventional symmetrized theory.

pub mod cli;
pub mod configspace;
pub mod continuity;
pub mod equivalence;
mod error;
pub mod expansion;
pub mod harmonics;
pub(crate) mod linalg;
pub mod rotation;

pub use error::{Error, Result};

pub use num_complex::Complex64;

/// Three-vector in Cartesian components.
pub type Vec3 = nalgebra::Vector3<f64>;
