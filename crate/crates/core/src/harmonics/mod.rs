//! Spherical harmonics, Wigner rotations and angular quadrature.
//!
//! Conventions shared by the whole crate: complex `Y_lm`, orthonormal on the
//! full sphere, with the Condon–Shortley phase, so that
//! `Y_lm(θ, φ + π) = (-1)^m Y_lm(θ, φ)`.

pub mod quadrature;
pub mod wigner;
mod ylm;

pub use quadrature::{
    converged_inner, default_orders, half_space_inner, AngularDomain, AngularFunction, QuadratureRule,
};
pub use wigner::{wigner_big_d, wigner_rotate, wigner_small_d, AngularExpansion, EulerAngles};
pub use ylm::{equator_zero, eval_ylm, phi_shift_factor, ylm, ylm_all, AngularIndex, MAX_DEGREE};
