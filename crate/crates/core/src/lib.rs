//! Radiation, friction, photon statistics and stochastic spin-down of
//! rotating dispersive bodies.
//!
//! All quantities are in natural units with `hbar = c = k_B = 1` unless a
//! function takes `hbar` explicitly.

pub mod error;
pub mod material;
pub mod photonstats;
pub mod quadrature;
pub mod radiation;
pub mod rotor;
pub mod scattering;
pub mod specfun;
pub mod testbody;
pub mod units;
pub mod verify;

pub use error::{Error, Result};
