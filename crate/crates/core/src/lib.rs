//! Holomorphic Cliffordian special functions on the Clifford algebra R(0,3).
//!
//! The crate covers paravector arithmetic ([`clifford`]), the polynomial and
//! singular bases ([`polynomials`]), derivative and holomorphy probes
//! ([`calculus`]), trigonometric functions ([`trig`]), period lattices with
//! rigorous truncation bounds ([`lattice`], [`summation`]) and the Weierstrass
//! family `ζ_N`, `η_N`, `℘_α` ([`weierstrass`]). [`oracles`] holds classical
//! complex implementations used to cross-check the slice cases.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the scalar type for the common cases.

pub mod calculus;
pub mod clifford;
pub mod error;
pub mod lattice;
pub mod oracles;
pub mod polynomials;
pub mod scalar;
pub mod summation;
pub mod trig;
pub mod weierstrass;

pub use clifford::{sandwich_power, MultiIndex, Multivector, Paravector, CAYLEY};
pub use error::{Error, Result};
pub use lattice::{Lattice, SumConfig, TailTerm};
pub use scalar::Scalar;
pub use weierstrass::{Evaluation, ZetaForm};

pub type Multivector64 = Multivector<f64>;
pub type Paravector64 = Paravector<f64>;
pub type Lattice64 = Lattice<f64>;
pub type Evaluation64 = Evaluation<f64>;

pub type Multivector32 = Multivector<f32>;
pub type Paravector32 = Paravector<f32>;
pub type Lattice32 = Lattice<f32>;
