//! A finite-dimensional, semiclassical bosonic Fock-space engine.
//!
//! The one-particle space is `C^d` and the symmetric Fock space over it is
//! truncated at `n_max` quanta.  Creation and annihilation operators carry the
//! mean-field scaling parameter `eps` through the commutation relation
//! `[a(f), a*(g)] = eps <f, g> I`.  On top of this the crate provides
//!
//! * Wick quantization of polynomial symbols, with symbolic composition,
//!   contractions and Poisson brackets ([`wick`]);
//! * factories for coherent, Hermite, tensor, Gibbs and localized states
//!   ([`states`]);
//! * quantum mean-field dynamics `rho(t) = e^{-itH/eps} rho e^{itH/eps}`
//!   ([`qdyn`]);
//! * the classical Hartree-type flow and its polynomial approximants
//!   ([`flow`]);
//! * reduced density matrices and their classical limits ([`reduced`]);
//! * exactly-integrable Wigner-measure representations ([`wigner`]);
//! * concrete models: random two-body, lowest-Landau-level, and the bosonized
//!   Hartree-von Neumann equation ([`models`]).
//!
//! Inner products are anti-linear in the **left** argument throughout.

pub mod comb;
pub mod error;
pub mod flow;
pub mod fock;
pub mod models;
pub mod qdyn;
pub mod reduced;
pub mod states;
pub mod study;
pub mod wick;
pub mod wigner;

pub use error::FockError;

use num_complex::Complex;

/// Complex scalar used everywhere.
pub type C64 = Complex<f64>;
/// Dense complex matrix.
pub type CMat = nalgebra::DMatrix<C64>;
/// Dense complex vector.
pub type CVec = nalgebra::DVector<C64>;

/// Symplectic form `sigma(x, y) = Im <x, y>` (inner product anti-linear left).
pub fn sigma(x: &CVec, y: &CVec) -> f64 {
    x.dotc(y).im
}

/// Real form `S(x, y) = Re <x, y>`.
pub fn s_form(x: &CVec, y: &CVec) -> f64 {
    x.dotc(y).re
}
