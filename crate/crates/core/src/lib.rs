//! Exact numerics and Monte Carlo for the continuous-time homopolymer on `Z^d`.
//!
//! The crate is organised bottom-up:
//!
//! * [`lattice`]: the rate-1 nearest-neighbour walk, sparse paths and their
//!   occupation functionals.
//! * [`quadrature`] and [`resolvent`]: Laplace-domain objects (`I(λ)`,
//!   `R_λ(x, y)`, `A_λ`, perturbed and killed resolvents, `β_cr`, spectral
//!   densities).
//! * [`kernel`]: Feynman–Kac propagation on truncated boxes by uniformization.
//! * [`harmonic`]: `λ(β)` and the positive harmonic function `ψ_β`.
//! * [`doob`]: the `ψ_β`-transformed chain, polymer sampling by reweighting.
//! * [`limits`]: reference laws and goodness-of-fit tests.
//! * [`wetting`]: the half-line wetting model.
//! * [`acceptance`]: the end-to-end verification suite used by `homopolymer accept`.

pub mod acceptance;
pub mod config;
pub mod doob;
pub mod error;
pub mod harmonic;
pub mod kernel;
pub mod lattice;
pub mod limits;
pub mod quadrature;
pub mod resolvent;
pub mod rng;
pub mod stats;
pub mod wetting;

pub use error::{Error, Result};
pub use lattice::{Path, Site};
