//! Numerics for weighted lattice sums over the zero set of the paired
//! quadratic form Q(z) = z_e·z_o, the smooth delta-method kernel that
//! reconstructs them, the continuum resonant operator they converge to,
//! and side-by-side time evolution of the cubic Schrödinger flow on a
//! large torus against its resonant and continuum effective equations.
//!
//! Layout:
//! - [`arith`]: exact Ramanujan/totient arithmetic and S(q,c) sums
//! - [`kernel`]: the smooth bump partition, kernel h(r,y), its moments and
//!   Fourier transform, and the Kronecker-delta identity check
//! - [`gauss`]: closed-form Gaussian pair integrals driving the fast path
//!   for oscillatory integrals I(r,c)
//! - [`oscillatory`]: generic tensor quadrature for I(r,c) and the
//!   circle-method reconstruction of lattice sums
//! - [`lattice`]: resonant set enumeration on (Z/L)^n, weighted sums,
//!   normalizations, coupling tables
//! - [`envelope`]: smooth decaying profiles with declared decay/smoothness
//! - [`cr`]: the resonant integral operator T, level-set integrals, the
//!   n = 2 logarithmic correction operator, convergence studies
//! - [`dynamics`]: spectral evolution of the full, resonant, and continuum
//!   systems plus the comparison harness

pub mod arith;
pub mod envelope;
pub mod error;
pub mod gauss;
pub mod kernel;
pub mod lattice;
pub mod oscillatory;
pub mod quad;
pub mod report;
pub mod zeta;

pub mod cr;
pub mod dynamics;

pub use error::{Error, Result};

/// Library version, embedded in every artifact the harness writes.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
