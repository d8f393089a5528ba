//! Spectral Galerkin toolkit for tetrahedrally symmetric stationary flows of the
//! 2D Euler equations on the sphere.
//!
//! The library finds the non-zonal stationary solutions that bifurcate from the
//! trivial branch of `-Δψ + F(λ, ψ) = 0` on `S²` inside the invariant subspace of
//! the tetrahedral rotation group. It provides:
//!
//! * orthonormal real spherical harmonics and Gauss-Legendre grids ([`sphharm`]),
//! * band-limited field algebra and the tetrahedral projector ([`spectral`]),
//! * an exact big-rational oracle for every closed-form constant ([`exactc`]),
//! * the four nonlinearity models ([`models`]),
//! * the Liapunov-Schmidt reduction producing (λ*, λ₁, λ₂, ψ₂) ([`reduction`]),
//! * a Galerkin-Newton solver with pseudo-arclength continuation ([`continuation`]),
//! * independent physics checks on computed solutions ([`verify`]).

pub mod continuation;
pub mod error;
pub mod exactc;
pub mod models;
pub mod reduction;
pub mod sphharm;
pub mod spectral;
pub mod verify;

pub use error::Error;

/// Result alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;
