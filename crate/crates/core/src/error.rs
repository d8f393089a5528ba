//! Error type shared by the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// The quadrature grid cannot resolve the requested band limit.
    #[error("grid too small for band limit {band_limit}: needs at least {need_theta} latitude and {need_phi} longitude nodes, grid has {got_theta} x {got_phi}")]
    GridTooSmall {
        band_limit: usize,
        need_theta: usize,
        need_phi: usize,
        got_theta: usize,
        got_phi: usize,
    },

    /// Group closure did not produce the expected 12 rotations.
    #[error("tetrahedral group closure produced {found} elements instead of 12 (wrong generators or orientation)")]
    GroupClosure { found: usize },

    /// Fredholm alternative violated: the right-hand side has a kernel component.
    #[error("right-hand side is not orthogonal to the kernel eigenspace (l=3 component norm {kernel_norm:.3e} exceeds {tolerance:.0e})")]
    KernelObstruction { kernel_norm: f64, tolerance: f64 },

    /// A transcendental nonlinearity left too much energy above the band limit.
    #[error("spectral tail beyond the band limit carries a {ratio:.3e} fraction of the field energy (limit 1e-10); refusing aliased evaluation")]
    AliasedTail { ratio: f64 },

    /// Newton iteration failed to converge.
    #[error("Newton did not converge after {iterations} iterations (last residual {residual:.3e})")]
    NewtonDiverged { iterations: usize, residual: f64 },

    /// Branch seeding failed.
    #[error("branch seeding failed: {0}")]
    SeedFailure(String),

    /// Not enough branch points for the requested fit.
    #[error("need at least {need} branch points with |epsilon| <= {max_epsilon}, have {have}")]
    InsufficientBranchPoints {
        have: usize,
        need: usize,
        max_epsilon: f64,
    },
}
