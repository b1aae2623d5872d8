//! Named numeric constants shared across the crate.

/// Normalization tolerance for pure states.
pub const NORM_TOL: f64 = 1e-12;
/// Trace tolerance for normalized density matrices.
pub const TRACE_TOL: f64 = 1e-10;
/// Accepted normalization slack when a caller hands in a state.
pub const INPUT_NORM_TOL: f64 = 1e-10;
/// Largest truncated probability mass tolerated before a result is invalid.
pub const MAX_TAIL_MASS: f64 = 1e-8;
/// Number of top Fock levels inspected by [`crate::FockVector::tail_mass`].
pub const TAIL_WINDOW: usize = 5;
/// Below this squeezing the Hermite form of a squeezed coherent state is singular.
pub const R_MIN: f64 = 1e-8;
/// Default working cutoff.
pub const DEFAULT_CUTOFF: usize = 40;
/// Reduced cutoff used while searching.
pub const SEARCH_CUTOFF: usize = 30;
/// Hard upper limit on the cutoff (factorials stay finite in log form, Hermite values do not).
pub const MAX_CUTOFF: usize = 160;
/// Gauss-Legendre nodes per panel.
pub const GL_NODES: usize = 64;
/// Node-doubling agreement required by the window integrator.
pub const QUAD_TOL: f64 = 1e-8;
/// Default number of sub-windows for the average misfit.
pub const AVG_SUBRANGES: usize = 21;
/// Largest |zeta| accepted by the squeeze operator matrix.
pub const MAX_SQUEEZE_MATRIX: f64 = 2.0;
