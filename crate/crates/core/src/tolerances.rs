//! Thresholds shared by the checks and the acceptance suite.
//!
//! Closed-form arithmetic is held to rounding level; anything that goes
//! through quadrature or an ODE solve is held to the looser numeric level.

/// Residuals of closed-form algebra (parameter constraints, C² joins).
pub const ALGEBRAIC: f64 = 1e-12;

/// Relative accuracy expected from quadrature-based identities.
pub const QUADRATURE_REL: f64 = 1e-6;

/// Adaptive Runge–Kutta relative tolerance for radial mode solves.
pub const ODE_RTOL: f64 = 1e-10;

/// Absolute floor for the ODE error norm.
pub const ODE_ATOL: f64 = 1e-300;

/// Starting radius of the Frobenius expansion at the pole.
pub const FROBENIUS_START: f64 = 1e-6;

/// Magnitude at which a mode solve is declared overflowed.
pub const OVERFLOW_GUARD: f64 = 1e300;

/// Distance below which an exponent counts as a member of the degree spectrum.
pub const SPECTRUM_MEMBERSHIP: f64 = 1e-6;

/// Slack allowed on |∇b| ≤ 1.
pub const GRADIENT_B_SLACK: f64 = 1e-6;

/// Harmonicity residual accepted on smooth regions (relative).
pub const HARMONICITY_REL: f64 = 1e-6;

/// Sup-norm difference between consecutive normalized pipeline levels.
pub const LEVEL_CONVERGENCE: f64 = 1e-6;

/// Default log-grid density for curve operations.
pub const GRID_PER_DECADE: usize = 512;

/// Offset from the declared asymptote at which improper tails switch to closed form.
pub const ASYMPTOTE_SPLIT: f64 = 1e-16;
