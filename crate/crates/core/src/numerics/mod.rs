//! Small numerical kernels shared by the geometry modules.

pub mod fit;
pub mod grid;
pub mod ode;
pub mod quadrature;

pub use fit::{linear_fit, LinearFit};
pub use grid::{dyadic_radii, log_grid};
pub use ode::{DenseSolution, Dopri5, OdeSystem, StopReason};
pub use quadrature::GaussLegendre;
