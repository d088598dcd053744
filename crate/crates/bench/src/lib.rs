//! Shared fixtures for the benchmarks.

use conelab_core::frequency::{green_radial, AmbientConstants, GreenRadial};
use conelab_core::profiles::{SingleWarpMetric, WarpProfile};

/// Three-dimensional asymptotically conical model of slope 0.8 with its
/// normalized Green's function.
pub fn asym_model() -> (SingleWarpMetric, GreenRadial) {
    let m = SingleWarpMetric::new(3, WarpProfile::asym_conical(0.8).expect("valid slope"))
        .expect("valid metric");
    let g = green_radial(
        &m,
        AmbientConstants::for_metric(&m).expect("maximal growth"),
    )
    .expect("Green's function");
    (m, g)
}
