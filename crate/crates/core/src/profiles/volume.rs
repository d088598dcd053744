use serde::Serialize;

use super::{DoublyWarpedMetric, SingleWarpMetric};
use crate::error::{Error, Result};
use crate::numerics::{linear_fit, GaussLegendre};

/// Area of the unit m-sphere `S^m ⊂ ℝ^{m+1}`.
pub fn unit_sphere_area(m: usize) -> f64 {
    use std::f64::consts::PI;
    let (mut area, start) = if m % 2 == 0 { (2.0, 0) } else { (2.0 * PI, 1) };
    let mut k = start;
    while k < m {
        area *= 2.0 * PI / (k as f64 + 1.0);
        k += 2;
    }
    area
}

/// Volume `ω_{n−1}/n` of the Euclidean unit n-ball.
pub fn unit_ball_volume(n: usize) -> f64 {
    unit_sphere_area(n - 1) / n as f64
}

/// A rotationally symmetric volume density `dV = density(r) dr`.
pub trait RadialDensity {
    fn density(&self, r: f64) -> f64;
    fn breakpoints(&self) -> Vec<f64>;
}

impl RadialDensity for SingleWarpMetric {
    fn density(&self, r: f64) -> f64 {
        let n = self.dimension();
        unit_sphere_area(n - 1) * self.profile().value(r, 0).powi(n as i32 - 1)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.profile().joins()
    }
}

impl RadialDensity for DoublyWarpedMetric {
    fn density(&self, r: f64) -> f64 {
        self.volume_coefficient() * self.f().value(r, 0).powi(3) * self.h().value(r, 0).powi(4)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.f().joins()
    }
}

/// Volume of the geodesic ball of radius `r` about the pole.
pub fn volume<M: RadialDensity + ?Sized>(metric: &M, r: f64) -> Result<f64> {
    if r < 0.0 || r.is_nan() {
        return Err(Error::Domain(format!(
            "radius must be nonnegative, got {r}"
        )));
    }
    if r == 0.0 {
        return Ok(0.0);
    }
    let rule = GaussLegendre::standard();
    let inner = r * 1e-12;
    let core = rule.integrate(|s| metric.density(s), 0.0, inner);
    Ok(core + rule.composite_log(|s| metric.density(s), inner, r, 16, &metric.breakpoints()))
}

/// Least-squares slope of `log V` against `log r` on `[lo, hi]`.
pub fn growth_degree<M: RadialDensity + ?Sized>(metric: &M, lo: f64, hi: f64) -> Result<f64> {
    if !(lo > 0.0) || !(hi > lo * (1.0 + 1e-9)) || !hi.is_finite() {
        return Err(Error::Usage(format!(
            "degenerate growth window [{lo}, {hi}]"
        )));
    }
    let samples = 33;
    let ratio = (hi / lo).ln() / (samples - 1) as f64;
    let mut xs = Vec::with_capacity(samples);
    let mut ys = Vec::with_capacity(samples);
    for i in 0..samples {
        let r = lo * (ratio * i as f64).exp();
        xs.push(r.ln());
        ys.push(volume(metric, r)?.ln());
    }
    linear_fit(&xs, &ys)
        .map(|f| f.slope)
        .ok_or_else(|| Error::Usage("growth fit is degenerate".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VolumeRatio {
    /// `lim V(r)/rⁿ`.
    pub v_m: f64,
    /// Euclidean value `ω_{n−1}/n`, an upper bound for `v_m`.
    pub euclidean: f64,
    pub maximal_growth: bool,
}

pub fn asymptotic_volume_ratio(metric: &SingleWarpMetric) -> VolumeRatio {
    let n = metric.dimension();
    let euclidean = unit_ball_volume(n);
    match metric.profile().asymptote().and_then(|a| a.slope()) {
        Some(beta) => VolumeRatio {
            v_m: euclidean * beta.powi(n as i32 - 1),
            euclidean,
            maximal_growth: true,
        },
        None => VolumeRatio {
            v_m: 0.0,
            euclidean,
            maximal_growth: false,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{NiParameters, WarpProfile};
    use std::f64::consts::PI;

    #[test]
    fn sphere_areas() {
        assert!((unit_sphere_area(1) - 2.0 * PI).abs() < 1e-14);
        assert!((unit_sphere_area(2) - 4.0 * PI).abs() < 1e-14);
        assert!((unit_sphere_area(3) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((unit_sphere_area(4) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn euclidean_unit_ball() {
        let m = SingleWarpMetric::euclidean(3).unwrap();
        let v = volume(&m, 1.0).unwrap();
        assert!((v - 4.0 * PI / 3.0).abs() < 1e-13);
        assert_eq!(volume(&m, 0.0).unwrap(), 0.0);
        assert!(volume(&m, -1.0).is_err());
    }

    #[test]
    fn euclidean_degree_exact() {
        for n in [3, 4, 7] {
            let m = SingleWarpMetric::euclidean(n).unwrap();
            let d = growth_degree(&m, 1.0, 100.0).unwrap();
            assert!((d - n as f64).abs() < 1e-10, "{n}: {d}");
        }
    }

    #[test]
    fn asym_conical_volume_tends_to_cone() {
        let beta = 0.8;
        let m = SingleWarpMetric::new(3, WarpProfile::asym_conical(beta).unwrap()).unwrap();
        let r: f64 = 1e5;
        let oracle = 4.0 * PI * beta * beta * r.powi(3) / 3.0;
        let v = volume(&m, r).unwrap();
        assert!((v / oracle - 1.0).abs() < 1e-4);
        let ratio = asymptotic_volume_ratio(&m);
        assert!((ratio.v_m - 4.0 * PI * 0.64 / 3.0).abs() < 1e-14);
        assert!(ratio.v_m <= ratio.euclidean);
        assert!(ratio.maximal_growth);
    }

    #[test]
    fn ding_is_not_maximal() {
        let m = SingleWarpMetric::new(3, WarpProfile::ding()).unwrap();
        let ratio = asymptotic_volume_ratio(&m);
        assert_eq!(ratio.v_m, 0.0);
        assert!(!ratio.maximal_growth);
        let d = growth_degree(&m, 10.0, 1e4).unwrap();
        assert!((d - 1.0).abs() < 0.05, "{d}");
    }

    #[test]
    fn ni_grows_with_degree_five() {
        let m = DoublyWarpedMetric::from_ni(&NiParameters::reference());
        let d = growth_degree(&m, 1e3, 1e6).unwrap();
        assert!((d - 5.0).abs() < 0.05, "{d}");
    }

    #[test]
    fn degenerate_window() {
        let m = SingleWarpMetric::euclidean(3).unwrap();
        assert!(matches!(growth_degree(&m, 2.0, 2.0), Err(Error::Usage(_))));
        assert!(matches!(growth_degree(&m, 0.0, 2.0), Err(Error::Usage(_))));
    }

    #[test]
    fn derivative_matches_density() {
        let m = DoublyWarpedMetric::from_ni(&NiParameters::reference());
        for r in [1.0, 2.0, 10.0, 40.0] {
            let h = r * 1e-4;
            let dv = (volume(&m, r + h).unwrap() - volume(&m, r - h).unwrap()) / (2.0 * h);
            let rho = m.density(r);
            assert!((dv / rho - 1.0).abs() < 1e-6, "r = {r}: {}", dv / rho - 1.0);
        }
    }
}
