use serde::Serialize;

use super::{NiParameters, WarpProfile};
use crate::error::{Error, Result};

/// `Vol(S³) · Vol(S⁴ with ¼ of the round metric) = 2π² · π²/6`.
pub const HOPF_VOLUME_COEFFICIENT: f64 =
    std::f64::consts::PI * std::f64::consts::PI * std::f64::consts::PI * std::f64::consts::PI / 3.0;

/// `dr² + f(r)² g_{S^{n−1}}` on ℝⁿ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingleWarpMetric {
    dimension: usize,
    profile: WarpProfile,
}

impl SingleWarpMetric {
    pub fn new(dimension: usize, profile: WarpProfile) -> Result<Self> {
        if dimension < 3 {
            return Err(Error::Domain(format!(
                "ambient dimension must be at least 3, got {dimension}"
            )));
        }
        Ok(Self { dimension, profile })
    }

    pub fn euclidean(dimension: usize) -> Result<Self> {
        Self::new(dimension, WarpProfile::euclidean())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn profile(&self) -> &WarpProfile {
        &self.profile
    }

    /// Cross-section eigenvalue `k(k + n − 2)` of the unit sphere `S^{n−1}`.
    pub fn sphere_eigenvalue(&self, k: usize) -> f64 {
        let k = k as f64;
        k * (k + self.dimension as f64 - 2.0)
    }
}

/// `dr² + f(r)² k₁ + h(r)² k₂` over the Hopf fibration S³ → S⁷ → S⁴ (total dimension 8).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoublyWarpedMetric {
    f: WarpProfile,
    h: WarpProfile,
    volume_coefficient: f64,
}

impl DoublyWarpedMetric {
    pub const DIMENSION: usize = 8;
    pub const FIBER_DIM: usize = 3;
    pub const BASE_DIM: usize = 4;

    pub fn new(f: WarpProfile, h: WarpProfile) -> Result<Self> {
        if f.joins() != h.joins() {
            return Err(Error::Domain("f and h must share their join radii".into()));
        }
        for j in f
            .c2_gluing_residuals()
            .into_iter()
            .chain(h.c2_gluing_residuals())
        {
            if j.max_abs() > 1e-10 {
                return Err(Error::Domain(format!(
                    "profile is not C² at r = {}",
                    j.radius
                )));
            }
        }
        Ok(Self {
            f,
            h,
            volume_coefficient: HOPF_VOLUME_COEFFICIENT,
        })
    }

    pub fn from_ni(p: &NiParameters) -> Self {
        Self::new(WarpProfile::ni_f(p), WarpProfile::ni_h(p))
            .expect("Ni profiles share the join at delta")
    }

    pub fn f(&self) -> &WarpProfile {
        &self.f
    }

    pub fn h(&self) -> &WarpProfile {
        &self.h
    }

    pub fn volume_coefficient(&self) -> f64 {
        self.volume_coefficient
    }
}

/// The five coordinate-plane sectional curvatures of the doubly-warped metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureSample {
    pub r: f64,
    pub k_x1x2: f64,
    pub k_xy: f64,
    pub k_y1y2: f64,
    pub k_rx: f64,
    pub k_ry: f64,
}

impl CurvatureSample {
    pub fn components(&self) -> [f64; 5] {
        [self.k_x1x2, self.k_xy, self.k_y1y2, self.k_rx, self.k_ry]
    }

    pub fn min(&self) -> f64 {
        self.components().into_iter().fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingleRicci {
    pub r: f64,
    pub ric_rr: f64,
    pub ric_tan: f64,
}

pub fn sectional_components_doubly(metric: &DoublyWarpedMetric, r: f64) -> Result<CurvatureSample> {
    if r == 0.0 {
        return Err(Error::Pole(r));
    }
    if r < 0.0 || r.is_nan() {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    let (f, f1, f2) = (
        metric.f.value(r, 0),
        metric.f.value(r, 1),
        metric.f.value(r, 2),
    );
    let (h, h1, h2) = (
        metric.h.value(r, 0),
        metric.h.value(r, 1),
        metric.h.value(r, 2),
    );
    let h4 = h.powi(4);
    Ok(CurvatureSample {
        r,
        k_x1x2: (1.0 - f1) * (1.0 + f1) / (f * f),
        k_xy: f * f / h4 - f1 * h1 / (f * h),
        k_y1y2: 4.0 / (h * h) - 3.0 * f * f / h4 - (h1 / h).powi(2),
        k_rx: -f2 / f,
        k_ry: -h2 / h,
    })
}

/// Ricci curvature of `dr² + f² g_{S^{n−1}}` in the radial and tangential directions.
pub fn ricci_components_single(metric: &SingleWarpMetric, r: f64) -> Result<SingleRicci> {
    if r == 0.0 {
        return Err(Error::Pole(r));
    }
    if r < 0.0 || r.is_nan() {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    let p = metric.profile();
    let (f, f1, f2) = (p.value(r, 0), p.value(r, 1), p.value(r, 2));
    let n = metric.dimension() as f64;
    Ok(SingleRicci {
        r,
        ric_rr: -(n - 1.0) * f2 / f,
        ric_tan: -f2 / f + (n - 2.0) * (1.0 - f1) * (1.0 + f1) / (f * f),
    })
}
