use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::GaussLegendre;
use crate::profiles::{
    asymptotic_volume_ratio, unit_ball_volume, unit_sphere_area, Asymptote, SingleWarpMetric,
};

/// Lower end of the tabulated Green integral; below it the remainder is
/// integrated on demand.
const TABLE_START: f64 = 1e-8;
const PANELS_PER_DECADE: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmbientConstants {
    pub dimension: usize,
    /// `V_M`
    pub volume_ratio: f64,
    /// `V₀ⁿ(1) = ω_{n−1}/n`
    pub euclidean_ball: f64,
    /// `V₁^{n−1}(π) = ω_{n−1}`
    pub sphere_area: f64,
}

impl AmbientConstants {
    pub fn new(dimension: usize, volume_ratio: f64) -> Result<Self> {
        if dimension < 3 {
            return Err(Error::Domain(format!(
                "dimension must be at least 3, got {dimension}"
            )));
        }
        let euclidean_ball = unit_ball_volume(dimension);
        if volume_ratio <= 0.0 {
            return Err(Error::NotNormalizable);
        }
        if !(volume_ratio <= euclidean_ball * (1.0 + 1e-12)) {
            return Err(Error::Domain(format!(
                "asymptotic volume ratio {volume_ratio} exceeds the Euclidean value {euclidean_ball}"
            )));
        }
        Ok(Self {
            dimension,
            volume_ratio,
            euclidean_ball,
            sphere_area: unit_sphere_area(dimension - 1),
        })
    }

    pub fn for_metric(metric: &SingleWarpMetric) -> Result<Self> {
        Self::new(metric.dimension(), asymptotic_volume_ratio(metric).v_m)
    }

    /// `V_M / V₀ⁿ(1)`
    pub fn normalized_ratio(&self) -> f64 {
        self.volume_ratio / self.euclidean_ball
    }
}

/// Radial minimal Green's function `G(r̃) = (n−2)∫_{r̃}^∞ f^{1−n}` and the
/// distance-like `b = (V_M/V₀ⁿ(1) · G)^{1/(2−n)}`.
#[derive(Debug, Clone)]
pub struct GreenRadial {
    metric: SingleWarpMetric,
    constants: AmbientConstants,
    slope: f64,
    offset: f64,
    split: f64,
    /// Panel edges on `[TABLE_START, split]` and `∫_{edge}^{split} f^{1−n}`.
    edges: Vec<f64>,
    tails: Vec<f64>,
}

pub fn green_radial(metric: &SingleWarpMetric, constants: AmbientConstants) -> Result<GreenRadial> {
    GreenRadial::new(metric, constants)
}

impl GreenRadial {
    pub fn new(metric: &SingleWarpMetric, constants: AmbientConstants) -> Result<Self> {
        if constants.dimension != metric.dimension() {
            return Err(Error::Usage(
                "ambient constants belong to a different dimension".into(),
            ));
        }
        let Some(Asymptote::Linear {
            slope,
            offset,
            from,
        }) = metric.profile().asymptote()
        else {
            return Err(Error::NotNormalizable);
        };
        if !(slope > 0.0) {
            return Err(Error::NotNormalizable);
        }
        let split = from.max(1.0);
        let n = metric.dimension() as i32;
        let profile = metric.profile();
        let density = |s: f64| profile.value(s, 0).powi(1 - n);

        let mut edges = vec![TABLE_START];
        edges.extend(
            profile
                .joins()
                .into_iter()
                .filter(|&j| j > TABLE_START && j < split),
        );
        edges.push(split);
        let mut fine = Vec::new();
        for w in edges.windows(2) {
            let panels =
                (((w[1] / w[0]).log10() * PANELS_PER_DECADE as f64).ceil() as usize).max(1);
            let ratio = (w[1] / w[0]).powf(1.0 / panels as f64);
            for p in 0..panels {
                fine.push(w[0] * ratio.powi(p as i32));
            }
        }
        fine.push(split);
        let rule = GaussLegendre::standard();
        let mut tails = vec![0.0; fine.len()];
        for i in (0..fine.len() - 1).rev() {
            tails[i] = tails[i + 1] + rule.integrate_log(density, fine[i], fine[i + 1]);
        }
        Ok(Self {
            metric: metric.clone(),
            constants,
            slope,
            offset,
            split,
            edges: fine,
            tails,
        })
    }

    pub fn metric(&self) -> &SingleWarpMetric {
        &self.metric
    }

    pub fn constants(&self) -> &AmbientConstants {
        &self.constants
    }

    /// `∫_{r̃}^∞ f^{1−n}`.
    fn tail_integral(&self, rt: f64) -> f64 {
        let n = self.metric.dimension() as i32;
        let closed =
            |s: f64| (self.slope * s + self.offset).powi(2 - n) / (self.slope * (n - 2) as f64);
        if rt >= self.split {
            return closed(rt);
        }
        let profile = self.metric.profile();
        let density = |s: f64| profile.value(s, 0).powi(1 - n);
        let rule = GaussLegendre::standard();
        let base = closed(self.split);
        if rt < TABLE_START {
            return base
                + self.tails[0]
                + rule.composite_log(density, rt, TABLE_START, PANELS_PER_DECADE, &[]);
        }
        let idx = self
            .edges
            .partition_point(|&e| e <= rt)
            .min(self.edges.len() - 1);
        let right = self.edges[idx];
        base + self.tails[idx] + rule.integrate_log(density, rt, right)
    }

    /// `G(r̃)` for `r̃ > 0`.
    pub fn green(&self, rt: f64) -> Result<f64> {
        if rt == 0.0 {
            return Err(Error::Pole(0.0));
        }
        if !(rt > 0.0) {
            return Err(Error::Domain(format!("radius must be positive, got {rt}")));
        }
        Ok((self.metric.dimension() - 2) as f64 * self.tail_integral(rt))
    }

    /// `b(r̃)`; `b(0) = 0`.
    pub fn b(&self, rt: f64) -> Result<f64> {
        if rt == 0.0 {
            return Ok(0.0);
        }
        let n = self.metric.dimension() as f64;
        Ok((self.constants.normalized_ratio() * self.green(rt)?).powf(1.0 / (2.0 - n)))
    }

    /// `b′(r̃) = (V_M/V₀ⁿ(1)) b^{n−1} / f^{n−1}`.
    pub fn b_prime(&self, rt: f64) -> Result<f64> {
        let n = self.metric.dimension() as i32;
        if rt == 0.0 {
            return Ok(self.pole_ratio() / self.metric.profile().value(0.0, 1));
        }
        let b = self.b(rt)?;
        let f = self.metric.profile().value(rt, 0);
        Ok(self.constants.normalized_ratio() * (b / f).powi(n - 1))
    }

    /// `lim_{ρ→0} b/ρ = (V_M/V₀ⁿ(1))^{1/(2−n)}` for a profile with `f′(0) = 1`.
    pub fn pole_ratio(&self) -> f64 {
        let n = self.metric.dimension() as f64;
        self.constants.normalized_ratio().powf(1.0 / (2.0 - n))
    }

    /// Geodesic radius of the level set `{b = r}`.
    pub fn b_inverse(&self, r: f64) -> Result<f64> {
        if r == 0.0 {
            return Ok(0.0);
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Domain(format!("level must be positive, got {r}")));
        }
        let (mut lo, mut hi) = (r, r);
        while self.b(lo)? > r {
            lo *= 0.5;
        }
        while self.b(hi)? < r {
            hi *= 2.0;
        }
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let g = self.b(x)? - r;
            if g == 0.0 {
                return Ok(x);
            }
            if g > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let newton = x - g / self.b_prime(x)?;
            let next = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            let done = (next - x).abs() <= 1e-12 * r;
            x = next;
            if done {
                // One more Newton step pushes the residual to rounding level.
                let g = self.b(x)? - r;
                return Ok(x - g / self.b_prime(x)?);
            }
        }
        Ok(x)
    }
}
