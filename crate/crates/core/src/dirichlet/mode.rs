use serde::Serialize;

use crate::cone::{exponent_of, ZonalHarmonic};
use crate::error::{Error, Result};
use crate::numerics::{linear_fit, log_grid, DenseSolution, Dopri5, OdeSystem, StopReason};
use crate::profiles::{SingleWarpMetric, WarpProfile};
use crate::tolerances;

/// State layout: `[φ, φ′, ∫φ²f^{n−1}, ∫(φ′² + λφ²/f²)f^{n−1}, ∫f^{n−1}]`.
struct ModeOde<'a> {
    profile: &'a WarpProfile,
    n: f64,
    lambda: f64,
}

impl OdeSystem for ModeOde<'_> {
    fn dim(&self) -> usize {
        5
    }

    fn rhs(&self, r: f64, y: &[f64], dy: &mut [f64]) {
        let f = self.profile.value(r, 0);
        let f1 = self.profile.value(r, 1);
        let w = f.powf(self.n - 1.0);
        let pot = self.lambda / (f * f);
        dy[0] = y[1];
        dy[1] = -(self.n - 1.0) * f1 / f * y[1] + pot * y[0];
        dy[2] = y[0] * y[0] * w;
        dy[3] = (y[1] * y[1] + pot * y[0] * y[0]) * w;
        dy[4] = w;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeSample {
    pub r: f64,
    pub phi: f64,
    pub dphi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "kebab-case")]
pub enum GrowthClass {
    Polynomial { exponent: f64 },
    Exponential { rate: f64 },
}

/// Solver settings for [`solve_radial_mode_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSolver {
    pub rtol: f64,
    pub start: f64,
    pub samples_per_decade: usize,
}

impl Default for ModeSolver {
    fn default() -> Self {
        Self {
            rtol: tolerances::ODE_RTOL,
            start: tolerances::FROBENIUS_START,
            samples_per_decade: tolerances::GRID_PER_DECADE,
        }
    }
}

/// Regular-branch radial factor `φ` of a separable harmonic function
/// `u = φ(r) Y_k(x)`, with `Y_k` the zonal degree-`k` harmonic of mean
/// square 1 on the unit sphere.
#[derive(Debug, Clone)]
pub struct RadialMode {
    metric: SingleWarpMetric,
    k: usize,
    lambda: f64,
    gamma: f64,
    /// Pole slope `f′(0)` and the Frobenius correction `φ ≈ r^γ (1 + c r)`.
    pole_slope: f64,
    correction: f64,
    scale: f64,
    solution: DenseSolution,
    reach: f64,
    y_sup: f64,
    pub samples: Vec<ModeSample>,
    pub growth: Option<GrowthClass>,
}

pub fn solve_radial_mode(metric: &SingleWarpMetric, k: usize, r_max: f64) -> Result<RadialMode> {
    solve_radial_mode_with(metric, k, r_max, &ModeSolver::default())
}

pub fn solve_radial_mode_with(
    metric: &SingleWarpMetric,
    k: usize,
    r_max: f64,
    solver: &ModeSolver,
) -> Result<RadialMode> {
    let r0 = solver.start;
    if !(r_max > r0) || !r_max.is_finite() {
        return Err(Error::Domain(format!(
            "mode range must extend past {r0}, got {r_max}"
        )));
    }
    let n = metric.dimension() as f64;
    let lambda = metric.sphere_eigenvalue(k);
    let profile = metric.profile();
    let sigma = profile.value(0.0, 1);
    let gamma = exponent_of(lambda / (sigma * sigma), n)?;
    let a = 0.5 * profile.value(0.0, 2) / sigma;
    let correction =
        -a * ((n - 1.0) * gamma + 2.0 * lambda / (sigma * sigma)) / (2.0 * gamma + n - 1.0);

    let weight = sigma.powf(n - 1.0);
    let energy_start = if lambda == 0.0 {
        0.0
    } else {
        weight * (gamma * gamma + lambda / (sigma * sigma)) * r0.powf(2.0 * gamma + n - 2.0)
            / (2.0 * gamma + n - 2.0)
    };
    let y0 = [
        r0.powf(gamma) * (1.0 + correction * r0),
        gamma * r0.powf(gamma - 1.0) + correction * (gamma + 1.0) * r0.powf(gamma),
        weight * r0.powf(2.0 * gamma + n) / (2.0 * gamma + n),
        energy_start,
        weight * r0.powf(n) / n,
    ];
    let ode = ModeOde { profile, n, lambda };
    let solution = Dopri5::with_rtol(solver.rtol).integrate(&ode, r0, &y0, r_max);
    let reach = match solution.stop {
        StopReason::Reached | StopReason::Overflow => solution.x_end(),
        StopReason::MaxSteps | StopReason::StepUnderflow => {
            return Err(Error::Domain(format!(
                "mode integration stalled at r = {} ({:?})",
                solution.x_end(),
                solution.stop
            )))
        }
    };

    let mut mode = RadialMode {
        metric: metric.clone(),
        k,
        lambda,
        gamma,
        pole_slope: sigma,
        correction,
        scale: 1.0,
        solution,
        reach,
        y_sup: ZonalHarmonic::new(metric.dimension() - 1, k).sup(),
        samples: Vec::new(),
        growth: None,
    };
    let anchor = mode.reach.min(1.0);
    mode.scale = 1.0 / mode.raw(anchor)[0];
    if reach > r0 {
        let grid = log_grid(r0, reach, solver.samples_per_decade)?;
        mode.samples = grid
            .into_iter()
            .map(|r| {
                let s = mode.raw(r);
                ModeSample {
                    r,
                    phi: mode.scale * s[0],
                    dphi: mode.scale * s[1],
                }
            })
            .collect();
    }
    Ok(mode)
}

impl RadialMode {
    pub fn metric(&self) -> &SingleWarpMetric {
        &self.metric
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Cross-section eigenvalue `λ_k = k(k + n − 2)`.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Frobenius exponent at the pole.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Largest radius reached by the integration.
    pub fn reach(&self) -> f64 {
        self.reach
    }

    pub fn overflowed(&self) -> bool {
        self.solution.stop == StopReason::Overflow
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `max |Y_k|` over the unit sphere.
    pub fn harmonic_sup(&self) -> f64 {
        self.y_sup
    }

    /// Unscaled state; below the start radius the two-term Frobenius series.
    fn raw(&self, r: f64) -> [f64; 5] {
        let r0 = self.solution.x_start();
        if r < r0 {
            return self.pole_state(r);
        }
        let mut out = [0.0; 5];
        let inside = self.solution.eval_into(r, &mut out);
        debug_assert!(inside, "radius {r} outside solved range");
        out
    }

    fn pole_state(&self, r: f64) -> [f64; 5] {
        let n = self.metric.dimension() as f64;
        let (g, c, s) = (self.gamma, self.correction, self.pole_slope);
        let w = s.powf(n - 1.0);
        let energy = if self.lambda == 0.0 {
            0.0
        } else {
            w * (g * g + self.lambda / (s * s)) * r.powf(2.0 * g + n - 2.0) / (2.0 * g + n - 2.0)
        };
        let dphi = if r == 0.0 && g < 1.0 {
            if g == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            g * r.powf(g - 1.0) + c * (g + 1.0) * r.powf(g)
        };
        [
            r.powf(g) * (1.0 + c * r),
            dphi,
            w * r.powf(2.0 * g + n) / (2.0 * g + n),
            energy,
            w * r.powf(n) / n,
        ]
    }

    fn state(&self, r: f64) -> Result<[f64; 5]> {
        if r < 0.0 || r.is_nan() {
            return Err(Error::Domain(format!(
                "radius must be nonnegative, got {r}"
            )));
        }
        if r > self.reach {
            return Err(Error::Range {
                requested: r,
                available: self.reach,
            });
        }
        Ok(self.raw(r))
    }

    pub fn phi(&self, r: f64) -> Result<f64> {
        Ok(self.scale * self.state(r)?[0])
    }

    pub fn dphi(&self, r: f64) -> Result<f64> {
        Ok(self.scale * self.state(r)?[1])
    }

    /// `∫₀^r φ² f^{n−1}`.
    pub fn mass_integral(&self, r: f64) -> Result<f64> {
        Ok(self.scale * self.scale * self.state(r)?[2])
    }

    /// `∫₀^r (φ′² + λφ²/f²) f^{n−1}`.
    pub fn energy_integral(&self, r: f64) -> Result<f64> {
        Ok(self.scale * self.scale * self.state(r)?[3])
    }

    /// `∫₀^r f^{n−1}`.
    pub fn volume_integral(&self, r: f64) -> Result<f64> {
        Ok(self.state(r)?[4])
    }

    /// Energy density `(φ′² + λφ²/f²) f^{n−1}` at `r > 0`.
    pub fn energy_density(&self, r: f64) -> Result<f64> {
        let s = self.state(r)?;
        let n = self.metric.dimension() as f64;
        let f = self.metric.profile().value(r, 0);
        let (p, dp) = (self.scale * s[0], self.scale * s[1]);
        Ok((dp * dp + self.lambda * p * p / (f * f)) * f.powf(n - 1.0))
    }

    /// Mean of `u²` over the geodesic ball of radius `r` about the pole.
    pub fn j(&self, r: f64) -> Result<f64> {
        if r == 0.0 {
            return Err(Error::Pole(0.0));
        }
        let s = self.state(r)?;
        Ok(self.scale * self.scale * s[2] / s[4])
    }

    /// `u(p)`: zero for `k ≥ 1`, since the regular branch vanishes at the pole.
    pub fn value_at_pole(&self) -> f64 {
        if self.k == 0 {
            self.scale * self.y_sup
        } else {
            0.0
        }
    }

    /// Same mode multiplied by `t`.
    pub fn scaled(&self, t: f64) -> RadialMode {
        let mut m = self.clone();
        m.scale *= t;
        for s in &mut m.samples {
            s.phi *= t;
            s.dphi *= t;
        }
        m
    }
}

/// Maximum relative residual of `φ″ + (n−1)(f′/f)φ′ − λφ/f²` over interior
/// samples, with `φ″` recovered from the sampled `φ′` by five-point centered
/// differences in `ln r`. Stencils straddling a profile join are skipped.
pub fn harmonicity_residual(metric: &SingleWarpMetric, mode: &RadialMode) -> Result<f64> {
    let s = &mode.samples;
    if s.len() < 5 {
        return Err(Error::Usage(
            "harmonicity check needs at least five samples".into(),
        ));
    }
    let n = metric.dimension() as f64;
    let lambda = metric.sphere_eigenvalue(mode.k);
    let profile = metric.profile();
    let joins = profile.joins();
    let mut worst: f64 = 0.0;
    for i in 2..s.len() - 2 {
        let (lo, hi) = (s[i - 2].r, s[i + 2].r);
        if joins.iter().any(|&j| j > lo && j < hi) {
            continue;
        }
        let h = (s[i + 1].r / s[i].r).ln();
        let dt = (-s[i + 2].dphi + 8.0 * s[i + 1].dphi - 8.0 * s[i - 1].dphi + s[i - 2].dphi)
            / (12.0 * h);
        let r = s[i].r;
        let second = dt / r;
        let f = profile.value(r, 0);
        let drift = (n - 1.0) * profile.value(r, 1) / f * s[i].dphi;
        let pot = lambda * s[i].phi / (f * f);
        let scale = second.abs() + drift.abs() + pot.abs();
        if scale > 0.0 {
            worst = worst.max((second + drift - pot).abs() / scale);
        }
    }
    Ok(worst)
}

/// Boundary-value mode on `B(R)`: the regular branch rescaled so `φ(R) = 1`.
pub fn dirichlet_mode(metric: &SingleWarpMetric, k: usize, radius: f64) -> Result<RadialMode> {
    dirichlet_mode_with(metric, k, radius, &ModeSolver::default())
}

pub fn dirichlet_mode_with(
    metric: &SingleWarpMetric,
    k: usize,
    radius: f64,
    solver: &ModeSolver,
) -> Result<RadialMode> {
    let mode = solve_radial_mode_with(metric, k, radius, solver)?;
    if mode.overflowed() || mode.reach < radius {
        return Err(Error::Overflow {
            reached: mode.reach,
            target: radius,
        });
    }
    let boundary = mode.phi(radius)?;
    Ok(mode.scaled(1.0 / boundary))
}

/// `ǔ = u / √J_u(k₀/2)`.
pub fn normalize_by_j(mode: &RadialMode, k0: f64) -> Result<RadialMode> {
    let radius = 0.5 * k0;
    let value = mode.j(radius)?;
    if !(value > 0.0 && value.is_finite()) {
        return Err(Error::DegenerateNormalization { radius, value });
    }
    Ok(mode.scaled(value.sqrt().recip()))
}

/// Compares least-squares fits of `ln φ` against `ln r` and against `r` over
/// the outer decade of the solved range (the outer half after overflow).
pub fn classify_mode(mode: &RadialMode) -> Result<GrowthClass> {
    let top = mode.reach;
    let lo = if mode.overflowed() {
        0.5 * top
    } else {
        0.1 * top
    };
    let window: Vec<&ModeSample> = mode
        .samples
        .iter()
        .filter(|s| s.r >= lo && s.phi > 0.0)
        .collect();
    if window.len() < 3 {
        return Err(Error::Usage(format!(
            "too few positive samples on [{lo}, {top}]"
        )));
    }
    let ln_phi: Vec<f64> = window.iter().map(|s| s.phi.ln()).collect();
    let ln_r: Vec<f64> = window.iter().map(|s| s.r.ln()).collect();
    let r: Vec<f64> = window.iter().map(|s| s.r).collect();
    let degenerate = || Error::Usage("degenerate growth window".into());
    let poly = linear_fit(&ln_r, &ln_phi).ok_or_else(degenerate)?;
    let expo = linear_fit(&r, &ln_phi).ok_or_else(degenerate)?;
    Ok(if poly.rms <= expo.rms {
        GrowthClass::Polynomial {
            exponent: poly.slope,
        }
    } else {
        GrowthClass::Exponential { rate: expo.slope }
    })
}

/// Growth class of mode `k`, solved out to radius 10³ or until overflow.
pub fn growth_classification(metric: &SingleWarpMetric, k: usize) -> Result<GrowthClass> {
    let mode = solve_radial_mode(metric, k, 1e3)?;
    classify_mode(&mode)
}
