//! Frequency-function machinery on rotationally symmetric models of maximal
//! volume growth: `b`, the level-set functionals `I, D, E, F`, the ratios
//! `𝓕 = D/I`, `𝒲 = E/I`, and checks of the lemma chain that bounds `𝓕`.

mod green;

pub use green::{green_radial, AmbientConstants, GreenRadial};

use serde::Serialize;

use crate::cone::ZonalHarmonic;
use crate::dirichlet::RadialMode;
use crate::error::{Error, Result};
use crate::numerics::{log_grid, GaussLegendre};

/// Window scaling for the §5 lemmas: the paper's `2^{4n}` or a desk-scale 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowPolicy {
    #[default]
    Desk,
    Paper,
}

impl WindowPolicy {
    /// Stand-in for `2^{4n}`.
    pub fn span(&self, n: usize) -> f64 {
        match self {
            WindowPolicy::Desk => 4.0,
            WindowPolicy::Paper => 2f64.powi(4 * n as i32),
        }
    }
}

fn check_compatible(green: &GreenRadial, mode: &RadialMode) -> Result<()> {
    if green.metric() != mode.metric() {
        return Err(Error::Usage(
            "mode and Green's function belong to different metrics".into(),
        ));
    }
    Ok(())
}

/// `I(r) = r^{1−n} ∫_{b=r} u² |∇b|`.
pub fn boundary_mass(green: &GreenRadial, mode: &RadialMode, r: f64) -> Result<f64> {
    check_compatible(green, mode)?;
    let rt = green.b_inverse(r)?;
    Ok(Pointwise::at(green, mode, r, rt)?.i)
}

struct Pointwise {
    i: f64,
    d: f64,
    f: f64,
}

impl Pointwise {
    fn at(green: &GreenRadial, mode: &RadialMode, r: f64, rt: f64) -> Result<Self> {
        let n = mode.metric().dimension() as i32;
        let omega = green.constants().sphere_area;
        let w = mode.metric().profile().value(rt, 0).powi(n - 1);
        let bp = green.b_prime(rt)?;
        let phi = mode.phi(rt)?;
        let dphi = mode.dphi(rt)?;
        Ok(Self {
            i: r.powi(1 - n) * omega * phi * phi * w * bp,
            d: r.powi(2 - n) * omega * mode.energy_integral(rt)?,
            f: r.powi(3 - n) * omega * dphi * dphi * w * bp,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyCurves {
    /// Level values `r` of `b`.
    pub radii: Vec<f64>,
    /// Geodesic radii `b⁻¹(r)`.
    pub geodesic: Vec<f64>,
    pub i: Vec<f64>,
    pub d: Vec<f64>,
    pub e: Vec<f64>,
    pub f: Vec<f64>,
    pub freq: Vec<f64>,
    pub w: Vec<f64>,
    pub dimension: usize,
}

/// Samples every functional on an ascending grid of `b`-levels.
pub fn frequency_curve(
    green: &GreenRadial,
    mode: &RadialMode,
    grid: &[f64],
) -> Result<FrequencyCurves> {
    check_compatible(green, mode)?;
    if grid.is_empty() || grid.windows(2).any(|w| !(w[1] > w[0])) || !(grid[0] > 0.0) {
        return Err(Error::Usage(
            "frequency grid must be positive and strictly ascending".into(),
        ));
    }
    let geodesic = grid
        .iter()
        .map(|&r| green.b_inverse(r))
        .collect::<Result<Vec<_>>>()?;
    let top = *geodesic.last().expect("nonempty grid");
    if top > mode.reach() {
        return Err(Error::Range {
            requested: top,
            available: mode.reach(),
        });
    }
    let n = mode.metric().dimension() as i32;
    let omega = green.constants().sphere_area;
    let rule = GaussLegendre::standard();
    let weighted = |s: f64| -> f64 {
        let bp = green.b_prime(s).expect("positive radius");
        mode.energy_density(s).expect("inside solved range") * bp * bp
    };

    // ∫₀^{r̃} energy · b′², accumulated along the grid.
    let start = crate::tolerances::FROBENIUS_START.min(geodesic[0]);
    let mut acc = mode.energy_integral(start)? * green.b_prime(start)?.powi(2);
    acc += rule.composite_log(
        weighted,
        start,
        geodesic[0],
        16,
        &mode.metric().profile().joins(),
    );
    let mut curves = FrequencyCurves {
        radii: grid.to_vec(),
        geodesic: geodesic.clone(),
        i: Vec::with_capacity(grid.len()),
        d: Vec::with_capacity(grid.len()),
        e: Vec::with_capacity(grid.len()),
        f: Vec::with_capacity(grid.len()),
        freq: Vec::with_capacity(grid.len()),
        w: Vec::with_capacity(grid.len()),
        dimension: n as usize,
    };
    for (j, (&r, &rt)) in grid.iter().zip(&geodesic).enumerate() {
        if j > 0 {
            acc += rule.composite_log(
                weighted,
                geodesic[j - 1],
                rt,
                16,
                &mode.metric().profile().joins(),
            );
        }
        let p = Pointwise::at(green, mode, r, rt)?;
        let e = r.powi(2 - n) * omega * acc;
        curves
            .freq
            .push(if p.i > 0.0 { p.d / p.i } else { f64::NAN });
        curves.w.push(if p.i > 0.0 { e / p.i } else { f64::NAN });
        curves.i.push(p.i);
        curves.d.push(p.d);
        curves.e.push(e);
        curves.f.push(p.f);
    }
    Ok(curves)
}

/// Log-spaced `b`-grid on `[lo, hi]`.
pub fn level_grid(lo: f64, hi: f64, per_decade: usize) -> Result<Vec<f64>> {
    log_grid(lo, hi, per_decade)
}

/// Derivative in `r` of sampled values on a log-uniform grid: five-point
/// centered differences in `ln r` inside, three-point one-sided at the ends.
fn log_derivative(radii: &[f64], values: &[f64]) -> Result<Vec<f64>> {
    let m = radii.len();
    if m < 3 {
        return Err(Error::Usage(
            "at least three grid points are required".into(),
        ));
    }
    let h = (radii[1] / radii[0]).ln();
    if radii
        .windows(2)
        .any(|w| ((w[1] / w[0]).ln() - h).abs() > 1e-9 * h.abs().max(1e-300))
    {
        return Err(Error::Usage("grid must be log-uniform".into()));
    }
    let v = values;
    let mut out = vec![0.0; m];
    for j in 0..m {
        let dt = if j >= 2 && j + 2 < m {
            (-v[j + 2] + 8.0 * v[j + 1] - 8.0 * v[j - 1] + v[j - 2]) / (12.0 * h)
        } else if j == 0 {
            (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
        } else if j == m - 1 {
            (3.0 * v[j] - 4.0 * v[j - 1] + v[j - 2]) / (2.0 * h)
        } else {
            (v[j + 1] - v[j - 1]) / (2.0 * h)
        };
        out[j] = dt / radii[j];
    }
    Ok(out)
}

/// Largest relative residual of `I′(r) − 2D(r)/r` over interior points.
pub fn check_derivative_identity(curves: &FrequencyCurves) -> Result<f64> {
    let di = log_derivative(&curves.radii, &curves.i)?;
    let m = curves.radii.len();
    let interior = if m >= 5 { 2..m - 2 } else { 1..m - 1 };
    Ok(interior
        .map(|j| {
            let r = curves.radii[j];
            let target = 2.0 * curves.d[j] / r;
            let scale = target.abs().max(curves.i[j].abs() / r);
            if scale > 0.0 {
                (di[j] - target).abs() / scale
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max))
}

fn window_indices(curves: &FrequencyCurves, lo: f64, hi: f64) -> Result<(usize, usize)> {
    let radii = &curves.radii;
    let first = radii[0];
    let last = *radii.last().expect("nonempty");
    let slack = 1e-12;
    if lo < first * (1.0 - slack) || hi > last * (1.0 + slack) {
        let requested = if hi > last { hi } else { lo };
        return Err(Error::Range {
            requested,
            available: last,
        });
    }
    let a = radii.partition_point(|&r| r < lo * (1.0 - slack));
    let b = radii.partition_point(|&r| r <= hi * (1.0 + slack));
    Ok((a, b))
}

/// `∫_r^{factor·r} min{(ln 𝒲)′, 0} dt` by trapezoids on the grid.
pub fn w_defect(curves: &FrequencyCurves, r: f64, factor: f64) -> Result<f64> {
    if !(factor > 1.0) {
        return Err(Error::Usage(format!(
            "window factor must exceed 1, got {factor}"
        )));
    }
    let (a, b) = window_indices(curves, r, factor * r)?;
    let ln_w: Vec<f64> = curves.w.iter().map(|w| w.ln()).collect();
    let dw = log_derivative(&curves.radii, &ln_w)?;
    // (ln 𝒲)′ dt = (d ln 𝒲 / d ln t) d ln t
    let g: Vec<f64> = (a..b).map(|j| (dw[j] * curves.radii[j]).min(0.0)).collect();
    let mut total = 0.0;
    for j in 1..g.len() {
        let du = (curves.radii[a + j] / curves.radii[a + j - 1]).ln();
        total += 0.5 * (g[j] + g[j - 1]) * du;
    }
    Ok(total)
}

/// Log-log interpolation of a positive sampled functional.
fn interpolate(radii: &[f64], values: &[f64], r: f64) -> Result<f64> {
    let last = *radii.last().expect("nonempty");
    if r < radii[0] * (1.0 - 1e-12) || r > last * (1.0 + 1e-12) {
        return Err(Error::Range {
            requested: r,
            available: last,
        });
    }
    let j = radii.partition_point(|&x| x < r).clamp(1, radii.len() - 1);
    let (r0, r1, v0, v1) = (radii[j - 1], radii[j], values[j - 1], values[j]);
    if v0 <= 0.0 || v1 <= 0.0 {
        let t = (r - r0) / (r1 - r0);
        return Ok(v0 + t * (v1 - v0));
    }
    let t = (r / r0).ln() / (r1 / r0).ln();
    Ok((v0.ln() + t * (v1 / v0).ln()).exp())
}

impl FrequencyCurves {
    pub fn i_at(&self, r: f64) -> Result<f64> {
        interpolate(&self.radii, &self.i, r)
    }

    pub fn d_at(&self, r: f64) -> Result<f64> {
        interpolate(&self.radii, &self.d, r)
    }

    pub fn e_at(&self, r: f64) -> Result<f64> {
        interpolate(&self.radii, &self.e, r)
    }

    pub fn freq_max(&self) -> (f64, f64) {
        self.radii
            .iter()
            .zip(&self.freq)
            .map(|(&r, &v)| (r, v))
            .fold((f64::NAN, f64::NEG_INFINITY), |acc, x| {
                if x.1 > acc.1 {
                    x
                } else {
                    acc
                }
            })
    }
}

/// Grid radii `r` (with `factor·r` still on the grid) where
/// `D(factor·r) ≤ bound · D(r)`.
pub fn d_doubling_scan(curves: &FrequencyCurves, factor: f64, bound: f64) -> Vec<f64> {
    let last = *curves.radii.last().expect("nonempty");
    curves
        .radii
        .iter()
        .zip(&curves.d)
        .filter(|(&r, _)| factor * r <= last * (1.0 + 1e-12))
        .filter_map(|(&r, &d)| {
            let far = curves.d_at(factor * r).ok()?;
            (far <= bound * d).then_some(r)
        })
        .collect()
}

/// `ln(D(r)/E(r))`.
pub fn e_over_d(curves: &FrequencyCurves, r: f64) -> Result<f64> {
    Ok((curves.d_at(r)? / curves.e_at(r)?).ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Implication {
    pub premise: bool,
    pub conclusion: bool,
}

impl Implication {
    pub fn holds(&self) -> bool {
        !self.premise || self.conclusion
    }
}

/// `I(4·span·r) ≤ γ I(r/2) ⇒ D(2·span·r) ≤ 2^{n−2} γ D(r)`, with `span`
/// standing in for `2^{4n}`.
pub fn d_growth_from_i(
    curves: &FrequencyCurves,
    r: f64,
    gamma: f64,
    policy: WindowPolicy,
) -> Result<Implication> {
    let n = curves.dimension;
    let span = policy.span(n);
    let premise = curves.i_at(4.0 * span * r)? <= gamma * curves.i_at(0.5 * r)?;
    let conclusion =
        curves.d_at(2.0 * span * r)? <= 2f64.powi(n as i32 - 2) * gamma * curves.d_at(r)?;
    Ok(Implication {
        premise,
        conclusion,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrequencyBound {
    pub sup: f64,
    pub argmax: f64,
    pub bound: f64,
    pub passed: bool,
}

/// `sup 𝓕` over `[lo, hi]` against `5d`.
pub fn frequency_bound_scan(
    green: &GreenRadial,
    mode: &RadialMode,
    d: f64,
    lo: f64,
    hi: f64,
    per_decade: usize,
) -> Result<FrequencyBound> {
    let grid = level_grid(lo, hi, per_decade)?;
    let curves = frequency_curve(green, mode, &grid)?;
    let (argmax, sup) = curves.freq_max();
    let bound = 5.0 * d;
    Ok(FrequencyBound {
        sup,
        argmax,
        bound,
        passed: sup <= bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupRatios {
    pub radii: Vec<f64>,
    /// `sup_{b ≤ (1−θ)r} |u|² / I(r)`
    pub value: Vec<f64>,
    /// `r² sup_{b ≤ (1−θ)r} |∇u|² / I(r)`
    pub gradient: Vec<f64>,
    pub value_spread: f64,
    pub gradient_spread: f64,
    pub bounded: bool,
}

/// Boundedness across dyadic levels of the normalized sup estimates.
pub fn sup_ratio_check(
    green: &GreenRadial,
    mode: &RadialMode,
    theta: f64,
    radii: &[f64],
) -> Result<SupRatios> {
    check_compatible(green, mode)?;
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Domain(format!("θ must lie in (0, 1), got {theta}")));
    }
    let metric = mode.metric();
    let y = ZonalHarmonic::new(metric.dimension() - 1, mode.k());
    let angles: Vec<f64> = (0..=180)
        .map(|j| std::f64::consts::PI * j as f64 / 180.0)
        .collect();
    let (mut value, mut gradient) = (Vec::new(), Vec::new());
    for &r in radii {
        let inner = green.b_inverse((1.0 - theta) * r)?;
        let i = boundary_mass(green, mode, r)?;
        let mut points: Vec<f64> = mode
            .samples
            .iter()
            .map(|s| s.r)
            .filter(|&s| s < inner)
            .collect();
        points.push(inner);
        let (mut vmax, mut gmax) = (0.0f64, 0.0f64);
        for s in points {
            let (phi, dphi) = (mode.phi(s)?, mode.dphi(s)?);
            let f = metric.profile().value(s, 0);
            vmax = vmax.max(phi * phi * y.sup() * y.sup());
            for &t in &angles {
                let (yv, yd) = (y.value(t), y.derivative(t));
                gmax = gmax.max(dphi * dphi * yv * yv + phi * phi * yd * yd / (f * f));
            }
        }
        value.push(vmax / i);
        gradient.push(r * r * gmax / i);
    }
    let spread = |v: &[f64]| {
        let (lo, hi) = v
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        hi / lo
    };
    let (value_spread, gradient_spread) = (spread(&value), spread(&gradient));
    Ok(SupRatios {
        radii: radii.to_vec(),
        bounded: value_spread < 100.0 && gradient_spread < 100.0,
        value,
        gradient,
        value_spread,
        gradient_spread,
    })
}
