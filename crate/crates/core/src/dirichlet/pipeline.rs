use serde::Serialize;

use super::mode::{dirichlet_mode_with, normalize_by_j, ModeSolver, RadialMode};
use crate::cone::{degree_spectrum, ConeSpace};
use crate::error::{Error, Result};
use crate::numerics::log_grid;
use crate::profiles::SingleWarpMetric;
use crate::three_circles::{cascade, CascadeReport};
use crate::tolerances;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma53Scan {
    pub radii: Vec<f64>,
    /// `J(r) / J(r/2)` per radius.
    pub ratios: Vec<f64>,
    pub bound: f64,
    pub first_failure: Option<f64>,
    pub passed: bool,
}

/// `J(r) ≤ 2^{2d} J(r/2)` on a log grid over `[r₀R, R]`.
pub fn lemma53_scan(mode: &RadialMode, d: f64, r0: f64, radius: f64) -> Result<Lemma53Scan> {
    if !(r0 > 0.0 && r0 < 1.0) {
        return Err(Error::Domain(format!("r₀ must lie in (0, 1), got {r0}")));
    }
    let radii = log_grid(r0 * radius, radius, 64)?;
    let bound = 4f64.powf(d);
    let ratios = radii
        .iter()
        .map(|&r| Ok(mode.j(r)? / mode.j(0.5 * r)?))
        .collect::<Result<Vec<f64>>>()?;
    let first_failure = radii
        .iter()
        .zip(&ratios)
        .find(|(_, &q)| !(q <= bound))
        .map(|(&r, _)| r);
    Ok(Lemma53Scan {
        passed: first_failure.is_none(),
        radii,
        ratios,
        bound,
        first_failure,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Envelope {
    /// Smallest `C` with `|ǔ| ≤ C ρ^d` on the sampled range.
    pub constant: f64,
    pub argmax: f64,
    /// The maximum sits at the top of the range and `φ` is still growing
    /// faster than `ρ^d` there.
    pub divergent: bool,
}

/// Envelope constant of `|ǔ(x)| ≤ C ρ(x)^d` over geodesic radii in `[lo, hi]`.
pub fn growth_envelope(mode: &RadialMode, d: f64, lo: f64, hi: f64) -> Result<Envelope> {
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Usage(format!(
            "envelope range must satisfy 0 < lo < hi, got [{lo}, {hi}]"
        )));
    }
    if hi > mode.reach() {
        return Err(Error::Range {
            requested: hi,
            available: mode.reach(),
        });
    }
    let grid = log_grid(lo, hi, 128)?;
    let sup = mode.harmonic_sup();
    let mut best = (0.0f64, lo);
    for &r in &grid {
        let c = mode.phi(r)?.abs() * sup / r.powf(d);
        if c > best.0 {
            best = (c, r);
        }
    }
    let at_top = best.1 >= grid[grid.len() - 2];
    let slope = hi * mode.dphi(hi)? / mode.phi(hi)?;
    Ok(Envelope {
        constant: best.0,
        argmax: best.1,
        divergent: at_top && slope > d,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Dirichlet,
    Normalization,
    Lemma53,
    Cascade,
    Envelope,
    Convergence,
    Stability,
    Certificate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum PipelineStatus {
    Success,
    VerificationFailure {
        stage: Stage,
        level: usize,
        detail: String,
    },
    PreconditionFailure {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreconditionReport {
    /// `None` when the degree spectrum cannot be certified for this model.
    pub off_spectrum: Option<bool>,
    pub above_first_exponent: Option<bool>,
    pub nearest_exponent: Option<f64>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelReport {
    pub level: usize,
    pub radius: f64,
    /// `J_{u_i}(k₀/2)` before renormalization.
    pub normalizer: f64,
    pub lemma53: Lemma53Scan,
    pub cascade: Option<CascadeReport>,
    pub envelope: Option<Envelope>,
    /// `sup |ǔ_i − ǔ_{i−1}|` on `{ρ ≤ k₀}`.
    pub sup_difference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineReport {
    pub model: String,
    pub dimension: usize,
    pub k: usize,
    pub d: f64,
    pub k0: f64,
    pub exhaustion_radii: Vec<f64>,
    pub precondition: PreconditionReport,
    pub levels: Vec<LevelReport>,
    /// `C_top / C_previous − 1` for the two finest levels.
    pub envelope_drift: Option<f64>,
    pub value_at_pole: Option<f64>,
    pub j_at_half_k0: Option<f64>,
    pub status: PipelineStatus,
}

impl PipelineReport {
    pub fn succeeded(&self) -> bool {
        self.status == PipelineStatus::Success
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineOptions {
    /// Lower end `r₀` of the Lemma 5.3 window, as a fraction of `R`.
    pub r0: f64,
    pub spectrum_tolerance: f64,
    pub convergence_tolerance: f64,
    /// Allowed relative drift of the envelope constant between the top levels.
    pub envelope_drift: f64,
    pub solver: ModeSolver,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            r0: 0.25,
            spectrum_tolerance: tolerances::SPECTRUM_MEMBERSHIP,
            convergence_tolerance: tolerances::LEVEL_CONVERGENCE,
            envelope_drift: 0.05,
            solver: ModeSolver::default(),
        }
    }
}

fn preconditions(metric: &SingleWarpMetric, d: f64, tolerance: f64) -> PreconditionReport {
    match ConeSpace::tangent_at_infinity(metric, 64) {
        Some(cone) => {
            let spectrum = degree_spectrum(&cone, 64);
            let m = spectrum.is_in_degree_spectrum(d, tolerance);
            let first = spectrum.first_nonzero().unwrap_or(f64::INFINITY);
            PreconditionReport {
                off_spectrum: Some(!m.member),
                above_first_exponent: Some(d > first),
                nearest_exponent: Some(m.nearest),
                note: format!("degree spectrum of the tangent cone (κ = {})", cone.kappa()),
            }
        }
        None => PreconditionReport {
            off_spectrum: None,
            above_first_exponent: None,
            nearest_exponent: None,
            note: "no tangent cone with positive volume ratio; degree spectrum not certifiable"
                .into(),
        },
    }
}

/// Dirichlet modes on `B(k₀2^i)`, `i = 1..=levels`, each normalized by
/// `J(k₀/2) = 1`, then checked stage by stage. Stops at the first failure.
pub fn existence_pipeline(
    metric: &SingleWarpMetric,
    k: usize,
    d: f64,
    levels: usize,
    k0: f64,
    options: &PipelineOptions,
) -> Result<PipelineReport> {
    if levels < 2 {
        return Err(Error::Usage(
            "the pipeline needs at least two levels".into(),
        ));
    }
    if !(k0 > 0.0 && d > 0.0) {
        return Err(Error::Usage("k₀ and d must be positive".into()));
    }
    let exhaustion_radii: Vec<f64> = (1..=levels).map(|i| k0 * 2f64.powi(i as i32)).collect();
    let precondition = preconditions(metric, d, options.spectrum_tolerance);
    let mut report = PipelineReport {
        model: metric.profile().kind_name().to_string(),
        dimension: metric.dimension(),
        k,
        d,
        k0,
        exhaustion_radii: exhaustion_radii.clone(),
        precondition,
        levels: Vec::new(),
        envelope_drift: None,
        value_at_pole: None,
        j_at_half_k0: None,
        status: PipelineStatus::Success,
    };
    let refuse = |reason: String| PipelineStatus::PreconditionFailure { reason };
    if k == 0 {
        report.status = refuse("mode 0 is constant; u(p) = 0 forces k ≥ 1".into());
        return Ok(report);
    }
    if report.precondition.off_spectrum == Some(false) {
        let nearest = report.precondition.nearest_exponent.unwrap_or(f64::NAN);
        report.status = refuse(format!(
            "d = {d} lies in the degree spectrum (nearest {nearest})"
        ));
        return Ok(report);
    }
    if report.precondition.above_first_exponent == Some(false) {
        report.status = refuse(format!(
            "d = {d} does not exceed the smallest nonzero exponent"
        ));
        return Ok(report);
    }

    let fail = |stage, level, detail: String| PipelineStatus::VerificationFailure {
        stage,
        level,
        detail,
    };
    let compact = log_grid(tolerances::FROBENIUS_START, k0, 64)?;
    let mut previous: Option<RadialMode> = None;
    let mut constants: Vec<f64> = Vec::new();

    for (idx, &radius) in exhaustion_radii.iter().enumerate() {
        let level = idx + 1;
        let mode = match dirichlet_mode_with(metric, k, radius, &options.solver) {
            Ok(m) => m,
            Err(e) => {
                report.status = fail(Stage::Dirichlet, level, e.to_string());
                return Ok(report);
            }
        };
        let normalizer = mode.j(0.5 * k0)?;
        let normalized = match normalize_by_j(&mode, k0) {
            Ok(m) => m,
            Err(e) => {
                report.status = fail(Stage::Normalization, level, e.to_string());
                return Ok(report);
            }
        };
        let lemma53 = lemma53_scan(&normalized, d, options.r0, radius)?;
        let mut entry = LevelReport {
            level,
            radius,
            normalizer,
            lemma53: lemma53.clone(),
            cascade: None,
            envelope: None,
            sup_difference: None,
        };
        if !lemma53.passed {
            let at = lemma53.first_failure.unwrap_or(f64::NAN);
            report.levels.push(entry);
            report.status = fail(
                Stage::Lemma53,
                level,
                format!("J(r) > 2^(2d) J(r/2) at r = {at}"),
            );
            return Ok(report);
        }

        let samples = (0..=level)
            .map(|j| {
                let r = k0 * 2f64.powi(j as i32);
                Ok((r, normalized.j(r)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let chain = cascade(&samples, d, k0)?;
        let chain_ok = chain.passed;
        entry.cascade = Some(chain);
        if !chain_ok {
            report.levels.push(entry);
            report.status = fail(
                Stage::Cascade,
                level,
                "dyadic cascade or its envelope failed".into(),
            );
            return Ok(report);
        }

        let envelope = growth_envelope(&normalized, d, 0.25 * k0, 0.5 * radius)?;
        entry.envelope = Some(envelope);
        if envelope.divergent || !envelope.constant.is_finite() {
            report.levels.push(entry);
            report.status = fail(Stage::Envelope, level, "growth envelope diverges".into());
            return Ok(report);
        }
        constants.push(envelope.constant);

        if let Some(prev) = &previous {
            let sup = normalized.harmonic_sup();
            let mut diff = 0.0f64;
            for &r in &compact {
                diff = diff.max((normalized.phi(r)? - prev.phi(r)?).abs() * sup);
            }
            entry.sup_difference = Some(diff);
            if !(diff < options.convergence_tolerance) {
                report.levels.push(entry);
                report.status = fail(
                    Stage::Convergence,
                    level,
                    format!("sup difference {diff:e} on ρ ≤ k₀"),
                );
                return Ok(report);
            }
        }
        report.levels.push(entry);
        previous = Some(normalized);
    }

    let n = constants.len();
    let drift = constants[n - 1] / constants[n - 2] - 1.0;
    report.envelope_drift = Some(drift);
    if !(drift.abs() <= options.envelope_drift) {
        report.status = fail(
            Stage::Stability,
            levels,
            format!("envelope constant drifted by {drift:e}"),
        );
        return Ok(report);
    }

    let limit = previous.expect("at least two levels ran");
    let value = limit.value_at_pole();
    let j = limit.j(0.5 * k0)?;
    report.value_at_pole = Some(value);
    report.j_at_half_k0 = Some(j);
    if value != 0.0 || (j - 1.0).abs() > 1e-10 {
        report.status = fail(
            Stage::Certificate,
            levels,
            format!("u(p) = {value}, J(k₀/2) = {j}"),
        );
    }
    Ok(report)
}
