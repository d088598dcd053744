use std::path::Path;
use std::time::Instant;

use conelab_core::cone::{degree_spectrum, ConeHarmonic, ConeSpace};
use conelab_core::dirichlet::{
    dirichlet_mode_with, existence_pipeline, growth_classification, normalize_by_j,
    solve_radial_mode_with, GrowthClass, ModeSolver, PipelineOptions, PipelineStatus,
};
use conelab_core::frequency::{
    boundary_mass, check_derivative_identity, d_growth_from_i, frequency_curve, green_radial,
    AmbientConstants, GreenRadial, WindowPolicy,
};
use conelab_core::numerics::log_grid;
use conelab_core::profiles::{
    asymptotic_volume_ratio, check_ni_assumptions, growth_degree, ricci_components_single,
    sectional_components_doubly, DoublyWarpedMetric, SingleWarpMetric, WarpProfile, NI_ASSUMPTIONS,
};
use conelab_core::three_circles::{
    three_circles_i_cone, three_circles_i_metric, three_circles_j_cone, three_circles_j_metric,
    ThreeCircles,
};
use conelab_core::{tolerances, Error};

use crate::config::{MetricKind, Model, ScenarioConfig};
use crate::manifest::{CheckRecord, OutputRecord, RunManifest, Settings, Verdict};
use crate::output::{fmt_f64, write_csv, write_json, Cell};
use crate::{suites, CliError, Command, RunOptions};

pub const CURVATURE_HEADER: [&str; 6] = ["r", "K_x1x2", "K_xy", "K_y1y2", "K_rx", "K_ry"];
pub const RICCI_HEADER: [&str; 3] = ["r", "ric_rr", "ric_tan"];
pub const SPECTRUM_HEADER: [&str; 4] = ["k", "lambda", "multiplicity", "alpha"];
pub const FREQUENCY_HEADER: [&str; 7] = ["r", "I", "D", "E", "F", "freq", "W"];
pub const THREE_CIRCLES_HEADER: [&str; 6] =
    ["r", "J_r", "J_half", "J_quarter", "premise", "conclusion"];
pub const LIMIT_HEADER: [&str; 3] = ["r", "phi", "dphi"];
pub const CLASSIFY_HEADER: [&str; 3] = ["k", "class", "value"];

type Outcome = Result<(Verdict, String), CliError>;

#[derive(Debug, Clone, Copy)]
enum Density {
    Points(usize),
    PerDecade(usize),
}

#[derive(Debug, Clone, Copy)]
struct GridSpec {
    lo: f64,
    hi: f64,
    density: Density,
}

impl GridSpec {
    fn build(&self) -> Result<Vec<f64>, CliError> {
        match self.density {
            // (lo, hi], uniform in log r
            Density::Points(n) => {
                let ratio = self.hi / self.lo;
                let mut g: Vec<f64> = (1..=n)
                    .map(|i| self.lo * ratio.powf(i as f64 / n as f64))
                    .collect();
                g[n - 1] = self.hi;
                Ok(g)
            }
            Density::PerDecade(p) => Ok(log_grid(self.lo, self.hi, p)?),
        }
    }

    fn refined(&self) -> Self {
        let density = match self.density {
            Density::Points(n) => Density::Points(2 * n),
            Density::PerDecade(p) => Density::PerDecade(2 * p),
        };
        Self { density, ..*self }
    }
}

struct Runner<'a> {
    config: &'a ScenarioConfig,
    options: &'a RunOptions,
    out: &'a Path,
    checks: Vec<CheckRecord>,
    outputs: Vec<OutputRecord>,
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

impl Runner<'_> {
    fn check(&mut self, name: &str, f: impl FnOnce() -> Outcome) -> Result<Verdict, CliError> {
        let start = Instant::now();
        let (verdict, detail) = f()?;
        self.checks.push(CheckRecord {
            name: name.into(),
            verdict,
            detail,
            duration_ms: elapsed_ms(start),
        });
        Ok(verdict)
    }

    fn csv(&mut self, file: &str, header: &[&str], rows: Vec<Vec<Cell>>) -> Result<(), CliError> {
        write_csv(&self.out.join(file), header, &rows)?;
        self.outputs.push(OutputRecord {
            path: file.into(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: rows.len(),
        });
        Ok(())
    }

    fn json<T: serde::Serialize>(&mut self, file: &str, value: &T) -> Result<(), CliError> {
        write_json(&self.out.join(file), value)?;
        self.outputs.push(OutputRecord {
            path: file.into(),
            header: Vec::new(),
            rows: 0,
        });
        Ok(())
    }

    /// `--tol`, then `operation.tolerance`, then the command default.
    fn tol(&self, default: f64) -> f64 {
        self.options
            .tol
            .or(self.config.operation.tolerance)
            .unwrap_or(default)
    }

    fn grid(&self, lo: f64, hi: f64, default: Density) -> GridSpec {
        let g = self.config.operation.grid;
        let (lo, hi) = g.map_or((lo, hi), |g| (g.lo, g.hi));
        let density = match (
            self.options.grid_per_decade,
            g.and_then(|g| g.per_decade),
            g.and_then(|g| g.points),
        ) {
            (Some(p), _, _) | (None, Some(p), _) => Density::PerDecade(p),
            (None, None, Some(n)) => Density::Points(n),
            _ => default,
        };
        GridSpec { lo, hi, density }
    }

    fn growth_window(&self, default: (f64, f64)) -> (f64, f64) {
        self.config.operation.growth_window.unwrap_or(default)
    }

    fn policy(&self) -> WindowPolicy {
        if self.options.paper_factors {
            WindowPolicy::Paper
        } else {
            WindowPolicy::Desk
        }
    }
}

pub(crate) fn execute(
    command: Command,
    config: &ScenarioConfig,
    digest: String,
    options: &RunOptions,
    out: &Path,
) -> Result<RunManifest, CliError> {
    let start = Instant::now();
    let mut r = Runner {
        config,
        options,
        out,
        checks: Vec::new(),
        outputs: Vec::new(),
    };
    match command {
        Command::VerifyNi => verify_ni(&mut r)?,
        Command::VerifyDing => verify_ding(&mut r)?,
        Command::Curvature => curvature(&mut r)?,
        Command::Frequency => frequency(&mut r)?,
        Command::ThreeCircles => three_circles(&mut r)?,
        Command::Spectrum => spectrum(&mut r)?,
        Command::Existence => existence(&mut r)?,
        Command::Classify => classify(&mut r)?,
    }
    let verdicts: Vec<Verdict> = r.checks.iter().map(|c| c.verdict).collect();
    let verdict = if verdicts.contains(&Verdict::Fail) {
        Verdict::Fail
    } else if verdicts.contains(&Verdict::PreconditionFailed) {
        Verdict::PreconditionFailed
    } else if verdicts.contains(&Verdict::Pass) {
        Verdict::Pass
    } else {
        Verdict::Skipped
    };
    let manifest = RunManifest {
        tool: "conelab".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.name().into(),
        config_digest: digest,
        seed: options.seed,
        settings: Settings {
            grid_per_decade: options.grid_per_decade,
            tolerance: options.tol,
            paper_factors: options.paper_factors,
        },
        verdict,
        checks: r.checks,
        outputs: r.outputs,
        total_ms: elapsed_ms(start),
    };
    write_json(&out.join("run.json"), &manifest)?;
    Ok(manifest)
}

fn require_kind(
    config: &ScenarioConfig,
    kind: MetricKind,
    command: Command,
) -> Result<(), CliError> {
    if config.metric.kind != kind {
        return Err(CliError::Config(format!(
            "{} needs metric.kind = {kind:?}",
            command.name()
        )));
    }
    Ok(())
}

fn curvature_rows(
    metric: &DoublyWarpedMetric,
    grid: &[f64],
) -> Result<(Vec<Vec<Cell>>, f64, f64), CliError> {
    let mut rows = Vec::with_capacity(grid.len());
    let (mut min, mut at) = (f64::INFINITY, f64::NAN);
    for &x in grid {
        let s = sectional_components_doubly(metric, x)?;
        if s.min() < min {
            (min, at) = (s.min(), x);
        }
        rows.push(vec![
            x.into(),
            s.k_x1x2.into(),
            s.k_xy.into(),
            s.k_y1y2.into(),
            s.k_rx.into(),
            s.k_ry.into(),
        ]);
    }
    Ok((rows, min, at))
}

fn ricci_rows(
    metric: &SingleWarpMetric,
    grid: &[f64],
) -> Result<(Vec<Vec<Cell>>, f64, f64, usize), CliError> {
    let mut rows = Vec::with_capacity(grid.len());
    let (mut min, mut at) = (f64::INFINITY, f64::NAN);
    let mut negative = 0;
    for &x in grid {
        let s = ricci_components_single(metric, x)?;
        let m = s.ric_rr.min(s.ric_tan);
        negative += (m < 0.0) as usize;
        if m < min {
            (min, at) = (m, x);
        }
        rows.push(vec![x.into(), s.ric_rr.into(), s.ric_tan.into()]);
    }
    Ok((rows, min, at, negative))
}

fn positive_curvature_check(
    r: &mut Runner,
    metric: &DoublyWarpedMetric,
    spec: GridSpec,
) -> Result<(), CliError> {
    let (rows, min, at) = curvature_rows(metric, &spec.build()?)?;
    let points = rows.len();
    r.csv("curvature.csv", &CURVATURE_HEADER, rows)?;
    r.check("curvature-positive", || {
        Ok((
            Verdict::from_bool(min > 0.0),
            format!(
                "min sectional curvature {} at r = {} over {points} points",
                fmt_f64(min),
                fmt_f64(at)
            ),
        ))
    })?;
    r.check("curvature-grid-stability", || {
        let (_, fine, _) = curvature_rows(metric, &spec.refined().build()?)?;
        let drift = (fine / min - 1.0).abs();
        Ok((
            Verdict::from_bool(drift <= 0.01),
            format!(
                "min {} on the doubled grid, relative change {}",
                fmt_f64(fine),
                fmt_f64(drift)
            ),
        ))
    })?;
    Ok(())
}

fn nonnegative_ricci_check(
    r: &mut Runner,
    metric: &SingleWarpMetric,
    spec: GridSpec,
) -> Result<(), CliError> {
    let floor = -r.tol(1e-9);
    let (rows, min, at, negative) = ricci_rows(metric, &spec.build()?)?;
    let points = rows.len();
    r.csv("ricci.csv", &RICCI_HEADER, rows)?;
    r.check("ricci-nonnegative", || {
        Ok((
            Verdict::from_bool(min >= floor),
            format!(
                "min Ricci component {} at r = {} over {points} points ({negative} below zero, floor {})",
                fmt_f64(min),
                fmt_f64(at),
                fmt_f64(floor)
            ),
        ))
    })?;
    Ok(())
}

fn verify_ni(r: &mut Runner) -> Result<(), CliError> {
    require_kind(r.config, MetricKind::Ni, Command::VerifyNi)?;
    let Model::Doubly(metric, p) = r.config.model()? else {
        unreachable!("kind checked")
    };
    let report = check_ni_assumptions(&p)?;
    for (i, label) in NI_ASSUMPTIONS.iter().enumerate() {
        r.check(&format!("assumption-{}", i + 1), || {
            Ok((
                Verdict::from_bool(report.holds[i]),
                format!("{label}: residual {}", fmt_f64(report.residuals[i])),
            ))
        })?;
    }
    let tol = r.tol(tolerances::ALGEBRAIC);
    for (name, profile) in [("c2-gluing-f", metric.f()), ("c2-gluing-h", metric.h())] {
        r.check(name, || Ok(gluing_outcome(profile, tol)))?;
    }
    let spec = r.grid(1e-3, 200.0, Density::Points(10_000));
    positive_curvature_check(r, &metric, spec)?;
    let (lo, hi) = r.growth_window((1e3, 1e6));
    r.check("growth-degree", || {
        let deg = growth_degree(&metric, lo, hi)?;
        Ok((
            Verdict::from_bool((deg - 5.0).abs() <= 0.05),
            format!("volume growth degree {} on [{lo}, {hi}]", fmt_f64(deg)),
        ))
    })?;
    Ok(())
}

fn gluing_outcome(profile: &WarpProfile, tol: f64) -> (Verdict, String) {
    let joins = profile.c2_gluing_residuals();
    let worst = joins.iter().map(|j| j.max_abs()).fold(0.0, f64::max);
    let at: Vec<String> = joins.iter().map(|j| fmt_f64(j.radius)).collect();
    (
        Verdict::from_bool(worst <= tol),
        format!(
            "largest jump {} across joins at r = [{}], tolerance {}",
            fmt_f64(worst),
            at.join(", "),
            fmt_f64(tol)
        ),
    )
}

fn verify_ding(r: &mut Runner) -> Result<(), CliError> {
    require_kind(r.config, MetricKind::Ding, Command::VerifyDing)?;
    let metric = r.config.single_metric("verify-ding")?;
    r.check("c2-gluing", || Ok(gluing_outcome(metric.profile(), 1e-10)))?;
    let spec = r.grid(1e-3, 3.0, Density::Points(10_000));
    nonnegative_ricci_check(r, &metric, spec)?;
    let (lo, hi) = r.growth_window((10.0, 1e4));
    r.check("linear-growth", || {
        let deg = growth_degree(&metric, lo, hi)?;
        Ok((
            Verdict::from_bool((deg - 1.0).abs() <= 0.05),
            format!("volume growth degree {} on [{lo}, {hi}]", fmt_f64(deg)),
        ))
    })?;
    r.check("non-maximal-growth", || {
        let v = asymptotic_volume_ratio(&metric);
        Ok((
            Verdict::from_bool(!v.maximal_growth),
            format!("asymptotic volume ratio {}", fmt_f64(v.v_m)),
        ))
    })?;
    let k = r.config.operation.k.unwrap_or(1);
    r.check("mode-classification", || {
        Ok(match growth_classification(&metric, k)? {
            GrowthClass::Exponential { rate } => (
                Verdict::Pass,
                format!("mode k = {k} grows exponentially at rate {}", fmt_f64(rate)),
            ),
            GrowthClass::Polynomial { exponent } => (
                Verdict::Fail,
                format!(
                    "mode k = {k} fits polynomial growth of order {}",
                    fmt_f64(exponent)
                ),
            ),
        })
    })?;
    Ok(())
}

fn curvature(r: &mut Runner) -> Result<(), CliError> {
    match r.config.model()? {
        Model::Doubly(metric, _) => {
            let spec = r.grid(1e-3, 200.0, Density::Points(10_000));
            positive_curvature_check(r, &metric, spec)
        }
        Model::Single(metric) => {
            let hi = if r.config.metric.kind == MetricKind::Ding {
                3.0
            } else {
                100.0
            };
            let spec = r.grid(1e-3, hi, Density::Points(10_000));
            nonnegative_ricci_check(r, &metric, spec)
        }
    }
}

/// Green's function for maximal-growth models; records a failed
/// precondition otherwise.
fn green_or_precondition(
    r: &mut Runner,
    metric: &SingleWarpMetric,
) -> Result<Option<GreenRadial>, CliError> {
    match AmbientConstants::for_metric(metric) {
        Ok(c) => Ok(Some(green_radial(metric, c)?)),
        Err(Error::NotNormalizable) => {
            r.check("maximal-growth", || {
                Ok((
                    Verdict::PreconditionFailed,
                    "asymptotic volume ratio vanishes, b is not defined".into(),
                ))
            })?;
            Ok(None)
        }
        Err(e) => Err(e.into()),
    }
}

fn frequency(r: &mut Runner) -> Result<(), CliError> {
    let metric = r.config.single_metric("frequency")?;
    let Some(green) = green_or_precondition(r, &metric)? else {
        return Ok(());
    };
    let op = &r.config.operation;
    let k = op.k.unwrap_or(1);
    let spec = r.grid(1.0, 1e3, Density::PerDecade(64));
    let grid = spec.build()?;
    let top = green.b_inverse(spec.hi)? * 1.01;
    let mode = solve_radial_mode_with(&metric, k, top, &ModeSolver::default())?;
    let curves = frequency_curve(&green, &mode, &grid)?;
    let rows = (0..grid.len())
        .map(|j| {
            vec![
                curves.radii[j].into(),
                curves.i[j].into(),
                curves.d[j].into(),
                curves.e[j].into(),
                curves.f[j].into(),
                curves.freq[j].into(),
                curves.w[j].into(),
            ]
        })
        .collect();
    r.csv("frequency.csv", &FREQUENCY_HEADER, rows)?;

    let tol = r.tol(1e-4);
    let res = check_derivative_identity(&curves)?;
    r.check("derivative-identity", || {
        Ok((
            Verdict::from_bool(res <= tol),
            format!("max relative residual of I' - 2D/r: {}", fmt_f64(res)),
        ))
    })?;

    let n = metric.dimension() as f64;
    let constants = *green.constants();
    r.check("i1-volume-ratio", || {
        let flat = solve_radial_mode_with(&metric, 0, top, &ModeSolver::default())?;
        let want = n * constants.volume_ratio;
        let worst = [spec.lo, (spec.lo * spec.hi).sqrt(), spec.hi]
            .iter()
            .map(|&x| Ok((boundary_mass(&green, &flat, x)? / want - 1.0).abs()))
            .collect::<Result<Vec<f64>, Error>>()?
            .into_iter()
            .fold(0.0, f64::max);
        Ok((
            Verdict::from_bool(worst <= 1e-4),
            format!(
                "I of the constant function vs nV_M, relative error {}",
                fmt_f64(worst)
            ),
        ))
    })?;

    let d =
        op.d.or_else(|| ConeSpace::tangent_at_infinity(&metric, k + 1).and_then(|c| c.exponent(k)));
    match d {
        Some(d) if d > 0.0 => r.check("frequency-bound", || {
            let (at, sup) = curves.freq_max();
            Ok((
                Verdict::from_bool(sup <= 5.0 * d),
                format!(
                    "sup F = {} at r = {} against 5d = {}",
                    fmt_f64(sup),
                    fmt_f64(at),
                    fmt_f64(5.0 * d)
                ),
            ))
        })?,
        _ => r.check("frequency-bound", || {
            Ok((Verdict::Skipped, "no positive growth order d".into()))
        })?,
    };

    let policy = r.policy();
    let span = policy.span(metric.dimension());
    // wide enough that the premise holds for growth of order d
    let gamma = op
        .gamma
        .or(d.map(|d| 2.0 * (8.0 * span).powf(2.0 * d)))
        .unwrap_or(1e4);
    r.check("d-growth", || {
        let (mut tested, mut premises, mut broken) = (0, 0, Vec::new());
        for &x in &grid {
            if 0.5 * x < spec.lo || 4.0 * span * x > spec.hi {
                continue;
            }
            let imp = d_growth_from_i(&curves, x, gamma, policy)?;
            tested += 1;
            premises += imp.premise as usize;
            if !imp.holds() {
                broken.push(fmt_f64(x));
            }
        }
        Ok(if tested == 0 {
            (
                Verdict::Skipped,
                format!(
                    "no level has its window (span {}) inside the grid",
                    fmt_f64(span)
                ),
            )
        } else {
            (
                Verdict::from_bool(broken.is_empty()),
                format!(
                    "{tested} levels, gamma {}, {premises} premises held, violations at [{}]",
                    fmt_f64(gamma),
                    broken.join(", ")
                ),
            )
        })
    })?;

    let (argmax, sup) = curves.freq_max();
    let verdicts: Vec<_> = r
        .checks
        .iter()
        .map(|c| serde_json::json!({ "name": c.name, "verdict": c.verdict, "detail": c.detail }))
        .collect();
    let summary = serde_json::json!({
        "k": k,
        "sup_freq": sup,
        "argmax": argmax,
        "identity_residual": res,
        "checks": verdicts,
    });
    r.json("frequency.json", &summary)?;
    Ok(())
}

fn three_circles_rows(tc: &[ThreeCircles]) -> Vec<Vec<Cell>> {
    tc.iter()
        .map(|t| {
            vec![
                t.r.into(),
                t.at_r.into(),
                t.at_half.into(),
                t.at_quarter.into(),
                t.premise.into(),
                t.conclusion.into(),
            ]
        })
        .collect()
}

fn implication_outcome(tc: &[ThreeCircles]) -> (Verdict, String) {
    let premises = tc.iter().filter(|t| t.premise).count();
    let broken: Vec<String> = tc
        .iter()
        .filter(|t| !t.implication_holds())
        .map(|t| fmt_f64(t.r))
        .collect();
    (
        Verdict::from_bool(broken.is_empty()),
        format!(
            "{} radii, {premises} premises held, violations at [{}]",
            tc.len(),
            broken.join(", ")
        ),
    )
}

fn three_circles(r: &mut Runner) -> Result<(), CliError> {
    let op = r.config.operation.clone();
    if let Some(cases) = op.cases.filter(|&c| c > 0) {
        let seed = r.options.seed;
        r.check("lemma31-random", || {
            let s = suites::lemma31_suite(seed, cases);
            Ok((
                Verdict::from_bool(s.passed()),
                format!(
                    "{} systems, {} premises, {} counterexamples",
                    s.cases, s.premises, s.counterexamples
                ),
            ))
        })?;
        r.check("lemma31-equality", || {
            let n = cases.min(100);
            let agree = suites::lemma31_equality_suite(seed ^ 1, n);
            Ok((
                Verdict::from_bool(agree == n),
                format!("{agree} of {n} constructed cases classified exactly"),
            ))
        })?;
        let (j, i) = suites::cone_suite(seed ^ 2, cases)?;
        for (name, s) in [("cone-random-j", j), ("cone-random-i", i)] {
            r.check(name, || {
                Ok((
                    Verdict::from_bool(s.passed()),
                    format!(
                        "{} harmonics, {} premises, {} counterexamples",
                        s.cases, s.premises, s.counterexamples
                    ),
                ))
            })?;
        }
    }
    let Some(alpha) = op.alpha else {
        if op.cases.is_some() {
            return Ok(());
        }
        return Err(CliError::Config(
            "three-circles needs operation.alpha (or operation.cases)".into(),
        ));
    };
    let tol = r.tol(tolerances::SPECTRUM_MEMBERSHIP);
    if let Some(cone) = r.config.cone()? {
        let spectrum = degree_spectrum(&cone, cone.spectrum().truncation());
        let m = spectrum.is_in_degree_spectrum(alpha, tol);
        r.check("off-spectrum", || {
            Ok(spectrum_outcome(alpha, m.member, m.nearest))
        })?;
        if m.member {
            return Ok(());
        }
        let terms = op
            .terms
            .clone()
            .unwrap_or_else(|| vec![(1.0, op.k.unwrap_or(1))]);
        let h = ConeHarmonic::new(&cone, terms)?;
        let radii = r.grid(1e-2, 1e2, Density::PerDecade(8)).build()?;
        let j = radii
            .iter()
            .map(|&x| three_circles_j_cone(&h, x, alpha, tol))
            .collect::<Result<Vec<_>, _>>()?;
        r.csv(
            "three_circles_j.csv",
            &THREE_CIRCLES_HEADER,
            three_circles_rows(&j),
        )?;
        r.check("three-circles-j", || Ok(implication_outcome(&j)))?;
        if h.value_at_vertex() == 0.0 {
            let i = radii
                .iter()
                .map(|&x| three_circles_i_cone(&h, x, alpha, tol))
                .collect::<Result<Vec<_>, _>>()?;
            r.csv(
                "three_circles_i.csv",
                &THREE_CIRCLES_HEADER,
                three_circles_rows(&i),
            )?;
            r.check("three-circles-i", || Ok(implication_outcome(&i)))?;
        } else {
            r.check("three-circles-i", || {
                Ok((
                    Verdict::Skipped,
                    "harmonic does not vanish at the vertex".into(),
                ))
            })?;
        }
        return Ok(());
    }

    let metric = r.config.single_metric("three-circles")?;
    match ConeSpace::tangent_at_infinity(&metric, 64) {
        Some(cone) => {
            let m = degree_spectrum(&cone, 64).is_in_degree_spectrum(alpha, tol);
            r.check("off-spectrum", || {
                Ok(spectrum_outcome(alpha, m.member, m.nearest))
            })?;
            if m.member {
                return Ok(());
            }
        }
        None => {
            r.check("off-spectrum", || {
                Ok((
                    Verdict::Skipped,
                    "no tangent cone; degree spectrum not certifiable".into(),
                ))
            })?;
        }
    }
    let k = op.k.unwrap_or(1);
    let spec = r.grid(0.1, 1e2, Density::PerDecade(8));
    let radii = spec.build()?;
    let green = match AmbientConstants::for_metric(&metric) {
        Ok(c) => Some(green_radial(&metric, c)?),
        Err(_) => None,
    };
    let top = match &green {
        Some(g) => spec.hi.max(g.b_inverse(spec.hi)?) * 1.01,
        None => spec.hi,
    };
    let mode = solve_radial_mode_with(&metric, k, top, &ModeSolver::default())?;
    if mode.reach() < spec.hi {
        return r
            .check("three-circles-j", || {
                Ok((
                    Verdict::Fail,
                    format!(
                        "mode overflowed at r = {} before the top radius",
                        fmt_f64(mode.reach())
                    ),
                ))
            })
            .map(|_| ());
    }
    let j = radii
        .iter()
        .map(|&x| three_circles_j_metric(&metric, &mode, x, alpha))
        .collect::<Result<Vec<_>, _>>()?;
    r.csv(
        "three_circles_j.csv",
        &THREE_CIRCLES_HEADER,
        three_circles_rows(&j),
    )?;
    r.check("three-circles-j", || Ok(implication_outcome(&j)))?;
    match green {
        Some(g) if mode.value_at_pole() == 0.0 => {
            let i = radii
                .iter()
                .map(|&x| three_circles_i_metric(&g, &mode, x, alpha))
                .collect::<Result<Vec<_>, _>>()?;
            r.csv(
                "three_circles_i.csv",
                &THREE_CIRCLES_HEADER,
                three_circles_rows(&i),
            )?;
            r.check("three-circles-i", || Ok(implication_outcome(&i)))?;
        }
        Some(_) => r
            .check("three-circles-i", || {
                Ok((Verdict::Skipped, "mode does not vanish at the pole".into()))
            })
            .map(|_| ())?,
        None => r
            .check("three-circles-i", || {
                Ok((
                    Verdict::Skipped,
                    "b is not defined without maximal growth".into(),
                ))
            })
            .map(|_| ())?,
    }
    Ok(())
}

fn spectrum_outcome(alpha: f64, member: bool, nearest: f64) -> (Verdict, String) {
    if member {
        (
            Verdict::PreconditionFailed,
            format!("alpha = {} lies in the degree spectrum", fmt_f64(alpha)),
        )
    } else {
        (
            Verdict::Pass,
            format!(
                "alpha = {}, nearest degree {}",
                fmt_f64(alpha),
                fmt_f64(nearest)
            ),
        )
    }
}

fn spectrum(r: &mut Runner) -> Result<(), CliError> {
    let count = r.config.operation.modes.unwrap_or(8);
    let cone = match r.config.cone()? {
        Some(c) => Some(c),
        None => ConeSpace::tangent_at_infinity(&r.config.single_metric("spectrum")?, count),
    };
    let Some(cone) = cone else {
        r.check("tangent-cone", || {
            Ok((
                Verdict::PreconditionFailed,
                "the model has no tangent cone with positive volume ratio".into(),
            ))
        })?;
        return Ok(());
    };
    let degrees = degree_spectrum(&cone, count);
    let rows = cone
        .spectrum()
        .eigenspaces()
        .iter()
        .zip(&degrees.exponents)
        .enumerate()
        .map(|(k, (e, &(a, _)))| vec![k.into(), e.lambda.into(), e.multiplicity.into(), a.into()])
        .collect();
    r.csv("spectrum.csv", &SPECTRUM_HEADER, rows)?;
    if let Some(alpha) = r.config.operation.alpha {
        let m = degrees.is_in_degree_spectrum(alpha, r.tol(tolerances::SPECTRUM_MEMBERSHIP));
        r.check("off-spectrum", || {
            Ok(if m.member {
                (
                    Verdict::Fail,
                    format!(
                        "alpha = {} is in the degree spectrum (distance {})",
                        fmt_f64(alpha),
                        fmt_f64(m.distance)
                    ),
                )
            } else {
                (
                    Verdict::Pass,
                    format!(
                        "alpha = {}, nearest degree {}",
                        fmt_f64(alpha),
                        fmt_f64(m.nearest)
                    ),
                )
            })
        })?;
    }
    Ok(())
}

fn existence(r: &mut Runner) -> Result<(), CliError> {
    let metric = r.config.single_metric("existence")?;
    let op = &r.config.operation;
    let k = op.k.unwrap_or(1);
    let k0 = op.k0.unwrap_or(2.0);
    let levels = op.levels.unwrap_or(6);
    let d = match op.d {
        Some(d) => d,
        None => ConeSpace::tangent_at_infinity(&metric, 2)
            .and_then(|c| c.exponent(1))
            .map(|a| a + 0.3)
            .ok_or_else(|| {
                CliError::Config(
                    "operation.d is required when the model has no tangent cone".into(),
                )
            })?,
    };
    let options = PipelineOptions {
        convergence_tolerance: r.tol(tolerances::LEVEL_CONVERGENCE),
        solver: ModeSolver::default(),
        ..PipelineOptions::default()
    };
    let report = existence_pipeline(&metric, k, d, levels, k0, &options)?;
    r.json("existence.json", &report)?;
    let pre = report.precondition.clone();
    r.check("precondition", || {
        Ok(match (pre.off_spectrum, pre.above_first_exponent) {
            (Some(true), Some(true)) => (Verdict::Pass, pre.note),
            (Some(_), Some(_)) => (
                Verdict::PreconditionFailed,
                format!("{}; nearest degree {:?}", pre.note, pre.nearest_exponent),
            ),
            _ => (Verdict::Skipped, pre.note),
        })
    })?;
    let status = report.status.clone();
    r.check("pipeline", || {
        Ok(match status {
            PipelineStatus::Success => (
                Verdict::Pass,
                format!(
                    "limit certified: u(p) = {}, J(k0/2) = {}",
                    report.value_at_pole.map_or("n/a".into(), fmt_f64),
                    report.j_at_half_k0.map_or("n/a".into(), fmt_f64)
                ),
            ),
            PipelineStatus::VerificationFailure {
                stage,
                level,
                detail,
            } => (
                Verdict::Fail,
                format!("stage {stage:?} failed at level {level}: {detail}"),
            ),
            PipelineStatus::PreconditionFailure { reason } => (Verdict::PreconditionFailed, reason),
        })
    })?;
    if report.succeeded() {
        let top = *report.exhaustion_radii.last().expect("at least two levels");
        let limit = normalize_by_j(
            &dirichlet_mode_with(&metric, k, top, &ModeSolver::default())?,
            k0,
        )?;
        let rows = limit
            .samples
            .iter()
            .filter(|s| s.r <= top)
            .map(|s| vec![s.r.into(), s.phi.into(), s.dphi.into()])
            .collect();
        r.csv("limit.csv", &LIMIT_HEADER, rows)?;
    }
    Ok(())
}

fn classify(r: &mut Runner) -> Result<(), CliError> {
    let metric = r.config.single_metric("classify")?;
    let op = &r.config.operation;
    let ks: Vec<usize> = match (op.k, op.k_max) {
        (Some(k), None) => vec![k],
        (k, k_max) => (k.unwrap_or(0)..=k_max.unwrap_or(3)).collect(),
    };
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for &k in &ks {
        let (class, value) = match growth_classification(&metric, k)? {
            GrowthClass::Polynomial { exponent } => ("polynomial", exponent),
            GrowthClass::Exponential { rate } => ("exponential", rate),
        };
        summary.push(format!("k = {k}: {class} {}", fmt_f64(value)));
        rows.push(vec![k.into(), Cell::Text(class), value.into()]);
    }
    r.csv("classify.csv", &CLASSIFY_HEADER, rows)?;
    r.check("classification", || Ok((Verdict::Pass, summary.join("; "))))?;
    Ok(())
}
