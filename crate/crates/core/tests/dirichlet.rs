use conelab_core::cone::{exponent_of, ConeSpace};
use conelab_core::dirichlet::*;
use conelab_core::frequency::{frequency_curve, green_radial, level_grid, AmbientConstants};
use conelab_core::profiles::{ding_constants, SingleWarpMetric, WarpProfile};
use conelab_core::Error;
use proptest::prelude::*;

fn metric(profile: WarpProfile) -> SingleWarpMetric {
    SingleWarpMetric::new(3, profile).unwrap()
}

fn asym() -> SingleWarpMetric {
    metric(WarpProfile::asym_conical(0.8).unwrap())
}

fn first_exponent(m: &SingleWarpMetric) -> f64 {
    ConeSpace::tangent_at_infinity(m, 4)
        .unwrap()
        .exponent(1)
        .unwrap()
}

#[test]
fn euclidean_linear_mode() {
    let m = metric(WarpProfile::euclidean());
    let mode = solve_radial_mode(&m, 1, 100.0).unwrap();
    for r in [1e-7, 1e-3, 0.5, 1.0, 20.0, 100.0] {
        assert!((mode.phi(r).unwrap() / r - 1.0).abs() < 1e-10, "r = {r}");
        assert!((mode.dphi(r).unwrap() - 1.0).abs() < 1e-10);
    }
    assert!(harmonicity_residual(&m, &mode).unwrap() < 1e-10);
    assert_eq!(mode.value_at_pole(), 0.0);
    assert!(matches!(mode.phi(101.0), Err(Error::Range { .. })));
}

#[test]
fn exact_cone_modes_are_powers() {
    let beta = 0.6;
    let m = metric(WarpProfile::exact_cone(beta).unwrap());
    for k in 0..5 {
        let lambda = (k * (k + 1)) as f64;
        let alpha = exponent_of(lambda / (beta * beta), 3.0).unwrap();
        let mode = solve_radial_mode(&m, k, 50.0).unwrap();
        assert!((mode.gamma() - alpha).abs() < 1e-12);
        for r in [1e-4, 0.3, 7.0, 50.0] {
            assert!(
                (mode.phi(r).unwrap() / r.powf(alpha) - 1.0).abs() < 1e-8,
                "k = {k}, r = {r}"
            );
        }
        assert!(harmonicity_residual(&m, &mode).unwrap() < 1e-6);
    }
}

#[test]
fn ding_mode_grows_exponentially() {
    let m = metric(WarpProfile::ding());
    let mode = solve_radial_mode(&m, 1, 1e3).unwrap();
    assert!(mode.overflowed());
    assert!(mode.reach() < 1e3);
    let (a, _) = ding_constants();
    let rate = 2f64.sqrt() / a;
    let (r1, r2) = (0.5 * mode.reach(), 0.9 * mode.reach());
    let slope = (mode.phi(r2).unwrap().ln() - mode.phi(r1).unwrap().ln()) / (r2 - r1);
    assert!((slope / rate - 1.0).abs() < 1e-6, "{slope} vs {rate}");
}

#[test]
fn harmonicity_residuals_and_tampering() {
    let m = asym();
    let mode = solve_radial_mode(&m, 2, 1e3).unwrap();
    assert!(harmonicity_residual(&m, &mode).unwrap() < 1e-6);

    let mut tampered = mode.clone();
    let j = tampered.samples.len() / 2;
    tampered.samples[j].dphi *= 1.0 + 1e-2;
    assert!(harmonicity_residual(&m, &tampered).unwrap() > 1e-3);

    let ding = metric(WarpProfile::ding());
    // the mollifier ramp needs a finer log grid for the five-point stencil
    let fine = ModeSolver {
        samples_per_decade: 4096,
        ..ModeSolver::default()
    };
    let mode = solve_radial_mode_with(&ding, 1, 10.0, &fine).unwrap();
    let res = harmonicity_residual(&ding, &mode).unwrap();
    assert!(res < 1e-6, "{res}");
}

#[test]
fn dirichlet_mode_examples() {
    let e = metric(WarpProfile::euclidean());
    let mode = dirichlet_mode(&e, 1, 8.0).unwrap();
    for r in [0.1, 2.0, 8.0] {
        assert!((mode.phi(r).unwrap() - r / 8.0).abs() < 1e-10 * r);
    }

    let beta = 0.75;
    let c = metric(WarpProfile::exact_cone(beta).unwrap());
    let alpha = exponent_of(6.0 / (beta * beta), 3.0).unwrap();
    let radius = 12.0;
    let mode = dirichlet_mode(&c, 2, radius).unwrap();
    for r in [0.5, 3.0, 12.0] {
        assert!((mode.phi(r).unwrap() / (r / radius).powf(alpha) - 1.0).abs() < 1e-8);
    }

    let ding = metric(WarpProfile::ding());
    let mode = dirichlet_mode(&ding, 1, 10.0).unwrap();
    assert!((mode.phi(10.0).unwrap() - 1.0).abs() < 1e-12);
    let raw = solve_radial_mode(&ding, 1, 10.0).unwrap();
    let t = raw.phi(10.0).unwrap();
    for r in [0.2, 3.0, 9.0] {
        assert!((mode.phi(r).unwrap() * t / raw.phi(r).unwrap() - 1.0).abs() < 1e-12);
    }
    assert!(matches!(
        dirichlet_mode(&ding, 1, 500.0),
        Err(Error::Overflow { .. })
    ));
}

#[test]
fn normalization_examples() {
    let e = metric(WarpProfile::euclidean());
    let mode = dirichlet_mode(&e, 1, 16.0).unwrap();
    let k0 = 2.0;
    let n = normalize_by_j(&mode, k0).unwrap();
    assert!((n.j(1.0).unwrap() - 1.0).abs() < 1e-10);
    // J of r·Y on the unit ball is 3/5, so ǔ = r √(5/3) Y
    let want = (5.0f64 / 3.0).sqrt();
    for r in [0.5, 1.0, 4.0] {
        assert!((n.phi(r).unwrap() / r - want).abs() < 1e-10);
    }
    assert!(matches!(
        normalize_by_j(&mode.scaled(0.0), k0),
        Err(Error::DegenerateNormalization { .. })
    ));
}

#[test]
fn lemma53_examples() {
    let c = metric(WarpProfile::exact_cone(0.7).unwrap());
    let alpha = first_exponent(&c);
    let mode = solve_radial_mode(&c, 1, 100.0).unwrap();
    let above = lemma53_scan(&mode, alpha + 0.05, 0.25, 64.0).unwrap();
    assert!(above.passed);
    // J(r)/J(r/2) = 2^{2α₁} exactly on a cone
    for q in &above.ratios {
        assert!((q / 4f64.powf(alpha) - 1.0).abs() < 1e-8);
    }
    let below = lemma53_scan(&mode, alpha - 0.05, 0.25, 64.0).unwrap();
    assert!(!below.passed);
    assert_eq!(below.first_failure, Some(below.radii[0]));

    let m = asym();
    let d = first_exponent(&m) + 0.3;
    let mode = solve_radial_mode(&m, 1, 1.1e3).unwrap();
    let mut threshold = None;
    for i in (0..=10).rev() {
        let radius = 2f64.powi(i);
        if lemma53_scan(&mode, d, 0.25, radius).unwrap().passed {
            threshold = Some(radius);
        } else {
            break;
        }
    }
    let threshold = threshold.expect("scan passes at large R");
    assert!(threshold <= 8.0, "{threshold}");
    assert!(lemma53_scan(&mode, d, 1.5, 10.0).is_err());
}

#[test]
fn growth_envelope_examples() {
    let beta = 0.7;
    let c = metric(WarpProfile::exact_cone(beta).unwrap());
    let alpha = first_exponent(&c);
    let k0 = 2.0;
    let mode = normalize_by_j(&dirichlet_mode(&c, 1, 64.0).unwrap(), k0).unwrap();
    let env = growth_envelope(&mode, alpha, 0.5, 32.0).unwrap();
    // ǔ = r^α Y / √J(k₀/2), J(s) = 3 s^{2α}/(2α + 3), sup |Y| = √3
    let j_half = 3.0 / (2.0 * alpha + 3.0) * (0.5 * k0).powf(2.0 * alpha);
    let want = 3f64.sqrt() / j_half.sqrt();
    assert!(
        (env.constant / want - 1.0).abs() < 1e-8,
        "{} vs {want}",
        env.constant
    );
    assert!(!env.divergent);

    let zero = mode.scaled(0.0);
    assert_eq!(
        growth_envelope(&zero, alpha, 0.5, 32.0).unwrap().constant,
        0.0
    );

    let ding = metric(WarpProfile::ding());
    let mode = solve_radial_mode(&ding, 1, 20.0).unwrap();
    let env = growth_envelope(&mode, 1.0, 0.5, 20.0).unwrap();
    assert!(env.divergent);
}

#[test]
fn pipeline_succeeds_on_euclidean() {
    let e = metric(WarpProfile::euclidean());
    let report = existence_pipeline(&e, 1, 1.5, 6, 2.0, &PipelineOptions::default()).unwrap();
    assert!(report.succeeded(), "{:?}", report.status);
    assert_eq!(
        report.exhaustion_radii,
        vec![4.0, 8.0, 16.0, 32.0, 64.0, 128.0]
    );
    assert_eq!(report.value_at_pole, Some(0.0));
    assert!((report.j_at_half_k0.unwrap() - 1.0).abs() < 1e-10);
    assert!(report.levels.iter().all(|l| l.normalizer > 0.0));
    // the limit is the linear mode r √(5/3) Y
    let drift = report.envelope_drift.unwrap();
    assert!(drift.abs() < 0.05);
}

#[test]
fn pipeline_succeeds_on_asym_conical() {
    let m = asym();
    let d = first_exponent(&m) + 0.3;
    let report = existence_pipeline(&m, 1, d, 6, 2.0, &PipelineOptions::default()).unwrap();
    assert!(report.succeeded(), "{:?}", report.status);
    assert_eq!(report.precondition.off_spectrum, Some(true));
    assert_eq!(report.precondition.above_first_exponent, Some(true));
    assert!((report.j_at_half_k0.unwrap() - 1.0).abs() < 1e-10);
    let diffs: Vec<f64> = report
        .levels
        .iter()
        .filter_map(|l| l.sup_difference)
        .collect();
    assert!(!diffs.is_empty());
    assert!(*diffs.last().unwrap() < 1e-6);
    assert!(report.envelope_drift.unwrap().abs() <= 0.05);
}

#[test]
fn pipeline_fails_on_ding() {
    let m = metric(WarpProfile::ding());
    let report = existence_pipeline(&m, 1, 1.3, 6, 2.0, &PipelineOptions::default()).unwrap();
    assert!(!report.succeeded());
    assert_eq!(report.precondition.off_spectrum, None);
    match &report.status {
        PipelineStatus::VerificationFailure { stage, .. } => {
            assert!(
                matches!(stage, Stage::Lemma53 | Stage::Envelope),
                "{stage:?}"
            );
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn pipeline_rejects_spectrum_exponent() {
    let e = metric(WarpProfile::euclidean());
    let report = existence_pipeline(&e, 1, 2.0, 4, 2.0, &PipelineOptions::default()).unwrap();
    assert!(matches!(
        report.status,
        PipelineStatus::PreconditionFailure { .. }
    ));
    let report = existence_pipeline(&e, 1, 0.5, 4, 2.0, &PipelineOptions::default()).unwrap();
    assert!(matches!(
        report.status,
        PipelineStatus::PreconditionFailure { .. }
    ));
    assert!(existence_pipeline(&e, 1, 1.5, 1, 2.0, &PipelineOptions::default()).is_err());
}

#[test]
fn classification_examples() {
    for beta in [1.0, 0.8, 0.5] {
        let c = metric(WarpProfile::exact_cone(beta).unwrap());
        let cone = ConeSpace::tangent_at_infinity(&c, 4).unwrap();
        for k in 0..4 {
            match growth_classification(&c, k).unwrap() {
                GrowthClass::Polynomial { exponent } => {
                    assert!(
                        (exponent - cone.exponent(k).unwrap()).abs() < 1e-3,
                        "β = {beta}, k = {k}"
                    )
                }
                other => panic!("{other:?}"),
            }
        }
    }
    let ding = metric(WarpProfile::ding());
    let (a, _) = ding_constants();
    match growth_classification(&ding, 1).unwrap() {
        GrowthClass::Exponential { rate } => assert!((rate / (2f64.sqrt() / a) - 1.0).abs() < 0.01),
        other => panic!("{other:?}"),
    }
    assert_eq!(
        growth_classification(&ding, 0).unwrap(),
        GrowthClass::Polynomial { exponent: 0.0 }
    );
}

#[test]
fn frequency_agrees_with_classification() {
    let m = asym();
    let green = green_radial(&m, AmbientConstants::for_metric(&m).unwrap()).unwrap();
    for k in 1..=3 {
        let mode = solve_radial_mode(&m, k, 1e3).unwrap();
        let fitted = match classify_mode(&mode).unwrap() {
            GrowthClass::Polynomial { exponent } => exponent,
            other => panic!("{other:?}"),
        };
        let top = 0.99 * green.b(1e3).unwrap();
        let curves =
            frequency_curve(&green, &mode, &level_grid(top / 10.0, top, 32).unwrap()).unwrap();
        assert!(
            (curves.freq.last().unwrap() - fitted).abs() < 1e-2,
            "k = {k}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn regular_branch_is_unique(beta in 0.4f64..1.0, k in 1usize..4, radius in 2.0f64..40.0) {
        let m = metric(WarpProfile::asym_conical(beta).unwrap());
        let small = dirichlet_mode(&m, k, radius).unwrap();
        let large = dirichlet_mode(&m, k, 2.0 * radius).unwrap();
        let t = small.phi(radius).unwrap() / large.phi(radius).unwrap();
        for j in 1..=20 {
            let r = (radius * j as f64 / 20.0).min(radius);
            let a = small.phi(r).unwrap();
            let b = t * large.phi(r).unwrap();
            prop_assert!((a / b - 1.0).abs() < 1e-8, "r = {r}: {a} vs {b}");
        }
    }

    #[test]
    fn normalization_is_idempotent_and_scale_free(t in 1e-3f64..1e3, k in 1usize..4, k0 in 0.5f64..8.0) {
        let m = asym();
        let mode = solve_radial_mode(&m, k, 20.0).unwrap();
        let once = normalize_by_j(&mode, k0).unwrap();
        let twice = normalize_by_j(&once, k0).unwrap();
        let scaled = normalize_by_j(&mode.scaled(t), k0).unwrap();
        prop_assert!((once.j(0.5 * k0).unwrap() - 1.0).abs() < 1e-10);
        for r in [0.3, 2.0, 15.0] {
            let base = once.phi(r).unwrap();
            prop_assert!((twice.phi(r).unwrap() / base - 1.0).abs() < 1e-12);
            prop_assert!((scaled.phi(r).unwrap() / base - 1.0).abs() < 1e-12);
        }
    }
}
