//! The weighted inequality behind the three-circles theorems, the `J` and
//! `I` predicates at radii `(r, r/2, r/4)`, and the dyadic cascade that turns
//! one-step bounds into a polynomial growth envelope.

use serde::Serialize;

use crate::cone::{cone_i, cone_j, degree_spectrum, ConeHarmonic};
use crate::dirichlet::RadialMode;
use crate::error::{Error, Result};
use crate::frequency::{boundary_mass, GreenRadial};
use crate::profiles::SingleWarpMetric;
use crate::tolerances;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightSystem {
    weights: Vec<f64>,
    exponents: Vec<f64>,
    alpha: f64,
}

impl WeightSystem {
    pub fn new(weights: Vec<f64>, exponents: Vec<f64>, alpha: f64) -> Result<Self> {
        if weights.len() != exponents.len() || weights.is_empty() {
            return Err(Error::Domain(
                "weights and exponents must be nonempty and of equal length".into(),
            ));
        }
        if exponents[0] != 0.0 {
            return Err(Error::Domain("the first exponent must be 0".into()));
        }
        if exponents.windows(2).any(|w| !(w[1] >= w[0])) {
            return Err(Error::Domain("exponents must be ascending".into()));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::Domain(
                "weights must be finite and nonnegative".into(),
            ));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Domain(format!(
                "comparison exponent must be positive, got {alpha}"
            )));
        }
        Ok(Self {
            weights,
            exponents,
            alpha,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lemma31 {
    pub hypothesis: bool,
    pub conclusion: bool,
    /// Both sides of the conclusion agree to rounding.
    pub equality: bool,
    /// Every weight off the comparison exponent vanishes.
    pub supported_on_alpha: bool,
    pub hypothesis_sides: (f64, f64),
    pub conclusion_sides: (f64, f64),
}

/// `Σwᵢ ≤ Σ2^{2(α−αᵢ)}wᵢ` and `Σ2^{−2αᵢ}wᵢ ≤ Σ2^{2(α−2αᵢ)}wᵢ`.
pub fn lemma31(ws: &WeightSystem) -> Lemma31 {
    let a = ws.alpha;
    let (mut h_lhs, mut h_rhs, mut c_lhs, mut c_rhs) = (0.0, 0.0, 0.0, 0.0);
    for (&w, &ai) in ws.weights.iter().zip(&ws.exponents) {
        h_lhs += w;
        h_rhs += 2f64.powf(2.0 * (a - ai)) * w;
        c_lhs += 2f64.powf(-2.0 * ai) * w;
        c_rhs += 2f64.powf(2.0 * (a - 2.0 * ai)) * w;
    }
    let slack = tolerances::ALGEBRAIC * c_lhs.abs().max(c_rhs.abs());
    Lemma31 {
        hypothesis: h_lhs <= h_rhs,
        conclusion: c_lhs <= c_rhs,
        equality: (c_lhs - c_rhs).abs() <= slack,
        supported_on_alpha: ws
            .weights
            .iter()
            .zip(&ws.exponents)
            .all(|(&w, &ai)| w == 0.0 || ai == a),
        hypothesis_sides: (h_lhs, h_rhs),
        conclusion_sides: (c_lhs, c_rhs),
    }
}

/// Mean of `u²` over `B(r)` for a separable harmonic function.
pub fn j_function_numeric(metric: &SingleWarpMetric, mode: &RadialMode, r: f64) -> Result<f64> {
    if mode.metric() != metric {
        return Err(Error::Usage("mode was solved on a different metric".into()));
    }
    mode.j(r)
}

/// Values at `(r, r/2, r/4)` and the two dyadic predicates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThreeCircles {
    pub r: f64,
    pub at_r: f64,
    pub at_half: f64,
    pub at_quarter: f64,
    /// `Q(r) ≤ 2^{2α} Q(r/2)`
    pub premise: bool,
    /// `Q(r/2) ≤ 2^{2α} Q(r/4)`
    pub conclusion: bool,
}

impl ThreeCircles {
    fn evaluate(r: f64, alpha: f64, mut q: impl FnMut(f64) -> Result<f64>) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::Domain(format!(
                "exponent must be positive, got {alpha}"
            )));
        }
        let (at_r, at_half, at_quarter) = (q(r)?, q(0.5 * r)?, q(0.25 * r)?);
        let factor = 4f64.powf(alpha);
        Ok(Self {
            r,
            at_r,
            at_half,
            at_quarter,
            premise: at_r <= factor * at_half,
            conclusion: at_half <= factor * at_quarter,
        })
    }

    /// The implication `premise ⇒ conclusion`.
    pub fn implication_holds(&self) -> bool {
        !self.premise || self.conclusion
    }
}

fn require_off_cone_spectrum(h: &ConeHarmonic, alpha: f64, tolerance: f64) -> Result<()> {
    let cone = h.cone();
    degree_spectrum(cone, cone.spectrum().truncation()).require_off_spectrum(alpha, tolerance)
}

/// `J`-predicates on an exact cone.
pub fn three_circles_j_cone(
    h: &ConeHarmonic,
    r: f64,
    alpha: f64,
    tolerance: f64,
) -> Result<ThreeCircles> {
    require_off_cone_spectrum(h, alpha, tolerance)?;
    ThreeCircles::evaluate(r, alpha, |s| Ok(cone_j(h, s)))
}

/// `J`-predicates for a separable harmonic function on a warped model.
pub fn three_circles_j_metric(
    metric: &SingleWarpMetric,
    mode: &RadialMode,
    r: f64,
    alpha: f64,
) -> Result<ThreeCircles> {
    ThreeCircles::evaluate(r, alpha, |s| j_function_numeric(metric, mode, s))
}

/// `I`-predicates on an exact cone; requires `u(vertex) = 0`.
pub fn three_circles_i_cone(
    h: &ConeHarmonic,
    r: f64,
    alpha: f64,
    tolerance: f64,
) -> Result<ThreeCircles> {
    require_off_cone_spectrum(h, alpha, tolerance)?;
    if h.value_at_vertex() != 0.0 {
        return Err(Error::Precondition(
            "harmonic does not vanish at the vertex".into(),
        ));
    }
    ThreeCircles::evaluate(r, alpha, |s| Ok(cone_i(h, s)))
}

/// `I`-predicates on `b`-level sets of a maximal-growth warped model.
pub fn three_circles_i_metric(
    green: &GreenRadial,
    mode: &RadialMode,
    r: f64,
    alpha: f64,
) -> Result<ThreeCircles> {
    if mode.value_at_pole() != 0.0 {
        return Err(Error::Precondition(
            "harmonic does not vanish at the pole".into(),
        ));
    }
    ThreeCircles::evaluate(r, alpha, |s| boundary_mass(green, mode, s))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CascadeReport {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    /// `J(2^{j+1}k₀) ≤ 2^{2α} J(2^j k₀)` per step.
    pub steps: Vec<bool>,
    pub first_failing_radius: Option<f64>,
    /// `2^{2α} J(k₀)`.
    pub envelope_constant: f64,
    /// `J(r) ≤ (r/k₀)^{2α} 2^{2α} J(k₀)` per radius.
    pub envelope: Vec<bool>,
    pub passed: bool,
}

/// Checks dyadic samples `(k₀2^j, J(k₀2^j))`, `j = 0, 1, …`, in order.
pub fn cascade(samples: &[(f64, f64)], alpha: f64, k0: f64) -> Result<CascadeReport> {
    if samples.is_empty() {
        return Err(Error::Usage(
            "cascade needs at least the base sample".into(),
        ));
    }
    for (j, &(r, _)) in samples.iter().enumerate() {
        let expected = k0 * 2f64.powi(j as i32);
        if (r - expected).abs() > tolerances::ALGEBRAIC * expected {
            return Err(Error::Usage(format!(
                "missing dyadic sample at r = {expected} (found {r})"
            )));
        }
    }
    let factor = 4f64.powf(alpha);
    let slack = 1.0 + tolerances::ALGEBRAIC;
    let steps: Vec<bool> = samples
        .windows(2)
        .map(|w| w[1].1 <= factor * w[0].1 * slack)
        .collect();
    let first_failing_radius = steps.iter().position(|ok| !ok).map(|j| samples[j + 1].0);
    let base = samples[0].1;
    let envelope_constant = factor * base;
    let envelope: Vec<bool> = samples
        .iter()
        .map(|&(r, v)| v <= (r / k0).powf(2.0 * alpha) * envelope_constant * slack)
        .collect();
    let passed = first_failing_radius.is_none() && envelope.iter().all(|&e| e);
    Ok(CascadeReport {
        radii: samples.iter().map(|s| s.0).collect(),
        values: samples.iter().map(|s| s.1).collect(),
        steps,
        first_failing_radius,
        envelope_constant,
        envelope,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::ConeSpace;

    #[test]
    fn lemma31_examples() {
        let ws = WeightSystem::new(vec![1.0, 1.0], vec![0.0, 1.0], 0.5).unwrap();
        let out = lemma31(&ws);
        assert!(out.hypothesis && out.conclusion && !out.equality);
        assert_eq!(out.hypothesis_sides, (2.0, 2.5));
        assert_eq!(out.conclusion_sides, (1.25, 2.125));

        let ws = WeightSystem::new(vec![1.0, 0.0], vec![0.0, 2.0], 0.7).unwrap();
        let out = lemma31(&ws);
        assert!(out.hypothesis && out.conclusion && !out.equality);

        let ws = WeightSystem::new(vec![0.0, 3.0, 0.0], vec![0.0, 1.5, 2.0], 1.5).unwrap();
        let out = lemma31(&ws);
        assert!(out.equality && out.supported_on_alpha);
    }

    #[test]
    fn weight_system_invariants() {
        assert!(WeightSystem::new(vec![1.0], vec![0.5], 1.0).is_err());
        assert!(WeightSystem::new(vec![1.0, 1.0], vec![0.0, -1.0], 1.0).is_err());
        assert!(WeightSystem::new(vec![-1.0, 1.0], vec![0.0, 1.0], 1.0).is_err());
        assert!(WeightSystem::new(vec![1.0, 1.0], vec![0.0, 1.0], 0.0).is_err());
    }

    #[test]
    fn cone_single_mode_below_alpha() {
        let e = ConeSpace::euclidean(3, 4).unwrap();
        let h = ConeHarmonic::single(&e, 1, 1.0).unwrap();
        let t = three_circles_j_cone(&h, 5.0, 1.5, 1e-6).unwrap();
        assert!(t.premise && t.conclusion);
        assert!(matches!(
            three_circles_j_cone(&h, 5.0, 2.0, 1e-6),
            Err(Error::InSpectrum { .. })
        ));
        let one = ConeHarmonic::single(&e, 0, 1.0).unwrap();
        assert!(matches!(
            three_circles_i_cone(&one, 5.0, 1.5, 1e-6),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn cascade_examples() {
        let e = ConeSpace::euclidean(3, 4).unwrap();
        let h = ConeHarmonic::single(&e, 1, 1.0).unwrap();
        let k0 = 2.0;
        let samples: Vec<(f64, f64)> = (0..6)
            .map(|j| {
                let r = k0 * 2f64.powi(j);
                (r, cone_j(&h, r))
            })
            .collect();
        let report = cascade(&samples, 1.5, k0).unwrap();
        assert!(report.passed);
        assert!((report.envelope_constant - 8.0 * cone_j(&h, k0)).abs() < 1e-12);

        let report = cascade(&samples, 0.8, k0).unwrap();
        assert!(!report.passed);
        assert_eq!(report.first_failing_radius, Some(4.0));

        let gap = [(2.0, 1.0), (8.0, 1.0)];
        assert!(matches!(cascade(&gap, 1.0, 2.0), Err(Error::Usage(_))));
    }
}
