//! Metric cones `C(X)` with conic measures of power `κ`.
//!
//! A cone harmonic is a finite sum `Σ cᵢ r^{αᵢ} φᵢ(x)` over cross-section
//! eigenfunctions orthonormal in `L²(ν₋₁)`, so every radial functional has a
//! closed form in the coefficients.

mod zonal;

pub use zonal::ZonalHarmonic;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profiles::{unit_sphere_area, Asymptote, SingleWarpMetric};
use crate::tolerances;

/// Nonnegative root `α` of `α(α + κ − 2) = λ`.
pub fn exponent_of(lambda: f64, kappa: f64) -> Result<f64> {
    if lambda < 0.0 || lambda.is_nan() {
        return Err(Error::Domain(format!(
            "eigenvalue must be nonnegative, got {lambda}"
        )));
    }
    check_kappa(kappa)?;
    let p = kappa - 2.0;
    // Rationalized form avoids cancellation when λ ≪ p².
    let disc = (p * p + 4.0 * lambda).sqrt();
    if p > 0.0 {
        Ok(2.0 * lambda / (p + disc))
    } else {
        Ok(0.5 * disc)
    }
}

/// Inverse of [`exponent_of`].
pub fn eigenvalue_of(alpha: f64, kappa: f64) -> Result<f64> {
    if alpha < 0.0 || alpha.is_nan() {
        return Err(Error::Domain(format!(
            "exponent must be nonnegative, got {alpha}"
        )));
    }
    check_kappa(kappa)?;
    Ok(alpha * (alpha + kappa - 2.0))
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa >= 2.0 && kappa.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "conic power must satisfy κ ≥ 2, got {kappa}"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenspace {
    pub lambda: f64,
    pub multiplicity: usize,
}

/// Cross-section geometry, when it is known well enough to evaluate
/// eigenfunctions pointwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum CrossSection {
    /// Round `S^dim` of the given radius; eigenspace `k` has degree `k`.
    Sphere {
        dim: usize,
        radius: f64,
    },
    Abstract,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSectionSpectrum {
    eigenspaces: Vec<Eigenspace>,
    mass: f64,
    geometry: CrossSection,
}

impl CrossSectionSpectrum {
    pub fn new(eigenspaces: Vec<Eigenspace>, mass: f64) -> Result<Self> {
        Self::with_geometry(eigenspaces, mass, CrossSection::Abstract)
    }

    fn with_geometry(
        eigenspaces: Vec<Eigenspace>,
        mass: f64,
        geometry: CrossSection,
    ) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::Domain(format!(
                "cross-section mass must be positive, got {mass}"
            )));
        }
        match eigenspaces.first() {
            Some(e) if e.lambda == 0.0 && e.multiplicity == 1 => {}
            _ => {
                return Err(Error::Domain(
                    "spectrum must start with λ = 0 of multiplicity 1".into(),
                ))
            }
        }
        if eigenspaces
            .iter()
            .any(|e| e.multiplicity == 0 || !(e.lambda >= 0.0))
        {
            return Err(Error::Domain(
                "eigenvalues must be nonnegative with positive multiplicity".into(),
            ));
        }
        if eigenspaces.windows(2).any(|w| w[1].lambda <= w[0].lambda) {
            return Err(Error::Domain(
                "eigenvalues must be listed in strictly ascending order".into(),
            ));
        }
        Ok(Self {
            eigenspaces,
            mass,
            geometry,
        })
    }

    pub fn eigenspaces(&self) -> &[Eigenspace] {
        &self.eigenspaces
    }

    /// `ν₋₁(X)`.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn truncation(&self) -> usize {
        self.eigenspaces.len()
    }

    pub fn geometry(&self) -> CrossSection {
        self.geometry
    }
}

/// Dimension of the space of degree-`k` spherical harmonics on `S^m`.
pub fn spherical_harmonic_multiplicity(m: usize, k: usize) -> usize {
    binomial(k + m, m) - if k >= 2 { binomial(k + m - 2, m) } else { 0 }
}

fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// First `count` eigenspaces of the Laplacian on a round `S^m` of radius `β`.
pub fn sphere_spectrum(m: usize, radius: f64, count: usize) -> Result<CrossSectionSpectrum> {
    if m == 0 {
        return Err(Error::Domain("sphere dimension must be at least 1".into()));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Domain(format!(
            "sphere radius must be positive, got {radius}"
        )));
    }
    if count == 0 {
        return Err(Error::Domain(
            "spectrum truncation must keep at least one eigenvalue".into(),
        ));
    }
    let eigenspaces = (0..count)
        .map(|k| Eigenspace {
            lambda: (k * (k + m - 1)) as f64 / (radius * radius),
            multiplicity: spherical_harmonic_multiplicity(m, k),
        })
        .collect();
    let mass = radius.powi(m as i32) * unit_sphere_area(m);
    CrossSectionSpectrum::with_geometry(eigenspaces, mass, CrossSection::Sphere { dim: m, radius })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeSpace {
    kappa: f64,
    spectrum: CrossSectionSpectrum,
}

impl ConeSpace {
    pub fn new(kappa: f64, spectrum: CrossSectionSpectrum) -> Result<Self> {
        check_kappa(kappa)?;
        Ok(Self { kappa, spectrum })
    }

    /// `ℝⁿ` as the cone over the unit `S^{n−1}`.
    pub fn euclidean(n: usize, count: usize) -> Result<Self> {
        Self::over_sphere(n, 1.0, count)
    }

    /// Cone of power `n` over a round `S^{n−1}` of radius `β`.
    pub fn over_sphere(n: usize, radius: f64, count: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!(
                "cone dimension must be at least 2, got {n}"
            )));
        }
        Self::new(n as f64, sphere_spectrum(n - 1, radius, count)?)
    }

    /// Tangent cone at infinity of a rotationally symmetric metric whose
    /// profile is asymptotically linear; `None` for non-maximal growth.
    pub fn tangent_at_infinity(metric: &SingleWarpMetric, count: usize) -> Option<Self> {
        match metric.profile().asymptote()? {
            Asymptote::Linear { slope, .. } if slope > 0.0 => {
                Self::over_sphere(metric.dimension(), slope, count).ok()
            }
            _ => None,
        }
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn spectrum(&self) -> &CrossSectionSpectrum {
        &self.spectrum
    }

    pub fn exponent(&self, mode: usize) -> Option<f64> {
        let e = self.spectrum.eigenspaces.get(mode)?;
        exponent_of(e.lambda, self.kappa).ok()
    }

    /// `ν(B_r) = ν₋₁(X) r^κ / κ`.
    pub fn conic_ball_measure(&self, r: f64) -> Result<f64> {
        if r < 0.0 || r.is_nan() {
            return Err(Error::Domain(format!(
                "radius must be nonnegative, got {r}"
            )));
        }
        Ok(self.spectrum.mass * r.powf(self.kappa) / self.kappa)
    }
}

pub fn conic_ball_measure(cone: &ConeSpace, r: f64) -> Result<f64> {
    cone.conic_ball_measure(r)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeSpectrum {
    /// `(αᵢ, multiplicity)` in ascending order.
    pub exponents: Vec<(f64, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Membership {
    pub member: bool,
    pub nearest: f64,
    pub distance: f64,
}

impl DegreeSpectrum {
    pub fn is_in_degree_spectrum(&self, alpha: f64, tolerance: f64) -> Membership {
        let (nearest, distance) = self
            .exponents
            .iter()
            .map(|&(a, _)| (a, (a - alpha).abs()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap_or((f64::NAN, f64::INFINITY));
        Membership {
            member: distance <= tolerance,
            nearest,
            distance,
        }
    }

    /// Smallest nonzero exponent.
    pub fn first_nonzero(&self) -> Option<f64> {
        self.exponents.iter().map(|e| e.0).find(|&a| a > 0.0)
    }

    /// Errors with [`Error::InSpectrum`] when `alpha` is a member.
    pub fn require_off_spectrum(&self, alpha: f64, tolerance: f64) -> Result<()> {
        let m = self.is_in_degree_spectrum(alpha, tolerance);
        if m.member {
            Err(Error::InSpectrum {
                alpha,
                nearest: m.nearest,
                distance: m.distance,
            })
        } else {
            Ok(())
        }
    }
}

/// Degree spectrum from the first `count` eigenspaces.
pub fn degree_spectrum(cone: &ConeSpace, count: usize) -> DegreeSpectrum {
    let exponents = cone
        .spectrum
        .eigenspaces
        .iter()
        .take(count)
        .map(|e| {
            let a = exponent_of(e.lambda, cone.kappa).expect("spectrum invariants checked");
            (a, e.multiplicity)
        })
        .collect();
    DegreeSpectrum { exponents }
}

/// Finite combination `Σ cᵢ r^{αᵢ} φᵢ` of orthonormal eigenfunctions; terms
/// sharing an eigenspace stand for distinct eigenfunctions in it. On spheres
/// a lone term in an eigenspace is the zonal one.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeHarmonic<'a> {
    cone: &'a ConeSpace,
    terms: Vec<(f64, usize)>,
}

impl<'a> ConeHarmonic<'a> {
    /// `terms` holds `(coefficient, eigenspace index)` pairs.
    pub fn new(cone: &'a ConeSpace, terms: Vec<(f64, usize)>) -> Result<Self> {
        let count = cone.spectrum.truncation();
        if let Some(&(_, bad)) = terms.iter().find(|t| t.1 >= count) {
            return Err(Error::Domain(format!(
                "mode {bad} outside truncated spectrum of {count}"
            )));
        }
        if terms.iter().any(|t| !t.0.is_finite()) {
            return Err(Error::Domain("coefficients must be finite".into()));
        }
        for (i, e) in cone.spectrum.eigenspaces.iter().enumerate() {
            let used = terms.iter().filter(|t| t.1 == i).count();
            if used > e.multiplicity {
                return Err(Error::Domain(format!(
                    "{used} terms in eigenspace {i} of multiplicity {}",
                    e.multiplicity
                )));
            }
        }
        Ok(Self { cone, terms })
    }

    pub fn single(cone: &'a ConeSpace, mode: usize, coefficient: f64) -> Result<Self> {
        Self::new(cone, vec![(coefficient, mode)])
    }

    pub fn cone(&self) -> &ConeSpace {
        self.cone
    }

    pub fn terms(&self) -> &[(f64, usize)] {
        &self.terms
    }

    /// `(cᵢ, αᵢ, λᵢ)` per term.
    fn expanded(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.terms.iter().map(|&(c, i)| {
            let lambda = self.cone.spectrum.eigenspaces[i].lambda;
            (
                c,
                exponent_of(lambda, self.cone.kappa).expect("valid spectrum"),
                lambda,
            )
        })
    }

    pub fn exponents(&self) -> Vec<f64> {
        self.expanded().map(|t| t.1).collect()
    }

    /// Value at the vertex: the coefficient mass on the constant mode.
    pub fn value_at_vertex(&self) -> f64 {
        let phi0 = self.cone.spectrum.mass.sqrt().recip();
        self.expanded()
            .filter(|t| t.1 == 0.0)
            .map(|t| t.0 * phi0)
            .sum()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.0 == 0.0)
    }

    /// `u(r, θ)` on a sphere cross-section, `θ` the polar angle from the axis.
    pub fn eval_axial(&self, r: f64, theta: f64) -> Result<f64> {
        Ok(self.axial()?.eval(r, theta))
    }

    fn axial(&self) -> Result<Axial> {
        let CrossSection::Sphere { dim, .. } = self.cone.spectrum.geometry else {
            return Err(Error::Precondition(
                "pointwise evaluation needs a round sphere cross-section".into(),
            ));
        };
        let mut modes: Vec<usize> = self.terms.iter().map(|t| t.1).collect();
        modes.sort_unstable();
        if modes.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Precondition(
                "pointwise evaluation uses the zonal eigenfunction, so each eigenspace may appear once".into(),
            ));
        }
        let scale = self.cone.spectrum.mass.sqrt().recip();
        let terms = self
            .expanded()
            .zip(&self.terms)
            .map(|((c, a, _), &(_, k))| (c * scale, a, ZonalHarmonic::new(dim, k)))
            .collect();
        Ok(Axial { terms })
    }
}

struct Axial {
    terms: Vec<(f64, f64, ZonalHarmonic)>,
}

impl Axial {
    fn eval(&self, r: f64, theta: f64) -> f64 {
        self.terms
            .iter()
            .map(|(c, a, y)| c * r.powf(*a) * y.value(theta))
            .sum()
    }
}

/// Relative residual of `∂²ᵣ + ((κ−1)/r)∂ᵣ − λ/r²` applied termwise to the
/// radial factors, by centered differences with step `r·10⁻⁴`.
pub fn cone_laplacian_residual(h: &ConeHarmonic, r: f64) -> Result<f64> {
    if r == 0.0 {
        return Err(Error::Pole(0.0));
    }
    if !(r > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    let kappa = h.cone.kappa;
    let step = r * 1e-4;
    let mut residual = 0.0;
    let mut scale = 0.0;
    for (c, a, lambda) in h.expanded() {
        let g = |s: f64| c * s.powf(a);
        let (gm, g0, gp) = (g(r - step), g(r), g(r + step));
        let second = (gp - 2.0 * g0 + gm) / (step * step);
        let first = (gp - gm) / (2.0 * step);
        let potential = lambda * g0 / (r * r);
        residual += second + (kappa - 1.0) / r * first - potential;
        scale += second.abs() + ((kappa - 1.0) / r * first).abs() + potential.abs();
    }
    Ok(if scale > 0.0 {
        residual.abs() / scale
    } else {
        residual.abs()
    })
}

/// `J(r) = (κ/ν₋₁) Σ cᵢ² r^{2αᵢ}/(2αᵢ + κ)`.
pub fn cone_j(h: &ConeHarmonic, r: f64) -> f64 {
    let kappa = h.cone.kappa;
    kappa / h.cone.spectrum.mass
        * h.expanded()
            .map(|(c, a, _)| c * c * r.powf(2.0 * a) / (2.0 * a + kappa))
            .sum::<f64>()
}

/// `I(r) = Σ cᵢ² r^{2αᵢ}`.
pub fn cone_i(h: &ConeHarmonic, r: f64) -> f64 {
    h.expanded().map(|(c, a, _)| c * c * r.powf(2.0 * a)).sum()
}

/// `D(r) = Σ cᵢ² αᵢ r^{2αᵢ}`.
pub fn cone_d(h: &ConeHarmonic, r: f64) -> f64 {
    h.expanded()
        .map(|(c, a, _)| c * c * a * r.powf(2.0 * a))
        .sum()
}

pub fn cone_frequency(h: &ConeHarmonic, r: f64) -> Result<f64> {
    let i = cone_i(h, r);
    if i > 0.0 {
        Ok(cone_d(h, r) / i)
    } else {
        Err(Error::UndefinedFrequency(r))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HadamardCheck {
    pub m_quarter: f64,
    pub m_half: f64,
    pub m_full: f64,
    pub holds: bool,
    pub equality: bool,
}

/// `M(r/2)/M(r/4) ≤ M(r)/M(r/2)` with `M(s)` the maximum of `|u(s, ·)|`
/// over a dense polar-angle sample of the cross-section sphere.
pub fn hadamard_check(h: &ConeHarmonic, r: f64) -> Result<HadamardCheck> {
    const SAMPLES: usize = 4097;
    let axial = h.axial()?;
    let sup = |s: f64| {
        (0..SAMPLES)
            .map(|j| std::f64::consts::PI * j as f64 / (SAMPLES - 1) as f64)
            .fold(0.0f64, |best, theta| best.max(axial.eval(s, theta).abs()))
    };
    let (m_quarter, m_half, m_full) = (sup(0.25 * r), sup(0.5 * r), sup(r));
    let lhs = m_half * m_half;
    let rhs = m_full * m_quarter;
    let slack = tolerances::ALGEBRAIC * rhs.abs().max(lhs.abs());
    Ok(HadamardCheck {
        m_quarter,
        m_half,
        m_full,
        holds: lhs <= rhs + slack,
        equality: (lhs - rhs).abs() <= slack,
    })
}
