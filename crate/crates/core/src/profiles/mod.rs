//! Warping functions and the warped-product model metrics built from them.
//!
//! Every profile is a piecewise closed form. Pieces join at explicit radii and
//! one-sided derivatives are available in closed form, so smoothness across a
//! join is checked without finite differences.

mod metric;
mod ni;
mod volume;

pub use metric::{
    ricci_components_single, sectional_components_doubly, CurvatureSample, DoublyWarpedMetric,
    SingleRicci, SingleWarpMetric, HOPF_VOLUME_COEFFICIENT,
};
pub use ni::{check_ni_assumptions, derive_ni_parameters, NiParameters, NiReport, NI_ASSUMPTIONS};
pub use volume::{
    asymptotic_volume_ratio, growth_degree, unit_ball_volume, unit_sphere_area, volume,
    RadialDensity, VolumeRatio,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerances;

/// `3^{-1/4}`, the inflection point of the symmetric mollifier.
pub fn ding_inflection() -> f64 {
    3f64.powf(-0.25)
}

/// Constants `(a, b)` of the mollifier-based profile.
pub fn ding_constants() -> (f64, f64) {
    let q2 = 3f64.powf(-0.5);
    let a = (1.0 - q2).powi(2) / (2.0 * ding_inflection());
    let b = a * (1.0 / (1.0 - q2)).exp();
    (a, b)
}

/// One closed-form piece of a warping function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum Segment {
    /// `slope · r`
    Linear {
        slope: f64,
    },
    /// `β r + (1 − β)(1 − e^{−r})`
    AsymConical {
        slope: f64,
    },
    /// `sin(a r) / a`
    Sine {
        a: f64,
    },
    /// `a − b exp(−1 / (1 − (r + 3^{−1/4})²))`
    Mollifier {
        a: f64,
        b: f64,
    },
    Constant {
        value: f64,
    },
    /// `constant + slope·x − amplitude·e^{−rate·x}` with `x = r − start`.
    ExpLinear {
        constant: f64,
        slope: f64,
        amplitude: f64,
        rate: f64,
    },
}

impl Segment {
    /// Derivative of the given order at absolute radius `r`, for a piece starting at `start`.
    pub fn eval(&self, r: f64, start: f64, order: u8) -> f64 {
        match *self {
            Segment::Linear { slope } => match order {
                0 => slope * r,
                1 => slope,
                _ => 0.0,
            },
            Segment::AsymConical { slope } => {
                let e = (-r).exp();
                match order {
                    0 => slope * r + (1.0 - slope) * (1.0 - e),
                    1 => slope + (1.0 - slope) * e,
                    _ => -(1.0 - slope) * e,
                }
            }
            Segment::Sine { a } => match order {
                0 => (a * r).sin() / a,
                1 => (a * r).cos(),
                _ => -a * (a * r).sin(),
            },
            Segment::Mollifier { a, b } => {
                let (g, g1, g2) = mollifier(r + ding_inflection());
                match order {
                    0 => a - b * g,
                    1 => -b * g1,
                    _ => -b * g2,
                }
            }
            Segment::Constant { value } => match order {
                0 => value,
                _ => 0.0,
            },
            Segment::ExpLinear {
                constant,
                slope,
                amplitude,
                rate,
            } => {
                let x = r - start;
                let e = amplitude * (-rate * x).exp();
                match order {
                    0 => constant + slope * x - e,
                    1 => slope + rate * e,
                    _ => -rate * rate * e,
                }
            }
        }
    }
}

/// `exp(−1/(1−t²))` and its first two derivatives; zero (with all
/// derivatives) once the exponent is below the double-precision range.
fn mollifier(t: f64) -> (f64, f64, f64) {
    let w = 1.0 - t * t;
    if w <= 0.0 || 1.0 / w > 745.0 {
        return (0.0, 0.0, 0.0);
    }
    let g = (-1.0 / w).exp();
    let g1 = g * (-2.0 * t / (w * w));
    let g2 = g * (4.0 * t * t / w.powi(4) - 2.0 / (w * w) - 8.0 * t * t / w.powi(3));
    (g, g1, g2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub start: f64,
    pub segment: Segment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProfileKind {
    ExactCone { slope: f64 },
    AsymConical { slope: f64 },
    Ding { a: f64, b: f64 },
    NiF(NiParameters),
    NiH(NiParameters),
    CustomPiecewise,
}

/// Behaviour of a profile at infinity, used for closed-form integral tails.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Asymptote {
    /// `f(r) ≈ slope·r + offset` for `r ≥ from`.
    Linear { slope: f64, offset: f64, from: f64 },
    /// `f(r) ≈ value` for `r ≥ from`.
    Constant { value: f64, from: f64 },
}

impl Asymptote {
    pub fn from(&self) -> f64 {
        match *self {
            Asymptote::Linear { from, .. } | Asymptote::Constant { from, .. } => from,
        }
    }

    pub fn slope(&self) -> Option<f64> {
        match *self {
            Asymptote::Linear { slope, .. } if slope > 0.0 => Some(slope),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarpProfile {
    kind: ProfileKind,
    pieces: Vec<Piece>,
}

/// Jumps of value, first and second derivative at one join.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JoinResiduals {
    pub radius: f64,
    pub value: f64,
    pub first: f64,
    pub second: f64,
}

impl JoinResiduals {
    pub fn max_abs(&self) -> f64 {
        self.value
            .abs()
            .max(self.first.abs())
            .max(self.second.abs())
    }
}

impl WarpProfile {
    pub fn exact_cone(slope: f64) -> Result<Self> {
        check_slope(slope)?;
        Ok(Self {
            kind: ProfileKind::ExactCone { slope },
            pieces: vec![Piece {
                start: 0.0,
                segment: Segment::Linear { slope },
            }],
        })
    }

    /// The identity profile `f(r) = r` (flat space).
    pub fn euclidean() -> Self {
        Self::exact_cone(1.0).expect("unit slope is valid")
    }

    pub fn asym_conical(slope: f64) -> Result<Self> {
        check_slope(slope)?;
        Ok(Self {
            kind: ProfileKind::AsymConical { slope },
            pieces: vec![Piece {
                start: 0.0,
                segment: Segment::AsymConical { slope },
            }],
        })
    }

    pub fn ding() -> Self {
        let (a, b) = ding_constants();
        Self {
            kind: ProfileKind::Ding { a, b },
            pieces: vec![
                Piece {
                    start: 0.0,
                    segment: Segment::Mollifier { a, b },
                },
                Piece {
                    start: 1.0 - ding_inflection(),
                    segment: Segment::Constant { value: a },
                },
            ],
        }
    }

    pub fn ni_f(p: &NiParameters) -> Self {
        Self {
            kind: ProfileKind::NiF(*p),
            pieces: vec![
                Piece {
                    start: 0.0,
                    segment: Segment::Sine { a: p.a },
                },
                Piece {
                    start: p.delta,
                    segment: Segment::ExpLinear {
                        constant: p.c1,
                        slope: 0.0,
                        amplitude: p.c2,
                        rate: p.c3,
                    },
                },
            ],
        }
    }

    pub fn ni_h(p: &NiParameters) -> Self {
        Self {
            kind: ProfileKind::NiH(*p),
            pieces: vec![
                Piece {
                    start: 0.0,
                    segment: Segment::Sine { a: p.a },
                },
                Piece {
                    start: p.delta,
                    segment: Segment::ExpLinear {
                        constant: p.c0,
                        slope: p.c4,
                        amplitude: p.c5,
                        rate: p.c6,
                    },
                },
            ],
        }
    }

    /// A user-assembled piecewise profile. Pieces must start at 0 and be
    /// strictly increasing in their start radii.
    pub fn custom(pieces: Vec<Piece>) -> Result<Self> {
        if pieces.is_empty() || pieces[0].start != 0.0 {
            return Err(Error::Domain("first piece must start at r = 0".into()));
        }
        if pieces.windows(2).any(|w| w[1].start <= w[0].start) {
            return Err(Error::Domain(
                "piece start radii must increase strictly".into(),
            ));
        }
        Ok(Self {
            kind: ProfileKind::CustomPiecewise,
            pieces,
        })
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            ProfileKind::ExactCone { .. } => "exact-cone",
            ProfileKind::AsymConical { .. } => "asym-conical",
            ProfileKind::Ding { .. } => "ding",
            ProfileKind::NiF(_) => "ni-f",
            ProfileKind::NiH(_) => "ni-h",
            ProfileKind::CustomPiecewise => "custom-piecewise",
        }
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Radii where the piecewise definition changes.
    pub fn joins(&self) -> Vec<f64> {
        self.pieces.iter().skip(1).map(|p| p.start).collect()
    }

    fn piece_at(&self, r: f64) -> &Piece {
        let idx = self.pieces.partition_point(|p| p.start <= r);
        &self.pieces[idx.saturating_sub(1)]
    }

    /// `f^{(order)}(r)` for `order ∈ {0, 1, 2}`.
    pub fn eval(&self, r: f64, order: u8) -> Result<f64> {
        if r < 0.0 || r.is_nan() {
            return Err(Error::Domain(format!(
                "radius must be nonnegative, got {r}"
            )));
        }
        if order > 2 {
            return Err(Error::Domain(format!(
                "derivative order {order} not supported"
            )));
        }
        Ok(self.value(r, order))
    }

    /// Unchecked evaluation for hot loops; callers guarantee `r ≥ 0`.
    #[inline]
    pub fn value(&self, r: f64, order: u8) -> f64 {
        let p = self.piece_at(r);
        p.segment.eval(r, p.start, order)
    }

    /// Closed-form one-sided jumps at every join.
    pub fn c2_gluing_residuals(&self) -> Vec<JoinResiduals> {
        self.pieces
            .windows(2)
            .map(|w| {
                let (left, right) = (&w[0], &w[1]);
                let r = right.start;
                let jump =
                    |k| right.segment.eval(r, right.start, k) - left.segment.eval(r, left.start, k);
                JoinResiduals {
                    radius: r,
                    value: jump(0),
                    first: jump(1),
                    second: jump(2),
                }
            })
            .collect()
    }

    pub fn asymptote(&self) -> Option<Asymptote> {
        let tol = tolerances::ASYMPTOTE_SPLIT;
        let last = self.pieces.last()?;
        let start = last.start;
        match last.segment {
            Segment::Linear { slope } => Some(Asymptote::Linear {
                slope,
                offset: 0.0,
                from: start,
            }),
            Segment::AsymConical { slope } => {
                let from = ((1.0 - slope) / tol).ln().max(0.0).max(start);
                Some(Asymptote::Linear {
                    slope,
                    offset: 1.0 - slope,
                    from,
                })
            }
            Segment::Constant { value } => Some(Asymptote::Constant { value, from: start }),
            Segment::ExpLinear {
                constant,
                slope,
                amplitude,
                rate,
            } => {
                let from = start + (amplitude.abs() / tol).ln().max(0.0) / rate;
                if slope > 0.0 {
                    Some(Asymptote::Linear {
                        slope,
                        offset: constant - slope * start,
                        from,
                    })
                } else {
                    Some(Asymptote::Constant {
                        value: constant,
                        from,
                    })
                }
            }
            Segment::Sine { .. } | Segment::Mollifier { .. } => None,
        }
    }

    /// Pole smoothness `f(0) = 0`, `f'(0) = 1`, positivity on a sample grid
    /// and closed-form C² joins. Exact cones are exempt from `f'(0) = 1`.
    pub fn check_invariants(&self) -> Result<()> {
        let f0 = self.value(0.0, 0);
        if f0.abs() > tolerances::ALGEBRAIC {
            return Err(Error::Domain(format!("f(0) = {f0}, expected 0")));
        }
        let f1 = self.value(0.0, 1);
        let exempt = matches!(self.kind, ProfileKind::ExactCone { .. });
        if !exempt && (f1 - 1.0).abs() > tolerances::ALGEBRAIC {
            return Err(Error::Domain(format!("f'(0) = {f1}, expected 1")));
        }
        let reach = self.joins().last().copied().unwrap_or(1.0).max(1.0) * 100.0;
        let mut r = 1e-6;
        while r < reach {
            if self.value(r, 0) <= 0.0 {
                return Err(Error::Domain(format!("f({r}) is not positive")));
            }
            r *= 1.05;
        }
        for j in self.c2_gluing_residuals() {
            if j.max_abs() > 1e-10 {
                return Err(Error::Domain(format!(
                    "profile is not C² at r = {}: {j:?}",
                    j.radius
                )));
            }
        }
        Ok(())
    }
}

fn check_slope(slope: f64) -> Result<()> {
    if slope > 0.0 && slope <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "slope must lie in (0, 1], got {slope}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ni_f_at_join_is_three() {
        let p = NiParameters::reference();
        let f = WarpProfile::ni_f(&p);
        let v = f.eval(p.delta, 0).unwrap();
        assert!((v - 3.0).abs() < 1e-12, "{v}");
        let left = Segment::Sine { a: p.a }.eval(p.delta, 0.0, 0);
        assert!((left - 3.0).abs() < 1e-12);
    }

    #[test]
    fn identity_profile_slope() {
        let f = WarpProfile::exact_cone(1.0).unwrap();
        assert_eq!(f.eval(2.0, 1).unwrap(), 1.0);
        assert_eq!(f.eval(2.0, 0).unwrap(), 2.0);
    }

    #[test]
    fn ding_plateau_value() {
        let f = WarpProfile::ding();
        let a = (1.0 - 3f64.powf(-0.5)).powi(2) / (2.0 * 3f64.powf(-0.25));
        assert_eq!(f.eval(2.0, 0).unwrap(), a);
        assert!((a - 0.117_546_99).abs() < 1e-8);
    }

    #[test]
    fn negative_radius_rejected() {
        let f = WarpProfile::ding();
        assert!(matches!(f.eval(-0.1, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn pole_conditions() {
        for f in [
            WarpProfile::ding(),
            WarpProfile::asym_conical(0.8).unwrap(),
            WarpProfile::ni_f(&NiParameters::reference()),
            WarpProfile::ni_h(&NiParameters::reference()),
        ] {
            f.check_invariants().unwrap();
            assert!(f.value(0.0, 0).abs() < 1e-15, "{}", f.kind_name());
            assert!((f.value(0.0, 1) - 1.0).abs() < 1e-12, "{}", f.kind_name());
        }
    }

    #[test]
    fn ding_pole_is_flat_to_second_order() {
        let f = WarpProfile::ding();
        assert!(f.value(0.0, 2).abs() < 1e-12);
    }

    #[test]
    fn gluing_closed_forms() {
        let p = NiParameters::reference();
        for f in [WarpProfile::ni_f(&p), WarpProfile::ni_h(&p)] {
            for j in f.c2_gluing_residuals() {
                assert!(j.max_abs() < 1e-12, "{}: {j:?}", f.kind_name());
            }
        }
        let ding = WarpProfile::ding().c2_gluing_residuals();
        assert_eq!(ding.len(), 1);
        assert!(ding[0].max_abs() < 1e-12);
    }

    #[test]
    fn ding_join_taylor_oracle() {
        // Left piece approaches the plateau flatly: the mollifier and its
        // derivatives decay like exp(-1/(2ε)) as the join is approached.
        let join = 1.0 - ding_inflection();
        let (a, b) = ding_constants();
        let seg = Segment::Mollifier { a, b };
        for eps in [1e-2, 5e-3, 1e-3] {
            let r = join - eps;
            assert!((seg.eval(r, 0.0, 0) - a).abs() < 1e-12);
            assert!(seg.eval(r, 0.0, 1).abs() < 1e-10);
            assert!(seg.eval(r, 0.0, 2).abs() < 1e-10);
        }
    }

    #[test]
    fn custom_rejects_bad_starts() {
        assert!(WarpProfile::custom(vec![]).is_err());
        let s = Segment::Linear { slope: 1.0 };
        assert!(WarpProfile::custom(vec![Piece {
            start: 1.0,
            segment: s
        }])
        .is_err());
        assert!(WarpProfile::custom(vec![
            Piece {
                start: 0.0,
                segment: s
            },
            Piece {
                start: 0.0,
                segment: s
            },
        ])
        .is_err());
    }

    #[test]
    fn custom_reproduces_ni_h() {
        let p = NiParameters::reference();
        let custom = WarpProfile::custom(WarpProfile::ni_h(&p).pieces().to_vec()).unwrap();
        for r in [0.5, p.delta, 10.0] {
            assert_eq!(custom.value(r, 0), WarpProfile::ni_h(&p).value(r, 0));
        }
        assert!(matches!(custom.asymptote(), Some(Asymptote::Linear { .. })));
    }

    #[test]
    fn asymptote_declarations() {
        let asym = WarpProfile::asym_conical(0.8).unwrap();
        match asym.asymptote().unwrap() {
            Asymptote::Linear {
                slope,
                offset,
                from,
            } => {
                assert_eq!(slope, 0.8);
                assert!((offset - 0.2).abs() < 1e-15);
                assert!(0.2 * (-from).exp() <= 1.01e-16);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            WarpProfile::ding().asymptote(),
            Some(Asymptote::Constant { .. })
        ));
    }
}
