//! Parameters of the doubly-warped positive-curvature model and the eight
//! algebraic constraints they must satisfy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerances;

/// Constants of the piecewise profiles `f`, `h`:
/// `sin(ar)/a` up to `δ`, then `c₁ − c₂e^{−c₃x}` and `c₀ + c₄x − c₅e^{−c₆x}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NiParameters {
    pub a: f64,
    pub delta: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub c6: f64,
}

/// Labels of the eight constraints in their natural order.
pub const NI_ASSUMPTIONS: [&str; 8] = [
    "a = sqrt(c2 c3^2 / (c1 - c2))",
    "c1 = c2 + (1 - c2^2 c3^2) / (c2 c3^2)",
    "delta = asin(a (c1 - c2)) / a",
    "c0 - c5 = c1 - c2",
    "c5 c6^2 = c2 c3^2",
    "c4 + c5 c6 = c2 c3",
    "c6 > c3",
    "c0 >= 3 c2 + c5",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NiReport {
    /// `lhs − rhs` for each constraint.
    pub residuals: [f64; 8],
    pub holds: [bool; 8],
}

impl NiReport {
    pub fn all_hold(&self) -> bool {
        self.holds.iter().all(|&h| h)
    }

    pub fn failing(&self) -> Vec<usize> {
        (0..8).filter(|&i| !self.holds[i]).collect()
    }
}

impl NiParameters {
    /// The explicit admissible choice `a = 1/(2√3)`, `δ = 2π/√3`, `c₀ = 13/4`,
    /// `c₁ = 4`, `c₂ = 1`, `c₃ = 1/2`, `c₄ = c₅ = 1/4`, `c₆ = 1`.
    pub fn reference() -> Self {
        let s3 = 3f64.sqrt();
        Self {
            a: 1.0 / (2.0 * s3),
            delta: 2.0 * std::f64::consts::PI / s3,
            c0: 13.0 / 4.0,
            c1: 4.0,
            c2: 1.0,
            c3: 0.5,
            c4: 0.25,
            c5: 0.25,
            c6: 1.0,
        }
    }

    pub fn as_array(&self) -> [f64; 9] {
        [
            self.a, self.delta, self.c0, self.c1, self.c2, self.c3, self.c4, self.c5, self.c6,
        ]
    }

    /// Outer piece of `f` in the local variable `x = r − δ`.
    pub fn outer_f(&self, x: f64, order: u8) -> f64 {
        let e = self.c2 * (-self.c3 * x).exp();
        match order {
            0 => self.c1 - e,
            1 => self.c3 * e,
            _ => -self.c3 * self.c3 * e,
        }
    }

    /// Outer piece of `h` in the local variable `x = r − δ`.
    pub fn outer_h(&self, x: f64, order: u8) -> f64 {
        let e = self.c5 * (-self.c6 * x).exp();
        match order {
            0 => self.c0 + self.c4 * x - e,
            1 => self.c4 + self.c6 * e,
            _ => -self.c6 * self.c6 * e,
        }
    }

    /// `φ(x) = f³ − h³ f′ h′` on the outer pieces; positive for admissible parameters.
    pub fn mixed_curvature_numerator(&self, x: f64) -> f64 {
        let (f, f1) = (self.outer_f(x, 0), self.outer_f(x, 1));
        let (h, h1) = (self.outer_h(x, 0), self.outer_h(x, 1));
        f.powi(3) - h.powi(3) * f1 * h1
    }
}

pub fn check_ni_assumptions(p: &NiParameters) -> Result<NiReport> {
    if let Some(v) = p.as_array().iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::Domain(format!(
            "all parameters must be positive, found {v}"
        )));
    }
    let c23 = p.c2 * p.c3 * p.c3;
    let residuals = [
        p.a - (c23 / (p.c1 - p.c2)).sqrt(),
        p.c1 - (p.c2 + (1.0 - p.c2 * p.c2 * p.c3 * p.c3) / c23),
        p.delta - (p.a * (p.c1 - p.c2)).asin() / p.a,
        (p.c0 - p.c5) - (p.c1 - p.c2),
        p.c5 * p.c6 * p.c6 - c23,
        (p.c4 + p.c5 * p.c6) - p.c2 * p.c3,
        p.c6 - p.c3,
        p.c0 - (3.0 * p.c2 + p.c5),
    ];
    let tol = tolerances::ALGEBRAIC;
    let mut holds = [false; 8];
    for i in 0..6 {
        holds[i] = residuals[i].abs() <= tol;
    }
    holds[6] = residuals[6] > 0.0;
    holds[7] = residuals[7] >= -tol;
    Ok(NiReport { residuals, holds })
}

/// Solves the constraints in dependency order from the free triple
/// `(c₂, c₃, c₆)`: `c₁`, `a`, `δ`, `c₅`, `c₄`, `c₀`. The result satisfies the
/// first seven constraints; the last one is only reported.
pub fn derive_ni_parameters(c2: f64, c3: f64, c6: f64) -> Result<(NiParameters, NiReport)> {
    for (name, v) in [("c2", c2), ("c3", c3), ("c6", c6)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Domain(format!("{name} must be positive, got {v}")));
        }
    }
    if c6 <= c3 {
        return Err(Error::ConstraintViolation {
            assumption: NI_ASSUMPTIONS[6],
            detail: format!("c6 = {c6} is not greater than c3 = {c3}"),
        });
    }
    if c2 * c3 >= 1.0 {
        return Err(Error::ConstraintViolation {
            assumption: NI_ASSUMPTIONS[1],
            detail: format!(
                "c1 - c2 = (1 - (c2 c3)^2)/(c2 c3^2) is not positive for c2 c3 = {}",
                c2 * c3
            ),
        });
    }
    let c23 = c2 * c3 * c3;
    let c1 = c2 + (1.0 - c2 * c2 * c3 * c3) / c23;
    let a = (c23 / (c1 - c2)).sqrt();
    let delta = (a * (c1 - c2)).asin() / a;
    let c5 = c23 / (c6 * c6);
    let c4 = c2 * c3 - c5 * c6;
    let c0 = c1 - c2 + c5;
    let params = NiParameters {
        a,
        delta,
        c0,
        c1,
        c2,
        c3,
        c4,
        c5,
        c6,
    };
    let report = check_ni_assumptions(&params)?;
    Ok((params, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_set_satisfies_all() {
        let r = check_ni_assumptions(&NiParameters::reference()).unwrap();
        assert!(r.all_hold(), "{r:?}");
        for i in 0..6 {
            assert!(r.residuals[i].abs() < 1e-12, "{i}: {}", r.residuals[i]);
        }
        // boundary case: holds with equality
        assert_eq!(r.residuals[7], 0.0);
    }

    #[test]
    fn strict_inequality_boundary() {
        let mut p = NiParameters::reference();
        p.c6 = 0.5;
        let r = check_ni_assumptions(&p).unwrap();
        assert!(!r.holds[6]);
        assert_eq!(r.residuals[6], 0.0);
    }

    #[test]
    fn lowered_c0_breaks_two() {
        let mut p = NiParameters::reference();
        p.c0 = 3.0;
        let r = check_ni_assumptions(&p).unwrap();
        assert_eq!(r.failing(), vec![3, 7]);
        assert!((r.residuals[3] + 0.25).abs() < 1e-15);
        assert!((r.residuals[7] + 0.25).abs() < 1e-15);
    }

    #[test]
    fn nonpositive_rejected() {
        let mut p = NiParameters::reference();
        p.c4 = 0.0;
        assert!(matches!(check_ni_assumptions(&p), Err(Error::Domain(_))));
    }

    #[test]
    fn derivation_recovers_reference() {
        let (p, report) = derive_ni_parameters(1.0, 0.5, 1.0).unwrap();
        let want = NiParameters::reference();
        for (x, y) in p.as_array().iter().zip(want.as_array()) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
        assert!(report.all_hold());
    }

    #[test]
    fn derivation_rejects_equal_rates() {
        match derive_ni_parameters(1.0, 0.5, 0.5) {
            Err(Error::ConstraintViolation { assumption, .. }) => {
                assert_eq!(assumption, NI_ASSUMPTIONS[6])
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn derivation_other_triple() {
        let (p, report) = derive_ni_parameters(1.0, 0.6, 2.0).unwrap();
        let independent = check_ni_assumptions(&p).unwrap();
        assert_eq!(report, independent);
        for i in 0..6 {
            assert!(independent.residuals[i].abs() < 1e-12);
        }
        assert!(independent.holds[6]);
        // c1 = 1 + 0.64/0.36 < 4 c2, so the last constraint is reported violated
        assert!(!independent.holds[7]);
    }

    #[test]
    fn phi_positive_reference() {
        let p = NiParameters::reference();
        let mut x = 0.0;
        while x < 300.0 {
            assert!(p.mixed_curvature_numerator(x) > 0.0, "x = {x}");
            x += 0.37;
        }
    }
}
