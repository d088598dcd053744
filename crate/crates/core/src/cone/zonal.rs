use std::f64::consts::PI;

use crate::numerics::GaussLegendre;

/// Axis-symmetric degree-`k` spherical harmonic on the unit `S^m`, scaled to
/// mean square 1, as a function of the polar angle `θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZonalHarmonic {
    m: usize,
    k: usize,
    norm: f64,
}

impl ZonalHarmonic {
    pub fn new(m: usize, k: usize) -> Self {
        assert!(m >= 1, "sphere dimension must be positive");
        let raw = Self { m, k, norm: 1.0 };
        // Polynomial of degree 2k in cos θ against sin^{m−1}θ: a 64-point
        // rule on four panels is exact to rounding for the degrees in use.
        let rule = GaussLegendre::new(64);
        let weight = |t: f64| t.sin().powi(m as i32 - 1);
        let (mut num, mut den) = (0.0, 0.0);
        for p in 0..4 {
            let (a, b) = (PI * p as f64 / 4.0, PI * (p + 1) as f64 / 4.0);
            num += rule.integrate(|t| raw.value(t).powi(2) * weight(t), a, b);
            den += rule.integrate(weight, a, b);
        }
        Self {
            m,
            k,
            norm: (den / num).sqrt(),
        }
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn value(&self, theta: f64) -> f64 {
        let v = if self.m == 1 {
            (self.k as f64 * theta).cos()
        } else {
            gegenbauer(self.k, 0.5 * (self.m as f64 - 1.0), theta.cos())
        };
        self.norm * v
    }

    /// `dY/dθ`.
    pub fn derivative(&self, theta: f64) -> f64 {
        let k = self.k as f64;
        let d = if self.m == 1 {
            -k * (k * theta).sin()
        } else if self.k == 0 {
            0.0
        } else {
            let lam = 0.5 * (self.m as f64 - 1.0);
            -theta.sin() * 2.0 * lam * gegenbauer(self.k - 1, lam + 1.0, theta.cos())
        };
        self.norm * d
    }

    /// `max |Y|`, attained at the poles.
    pub fn sup(&self) -> f64 {
        self.value(0.0).abs()
    }
}

/// `C_k^{(λ)}(x)` by the three-term recurrence.
fn gegenbauer(k: usize, lam: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if k == 0 {
        return prev;
    }
    let mut cur = 2.0 * lam * x;
    for j in 2..=k {
        let jf = j as f64;
        let next = (2.0 * x * (jf + lam - 1.0) * cur - (jf + 2.0 * lam - 2.0) * prev) / jf;
        prev = cur;
        cur = next;
    }
    cur
}
