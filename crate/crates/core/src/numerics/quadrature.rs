//! Gauss–Legendre quadrature: fixed rules, composite log-spaced panels and a
//! simple adaptive bisection driver.

use std::f64::consts::PI;
use std::sync::OnceLock;

#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes and weights on [-1, 1] by Newton iteration on P_n.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..(n + 1) / 2 {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Shared 16-point rule.
    pub fn standard() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(16))
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// ∫_a^b f(s) ds with the substitution s = e^t (requires 0 < a).
    pub fn integrate_log<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        debug_assert!(a > 0.0 && b > 0.0);
        self.integrate(
            |t| {
                let s = t.exp();
                f(s) * s
            },
            a.ln(),
            b.ln(),
        )
    }

    /// Composite rule over log-spaced panels on [a, b] (0 < a), with the
    /// panel edges forced through every breakpoint inside the interval.
    pub fn composite_log<F: FnMut(f64) -> f64>(
        &self,
        mut f: F,
        a: f64,
        b: f64,
        panels_per_decade: usize,
        breakpoints: &[f64],
    ) -> f64 {
        if b <= a {
            return 0.0;
        }
        let mut edges = vec![a];
        edges.extend(breakpoints.iter().copied().filter(|&p| p > a && p < b));
        edges.push(b);
        edges.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut total = 0.0;
        for w in edges.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let panels = (((hi / lo).log10() * panels_per_decade as f64).ceil() as usize).max(1);
            let ratio = (hi / lo).powf(1.0 / panels as f64);
            let mut left = lo;
            for p in 0..panels {
                let right = if p + 1 == panels { hi } else { left * ratio };
                total += self.integrate_log(&mut f, left, right);
                left = right;
            }
        }
        total
    }

    /// Adaptive bisection comparing one panel against its two halves.
    pub fn adaptive<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
        let whole = self.integrate(&mut f, a, b);
        self.adaptive_rec(&mut f, a, b, whole, rel_tol, 0)
    }

    fn adaptive_rec<F: FnMut(f64) -> f64>(
        &self,
        f: &mut F,
        a: f64,
        b: f64,
        whole: f64,
        rel_tol: f64,
        depth: usize,
    ) -> f64 {
        let mid = 0.5 * (a + b);
        let left = self.integrate(&mut *f, a, mid);
        let right = self.integrate(&mut *f, mid, b);
        let refined = left + right;
        let scale = refined.abs().max(f64::MIN_POSITIVE);
        if (refined - whole).abs() <= rel_tol * scale || depth >= 40 {
            return refined;
        }
        self.adaptive_rec(f, a, mid, left, rel_tol, depth + 1)
            + self.adaptive_rec(f, mid, b, right, rel_tol, depth + 1)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, dp)
}
