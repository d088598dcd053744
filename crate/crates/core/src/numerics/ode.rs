//! Dormand–Prince 5(4) with step-size control and the standard fourth-order
//! continuous extension.

pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, x: f64, y: &[f64], dy: &mut [f64]);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Reached,
    Overflow,
    MaxSteps,
    StepUnderflow,
}

#[derive(Debug, Clone)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Integration stops once any component exceeds this magnitude.
    pub overflow: f64,
    pub first_step: Option<f64>,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self {
            rtol: crate::tolerances::ODE_RTOL,
            atol: crate::tolerances::ODE_ATOL,
            max_steps: 1_000_000,
            overflow: crate::tolerances::OVERFLOW_GUARD,
            first_step: None,
        }
    }
}

#[derive(Debug, Clone)]
struct DenseStep {
    x0: f64,
    h: f64,
    /// Five coefficient blocks of length `dim`.
    cont: Vec<f64>,
}

/// Accepted steps of an integration together with their interpolants.
#[derive(Debug, Clone)]
pub struct DenseSolution {
    dim: usize,
    x_start: f64,
    y_start: Vec<f64>,
    steps: Vec<DenseStep>,
    pub stop: StopReason,
}

impl DenseSolution {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn x_start(&self) -> f64 {
        self.x_start
    }

    pub fn x_end(&self) -> f64 {
        self.steps
            .last()
            .map(|s| s.x0 + s.h)
            .unwrap_or(self.x_start)
    }

    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    /// State at the end of the integration.
    pub fn y_end(&self) -> Vec<f64> {
        match self.steps.last() {
            Some(s) => (0..self.dim)
                .map(|i| s.cont[i] + s.cont[self.dim + i])
                .collect(),
            None => self.y_start.clone(),
        }
    }

    /// Interpolated state at `x`; `None` outside the integrated span.
    pub fn eval(&self, x: f64) -> Option<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(x, &mut out).then_some(out)
    }

    pub fn eval_into(&self, x: f64, out: &mut [f64]) -> bool {
        if x < self.x_start || x > self.x_end() || self.steps.is_empty() {
            if x == self.x_start {
                out.copy_from_slice(&self.y_start);
                return true;
            }
            return false;
        }
        let idx = self
            .steps
            .partition_point(|s| s.x0 + s.h < x)
            .min(self.steps.len() - 1);
        let s = &self.steps[idx];
        let theta = ((x - s.x0) / s.h).clamp(0.0, 1.0);
        let th1 = 1.0 - theta;
        let d = self.dim;
        for i in 0..d {
            let c = |k: usize| s.cont[k * d + i];
            out[i] = c(0) + theta * (c(1) + th1 * (c(2) + theta * (c(3) + th1 * c(4))));
        }
        true
    }

    /// Accepted step boundaries with the state there.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, Vec<f64>)> + '_ {
        std::iter::once((self.x_start, self.y_start.clone())).chain(self.steps.iter().map(
            move |s| {
                let y = (0..self.dim)
                    .map(|i| s.cont[i] + s.cont[self.dim + i])
                    .collect();
                (s.x0 + s.h, y)
            },
        ))
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

impl Dopri5 {
    pub fn with_rtol(rtol: f64) -> Self {
        Self {
            rtol,
            ..Self::default()
        }
    }

    pub fn integrate<S: OdeSystem>(
        &self,
        sys: &S,
        x0: f64,
        y0: &[f64],
        x_end: f64,
    ) -> DenseSolution {
        let d = sys.dim();
        assert_eq!(y0.len(), d);
        assert!(x_end > x0, "integration runs forward only");

        let mut sol = DenseSolution {
            dim: d,
            x_start: x0,
            y_start: y0.to_vec(),
            steps: Vec::new(),
            stop: StopReason::Reached,
        };

        let mut x = x0;
        let mut y = y0.to_vec();
        let mut k1 = vec![0.0; d];
        let mut k2 = vec![0.0; d];
        let mut k3 = vec![0.0; d];
        let mut k4 = vec![0.0; d];
        let mut k5 = vec![0.0; d];
        let mut k6 = vec![0.0; d];
        let mut k7 = vec![0.0; d];
        let mut tmp = vec![0.0; d];
        let mut y_new = vec![0.0; d];

        sys.rhs(x, &y, &mut k1);
        let mut h = self.first_step.unwrap_or_else(|| initial_step(x0, x_end));
        let mut accepted = 0usize;
        let mut err_prev: f64 = 1e-4;

        while x < x_end {
            if accepted >= self.max_steps {
                sol.stop = StopReason::MaxSteps;
                break;
            }
            let last = x + h >= x_end;
            if last {
                h = x_end - x;
            }
            if h <= f64::EPSILON * x.abs().max(1e-300) {
                sol.stop = StopReason::StepUnderflow;
                break;
            }

            for i in 0..d {
                tmp[i] = y[i] + h * A21 * k1[i];
            }
            sys.rhs(x + C2 * h, &tmp, &mut k2);
            for i in 0..d {
                tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
            }
            sys.rhs(x + C3 * h, &tmp, &mut k3);
            for i in 0..d {
                tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            sys.rhs(x + C4 * h, &tmp, &mut k4);
            for i in 0..d {
                tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            sys.rhs(x + C5 * h, &tmp, &mut k5);
            for i in 0..d {
                tmp[i] = y[i]
                    + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            sys.rhs(x + h, &tmp, &mut k6);
            for i in 0..d {
                y_new[i] = y[i]
                    + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
            }
            sys.rhs(x + h, &y_new, &mut k7);

            let mut err = 0.0;
            for i in 0..d {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                err += (e / sc).powi(2);
            }
            let err = (err / d as f64).sqrt();

            if !err.is_finite() {
                h *= 0.1;
                continue;
            }

            if err <= 1.0 {
                let mut cont = vec![0.0; 5 * d];
                for i in 0..d {
                    let ydiff = y_new[i] - y[i];
                    let bspl = h * k1[i] - ydiff;
                    cont[i] = y[i];
                    cont[d + i] = ydiff;
                    cont[2 * d + i] = bspl;
                    cont[3 * d + i] = ydiff - h * k7[i] - bspl;
                    cont[4 * d + i] = h
                        * (D1 * k1[i]
                            + D3 * k3[i]
                            + D4 * k4[i]
                            + D5 * k5[i]
                            + D6 * k6[i]
                            + D7 * k7[i]);
                }
                sol.steps.push(DenseStep { x0: x, h, cont });
                x = if last { x_end } else { x + h };
                std::mem::swap(&mut y, &mut y_new);
                std::mem::swap(&mut k1, &mut k7);
                accepted += 1;

                if y.iter().any(|v| !v.is_finite() || v.abs() > self.overflow) {
                    sol.stop = StopReason::Overflow;
                    break;
                }

                // PI controller (Hairer's beta = 0.04)
                let fac = 0.9 * err.max(1e-10).powf(-0.2 + 0.04 * 0.75) * err_prev.powf(0.04);
                h *= fac.clamp(0.2, 5.0);
                err_prev = err.max(1e-4);
            } else {
                let fac = 0.9 * err.powf(-0.2);
                h *= fac.clamp(0.1, 1.0);
            }
        }
        sol
    }
}

fn initial_step(x0: f64, x_end: f64) -> f64 {
    let span = x_end - x0;
    if x0 > 0.0 {
        (1e-3 * x0).min(span)
    } else {
        1e-6 * span
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Harmonic;
    impl OdeSystem for Harmonic {
        fn dim(&self) -> usize {
            2
        }
        fn rhs(&self, _x: f64, y: &[f64], dy: &mut [f64]) {
            dy[0] = y[1];
            dy[1] = -y[0];
        }
    }

    struct Growth;
    impl OdeSystem for Growth {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, _x: f64, y: &[f64], dy: &mut [f64]) {
            dy[0] = 20.0 * y[0];
        }
    }

    #[test]
    fn oscillator_end_and_dense() {
        let sol = Dopri5::default().integrate(&Harmonic, 0.0, &[0.0, 1.0], 10.0);
        assert_eq!(sol.stop, StopReason::Reached);
        let y = sol.y_end();
        assert!((y[0] - 10f64.sin()).abs() < 1e-8);
        for x in [0.3, 2.71, 7.77] {
            let v = sol.eval(x).unwrap();
            assert!((v[0] - x.sin()).abs() < 1e-8, "{x}: {}", v[0] - x.sin());
            assert!((v[1] - x.cos()).abs() < 1e-8);
        }
        assert!(sol.eval(10.5).is_none());
    }

    #[test]
    fn overflow_guard_stops_early() {
        let solver = Dopri5 {
            overflow: 1e100,
            ..Dopri5::default()
        };
        let sol = solver.integrate(&Growth, 0.0, &[1.0], 100.0);
        assert_eq!(sol.stop, StopReason::Overflow);
        assert!(sol.x_end() < 100.0);
        assert!(sol.x_end() > 100.0 * 10f64.ln() / 20.0 - 0.5);
    }
}
