//! Gauss-Legendre collocation for linear systems `y' = M(t) y`.
//!
//! An `s`-stage Gauss method has order `2s`, is A-stable and preserves quadratic
//! invariants, so norms of Schrödinger states and the metric inner product of
//! transported kets are kept to the local error. The stage equations are linear
//! and are solved directly. Step size is controlled by step doubling.

use nalgebra::DMatrix;

use super::gauss::GaussLegendre;
use crate::{CMat, Error, Result, C64};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    /// Number of collocation stages (order `2 * stages`).
    pub stages: usize,
    /// Local error tolerance, relative to `max(1, |y|)`.
    pub tol: f64,
    /// Initial step; defaults to 1/16 of the span to the first output.
    pub h_init: Option<f64>,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            stages: 5,
            tol: 1e-12,
            h_init: None,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OdeOutput {
    pub times: Vec<f64>,
    pub states: Vec<CMat>,
    pub accepted: usize,
    pub rejected: usize,
}

pub struct Collocation {
    rule: GaussLegendre,
    a: DMatrix<f64>,
}

fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl Collocation {
    pub fn new(stages: usize) -> Self {
        let rule = GaussLegendre::new(stages);
        let a = rule.collocation_matrix();
        Self { rule, a }
    }

    pub fn order(&self) -> usize {
        2 * self.rule.len()
    }

    /// One step of size `h` from `(t, y)`.
    pub fn step<F>(&self, m: &mut F, t: f64, h: f64, y: &CMat) -> Result<CMat>
    where
        F: FnMut(f64) -> Result<CMat>,
    {
        let s = self.rule.len();
        let n = y.nrows();
        let ms: Vec<CMat> = self
            .rule
            .nodes
            .iter()
            .map(|c| m(t + c * h))
            .collect::<Result<_>>()?;
        for mj in &ms {
            if mj.nrows() != n || mj.ncols() != n {
                return Err(Error::Dimension(format!(
                    "ODE matrix is {}x{}, state has {} rows",
                    mj.nrows(),
                    mj.ncols(),
                    n
                )));
            }
        }
        let mut big = CMat::zeros(s * n, s * n);
        for i in 0..s {
            for (j, mj) in ms.iter().enumerate() {
                let coef = C64::new(-h * self.a[(i, j)], 0.0);
                let mut blk = big.view_mut((i * n, j * n), (n, n));
                blk.copy_from(&(mj * coef));
                if i == j {
                    for d in 0..n {
                        blk[(d, d)] += C64::new(1.0, 0.0);
                    }
                }
            }
        }
        let mut rhs = CMat::zeros(s * n, y.ncols());
        for i in 0..s {
            rhs.view_mut((i * n, 0), (n, y.ncols())).copy_from(y);
        }
        let stages = big
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::StepFailure(format!("singular stage system at t = {t}")))?;
        let mut out = y.clone();
        for (j, mj) in ms.iter().enumerate() {
            let yj = stages.view((j * n, 0), (n, y.ncols()));
            out += mj * yj * C64::new(h * self.rule.weights[j], 0.0);
        }
        Ok(out)
    }

    /// Fixed-step integration from `t0` to `t1`.
    pub fn solve_fixed<F>(
        &self,
        mut m: F,
        t0: f64,
        t1: f64,
        y0: &CMat,
        steps: usize,
    ) -> Result<CMat>
    where
        F: FnMut(f64) -> Result<CMat>,
    {
        let h = (t1 - t0) / steps as f64;
        let mut y = y0.clone();
        for k in 0..steps {
            y = self.step(&mut m, t0 + k as f64 * h, h, &y)?;
        }
        Ok(y)
    }

    /// Adaptive integration, returning the state at each of `outputs`
    /// (ascending, all `>= t0`). Steps never straddle a `breakpoint`.
    pub fn solve<F>(
        &self,
        mut m: F,
        t0: f64,
        y0: &CMat,
        outputs: &[f64],
        breakpoints: &[f64],
        opts: &OdeOptions,
    ) -> Result<OdeOutput>
    where
        F: FnMut(f64) -> Result<CMat>,
    {
        let mut out = OdeOutput {
            times: Vec::new(),
            states: Vec::new(),
            accepted: 0,
            rejected: 0,
        };
        if outputs.windows(2).any(|w| w[1] < w[0]) || outputs.first().is_some_and(|&t| t < t0) {
            return Err(Error::Config(
                "output times must be ascending and >= t0".into(),
            ));
        }
        let t_end = match outputs.last() {
            Some(&t) => t,
            None => return Ok(out),
        };
        let mut stops: Vec<f64> = outputs.to_vec();
        stops.extend(breakpoints.iter().copied().filter(|&b| b > t0 && b < t_end));
        stops.sort_by(f64::total_cmp);
        stops.dedup();

        let denom = (2f64).powi(self.order() as i32) - 1.0;
        let expo = 1.0 / (self.order() as f64 + 1.0);
        let mut t = t0;
        let mut y = y0.clone();
        let mut h = opts
            .h_init
            .unwrap_or_else(|| ((t_end - t0) / 16.0).max(1e-3));
        let mut steps = 0usize;
        for &stop in &stops {
            while t < stop {
                let span = stop - t;
                let last = h >= span * (1.0 - 1e-12);
                let hh = if last { span } else { h };
                if hh <= 1e-14 * t.abs().max(1.0) {
                    return Err(Error::StepFailure(format!("step underflow at t = {t}")));
                }
                steps += 1;
                if steps > opts.max_steps {
                    return Err(Error::StepFailure(format!(
                        "more than {} steps",
                        opts.max_steps
                    )));
                }
                let full = self.step(&mut m, t, hh, &y)?;
                let mid = self.step(&mut m, t, 0.5 * hh, &y)?;
                let half = self.step(&mut m, t + 0.5 * hh, 0.5 * hh, &mid)?;
                let err = max_abs(&(&half - &full)) / denom;
                let scale = opts.tol * max_abs(&y).max(1.0);
                if !err.is_finite() {
                    return Err(Error::StepFailure(format!("non-finite state at t = {t}")));
                }
                let factor = if err == 0.0 {
                    4.0
                } else {
                    (0.9 * (scale / err).powf(expo)).clamp(0.2, 4.0)
                };
                if err <= scale {
                    t = if last { stop } else { t + hh };
                    y = half;
                    out.accepted += 1;
                    if !last || factor < 1.0 {
                        h = hh * factor;
                    }
                } else {
                    out.rejected += 1;
                    h = hh * factor;
                }
            }
            if outputs.contains(&stop) {
                out.times.push(stop);
                out.states.push(y.clone());
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn scalar_oscillator_is_exact_to_tolerance() {
        let col = Collocation::new(5);
        let y0 = CMat::from_element(1, 1, c(1.0, 0.0));
        let m = |_t: f64| Ok(CMat::from_element(1, 1, c(0.0, -2.0)));
        let out = col
            .solve(m, 0.0, &y0, &[1.0, 10.0], &[], &OdeOptions::default())
            .unwrap();
        for (t, y) in out.times.iter().zip(&out.states) {
            let exact = C64::from_polar(1.0, -2.0 * t);
            assert!((y[(0, 0)] - exact).norm() < 1e-11);
        }
    }

    #[test]
    fn time_dependent_scalar() {
        // y' = i t y  ->  y = exp(i t^2 / 2)
        let col = Collocation::new(5);
        let y0 = CMat::from_element(1, 1, c(1.0, 0.0));
        let m = |t: f64| Ok(CMat::from_element(1, 1, c(0.0, t)));
        let out = col
            .solve(m, 0.0, &y0, &[3.0], &[1.5], &OdeOptions::default())
            .unwrap();
        let exact = C64::from_polar(1.0, 4.5);
        assert!((out.states[0][(0, 0)] - exact).norm() < 1e-11);
    }

    #[test]
    fn fixed_step_order() {
        let col = Collocation::new(2);
        let y0 = CMat::from_element(1, 1, c(1.0, 0.0));
        let exact = C64::from_polar(1.0, 4.5);
        let m = |t: f64| Ok(CMat::from_element(1, 1, c(0.0, t)));
        let e1 = (col.solve_fixed(m, 0.0, 3.0, &y0, 20).unwrap()[(0, 0)] - exact).norm();
        let e2 = (col.solve_fixed(m, 0.0, 3.0, &y0, 40).unwrap()[(0, 0)] - exact).norm();
        let rate = (e1 / e2).log2();
        assert!((rate - 4.0).abs() < 0.3, "rate {rate}");
    }
}
