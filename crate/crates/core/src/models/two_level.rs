//! Two-level family `H = -(Delta/2) n(x) . sigma` with ground state
//! `(cos(theta/2), sin(theta/2) e^{i phi})`.

use serde::{Deserialize, Serialize};

use super::HamiltonianFamily;
use crate::{CMat, Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chart {
    /// `(q, p)` with `q = phi`, `p = sin^2(theta/2)`.
    Qp,
    /// Bloch angles `(theta, phi)`.
    Bloch,
}

#[derive(Debug, Clone, Copy)]
pub struct TwoLevel {
    pub delta: f64,
    pub chart: Chart,
}

impl TwoLevel {
    pub fn new(delta: f64, chart: Chart) -> Self {
        Self { delta, chart }
    }

    /// Bloch vector and its two parameter derivatives.
    fn bloch(&self, x: &[f64]) -> Result<[[f64; 3]; 3]> {
        match self.chart {
            Chart::Bloch => {
                let (st, ct) = x[0].sin_cos();
                let (sp, cp) = x[1].sin_cos();
                Ok([
                    [st * cp, st * sp, ct],
                    [ct * cp, ct * sp, -st],
                    [-st * sp, st * cp, 0.0],
                ])
            }
            Chart::Qp => {
                let (q, p) = (x[0], x[1]);
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::DomainError(format!("p = {p} outside [0, 1]")));
                }
                let r = (p * (1.0 - p)).sqrt();
                let (sq, cq) = q.sin_cos();
                let dr = if r > 0.0 {
                    (1.0 - 2.0 * p) / (2.0 * r)
                } else {
                    f64::INFINITY
                };
                Ok([
                    [2.0 * r * cq, 2.0 * r * sq, 1.0 - 2.0 * p],
                    [-2.0 * r * sq, 2.0 * r * cq, 0.0],
                    [2.0 * dr * cq, 2.0 * dr * sq, -2.0],
                ])
            }
        }
    }
}

fn pauli(v: [f64; 3], scale: f64) -> CMat {
    let c = |re: f64, im: f64| C64::new(re * scale, im * scale);
    CMat::from_row_slice(
        2,
        2,
        &[c(v[2], 0.0), c(v[0], -v[1]), c(v[0], v[1]), c(-v[2], 0.0)],
    )
}

impl HamiltonianFamily for TwoLevel {
    fn dim(&self) -> usize {
        2
    }

    fn n_params(&self) -> usize {
        2
    }

    fn energy_scale(&self) -> f64 {
        self.delta
    }

    fn eval(&self, x: &[f64]) -> Result<CMat> {
        Ok(pauli(self.bloch(x)?[0], -0.5 * self.delta))
    }

    fn grad(&self, x: &[f64], mu: usize) -> Option<Result<CMat>> {
        Some(self.bloch(x).map(|b| pauli(b[mu + 1], -0.5 * self.delta)))
    }
}
