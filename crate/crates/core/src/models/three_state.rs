//! Three-level reference model in canonical coordinates `(q1, q2, p1, p2)`.
//!
//! The family is built so that its ground state is exactly the canonical state:
//! `H = Delta [ e(xi) |psi><psi| + P + kappa P K P ]` with `P = 1 - |psi><psi|`,
//! a fixed Hermitian `K` and `e(xi) = -0.5 - 0.2 p1 + 0.1 p2`. The excited
//! levels lie in `[1 - kappa |K|, 1 + kappa |K|] Delta`, so the gap stays above
//! `Delta` everywhere in the chart.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::HamiltonianFamily;
use crate::{CMat, CVec, Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalState {
    pub q1: f64,
    pub q2: f64,
    pub p1: f64,
    pub p2: f64,
}

impl CanonicalState {
    pub fn from_slice(xi: &[f64]) -> Self {
        Self {
            q1: xi[0],
            q2: xi[1],
            p1: xi[2],
            p2: xi[3],
        }
    }

    fn check(&self) -> Result<()> {
        let ok = self.p1 >= 0.0 && self.p1 <= 1.0 && self.p2.abs() <= self.p1;
        if !ok || ![self.q1, self.q2].iter().all(|v| v.is_finite()) {
            return Err(Error::DomainError(format!(
                "canonical state needs 0 <= |p2| <= p1 <= 1, got p1 = {}, p2 = {}",
                self.p1, self.p2
            )));
        }
        Ok(())
    }
}

/// The canonical state vector.
pub fn three_state(c: CanonicalState) -> Result<CVec> {
    c.check()?;
    let a = ((c.p1 - c.p2) / 2.0).max(0.0).sqrt();
    let b = ((c.p1 + c.p2) / 2.0).max(0.0).sqrt();
    let d = (1.0 - c.p1).max(0.0).sqrt();
    Ok(CVec::from_vec(vec![
        C64::from_polar(a, -c.q1 + c.q2),
        C64::from_polar(b, -c.q1 - c.q2),
        C64::new(d, 0.0),
    ]))
}

/// The same state in Euler-angle form `(theta, beta, gamma, alpha)`.
pub fn three_state_angular(theta: f64, beta: f64, gamma: f64, alpha: f64) -> CVec {
    let (st, ct) = theta.sin_cos();
    CVec::from_vec(vec![
        C64::from_polar(st * beta.sin(), -gamma + alpha),
        C64::from_polar(st * beta.cos(), -gamma - alpha),
        C64::new(ct, 0.0),
    ])
}

/// Derivative of the canonical state with respect to coordinate `k`.
fn dstate(c: CanonicalState, psi: &CVec, k: usize) -> Result<CVec> {
    let i = C64::new(0.0, 1.0);
    let zero = C64::new(0.0, 0.0);
    let open = |cond: bool| {
        if cond {
            Ok(())
        } else {
            Err(Error::DomainError(format!(
                "derivative at chart boundary p1 = {}, p2 = {}",
                c.p1, c.p2
            )))
        }
    };
    Ok(match k {
        0 => CVec::from_vec(vec![-i * psi[0], -i * psi[1], zero]),
        1 => CVec::from_vec(vec![i * psi[0], -i * psi[1], zero]),
        2 => {
            open(c.p1 - c.p2 > 0.0 && c.p1 + c.p2 > 0.0 && c.p1 < 1.0)?;
            CVec::from_vec(vec![
                psi[0] / (2.0 * (c.p1 - c.p2)),
                psi[1] / (2.0 * (c.p1 + c.p2)),
                C64::new(-0.5 / (1.0 - c.p1).sqrt(), 0.0),
            ])
        }
        3 => {
            open(c.p1 - c.p2 > 0.0 && c.p1 + c.p2 > 0.0)?;
            CVec::from_vec(vec![
                -psi[0] / (2.0 * (c.p1 - c.p2)),
                psi[1] / (2.0 * (c.p1 + c.p2)),
                zero,
            ])
        }
        _ => {
            return Err(Error::Dimension(format!(
                "canonical index {k} out of range"
            )))
        }
    })
}

/// Three-level family, optionally composed with a parameter embedding
/// `x -> xi = offset + M x + S sin(x)`.
#[derive(Debug, Clone)]
pub struct ThreeState {
    pub delta: f64,
    pub kappa: f64,
    pub k: CMat,
    pub offset: Vec<f64>,
    pub linear: DMatrix<f64>,
    pub sine: DMatrix<f64>,
}

impl ThreeState {
    /// Family in the canonical coordinates themselves.
    pub fn canonical(delta: f64) -> Self {
        Self::embedded(
            delta,
            vec![0.0; 4],
            DMatrix::identity(4, 4),
            DMatrix::zeros(4, 4),
        )
    }

    pub fn embedded(
        delta: f64,
        offset: Vec<f64>,
        linear: DMatrix<f64>,
        sine: DMatrix<f64>,
    ) -> Self {
        let c = |re: f64, im: f64| C64::new(re, im);
        #[rustfmt::skip]
        let k = CMat::from_row_slice(3, 3, &[
            c(0.3, 0.0),  c(0.2, 0.1),   c(-0.1, 0.0),
            c(0.2, -0.1), c(-0.4, 0.0),  c(0.0, 0.25),
            c(-0.1, 0.0), c(0.0, -0.25), c(0.1, 0.0),
        ]);
        Self {
            delta,
            kappa: 0.25,
            k,
            offset,
            linear,
            sine,
        }
    }

    /// Canonical coordinates of parameter point `x`.
    pub fn canonical_coords(&self, x: &[f64]) -> Vec<f64> {
        (0..4)
            .map(|i| {
                self.offset[i]
                    + (0..x.len())
                        .map(|j| self.linear[(i, j)] * x[j] + self.sine[(i, j)] * x[j].sin())
                        .sum::<f64>()
            })
            .collect()
    }

    /// `d xi^i / d x^j`.
    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(4, x.len(), |i, j| {
            self.linear[(i, j)] + self.sine[(i, j)] * x[j].cos()
        })
    }

    fn level_energy(xi: &[f64]) -> (f64, [f64; 4]) {
        (-0.5 - 0.2 * xi[2] + 0.1 * xi[3], [0.0, 0.0, -0.2, 0.1])
    }
}

impl HamiltonianFamily for ThreeState {
    fn dim(&self) -> usize {
        3
    }

    fn n_params(&self) -> usize {
        self.linear.ncols()
    }

    fn energy_scale(&self) -> f64 {
        self.delta
    }

    fn eval(&self, x: &[f64]) -> Result<CMat> {
        let xi = self.canonical_coords(x);
        let psi = three_state(CanonicalState::from_slice(&xi))?;
        let proj = &psi * psi.adjoint();
        let p = CMat::identity(3, 3) - &proj;
        let (e, _) = Self::level_energy(&xi);
        let h = &proj * C64::new(e, 0.0) + &p + &p * &self.k * &p * C64::new(self.kappa, 0.0);
        Ok(h * C64::new(self.delta, 0.0))
    }

    fn grad(&self, x: &[f64], mu: usize) -> Option<Result<CMat>> {
        let run = || -> Result<CMat> {
            let xi = self.canonical_coords(x);
            let c = CanonicalState::from_slice(&xi);
            let psi = three_state(c)?;
            let jac = self.jacobian(x);
            let proj = &psi * psi.adjoint();
            let p = CMat::identity(3, 3) - &proj;
            let (e, de) = Self::level_energy(&xi);
            let mut out = CMat::zeros(3, 3);
            for k in 0..4 {
                let jk = jac[(k, mu)];
                if jk == 0.0 {
                    continue;
                }
                let dpsi = dstate(c, &psi, k)?;
                let dproj = &dpsi * psi.adjoint() + &psi * dpsi.adjoint();
                let dp = -&dproj;
                let term = &dproj * C64::new(e - 1.0, 0.0)
                    + &proj * C64::new(de[k], 0.0)
                    + (&dp * &self.k * &p + &p * &self.k * &dp) * C64::new(self.kappa, 0.0);
                out += term * C64::new(jk, 0.0);
            }
            Ok(out * C64::new(self.delta, 0.0))
        };
        Some(run())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poles_of_chart() {
        let v = three_state(CanonicalState {
            q1: 0.3,
            q2: 0.1,
            p1: 0.0,
            p2: 0.0,
        })
        .unwrap();
        assert!((v[2] - C64::new(1.0, 0.0)).norm() < 1e-15 && v[0].norm() < 1e-15);
        let v = three_state(CanonicalState {
            q1: 0.0,
            q2: 0.0,
            p1: 1.0,
            p2: 1.0,
        })
        .unwrap();
        assert!(
            (v[1] - C64::new(1.0, 0.0)).norm() < 1e-15
                && v[0].norm() < 1e-15
                && v[2].norm() < 1e-15
        );
        assert!(three_state(CanonicalState {
            q1: 0.0,
            q2: 0.0,
            p1: 0.5,
            p2: 0.6
        })
        .is_err());
        assert!(three_state(CanonicalState {
            q1: 0.0,
            q2: 0.0,
            p1: 1.1,
            p2: 0.0
        })
        .is_err());
    }

    #[test]
    fn ground_state_is_canonical_state() {
        let m = ThreeState::canonical(1.0);
        let x = [0.3, 0.7, 0.6, 0.2];
        let h = m.eval(&x).unwrap();
        let psi = three_state(CanonicalState::from_slice(&x)).unwrap();
        let e = -0.5 - 0.2 * 0.6 + 0.1 * 0.2;
        assert!((&h * &psi - &psi * C64::new(e, 0.0)).norm() < 1e-14);
    }
}
