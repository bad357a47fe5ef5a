//! Curvature of the quantum covariant derivative.

use super::christoffel;
use crate::models::Tracker;
use crate::numerics::stencil::{scaled_step, D1_O4};
use crate::tensor::{max_abs, Tensor3, Tensor4};
use crate::{Error, Result, C64};

#[derive(Debug, Clone)]
pub struct CurvatureTensor {
    /// `R^kappa_{nu lambda mu}` indexed `(kappa, nu, lambda, mu)`.
    pub mixed: Tensor4<C64>,
    /// `R_{kappa nu lambda mu} = h_{kappa rho} R^rho_{nu lambda mu}`.
    pub covariant: Tensor4<C64>,
}

impl CurvatureTensor {
    fn relative(&self, f: impl Fn(usize, usize, usize, usize) -> C64) -> f64 {
        let scale = max_abs(self.covariant.as_slice());
        if scale == 0.0 {
            return 0.0;
        }
        let n = self.covariant.dim();
        let mut worst: f64 = 0.0;
        for k in 0..n {
            for v in 0..n {
                for l in 0..n {
                    for m in 0..n {
                        worst = worst.max(f(k, v, l, m).norm());
                    }
                }
            }
        }
        worst / scale
    }

    /// `max |R_{kappa nu lambda mu} + R_{kappa nu mu lambda}| / max |R|`.
    pub fn antisymmetry_residual(&self) -> f64 {
        let r = &self.covariant;
        self.relative(|k, v, l, m| r[(k, v, l, m)] + r[(k, v, m, l)])
    }

    /// `max |R_{kappa nu lambda mu} + conj(R_{nu kappa lambda mu})| / max |R|`.
    pub fn anti_hermiticity_residual(&self) -> f64 {
        let r = &self.covariant;
        self.relative(|k, v, l, m| r[(k, v, l, m)] + r[(v, k, l, m)].conj())
    }
}

pub fn curvature(tracker: &Tracker, x: &[f64]) -> Result<CurvatureTensor> {
    let n = tracker.n_params();
    let centre = christoffel(tracker, x)?;
    let h = super::local_geometry_qgt(tracker, x)?;
    let mut d: Vec<Tensor3<C64>> = Vec::with_capacity(n);
    for l in 0..n {
        let step = scaled_step(tracker.settings.stencil_step, x[l])?;
        let mut acc = Tensor3::<C64>::zeros(n);
        for &(o, w) in &D1_O4 {
            let mut xs = x.to_vec();
            xs[l] += o * step;
            let c = christoffel(tracker, &xs).map_err(|e| match e {
                Error::SingularQgt { .. } => e,
                other => Error::StencilFailure(format!("at {xs:?}: {other}")),
            })?;
            acc = Tensor3::from_fn(n, |a, b, cc| {
                acc[(a, b, cc)] + c.second[(a, b, cc)] * (w / step)
            });
        }
        d.push(acc);
    }
    let u = &centre.second;
    let mixed = Tensor4::from_fn(n, |k, v, l, m| {
        let mut r = d[l][(k, m, v)] - d[m][(k, l, v)];
        for a in 0..n {
            r += u[(k, l, a)] * u[(a, m, v)] - u[(k, m, a)] * u[(a, l, v)];
        }
        r
    });
    let covariant = Tensor4::from_fn(n, |k, v, l, m| {
        (0..n).map(|r| h[(k, r)] * mixed[(r, v, l, m)]).sum()
    });
    Ok(CurvatureTensor { mixed, covariant })
}
