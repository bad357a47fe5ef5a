//! Gauge-covariant tangent frames, the quantum geometric tensor, quantum
//! Christoffel symbols and the curvature tensor.
//!
//! Tangent kets come from the sum-over-states formula. Second covariant
//! derivatives are finite differences of tangent kets at stencil points whose
//! tracked state is aligned with the centre (`<n_c|n> > 0`); in that gauge the
//! Berry connection vanishes at the centre, so the plain derivative is the
//! covariant one.

mod curvature;

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

pub use curvature::{curvature, CurvatureTensor};

use crate::models::{gauge_fix, EigenFrame, Seed, Tracker};
use crate::numerics::stencil::{scaled_step, D1_O4};
use crate::tensor::Tensor3;
use crate::{CMat, CVec, Error, RMat, Result, C64};

/// Eigenframe with covariant tangent kets `|D_mu n>` and Berry connection `A_mu`.
#[derive(Debug, Clone)]
pub struct TangentFrame {
    pub frame: EigenFrame,
    pub dkets: Vec<CVec>,
    /// `A_mu = i <n|d_mu n>` in the tracker's smooth gauge.
    pub berry_conn: Vec<f64>,
}

/// `h = g - (i/2) B`.
#[derive(Debug, Clone, PartialEq)]
pub struct Qgt {
    pub h: CMat,
    pub g: RMat,
    pub b: RMat,
}

impl Qgt {
    pub fn from_dkets(dkets: &[CVec]) -> Self {
        let n = dkets.len();
        let h = CMat::from_fn(n, n, |m, v| dkets[m].dotc(&dkets[v]));
        let g = h.map(|z| z.re);
        let b = h.map(|z| -2.0 * z.im);
        Self { h, g, b }
    }

    /// Eigenvalues of `h` (real, ascending).
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut e: Vec<f64> = SymmetricEigen::new(self.hermitian())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        e.sort_by(f64::total_cmp);
        e
    }

    /// Ratio of extreme eigenvalues of `h`; infinite if `h` is singular.
    pub fn condition_number(&self) -> f64 {
        let e = self.eigenvalues();
        match (e.first(), e.last()) {
            (Some(&lo), Some(&hi)) if lo > 0.0 => hi / lo,
            (Some(_), Some(_)) => f64::INFINITY,
            _ => 1.0,
        }
    }

    pub fn hermitian(&self) -> CMat {
        (&self.h + self.h.adjoint()) * C64::new(0.5, 0.0)
    }

    /// `h^{-1}`, or `SingularQgt` if the condition number exceeds `cond_max`.
    pub fn inverse(&self, cond_max: f64) -> Result<CMat> {
        let cond = self.condition_number();
        if !(cond <= cond_max) {
            return Err(Error::SingularQgt { cond, cond_max });
        }
        self.hermitian()
            .try_inverse()
            .ok_or(Error::SingularQgt { cond, cond_max })
    }

    /// Inner product `h(u, v) = conj(u^mu) h_{mu nu} v^nu`.
    pub fn inner(&self, u: &CVec, v: &CVec) -> C64 {
        u.dotc(&(&self.h * v))
    }
}

/// Sum-over-states tangent kets of `frame`.
pub fn dkets(tracker: &Tracker, frame: &EigenFrame) -> Result<Vec<CVec>> {
    let n = frame.state();
    (0..tracker.n_params())
        .map(|mu| {
            let dh = tracker.grad_h(&frame.point, mu)?;
            Ok(frame.resolvent_raw(1, &(dh * &n)))
        })
        .collect()
}

/// Tangent kets by differencing aligned frames (independent cross-check).
pub fn dkets_fd(tracker: &Tracker, frame: &EigenFrame) -> Result<Vec<CVec>> {
    let x = frame.point.coords();
    (0..tracker.n_params())
        .map(|mu| {
            let h = scaled_step(tracker.settings.stencil_step, x[mu])?;
            let mut acc = CVec::zeros(frame.dim());
            for &(o, w) in &D1_O4 {
                let mut xs = x.to_vec();
                xs[mu] += o * h;
                let f = aligned(tracker, &xs, frame)?;
                acc += f.state() * C64::new(w / h, 0.0);
            }
            Ok(frame.project(&acc))
        })
        .collect()
}

fn aligned(tracker: &Tracker, x: &[f64], reference: &EigenFrame) -> Result<EigenFrame> {
    let f = tracker
        .frame(x)
        .map_err(|e| Error::StencilFailure(format!("at {x:?}: {e}")))?;
    gauge_fix(&f, reference).map_err(|e| Error::StencilFailure(format!("at {x:?}: {e}")))
}

/// Berry connection at `frame` in the tracker's gauge seeded on `frame.seed`.
pub fn berry_connection(tracker: &Tracker, frame: &EigenFrame) -> Result<Vec<f64>> {
    let x = frame.point.coords();
    let seed = Seed::Component(frame.seed);
    let centre = tracker.frame_seeded(x, seed)?.state();
    (0..tracker.n_params())
        .map(|mu| {
            let h = scaled_step(tracker.settings.stencil_step, x[mu])?;
            let mut acc = C64::new(0.0, 0.0);
            for &(o, w) in &D1_O4 {
                let mut xs = x.to_vec();
                xs[mu] += o * h;
                let f = tracker
                    .frame_seeded(&xs, seed)
                    .map_err(|e| Error::StencilFailure(format!("at {xs:?}: {e}")))?;
                acc += centre.dotc(&f.state()) * w;
            }
            Ok(-(acc / h).im)
        })
        .collect()
}

pub fn covariant_frame(tracker: &Tracker, x: &[f64]) -> Result<TangentFrame> {
    let frame = tracker.frame(x)?;
    let dk = dkets(tracker, &frame)?;
    let berry_conn = berry_connection(tracker, &frame)?;
    Ok(TangentFrame {
        frame,
        dkets: dk,
        berry_conn,
    })
}

pub fn qgt(frame: &TangentFrame) -> Qgt {
    Qgt::from_dkets(&frame.dkets)
}

/// `|D_mu D_nu n>` for every `nu`, in the gauge of `frame`.
pub fn second_covariant(tracker: &Tracker, frame: &EigenFrame, mu: usize) -> Result<Vec<CVec>> {
    let x = frame.point.coords();
    let h = scaled_step(tracker.settings.stencil_step, x[mu])?;
    let n = tracker.n_params();
    let mut acc = vec![CVec::zeros(frame.dim()); n];
    for &(o, w) in &D1_O4 {
        let mut xs = x.to_vec();
        xs[mu] += o * h;
        let f = aligned(tracker, &xs, frame)?;
        let dk = dkets(tracker, &f)?;
        for (a, d) in acc.iter_mut().zip(dk) {
            *a += d * C64::new(w / h, 0.0);
        }
    }
    Ok(acc)
}

/// Geometry at one point without raising indices.
#[derive(Debug, Clone)]
pub struct LocalGeometry {
    pub frame: EigenFrame,
    pub dkets: Vec<CVec>,
    pub qgt: Qgt,
    /// `dd[mu][nu] = |D_mu D_nu n>`.
    pub dd: Vec<Vec<CVec>>,
    /// `Upsilon_{lambda mu nu} = <D_lambda n|D_mu D_nu n>`.
    pub first: Tensor3<C64>,
}

pub fn local_geometry(tracker: &Tracker, x: &[f64]) -> Result<LocalGeometry> {
    let frame = tracker.frame(x)?;
    let dk = dkets(tracker, &frame)?;
    let n = dk.len();
    let dd = (0..n)
        .map(|mu| second_covariant(tracker, &frame, mu))
        .collect::<Result<Vec<_>>>()?;
    let first = Tensor3::from_fn(n, |l, m, v| dk[l].dotc(&dd[m][v]));
    let qgt = Qgt::from_dkets(&dk);
    Ok(LocalGeometry {
        frame,
        dkets: dk,
        qgt,
        dd,
        first,
    })
}

/// Christoffel symbols of the first kind only (no inversion of `h`).
pub fn christoffel_first(tracker: &Tracker, x: &[f64]) -> Result<Tensor3<C64>> {
    Ok(local_geometry(tracker, x)?.first)
}

#[derive(Debug, Clone)]
pub struct Christoffel {
    /// `Upsilon_{lambda mu nu}`.
    pub first: Tensor3<C64>,
    /// `Upsilon^lambda_{mu nu}`.
    pub second: Tensor3<C64>,
    /// `Gamma = Re Upsilon`.
    pub gamma: Tensor3<f64>,
    /// `C = Im Upsilon`.
    pub c: Tensor3<f64>,
    pub h_cond: f64,
}

impl LocalGeometry {
    pub fn christoffel(&self, cond_max: f64) -> Result<Christoffel> {
        let hinv = self.qgt.inverse(cond_max)?;
        let n = self.dkets.len();
        let first = self.first.clone();
        let second = Tensor3::from_fn(n, |k, m, v| {
            (0..n).map(|r| hinv[(k, r)] * first[(r, m, v)]).sum()
        });
        Ok(Christoffel {
            gamma: first.map(|z| z.re),
            c: first.map(|z| z.im),
            first,
            second,
            h_cond: self.qgt.condition_number(),
        })
    }
}

pub fn christoffel(tracker: &Tracker, x: &[f64]) -> Result<Christoffel> {
    local_geometry(tracker, x)?.christoffel(tracker.settings.cond_max)
}

/// Maximum residuals of the metric-compatibility identities at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityReport {
    /// `d_mu h_{lambda nu} - Upsilon_{lambda mu nu} - conj(Upsilon_{nu mu lambda})`.
    pub identity: f64,
    /// `Re Upsilon_{lambda mu nu} - (d_nu g_{lambda mu} + d_mu g_{nu lambda} - d_lambda g_{mu nu}) / 2`.
    pub real_part: f64,
    /// `Im Upsilon_{lambda mu nu} - Im Upsilon_{nu mu lambda} + d_mu B_{lambda nu} / 2`.
    pub imag_part: f64,
    /// `Upsilon_{lambda mu nu} - Upsilon_{lambda nu mu}`.
    pub symmetry: f64,
    /// `<n|D_mu D_nu n> + h_{mu nu}`.
    pub normal_part: f64,
}

impl CompatibilityReport {
    pub fn max(&self) -> f64 {
        [
            self.identity,
            self.real_part,
            self.imag_part,
            self.symmetry,
            self.normal_part,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Parameter derivatives of `h` by fourth-order differences of the tensor itself.
pub fn qgt_derivatives(tracker: &Tracker, x: &[f64]) -> Result<Vec<CMat>> {
    let n = tracker.n_params();
    (0..n)
        .map(|mu| {
            let h = scaled_step(tracker.settings.stencil_step, x[mu])?;
            let mut acc = CMat::zeros(n, n);
            for &(o, w) in &D1_O4 {
                let mut xs = x.to_vec();
                xs[mu] += o * h;
                let f = tracker
                    .frame(&xs)
                    .map_err(|e| Error::StencilFailure(format!("at {xs:?}: {e}")))?;
                acc += Qgt::from_dkets(&dkets(tracker, &f)?).h * C64::new(w / h, 0.0);
            }
            Ok(acc)
        })
        .collect()
}

pub fn compatibility_check(tracker: &Tracker, x: &[f64]) -> Result<CompatibilityReport> {
    let geo = local_geometry(tracker, x)?;
    let dh = qgt_derivatives(tracker, x)?;
    Ok(compatibility_from(&geo, &dh))
}

pub fn compatibility_from(geo: &LocalGeometry, dh: &[CMat]) -> CompatibilityReport {
    let n = geo.dkets.len();
    let u = &geo.first;
    let dg = |m: usize, a: usize, b: usize| dh[m][(a, b)].re;
    let db = |m: usize, a: usize, b: usize| -2.0 * dh[m][(a, b)].im;
    let state = geo.frame.state();
    let mut r = CompatibilityReport {
        identity: 0.0,
        real_part: 0.0,
        imag_part: 0.0,
        symmetry: 0.0,
        normal_part: 0.0,
    };
    for l in 0..n {
        for m in 0..n {
            for v in 0..n {
                let id = dh[m][(l, v)] - u[(l, m, v)] - u[(v, m, l)].conj();
                r.identity = r.identity.max(id.norm());
                let re = u[(l, m, v)].re - 0.5 * (dg(v, l, m) + dg(m, v, l) - dg(l, m, v));
                r.real_part = r.real_part.max(re.abs());
                let im = u[(l, m, v)].im - u[(v, m, l)].im + 0.5 * db(m, l, v);
                r.imag_part = r.imag_part.max(im.abs());
                r.symmetry = r.symmetry.max((u[(l, m, v)] - u[(l, v, m)]).norm());
            }
        }
    }
    for m in 0..n {
        for v in 0..n {
            let normal = state.dotc(&geo.dd[m][v]) + geo.qgt.h[(m, v)];
            r.normal_part = r.normal_part.max(normal.norm());
        }
    }
    r
}

/// `h_{mu nu}` at `x`.
pub fn qgt_at(tracker: &Tracker, x: &[f64]) -> Result<Qgt> {
    let f = tracker.frame(x)?;
    Ok(Qgt::from_dkets(&dkets(tracker, &f)?))
}

pub(crate) fn local_geometry_qgt(tracker: &Tracker, x: &[f64]) -> Result<CMat> {
    Ok(qgt_at(tracker, x)?.h)
}
