//! Frames on a uniform stencil in the path parameter around one point, and the
//! recurrence for the correction kets.
//!
//! Every frame in a window is aligned to the centre (`<n_0|n_j>` real
//! positive). The covariant derivative at node `j` re-aligns its neighbours to
//! node `j` before differencing, which removes the Berry connection at `j`,
//! then projects off `|n_j>`.

use super::{normalization_betas, tangent_of, AptOrderData, DrivenSystem, P_MAX};
use crate::models::{gauge_fix, EigenFrame};
use crate::numerics::stencil::D1_O4;
use crate::{CVec, Error, Result, C64};

pub struct Window<'a> {
    pub system: &'a DrivenSystem,
    pub s: f64,
    /// Step in `s`.
    pub h: f64,
    pub half: usize,
    frames: Vec<EigenFrame>,
    tangents: Vec<CVec>,
}

fn idx(half: usize, j: isize) -> usize {
    (j + half as isize) as usize
}

impl<'a> Window<'a> {
    pub fn new(system: &'a DrivenSystem, s: f64, half: usize) -> Result<Self> {
        let h = system.tracker.settings.path_step;
        let centre = system.frame(s)?;
        let mut frames = Vec::with_capacity(2 * half + 1);
        let mut tangents = Vec::with_capacity(2 * half + 1);
        for j in -(half as isize)..=half as isize {
            let sj = s + j as f64 * h;
            let f = if j == 0 {
                centre.clone()
            } else {
                let raw = system
                    .tracker
                    .frame(&system.path.point(sj))
                    .map_err(|e| Error::StencilFailure(format!("at s = {sj}: {e}")))?;
                gauge_fix(&raw, &centre)
                    .map_err(|e| Error::StencilFailure(format!("at s = {sj}: {e}")))?
            };
            tangents.push(tangent_of(system, &f, sj)?);
            frames.push(f);
        }
        Ok(Self {
            system,
            s,
            h,
            half,
            frames,
            tangents,
        })
    }

    pub fn frame(&self, j: isize) -> &EigenFrame {
        &self.frames[idx(self.half, j)]
    }

    pub fn tangent(&self, j: isize) -> &CVec {
        &self.tangents[idx(self.half, j)]
    }

    fn dt(&self) -> f64 {
        self.h * self.system.total_time
    }

    /// Unit factor re-expressing a ket given in the gauge of node `k` in the gauge of node `j`.
    fn link(&self, j: isize, k: isize) -> C64 {
        let ov = self.frame(j).state().dotc(&self.frame(k).state());
        ov.conj() / ov.norm()
    }

    /// `(1 - |n_j><n_j|)(d/dt + i A.xdot)` of a ket field known at `j-2..=j+2`.
    pub fn nabla(&self, field: &[Option<CVec>], j: isize) -> Result<CVec> {
        let mut acc = CVec::zeros(self.frame(0).dim());
        for &(o, w) in &D1_O4 {
            let k = j + o as isize;
            let v = field
                .get(idx(self.half, k))
                .and_then(|v| v.as_ref())
                .ok_or_else(|| Error::StencilFailure(format!("ket field missing at node {k}")))?;
            acc += v * (self.link(j, k) * (w / self.dt()));
        }
        Ok(self.frame(j).project(&acc))
    }

    /// `d/dt [X(t) u]` at node `j` for a frozen vector `u`, where `X(t)` is built from the frame at `t`.
    pub fn operator_derivative(
        &self,
        j: isize,
        u: &CVec,
        op: impl Fn(&EigenFrame, &CVec) -> CVec,
    ) -> CVec {
        let mut acc = CVec::zeros(u.len());
        for &(o, w) in &D1_O4 {
            acc += op(self.frame(j + o as isize), u) * C64::new(w / self.dt(), 0.0);
        }
        acc
    }
}

/// Covariant time derivative of a ket field at `s`. The field is evaluated at
/// stencil points together with the frame (aligned to the centre) it must be
/// expressed in; the result is in the path gauge at `s`.
pub fn covariant_time_derivative(
    system: &DrivenSystem,
    s: f64,
    field: &dyn Fn(f64, &EigenFrame) -> Result<CVec>,
) -> Result<CVec> {
    let w = Window::new(system, s, 2)?;
    let values = (-2isize..=2)
        .map(|j| {
            if j == 0 {
                Ok(None)
            } else {
                field(s + j as f64 * w.h, w.frame(j)).map(Some)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    w.nabla(&values, 0)
}

/// Correction kets of increasing order on a window.
pub struct RecurrenceWindow<'a> {
    pub window: Window<'a>,
    /// `kets[k - 1][node]` is `|n_k>` where available.
    kets: Vec<Vec<Option<CVec>>>,
    /// `beta_dot_k + i alpha_dot_k = <T|n_k>` per node.
    coeffs: Vec<Vec<Option<C64>>>,
}

impl<'a> RecurrenceWindow<'a> {
    /// Window wide enough for orders up to `p`.
    pub fn new(system: &'a DrivenSystem, s: f64, p: usize) -> Result<Self> {
        if p > P_MAX {
            return Err(Error::Config(format!(
                "order {p} exceeds the supported maximum {P_MAX}"
            )));
        }
        let half = 2 * p.saturating_sub(1);
        Ok(Self {
            window: Window::new(system, s, half)?,
            kets: Vec::new(),
            coeffs: Vec::new(),
        })
    }

    pub fn order(&self) -> usize {
        self.kets.len()
    }

    /// `|n_k>` at node `j`.
    pub fn ket(&self, k: usize, j: isize) -> Option<&CVec> {
        self.kets
            .get(k - 1)?
            .get(idx(self.window.half, j))?
            .as_ref()
    }

    /// Advance by one order, returning the data at the centre:
    /// `|n_p> = -i R nabla |n_{p-1}> - i sum_{k=1}^{p-2} (beta_dot_k + i alpha_dot_k) R |n_{p-1-k}>`.
    pub fn step(&mut self) -> Result<AptOrderData> {
        let p = self.order() + 1;
        let w = &self.window;
        let reach = 2 * (p - 1);
        if reach > w.half {
            return Err(Error::Config(format!("window too narrow for order {p}")));
        }
        let radius = (w.half - reach) as isize;
        let nodes = 2 * w.half + 1;
        let mut kets: Vec<Option<CVec>> = vec![None; nodes];
        let mut coeffs: Vec<Option<C64>> = vec![None; nodes];
        let i = C64::new(0.0, 1.0);
        for j in -radius..=radius {
            let f = w.frame(j);
            let ket = if p == 1 {
                f.resolvent_raw(1, w.tangent(j)) * (-i)
            } else {
                let mut rhs = w.nabla(&self.kets[p - 2], j)?;
                for k in 1..=p.saturating_sub(2) {
                    let ck = self.coeffs[k - 1][idx(w.half, j)].expect("lower order covers node");
                    let lower = self.kets[p - 2 - k][idx(w.half, j)]
                        .as_ref()
                        .expect("lower order covers node");
                    rhs += lower * ck;
                }
                f.resolvent_raw(1, &rhs) * (-i)
            };
            coeffs[idx(w.half, j)] = Some(w.tangent(j).dotc(&ket));
            kets[idx(w.half, j)] = Some(ket);
        }
        self.kets.push(kets);
        self.coeffs.push(coeffs);
        let centre: Vec<CVec> = (1..=p).map(|k| self.ket(k, 0).unwrap().clone()).collect();
        let c = self.coeffs[p - 1][idx(w.half, 0)].unwrap();
        Ok(AptOrderData {
            order: p,
            ket: centre[p - 1].clone(),
            beta: *normalization_betas(&centre).last().unwrap(),
            alpha: None,
            alpha_dot: c.im,
            beta_dot: c.re,
        })
    }
}

/// Orders `1..=p` at `s` from the recurrence.
pub fn recurrence(system: &DrivenSystem, s: f64, p: usize) -> Result<Vec<AptOrderData>> {
    if p == 0 {
        return Ok(Vec::new());
    }
    let mut rw = RecurrenceWindow::new(system, s, p)?;
    (0..p).map(|_| rw.step()).collect()
}
