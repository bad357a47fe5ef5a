//! Closed-form corrections to third order, phase coefficients and response tensors.
//!
//! Time derivatives of operators are taken in the projected sense
//! `Q (dX/dt) Q` and evaluated on frozen vectors by differencing the operator
//! across the stencil window.

use super::window::Window;
use super::{normalization_betas, AptOrderData, DrivenSystem};
use crate::geometry::{dkets, second_covariant};
use crate::models::EigenFrame;
use crate::{CVec, Error, RMat, Result, C64};

/// `nabla_T |T> = |D_nu n> xddot^nu + Q |D_mu D_nu n> xdot^mu xdot^nu` for a frame at `s`.
fn nabla_tangent(system: &DrivenSystem, frame: &EigenFrame, s: f64) -> Result<CVec> {
    let v = system.velocity(s);
    let a = system.acceleration(s);
    let dk = dkets(&system.tracker, frame)?;
    let mut out = CVec::zeros(frame.dim());
    for (d, x) in dk.iter().zip(&a) {
        out += d * C64::new(*x, 0.0);
    }
    for (mu, vm) in v.iter().enumerate() {
        if *vm == 0.0 {
            continue;
        }
        let dd = second_covariant(&system.tracker, frame, mu)?;
        for (nu, vn) in v.iter().enumerate() {
            out += &dd[nu] * C64::new(vm * vn, 0.0);
        }
    }
    Ok(frame.project(&out))
}

fn r(f: &EigenFrame, k: i32, u: &CVec) -> CVec {
    f.resolvent_raw(k, u)
}

struct Pieces {
    centre: EigenFrame,
    t: CVec,
    /// `nabla_T |T>`.
    nt: CVec,
    /// `(dR/dt) |T>`.
    rdot_t: CVec,
}

fn pieces(w: &Window<'_>) -> Result<Pieces> {
    let centre = w.frame(0).clone();
    let t = w.tangent(0).clone();
    let nt = nabla_tangent(w.system, &centre, w.s)?;
    let rdot_t = w.operator_derivative(0, &t, |f, u| r(f, 1, u));
    Ok(Pieces {
        centre,
        t,
        nt,
        rdot_t,
    })
}

/// Closed-form `|n_1>, |n_2>, |n_3>` (up to order `p <= 3`) at `s`.
pub fn corrections(system: &DrivenSystem, s: f64, p: usize) -> Result<Vec<AptOrderData>> {
    if p > 3 {
        return Err(Error::Config(format!(
            "closed forms are available to third order, got {p}"
        )));
    }
    if p == 0 {
        return Ok(Vec::new());
    }
    let w = Window::new(system, s, if p == 3 { 4 } else { 2 })?;
    let pc = pieces(&w)?;
    let f = &pc.centre;
    let i = C64::new(0.0, 1.0);
    let n1 = r(f, 1, &pc.t) * (-i);
    let mut kets = vec![n1.clone()];
    if p >= 2 {
        let n2 = -(r(f, 2, &pc.nt) + r(f, 1, &pc.rdot_t));
        kets.push(n2);
    }
    if p >= 3 {
        // nabla_T nabla_T |T> from the geometric form at the inner nodes.
        let nts = (-2isize..=2)
            .map(|j| {
                if j == 0 {
                    Ok(None)
                } else {
                    nabla_tangent(system, w.frame(j), s + j as f64 * w.h).map(Some)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let mut field = vec![None; 2 * w.half + 1];
        for (k, v) in nts.into_iter().enumerate() {
            field[w.half - 2 + k] = v;
        }
        let nnt = w.nabla(&field, 0)?;
        // d/dt [R dR/dt Q] applied to the frozen |T>
        let inner = |j: isize| -> CVec {
            let fj = w.frame(j);
            let qt = fj.project(&pc.t);
            let rdot = w.operator_derivative(j, &qt, |g, u| r(g, 1, u));
            r(fj, 1, &rdot)
        };
        let mut d_rrdot = CVec::zeros(f.dim());
        for &(o, wt) in &crate::numerics::stencil::D1_O4 {
            d_rrdot += inner(o as isize) * C64::new(wt / (w.h * system.total_time), 0.0);
        }
        let d_r2 = w.operator_derivative(0, &pc.nt, |g, u| r(g, 2, u));
        let d_r1 = w.operator_derivative(0, &pc.nt, |g, u| r(g, 1, u));
        let alpha1 = -pc.t.dotc(&r(f, 1, &pc.t)).re;
        let n3 = (r(f, 3, &nnt) + r(f, 1, &d_r2) + r(f, 2, &d_r1) + r(f, 1, &d_rrdot)) * i
            + r(f, 1, &n1) * C64::new(alpha1, 0.0);
        kets.push(n3);
    }
    let data = (0..kets.len())
        .map(|k| {
            let c = pc.t.dotc(&kets[k]);
            AptOrderData {
                order: k + 1,
                ket: kets[k].clone(),
                beta: *normalization_betas(&kets[..=k]).last().unwrap(),
                alpha: None,
                alpha_dot: c.im,
                beta_dot: c.re,
            }
        })
        .collect();
    Ok(data)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseCoefficients {
    /// `-<T|R|T>`.
    pub alpha_dot1: f64,
    /// `-<T|R^2|T> / 2`.
    pub beta2: f64,
    pub alpha_dot2: f64,
    pub beta_dot2: f64,
    /// `-Im<T|R^3 nabla_T T> - Im<T|R^2 (dR/dt) T>`.
    pub beta3: f64,
}

pub fn phase_coefficients(system: &DrivenSystem, s: f64) -> Result<PhaseCoefficients> {
    let w = Window::new(system, s, 2)?;
    let pc = pieces(&w)?;
    let f = &pc.centre;
    let t = &pc.t;
    let c2 = -(t.dotc(&r(f, 2, &pc.nt)) + t.dotc(&r(f, 1, &pc.rdot_t)));
    Ok(PhaseCoefficients {
        alpha_dot1: -t.dotc(&r(f, 1, t)).re,
        beta2: -0.5 * t.dotc(&r(f, 2, t)).re,
        alpha_dot2: c2.im,
        beta_dot2: c2.re,
        beta3: -t.dotc(&r(f, 3, &pc.nt)).im - t.dotc(&r(f, 2, &pc.rdot_t)).im,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResponseTensors {
    /// `M_{2 mu nu} = 2 hbar^2 Re <D_mu n|(H - E_n)^{-1}|D_nu n>`.
    pub mass2: RMat,
    /// `E_n + M_2 xdot xdot / 2 + E_n3`.
    pub energy3: f64,
    /// The two terms of `E_n3`: `-2 hbar^3 Im<T|R^2 nabla_T T>` and `-2 hbar^3 Im<T|R (dR/dt) T>`.
    pub en3_terms: [f64; 2],
    pub energy: f64,
}

pub fn response(system: &DrivenSystem, s: f64) -> Result<ResponseTensors> {
    let w = Window::new(system, s, 2)?;
    let pc = pieces(&w)?;
    let f = &pc.centre;
    let hb = system.hbar;
    let dk = dkets(&system.tracker, f)?;
    let n = dk.len();
    let mass2 = RMat::from_fn(n, n, |m, v| {
        -2.0 * hb * hb * dk[m].dotc(&r(f, 1, &dk[v])).re
    });
    let mass2 = super::symmetric_part(&mass2);
    let xd = system.velocity(s);
    let kinetic: f64 = (0..n)
        .flat_map(|m| (0..n).map(move |v| (m, v)))
        .map(|(m, v)| mass2[(m, v)] * xd[m] * xd[v])
        .sum();
    let t = &pc.t;
    let e1 = -2.0 * hb.powi(3) * t.dotc(&r(f, 2, &pc.nt)).im;
    let e2 = -2.0 * hb.powi(3) * t.dotc(&r(f, 1, &pc.rdot_t)).im;
    Ok(ResponseTensors {
        mass2,
        energy3: f.energy() + 0.5 * kinetic + e1 + e2,
        en3_terms: [e1, e2],
        energy: f.energy(),
    })
}
