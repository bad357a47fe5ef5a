//! Adiabatic perturbation theory in the gauge-covariant formulation.
//!
//! The driven state is written as
//! `e^{i phi/hbar} e^{i gamma} prod_k e^{hbar^k (beta_k + i alpha_k)} (|n> + sum_k hbar^k |n_k>)`
//! with `phi = -\int E_n dt`, `gamma` the Berry phase along the path, and
//! correction kets orthogonal to `|n>`. All time derivatives are physical
//! (`d/dt = T^{-1} d/ds`). Corrections come either from the general recurrence
//! or from the closed forms to third order; both share the same stencil
//! window of frames along the path.

mod closed;
mod solution;
mod window;

use crate::geometry::dkets;
use crate::models::{EigenFrame, Tracker};
use crate::path::ParamPath;
use crate::transport::PathGauge;
use crate::{CVec, Error, RMat, Result, C64};

pub use closed::{corrections, phase_coefficients, response, PhaseCoefficients, ResponseTensors};
pub use solution::{assemble_state, normalization_betas, solve, AptSample, AptSolution, Route};
pub use window::{covariant_time_derivative, recurrence, RecurrenceWindow, Window};

/// Highest order supported by the recurrence.
pub const P_MAX: usize = 6;

/// A Hamiltonian family driven along a path in total time `T`.
#[derive(Debug, Clone)]
pub struct DrivenSystem {
    pub tracker: Tracker,
    pub path: ParamPath,
    pub total_time: f64,
    pub hbar: f64,
    gauge: PathGauge,
}

impl DrivenSystem {
    pub fn new(tracker: Tracker, path: ParamPath, total_time: f64, hbar: f64) -> Result<Self> {
        if !(total_time > 0.0) || !(hbar > 0.0) {
            return Err(Error::Config("total time and hbar must be positive".into()));
        }
        if path.dim() != tracker.n_params() {
            return Err(Error::Dimension(format!(
                "path has dimension {}, family has {} parameters",
                path.dim(),
                tracker.n_params()
            )));
        }
        let gauge = PathGauge::new(&tracker, &path)?;
        Ok(Self {
            tracker,
            path,
            total_time,
            hbar,
            gauge,
        })
    }

    /// Same system with a different total time.
    pub fn with_total_time(&self, total_time: f64) -> Self {
        Self {
            total_time,
            ..self.clone()
        }
    }

    /// `epsilon = hbar / (Delta T)`.
    pub fn epsilon(&self) -> f64 {
        self.hbar / (self.tracker.family.energy_scale() * self.total_time)
    }

    pub fn path_gauge(&self) -> &PathGauge {
        &self.gauge
    }

    /// Tracked frame at `s` in the path gauge.
    pub fn frame(&self, s: f64) -> Result<EigenFrame> {
        self.gauge.frame(s)
    }

    /// Physical velocity `dx/dt` at `s`.
    pub fn velocity(&self, s: f64) -> Vec<f64> {
        self.path
            .velocity(s)
            .iter()
            .map(|v| v / self.total_time)
            .collect()
    }

    /// Physical acceleration `d^2x/dt^2` at `s`.
    pub fn acceleration(&self, s: f64) -> Vec<f64> {
        let t2 = self.total_time * self.total_time;
        self.path.jet(s).a.iter().map(|a| a / t2).collect()
    }
}

/// One order of the expansion at a sample point.
#[derive(Debug, Clone, PartialEq)]
pub struct AptOrderData {
    pub order: usize,
    /// `|n_k>`.
    pub ket: CVec,
    pub beta: f64,
    /// Integrated phase `alpha_k`, when a quadrature has been run.
    pub alpha: Option<f64>,
    pub alpha_dot: f64,
    pub beta_dot: f64,
}

/// `sum_{m != n} |m><m|w> / (E_n - E_m)^k` for `w` orthogonal to `|n>`.
pub fn resolvent_apply(frame: &EigenFrame, k: i32, w: &CVec) -> Result<CVec> {
    let overlap = frame.state().dotc(w).norm();
    if overlap > 1e-8 * w.norm().max(1.0) {
        return Err(Error::NotOrthogonal { overlap });
    }
    Ok(frame.resolvent_raw(k, w))
}

/// `|T> = |D_nu n> dx^nu/dt` for `frame` at path parameter `s`.
pub fn tangent_of(system: &DrivenSystem, frame: &EigenFrame, s: f64) -> Result<CVec> {
    let v = system.velocity(s);
    let mut t = CVec::zeros(frame.dim());
    if v.iter().all(|x| *x == 0.0) {
        return Ok(t);
    }
    for (d, x) in dkets(&system.tracker, frame)?.into_iter().zip(v) {
        t += d * C64::new(x, 0.0);
    }
    Ok(t)
}

/// Tangent ket in the path gauge.
pub fn tangent_ket(system: &DrivenSystem, s: f64) -> Result<CVec> {
    let f = system.frame(s)?;
    tangent_of(system, &f, s)
}

pub(crate) fn symmetric_part(m: &RMat) -> RMat {
    (m + m.transpose()) * 0.5
}
