//! Exact propagation of the driven Schrödinger equation and convergence-order fits.

use rayon::prelude::*;

use crate::apt::{solve, DrivenSystem, Route};
use crate::numerics::ode::{Collocation, OdeOptions};
use crate::numerics::{fit_line, LineFit};
use crate::{CMat, CVec, Error, Result, C64};

/// Default local tolerance of the exact propagator.
pub const TOL_PROPAGATE: f64 = 1e-12;
/// Errors below this are treated as exact (no slope is fitted).
pub const NOISE_FLOOR: f64 = 1e-10;
pub const R2_MIN: f64 = 0.98;

#[derive(Debug, Clone)]
pub struct PropagationResult {
    pub times: Vec<f64>,
    pub states: Vec<CVec>,
    /// `max |‖psi‖ - 1|` over the samples.
    pub norm_drift: f64,
    pub tol: f64,
    /// Set when the drift exceeds `10 tol`.
    pub integrator_warning: bool,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

/// Solve `i hbar d/dt psi = H(x(t/T)) psi` from `t = 0`, sampling at `times`.
pub fn propagate(system: &DrivenSystem, psi0: &CVec, times: &[f64]) -> Result<PropagationResult> {
    propagate_with(system, psi0, times, TOL_PROPAGATE)
}

pub fn propagate_with(
    system: &DrivenSystem,
    psi0: &CVec,
    times: &[f64],
    tol: f64,
) -> Result<PropagationResult> {
    if (psi0.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::Config(format!(
            "initial state has norm {}",
            psi0.norm()
        )));
    }
    if psi0.len() != system.tracker.dim() {
        return Err(Error::Dimension(format!(
            "state has {} components, family {}",
            psi0.len(),
            system.tracker.dim()
        )));
    }
    let tt = system.total_time;
    let factor = C64::new(0.0, -1.0 / system.hbar);
    let m = |t: f64| -> Result<CMat> {
        Ok(system.tracker.hamiltonian(&system.path.point(t / tt))? * factor)
    };
    let breaks: Vec<f64> = system.path.breakpoints().iter().map(|b| b * tt).collect();
    let y0 = CMat::from_column_slice(psi0.len(), 1, psi0.as_slice());
    let opts = OdeOptions {
        tol,
        ..OdeOptions::default()
    };
    // the integrator needs outputs > 0; t = 0 is the initial state itself
    let positive: Vec<f64> = times.iter().copied().filter(|&t| t > 0.0).collect();
    let out = Collocation::new(opts.stages).solve(m, 0.0, &y0, &positive, &breaks, &opts)?;
    let mut states = Vec::with_capacity(times.len());
    let mut it = out.states.iter();
    for &t in times {
        if t > 0.0 {
            states.push(
                it.next()
                    .expect("one state per positive time")
                    .column(0)
                    .into_owned(),
            );
        } else {
            states.push(psi0.clone());
        }
    }
    let norm_drift = states
        .iter()
        .map(|s| (s.norm() - 1.0).abs())
        .fold(0.0, f64::max);
    let integrator_warning = norm_drift > 10.0 * tol;
    if integrator_warning {
        log::warn!(
            "norm drift {norm_drift:e} exceeds 10 x tol = {:e}",
            10.0 * tol
        );
    }
    Ok(PropagationResult {
        times: times.to_vec(),
        states,
        norm_drift,
        tol,
        integrator_warning,
        accepted_steps: out.accepted,
        rejected_steps: out.rejected,
    })
}

/// `min_theta ‖a - e^{i theta} b‖`.
pub fn phase_min_distance(a: &CVec, b: &CVec) -> f64 {
    (a.norm_squared() + b.norm_squared() - 2.0 * a.dotc(b).norm())
        .max(0.0)
        .sqrt()
}

#[derive(Debug, Clone)]
pub struct OrderFit {
    pub p: usize,
    pub t_values: Vec<f64>,
    pub epsilons: Vec<f64>,
    /// Phase-sensitive `max_t ‖psi^(p) - psi‖`.
    pub errors: Vec<f64>,
    /// Same with the global phase minimized.
    pub errors_phase_min: Vec<f64>,
    /// `None` when all errors are at the noise floor.
    pub slope: Option<f64>,
    pub slope_phase_min: Option<f64>,
    pub r2: Option<f64>,
    pub max_norm_drift: f64,
}

impl OrderFit {
    /// Slope requirement `slope >= p + margin` with an acceptable fit.
    pub fn passes(&self, margin: f64) -> bool {
        match (self.slope, self.r2) {
            (Some(s), Some(r2)) => s >= self.p as f64 + margin && r2 >= R2_MIN,
            _ => self.errors.iter().all(|e| *e < NOISE_FLOOR),
        }
    }
}

/// Errors of `psi^(p)` against exact propagation at each `T`, with log-log fits against `epsilon`.
/// `samples` are path parameters in `(0, 1]`.
pub fn order_scan(
    system: &DrivenSystem,
    p: usize,
    t_values: &[f64],
    samples: &[f64],
) -> Result<OrderFit> {
    if t_values.is_empty() || samples.is_empty() {
        return Err(Error::Config(
            "need at least one T value and one sample".into(),
        ));
    }
    let mut grid = vec![0.0];
    grid.extend(samples.iter().copied().filter(|&s| s > 0.0));
    let rows: Vec<Result<(f64, f64, f64, f64)>> = t_values
        .par_iter()
        .map(|&tt| {
            let sys = system.with_total_time(tt);
            let apt = solve(&sys, p, &grid, Route::Recurrence)?;
            let start = &apt.samples[0].state;
            let psi0 = start / C64::new(start.norm(), 0.0);
            let times: Vec<f64> = grid.iter().map(|s| s * tt).collect();
            let exact = propagate(&sys, &psi0, &times)?;
            let mut err = 0.0f64;
            let mut err_pm = 0.0f64;
            for (a, b) in apt.samples.iter().zip(&exact.states).skip(1) {
                err = err.max((&a.state - b).norm());
                err_pm = err_pm.max(phase_min_distance(&a.state, b));
            }
            Ok((sys.epsilon(), err, err_pm, exact.norm_drift))
        })
        .collect();
    let mut fit = OrderFit {
        p,
        t_values: t_values.to_vec(),
        epsilons: Vec::new(),
        errors: Vec::new(),
        errors_phase_min: Vec::new(),
        slope: None,
        slope_phase_min: None,
        r2: None,
        max_norm_drift: 0.0,
    };
    for row in rows {
        let (eps, e, epm, drift) = row?;
        fit.epsilons.push(eps);
        fit.errors.push(e);
        fit.errors_phase_min.push(epm);
        fit.max_norm_drift = fit.max_norm_drift.max(drift);
    }
    if t_values.len() >= 2 && fit.errors.iter().any(|e| *e >= NOISE_FLOOR) {
        let lx: Vec<f64> = fit.epsilons.iter().map(|e| e.ln()).collect();
        let line = |errs: &[f64]| -> LineFit {
            fit_line(
                &lx,
                &errs.iter().map(|e| e.max(1e-300).ln()).collect::<Vec<_>>(),
            )
        };
        let main = line(&fit.errors);
        fit.slope = Some(main.slope);
        fit.r2 = Some(main.r2);
        fit.slope_phase_min = Some(line(&fit.errors_phase_min).slope);
    }
    Ok(fit)
}

/// Smallest accepted ratio between the largest and smallest `T`.
pub const MIN_T_SPAN: f64 = 8.0;

/// At least four positive `T` values with `T_max / T_min >= MIN_T_SPAN`.
pub fn check_t_values(t_values: &[f64]) -> Result<()> {
    let (lo, hi) = t_values
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &t| (a.min(t), b.max(t)));
    if t_values.len() < 4 || !(lo > 0.0) || hi < MIN_T_SPAN * lo * (1.0 - 1e-12) {
        return Err(Error::Config(format!(
            "order check needs at least 4 T values with T_max / T_min >= {MIN_T_SPAN}"
        )));
    }
    Ok(())
}

/// [`order_scan`] with the fit requirements: at least four `T` values with
/// `T_max / T_min >= 8`, and `r^2 >= 0.98` unless all errors are at the noise floor.
pub fn order_check(
    system: &DrivenSystem,
    p: usize,
    t_values: &[f64],
    samples: &[f64],
) -> Result<OrderFit> {
    check_t_values(t_values)?;
    let fit = order_scan(system, p, t_values, samples)?;
    if let (Some(r2), Some(slope)) = (fit.r2, fit.slope) {
        if r2 < R2_MIN {
            return Err(Error::FitRejected { r2, slope });
        }
    }
    Ok(fit)
}
