//! Phases by quadrature and assembly of the `p`-th order state.

use super::{corrections, recurrence, AptOrderData, DrivenSystem};
use crate::numerics::quad::{cumulative, QuadOptions};
use crate::{CVec, Error, Result, C64};

/// How the correction kets are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Route {
    /// General recurrence (any order up to the supported maximum).
    #[default]
    Recurrence,
    /// Closed forms (orders up to 3).
    ClosedForm,
}

/// `beta_1..beta_p` from `|<psi|psi>| = 1 + O(hbar^{p+1})`:
/// `beta_k = -1/2 [ln(1 + sum_k hbar^k S_k)]_k`, `S_k = sum_{i+j=k} <n_i|n_j>`.
pub fn normalization_betas(kets: &[CVec]) -> Vec<f64> {
    let p = kets.len();
    let s: Vec<f64> = (0..=p)
        .map(|k| (1..k).map(|i| kets[i - 1].dotc(&kets[k - i - 1]).re).sum())
        .collect();
    let mut l = vec![0.0; p + 1];
    for k in 1..=p {
        let conv: f64 = (1..k).map(|m| (k - m) as f64 * l[k - m] * s[m]).sum();
        l[k] = s[k] - conv / k as f64;
    }
    l[1..].iter().map(|v| -0.5 * v).collect()
}

#[derive(Debug, Clone)]
pub struct AptSample {
    /// Path parameter.
    pub s: f64,
    /// Physical time `s T`.
    pub t: f64,
    /// Dynamical phase `phi = -\int_0^t E_n dt'` (enters as `phi / hbar`).
    pub phi: f64,
    /// Berry phase `gamma(t)`.
    pub gamma: f64,
    pub energy: f64,
    /// Tracked eigenstate `|n>` in the path gauge.
    pub n0: CVec,
    pub orders: Vec<AptOrderData>,
    /// Assembled `|psi^(p)(t)>`.
    pub state: CVec,
}

#[derive(Debug, Clone)]
pub struct AptSolution {
    pub p: usize,
    pub route: Route,
    pub samples: Vec<AptSample>,
}

fn orders_at(system: &DrivenSystem, s: f64, p: usize, route: Route) -> Result<Vec<AptOrderData>> {
    match route {
        Route::Recurrence => recurrence(system, s, p),
        Route::ClosedForm => corrections(system, s, p),
    }
}

/// Solve to order `p` at the path parameters `grid` (ascending, within `[0, 1]`).
pub fn solve(system: &DrivenSystem, p: usize, grid: &[f64], route: Route) -> Result<AptSolution> {
    if grid.windows(2).any(|w| w[1] < w[0]) || grid.iter().any(|s| !(0.0..=1.0).contains(s)) {
        return Err(Error::Config(
            "sample points must be ascending within [0, 1]".into(),
        ));
    }
    let tt = system.total_time;
    let mut knots = vec![0.0];
    knots.extend(grid.iter().copied().filter(|&s| s > 0.0));
    knots.dedup();
    let tracker = &system.tracker;
    let energy_opts = QuadOptions {
        abs_tol: 1e-14,
        rel_tol: 1e-14,
        max_depth: 16,
        points: 10,
        noise: 1e-15,
    };
    let energies = cumulative(
        |s| Ok(vec![tracker.frame(&system.path.point(s))?.energy()]),
        &knots,
        &energy_opts,
    )?;
    let alphas = if p == 0 {
        vec![Vec::new(); knots.len()]
    } else {
        let opts = QuadOptions {
            abs_tol: 1e-13 / tt,
            rel_tol: 1e-11,
            max_depth: 12,
            points: 8,
            noise: 1e-10,
        };
        cumulative(
            |s| {
                Ok(orders_at(system, s, p, route)?
                    .iter()
                    .map(|o| o.alpha_dot)
                    .collect())
            },
            &knots,
            &opts,
        )?
    };
    let gammas = system.path_gauge().phases(grid)?;
    let mut samples = Vec::with_capacity(grid.len());
    for (gi, &s) in grid.iter().enumerate() {
        let k = knots.iter().position(|&v| v == s).unwrap_or(0);
        let phi = -tt * energies[k].first().copied().unwrap_or(0.0);
        let frame = system.frame(s)?;
        let mut orders = orders_at(system, s, p, route)?;
        for (i, o) in orders.iter_mut().enumerate() {
            o.alpha = Some(tt * alphas[k].get(i).copied().unwrap_or(0.0));
        }
        let hb = system.hbar;
        let mut exponent = C64::new(0.0, phi / hb + gammas[gi]);
        let mut ket = frame.state();
        for o in &orders {
            let w = hb.powi(o.order as i32);
            exponent += C64::new(o.beta, o.alpha.unwrap_or(0.0)) * w;
            ket += &o.ket * C64::new(w, 0.0);
        }
        let state = ket * exponent.exp();
        samples.push(AptSample {
            s,
            t: s * tt,
            phi,
            gamma: gammas[gi],
            energy: frame.energy(),
            n0: frame.state(),
            orders,
            state,
        });
    }
    Ok(AptSolution { p, route, samples })
}

/// `|psi^(p)(t)>` at physical time `t`.
pub fn assemble_state(system: &DrivenSystem, t: f64, p: usize) -> Result<CVec> {
    let s = t / system.total_time;
    Ok(solve(system, p, &[s], Route::Recurrence)?
        .samples
        .remove(0)
        .state)
}
